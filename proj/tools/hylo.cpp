#include "hylo/cli.hpp"

int main(int argc, char** argv) { return hylo::cli::run(argc, argv); }
