#include "hylo/grid.hpp"

#include "hylo/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hylo {

RadialGrid::RadialGrid(int dim, int ell, double r_max, int n_nodes)
    : dim_(dim), ell_(ell), r_max_(r_max), n_nodes_(n_nodes) {
  if (dim != 2 && dim != 3) throw PreconditionError("RadialGrid: dim must be 2 or 3");
  if (ell != 0 && dim != 2) throw PreconditionError("RadialGrid: nonzero vorticity requires dim = 2");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw PreconditionError("RadialGrid: r_max must be positive");
  if (n_nodes < 64) throw PreconditionError("RadialGrid: need at least 64 nodes");
}

double RadialGrid::surface_measure() const {
  return dim_ == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
}

double RadialGrid::weight(std::size_t i) const {
  const double ri = r(i);
  return surface_measure() * (dim_ == 2 ? ri : ri * ri) * h();
}

double RadialGrid::boundary_weight() const {
  return 0.5 * surface_measure() * (dim_ == 2 ? r_max_ : r_max_ * r_max_) * h();
}

std::vector<double> RadialGrid::quad_weights() const {
  std::vector<double> w(size() + 1);
  for (std::size_t i = 0; i < size(); ++i) w[i] = weight(i);
  w.back() = boundary_weight();
  return w;
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> r(size() + 1);
  for (std::size_t i = 0; i <= size(); ++i) r[i] = static_cast<double>(i + 1) * h();
  return r;
}

std::uint64_t RadialGrid::fingerprint() const {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ull;
    }
  };
  const std::int64_t ints[3] = {dim_, ell_, n_nodes_};
  mix(ints, sizeof ints);
  mix(&r_max_, sizeof r_max_);
  return hash;
}

std::string RadialGrid::describe() const {
  std::ostringstream s;
  s << "dim=" << dim_ << " ell=" << ell_ << " r_max=" << format_double(r_max_) << " n_nodes=" << n_nodes_;
  return s.str();
}

Field::Field(RadialGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(RadialGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw GridMismatchError("Field: value count does not match grid");
}

double Field::value_at_origin() const {
  if (grid_.ell() != 0) return 0.0;
  return (4.0 * values_[0] - values_[1]) / 3.0;
}

double Field::interpolate(double r) const {
  const double h = grid_.h();
  if (r < 0.0) r = -r;
  if (r >= grid_.r_max()) return 0.0;
  const double x = r / h;
  const auto k = static_cast<std::size_t>(x);  // r lies between node k-1 and node k (node -1 is the origin)
  const double t = x - static_cast<double>(k);
  const double left = k == 0 ? value_at_origin() : values_[k - 1];
  const double right = k < values_.size() ? values_[k] : 0.0;
  return (1.0 - t) * left + t * right;
}

Field Field::resample(const RadialGrid& target) const {
  Field out(target);
  for (std::size_t i = 0; i < target.size(); ++i) out[i] = interpolate(target.r(i));
  return out;
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b, const char* where) {
  if (!(a == b)) throw GridMismatchError(std::string(where) + ": fields live on different grids");
}

double integrate(const RadialGrid& grid, std::span<const double> samples) {
  const std::size_t n = grid.size();
  if (samples.size() != n && samples.size() != n + 1)
    throw GridMismatchError("integrate: sample count does not match grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += grid.weight(i) * samples[i];
  if (samples.size() == n + 1) acc += grid.boundary_weight() * samples[n];
  return acc;
}

double integrate(const Field& f) { return integrate(f.grid(), f.values()); }

double inner(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  const auto& g = a.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += g.weight(i) * a[i] * b[i];
  return acc;
}

double norm(const Field& a) { return std::sqrt(inner(a, a)); }

SymTridiagonal stiffness_matrix(const RadialGrid& grid) {
  const std::size_t n = grid.size();
  const double h = grid.h();
  const double s = grid.surface_measure();
  auto face = [&](double r) { return s * (grid.dim() == 2 ? r : r * r) / h; };
  SymTridiagonal a(n);
  for (std::size_t i = 0; i < n; ++i) {
    // face between node i and node i + 1 (node n is the Dirichlet node)
    const double fw = face((static_cast<double>(i) + 1.5) * h);
    a.diag[i] += fw;
    if (i + 1 < n) {
      a.diag[i + 1] += fw;
      a.off[i] = -fw;
    }
  }
  // u(0) = 0 closure for vortices; for ell = 0 the missing origin face is the
  // symmetric ghost (zero flux through r = 0).
  if (grid.ell() != 0) a.diag[0] += face(0.5 * h);
  return a;
}

std::vector<double> centrifugal_weights(const RadialGrid& grid) {
  std::vector<double> c(grid.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = grid.weight(i) / (grid.r(i) * grid.r(i));
  return c;
}

SymTridiagonal l1_matrix(const RadialGrid& grid, double m2) {
  SymTridiagonal a = stiffness_matrix(grid);
  const double l2 = static_cast<double>(grid.ell()) * grid.ell();
  const auto c = centrifugal_weights(grid);
  for (std::size_t i = 0; i < a.size(); ++i) a.diag[i] += l2 * c[i] + m2 * grid.weight(i);
  return a;
}

double dirichlet_form(const Field& u) {
  const auto& g = u.grid();
  const auto a = stiffness_matrix(g);
  const auto au = a.multiply(u.values());
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += au[i] * u[i];
  return acc;
}

double centrifugal_form(const Field& u) {
  const auto c = centrifugal_weights(u.grid());
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += c[i] * u[i] * u[i];
  return acc;
}

double l1_form(const Field& u, double m2) {
  const double l2 = static_cast<double>(u.grid().ell()) * u.grid().ell();
  return dirichlet_form(u) + l2 * centrifugal_form(u) + m2 * inner(u, u);
}

Field apply_l1(const RadialGrid& grid, double m2, const Field& u) {
  require_same_grid(grid, u.grid(), "apply_l1");
  const auto a = l1_matrix(grid, m2);
  Field out(grid, a.multiply(u.values()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= grid.weight(i);
  return out;
}

Field apply_l0(const RadialGrid& grid, const Field& u) {
  require_same_grid(grid, u.grid(), "apply_l0");
  return u;
}

double rayleigh_min(const RadialGrid& grid, double m2, int max_iters, double tol) {
  // Shift by m2: the shifted operator S + ell^2 C is SPD under Dirichlet closure,
  // and the convergence ratio (lambda_1 - m2) / (lambda_2 - m2) is small.
  const std::size_t n = grid.size();
  SymTridiagonal shifted = l1_matrix(grid, 0.0);
  const auto full = l1_matrix(grid, m2);
  std::vector<double> x(n), mx(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 - grid.r(i) / grid.r_max();
  std::vector<double> trace;
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) mx[i] = grid.weight(i) * x[i];
    x = shifted.solve(mx);
    const auto ax = full.multiply(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += ax[i] * x[i];
      den += grid.weight(i) * x[i] * x[i];
    }
    const double next = num / den;
    const double scale = 1.0 / std::sqrt(den);
    for (auto& v : x) v *= scale;
    trace.push_back(next);
    if (it > 0 && std::abs(next - lambda) < tol * std::abs(next)) return next;
    lambda = next;
  }
  std::ostringstream msg;
  msg << "rayleigh_min: no convergence after " << max_iters << " iterations; last estimates:";
  for (std::size_t k = trace.size() > 5 ? trace.size() - 5 : 0; k < trace.size(); ++k)
    msg << ' ' << format_double(trace[k]);
  throw ConvergenceError(msg.str());
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::string field_csv(const Field& u, const std::string& column) {
  std::string out = "r," + column + "\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    out += format_double(u.grid().r(i));
    out += ',';
    out += format_double(u[i]);
    out += '\n';
  }
  return out;
}

void write_field_csv(const Field& u, const std::string& path, const std::string& column) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << field_csv(u, column);
}

Field read_field_csv(const RadialGrid& grid, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("r,", 0) != 0)
    throw ConfigError("profile '" + path + "': missing r,<column> header");
  Field u(grid);
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("profile '" + path + "': malformed row");
    double r = 0.0, v = 0.0;
    auto r1 = std::from_chars(line.data(), line.data() + comma, r);
    auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), v);
    if (r1.ec != std::errc{} || r2.ec != std::errc{}) throw ConfigError("profile '" + path + "': bad number");
    if (i < grid.size()) {
      if (std::abs(r - grid.r(i)) > 1e-9 * grid.r_max())
        throw GridMismatchError("profile '" + path + "': node positions do not match the grid");
      u[i] = v;
    } else if (i > grid.size()) {
      throw GridMismatchError("profile '" + path + "': too many rows for the grid");
    }
    ++i;
  }
  if (i < grid.size()) throw GridMismatchError("profile '" + path + "': too few rows for the grid");
  return u;
}

}  // namespace hylo
