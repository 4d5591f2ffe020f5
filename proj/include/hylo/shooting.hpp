#pragma once

#include "hylo/minimizer.hpp"
#include "hylo/potential.hpp"

namespace hylo {

struct ShootResult {
  Field profile;
  double omega = 0.0;
  /// u(0) for ell = 0, the coefficient of r^|ell| otherwise.
  double shoot_param = 0.0;
  /// Slope of -log(u r^{(dim-1)/2}) over the last integrated decade.
  double decay_rate = 0.0;
  /// Largest local RK4 error per unit step over the integrated region.
  double residual = 0.0;
  int bisection_steps = 0;
  /// Radius beyond which the profile is the linearized decaying tail.
  double cutoff_radius = 0.0;
  double energy = 0.0;
  double charge = 0.0;
};

/// Ground state of u'' + (dim-1)/r u' = W'(u) + ell^2/r^2 u - omega^2 u by
/// bisection between undershooting and overshooting trajectories.
/// Throws NoDecayingSolutionError outside the frequency window and
/// BracketError if no bracketing pair is found.
ShootResult shoot(const PotentialSpec& potential, int dim, int ell, double omega, const RadialGrid& grid);

struct CrossValidation {
  double l2_distance = 0.0;        // relative, on the record's grid
  double energy_difference = 0.0;  // relative
  double omega_mismatch = 0.0;     // relative
  bool comparable = false;         // omega mismatch <= 5 %
  bool pass = false;
};

/// Compares a shooting profile with a variational solution; the shooting
/// profile is linearly resampled if the grids differ.
CrossValidation cross_validate(const ShootResult& shot, const SolutionRecord& record);

}  // namespace hylo
