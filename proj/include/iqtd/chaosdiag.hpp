#pragma once

// Numerical diagnostics for the dynamical claims about the solution semigroup:
// periodic points built from imaginary-axis eigenvectors, finite surrogates of
// the eigenvector-field chaos criterion, upper-density estimates for the
// distributional-chaos time sets, and growth/decay rates on eigenvector spans.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "iqtd/generator.hpp"
#include "iqtd/semigroup.hpp"
#include "iqtd/seqspace.hpp"

namespace iqtd {

// ---------------------------------------------------------------------------
// Periodic points
// ---------------------------------------------------------------------------

/// 2 Re(h_{i omega}) with omega = 2 pi harmonic / period, n coordinates.
/// harmonic = 0 gives the constant platoon 2 h_0. Throws InadmissiblePeriod
/// (carrying 2 pi harmonic / eps_max) when omega >= eps_max.
WeightedVector make_periodic_point(const GeneratorSpec& gen, double period, int harmonic, Weight w,
                                   Index n);

/// ||T_period x - x||_s / ||x||_s over the plan's trustworthy coordinates.
double verify_periodicity(const GeneratorSpec& gen, const WeightedVector& x, double period,
                          const EvolutionPlan& plan);

// ---------------------------------------------------------------------------
// Eigenvector-field criterion surrogates
// ---------------------------------------------------------------------------

struct DiskGrid {
  double epsilon = 0.0;
  std::vector<Complex> points;

  /// Violated invariants: points inside |mu| < epsilon, pairwise distinct,
  /// at least one on the imaginary axis.
  std::vector<std::string> violations() const;
};

/// 0 plus two rings at radii 0.45 eps and 0.9 eps, each starting on the positive
/// imaginary axis.
DiskGrid make_disk_grid(double epsilon, Index count);

struct DswReport {
  bool cond1 = false;              // grid meets the imaginary axis
  double cond2_max_residual = 0.0; // worst relative eigen-residual
  double cond3_min_singular_value = 0.0;
  Index rank_order = 0;
  Index residual_length = 0;
};

/// cond3 is the smallest singular value of G_{ij} = (h_{mu_j})_i, i, j = 1..n,
/// built from the first n points. Eigen-residuals use vectors of
/// residual_length coordinates (n when 0).
DswReport dsw_condition_report(const GeneratorSpec& gen, std::span<const Complex> points, Weight w,
                               Index n, Index residual_length = 0);

// ---------------------------------------------------------------------------
// Upper density
// ---------------------------------------------------------------------------

/// Finite-horizon surrogate of limsup_t |A cap [0,t]| / t for an indicator
/// sampled at t_j = j dt: max over t_m = m dt >= t_min of (count of true
/// samples j < m) / m. Requires t_min >= 10 dt and horizon >= 10 t_min.
double upper_density_estimate(const std::vector<bool>& indicator, double dt, double t_min);

struct DensityReport {
  double delta_far = 0.0;
  double eps_close = 0.0;
  double density_far = 0.0;
  double density_near = 0.0;
  double horizon = 0.0;
  double sample_step = 0.0;
};

/// Densities of {d > delta_far} and {d < eps_close} for distances sampled at j dt.
DensityReport distance_densities(std::span<const double> distances, double dt, double delta_far,
                                 double eps_close);

/// d(t) = ||T_t x - T_t y||_s sampled on [0, plan.horizon], evaluated through
/// the difference trajectory T_t (x - y).
DensityReport distributional_pair_report(const GeneratorSpec& gen, const WeightedVector& x,
                                         const WeightedVector& y, double delta_far,
                                         double eps_close, const EvolutionPlan& plan, double dt);

// ---------------------------------------------------------------------------
// Spectral subspaces and rates
// ---------------------------------------------------------------------------

/// Which span the sample must come from: any admissible eigenvalues, the
/// stable span Y_delta (Re mu < delta, -eps < delta < 0) or the unstable span
/// Z (Re mu > 0).
struct SubspaceKind {
  enum class Tag { any, stable, unstable } tag = Tag::any;
  double delta = 0.0;

  static SubspaceKind any() { return {}; }
  static SubspaceKind stable(double delta) { return {Tag::stable, delta}; }
  static SubspaceKind unstable() { return {Tag::unstable, 0.0}; }
};

/// sum_i coeffs_i h_{mu_i} with n coordinates. Empty input gives the zero vector.
WeightedVector subspace_sample(const GeneratorSpec& gen, std::span<const Complex> mus,
                               std::span<const Complex> coeffs, Weight w, Index n,
                               SubspaceKind kind = SubspaceKind::any());

struct StabilityReport {
  double fitted_rate = 0.0;
  double predicted_rate = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double residual = 0.0;
  bool window_shortened = false;
  std::vector<double> times;
  std::vector<double> norms;
};

/// Least-squares fit of log norm against time for an already sampled window.
/// Samples at or below 1e-300 end the window early (flagged as shortened).
StabilityReport fit_stability(std::span<const double> times, std::span<const double> norms,
                              std::span<const Complex> mus);

/// Least-squares slope of log ||T_t y||_s over the window against max Re mu_i.
StabilityReport stability_exponent(const GeneratorSpec& gen, const WeightedVector& y,
                                   std::span<const Complex> mus, const EvolutionPlan& plan,
                                   std::pair<double, double> window, double dt);

/// Sample grid t0, t0 + dt, ... <= t1 for a fit window (0 < t0 < t1).
std::vector<double> window_times(std::pair<double, double> window, double dt);

/// Default transient to skip before fitting: 5 / (max Re mu - min Re mu), 0 for one mode.
double default_transient(std::span<const Complex> mus);

/// First sample time t <= plan.horizon with ||T_t z||_s >= factor ||z||_s.
std::optional<double> growth_time(const GeneratorSpec& gen, const WeightedVector& z,
                                  double factor, const EvolutionPlan& plan, double dt);

}  // namespace iqtd
