#pragma once

// Solution semigroup T_t = e^{tA} applied to truncated states.
//
// e^{tA}u is evaluated as k substeps of the order-M Taylor polynomial
// P_M(tau A) = sum_{n<=M} (tau A)^n / n!, tau = t/k, with the generator only
// ever applied as a stencil. The plan certifies the series remainder in the
// l1(s) norm: with B the operator-norm bound, x = tau B <= 1 and omega the
// logarithmic norm,
//
//   ||e^{tA} - P_M(tau A)^k|| <= k R_M(x) exp(t max(omega, 0) + k R_M(x)),
//   R_M(x) = sum_{n>M} x^n / n!.
//
// Rounding error is not part of the certificate.
//
// A is upper bidiagonal, so output coordinate i after one application reads
// input coordinates i and i + 1. Two truncation regimes follow:
//  - exact: the input is a finitely supported element of l1(s). span{e_1..e_N}
//    is A-invariant, so no margin is needed and the result is e^{tA}u itself.
//  - windowed: the input is the first `trunc` coordinates of an infinite
//    sequence (an eigenvector h_mu, say). After k M applications only the
//    first trunc - k M coordinates are unaffected by the missing tail, so the
//    plan reserves that margin and evolve returns just the window.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iqtd/generator.hpp"
#include "iqtd/seqspace.hpp"

namespace iqtd {

enum class Truncation { windowed, exact };

struct EvolutionPlan {
  Index substeps = 1;  // k
  int order = 0;       // M
  Index trunc = 1;     // working truncation the input may occupy
  Index window = 1;    // trustworthy output coordinates 1..window
  double tol = 0.0;
  double horizon = 0.0;
  Truncation mode = Truncation::windowed;
  double norm_bound = 0.0;       // B
  double growth_rate = 0.0;      // max(omega, 0)
  double remainder_bound = 0.0;  // certified bound actually achieved, <= tol

  double step() const { return substeps > 0 && horizon > 0.0 ? horizon / double(substeps) : 0.0; }
  /// Number of substeps used for a time t <= horizon; each has length <= step().
  Index substeps_for(double t) const;
};

/// R_M(x) = sum_{n>M} x^n/n!, upper bound from the geometric majorant (x <= 1).
double factorial_remainder_bound(double x, int order);

/// Smallest plan (minimal k, then minimal M) meeting the remainder budget.
/// windowed: trunc = out_support + k M; exact: trunc = out_support.
/// Throws CapacityError when gen.size() < trunc, InvalidInput on bad arguments.
EvolutionPlan plan_evolution(const GeneratorSpec& gen, Weight w, double horizon, double tol,
                             Index out_support, Truncation mode = Truncation::windowed);

namespace detail {
void check_evolve_args(const GeneratorSpec& gen, Index support, double t,
                       const EvolutionPlan& plan);
void check_times(std::span<const double> times, const EvolutionPlan& plan);
}  // namespace detail

/// Approximates e^{tA} u0. Windowed plans return coordinates 1..plan.window,
/// exact plans return a vector with u0's support.
template <typename Scalar>
BasicWeightedVector<Scalar> evolve(const GeneratorSpec& gen, const BasicWeightedVector<Scalar>& u0,
                                   double t, const EvolutionPlan& plan) {
  detail::check_evolve_args(gen, u0.size(), t, plan);
  const bool windowed = plan.mode == Truncation::windowed;
  const Index out_n = windowed ? plan.window : u0.size();
  if (t == 0.0 || plan.order == 0) {
    return u0.resized(out_n);
  }

  const Index steps = plan.substeps_for(t);
  const double tau = t / double(steps);
  const Index total = steps * plan.order;
  const Index len = u0.size();

  Coeffs<Scalar> y = u0.coeffs();
  Coeffs<Scalar> term(len);
  Coeffs<Scalar> next(len);
  Index done = 0;
  for (Index step = 0; step < steps; ++step) {
    term = y;
    for (int n = 1; n <= plan.order; ++n) {
      ++done;
      // dependence cone: coordinates still able to reach the output window
      const Index active = windowed ? std::min(len, out_n + (total - done)) : len;
      apply_stencil(gen, term, next, active);
      next.head(active) *= tau / double(n);
      y.head(active) += next.head(active);
      std::swap(term, next);
    }
  }
  return BasicWeightedVector<Scalar>(std::move(y), u0.weight()).resized(out_n);
}

/// States at increasing sample times. Exact plans chain evolve over the
/// increments; windowed plans evolve u0 afresh for each time so the reserved
/// margin is never exceeded.
template <typename Scalar>
std::vector<BasicWeightedVector<Scalar>> orbit(const GeneratorSpec& gen,
                                               const BasicWeightedVector<Scalar>& u0,
                                               std::span<const double> times,
                                               const EvolutionPlan& plan) {
  detail::check_times(times, plan);
  std::vector<BasicWeightedVector<Scalar>> out;
  out.reserve(times.size());
  if (plan.mode == Truncation::windowed) {
    for (double t : times) out.push_back(evolve(gen, u0, t, plan));
    return out;
  }
  BasicWeightedVector<Scalar> current = u0;
  double last = 0.0;
  for (double t : times) {
    current = evolve(gen, current, t - last, plan);
    last = t;
    out.push_back(current);
  }
  return out;
}

/// Uniform sample grid 0, dt, 2dt, ... up to horizon (inclusive within rounding).
std::vector<double> sample_times(double horizon, double dt);

}  // namespace iqtd
