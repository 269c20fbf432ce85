#include "iqtd/semigroup.hpp"

#include <cmath>
#include <limits>

namespace iqtd {

namespace {

// Slack for sample times that drift past the horizon through accumulation.
constexpr double kTimeSlack = 1e-9;

constexpr int kMaxOrder = 4096;

}  // namespace

Index EvolutionPlan::substeps_for(double t) const {
  if (t <= 0.0 || horizon <= 0.0) {
    return 1;
  }
  const double ratio = t / step();
  auto k = static_cast<Index>(std::ceil(ratio * (1.0 - 1e-12)));
  return std::clamp<Index>(k, 1, substeps);
}

double factorial_remainder_bound(double x, int order) {
  if (x <= 0.0) {
    return 0.0;
  }
  const double m1 = double(order) + 1.0;
  // x^{M+1}/(M+1)! * 1/(1 - x/(M+2))
  const double log_term = m1 * std::log(x) - std::lgamma(m1 + 1.0);
  return std::exp(log_term) / (1.0 - x / (m1 + 1.0));
}

EvolutionPlan plan_evolution(const GeneratorSpec& gen, Weight w, double horizon, double tol,
                             Index out_support, Truncation mode) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidInput("horizon must be finite and nonnegative");
  }
  if (!(tol > 0.0)) {
    throw InvalidInput("tolerance must be positive");
  }
  if (out_support < 1) {
    throw InvalidInput("output support must be at least 1");
  }

  EvolutionPlan plan;
  plan.tol = tol;
  plan.horizon = horizon;
  plan.mode = mode;
  plan.window = out_support;
  plan.norm_bound = operator_norm_bound(gen, w);
  plan.growth_rate = std::max(0.0, log_norm_bound(gen, w));

  if (horizon > 0.0) {
    plan.substeps = std::max<Index>(1, static_cast<Index>(std::ceil(horizon * plan.norm_bound)));
    const double x = plan.step() * plan.norm_bound;
    const double log_k = std::log(double(plan.substeps));
    const double log_tol = std::log(tol);
    int m = 0;
    for (;; ++m) {
      if (m > kMaxOrder) {
        throw InvalidInput("no series order up to " + std::to_string(kMaxOrder) +
                           " meets tolerance " + std::to_string(tol));
      }
      const double r = factorial_remainder_bound(x, m);
      const double kr = double(plan.substeps) * r;
      const double log_total =
          r > 0.0 ? log_k + std::log(r) + horizon * plan.growth_rate + kr
                  : -std::numeric_limits<double>::infinity();
      if (log_total <= log_tol) {
        plan.remainder_bound = std::exp(log_total);
        break;
      }
    }
    plan.order = m;
  }

  plan.trunc = mode == Truncation::windowed
                   ? out_support + plan.substeps * Index(plan.order)
                   : out_support;
  if (plan.trunc > gen.size()) {
    throw CapacityError(std::size_t(plan.trunc), std::size_t(gen.size()));
  }
  return plan;
}

namespace detail {

void check_evolve_args(const GeneratorSpec& gen, Index support, double t,
                       const EvolutionPlan& plan) {
  if (!(t >= 0.0)) {
    throw InvalidInput("evolution time must be nonnegative");
  }
  if (t > plan.horizon * (1.0 + kTimeSlack) + kTimeSlack) {
    throw InvalidInput("time " + std::to_string(t) + " exceeds plan horizon " +
                       std::to_string(plan.horizon));
  }
  if (support > plan.trunc) {
    throw InvalidInput("state support " + std::to_string(support) +
                       " exceeds plan truncation " + std::to_string(plan.trunc));
  }
  if (support > gen.size()) {
    throw InvalidInput("state support exceeds generator size");
  }
}

void check_times(std::span<const double> times, const EvolutionPlan& plan) {
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev)) {
      throw InvalidInput("orbit times must be nonnegative and nondecreasing");
    }
    if (t > plan.horizon * (1.0 + kTimeSlack) + kTimeSlack) {
      throw InvalidInput("orbit time " + std::to_string(t) + " exceeds plan horizon");
    }
    prev = t;
  }
}

}  // namespace detail

std::vector<double> sample_times(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) {
    throw InvalidInput("sample grid needs dt > 0 and horizon >= 0");
  }
  const auto count = static_cast<Index>(std::floor(horizon / dt + 1e-9));
  std::vector<double> t(std::size_t(count + 1));
  for (Index j = 0; j <= count; ++j) t[std::size_t(j)] = double(j) * dt;
  return t;
}

}  // namespace iqtd
