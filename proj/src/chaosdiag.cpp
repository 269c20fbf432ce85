#include "iqtd/chaosdiag.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace iqtd {

namespace {

constexpr double kUnderflowNorm = 1e-300;

bool within_slack(double lhs, double rhs) {
  // lhs >= rhs up to relative rounding
  return lhs >= rhs * (1.0 - 1e-9);
}

}  // namespace

WeightedVector make_periodic_point(const GeneratorSpec& gen, double period, int harmonic, Weight w,
                                   Index n) {
  if (!(period > 0.0)) {
    throw InvalidInput("period must be positive");
  }
  if (harmonic < 0) {
    throw InvalidInput("harmonic must be nonnegative");
  }
  const double omega = 2.0 * std::numbers::pi * harmonic / period;
  const double eps = admissible_radius(gen, w);
  if (harmonic > 0 && !(omega < eps)) {
    const double minimal = eps > 0.0 ? 2.0 * std::numbers::pi * harmonic / eps
                                     : std::numeric_limits<double>::infinity();
    throw InadmissiblePeriod(period, minimal);
  }
  const EigenField ef = make_eigenvector(gen, Complex(0.0, omega), n, w);
  Coeffs<Complex> x = (2.0 * ef.vector.coeffs().real()).cast<Complex>();
  return {std::move(x), w};
}

double verify_periodicity(const GeneratorSpec& gen, const WeightedVector& x, double period,
                          const EvolutionPlan& plan) {
  if (plan.horizon < period) {
    throw InvalidInput("plan horizon shorter than the period");
  }
  const WeightedVector y = evolve(gen, x, period, plan);
  const WeightedVector ref = x.resized(y.size());
  const double base = norm_s(ref);
  if (base == 0.0) {
    throw InvalidInput("periodicity residual undefined for the zero vector");
  }
  return norm_s(y - ref) / base;
}

std::vector<std::string> DiskGrid::violations() const {
  std::vector<std::string> out;
  bool on_axis = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(std::abs(points[i]) < epsilon)) {
      out.push_back("point " + std::to_string(i) + " outside the disk");
    }
    if (points[i].real() == 0.0) on_axis = true;
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) {
        out.push_back("points " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
    }
  }
  if (!on_axis) out.push_back("no point on the imaginary axis");
  return out;
}

DiskGrid make_disk_grid(double epsilon, Index count) {
  if (!(epsilon > 0.0) || count < 1) {
    throw InvalidInput("disk grid needs epsilon > 0 and at least one point");
  }
  DiskGrid grid{epsilon, {Complex(0.0, 0.0)}};
  const Index rest = count - 1;
  const Index inner = rest / 2;
  const Index outer = rest - inner;
  auto ring = [&](Index m, double radius) {
    for (Index j = 0; j < m; ++j) {
      const double theta = std::numbers::pi / 2 + 2.0 * std::numbers::pi * double(j) / double(m);
      Complex p = std::polar(radius, theta);
      if (j == 0) p = Complex(0.0, radius);  // exactly on the axis
      grid.points.push_back(p);
    }
  };
  ring(inner, 0.45 * epsilon);
  ring(outer, 0.9 * epsilon);
  return grid;
}

DswReport dsw_condition_report(const GeneratorSpec& gen, std::span<const Complex> points, Weight w,
                               Index n, Index residual_length) {
  if (n < 1 || std::size_t(n) > points.size()) {
    throw InvalidInput("rank order must lie in [1, number of grid points]");
  }
  DswReport rep;
  rep.rank_order = n;
  rep.residual_length = residual_length > 0 ? residual_length : n;

  rep.cond1 = std::any_of(points.begin(), points.end(),
                          [](Complex p) { return p.real() == 0.0; });

  for (Complex mu : points) {
    const EigenField ef = make_eigenvector(gen, mu, rep.residual_length, w);
    rep.cond2_max_residual = std::max(rep.cond2_max_residual, ef.residual);
  }

  Eigen::MatrixXcd g(n, n);
  for (Index j = 0; j < n; ++j) {
    g.col(j) = make_eigenvector(gen, points[std::size_t(j)], n, w).vector.coeffs();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
  rep.cond3_min_singular_value = svd.singularValues().minCoeff();
  return rep;
}

double upper_density_estimate(const std::vector<bool>& indicator, double dt, double t_min) {
  if (!(dt > 0.0) || indicator.size() < 2) {
    throw InvalidInput("density estimate needs dt > 0 and at least two samples");
  }
  const double horizon = double(indicator.size() - 1) * dt;
  if (!within_slack(t_min, 10.0 * dt)) {
    throw InvalidInput("t_min must be at least 10 dt");
  }
  if (!within_slack(horizon, 10.0 * t_min)) {
    throw InvalidInput("horizon must be at least 10 t_min");
  }
  const auto m_min = std::max<std::size_t>(1, std::size_t(std::ceil(t_min / dt - 1e-9)));
  std::size_t count = 0;
  double best = 0.0;
  for (std::size_t m = 1; m < indicator.size(); ++m) {
    if (indicator[m - 1]) ++count;
    if (m >= m_min) best = std::max(best, double(count) / double(m));
  }
  return best;
}

DensityReport distance_densities(std::span<const double> distances, double dt, double delta_far,
                                 double eps_close) {
  if (!(delta_far > eps_close && eps_close > 0.0)) {
    throw InvalidInput("thresholds must satisfy delta_far > eps_close > 0");
  }
  DensityReport rep;
  rep.delta_far = delta_far;
  rep.eps_close = eps_close;
  rep.sample_step = dt;
  rep.horizon = distances.empty() ? 0.0 : double(distances.size() - 1) * dt;
  if (!within_slack(rep.horizon, 10.0 * dt)) {
    throw InvalidInput("horizon must cover at least 10 samples");
  }
  std::vector<bool> far(distances.size()), near(distances.size());
  for (std::size_t j = 0; j < distances.size(); ++j) {
    far[j] = distances[j] > delta_far;
    near[j] = distances[j] < eps_close;
  }
  const double t_min = rep.horizon / 10.0;
  rep.density_far = upper_density_estimate(far, dt, t_min);
  rep.density_near = upper_density_estimate(near, dt, t_min);
  return rep;
}

DensityReport distributional_pair_report(const GeneratorSpec& gen, const WeightedVector& x,
                                         const WeightedVector& y, double delta_far,
                                         double eps_close, const EvolutionPlan& plan, double dt) {
  const WeightedVector diff = x - y;
  const std::vector<double> times = sample_times(plan.horizon, dt);
  const auto states = orbit(gen, diff, times, plan);
  std::vector<double> d(states.size());
  std::transform(states.begin(), states.end(), d.begin(),
                 [](const WeightedVector& v) { return norm_s(v); });
  return distance_densities(d, dt, delta_far, eps_close);
}

WeightedVector subspace_sample(const GeneratorSpec& gen, std::span<const Complex> mus,
                               std::span<const Complex> coeffs, Weight w, Index n,
                               SubspaceKind kind) {
  if (mus.size() != coeffs.size()) {
    throw InvalidInput("eigenvalue and coefficient lists differ in length");
  }
  const double eps = admissible_radius(gen, w);
  if (kind.tag == SubspaceKind::Tag::stable && !(kind.delta < 0.0 && kind.delta > -eps)) {
    throw InvalidInput("stable span needs -eps < delta < 0");
  }
  Coeffs<Complex> acc = Coeffs<Complex>::Zero(n);
  for (std::size_t i = 0; i < mus.size(); ++i) {
    const Complex mu = mus[i];
    std::ostringstream msg;
    if (!(std::abs(mu) < eps)) {
      msg << "eigenvalue " << mu << " outside the admissible disk of radius " << eps;
      throw InvalidInput(msg.str());
    }
    if (kind.tag == SubspaceKind::Tag::stable && !(mu.real() < kind.delta)) {
      msg << "eigenvalue " << mu << " has Re >= delta = " << kind.delta;
      throw InvalidInput(msg.str());
    }
    if (kind.tag == SubspaceKind::Tag::unstable && !(mu.real() > 0.0)) {
      msg << "eigenvalue " << mu << " has Re <= 0";
      throw InvalidInput(msg.str());
    }
    acc += coeffs[i] * make_eigenvector(gen, mu, n, w).vector.coeffs();
  }
  return {std::move(acc), w};
}

double default_transient(std::span<const Complex> mus) {
  if (mus.size() < 2) return 0.0;
  auto [lo, hi] = std::minmax_element(mus.begin(), mus.end(),
                                      [](Complex a, Complex b) { return a.real() < b.real(); });
  const double spread = hi->real() - lo->real();
  return spread > 0.0 ? 5.0 / spread : 0.0;
}

StabilityReport fit_stability(std::span<const double> times, std::span<const double> norms,
                              std::span<const Complex> mus) {
  if (times.size() != norms.size()) {
    throw InvalidInput("times and norms differ in length");
  }
  if (mus.empty()) {
    throw InvalidInput("stability fit needs the eigenvalues the sample was built from");
  }
  StabilityReport rep;
  rep.predicted_rate =
      std::max_element(mus.begin(), mus.end(), [](Complex a, Complex b) {
        return a.real() < b.real();
      })->real();
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(norms[j] > kUnderflowNorm)) {
      rep.window_shortened = true;
      break;
    }
    rep.times.push_back(times[j]);
    rep.norms.push_back(norms[j]);
  }
  if (rep.times.size() < 2) {
    throw InvalidInput("norm underflows before two samples could be taken");
  }
  rep.window = {rep.times.front(), rep.times.back()};

  const auto m = Index(rep.times.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd logs(m);
  for (Index j = 0; j < m; ++j) {
    design(j, 0) = 1.0;
    design(j, 1) = rep.times[std::size_t(j)];
    logs[j] = std::log(rep.norms[std::size_t(j)]);
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(logs);
  rep.fitted_rate = beta[1];
  rep.residual = std::sqrt((design * beta - logs).squaredNorm() / double(m));
  return rep;
}

std::vector<double> window_times(std::pair<double, double> window, double dt) {
  const auto [t0, t1] = window;
  if (!(t0 > 0.0 && t1 > t0)) {
    throw InvalidInput("fit window must satisfy 0 < start < end");
  }
  if (!(dt > 0.0)) {
    throw InvalidInput("sample step must be positive");
  }
  const auto count = static_cast<Index>(std::floor((t1 - t0) / dt + 1e-9));
  std::vector<double> times(std::size_t(count + 1));
  for (Index j = 0; j <= count; ++j) times[std::size_t(j)] = t0 + double(j) * dt;
  return times;
}

StabilityReport stability_exponent(const GeneratorSpec& gen, const WeightedVector& y,
                                   std::span<const Complex> mus, const EvolutionPlan& plan,
                                   std::pair<double, double> window, double dt) {
  const std::vector<double> times = window_times(window, dt);
  if (window.second > plan.horizon * (1.0 + 1e-9)) {
    throw InvalidInput("fit window ends past the plan horizon");
  }
  const auto states = orbit(gen, y, times, plan);
  std::vector<double> norms(states.size());
  std::transform(states.begin(), states.end(), norms.begin(),
                 [](const WeightedVector& v) { return norm_s(v); });
  return fit_stability(times, norms, mus);
}

std::optional<double> growth_time(const GeneratorSpec& gen, const WeightedVector& z, double factor,
                                  const EvolutionPlan& plan, double dt) {
  const double base = norm_s(z);
  if (!(base > 0.0)) {
    throw InvalidInput("growth test needs a nonzero vector");
  }
  const std::vector<double> times = sample_times(plan.horizon, dt);
  WeightedVector current = z;
  double last = 0.0;
  for (double t : times) {
    if (plan.mode == Truncation::exact) {
      current = evolve(gen, current, t - last, plan);
      last = t;
    } else {
      current = evolve(gen, z, t, plan);
    }
    if (norm_s(current) >= factor * base) return t;
  }
  return std::nullopt;
}

}  // namespace iqtd
