#include <doctest.h>

#include <cmath>
#include <random>

#include "iqtd/semigroup.hpp"
#include "test_helpers.hpp"

using namespace iqtd;
using iqtd::testing::constant_iqtd;
using iqtd::testing::random_iqtd;
using iqtd::testing::random_vector;

namespace {

// sum_{n>M} x^n/n! summed term by term until negligible.
double direct_remainder(double x, int order) {
  double term = 1.0;
  for (int n = 1; n <= order + 1; ++n) term *= x / n;
  double sum = 0.0;
  for (int n = order + 1; n < order + 200 && term > 1e-300; ++n) {
    sum += term;
    term *= x / (n + 1);
  }
  return sum;
}

double diff_norm(const WeightedVector& a, const WeightedVector& b) { return norm_s(a - b); }

}  // namespace

TEST_CASE("plan at horizon zero is the identity") {
  const GeneratorSpec gen = constant_iqtd(0.35, 10);
  const EvolutionPlan plan = plan_evolution(gen, Weight(0.5), 0.0, 1e-9, 10);
  CHECK(plan.substeps == 1);
  CHECK(plan.order == 0);
  const WeightedVector u(Coeffs<Complex>::LinSpaced(10, 1.0, 10.0), Weight(0.5));
  CHECK(evolve(gen, u, 0.0, plan).coeffs() == u.coeffs());
}

TEST_CASE("plan sizing") {
  const GeneratorSpec gen = constant_iqtd(0.4, 4000);
  const Weight w(0.5);
  const EvolutionPlan plan = plan_evolution(gen, w, 10.0, 1e-9, 20);
  CHECK(plan.norm_bound == doctest::Approx(1.2));
  CHECK(plan.substeps >= 12);
  CHECK(plan.step() * plan.norm_bound <= 1.0 + 1e-12);
  CHECK(plan.trunc == 20 + plan.substeps * plan.order);
  CHECK(plan.remainder_bound <= 1e-9);

  // the geometric majorant dominates the series tail, so the order is certified
  const double x = plan.step() * plan.norm_bound;
  const double direct = direct_remainder(x, plan.order);
  CHECK(direct <= factorial_remainder_bound(x, plan.order));
  const double growth = std::exp(10.0 * plan.growth_rate);
  CHECK(plan.substeps * direct * growth * std::exp(plan.substeps * direct) <= 1e-9);
  // and M - 1 would not have been enough under the same bound
  const double r_prev = factorial_remainder_bound(x, plan.order - 1);
  CHECK(plan.substeps * r_prev * growth * std::exp(plan.substeps * r_prev) > 1e-9);

  int prev_order = 0;
  for (double tol : {1e-3, 1e-6, 1e-9, 1e-12}) {
    const EvolutionPlan p = plan_evolution(gen, w, 10.0, tol, 20);
    CHECK(p.order >= prev_order);
    prev_order = p.order;
  }

  const EvolutionPlan exact = plan_evolution(gen, w, 10.0, 1e-9, 20, Truncation::exact);
  CHECK(exact.trunc == 20);

  CHECK_THROWS_AS(plan_evolution(constant_iqtd(0.4, 100), w, 10.0, 1e-9, 20), CapacityError);
  try {
    plan_evolution(constant_iqtd(0.4, 100), w, 10.0, 1e-9, 20);
  } catch (const CapacityError& e) {
    CHECK(e.needed() == std::size_t(plan.trunc));
    CHECK(e.available() == 100);
  }
  CHECK_THROWS_AS(plan_evolution(gen, w, -1.0, 1e-9, 20), InvalidInput);
  CHECK_THROWS_AS(plan_evolution(gen, w, 1.0, 0.0, 20), InvalidInput);
}

TEST_CASE("evolve examples") {
  const Weight w(0.5);
  const GeneratorSpec gen = GeneratorSpec::iqtd({0.3, 0.4, 0.35, 0.32, 0.38}, 0.3, 0.4);
  const EvolutionPlan plan = plan_evolution(gen, w, 2.0, 1e-12, 5, Truncation::exact);

  const WeightedVector e1 = evolve(gen, WeightedVector::unit(1, 5, w), 1.0, plan);
  CHECK(std::abs(e1(1) - 0.7408182206817178660668737793) < 1e-12);
  CHECK(e1.coeffs().tail(4).isZero(0.0));

  // two-car platoon
  Coeffs<Complex> c(2);
  c << 1.0, 2.0;
  const GeneratorSpec two = GeneratorSpec::iqtd({0.3, 0.4}, 0.3, 0.4);
  const EvolutionPlan p2 = plan_evolution(two, w, 2.0, 1e-12, 2, Truncation::exact);
  const WeightedVector u0(c, w);
  struct Row { double t, u1, u2; };
  for (const Row& r : {Row{0.5, 1.112571316507513498583623300088919688518,
                           1.637461506155963717339871017238078848717},
                       Row{1.0, 1.163807268558189258001518904337761673654,
                           1.340640092071278601488865850295652143874},
                       Row{2.0, 1.145707667954855479818598110534598351721,
                           0.8986579282344431828602047700311255918684}}) {
    const WeightedVector u = evolve(two, u0, r.t, p2);
    CHECK(std::abs(u(1) - r.u1) < 1e-11);
    CHECK(std::abs(u(2) - r.u2) < 1e-11);
  }

  // a constant platoon is stationary
  const GeneratorSpec big = random_iqtd(3, 2000);
  const EvolutionPlan wp = plan_evolution(big, w, 5.0, 1e-10, 30);
  const WeightedVector ones(Coeffs<Complex>::Ones(wp.trunc), w);
  const WeightedVector out = evolve(big, ones, 5.0, wp);
  CHECK(out.size() == 30);
  CHECK((out.coeffs().array() - 1.0).abs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(evolve(gen, WeightedVector::unit(1, 5, w), 2.5, plan), InvalidInput);
  CHECK_THROWS_AS(evolve(gen, WeightedVector::unit(1, 5, w), -0.1, plan), InvalidInput);
}

TEST_CASE("real and complex evolutions agree") {
  const Weight w(0.5);
  const GeneratorSpec gen = random_iqtd(8, 60);
  std::mt19937_64 rng(8);
  const RealWeightedVector u = iqtd::testing::random_real_vector(rng, 60, w);
  const EvolutionPlan plan = plan_evolution(gen, w, 3.0, 1e-10, 60, Truncation::exact);
  const RealWeightedVector a = evolve(gen, u, 3.0, plan);
  const WeightedVector b = evolve(gen, to_complex(u), 3.0, plan);
  CHECK(diff_norm(to_complex(a), b) < 1e-14);
}

TEST_CASE("orbit") {
  const Weight w(0.5);
  const GeneratorSpec gen = random_iqtd(4, 50);
  const EvolutionPlan plan = plan_evolution(gen, w, 4.0, 1e-10, 50, Truncation::exact);
  std::mt19937_64 rng(4);
  const WeightedVector u = random_vector(rng, 50, w);

  const std::vector<double> zero{0.0};
  const auto o0 = orbit(gen, u, zero, plan);
  REQUIRE(o0.size() == 1);
  CHECK(o0[0].coeffs() == u.coeffs());

  const std::vector<double> times{0.5, 1.0, 2.5, 4.0};
  const auto o = orbit(gen, u, times, plan);
  for (std::size_t j = 0; j < times.size(); ++j) {
    CHECK(diff_norm(o[j], evolve(gen, u, times[j], plan)) <= 3e-10 * norm_s(u));
  }
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(orbit(gen, u, bad, plan), InvalidInput);

  // windowed orbits of an eigenvector match e^{mu t} h_mu on the window
  const GeneratorSpec big = random_iqtd(5, 3000);
  const EvolutionPlan wp = plan_evolution(big, w, 6.0, 1e-10, 25);
  const Complex mu(0.05, 0.1);
  const EigenField ef = make_eigenvector(big, mu, wp.trunc, w);
  const std::vector<double> ts{0.0, 1.5, 6.0};
  const auto eo = orbit(big, ef.vector, ts, wp);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const WeightedVector expect = std::exp(mu * ts[j]) * restrict_to(ef.vector, 25);
    CHECK(diff_norm(eo[j], expect) <= 1e-9 * norm_s(expect));
  }
}

TEST_CASE("semigroup law") {
  const Weight w(0.5);
  const double tol = 1e-9;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GeneratorSpec gen = random_iqtd(seed, 40);
    const EvolutionPlan plan = plan_evolution(gen, w, 8.0, tol, 40, Truncation::exact);
    std::mt19937_64 rng(seed + 100);
    const WeightedVector u = random_vector(rng, 40, w);
    std::uniform_real_distribution<double> ud(0.0, 4.0);
    const double t = ud(rng), s = ud(rng);
    const WeightedVector lhs = evolve(gen, u, t + s, plan);
    const WeightedVector rhs = evolve(gen, evolve(gen, u, s, plan), t, plan);
    CHECK(diff_norm(lhs, rhs) <= 3 * tol * norm_s(u));
  }
}

TEST_CASE("difference quotient converges to the generator") {
  const Weight w(0.5);
  const GeneratorSpec gen = random_iqtd(21, 30);
  std::mt19937_64 rng(21);
  const WeightedVector u = random_vector(rng, 30, w);
  const WeightedVector au = iqtd::apply(gen, u);
  const EvolutionPlan plan = plan_evolution(gen, w, 1e-3, 1e-15, 30, Truncation::exact);

  std::vector<double> errs;
  for (double h : {1e-3, 1e-4, 1e-5}) {
    const WeightedVector q = Complex(1.0 / h) * (evolve(gen, u, h, plan) - u);
    errs.push_back(diff_norm(q, au));
  }
  for (std::size_t j = 1; j < errs.size(); ++j) {
    CHECK(std::log10(errs[j - 1] / errs[j]) >= 0.9);
  }
}

TEST_CASE("results are stable under truncation refinement") {
  const Weight w(0.5);
  const GeneratorSpec small = random_iqtd(30, 1500);
  const GeneratorSpec large = random_iqtd(30, 3000);  // same prefix
  const EvolutionPlan ps = plan_evolution(small, w, 5.0, 1e-10, 20);
  const EvolutionPlan pl = plan_evolution(large, w, 5.0, 1e-10, 20);
  const Complex mu(-0.08, 0.12);
  const WeightedVector a = evolve(small, make_eigenvector(small, mu, ps.trunc, w).vector, 5.0, ps);
  const WeightedVector b =
      evolve(large, make_eigenvector(large, mu, 2 * ps.trunc, w).vector.resized(pl.trunc), 5.0, pl);
  CHECK(diff_norm(a, b) <= 1e-12 * norm_s(a));

  std::mt19937_64 rng(30);
  const WeightedVector u = random_vector(rng, 15, w);
  const EvolutionPlan e1 = plan_evolution(small, w, 5.0, 1e-10, 15, Truncation::exact);
  const WeightedVector x = evolve(small, u, 5.0, e1);
  const WeightedVector y = evolve(large, u.resized(30), 5.0,
                                  plan_evolution(large, w, 5.0, 1e-10, 30, Truncation::exact));
  CHECK(diff_norm(x.resized(30), y) <= 1e-14 * norm_s(x));
}

TEST_CASE("sample_times") {
  const auto t = sample_times(1.0, 0.25);
  REQUIRE(t.size() == 5);
  CHECK(t.back() == 1.0);
  CHECK(sample_times(0.0, 0.1).size() == 1);
  CHECK_THROWS_AS(sample_times(1.0, 0.0), InvalidInput);
}
