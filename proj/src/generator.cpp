#include "iqtd/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace iqtd {

std::string to_string(Family f) {
  return f == Family::iqtd ? "iqtd" : "death";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Maps the 53 high bits of a 64-bit draw to [0, 1). Portable, unlike
// std::uniform_real_distribution.
double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<double> resolve(const CoefficientSource& src, Index n) {
  if (n < 0) {
    throw InvalidInput("negative coefficient count");
  }
  const auto count = static_cast<std::size_t>(n);
  return std::visit(
      overloaded{
          [&](const ConstantCoefficients& c) { return std::vector<double>(count, c.value); },
          [&](const ListCoefficients& l) {
            if (l.values.size() < count) {
              throw InvalidInput("explicit coefficient list has " +
                                 std::to_string(l.values.size()) + " entries, " +
                                 std::to_string(count) + " required");
            }
            return std::vector<double>(l.values.begin(), l.values.begin() + n);
          },
          [&](const UniformCoefficients& u) {
            std::mt19937_64 rng(u.seed);
            std::vector<double> out(count);
            for (auto& x : out) x = u.lo + (u.hi - u.lo) * unit_interval(rng());
            return out;
          },
      },
      src);
}

GeneratorSpec GeneratorSpec::iqtd(std::vector<double> lambda, double bound_lo, double bound_hi) {
  if (lambda.empty()) {
    throw InvalidInput("generator needs at least one coefficient");
  }
  if (!(bound_lo > 0.0 && bound_lo < bound_hi)) {
    throw InvalidInput("IQTD bounds must satisfy 0 < lo < hi");
  }
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] >= bound_lo && lambda[i] <= bound_hi)) {
      std::ostringstream msg;
      msg << "lambda_" << i + 1 << " = " << lambda[i] << " outside [" << bound_lo << ", "
          << bound_hi << "]";
      throw InvalidInput(msg.str());
    }
  }
  Eigen::VectorXd l = Eigen::Map<const Eigen::VectorXd>(lambda.data(), Index(lambda.size()));
  return {Family::iqtd, l, l, bound_lo, bound_hi};
}

GeneratorSpec GeneratorSpec::death(std::vector<double> alpha, std::vector<double> beta) {
  if (alpha.empty() || alpha.size() != beta.size()) {
    throw InvalidInput("death model needs equally long, nonempty alpha and beta");
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0) || !(beta[i] > 0.0)) {
      throw InvalidInput("death rates must be positive (index " + std::to_string(i + 1) + ")");
    }
  }
  const auto n = Index(alpha.size());
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), n);
  return {Family::death, b, a, 0.0, 0.0};
}

double tail_minimum(const Eigen::VectorXd& seq) {
  // 1-based i >= N/2  <=>  0-based j >= ceil(N/2) - 1
  const Index n = seq.size();
  const Index start = std::max<Index>(0, (n + 1) / 2 - 1);
  return seq.tail(n - start).minCoeff();
}

double GeneratorSpec::spectral_lo() const {
  return family_ == Family::iqtd ? bound_lo_ : tail_minimum(coupling_);
}

double GeneratorSpec::spectral_hi() const {
  return family_ == Family::iqtd ? bound_hi_ : decay_.maxCoeff();
}

double operator_norm_bound(const GeneratorSpec& gen, Weight w) {
  const double s = w.value();
  if (gen.family() == Family::iqtd) {
    return gen.bound_hi() * (1.0 + 1.0 / s);
  }
  return gen.decay().maxCoeff() + gen.coupling().maxCoeff() / s;
}

double log_norm_bound(const GeneratorSpec& gen, Weight w) {
  const double s = w.value();
  const auto& c = gen.coupling();
  const auto& d = gen.decay();
  double omega = -d[0];
  for (Index j = 1; j < gen.size(); ++j) {
    omega = std::max(omega, -d[j] + c[j - 1] / s);
  }
  return omega;
}

double admissible_radius(double bound_lo, double bound_hi, Weight w) {
  return std::max(0.0, bound_lo / w.value() - bound_hi);
}

double admissible_radius(const GeneratorSpec& gen, Weight w) {
  return admissible_radius(gen.spectral_lo(), gen.spectral_hi(), w);
}

double eigen_residual(const GeneratorSpec& gen, const EigenField& ef, Weight w) {
  const auto& h = ef.vector.coeffs();
  const Index n = h.size();
  if (n < 2) {
    return 0.0;
  }
  if (n > gen.size()) {
    throw InvalidInput("eigenvector longer than generator");
  }
  Coeffs<Complex> r(n - 1);
  apply_stencil(gen, h, r, n - 1);
  r -= ef.mu * h.head(n - 1);
  const double hn = weighted_l1(h, w);
  return hn > 0.0 ? weighted_l1(r, w) / hn : 0.0;
}

EigenField make_eigenvector(const GeneratorSpec& gen, Complex mu, Index n, Weight w) {
  if (n < 1 || n > gen.size()) {
    throw InvalidInput("eigenvector length must lie in [1, generator size]");
  }
  const auto& c = gen.coupling();
  const auto& d = gen.decay();
  Coeffs<Complex> h(n);
  h[0] = 1.0;
  for (Index i = 1; i < n; ++i) {
    h[i] = h[i - 1] * ((mu + d[i - 1]) / c[i - 1]);
  }
  EigenField ef{mu, WeightedVector(std::move(h), w), 0.0,
                std::abs(mu) < admissible_radius(gen, w)};
  ef.residual = eigen_residual(gen, ef, w);
  return ef;
}

HypothesisReport check_chaos_hypotheses(const GeneratorSpec& gen, Weight w) {
  HypothesisReport rep;
  const double s = w.value();
  std::ostringstream msg;

  if (gen.family() == Family::iqtd) {
    const double lo = gen.bound_lo();
    const double hi = gen.bound_hi();
    if (!(s < lo / hi)) {
      msg << "weight s = " << s << " must satisfy s < lo/hi = " << lo / hi;
      rep.violations.push_back(msg.str());
    }
    const auto& lambda = gen.decay();
    Index on_bound = 0;
    for (Index i = 0; i < lambda.size(); ++i) {
      if (lambda[i] < lo || lambda[i] > hi) {
        rep.violations.push_back("lambda_" + std::to_string(i + 1) + " outside bounds");
      } else if (lambda[i] == lo || lambda[i] == hi) {
        ++on_bound;
      }
    }
    if (on_bound > 0) {
      rep.notes.push_back(std::to_string(on_bound) +
                          " sensitivities lie exactly on a bound: Devaney-chaos hypotheses use "
                          "closed bounds, the distributional-chaos statement uses open ones");
    }
  } else {
    if (s != 1.0) {
      msg << "death-model chaos conditions require s = 1, got s = " << s;
      rep.violations.push_back(msg.str());
      msg.str("");
    }
    const double sup_alpha = gen.decay().maxCoeff();
    const double liminf_beta = tail_minimum(gen.coupling());
    if (!(sup_alpha < liminf_beta)) {
      msg << "sup alpha = " << sup_alpha << " must be below liminf beta = " << liminf_beta;
      rep.violations.push_back(msg.str());
    }
    rep.notes.push_back("liminf beta approximated by the minimum over i >= N/2");
  }

  rep.epsilon_max = admissible_radius(gen, w);
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace iqtd
