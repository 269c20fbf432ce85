#pragma once

// Banded generators of the two model families:
//
//   IQTD   (Av)_i = lambda_i (v_{i+1} - v_i)
//   death  (Av)_i = beta_i v_{i+1} - alpha_i v_i
//
// Both share the upper-bidiagonal stencil (Av)_i = c_i v_{i+1} - d_i v_i with a
// "coupling" c and a "decay" d. IQTD uses c = d = lambda.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "iqtd/seqspace.hpp"

namespace iqtd {

enum class Family { iqtd, death };

std::string to_string(Family f);

/// Coefficient sequence description: constant, explicit list, or seeded uniform draw.
struct ConstantCoefficients {
  double value;
};
struct ListCoefficients {
  std::vector<double> values;
};
struct UniformCoefficients {
  double lo;
  double hi;
  std::uint64_t seed;
};
using CoefficientSource = std::variant<ConstantCoefficients, ListCoefficients, UniformCoefficients>;

/// First n terms of the sequence. Uniform draws are prefix-stable in n.
/// Throws InvalidInput if an explicit list is shorter than n.
std::vector<double> resolve(const CoefficientSource& src, Index n);

class GeneratorSpec {
 public:
  /// Sensitivities lambda_i with declared bounds lo <= lambda_i <= hi, 0 < lo < hi.
  static GeneratorSpec iqtd(std::vector<double> lambda, double bound_lo, double bound_hi);
  /// Death rates alpha_i and birth-side rates beta_i, all positive, equal lengths.
  static GeneratorSpec death(std::vector<double> alpha, std::vector<double> beta);

  Family family() const noexcept { return family_; }
  Index size() const noexcept { return decay_.size(); }

  const Eigen::VectorXd& coupling() const noexcept { return coupling_; }
  const Eigen::VectorXd& decay() const noexcept { return decay_; }

  /// IQTD only: declared bounds (alpha, beta) of the sensitivities.
  double bound_lo() const noexcept { return bound_lo_; }
  double bound_hi() const noexcept { return bound_hi_; }

  /// Lower/upper limits entering the admissible radius. IQTD: the declared
  /// bounds. Death: (min of beta over i >= N/2, max alpha), the liminf surrogate.
  double spectral_lo() const;
  double spectral_hi() const;

 private:
  GeneratorSpec(Family f, Eigen::VectorXd coupling, Eigen::VectorXd decay, double lo, double hi)
      : family_(f), coupling_(std::move(coupling)), decay_(std::move(decay)), bound_lo_(lo),
        bound_hi_(hi) {}

  Family family_;
  Eigen::VectorXd coupling_;
  Eigen::VectorXd decay_;
  double bound_lo_;
  double bound_hi_;
};

/// Minimum of a sequence over indices i >= N/2 (1-based), the finite stand-in for liminf.
double tail_minimum(const Eigen::VectorXd& seq);

/// Stencil on the first `active` coordinates of a raw block. Reads in[active]
/// (0-based) when available, otherwise the implicit zero.
template <typename Scalar>
void apply_stencil(const GeneratorSpec& gen, const Coeffs<Scalar>& in, Coeffs<Scalar>& out,
                   Index active) {
  const auto& c = gen.coupling();
  const auto& d = gen.decay();
  for (Index i = 0; i < active; ++i) {
    const Scalar above = (i + 1 < in.size()) ? in[i + 1] : Scalar(0);
    out[i] = c[i] * above - d[i] * in[i];
  }
}

template <typename Scalar>
BasicWeightedVector<Scalar> apply(const GeneratorSpec& gen, const BasicWeightedVector<Scalar>& v) {
  if (v.size() > gen.size()) {
    throw InvalidInput("vector support " + std::to_string(v.size()) +
                       " exceeds generator size " + std::to_string(gen.size()));
  }
  Coeffs<Scalar> out(v.size());
  apply_stencil(gen, v.coeffs(), out, v.size());
  return {std::move(out), v.weight()};
}

/// Certified bound on ||A|| in l1(s): IQTD beta (1 + 1/s); death sup alpha + sup beta / s.
double operator_norm_bound(const GeneratorSpec& gen, Weight w);

/// Logarithmic norm of A in l1(s): max_j (-d_j + c_{j-1}/s). Bounds ||e^{tA}|| <= e^{t*omega}.
double log_norm_bound(const GeneratorSpec& gen, Weight w);

/// eps_max = lo/s - hi when positive, else 0. Every |mu| < eps_max gives h_mu in l1(s).
double admissible_radius(double bound_lo, double bound_hi, Weight w);
double admissible_radius(const GeneratorSpec& gen, Weight w);

struct EigenField {
  Complex mu;
  WeightedVector vector;
  double residual = 0.0;
  /// |mu| < admissible radius, i.e. the infinite h_mu lies in l1(s).
  bool admissible = false;
};

/// Relative eigen-residual ||(A h - mu h)_{1..n-1}||_s / ||h||_s. The last stored
/// coordinate is skipped: truncation breaks the recurrence there.
double eigen_residual(const GeneratorSpec& gen, const EigenField& ef, Weight w);

/// h_mu with (h_mu)_1 = 1 and (h_mu)_{i+1} = (h_mu)_i (mu + d_i) / c_i, stored with n coordinates.
EigenField make_eigenvector(const GeneratorSpec& gen, Complex mu, Index n, Weight w);

struct HypothesisReport {
  bool pass = false;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
  double epsilon_max = 0.0;
};

/// Checks the sufficient conditions for Devaney and distributional chaos.
/// IQTD: 0 < s < lo/hi and lo <= lambda_i <= hi.
/// Death: s = 1 and max alpha_i < min_{i >= N/2} beta_i.
HypothesisReport check_chaos_hypotheses(const GeneratorSpec& gen, Weight w);

}  // namespace iqtd
