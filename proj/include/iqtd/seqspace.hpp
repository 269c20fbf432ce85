#pragma once

// Weighted summable-sequence space l1(s) = { v : sum_i |v_i| s^i < inf }
// and its dual l_inf(1/s), restricted to finitely supported truncations.
//
// Coordinates are numbered from 1 (car 1 is the rearmost follower). Storage
// is an Eigen column vector, so coordinate i lives at coeffs()[i - 1].
// Coordinates past size() are implicitly zero.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "iqtd/errors.hpp"

namespace iqtd {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Weight parameter s of l1(s), 0 < s <= 1.
class Weight {
 public:
  explicit Weight(double s) : s_(s) {
    if (!(s > 0.0 && s <= 1.0)) {
      throw InvalidInput("weight s must satisfy 0 < s <= 1, got " + std::to_string(s));
    }
  }

  double value() const noexcept { return s_; }

  /// s^i for a 1-based coordinate i.
  double power(Index i) const { return std::pow(s_, static_cast<double>(i)); }

  friend bool operator==(Weight, Weight) = default;

 private:
  double s_;
};

/// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

template <typename Scalar>
class BasicWeightedVector {
 public:
  using scalar_type = Scalar;
  using Storage = Coeffs<Scalar>;

  BasicWeightedVector(Storage coeffs, Weight w) : coeffs_(std::move(coeffs)), weight_(w) {
    if (coeffs_.size() < 1) {
      throw InvalidInput("weighted vector needs at least one stored coordinate");
    }
  }

  static BasicWeightedVector zero(Index n, Weight w) { return {Storage::Zero(n), w}; }

  /// Canonical unit vector e_i (1-based) stored with n coordinates.
  static BasicWeightedVector unit(Index i, Index n, Weight w) {
    if (i < 1 || i > n) {
      throw InvalidInput("unit vector index out of range");
    }
    Storage c = Storage::Zero(n);
    c[i - 1] = Scalar(1);
    return {std::move(c), w};
  }

  Index size() const noexcept { return coeffs_.size(); }
  Weight weight() const noexcept { return weight_; }
  const Storage& coeffs() const noexcept { return coeffs_; }

  /// Coordinate i (1-based); zero past the stored support.
  Scalar operator()(Index i) const {
    if (i < 1) {
      throw InvalidInput("coordinates are numbered from 1");
    }
    return i <= size() ? coeffs_[i - 1] : Scalar(0);
  }

  /// Same sequence stored with exactly n coordinates (truncates or pads with zeros).
  BasicWeightedVector resized(Index n) const {
    if (n < 1) {
      throw InvalidInput("weighted vector needs at least one stored coordinate");
    }
    Storage c = Storage::Zero(n);
    const Index m = std::min(n, size());
    c.head(m) = coeffs_.head(m);
    return {std::move(c), weight_};
  }

 private:
  Storage coeffs_;
  Weight weight_;
};

/// Element of l_inf(1/s) acting on l1(s) through sum_i g_i v_i.
template <typename Scalar>
class BasicDualFunctional {
 public:
  using Storage = Coeffs<Scalar>;

  BasicDualFunctional(Storage coeffs, Weight w) : coeffs_(std::move(coeffs)), weight_(w) {
    if (coeffs_.size() < 1) {
      throw InvalidInput("dual functional needs at least one stored coordinate");
    }
  }

  Index size() const noexcept { return coeffs_.size(); }
  Weight weight() const noexcept { return weight_; }
  const Storage& coeffs() const noexcept { return coeffs_; }

 private:
  Storage coeffs_;
  Weight weight_;
};

using WeightedVector = BasicWeightedVector<Complex>;
using RealWeightedVector = BasicWeightedVector<double>;
using DualFunctional = BasicDualFunctional<Complex>;

namespace detail {

inline void require_same_weight(Weight a, Weight b) {
  if (!(a == b)) {
    throw InvalidInput("weight mismatch: " + std::to_string(a.value()) + " vs " +
                       std::to_string(b.value()));
  }
}

}  // namespace detail

/// sum_{i=1..n} |c_i| s^i for a raw coefficient block, summed from i = 1 upward.
template <typename Derived>
double weighted_l1(const Eigen::MatrixBase<Derived>& c, Weight w) {
  CompensatedSum acc;
  const double s = w.value();
  for (Index i = 0; i < c.size(); ++i) {
    const double a = std::abs(c[i]);
    if (a != 0.0) {
      acc.add(a * std::pow(s, static_cast<double>(i + 1)));
    }
  }
  return acc.value();
}

template <typename Scalar>
double norm_s(const BasicWeightedVector<Scalar>& v) {
  return weighted_l1(v.coeffs(), v.weight());
}

/// sup_i |g_i| s^{-i}.
template <typename Scalar>
double dual_norm(const BasicDualFunctional<Scalar>& g) {
  const double log_s = std::log(g.weight().value());
  double best = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double a = std::abs(g.coeffs()[i]);
    if (a != 0.0) {
      best = std::max(best, std::exp(std::log(a) - static_cast<double>(i + 1) * log_s));
    }
  }
  return best;
}

/// Bilinear pairing <v, g> = sum_i g_i v_i over the common support.
template <typename Scalar>
Scalar pairing(const BasicWeightedVector<Scalar>& v, const BasicDualFunctional<Scalar>& g) {
  detail::require_same_weight(v.weight(), g.weight());
  const Index n = std::min(v.size(), g.size());
  if constexpr (std::is_floating_point_v<Scalar>) {
    CompensatedSum acc;
    for (Index i = 0; i < n; ++i) acc.add(g.coeffs()[i] * v.coeffs()[i]);
    return acc.value();
  } else {
    CompensatedSum re, im;
    for (Index i = 0; i < n; ++i) {
      const Scalar t = g.coeffs()[i] * v.coeffs()[i];
      re.add(t.real());
      im.add(t.imag());
    }
    return Scalar(re.value(), im.value());
  }
}

template <typename Scalar>
using Term = std::pair<Scalar, BasicWeightedVector<Scalar>>;

/// Coordinate-wise linear combination; support is the longest input support.
template <typename Scalar>
BasicWeightedVector<Scalar> combine(std::span<const Term<Scalar>> terms) {
  if (terms.empty()) {
    throw InvalidInput("combine needs at least one term (use zero() for the empty sum)");
  }
  const Weight w = terms.front().second.weight();
  Index n = 0;
  for (const auto& [c, v] : terms) {
    detail::require_same_weight(w, v.weight());
    n = std::max(n, v.size());
  }
  Coeffs<Scalar> out = Coeffs<Scalar>::Zero(n);
  for (const auto& [c, v] : terms) {
    out.head(v.size()) += c * v.coeffs();
  }
  return {std::move(out), w};
}

template <typename Scalar>
BasicWeightedVector<Scalar> combine(const std::vector<Term<Scalar>>& terms) {
  return combine(std::span<const Term<Scalar>>(terms));
}

template <typename Scalar>
BasicWeightedVector<Scalar> operator+(const BasicWeightedVector<Scalar>& a,
                                      const BasicWeightedVector<Scalar>& b) {
  return combine(std::vector<Term<Scalar>>{{Scalar(1), a}, {Scalar(1), b}});
}

template <typename Scalar>
BasicWeightedVector<Scalar> operator-(const BasicWeightedVector<Scalar>& a,
                                      const BasicWeightedVector<Scalar>& b) {
  return combine(std::vector<Term<Scalar>>{{Scalar(1), a}, {Scalar(-1), b}});
}

template <typename Scalar>
BasicWeightedVector<Scalar> operator*(Scalar c, const BasicWeightedVector<Scalar>& v) {
  return {c * v.coeffs(), v.weight()};
}

/// First n coordinates only (n may exceed the support; missing ones are zero).
template <typename Scalar>
BasicWeightedVector<Scalar> restrict_to(const BasicWeightedVector<Scalar>& v, Index n) {
  return v.resized(n);
}

inline RealWeightedVector real_part(const WeightedVector& v) {
  return {v.coeffs().real(), v.weight()};
}

inline WeightedVector to_complex(const RealWeightedVector& v) {
  return {v.coeffs().cast<Complex>(), v.weight()};
}

}  // namespace iqtd
