#pragma once

#include "misti/idlaw.hpp"
#include "misti/joint_pmf.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace misti {

/// Graded enumeration of the monomials z^e in `nvars` variables with total
/// degree |e| <= D. Index 0 is the constant monomial; indices are sorted by
/// degree.
class MonomialBasis {
 public:
  MonomialBasis(int nvars, int max_degree);

  int nvars() const { return nvars_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return degrees_.size(); }

  std::span<const int> exponents(std::size_t i) const {
    return {exps_.data() + i * static_cast<std::size_t>(nvars_), static_cast<std::size_t>(nvars_)};
  }
  int degree(std::size_t i) const { return degrees_[i]; }
  std::optional<std::size_t> index_of(std::span<const int> e) const;

  /// All index triples (i, j, k) with e_i + e_j = e_k, grouped by k. Entries
  /// for k live in [offsets[k], offsets[k+1]) of `left` and `right`.
  struct ProductTable {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
  };
  const ProductTable& products() const;

  bool same_shape(const MonomialBasis& other) const {
    return nvars_ == other.nvars_ && max_degree_ == other.max_degree_;
  }

 private:
  std::uint64_t key(std::span<const int> e) const;

  int nvars_;
  int max_degree_;
  std::vector<int> exps_;
  std::vector<int> degrees_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
  mutable std::once_flag products_once_;
  mutable ProductTable products_;
};

std::shared_ptr<const MonomialBasis> make_basis(int nvars, int max_degree);

/// Power series in `nvars` variables truncated at total degree D.
template <typename Scalar = double>
class TruncSeries {
 public:
  TruncSeries(int nvars, int max_degree) : TruncSeries(make_basis(nvars, max_degree)) {}
  explicit TruncSeries(std::shared_ptr<const MonomialBasis> basis)
      : basis_(std::move(basis)), coeffs_(Vector<Scalar>::Zero(static_cast<Eigen::Index>(basis_->size()))) {}

  static TruncSeries constant(int nvars, int max_degree, Scalar c) {
    TruncSeries s(nvars, max_degree);
    s.coeffs_(0) = c;
    return s;
  }

  /// The series z_v.
  static TruncSeries variable(int nvars, int max_degree, int v) {
    TruncSeries s(nvars, max_degree);
    if (max_degree >= 1) {
      std::vector<int> e(static_cast<std::size_t>(nvars), 0);
      e.at(static_cast<std::size_t>(v)) = 1;
      s.set_coeff(e, Scalar(1));
    }
    return s;
  }

  int nvars() const { return basis_->nvars(); }
  int max_degree() const { return basis_->max_degree(); }
  const MonomialBasis& basis() const { return *basis_; }
  const std::shared_ptr<const MonomialBasis>& basis_ptr() const { return basis_; }

  const Vector<Scalar>& coeffs() const { return coeffs_; }
  Vector<Scalar>& coeffs() { return coeffs_; }

  /// Coefficient of z^e; zero when |e| exceeds the truncation degree.
  Scalar coeff(std::span<const int> e) const {
    const auto i = basis_->index_of(e);
    return i ? coeffs_(static_cast<Eigen::Index>(*i)) : Scalar(0);
  }
  Scalar coeff(std::initializer_list<int> e) const { return coeff(std::span<const int>(e.begin(), e.size())); }

  void set_coeff(std::span<const int> e, Scalar v) {
    const auto i = basis_->index_of(e);
    if (!i) throw std::out_of_range("TruncSeries: monomial beyond truncation degree");
    coeffs_(static_cast<Eigen::Index>(*i)) = v;
  }
  void set_coeff(std::initializer_list<int> e, Scalar v) { set_coeff(std::span<const int>(e.begin(), e.size()), v); }

  TruncSeries& operator+=(const TruncSeries& o) {
    require_same_shape(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  TruncSeries& operator-=(const TruncSeries& o) {
    require_same_shape(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  TruncSeries& operator*=(Scalar c) {
    coeffs_ *= c;
    return *this;
  }

  void require_same_shape(const TruncSeries& o) const {
    if (!basis_->same_shape(o.basis())) throw std::invalid_argument("TruncSeries: mismatched nvars or degree");
  }

  template <typename Other>
  TruncSeries<Other> cast() const {
    TruncSeries<Other> out(basis_);
    out.coeffs() = coeffs_.template cast<Other>();
    return out;
  }

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  Vector<Scalar> coeffs_;
};

template <typename Scalar>
TruncSeries<Scalar> operator+(TruncSeries<Scalar> a, const TruncSeries<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
TruncSeries<Scalar> operator-(TruncSeries<Scalar> a, const TruncSeries<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
TruncSeries<Scalar> operator*(TruncSeries<Scalar> a, Scalar c) {
  return a *= c;
}

/// Cauchy product truncated at total degree D.
template <typename Scalar>
TruncSeries<Scalar> operator*(const TruncSeries<Scalar>& a, const TruncSeries<Scalar>& b) {
  a.require_same_shape(b);
  TruncSeries<Scalar> out(a.basis_ptr());
  const auto& prod = a.basis().products();
  const auto& ca = a.coeffs();
  const auto& cb = b.coeffs();
  for (std::size_t k = 0; k + 1 < prod.offsets.size(); ++k) {
    Scalar acc = 0;
    for (std::size_t n = prod.offsets[k]; n < prod.offsets[k + 1]; ++n) acc += ca(prod.left[n]) * cb(prod.right[n]);
    out.coeffs()(static_cast<Eigen::Index>(k)) = acc;
  }
  return out;
}

/// exp of a truncated series. With the Euler operator E = sum_i z_i d/dz_i,
/// b = exp(a) satisfies E b = (E a) b, which fixes each coefficient of degree
/// d from coefficients of lower degree:
///   d b_m = sum_{m' + m'' = m, m' != 0} |m'| a_{m'} b_{m''}.
template <typename Scalar>
TruncSeries<Scalar> exp(const TruncSeries<Scalar>& a) {
  TruncSeries<Scalar> b(a.basis_ptr());
  const auto& basis = a.basis();
  const auto& prod = basis.products();
  const auto& ca = a.coeffs();
  auto& cb = b.coeffs();
  cb(0) = std::exp(ca(0));
  for (std::size_t k = 1; k < basis.size(); ++k) {
    Scalar acc = 0;
    for (std::size_t n = prod.offsets[k]; n < prod.offsets[k + 1]; ++n) {
      const auto i = prod.left[n];
      if (i == 0) continue;
      acc += Scalar(basis.degree(i)) * ca(i) * cb(prod.right[n]);
    }
    cb(static_cast<Eigen::Index>(k)) = acc / Scalar(basis.degree(k));
  }
  return b;
}

/// log of a truncated series with positive constant term; inverse of exp
/// through the same Euler-operator recursion solved for a_m.
template <typename Scalar>
TruncSeries<Scalar> log(const TruncSeries<Scalar>& b) {
  const auto& cb = b.coeffs();
  if (!(cb(0) > Scalar(0))) throw std::domain_error("series log: constant term must be positive");
  TruncSeries<Scalar> a(b.basis_ptr());
  const auto& basis = b.basis();
  const auto& prod = basis.products();
  auto& ca = a.coeffs();
  ca(0) = std::log(cb(0));
  for (std::size_t k = 1; k < basis.size(); ++k) {
    const Scalar dk = Scalar(basis.degree(k));
    Scalar acc = dk * cb(static_cast<Eigen::Index>(k));
    for (std::size_t n = prod.offsets[k]; n < prod.offsets[k + 1]; ++n) {
      const auto i = prod.left[n];
      if (i == 0 || i == k) continue;
      acc -= Scalar(basis.degree(i)) * ca(i) * cb(prod.right[n]);
    }
    ca(static_cast<Eigen::Index>(k)) = acc / (dk * cb(0));
  }
  return a;
}

/// Value of the truncated series at a point of [0,1]^nvars.
template <typename Scalar>
Scalar evaluate(const TruncSeries<Scalar>& a, std::span<const Scalar> point) {
  const int n = a.nvars();
  if (static_cast<int>(point.size()) != n) throw std::invalid_argument("evaluate: point dimension mismatch");
  const int D = a.max_degree();
  // powers(v, d) = point[v]^d
  Matrix<Scalar> powers(n, D + 1);
  for (int v = 0; v < n; ++v) {
    powers(v, 0) = 1;
    for (int d = 1; d <= D; ++d) powers(v, d) = powers(v, d - 1) * point[static_cast<std::size_t>(v)];
  }
  const auto& basis = a.basis();
  Scalar total = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto e = basis.exponents(i);
    Scalar term = a.coeffs()(static_cast<Eigen::Index>(i));
    for (int v = 0; v < n; ++v) term *= powers(v, e[static_cast<std::size_t>(v)]);
    total += term;
  }
  return total;
}

template <typename Scalar>
Scalar evaluate(const TruncSeries<Scalar>& a, std::initializer_list<Scalar> point) {
  return evaluate(a, std::span<const Scalar>(point.begin(), point.size()));
}

/// Probability generating function of a joint pmf as a truncated series:
/// the coefficient of z^x is P(x) for every lattice point with |x| <= D.
/// Defaults D to n*K, which keeps every lattice point.
template <typename Scalar = double, typename Source>
TruncSeries<Scalar> from_joint_pmf(const JointPmf<Source>& pmf, std::optional<int> max_degree = std::nullopt) {
  const int n = pmf.dims();
  const int D = max_degree.value_or(n * pmf.lattice_bound());
  TruncSeries<Scalar> out(n, D);
  const auto& basis = out.basis();
  const int K = pmf.lattice_bound();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto e = basis.exponents(i);
    bool inside = true;
    for (int v : e) inside = inside && v <= K;
    if (inside) out.coeffs()(static_cast<Eigen::Index>(i)) = Scalar(pmf.at(e));
  }
  return out;
}

/// Univariate series from a coefficient vector (entry k is the z^k coefficient).
template <typename Scalar>
TruncSeries<Scalar> from_coefficients(const Vector<Scalar>& c, int max_degree) {
  TruncSeries<Scalar> out(1, max_degree);
  for (int k = 0; k <= max_degree && k < c.size(); ++k) out.coeffs()(k) = c(k);
  return out;
}

}  // namespace misti
