#pragma once

#include "misti/idlaw.hpp"

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace misti {

/// Thrown when an exact enumeration would exceed the configured cell budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest dense table (number of lattice points) any exact builder allocates.
inline constexpr std::size_t kMaxLatticeCells = std::size_t{1} << 25;

/// Exact probability table over {0..K}^n for the process at times t_1 < ... < t_n.
/// The last coordinate varies fastest. `leaked` is the mass outside the lattice.
template <typename Scalar = double>
class JointPmf {
 public:
  JointPmf(std::vector<int> times, int lattice_bound)
      : times_(std::move(times)), bound_(lattice_bound) {
    if (times_.empty()) throw std::invalid_argument("JointPmf: need at least one time");
    if (bound_ < 0) throw std::invalid_argument("JointPmf: lattice bound must be >= 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (times_[i] <= times_[i - 1]) throw std::invalid_argument("JointPmf: times must be strictly increasing");
    const std::size_t side = static_cast<std::size_t>(bound_) + 1;
    std::size_t cells = 1;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (cells > kMaxLatticeCells / side)
        throw BudgetExceeded("JointPmf: lattice {0.." + std::to_string(bound_) + "}^" +
                             std::to_string(times_.size()) + " exceeds the enumeration budget");
      cells *= side;
    }
    table_ = Vector<Scalar>::Zero(static_cast<Eigen::Index>(cells));
  }

  const std::vector<int>& times() const { return times_; }
  int lattice_bound() const { return bound_; }
  int dims() const { return static_cast<int>(times_.size()); }
  std::size_t size() const { return static_cast<std::size_t>(table_.size()); }

  const Vector<Scalar>& table() const { return table_; }
  Vector<Scalar>& table() { return table_; }

  Scalar leaked() const { return leaked_; }
  void set_leaked(Scalar v) { leaked_ = v; }
  /// Sets leaked = 1 - captured mass.
  void close_leak() { leaked_ = Scalar(1) - table_.sum(); }

  std::size_t flatten(std::span<const int> x) const {
    std::size_t idx = 0;
    for (int xi : x) {
      if (xi < 0 || xi > bound_) throw std::out_of_range("JointPmf: lattice point out of range");
      idx = idx * static_cast<std::size_t>(bound_ + 1) + static_cast<std::size_t>(xi);
    }
    return idx;
  }

  std::vector<int> unflatten(std::size_t idx) const {
    std::vector<int> x(times_.size());
    for (std::size_t i = times_.size(); i-- > 0;) {
      x[i] = static_cast<int>(idx % static_cast<std::size_t>(bound_ + 1));
      idx /= static_cast<std::size_t>(bound_ + 1);
    }
    return x;
  }

  Scalar at(std::span<const int> x) const { return table_(static_cast<Eigen::Index>(flatten(x))); }
  Scalar at(std::initializer_list<int> x) const { return at(std::span<const int>(x.begin(), x.size())); }
  Scalar& at(std::span<const int> x) { return table_(static_cast<Eigen::Index>(flatten(x))); }
  Scalar& at(std::initializer_list<int> x) { return at(std::span<const int>(x.begin(), x.size())); }

  /// Marginal table over the listed axes (in the given order, which must be
  /// increasing so the times stay sorted).
  JointPmf marginal(const std::vector<int>& axes) const {
    std::vector<int> sub_times;
    for (int a : axes) sub_times.push_back(times_.at(static_cast<std::size_t>(a)));
    JointPmf out(sub_times, bound_);
    std::vector<int> y(axes.size());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto x = unflatten(i);
      for (std::size_t k = 0; k < axes.size(); ++k) y[k] = x[static_cast<std::size_t>(axes[k])];
      out.at(std::span<const int>(y)) += table_(static_cast<Eigen::Index>(i));
    }
    out.leaked_ = leaked_;
    return out;
  }

 private:
  std::vector<int> times_;
  int bound_;
  Vector<Scalar> table_;
  Scalar leaked_ = 0;
};

}  // namespace misti
