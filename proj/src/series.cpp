#include "misti/series.hpp"

#include <cmath>
#include <stdexcept>

namespace misti {

namespace {

// Appends every composition of `remaining` into the slots [pos, n) of `e`.
void compositions(std::vector<int>& e, std::size_t pos, int remaining, std::vector<int>& out) {
  if (pos + 1 == e.size()) {
    e[pos] = remaining;
    out.insert(out.end(), e.begin(), e.end());
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    e[pos] = v;
    compositions(e, pos + 1, remaining - v, out);
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int nvars, int max_degree) : nvars_(nvars), max_degree_(max_degree) {
  if (nvars < 1) throw std::invalid_argument("MonomialBasis: need at least one variable");
  if (max_degree < 0) throw std::invalid_argument("MonomialBasis: degree must be >= 0");
  const double bits = nvars * std::log2(static_cast<double>(max_degree) + 1.0);
  if (bits > 62.0) throw std::invalid_argument("MonomialBasis: nvars/degree too large for index keys");

  std::vector<int> e(static_cast<std::size_t>(nvars), 0);
  for (int d = 0; d <= max_degree; ++d) {
    const std::size_t before = exps_.size();
    compositions(e, 0, d, exps_);
    const std::size_t added = (exps_.size() - before) / static_cast<std::size_t>(nvars);
    degrees_.insert(degrees_.end(), added, d);
  }
  lookup_.reserve(degrees_.size());
  for (std::size_t i = 0; i < degrees_.size(); ++i) lookup_.emplace(key(exponents(i)), i);
}

std::uint64_t MonomialBasis::key(std::span<const int> e) const {
  std::uint64_t k = 0;
  for (int v : e) k = k * static_cast<std::uint64_t>(max_degree_ + 1) + static_cast<std::uint64_t>(v);
  return k;
}

std::optional<std::size_t> MonomialBasis::index_of(std::span<const int> e) const {
  if (static_cast<int>(e.size()) != nvars_) throw std::invalid_argument("MonomialBasis: exponent length mismatch");
  int total = 0;
  for (int v : e) {
    if (v < 0) throw std::invalid_argument("MonomialBasis: negative exponent");
    total += v;
  }
  if (total > max_degree_) return std::nullopt;
  auto it = lookup_.find(key(e));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

const MonomialBasis::ProductTable& MonomialBasis::products() const {
  std::call_once(products_once_, [this] {
    const std::size_t m = size();
    std::vector<std::size_t> counts(m + 1, 0);
    std::vector<std::uint32_t> ks, is, js;
    std::vector<int> sum(static_cast<std::size_t>(nvars_));
    for (std::size_t i = 0; i < m; ++i) {
      const auto ei = exponents(i);
      for (std::size_t j = 0; j < m; ++j) {
        if (degrees_[i] + degrees_[j] > max_degree_) break;
        const auto ej = exponents(j);
        for (std::size_t v = 0; v < sum.size(); ++v) sum[v] = ei[v] + ej[v];
        const std::size_t k = lookup_.at(key(sum));
        ks.push_back(static_cast<std::uint32_t>(k));
        is.push_back(static_cast<std::uint32_t>(i));
        js.push_back(static_cast<std::uint32_t>(j));
        ++counts[k + 1];
      }
    }
    products_.offsets.assign(m + 1, 0);
    for (std::size_t k = 0; k < m; ++k) products_.offsets[k + 1] = products_.offsets[k] + counts[k + 1];
    products_.left.resize(ks.size());
    products_.right.resize(ks.size());
    std::vector<std::size_t> cursor(products_.offsets.begin(), products_.offsets.end() - 1);
    for (std::size_t n = 0; n < ks.size(); ++n) {
      const std::size_t slot = cursor[ks[n]]++;
      products_.left[slot] = is[n];
      products_.right[slot] = js[n];
    }
  });
  return products_;
}

std::shared_ptr<const MonomialBasis> make_basis(int nvars, int max_degree) {
  return std::make_shared<const MonomialBasis>(nvars, max_degree);
}

}  // namespace misti
