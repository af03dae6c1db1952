#include "dmx/multi_index.hpp"

#include <numeric>
#include <stdexcept>

namespace dmx {

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  if (exps_.empty()) throw std::invalid_argument("MultiIndex: dimension must be >= 1");
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: exponents must be non-negative");
  }
}

MultiIndex MultiIndex::zeros(int dim) {
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(dim), 0));
}

int MultiIndex::order() const {
  return std::accumulate(exps_.begin(), exps_.end(), 0);
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const int oa = a.order();
  const int ob = b.order();
  if (oa != ob) return oa < ob;
  return a.exponents() < b.exponents();
}

namespace {

void compositions_lex(int remaining_dims, int total, std::vector<int>& prefix,
                      std::vector<MultiIndex>& out) {
  if (remaining_dims == 1) {
    prefix.push_back(total);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    prefix.push_back(v);
    compositions_lex(remaining_dims - 1, total - v, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_indices(int dim, int max_order) {
  if (dim < 1) throw std::invalid_argument("enumerate_indices: dim must be >= 1");
  if (max_order < 0) throw std::invalid_argument("enumerate_indices: max_order must be >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> prefix;
  for (int total = 0; total <= max_order; ++total) {
    compositions_lex(dim, total, prefix, out);
  }
  return out;
}

std::int64_t count_moments(int dim, int max_order) {
  if (dim < 1) throw std::invalid_argument("count_moments: dim must be >= 1");
  if (max_order < 0) throw std::invalid_argument("count_moments: max_order must be >= 0");
  if (dim > 16 || max_order > 16) {
    throw std::domain_error("count_moments: supported range is dim <= 16, max_order <= 16");
  }
  // binomial(M+N, k) with k = min(N, M); the running product stays integral.
  const std::int64_t n = dim + max_order;
  const std::int64_t k = std::min<std::int64_t>(dim, max_order);
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

double monomial(Eigen::Ref<const Eigen::VectorXd> x, const MultiIndex& kappa) {
  if (x.size() != kappa.dim()) {
    throw std::invalid_argument("monomial: point and index dimensions differ");
  }
  double r = 1.0;
  for (int k = 0; k < kappa.dim(); ++k) {
    r *= pow_int(x[k], kappa[k]);
  }
  return r;
}

}  // namespace dmx
