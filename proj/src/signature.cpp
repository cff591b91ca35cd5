#include "anosov/signature.hpp"

#include <algorithm>
#include <stdexcept>

namespace anosov {

Signature::Signature(int d, std::vector<int> ps) : d_(d), ps_(std::move(ps)) {
  if (d_ < 2) throw std::invalid_argument("Signature: d must be >= 2");
  if (ps_.empty()) throw std::invalid_argument("Signature: P must be nonempty");
  for (std::size_t k = 0; k < ps_.size(); ++k) {
    if (ps_[k] < 1 || ps_[k] > d_ - 1)
      throw std::invalid_argument("Signature: entries must lie in [1, d-1]");
    if (k > 0 && ps_[k] <= ps_[k - 1])
      throw std::invalid_argument("Signature: entries must be strictly increasing");
  }
}

int Signature::p(int k) const {
  if (k == 0) return 0;
  if (k == count() + 1) return d_;
  if (k < 0 || k > count() + 1) throw std::out_of_range("Signature::p");
  return ps_[k - 1];
}

bool Signature::contains(int v) const {
  return std::binary_search(ps_.begin(), ps_.end(), v);
}

Signature Signature::dual() const {
  std::vector<int> q;
  q.reserve(ps_.size());
  for (auto it = ps_.rbegin(); it != ps_.rend(); ++it) q.push_back(d_ - *it);
  return Signature(d_, std::move(q));
}

SeparatedPairs::SeparatedPairs(const Signature& sig) : sig_(sig) {
  for (int i = 1; i < sig.d(); ++i)
    for (int j = i + 1; j <= sig.d(); ++j)
      if (separated(i, j)) pairs_.push_back({i, j});
}

bool SeparatedPairs::separated(int i, int j) const {
  for (int p : sig_.values())
    if (i <= p && p < j) return true;
  return false;
}

std::vector<IndexPair> SeparatedPairs::pairs_for(int p) const {
  if (!sig_.contains(p)) throw std::invalid_argument("pairs_for: p not in signature");
  std::vector<IndexPair> out;
  for (int i = 1; i <= p; ++i)
    for (int j = p + 1; j <= sig_.d(); ++j) out.push_back({i, j});
  return out;
}

std::vector<Signature> all_signatures(int d) {
  std::vector<Signature> out;
  for (unsigned mask = 1; mask < (1u << (d - 1)); ++mask) {
    std::vector<int> ps;
    for (int p = 1; p <= d - 1; ++p)
      if (mask & (1u << (p - 1))) ps.push_back(p);
    out.emplace_back(d, std::move(ps));
  }
  return out;
}

}  // namespace anosov
