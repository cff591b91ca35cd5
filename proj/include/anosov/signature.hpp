#pragma once

#include <span>
#include <vector>

namespace anosov {

// Nonempty strictly increasing subset P of {1,...,d-1}. Conventionally
// p(0) = 0 and p(M+1) = d.
class Signature {
 public:
  Signature(int d, std::vector<int> ps);

  int d() const { return d_; }
  int count() const { return static_cast<int>(ps_.size()); }  // M
  int p(int k) const;                                         // k in [0, M+1]
  bool contains(int v) const;
  std::span<const int> values() const { return ps_; }
  Signature dual() const;  // {d - p : p in P}
  bool full() const { return count() == d_ - 1; }
  bool operator==(const Signature&) const = default;

 private:
  int d_;
  std::vector<int> ps_;
};

struct IndexPair {
  int i = 0, j = 0;  // 1-based, i < j
  auto operator<=>(const IndexPair&) const = default;
};

// The pairs (i,j) with i <= p < j for some p in P, in lexicographic order.
// Their count equals the dimension of the flag manifold of signature P.
class SeparatedPairs {
 public:
  explicit SeparatedPairs(const Signature& sig);

  const Signature& signature() const { return sig_; }
  int count() const { return static_cast<int>(pairs_.size()); }  // D
  std::span<const IndexPair> pairs() const { return pairs_; }
  bool separated(int i, int j) const;
  std::vector<IndexPair> pairs_for(int p) const;  // S_p

 private:
  Signature sig_;
  std::vector<IndexPair> pairs_;
};

// Every nonempty signature for dimension d, ordered by subset bitmask.
std::vector<Signature> all_signatures(int d);

}  // namespace anosov
