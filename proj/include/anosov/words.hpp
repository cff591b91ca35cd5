#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anosov/rng.hpp"

namespace anosov::words {

// Letters index a symmetric alphabet of size 2k: generator i sits at slot 2i,
// its inverse at slot 2i+1, so the involution is `letter ^ 1` and the
// lexicographic order is a, a', b, b', ...
using Letter = std::uint8_t;

inline Letter inverse_letter(Letter l) { return static_cast<Letter>(l ^ 1); }

class GeneratorSet {
 public:
  explicit GeneratorSet(int rank);                        // names a, b, c, ...
  explicit GeneratorSet(std::vector<std::string> names);  // one per generator

  int rank() const { return static_cast<int>(names_.size()); }
  int alphabet_size() const { return 2 * rank(); }
  std::string letter_name(Letter l) const;  // inverse carries a ' suffix
  bool operator==(const GeneratorSet&) const = default;

 private:
  std::vector<std::string> names_;
};

// Reduced word over a symmetric alphabet. Every factory reduces, so no letter
// is ever followed by its involution partner.
class Word {
 public:
  Word() = default;
  static Word identity(const GeneratorSet& gs);
  static Word single(const GeneratorSet& gs, Letter l);
  static Word from_letters(int alphabet_size, std::span<const Letter> letters);

  std::size_t length() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter letter(std::size_t i) const { return letters_[i]; }
  std::span<const Letter> letters() const { return letters_; }
  int alphabet_size() const { return alphabet_; }

  Word inverse() const;
  Word prefix(std::size_t n) const;
  bool starts_with(const Word& p) const;

  // shortlex; the canonical key order for measures and sphere enumeration
  std::strong_ordering operator<=>(const Word& o) const;
  bool operator==(const Word& o) const {
    return alphabet_ == o.alphabet_ && letters_ == o.letters_;
  }

 private:
  int alphabet_ = 0;
  std::vector<Letter> letters_;
};

// Reduced product x.y; throws std::invalid_argument on alphabet mismatch.
Word multiply(const Word& x, const Word& y);

// All reduced words of length exactly n, lexicographic in letter index.
// |sphere(n)| = 2k (2k-1)^(n-1) for n >= 1.
std::vector<Word> sphere(const GeneratorSet& gs, int n);
double sphere_size(const GeneratorSet& gs, int n);

std::size_t common_prefix_length(const Word& x, const Word& y);

// (x|y) = (|x| + |y| - |x^-1 y|) / 2; equals the common prefix length.
double gromov_product(const Word& x, const Word& y);

// Combinatorial shadow: all rays extending a fixed reduced prefix. Membership
// is tested on finite approximants.
struct Cylinder {
  Word prefix;
  int depth = 0;
  bool contains(const Word& w) const { return w.starts_with(prefix); }
};

Cylinder shadow_cylinder(const Word& ray_prefix);

// Uniform sample from sphere(length): first letter uniform over 2k, each
// subsequent letter uniform over the 2k-1 legal continuations.
Word random_reduced_word(const GeneratorSet& gs, int length, Rng& rng);
Word random_extension(const Word& prefix, const GeneratorSet& gs, int extra, Rng& rng);

// eventually periodic ray approximant: prefix . period . period ... cut to
// total_length letters after reduction-aware concatenation
Word periodic_extension(const Word& prefix, const Word& period, std::size_t total_length);

std::string to_string(const GeneratorSet& gs, const Word& w);
Word parse_word(const GeneratorSet& gs, std::string_view text);

}  // namespace anosov::words
