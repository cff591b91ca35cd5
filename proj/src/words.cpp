#include "anosov/words.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anosov::words {

namespace {

std::string default_name(int i) {
  // a..z, then g26, g27, ...
  if (i < 26) return std::string(1, static_cast<char>('a' + i));
  return "g" + std::to_string(i);
}

}  // namespace

GeneratorSet::GeneratorSet(int rank) {
  if (rank < 1 || rank > 26) throw std::invalid_argument("GeneratorSet: rank must be in [1,26]");
  names_.reserve(rank);
  for (int i = 0; i < rank; ++i) names_.push_back(default_name(i));
}

GeneratorSet::GeneratorSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty() || names_.size() > 26)
    throw std::invalid_argument("GeneratorSet: need 1..26 generator names");
  for (const auto& n : names_) {
    if (n.empty() || n.find('\'') != std::string::npos)
      throw std::invalid_argument("GeneratorSet: bad generator name '" + n + "'");
  }
  for (std::size_t i = 0; i < names_.size(); ++i)
    for (std::size_t j = i + 1; j < names_.size(); ++j)
      if (names_[i] == names_[j])
        throw std::invalid_argument("GeneratorSet: duplicate name '" + names_[i] + "'");
}

std::string GeneratorSet::letter_name(Letter l) const {
  if (l >= alphabet_size()) throw std::out_of_range("letter_name: letter out of range");
  std::string s = names_[l / 2];
  if (l & 1) s += '\'';
  return s;
}

Word Word::identity(const GeneratorSet& gs) {
  Word w;
  w.alphabet_ = gs.alphabet_size();
  return w;
}

Word Word::single(const GeneratorSet& gs, Letter l) {
  if (l >= gs.alphabet_size()) throw std::out_of_range("Word::single: letter out of range");
  Word w;
  w.alphabet_ = gs.alphabet_size();
  w.letters_.push_back(l);
  return w;
}

Word Word::from_letters(int alphabet_size, std::span<const Letter> letters) {
  Word w;
  w.alphabet_ = alphabet_size;
  w.letters_.reserve(letters.size());
  for (Letter l : letters) {
    if (l >= alphabet_size) throw std::out_of_range("Word::from_letters: letter out of range");
    if (!w.letters_.empty() && w.letters_.back() == inverse_letter(l))
      w.letters_.pop_back();
    else
      w.letters_.push_back(l);
  }
  return w;
}

Word Word::inverse() const {
  Word w;
  w.alphabet_ = alphabet_;
  w.letters_.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
    w.letters_.push_back(inverse_letter(*it));
  return w;
}

Word Word::prefix(std::size_t n) const {
  Word w;
  w.alphabet_ = alphabet_;
  w.letters_.assign(letters_.begin(), letters_.begin() + std::min(n, letters_.size()));
  return w;
}

bool Word::starts_with(const Word& p) const {
  if (p.alphabet_ != alphabet_ || p.length() > length()) return false;
  return std::equal(p.letters_.begin(), p.letters_.end(), letters_.begin());
}

std::strong_ordering Word::operator<=>(const Word& o) const {
  if (auto c = alphabet_ <=> o.alphabet_; c != 0) return c;
  if (auto c = letters_.size() <=> o.letters_.size(); c != 0) return c;
  for (std::size_t i = 0; i < letters_.size(); ++i)
    if (auto c = letters_[i] <=> o.letters_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

Word multiply(const Word& x, const Word& y) {
  if (x.alphabet_size() != y.alphabet_size())
    throw std::invalid_argument("multiply: words over different generator sets");
  std::vector<Letter> out(x.letters().begin(), x.letters().end());
  for (Letter l : y.letters()) {
    if (!out.empty() && out.back() == inverse_letter(l))
      out.pop_back();
    else
      out.push_back(l);
  }
  // out is already reduced; from_letters is a no-op pass that re-checks range
  return Word::from_letters(x.alphabet_size(), out);
}

std::vector<Word> sphere(const GeneratorSet& gs, int n) {
  if (n < 0) throw std::invalid_argument("sphere: n must be >= 0");
  std::vector<Word> out;
  if (n == 0) {
    out.push_back(Word::identity(gs));
    return out;
  }
  const int a = gs.alphabet_size();
  const double total = sphere_size(gs, n);
  if (total > 5e8) throw std::length_error("sphere: too many words to materialize");
  out.reserve(static_cast<std::size_t>(total));
  std::vector<Letter> stack;
  stack.reserve(n);
  // depth-first, letters tried in increasing index -> lexicographic output
  auto recurse = [&](auto&& self) -> void {
    if (static_cast<int>(stack.size()) == n) {
      out.push_back(Word::from_letters(a, stack));
      return;
    }
    for (Letter l = 0; l < a; ++l) {
      if (!stack.empty() && stack.back() == inverse_letter(l)) continue;
      stack.push_back(l);
      self(self);
      stack.pop_back();
    }
  };
  recurse(recurse);
  return out;
}

double sphere_size(const GeneratorSet& gs, int n) {
  if (n < 0) throw std::invalid_argument("sphere_size: n must be >= 0");
  if (n == 0) return 1.0;
  const double a = gs.alphabet_size();
  return a * std::pow(a - 1.0, n - 1);
}

std::size_t common_prefix_length(const Word& x, const Word& y) {
  if (x.alphabet_size() != y.alphabet_size())
    throw std::invalid_argument("common_prefix_length: alphabet mismatch");
  const std::size_t m = std::min(x.length(), y.length());
  std::size_t i = 0;
  while (i < m && x.letter(i) == y.letter(i)) ++i;
  return i;
}

double gromov_product(const Word& x, const Word& y) {
  const Word xy = multiply(x.inverse(), y);
  return 0.5 * (static_cast<double>(x.length()) + static_cast<double>(y.length()) -
                static_cast<double>(xy.length()));
}

Cylinder shadow_cylinder(const Word& ray_prefix) {
  return Cylinder{ray_prefix, static_cast<int>(ray_prefix.length())};
}

Word random_reduced_word(const GeneratorSet& gs, int length, Rng& rng) {
  if (length < 0) throw std::invalid_argument("random_reduced_word: negative length");
  const int a = gs.alphabet_size();
  std::vector<Letter> letters;
  letters.reserve(length);
  for (int i = 0; i < length; ++i) {
    if (letters.empty()) {
      letters.push_back(static_cast<Letter>(rng.next_below(a)));
    } else {
      const Letter forbidden = inverse_letter(letters.back());
      Letter l = static_cast<Letter>(rng.next_below(a - 1));
      if (l >= forbidden) ++l;
      letters.push_back(l);
    }
  }
  return Word::from_letters(a, letters);
}

Word random_extension(const Word& prefix, const GeneratorSet& gs, int extra, Rng& rng) {
  if (prefix.alphabet_size() != gs.alphabet_size() && !prefix.empty())
    throw std::invalid_argument("random_extension: alphabet mismatch");
  const int a = gs.alphabet_size();
  std::vector<Letter> letters(prefix.letters().begin(), prefix.letters().end());
  letters.reserve(letters.size() + extra);
  for (int i = 0; i < extra; ++i) {
    if (letters.empty()) {
      letters.push_back(static_cast<Letter>(rng.next_below(a)));
    } else {
      const Letter forbidden = inverse_letter(letters.back());
      Letter l = static_cast<Letter>(rng.next_below(a - 1));
      if (l >= forbidden) ++l;
      letters.push_back(l);
    }
  }
  return Word::from_letters(a, letters);
}

Word periodic_extension(const Word& prefix, const Word& period, std::size_t total_length) {
  if (period.empty()) throw std::invalid_argument("periodic_extension: empty period");
  Word out = prefix;
  while (out.length() < total_length) out = multiply(out, period);
  return out.prefix(total_length);
}

std::string to_string(const GeneratorSet& gs, const Word& w) {
  if (w.alphabet_size() != gs.alphabet_size() && !w.empty())
    throw std::invalid_argument("to_string: alphabet mismatch");
  if (w.empty()) return "e";
  std::string s;
  for (Letter l : w.letters()) s += gs.letter_name(l);
  return s;
}

Word parse_word(const GeneratorSet& gs, std::string_view text) {
  std::vector<Letter> letters;
  if (text == "e") return Word::identity(gs);
  std::size_t pos = 0;
  while (pos < text.size()) {
    int best = -1;
    std::size_t best_len = 0;
    for (Letter l = 0; l < gs.alphabet_size(); l += 2) {
      const std::string name = gs.letter_name(l);
      if (name.size() > best_len && text.substr(pos, name.size()) == name) {
        best = l;
        best_len = name.size();
      }
    }
    if (best < 0)
      throw std::invalid_argument("parse_word: unknown generator at '" + std::string(text.substr(pos)) + "'");
    pos += best_len;
    Letter l = static_cast<Letter>(best);
    if (pos < text.size() && text[pos] == '\'') {
      l = inverse_letter(l);
      ++pos;
    }
    letters.push_back(l);
  }
  return Word::from_letters(gs.alphabet_size(), letters);
}

}  // namespace anosov::words
