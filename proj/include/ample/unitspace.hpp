#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ample/errors.hpp"
#include "ample/rational.hpp"

namespace ample {

using WordIndex = std::uint32_t;

namespace limits {
inline constexpr std::size_t max_points = 1u << 20;
inline constexpr int max_depth = 20;
inline constexpr std::size_t max_arrows = 2'000'000;
inline constexpr std::size_t max_group_elements = 4096;
}  // namespace limits

// Depth-truncated word space over a finite alphabet. Words are indexed
// 0..k^d-1 in lexicographic (most-significant-symbol-first) order, so a
// common prefix of length L corresponds to a contiguous index range.
class UnitSpace {
public:
  UnitSpace(int alphabet_size, int depth);

  int alphabet_size() const { return alphabet_; }
  int depth() const { return depth_; }
  std::size_t point_count() const { return points_; }

  int symbol(WordIndex w, int pos) const;
  WordIndex word_from_string(std::string_view s) const;
  std::string word_to_string(WordIndex w) const;

  // Longest common prefix length; equals depth iff the words are equal.
  int lcp(WordIndex a, WordIndex b) const;

  // d(x,y) = 2^{-lcp(x,y)} for x != y, 0 otherwise. Ultrametric.
  Rational metric(WordIndex a, WordIndex b) const;

  // k^i
  std::size_t power(int i) const { return pow_[static_cast<std::size_t>(i)]; }

  bool operator==(const UnitSpace& o) const {
    return alphabet_ == o.alphabet_ && depth_ == o.depth_;
  }
  bool operator!=(const UnitSpace& o) const { return !(*this == o); }

private:
  int alphabet_;
  int depth_;
  std::size_t points_;
  std::vector<std::size_t> pow_;
};

void require_same_space(const UnitSpace& a, const UnitSpace& b,
                        const char* where);

// Radii are dyadic so that the strict inequalities in fattening and
// shrinking are decidable exactly. ZERO and ONE_PLUS are the two
// distinguished out-of-range values (0 and something above the diameter).
struct DyadicRadius {
  enum class Kind { zero, pow, one_plus };

  Kind kind = Kind::zero;
  int exponent = 0;  // valid for Kind::pow, value 2^-exponent

  static DyadicRadius zero() { return {Kind::zero, 0}; }
  static DyadicRadius one_plus() { return {Kind::one_plus, 0}; }
  static DyadicRadius dyadic(int exponent);

  bool positive() const { return kind != Kind::zero; }
  Rational value() const;

  bool operator==(const DyadicRadius& o) const {
    return kind == o.kind && (kind != Kind::pow || exponent == o.exponent);
  }
  bool operator<(const DyadicRadius& o) const;

  std::string str() const;
};

// Exact subset of a unit space, stored as a bitset over the word indices.
class ClopenSet {
public:
  explicit ClopenSet(const UnitSpace& space);

  static ClopenSet empty(const UnitSpace& space) { return ClopenSet(space); }
  static ClopenSet full(const UnitSpace& space);
  static ClopenSet cylinder(const UnitSpace& space, std::string_view prefix);
  static ClopenSet of_words(const UnitSpace& space,
                            const std::vector<WordIndex>& words);
  static ClopenSet singleton(const UnitSpace& space, WordIndex w);

  const UnitSpace& space() const { return space_; }

  bool contains(WordIndex w) const {
    return (bits_[w >> 6] >> (w & 63)) & 1u;
  }
  void set(WordIndex w) { bits_[w >> 6] |= (std::uint64_t{1} << (w & 63)); }
  void reset(WordIndex w) { bits_[w >> 6] &= ~(std::uint64_t{1} << (w & 63)); }

  std::size_t cardinality() const;
  bool is_empty() const;
  bool is_full() const { return cardinality() == space_.point_count(); }

  std::vector<WordIndex> words() const;  // sorted

  ClopenSet set_union(const ClopenSet& o) const;
  ClopenSet set_intersection(const ClopenSet& o) const;
  ClopenSet set_difference(const ClopenSet& o) const;
  ClopenSet complement() const;
  bool subset_of(const ClopenSet& o) const;

  bool operator==(const ClopenSet& o) const;
  bool operator!=(const ClopenSet& o) const { return !(*this == o); }

private:
  UnitSpace space_;
  std::vector<std::uint64_t> bits_;
};

// A^eps = { x : d(x, A) < eps }. Coarsens A to full cylinders; exact.
ClopenSet fatten(const ClopenSet& a, DyadicRadius eps);

// A^{-eps} = { x : d(x, X \ A) > eps }, with d(x, emptyset) = +infinity.
ClopenSet shrink(const ClopenSet& a, DyadicRadius eps);

// min over members, nullopt for the empty set (distance +infinity).
std::optional<Rational> distance_to_set(const UnitSpace& space, WordIndex x,
                                        const ClopenSet& a);

}  // namespace ample
