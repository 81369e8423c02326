#include "ample/unitspace.hpp"

#include <algorithm>

namespace ample {

UnitSpace::UnitSpace(int alphabet_size, int depth)
    : alphabet_(alphabet_size), depth_(depth) {
  if (alphabet_size < 2) throw SpecError("alphabet size must be at least 2");
  if (depth < 1) throw SpecError("depth must be at least 1");
  if (depth > limits::max_depth)
    throw ResourceError("depth " + std::to_string(depth) +
                        " exceeds the configured maximum of " +
                        std::to_string(limits::max_depth));
  pow_.resize(static_cast<std::size_t>(depth) + 1);
  pow_[0] = 1;
  for (int i = 1; i <= depth; ++i) {
    pow_[static_cast<std::size_t>(i)] =
        pow_[static_cast<std::size_t>(i - 1)] *
        static_cast<std::size_t>(alphabet_size);
    if (pow_[static_cast<std::size_t>(i)] > limits::max_points)
      throw ResourceError("word space exceeds the configured point cap");
  }
  points_ = pow_[static_cast<std::size_t>(depth)];
}

int UnitSpace::symbol(WordIndex w, int pos) const {
  return static_cast<int>(
      (w / pow_[static_cast<std::size_t>(depth_ - 1 - pos)]) %
      static_cast<std::size_t>(alphabet_));
}

WordIndex UnitSpace::word_from_string(std::string_view s) const {
  if (static_cast<int>(s.size()) != depth_)
    throw SpecError("word \"" + std::string(s) + "\" does not have length " +
                    std::to_string(depth_));
  std::size_t idx = 0;
  for (char c : s) {
    int digit;
    if (c >= '0' && c <= '9')
      digit = c - '0';
    else if (c >= 'a' && c <= 'z')
      digit = 10 + (c - 'a');
    else
      throw SpecError("invalid symbol '" + std::string(1, c) + "' in word");
    if (digit >= alphabet_)
      throw SpecError("symbol '" + std::string(1, c) +
                      "' is outside the alphabet");
    idx = idx * static_cast<std::size_t>(alphabet_) +
          static_cast<std::size_t>(digit);
  }
  return static_cast<WordIndex>(idx);
}

std::string UnitSpace::word_to_string(WordIndex w) const {
  std::string s(static_cast<std::size_t>(depth_), '0');
  std::size_t rest = w;
  for (int i = depth_ - 1; i >= 0; --i) {
    int digit = static_cast<int>(rest % static_cast<std::size_t>(alphabet_));
    rest /= static_cast<std::size_t>(alphabet_);
    s[static_cast<std::size_t>(i)] =
        digit < 10 ? static_cast<char>('0' + digit)
                   : static_cast<char>('a' + digit - 10);
  }
  return s;
}

int UnitSpace::lcp(WordIndex a, WordIndex b) const {
  if (a == b) return depth_;
  int l = 0;
  while (symbol(a, l) == symbol(b, l)) ++l;
  return l;
}

Rational UnitSpace::metric(WordIndex a, WordIndex b) const {
  if (a == b) return Rational(0);
  return pow2(-lcp(a, b));
}

void require_same_space(const UnitSpace& a, const UnitSpace& b,
                        const char* where) {
  if (a != b)
    throw PreconditionError(std::string(where) +
                            ": operands live on different unit spaces");
}

DyadicRadius DyadicRadius::dyadic(int exponent) {
  if (exponent < 0) throw SpecError("dyadic radius exponent must be >= 0");
  return {Kind::pow, exponent};
}

Rational DyadicRadius::value() const {
  switch (kind) {
    case Kind::zero: return Rational(0);
    case Kind::pow: return pow2(-exponent);
    case Kind::one_plus: return Rational(2);
  }
  return Rational(0);
}

bool DyadicRadius::operator<(const DyadicRadius& o) const {
  return value() < o.value();
}

std::string DyadicRadius::str() const {
  switch (kind) {
    case Kind::zero: return "0";
    case Kind::pow: return "2^-" + std::to_string(exponent);
    case Kind::one_plus: return ">1";
  }
  return "?";
}

ClopenSet::ClopenSet(const UnitSpace& space)
    : space_(space), bits_((space.point_count() + 63) / 64, 0) {}

ClopenSet ClopenSet::full(const UnitSpace& space) {
  ClopenSet s(space);
  for (std::size_t w = 0; w < space.point_count(); ++w)
    s.set(static_cast<WordIndex>(w));
  return s;
}

ClopenSet ClopenSet::cylinder(const UnitSpace& space,
                              std::string_view prefix) {
  if (static_cast<int>(prefix.size()) > space.depth())
    throw SpecError("cylinder prefix longer than the depth");
  std::size_t base = 0;
  for (char c : prefix) {
    int digit;
    if (c >= '0' && c <= '9')
      digit = c - '0';
    else if (c >= 'a' && c <= 'z')
      digit = 10 + (c - 'a');
    else
      throw SpecError("invalid symbol in cylinder prefix");
    if (digit >= space.alphabet_size())
      throw SpecError("cylinder prefix symbol outside the alphabet");
    base = base * static_cast<std::size_t>(space.alphabet_size()) +
           static_cast<std::size_t>(digit);
  }
  std::size_t block =
      space.power(space.depth() - static_cast<int>(prefix.size()));
  ClopenSet s(space);
  for (std::size_t w = base * block; w < (base + 1) * block; ++w)
    s.set(static_cast<WordIndex>(w));
  return s;
}

ClopenSet ClopenSet::of_words(const UnitSpace& space,
                              const std::vector<WordIndex>& words) {
  ClopenSet s(space);
  for (WordIndex w : words) {
    if (w >= space.point_count())
      throw SpecError("word index outside the unit space");
    s.set(w);
  }
  return s;
}

ClopenSet ClopenSet::singleton(const UnitSpace& space, WordIndex w) {
  ClopenSet s(space);
  s.set(w);
  return s;
}

std::size_t ClopenSet::cardinality() const {
  std::size_t n = 0;
  for (std::uint64_t b : bits_) n += static_cast<std::size_t>(__builtin_popcountll(b));
  return n;
}

bool ClopenSet::is_empty() const {
  for (std::uint64_t b : bits_)
    if (b) return false;
  return true;
}

std::vector<WordIndex> ClopenSet::words() const {
  std::vector<WordIndex> out;
  for (std::size_t w = 0; w < space_.point_count(); ++w)
    if (contains(static_cast<WordIndex>(w)))
      out.push_back(static_cast<WordIndex>(w));
  return out;
}

ClopenSet ClopenSet::set_union(const ClopenSet& o) const {
  require_same_space(space_, o.space_, "set_union");
  ClopenSet s(space_);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    s.bits_[i] = bits_[i] | o.bits_[i];
  return s;
}

ClopenSet ClopenSet::set_intersection(const ClopenSet& o) const {
  require_same_space(space_, o.space_, "set_intersection");
  ClopenSet s(space_);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    s.bits_[i] = bits_[i] & o.bits_[i];
  return s;
}

ClopenSet ClopenSet::set_difference(const ClopenSet& o) const {
  require_same_space(space_, o.space_, "set_difference");
  ClopenSet s(space_);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    s.bits_[i] = bits_[i] & ~o.bits_[i];
  return s;
}

ClopenSet ClopenSet::complement() const {
  ClopenSet s(space_);
  for (std::size_t i = 0; i < bits_.size(); ++i) s.bits_[i] = ~bits_[i];
  // mask the tail beyond point_count
  std::size_t tail = space_.point_count() % 64;
  if (tail != 0 && !s.bits_.empty())
    s.bits_.back() &= (std::uint64_t{1} << tail) - 1;
  return s;
}

bool ClopenSet::subset_of(const ClopenSet& o) const {
  require_same_space(space_, o.space_, "subset_of");
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] & ~o.bits_[i]) return false;
  return true;
}

bool ClopenSet::operator==(const ClopenSet& o) const {
  return space_ == o.space_ && bits_ == o.bits_;
}

namespace {

// Coarsen a to full cylinders of the given prefix length.
ClopenSet cylinder_closure(const ClopenSet& a, int prefix_len) {
  const UnitSpace& sp = a.space();
  std::size_t block = sp.power(sp.depth() - prefix_len);
  ClopenSet out(sp);
  std::size_t buckets = sp.point_count() / block;
  for (std::size_t b = 0; b < buckets; ++b) {
    bool hit = false;
    for (std::size_t w = b * block; w < (b + 1) * block && !hit; ++w)
      hit = a.contains(static_cast<WordIndex>(w));
    if (hit)
      for (std::size_t w = b * block; w < (b + 1) * block; ++w)
        out.set(static_cast<WordIndex>(w));
  }
  return out;
}

}  // namespace

ClopenSet fatten(const ClopenSet& a, DyadicRadius eps) {
  const UnitSpace& sp = a.space();
  switch (eps.kind) {
    case DyadicRadius::Kind::zero:
      return ClopenSet::empty(sp);
    case DyadicRadius::Kind::one_plus:
      return a.is_empty() ? ClopenSet::empty(sp) : ClopenSet::full(sp);
    case DyadicRadius::Kind::pow: {
      // d(x,a) < 2^-j iff lcp(x,a) >= j+1
      int len = std::min(eps.exponent + 1, sp.depth());
      return cylinder_closure(a, len);
    }
  }
  return ClopenSet::empty(sp);
}

ClopenSet shrink(const ClopenSet& a, DyadicRadius eps) {
  const UnitSpace& sp = a.space();
  switch (eps.kind) {
    case DyadicRadius::Kind::zero:
      return a;
    case DyadicRadius::Kind::one_plus:
      return a.is_full() ? a : ClopenSet::empty(sp);
    case DyadicRadius::Kind::pow: {
      // d(x, X\A) > 2^-j iff the whole length-j cylinder around x lies in A
      int len = std::min(eps.exponent, sp.depth());
      std::size_t block = sp.power(sp.depth() - len);
      ClopenSet out(sp);
      std::size_t buckets = sp.point_count() / block;
      for (std::size_t b = 0; b < buckets; ++b) {
        bool all = true;
        for (std::size_t w = b * block; w < (b + 1) * block && all; ++w)
          all = a.contains(static_cast<WordIndex>(w));
        if (all)
          for (std::size_t w = b * block; w < (b + 1) * block; ++w)
            out.set(static_cast<WordIndex>(w));
      }
      return out;
    }
  }
  return ClopenSet::empty(sp);
}

std::optional<Rational> distance_to_set(const UnitSpace& space, WordIndex x,
                                        const ClopenSet& a) {
  require_same_space(space, a.space(), "distance_to_set");
  if (a.is_empty()) return std::nullopt;
  int best = -1;
  for (std::size_t w = 0; w < space.point_count(); ++w) {
    if (!a.contains(static_cast<WordIndex>(w))) continue;
    best = std::max(best, space.lcp(x, static_cast<WordIndex>(w)));
  }
  if (best == space.depth()) return Rational(0);
  return pow2(-best);
}

}  // namespace ample
