#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ample/unitspace.hpp"

namespace ample {

using ArrowId = std::int32_t;

// (source, range, label) determines an arrow uniquely within a groupoid.
// The label is an opaque germ tag: a group-element id for transformation
// groupoids, 0 for principal relations, a cyclic-group element for bundles.
struct Arrow {
  WordIndex source;
  WordIndex range;
  std::int64_t label;
};

struct ValidationOptions {
  bool validate = true;
  // associativity is checked exhaustively up to this many triples,
  // deterministically sampled above
  std::size_t exhaustive_triple_cap = 4'000'000;
  std::size_t sample_count = 200'000;
};

// Raw material handed to the FiniteGroupoid constructor by the builders.
struct GroupoidData {
  UnitSpace space;
  std::string kind;
  std::vector<Arrow> arrows;
  std::vector<ArrowId> inverse;      // per arrow
  std::vector<ArrowId> unit_arrows;  // per word index
  std::vector<ArrowId> generators;   // symmetric set K, units excluded
  // raw composition rule, consulted once per composable pair while the
  // groupoid's own tables are being materialized
  std::function<std::optional<ArrowId>(const class FiniteGroupoid&, ArrowId,
                                       ArrowId)>
      compose;
};

// Explicit finite groupoid: immutable after construction, all the axioms
// checked at build time, word lengths precomputed by BFS over K.
class FiniteGroupoid {
public:
  FiniteGroupoid(GroupoidData data, const ValidationOptions& opts = {});

  const UnitSpace& space() const { return space_; }
  const std::string& kind() const { return kind_; }

  std::size_t arrow_count() const { return arrows_.size(); }
  WordIndex source(ArrowId a) const { return arrows_[static_cast<std::size_t>(a)].source; }
  WordIndex range(ArrowId a) const { return arrows_[static_cast<std::size_t>(a)].range; }
  std::int64_t label(ArrowId a) const { return arrows_[static_cast<std::size_t>(a)].label; }
  ArrowId inverse(ArrowId a) const { return inverse_[static_cast<std::size_t>(a)]; }
  ArrowId unit_at(WordIndex w) const { return unit_arrows_[w]; }
  bool is_unit(ArrowId a) const { return unit_at(source(a)) == a; }

  // a after b; defined iff source(a) == range(b)
  std::optional<ArrowId> compose(ArrowId a, ArrowId b) const;

  std::span<const ArrowId> source_fiber(WordIndex w) const {
    return {source_fiber_[w].data(), source_fiber_[w].size()};
  }
  std::span<const ArrowId> range_fiber(WordIndex w) const {
    return {range_fiber_[w].data(), range_fiber_[w].size()};
  }
  std::span<const ArrowId> generators() const {
    return {generators_.data(), generators_.size()};
  }
  // generators with the given source
  std::span<const ArrowId> generators_from(WordIndex w) const {
    return {generators_from_[w].data(), generators_from_[w].size()};
  }

  std::optional<ArrowId> find_arrow(WordIndex source, WordIndex range,
                                    std::int64_t label) const;

  // word length with respect to K; 0 on units
  int word_length(ArrowId a) const;
  int max_word_length() const { return max_word_length_; }

  // source fiber sorted by (word length, id); balls are prefixes of this
  std::span<const ArrowId> source_fiber_by_length(WordIndex w) const {
    return {fiber_by_length_[w].data(), fiber_by_length_[w].size()};
  }

  std::vector<ArrowId> all_arrows() const;

  bool is_principal() const;

private:
  void build_tables();
  void validate(const ValidationOptions& opts);
  void compute_word_lengths();

  UnitSpace space_;
  std::string kind_;
  std::vector<Arrow> arrows_;
  std::vector<ArrowId> inverse_;
  std::vector<ArrowId> unit_arrows_;
  std::vector<ArrowId> generators_;
  std::vector<std::vector<ArrowId>> source_fiber_;
  std::vector<std::vector<ArrowId>> range_fiber_;
  std::vector<std::vector<ArrowId>> generators_from_;
  std::vector<std::vector<ArrowId>> fiber_by_length_;
  std::vector<int> lengths_;
  int max_word_length_ = 0;
  std::unordered_map<std::uint64_t, ArrowId> compose_table_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::int64_t, ArrowId>>>
      arrow_lookup_;
};

// ---------------------------------------------------------------------------
// ingestion specs

enum class TransformationMode { full, principal };

// One named generator: a partial injection of the word space given as an
// image table (image[w] = target word, or -1 where undefined).
struct GeneratorMap {
  std::string name;
  std::vector<std::int32_t> image;
};

struct TransformationSpec {
  UnitSpace space;
  TransformationMode mode = TransformationMode::full;
  std::vector<GeneratorMap> generators;
};

struct BratteliSpec {
  std::vector<int> level_sizes;  // level_sizes[0] must be 1 (the root)
  // multiplicity[l][i][j] = number of edges from vertex i at level l to
  // vertex j at level l+1
  std::vector<std::vector<std::vector<int>>> multiplicity;
  int truncation_depth = 0;
};

FiniteGroupoid from_transformation(const TransformationSpec& spec,
                                   const ValidationOptions& opts = {});
FiniteGroupoid from_bratteli(const BratteliSpec& spec,
                             const ValidationOptions& opts = {});

// Group bundle with a copy of Z/k over every point; k = 1 gives the
// units-only groupoid.
FiniteGroupoid group_bundle(const UnitSpace& space, int cyclic_order,
                            const ValidationOptions& opts = {});

// Full equivalence relation on the whole space, K = off-diagonal arrows.
FiniteGroupoid pair_groupoid(const UnitSpace& space,
                             const ValidationOptions& opts = {});

// The +1 adding machine on depth-d words over the alphabet, full mode.
TransformationSpec odometer_spec(int alphabet, int depth);

// ---------------------------------------------------------------------------
// bisections

// Arrow set with injective source and range; induces the partial bijection
// theta: s(V) -> r(V).
class Bisection {
public:
  Bisection(const FiniteGroupoid& g, std::vector<ArrowId> arrows);

  const FiniteGroupoid& groupoid() const { return *g_; }
  std::span<const ArrowId> arrows() const {
    return {arrows_.data(), arrows_.size()};
  }
  std::size_t size() const { return arrows_.size(); }

  const ClopenSet& source_image() const { return source_image_; }
  const ClopenSet& range_image() const { return range_image_; }

  std::optional<ArrowId> arrow_with_source(WordIndex w) const;
  std::optional<ArrowId> arrow_with_range(WordIndex w) const;

  WordIndex theta(WordIndex x) const;          // throws outside s(V)
  WordIndex theta_inverse(WordIndex y) const;  // throws outside r(V)

  // theta(S ∩ s(V)) and theta^{-1}(T ∩ r(V))
  ClopenSet push(const ClopenSet& s) const;
  ClopenSet pull(const ClopenSet& t) const;

  Bisection restrict_source(const ClopenSet& s) const;

private:
  const FiniteGroupoid* g_;
  std::vector<ArrowId> arrows_;
  ClopenSet source_image_;
  ClopenSet range_image_;
  std::unordered_map<WordIndex, ArrowId> by_source_;
  std::unordered_map<WordIndex, ArrowId> by_range_;
};

// Partition D into bisections: germ-label groups first, conflicts split
// greedily in arrow-id order. Deterministic.
std::vector<Bisection> decompose_into_bisections(const FiniteGroupoid& g,
                                                 std::span<const ArrowId> d);

// Iso(G) (arrows with source = range, K = all non-unit isotropy arrows) and
// the principal quotient (arrows (s,r) with K the image of K).
std::pair<FiniteGroupoid, FiniteGroupoid> isotropy_and_quotient(
    const FiniteGroupoid& g, const ValidationOptions& opts = {});

}  // namespace ample
