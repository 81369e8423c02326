#include "ample/groupoid.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

namespace ample {

namespace {

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

constexpr std::size_t kComposablePairCap = 16'000'000;

}  // namespace

FiniteGroupoid::FiniteGroupoid(GroupoidData data, const ValidationOptions& opts)
    : space_(data.space),
      kind_(std::move(data.kind)),
      arrows_(std::move(data.arrows)),
      inverse_(std::move(data.inverse)),
      unit_arrows_(std::move(data.unit_arrows)),
      generators_(std::move(data.generators)) {
  const std::size_t n = arrows_.size();
  const std::size_t points = space_.point_count();
  if (n > limits::max_arrows)
    throw ResourceError("arrow count exceeds the configured cap");
  if (inverse_.size() != n || unit_arrows_.size() != points)
    throw InvariantViolation("groupoid tables have inconsistent sizes");

  source_fiber_.assign(points, {});
  range_fiber_.assign(points, {});
  generators_from_.assign(points, {});
  for (std::size_t i = 0; i < n; ++i) {
    const Arrow& a = arrows_[i];
    if (a.source >= points || a.range >= points)
      throw InvariantViolation("arrow endpoint outside the unit space");
    source_fiber_[a.source].push_back(static_cast<ArrowId>(i));
    range_fiber_[a.range].push_back(static_cast<ArrowId>(i));
    auto& slot = arrow_lookup_[pair_key(a.source, a.range)];
    for (const auto& [lbl, id] : slot)
      if (lbl == a.label)
        throw InvariantViolation("duplicate (source, range, label) arrow");
    slot.emplace_back(a.label, static_cast<ArrowId>(i));
  }

  for (std::size_t w = 0; w < points; ++w) {
    ArrowId u = unit_arrows_[w];
    if (u < 0 || static_cast<std::size_t>(u) >= n ||
        arrows_[static_cast<std::size_t>(u)].source != w ||
        arrows_[static_cast<std::size_t>(u)].range != w)
      throw InvariantViolation("unit arrow table is malformed");
  }

  std::set<ArrowId> gen_set(generators_.begin(), generators_.end());
  for (ArrowId k : generators_) {
    if (k < 0 || static_cast<std::size_t>(k) >= n)
      throw InvariantViolation("generator id out of range");
    if (unit_arrows_[arrows_[static_cast<std::size_t>(k)].source] == k)
      throw InvariantViolation("generating set K must exclude units");
    if (!gen_set.count(inverse_[static_cast<std::size_t>(k)]))
      throw InvariantViolation("generating set K is not symmetric");
  }
  std::sort(generators_.begin(), generators_.end());
  for (ArrowId k : generators_)
    generators_from_[arrows_[static_cast<std::size_t>(k)].source].push_back(k);

  // materialize the composition table over all composable pairs
  std::size_t pairs = 0;
  for (std::size_t w = 0; w < points; ++w)
    pairs += source_fiber_[w].size() * range_fiber_[w].size();
  if (pairs > kComposablePairCap)
    throw ResourceError("composable pair count exceeds the configured cap");
  compose_table_.reserve(pairs * 2);
  for (std::size_t w = 0; w < points; ++w) {
    for (ArrowId a : source_fiber_[w]) {
      for (ArrowId b : range_fiber_[w]) {
        auto c = data.compose(*this, a, b);
        if (!c)
          throw InvariantViolation("composable pair has no product");
        if (source(*c) != source(b) || range(*c) != range(a))
          throw InvariantViolation("product endpoints are inconsistent");
        compose_table_[pair_key(static_cast<std::uint32_t>(a),
                                static_cast<std::uint32_t>(b))] = *c;
      }
    }
  }

  if (opts.validate) validate(opts);
  compute_word_lengths();

  fiber_by_length_.assign(points, {});
  for (std::size_t w = 0; w < points; ++w) {
    fiber_by_length_[w] = source_fiber_[w];
    std::sort(fiber_by_length_[w].begin(), fiber_by_length_[w].end(),
              [&](ArrowId x, ArrowId y) {
                int lx = lengths_[static_cast<std::size_t>(x)];
                int ly = lengths_[static_cast<std::size_t>(y)];
                return lx != ly ? lx < ly : x < y;
              });
  }
}

std::optional<ArrowId> FiniteGroupoid::compose(ArrowId a, ArrowId b) const {
  if (source(a) != range(b)) return std::nullopt;
  auto it = compose_table_.find(pair_key(static_cast<std::uint32_t>(a),
                                         static_cast<std::uint32_t>(b)));
  if (it == compose_table_.end()) return std::nullopt;
  return it->second;
}

std::optional<ArrowId> FiniteGroupoid::find_arrow(WordIndex source,
                                                  WordIndex range,
                                                  std::int64_t label) const {
  auto it = arrow_lookup_.find(pair_key(source, range));
  if (it == arrow_lookup_.end()) return std::nullopt;
  for (const auto& [lbl, id] : it->second)
    if (lbl == label) return id;
  return std::nullopt;
}

void FiniteGroupoid::validate(const ValidationOptions& opts) {
  const std::size_t n = arrows_.size();

  for (std::size_t i = 0; i < n; ++i) {
    ArrowId a = static_cast<ArrowId>(i);
    ArrowId ai = inverse_[i];
    if (ai < 0 || static_cast<std::size_t>(ai) >= n)
      throw InvariantViolation("inverse id out of range");
    if (inverse_[static_cast<std::size_t>(ai)] != a)
      throw InvariantViolation("inverse is not an involution");
    if (source(ai) != range(a) || range(ai) != source(a))
      throw InvariantViolation("inverse swaps source and range incorrectly");
    // unit laws
    if (compose(a, unit_arrows_[source(a)]) != a ||
        compose(unit_arrows_[range(a)], a) != a)
      throw InvariantViolation("unit law fails");
    // inverse laws
    if (compose(a, ai) != unit_arrows_[range(a)] ||
        compose(ai, a) != unit_arrows_[source(a)])
      throw InvariantViolation("inverse law fails");
  }

  // associativity over composable triples (a ∘ b) ∘ c = a ∘ (b ∘ c)
  std::size_t total_triples = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Arrow& b = arrows_[i];
    total_triples += source_fiber_[b.range].size() * range_fiber_[b.source].size();
  }
  const bool exhaustive = total_triples <= opts.exhaustive_triple_cap;
  const std::size_t stride =
      exhaustive ? 1 : std::max<std::size_t>(1, total_triples / opts.sample_count);
  std::size_t counter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ArrowId b = static_cast<ArrowId>(i);
    for (ArrowId a : source_fiber_[range(b)]) {
      for (ArrowId c : range_fiber_[source(b)]) {
        if (counter++ % stride != 0) continue;
        auto ab = compose(a, b);
        auto bc = compose(b, c);
        if (!ab || !bc || compose(*ab, c) != compose(a, *bc))
          throw InvariantViolation("associativity fails on a composable triple");
      }
    }
  }
}

void FiniteGroupoid::compute_word_lengths() {
  const std::size_t n = arrows_.size();
  lengths_.assign(n, -1);
  std::deque<ArrowId> queue;
  for (ArrowId u : unit_arrows_) {
    if (lengths_[static_cast<std::size_t>(u)] == -1) {
      lengths_[static_cast<std::size_t>(u)] = 0;
      queue.push_back(u);
    }
  }
  while (!queue.empty()) {
    ArrowId a = queue.front();
    queue.pop_front();
    int d = lengths_[static_cast<std::size_t>(a)];
    for (ArrowId k : generators_from_[range(a)]) {
      auto ka = compose(k, a);
      if (ka && lengths_[static_cast<std::size_t>(*ka)] == -1) {
        lengths_[static_cast<std::size_t>(*ka)] = d + 1;
        queue.push_back(*ka);
      }
    }
  }
  max_word_length_ = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (lengths_[i] == -1)
      throw SpecError(
          "generating set does not generate: arrow " + std::to_string(i) +
          " is not a product of generators");
    max_word_length_ = std::max(max_word_length_, lengths_[i]);
  }
}

int FiniteGroupoid::word_length(ArrowId a) const {
  return lengths_[static_cast<std::size_t>(a)];
}

std::vector<ArrowId> FiniteGroupoid::all_arrows() const {
  std::vector<ArrowId> ids(arrows_.size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

bool FiniteGroupoid::is_principal() const {
  for (std::size_t i = 0; i < arrows_.size(); ++i) {
    ArrowId a = static_cast<ArrowId>(i);
    if (source(a) == range(a) && !is_unit(a)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// transformation groupoids

namespace {

void validate_generator(const UnitSpace& space, const GeneratorMap& g) {
  const std::size_t points = space.point_count();
  if (g.image.size() != points)
    throw SpecError("generator \"" + g.name +
                    "\": image table does not cover the word space");
  std::vector<bool> seen(points, false);
  for (std::size_t w = 0; w < points; ++w) {
    std::int32_t t = g.image[w];
    if (t < 0) continue;
    if (static_cast<std::size_t>(t) >= points)
      throw SpecError("generator \"" + g.name + "\": target outside the space");
    if (seen[static_cast<std::size_t>(t)])
      throw SpecError("generator \"" + g.name + "\" is not injective");
    seen[static_cast<std::size_t>(t)] = true;
  }
}

FiniteGroupoid principal_from_pairs(
    const UnitSpace& space, const std::string& kind,
    const std::vector<std::vector<WordIndex>>& orbits,
    const std::set<std::pair<WordIndex, WordIndex>>& generator_pairs,
    const ValidationOptions& opts) {
  const std::size_t points = space.point_count();
  GroupoidData data{space, kind, {}, {}, {}, {}, nullptr};

  auto lookup = std::make_shared<std::unordered_map<std::uint64_t, ArrowId>>();
  std::size_t total = 0;
  for (const auto& orbit : orbits) total += orbit.size() * orbit.size();
  if (total > limits::max_arrows)
    throw ResourceError("orbit relation exceeds the configured arrow cap");

  data.unit_arrows.assign(points, -1);
  for (const auto& orbit : orbits) {
    for (WordIndex x : orbit) {
      for (WordIndex y : orbit) {
        ArrowId id = static_cast<ArrowId>(data.arrows.size());
        data.arrows.push_back({x, y, 0});
        (*lookup)[pair_key(x, y)] = id;
        if (x == y) data.unit_arrows[x] = id;
      }
    }
  }
  data.inverse.resize(data.arrows.size());
  for (std::size_t i = 0; i < data.arrows.size(); ++i)
    data.inverse[i] =
        lookup->at(pair_key(data.arrows[i].range, data.arrows[i].source));

  std::set<ArrowId> k_set;
  for (const auto& [x, y] : generator_pairs) {
    if (x == y) continue;
    k_set.insert(lookup->at(pair_key(x, y)));
    k_set.insert(lookup->at(pair_key(y, x)));
  }
  data.generators.assign(k_set.begin(), k_set.end());

  data.compose = [lookup](const FiniteGroupoid& gg, ArrowId a,
                          ArrowId b) -> std::optional<ArrowId> {
    auto it = lookup->find(pair_key(gg.source(b), gg.range(a)));
    if (it == lookup->end()) return std::nullopt;
    return it->second;
  };
  return FiniteGroupoid(std::move(data), opts);
}

}  // namespace

FiniteGroupoid from_transformation(const TransformationSpec& spec,
                                   const ValidationOptions& opts) {
  const UnitSpace& space = spec.space;
  const std::size_t points = space.point_count();
  for (const auto& g : spec.generators) validate_generator(space, g);

  if (spec.mode == TransformationMode::principal) {
    // orbit relation of the generated partial-transformation system
    std::vector<int> orbit_of(points, -1);
    std::vector<std::vector<WordIndex>> orbits;
    for (std::size_t start = 0; start < points; ++start) {
      if (orbit_of[start] != -1) continue;
      int oid = static_cast<int>(orbits.size());
      orbits.emplace_back();
      std::deque<WordIndex> queue{static_cast<WordIndex>(start)};
      orbit_of[start] = oid;
      while (!queue.empty()) {
        WordIndex x = queue.front();
        queue.pop_front();
        orbits.back().push_back(x);
        for (const auto& g : spec.generators) {
          std::int32_t y = g.image[x];
          if (y >= 0 && orbit_of[static_cast<std::size_t>(y)] == -1) {
            orbit_of[static_cast<std::size_t>(y)] = oid;
            queue.push_back(static_cast<WordIndex>(y));
          }
          // inverse direction
          for (std::size_t z = 0; z < points; ++z) {
            if (g.image[z] == static_cast<std::int32_t>(x) &&
                orbit_of[z] == -1) {
              orbit_of[z] = oid;
              queue.push_back(static_cast<WordIndex>(z));
            }
          }
        }
      }
      std::sort(orbits.back().begin(), orbits.back().end());
    }
    std::set<std::pair<WordIndex, WordIndex>> gen_pairs;
    for (const auto& g : spec.generators)
      for (std::size_t x = 0; x < points; ++x)
        if (g.image[x] >= 0)
          gen_pairs.emplace(static_cast<WordIndex>(x),
                            static_cast<WordIndex>(g.image[x]));
    return principal_from_pairs(space, "transformation-principal", orbits,
                                gen_pairs, opts);
  }

  // full mode: generators must be total permutations; the generated group is
  // the faithful image inside Sym(points)
  for (const auto& g : spec.generators)
    for (std::size_t w = 0; w < points; ++w)
      if (g.image[w] < 0)
        throw SpecError("generator \"" + g.name +
                        "\" is partial; full mode requires total permutations");

  using Perm = std::vector<std::int32_t>;
  auto state = std::make_shared<std::vector<Perm>>();
  std::map<Perm, std::int32_t> perm_ids;

  Perm identity(points);
  std::iota(identity.begin(), identity.end(), 0);
  state->push_back(identity);
  perm_ids[identity] = 0;

  std::vector<Perm> seeds;
  for (const auto& g : spec.generators) {
    Perm p(g.image.begin(), g.image.end());
    Perm pinv(points);
    for (std::size_t w = 0; w < points; ++w)
      pinv[static_cast<std::size_t>(p[w])] = static_cast<std::int32_t>(w);
    seeds.push_back(p);
    seeds.push_back(pinv);
  }

  std::deque<std::int32_t> queue{0};
  std::vector<std::int32_t> seed_element_ids;
  while (!queue.empty()) {
    std::int32_t e = queue.front();
    queue.pop_front();
    for (const auto& s : seeds) {
      Perm prod(points);
      const Perm& base = (*state)[static_cast<std::size_t>(e)];
      for (std::size_t w = 0; w < points; ++w)
        prod[w] = s[static_cast<std::size_t>(base[w])];
      auto [it, inserted] =
          perm_ids.emplace(prod, static_cast<std::int32_t>(state->size()));
      if (inserted) {
        state->push_back(std::move(prod));
        if (state->size() > limits::max_group_elements)
          throw ResourceError("generated group exceeds the element cap");
        queue.push_back(it->second);
      }
    }
  }
  const std::size_t n_elems = state->size();
  if (n_elems * points > limits::max_arrows)
    throw ResourceError("transformation groupoid exceeds the arrow cap");

  // element inverses and seed ids
  std::vector<std::int32_t> elem_inv(n_elems);
  for (std::size_t e = 0; e < n_elems; ++e) {
    Perm inv(points);
    for (std::size_t w = 0; w < points; ++w)
      inv[static_cast<std::size_t>((*state)[e][w])] =
          static_cast<std::int32_t>(w);
    elem_inv[e] = perm_ids.at(inv);
  }
  for (const auto& s : seeds) seed_element_ids.push_back(perm_ids.at(s));

  GroupoidData data{space, "transformation", {}, {}, {}, {}, nullptr};
  data.arrows.reserve(n_elems * points);
  for (std::size_t e = 0; e < n_elems; ++e)
    for (std::size_t x = 0; x < points; ++x)
      data.arrows.push_back({static_cast<WordIndex>(x),
                             static_cast<WordIndex>((*state)[e][x]),
                             static_cast<std::int64_t>(e)});
  auto arrow_id = [points](std::size_t elem, std::size_t x) {
    return static_cast<ArrowId>(elem * points + x);
  };
  data.unit_arrows.resize(points);
  for (std::size_t x = 0; x < points; ++x)
    data.unit_arrows[x] = arrow_id(0, x);
  data.inverse.resize(data.arrows.size());
  for (std::size_t e = 0; e < n_elems; ++e)
    for (std::size_t x = 0; x < points; ++x)
      data.inverse[static_cast<std::size_t>(arrow_id(e, x))] = arrow_id(
          static_cast<std::size_t>(elem_inv[e]),
          static_cast<std::size_t>((*state)[e][x]));

  std::set<ArrowId> k_set;
  for (std::int32_t e : seed_element_ids) {
    if (e == 0) continue;  // identity generators contribute nothing
    for (std::size_t x = 0; x < points; ++x)
      k_set.insert(arrow_id(static_cast<std::size_t>(e), x));
  }
  data.generators.assign(k_set.begin(), k_set.end());

  auto mult_memo =
      std::make_shared<std::unordered_map<std::uint64_t, std::int32_t>>();
  auto ids = std::make_shared<std::map<Perm, std::int32_t>>(std::move(perm_ids));
  data.compose = [state, mult_memo, ids, points](const FiniteGroupoid&,
                                                 ArrowId a, ArrowId b)
      -> std::optional<ArrowId> {
    std::size_t ea = static_cast<std::size_t>(a) / points;
    std::size_t eb = static_cast<std::size_t>(b) / points;
    std::size_t xb = static_cast<std::size_t>(b) % points;
    std::uint64_t key = pair_key(static_cast<std::uint32_t>(ea),
                                 static_cast<std::uint32_t>(eb));
    auto it = mult_memo->find(key);
    std::int32_t prod_id;
    if (it != mult_memo->end()) {
      prod_id = it->second;
    } else {
      Perm prod(points);
      for (std::size_t w = 0; w < points; ++w)
        prod[w] = (*state)[ea][static_cast<std::size_t>((*state)[eb][w])];
      prod_id = ids->at(prod);
      (*mult_memo)[key] = prod_id;
    }
    return static_cast<ArrowId>(static_cast<std::size_t>(prod_id) * points +
                                xb);
  };
  return FiniteGroupoid(std::move(data), opts);
}

TransformationSpec odometer_spec(int alphabet, int depth) {
  UnitSpace space(alphabet, depth);
  GeneratorMap g;
  g.name = "cycle";
  g.image.resize(space.point_count());
  for (std::size_t w = 0; w < space.point_count(); ++w)
    g.image[w] = static_cast<std::int32_t>((w + 1) % space.point_count());
  return TransformationSpec{space, TransformationMode::full, {g}};
}

// ---------------------------------------------------------------------------
// Bratteli / AF groupoids

namespace {

UnitSpace space_for_count(std::size_t count) {
  // smallest alphabet admitting an exact power; binary with padding otherwise
  for (int k = 2; k <= 36; ++k) {
    std::size_t p = static_cast<std::size_t>(k);
    for (int d = 1; d <= limits::max_depth && p <= limits::max_points;
         ++d, p *= static_cast<std::size_t>(k))
      if (p == count) return UnitSpace(k, d);
    if (static_cast<std::size_t>(k) >= count) break;
  }
  int d = 1;
  std::size_t p = 2;
  while (p < count) {
    p *= 2;
    ++d;
  }
  return UnitSpace(2, d);
}

}  // namespace

FiniteGroupoid from_bratteli(const BratteliSpec& spec,
                             const ValidationOptions& opts) {
  const int levels = static_cast<int>(spec.level_sizes.size());
  if (levels < 2) throw SpecError("Bratteli diagram needs at least two levels");
  if (spec.level_sizes[0] != 1)
    throw SpecError("Bratteli diagram must have a single root vertex");
  if (static_cast<int>(spec.multiplicity.size()) != levels - 1)
    throw SpecError("Bratteli diagram needs one multiplicity matrix per level");
  const int t = spec.truncation_depth;
  if (t < 1 || t > levels - 1)
    throw SpecError("truncation depth must lie between 1 and the level count");
  for (int l = 0; l < levels - 1; ++l) {
    const auto& m = spec.multiplicity[static_cast<std::size_t>(l)];
    if (static_cast<int>(m.size()) != spec.level_sizes[static_cast<std::size_t>(l)])
      throw SpecError("multiplicity matrix rows do not match the level size");
    for (const auto& row : m) {
      if (static_cast<int>(row.size()) !=
          spec.level_sizes[static_cast<std::size_t>(l + 1)])
        throw SpecError("multiplicity matrix columns do not match the level size");
      for (int e : row)
        if (e < 0) throw SpecError("edge multiplicities must be nonnegative");
    }
  }

  // paths of t edges from the root; an edge is (target vertex, copy index)
  struct Path {
    std::vector<std::pair<int, int>> edges;  // per level: (to, copy)
    int end_vertex = 0;
  };
  std::vector<Path> paths{{std::vector<std::pair<int, int>>{}, 0}};
  for (int l = 0; l < t; ++l) {
    std::vector<Path> next;
    std::vector<bool> reachable(
        static_cast<std::size_t>(spec.level_sizes[static_cast<std::size_t>(l)]),
        false);
    for (const Path& p : paths)
      reachable[static_cast<std::size_t>(p.end_vertex)] = true;
    for (std::size_t v = 0; v < reachable.size(); ++v) {
      if (!reachable[v]) continue;
      const auto& row = spec.multiplicity[static_cast<std::size_t>(l)][v];
      if (std::accumulate(row.begin(), row.end(), 0) == 0)
        throw SpecError("level " + std::to_string(l) +
                        " has a reachable vertex with no outgoing edges");
    }
    for (const Path& p : paths) {
      const auto& row =
          spec.multiplicity[static_cast<std::size_t>(l)]
                           [static_cast<std::size_t>(p.end_vertex)];
      for (int j = 0; j < static_cast<int>(row.size()); ++j) {
        for (int c = 0; c < row[static_cast<std::size_t>(j)]; ++c) {
          Path q = p;
          q.edges.emplace_back(j, c);
          q.end_vertex = j;
          next.push_back(std::move(q));
        }
      }
    }
    paths = std::move(next);
    if (paths.size() > limits::max_points)
      throw ResourceError("path space exceeds the configured point cap");
  }

  const std::size_t n_paths = paths.size();
  UnitSpace space = space_for_count(std::max<std::size_t>(n_paths, 2));
  const std::size_t points = space.point_count();

  GroupoidData data{space, "bratteli", {}, {}, {}, {}, nullptr};
  auto lookup = std::make_shared<std::unordered_map<std::uint64_t, ArrowId>>();
  data.unit_arrows.assign(points, -1);

  auto add_arrow = [&](WordIndex s, WordIndex r) {
    ArrowId id = static_cast<ArrowId>(data.arrows.size());
    data.arrows.push_back({s, r, 0});
    (*lookup)[pair_key(s, r)] = id;
    if (s == r) data.unit_arrows[s] = id;
    return id;
  };

  std::set<ArrowId> k_set;
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t q = 0; q < n_paths; ++q) {
      if (paths[p].end_vertex != paths[q].end_vertex) continue;
      ArrowId id = add_arrow(static_cast<WordIndex>(p),
                             static_cast<WordIndex>(q));
      int diff = 0;
      for (int l = 0; l < t; ++l)
        if (paths[p].edges[static_cast<std::size_t>(l)] !=
            paths[q].edges[static_cast<std::size_t>(l)])
          ++diff;
      if (diff == 1) k_set.insert(id);
    }
  }
  // padding words carry only their units
  for (std::size_t w = n_paths; w < points; ++w)
    add_arrow(static_cast<WordIndex>(w), static_cast<WordIndex>(w));

  data.inverse.resize(data.arrows.size());
  for (std::size_t i = 0; i < data.arrows.size(); ++i)
    data.inverse[i] =
        lookup->at(pair_key(data.arrows[i].range, data.arrows[i].source));
  data.generators.assign(k_set.begin(), k_set.end());

  data.compose = [lookup](const FiniteGroupoid& gg, ArrowId a,
                          ArrowId b) -> std::optional<ArrowId> {
    auto it = lookup->find(pair_key(gg.source(b), gg.range(a)));
    if (it == lookup->end()) return std::nullopt;
    return it->second;
  };
  return FiniteGroupoid(std::move(data), opts);
}

// ---------------------------------------------------------------------------
// direct constructions

FiniteGroupoid group_bundle(const UnitSpace& space, int cyclic_order,
                            const ValidationOptions& opts) {
  if (cyclic_order < 1) throw SpecError("cyclic order must be positive");
  const std::size_t points = space.point_count();
  const std::size_t k = static_cast<std::size_t>(cyclic_order);
  if (points * k > limits::max_arrows)
    throw ResourceError("group bundle exceeds the arrow cap");

  GroupoidData data{space, "bundle", {}, {}, {}, {}, nullptr};
  for (std::size_t x = 0; x < points; ++x)
    for (std::size_t g = 0; g < k; ++g)
      data.arrows.push_back({static_cast<WordIndex>(x),
                             static_cast<WordIndex>(x),
                             static_cast<std::int64_t>(g)});
  auto id_of = [k](std::size_t x, std::size_t g) {
    return static_cast<ArrowId>(x * k + g);
  };
  data.unit_arrows.resize(points);
  for (std::size_t x = 0; x < points; ++x) data.unit_arrows[x] = id_of(x, 0);
  data.inverse.resize(data.arrows.size());
  for (std::size_t x = 0; x < points; ++x)
    for (std::size_t g = 0; g < k; ++g)
      data.inverse[static_cast<std::size_t>(id_of(x, g))] =
          id_of(x, (k - g) % k);
  if (k >= 2) {
    for (std::size_t x = 0; x < points; ++x) {
      data.generators.push_back(id_of(x, 1));
      if (k > 2) data.generators.push_back(id_of(x, k - 1));
    }
  }
  data.compose = [k](const FiniteGroupoid&, ArrowId a,
                     ArrowId b) -> std::optional<ArrowId> {
    std::size_t xa = static_cast<std::size_t>(a) / k;
    std::size_t ga = static_cast<std::size_t>(a) % k;
    std::size_t xb = static_cast<std::size_t>(b) / k;
    std::size_t gb = static_cast<std::size_t>(b) % k;
    if (xa != xb) return std::nullopt;
    return static_cast<ArrowId>(xa * k + (ga + gb) % k);
  };
  return FiniteGroupoid(std::move(data), opts);
}

FiniteGroupoid pair_groupoid(const UnitSpace& space,
                             const ValidationOptions& opts) {
  const std::size_t points = space.point_count();
  std::vector<std::vector<WordIndex>> orbits(1);
  for (std::size_t w = 0; w < points; ++w)
    orbits[0].push_back(static_cast<WordIndex>(w));
  std::set<std::pair<WordIndex, WordIndex>> gen_pairs;
  for (std::size_t x = 0; x < points; ++x)
    for (std::size_t y = 0; y < points; ++y)
      if (x != y)
        gen_pairs.emplace(static_cast<WordIndex>(x), static_cast<WordIndex>(y));
  return principal_from_pairs(space, "pair", orbits, gen_pairs, opts);
}

// ---------------------------------------------------------------------------
// bisections

Bisection::Bisection(const FiniteGroupoid& g, std::vector<ArrowId> arrows)
    : g_(&g),
      arrows_(std::move(arrows)),
      source_image_(g.space()),
      range_image_(g.space()) {
  std::sort(arrows_.begin(), arrows_.end());
  arrows_.erase(std::unique(arrows_.begin(), arrows_.end()), arrows_.end());
  for (ArrowId a : arrows_) {
    if (a < 0 || static_cast<std::size_t>(a) >= g.arrow_count())
      throw SpecError("bisection refers to an arrow outside the groupoid");
    WordIndex s = g.source(a), r = g.range(a);
    if (source_image_.contains(s) || range_image_.contains(r))
      throw SpecError("bisection is malformed: source or range map not injective");
    source_image_.set(s);
    range_image_.set(r);
    by_source_[s] = a;
    by_range_[r] = a;
  }
}

std::optional<ArrowId> Bisection::arrow_with_source(WordIndex w) const {
  auto it = by_source_.find(w);
  if (it == by_source_.end()) return std::nullopt;
  return it->second;
}

std::optional<ArrowId> Bisection::arrow_with_range(WordIndex w) const {
  auto it = by_range_.find(w);
  if (it == by_range_.end()) return std::nullopt;
  return it->second;
}

WordIndex Bisection::theta(WordIndex x) const {
  auto a = arrow_with_source(x);
  if (!a)
    throw PreconditionError("theta: point " +
                            g_->space().word_to_string(x) +
                            " lies outside the bisection domain");
  return g_->range(*a);
}

WordIndex Bisection::theta_inverse(WordIndex y) const {
  auto a = arrow_with_range(y);
  if (!a)
    throw PreconditionError("theta_inverse: point " +
                            g_->space().word_to_string(y) +
                            " lies outside the bisection image");
  return g_->source(*a);
}

ClopenSet Bisection::push(const ClopenSet& s) const {
  require_same_space(s.space(), g_->space(), "Bisection::push");
  ClopenSet out(g_->space());
  for (ArrowId a : arrows_)
    if (s.contains(g_->source(a))) out.set(g_->range(a));
  return out;
}

ClopenSet Bisection::pull(const ClopenSet& t) const {
  require_same_space(t.space(), g_->space(), "Bisection::pull");
  ClopenSet out(g_->space());
  for (ArrowId a : arrows_)
    if (t.contains(g_->range(a))) out.set(g_->source(a));
  return out;
}

Bisection Bisection::restrict_source(const ClopenSet& s) const {
  std::vector<ArrowId> kept;
  for (ArrowId a : arrows_)
    if (s.contains(g_->source(a))) kept.push_back(a);
  return Bisection(*g_, std::move(kept));
}

std::vector<Bisection> decompose_into_bisections(const FiniteGroupoid& g,
                                                 std::span<const ArrowId> d) {
  std::vector<ArrowId> sorted(d.begin(), d.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::map<std::int64_t, std::vector<ArrowId>> by_label;
  for (ArrowId a : sorted) by_label[g.label(a)].push_back(a);

  std::vector<Bisection> out;
  for (auto& [label, group] : by_label) {
    // greedy first-fit split of label conflicts, in arrow-id order
    std::vector<std::vector<ArrowId>> slots;
    std::vector<ClopenSet> sources, ranges;
    for (ArrowId a : group) {
      WordIndex s = g.source(a), r = g.range(a);
      bool placed = false;
      for (std::size_t i = 0; i < slots.size() && !placed; ++i) {
        if (!sources[i].contains(s) && !ranges[i].contains(r)) {
          slots[i].push_back(a);
          sources[i].set(s);
          ranges[i].set(r);
          placed = true;
        }
      }
      if (!placed) {
        slots.emplace_back(std::vector<ArrowId>{a});
        sources.emplace_back(ClopenSet::empty(g.space()));
        ranges.emplace_back(ClopenSet::empty(g.space()));
        sources.back().set(s);
        ranges.back().set(r);
      }
    }
    for (auto& slot : slots) out.emplace_back(g, std::move(slot));
  }
  return out;
}

// ---------------------------------------------------------------------------
// isotropy and principal quotient

std::pair<FiniteGroupoid, FiniteGroupoid> isotropy_and_quotient(
    const FiniteGroupoid& g, const ValidationOptions& opts) {
  const UnitSpace& space = g.space();
  const std::size_t points = space.point_count();

  // isotropy bundle
  std::vector<ArrowId> iso_ids;
  std::vector<ArrowId> old_to_new(g.arrow_count(), -1);
  for (std::size_t i = 0; i < g.arrow_count(); ++i) {
    ArrowId a = static_cast<ArrowId>(i);
    if (g.source(a) == g.range(a)) {
      old_to_new[i] = static_cast<ArrowId>(iso_ids.size());
      iso_ids.push_back(a);
    }
  }
  GroupoidData iso{space, "isotropy", {}, {}, {}, {}, nullptr};
  iso.unit_arrows.assign(points, -1);
  for (std::size_t i = 0; i < iso_ids.size(); ++i) {
    ArrowId a = iso_ids[i];
    iso.arrows.push_back({g.source(a), g.range(a), g.label(a)});
    if (g.is_unit(a)) iso.unit_arrows[g.source(a)] = static_cast<ArrowId>(i);
    else iso.generators.push_back(static_cast<ArrowId>(i));
  }
  iso.inverse.resize(iso_ids.size());
  for (std::size_t i = 0; i < iso_ids.size(); ++i)
    iso.inverse[i] = old_to_new[static_cast<std::size_t>(g.inverse(iso_ids[i]))];
  auto iso_ids_ptr = std::make_shared<std::vector<ArrowId>>(iso_ids);
  auto map_ptr = std::make_shared<std::vector<ArrowId>>(old_to_new);
  const FiniteGroupoid* parent = &g;
  iso.compose = [iso_ids_ptr, map_ptr, parent](const FiniteGroupoid&,
                                               ArrowId a, ArrowId b)
      -> std::optional<ArrowId> {
    auto c = parent->compose((*iso_ids_ptr)[static_cast<std::size_t>(a)],
                             (*iso_ids_ptr)[static_cast<std::size_t>(b)]);
    if (!c) return std::nullopt;
    ArrowId mapped = (*map_ptr)[static_cast<std::size_t>(*c)];
    if (mapped < 0) return std::nullopt;
    return mapped;
  };
  FiniteGroupoid iso_g(std::move(iso), opts);

  // principal quotient: arrows are the realized (source, range) pairs
  std::vector<std::vector<WordIndex>> orbits;
  {
    std::vector<int> orbit_of(points, -1);
    for (std::size_t start = 0; start < points; ++start) {
      if (orbit_of[start] != -1) continue;
      int oid = static_cast<int>(orbits.size());
      orbits.emplace_back();
      std::deque<WordIndex> queue{static_cast<WordIndex>(start)};
      orbit_of[start] = oid;
      while (!queue.empty()) {
        WordIndex x = queue.front();
        queue.pop_front();
        orbits.back().push_back(x);
        for (ArrowId a : g.source_fiber(x)) {
          WordIndex y = g.range(a);
          if (orbit_of[y] == -1) {
            orbit_of[y] = oid;
            queue.push_back(y);
          }
        }
      }
      std::sort(orbits.back().begin(), orbits.back().end());
    }
  }
  std::set<std::pair<WordIndex, WordIndex>> gen_pairs;
  for (ArrowId k : g.generators())
    gen_pairs.emplace(g.source(k), g.range(k));
  FiniteGroupoid quot =
      principal_from_pairs(space, "quotient", orbits, gen_pairs, opts);

  // strong surjectivity of the quotient map on range fibers
  for (std::size_t x = 0; x < points; ++x) {
    std::set<WordIndex> image;
    for (ArrowId a : g.range_fiber(static_cast<WordIndex>(x)))
      image.insert(g.source(a));
    std::set<WordIndex> fiber;
    for (ArrowId a : quot.range_fiber(static_cast<WordIndex>(x)))
      fiber.insert(quot.source(a));
    if (image != fiber)
      throw InvariantViolation(
          "quotient map is not strongly surjective on a range fiber");
  }
  return {std::move(iso_g), std::move(quot)};
}

}  // namespace ample
