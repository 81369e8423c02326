#include "ample/comparison.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ample {

std::size_t SubequivalenceWitness::piece_count() const {
  std::size_t n = 0;
  for (const auto& fam : families) n += fam.size();
  return n;
}

VerifyReport verify_witness(const FiniteGroupoid& g, const ClopenSet& a,
                            const ClopenSet& b,
                            const SubequivalenceWitness& w) {
  require_same_space(g.space(), a.space(), "verify_witness");
  require_same_space(g.space(), b.space(), "verify_witness");

  ClopenSet covered(g.space());
  for (std::size_t fi = 0; fi < w.families.size(); ++fi) {
    ClopenSet family_ranges(g.space());
    for (std::size_t pi = 0; pi < w.families[fi].size(); ++pi) {
      const Bisection& v = w.families[fi][pi];
      // recompute the images from the raw arrow list
      ClopenSet sources(g.space()), ranges(g.space());
      for (ArrowId arr : v.arrows()) {
        if (arr < 0 || static_cast<std::size_t>(arr) >= g.arrow_count())
          return {false, "family " + std::to_string(fi) +
                             ": arrow id outside the groupoid"};
        WordIndex s = g.source(arr), r = g.range(arr);
        if (sources.contains(s) || ranges.contains(r))
          return {false, "family " + std::to_string(fi) + " piece " +
                             std::to_string(pi) +
                             ": source or range map not injective"};
        sources.set(s);
        ranges.set(r);
      }
      if (!ranges.subset_of(b))
        return {false, "family " + std::to_string(fi) + " piece " +
                           std::to_string(pi) + ": range escapes B"};
      if (!ranges.set_intersection(family_ranges).is_empty())
        return {false, "family " + std::to_string(fi) +
                           ": overlapping range images"};
      family_ranges = family_ranges.set_union(ranges);
      covered = covered.set_union(sources);
    }
  }
  if (!a.subset_of(covered))
    return {false, "source images do not cover A"};
  return {true, "ok"};
}

namespace {

struct FiberedD {
  std::vector<ArrowId> d_sorted;
  std::vector<std::vector<ArrowId>> dx;       // per unit: D ∩ s^{-1}(x)
  std::vector<std::vector<ArrowId>> dinv_dx;  // per unit: D^{-1}D ∩ s^{-1}(x)
};

FiberedD fiber_d(const FiniteGroupoid& g, std::span<const ArrowId> d) {
  FiberedD out;
  out.d_sorted.assign(d.begin(), d.end());
  std::sort(out.d_sorted.begin(), out.d_sorted.end());
  out.d_sorted.erase(std::unique(out.d_sorted.begin(), out.d_sorted.end()),
                     out.d_sorted.end());
  const std::size_t points = g.space().point_count();
  out.dx.assign(points, {});
  std::vector<std::vector<ArrowId>> d_by_range(points);
  for (ArrowId arr : out.d_sorted) {
    if (arr < 0 || static_cast<std::size_t>(arr) >= g.arrow_count())
      throw PreconditionError("D refers to an arrow outside the groupoid");
    out.dx[g.source(arr)].push_back(arr);
    d_by_range[g.range(arr)].push_back(arr);
  }
  out.dinv_dx.assign(points, {});
  for (std::size_t x = 0; x < points; ++x) {
    std::set<ArrowId> prods;
    for (ArrowId mu : out.dx[x]) {
      for (ArrowId delta : d_by_range[g.range(mu)]) {
        auto p = g.compose(g.inverse(delta), mu);
        if (p) prods.insert(*p);
      }
    }
    out.dinv_dx[x].assign(prods.begin(), prods.end());
  }
  return out;
}

long long count_ranges_in(const FiniteGroupoid& g,
                          const std::vector<ArrowId>& arrows,
                          const ClopenSet& set) {
  long long c = 0;
  for (ArrowId a : arrows)
    if (set.contains(g.range(a))) ++c;
  return c;
}

HypothesisReport evaluate_inequality(const FiniteGroupoid& g,
                                     const FiberedD& fd,
                                     const ClopenSet& fattened_a,
                                     const std::vector<ClopenSet>& shrunk_b) {
  HypothesisReport rep;
  rep.pass = true;
  bool first = true;
  const std::size_t points = g.space().point_count();
  for (std::size_t x = 0; x < points; ++x) {
    long long lhs = count_ranges_in(g, fd.dinv_dx[x], fattened_a);
    long long rhs = 0;
    for (const ClopenSet& sb : shrunk_b) rhs += count_ranges_in(g, fd.dx[x], sb);
    long long margin = rhs - lhs;
    if (first || margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.worst_x = static_cast<WordIndex>(x);
      first = false;
    }
  }
  rep.pass = !first && rep.min_margin >= 1;
  return rep;
}

// smallest dyadic-or-above value covering 3 eps' and 2 eps'
DyadicRadius ceil_3eps(int j) {
  return j >= 2 ? DyadicRadius::dyadic(j - 2) : DyadicRadius::one_plus();
}
DyadicRadius ceil_2eps(int j) {
  return j >= 1 ? DyadicRadius::dyadic(j - 1) : DyadicRadius::one_plus();
}

}  // namespace

HypothesisReport check_hypothesis(const FiniteGroupoid& g, const ClopenSet& a,
                                  const ClopenSet& b,
                                  std::span<const ArrowId> d, long long m,
                                  DyadicRadius eps) {
  require_same_space(g.space(), a.space(), "check_hypothesis");
  require_same_space(g.space(), b.space(), "check_hypothesis");
  FiberedD fd = fiber_d(g, d);
  ClopenSet fa = fatten(a, eps);
  std::vector<ClopenSet> sb(static_cast<std::size_t>(std::max<long long>(m, 0)),
                            shrink(b, eps));
  return evaluate_inequality(g, fd, fa, sb);
}

DyadicRadius choose_epsilon(const Bisection& v, const ClopenSet& a_n,
                            const ClopenSet& b_nk, DyadicRadius eps_n) {
  if (!eps_n.positive())
    throw PreconditionError("choose_epsilon needs a positive current radius");
  const UnitSpace& space = a_n.space();
  const int depth = space.depth();
  int j_start = eps_n.kind == DyadicRadius::Kind::pow ? eps_n.exponent + 1 : 0;
  const ClopenSet not_b = b_nk.complement();

  // below the resolution floor every fattening is the identity, so the
  // search space never runs dry however far the radii have descended
  const int j_stop = std::max(depth + 2, j_start);
  for (int j = j_start; j <= j_stop; ++j) {
    DyadicRadius eps_next = DyadicRadius::dyadic(j);
    // coarseness of the bisection images at scale 2 eps'
    if (fatten(v.source_image(), ceil_2eps(j)) != v.source_image()) continue;
    if (fatten(v.range_image(), ceil_2eps(j)) != v.range_image()) continue;
    // theta_V^{-1}((theta_V(A_n))^{3 eps'}) ⊆ A_n^{eps_n}
    ClopenSet lhs2 = v.pull(fatten(v.push(a_n), ceil_3eps(j)));
    if (!lhs2.subset_of(fatten(a_n, eps_n))) continue;
    // theta_V((theta_V^{-1}(X \ B))^{2 eps'}) ⊆ (X \ B)^{eps_n}
    ClopenSet lhs3 = v.push(fatten(v.pull(not_b), ceil_2eps(j)));
    if (!lhs3.subset_of(fatten(not_b, eps_n))) continue;
    return eps_next;
  }
  throw InvariantViolation(
      "choose_epsilon found no admissible radius above the resolution floor");
}

namespace {

std::string dump_state(const FiniteGroupoid& g, int step, int v_index,
                       int family, const ClopenSet& a_n,
                       const std::vector<ClopenSet>& b_n, DyadicRadius eps_n,
                       const std::string& what) {
  std::ostringstream os;
  os << what << " [step " << step << ", bisection " << v_index << ", family "
     << family + 1 << ", eps " << eps_n.str() << ", |A_n| = "
     << a_n.cardinality() << ", |B_n,k| =";
  for (const ClopenSet& bk : b_n) os << ' ' << bk.cardinality();
  os << ", units = " << g.space().point_count() << "]";
  return os.str();
}

}  // namespace

SubequivalenceWitness run_m_comparison(const FiniteGroupoid& g,
                                       const ClopenSet& a, const ClopenSet& b,
                                       std::span<const ArrowId> d, long long m,
                                       DyadicRadius eps) {
  require_same_space(g.space(), a.space(), "run_m_comparison");
  require_same_space(g.space(), b.space(), "run_m_comparison");

  SubequivalenceWitness witness{a, b, static_cast<int>(m), {}, {}};
  if (a.is_empty()) {
    witness.families.assign(static_cast<std::size_t>(std::max<long long>(m, 0)),
                            {});
    return witness;
  }
  if (m < 1)
    throw PreconditionError("run_m_comparison needs m >= 1 for nonempty A");

  FiberedD fd = fiber_d(g, d);
  {
    std::vector<ClopenSet> sb(static_cast<std::size_t>(m), shrink(b, eps));
    auto rep = evaluate_inequality(g, fd, fatten(a, eps), sb);
    if (!rep.pass)
      throw PreconditionError(
          "hypothesis fails at unit " +
          g.space().word_to_string(rep.worst_x) +
          " (margin " + std::to_string(rep.min_margin) +
          "); run auto_compare to search for parameters");
  }

  std::vector<Bisection> pieces = decompose_into_bisections(g, d);
  const std::size_t m_d = pieces.size();
  const long long total_steps = m * static_cast<long long>(m_d);
  if (total_steps > 200'000)
    throw ResourceError("m * M_D exceeds the step cap");

  witness.families.assign(static_cast<std::size_t>(m), {});
  ClopenSet a_n = a;
  std::vector<ClopenSet> b_n(static_cast<std::size_t>(m), b);
  DyadicRadius eps_n = eps;
  const std::size_t points = g.space().point_count();

  int step = 0;
  for (std::size_t vi = 0; vi < m_d; ++vi) {
    const Bisection& v = pieces[vi];
    for (long long k0 = 0; k0 < m; ++k0) {
      ++step;
      const std::size_t k = static_cast<std::size_t>(k0);
      DyadicRadius eps_next = choose_epsilon(v, a_n, b_n[k], eps_n);

      ClopenSet pushed = v.push(a_n);
      ClopenSet target = b_n[k].set_intersection(fatten(pushed, eps_next));
      ClopenSet u_n = v.pull(target);
      ClopenSet theta_u = v.push(u_n);

      ClopenSet a_next = a_n.set_difference(u_n);
      ClopenSet b_next = b_n[k].set_difference(theta_u);

      // the counting injection (†), asserted pointwise
      ClopenSet shrunk_old = shrink(b_n[k], eps_n);
      ClopenSet shrunk_new = shrink(b_next, eps_next);
      ClopenSet fat_old = fatten(a_n, eps_n);
      ClopenSet fat_new = fatten(a_next, eps_next);
      for (std::size_t x = 0; x < points; ++x) {
        std::set<ArrowId> images;
        for (ArrowId mu : fd.dx[x]) {
          WordIndex r_mu = g.range(mu);
          if (!shrunk_old.contains(r_mu) || shrunk_new.contains(r_mu))
            continue;
          auto gamma_v = v.arrow_with_range(r_mu);
          if (!gamma_v)
            throw InvariantViolation(dump_state(
                g, step, static_cast<int>(vi), static_cast<int>(k0), a_n, b_n,
                eps_n, "injection target leaves the bisection image"));
          auto moved = g.compose(g.inverse(*gamma_v), mu);
          if (!moved || !images.insert(*moved).second)
            throw InvariantViolation(dump_state(
                g, step, static_cast<int>(vi), static_cast<int>(k0), a_n, b_n,
                eps_n, "injection is not injective"));
          WordIndex r_moved = g.range(*moved);
          if (!fat_old.contains(r_moved) || fat_new.contains(r_moved))
            throw InvariantViolation(dump_state(
                g, step, static_cast<int>(vi), static_cast<int>(k0), a_n, b_n,
                eps_n, "injection misses its target set"));
          if (!std::binary_search(fd.dinv_dx[x].begin(), fd.dinv_dx[x].end(),
                                  *moved))
            throw InvariantViolation(dump_state(
                g, step, static_cast<int>(vi), static_cast<int>(k0), a_n, b_n,
                eps_n, "injection leaves D^{-1}Dx"));
        }
      }

      witness.log.push_back({step, static_cast<int>(vi),
                             static_cast<int>(k0) + 1, eps_next,
                             static_cast<std::int64_t>(u_n.cardinality())});
      if (!u_n.is_empty())
        witness.families[k].push_back(v.restrict_source(u_n));

      a_n = std::move(a_next);
      b_n[k] = std::move(b_next);
      eps_n = eps_next;

      // the step inequality must survive the update, at every unit
      std::vector<ClopenSet> sb;
      sb.reserve(static_cast<std::size_t>(m));
      for (const ClopenSet& bk : b_n) sb.push_back(shrink(bk, eps_n));
      auto rep = evaluate_inequality(g, fd, fatten(a_n, eps_n), sb);
      if (!rep.pass)
        throw InvariantViolation(dump_state(
            g, step, static_cast<int>(vi), static_cast<int>(k0), a_n, b_n,
            eps_n,
            "step inequality fails at unit " +
                g.space().word_to_string(rep.worst_x)));
    }
  }

  if (!a_n.is_empty())
    throw InvariantViolation(
        "A was not exhausted after m * M_D steps; " +
        std::to_string(a_n.cardinality()) + " points remain");
  return witness;
}

AutoCompareResult auto_compare(const FiniteGroupoid& g, const ClopenSet& a,
                               const ClopenSet& b, int n_max, int start_n) {
  require_same_space(g.space(), a.space(), "auto_compare");
  require_same_space(g.space(), b.space(), "auto_compare");

  // A ⊆ r(GB)
  ClopenSet reachable(g.space());
  for (std::size_t i = 0; i < g.arrow_count(); ++i) {
    ArrowId arr = static_cast<ArrowId>(i);
    if (b.contains(g.source(arr))) reachable.set(g.range(arr));
  }
  if (!a.subset_of(reachable))
    throw PreconditionError("A is not contained in r(GB)");

  GrowthProfile profile = growth_function(g, n_max);
  const int depth = g.space().depth();

  int n = start_n;
  while (2 * n <= n_max) {
    MParameter param;
    try {
      param = m_parameter(g, profile, n);
    } catch (const SearchExhausted&) {
      break;
    }
    std::vector<ArrowId> d;
    for (std::size_t i = 0; i < g.arrow_count(); ++i)
      if (g.word_length(static_cast<ArrowId>(i)) <= param.doubling_scale)
        d.push_back(static_cast<ArrowId>(i));
    for (int j = 0; j <= depth + 1; ++j) {
      DyadicRadius eps = DyadicRadius::dyadic(j);
      if (check_hypothesis(g, a, b, d, param.m, eps).pass) {
        AutoCompareResult out{run_m_comparison(g, a, b, d, param.m, eps),
                              param.doubling_scale, param.m, eps};
        return out;
      }
    }
    n = param.doubling_scale + 1;
  }
  throw PreconditionError(
      "auto_compare found no (M, m, eps) satisfying the hypothesis within "
      "n_max; the measure gap may be absent");
}

ExhaustionResult run_exhaustion_comparison(const FiniteGroupoid& g,
                                           const ClopenSet& a,
                                           const ClopenSet& b,
                                           std::span<const Bisection> cover,
                                           long long m,
                                           std::span<const ArrowId> fallback_d,
                                           DyadicRadius eps) {
  require_same_space(g.space(), a.space(), "run_exhaustion_comparison");
  require_same_space(g.space(), b.space(), "run_exhaustion_comparison");

  auto orbits = unit_orbits(g);
  if (orbits.size() != 1)
    throw PreconditionError(
        "exhaustion needs a minimal groupoid (single orbit on the finite "
        "model); found " +
        std::to_string(orbits.size()) + " orbits");
  std::vector<PointMeasure> vertices = invariant_vertex_measures(g);
  for (const PointMeasure& mu : vertices)
    if (!(mu.of(a) < mu.of(b)))
      throw PreconditionError(
          "measure gap absent: some invariant measure has mu(A) >= mu(B)");

  ExhaustionResult result{
      SubequivalenceWitness{a, b, static_cast<int>(m), {{}}, {}}, 0, 0, false};
  if (a.is_empty()) return result;

  // reserve stage: arrows from the smallest unit into B, distinct ranges,
  // carved out of B while every vertex measure keeps the gap positive
  const WordIndex base = 0;
  std::vector<ArrowId> reserve;
  ClopenSet reserved_ranges(g.space());
  ClopenSet b_working = b;
  {
    std::vector<ArrowId> candidates(g.source_fiber_by_length(base).begin(),
                                    g.source_fiber_by_length(base).end());
    while (static_cast<long long>(reserve.size()) < m + 1) {
      // proper clopen O ⊂ B avoiding prior ranges: try the two word-order
      // halves of B, then the plain difference
      std::vector<ClopenSet> pools;
      if (reserve.empty()) {
        pools.push_back(b);
      } else {
        auto b_words = b.words();
        std::size_t half = (b_words.size() + 1) / 2;
        ClopenSet first(g.space()), second(g.space());
        for (std::size_t i = 0; i < b_words.size(); ++i)
          (i < half ? first : second).set(b_words[i]);
        if (first.set_intersection(reserved_ranges).is_empty() &&
            !first.is_empty())
          pools.push_back(first);
        else if (second.set_intersection(reserved_ranges).is_empty() &&
                 !second.is_empty())
          pools.push_back(second);
        else
          pools.push_back(b.set_difference(reserved_ranges));
      }
      ArrowId chosen = -1;
      for (int avoid_a = 1; avoid_a >= 0 && chosen < 0; --avoid_a) {
        for (ArrowId arr : candidates) {
          WordIndex r = g.range(arr);
          if (!pools[0].contains(r) || reserved_ranges.contains(r)) continue;
          if (avoid_a && a.contains(r)) continue;
          chosen = arr;
          break;
        }
      }
      if (chosen < 0) break;
      ClopenSet new_ranges = reserved_ranges;
      new_ranges.set(g.range(chosen));
      ClopenSet b1 = b.set_difference(new_ranges);
      bool gap_ok = true;
      for (const PointMeasure& mu : vertices)
        if (!(mu.of(a) < mu.of(b1))) gap_ok = false;
      if (!gap_ok) break;
      reserve.push_back(chosen);
      reserved_ranges = new_ranges;
      b_working = b1;
    }
  }
  result.reserve_count = reserve.size();

  // absorption loop over the cover, cycled until a full pass changes nothing
  ClopenSet a_n = a;
  ClopenSet b_n = b_working;
  std::vector<Bisection>& family = result.witness.families[0];
  int step = 0;
  bool changed = true;
  while (!a_n.is_empty() && changed) {
    changed = false;
    for (std::size_t vi = 0; vi < cover.size() && !a_n.is_empty(); ++vi) {
      const Bisection& v = cover[vi];
      ClopenSet u_n = v.pull(b_n.set_intersection(v.push(a_n)));
      if (u_n.is_empty()) continue;
      ClopenSet theta_u = v.push(u_n);
      ClopenSet a_next = a_n.set_difference(u_n);
      ClopenSet b_next = b_n.set_difference(theta_u);
      // the invariant-measure gap is preserved exactly at every step
      for (const PointMeasure& mu : vertices)
        if (mu.of(b_next) - mu.of(a_next) != mu.of(b_n) - mu.of(a_n))
          throw InvariantViolation(
              "exhaustion loop does not preserve the measure gap");
      ++step;
      family.push_back(v.restrict_source(u_n));
      result.witness.log.push_back(
          {step, static_cast<int>(vi), 1, DyadicRadius::zero(),
           static_cast<std::int64_t>(u_n.cardinality())});
      a_n = std::move(a_next);
      b_n = std::move(b_next);
      changed = true;
    }
  }
  result.loop_steps = step;

  if (!a_n.is_empty()) {
    if (reserve.empty())
      throw PreconditionError(
          "absorption loop stalled and no reserve arrows were available");
    // density threshold against the reserve source
    ClopenSet u_set = ClopenSet::singleton(g.space(), base);
    Rational upper = banach_upper_density(g, a_n, g.max_word_length());
    Rational inf_u(1);
    for (const PointMeasure& mu : vertices)
      inf_u = std::min(inf_u, mu.of(u_set));
    if (upper > inf_u)
      throw PreconditionError(
          "upper density of the remainder exceeds inf mu(U); cover too weak");

    result.fallback_used = true;
    // the dispatched run certifies the remainder against the singleton
    // reserve source, which only survives shrinking at the resolution floor
    DyadicRadius dispatch_eps = eps;
    if (eps.kind != DyadicRadius::Kind::pow ||
        eps.exponent < g.space().depth() + 1)
      dispatch_eps = DyadicRadius::dyadic(g.space().depth() + 1);
    SubequivalenceWitness inner = run_m_comparison(
        g, a_n, u_set, fallback_d,
        static_cast<long long>(reserve.size()), dispatch_eps);
    for (std::size_t fi = 0; fi < inner.families.size(); ++fi) {
      for (const Bisection& piece : inner.families[fi]) {
        std::vector<ArrowId> composite;
        for (ArrowId arr : piece.arrows()) {
          auto prod = g.compose(reserve[fi], arr);
          if (!prod)
            throw InvariantViolation(
                "reserve composition failed on a witness piece");
          composite.push_back(*prod);
        }
        if (!composite.empty()) family.emplace_back(g, std::move(composite));
      }
    }
  }
  return result;
}

}  // namespace ample
