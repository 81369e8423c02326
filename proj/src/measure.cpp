#include "ample/measure.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace ample {

Rational PointMeasure::mass() const {
  Rational m(0);
  for (const Rational& w : weights) m += w;
  return m;
}

bool PointMeasure::is_probability() const {
  for (const Rational& w : weights)
    if (w < 0) return false;
  return mass() == 1;
}

Rational PointMeasure::of(const ClopenSet& a) const {
  require_same_space(space, a.space(), "PointMeasure::of");
  Rational m(0);
  for (std::size_t w = 0; w < weights.size(); ++w)
    if (a.contains(static_cast<WordIndex>(w))) m += weights[w];
  return m;
}

std::vector<std::vector<WordIndex>> unit_orbits(const FiniteGroupoid& g) {
  const std::size_t points = g.space().point_count();
  std::vector<int> orbit_of(points, -1);
  std::vector<std::vector<WordIndex>> orbits;
  for (std::size_t start = 0; start < points; ++start) {
    if (orbit_of[start] != -1) continue;
    orbits.emplace_back();
    std::deque<WordIndex> queue{static_cast<WordIndex>(start)};
    orbit_of[start] = static_cast<int>(orbits.size()) - 1;
    while (!queue.empty()) {
      WordIndex x = queue.front();
      queue.pop_front();
      orbits.back().push_back(x);
      for (ArrowId a : g.source_fiber(x)) {
        WordIndex y = g.range(a);
        if (orbit_of[y] == -1) {
          orbit_of[y] = orbit_of[x];
          queue.push_back(y);
        }
      }
    }
    std::sort(orbits.back().begin(), orbits.back().end());
  }
  return orbits;
}

std::vector<PointMeasure> invariant_vertex_measures(const FiniteGroupoid& g) {
  std::vector<PointMeasure> out;
  for (const auto& orbit : unit_orbits(g)) {
    PointMeasure mu(g.space());
    Rational w(1, static_cast<long long>(orbit.size()));
    for (WordIndex x : orbit) mu.weights[x] = w;
    out.push_back(std::move(mu));
  }
  return out;
}

namespace {

// max over sub-bisections of V of |mu(s(U)) - mu(r(U))|, via the signed sums
// of the per-arrow defects
Rational sub_bisection_defect(const FiniteGroupoid& g, const Bisection& v,
                              const std::vector<Rational>& weight) {
  Rational pos(0), neg(0);
  for (ArrowId k : v.arrows()) {
    Rational d = weight[g.range(k)] - weight[g.source(k)];
    if (d > 0) pos += d;
    if (d < 0) neg -= d;
  }
  return std::max(pos, neg);
}

}  // namespace

Rational invariance_defect(const FiniteGroupoid& g, const PointMeasure& mu) {
  require_same_space(g.space(), mu.space, "invariance_defect");
  if (!mu.is_probability())
    throw SpecError("invariance defect expects a probability measure");
  std::vector<ArrowId> gens(g.generators().begin(), g.generators().end());
  Rational defect(0);
  for (const Bisection& v : decompose_into_bisections(g, gens))
    defect = std::max(defect, sub_bisection_defect(g, v, mu.weights));
  return defect;
}

PointMeasure empirical_measure(const FiniteGroupoid& g, WordIndex x, int n) {
  auto ball = ball_source(g, x, n);
  PointMeasure nu(g.space());
  Rational share(1, static_cast<long long>(ball.size()));
  for (ArrowId a : ball) nu.weights[g.range(a)] += share;
  return nu;
}

EmpiricalBound empirical_invariance_bound(const FiniteGroupoid& g, WordIndex x,
                                          int n) {
  auto ball = ball_source(g, x, n);
  const Rational size(static_cast<long long>(ball.size()));
  PointMeasure nu = empirical_measure(g, x, n);

  std::vector<ArrowId> gens(g.generators().begin(), g.generators().end());
  EmpiricalBound out{Rational(0), Rational(0)};
  std::set<ArrowId> ball_set(ball.begin(), ball.end());
  for (const Bisection& v : decompose_into_bisections(g, gens)) {
    Rational defect = sub_bisection_defect(g, v, nu.weights);
    auto translated = left_translate_ball(g, v.arrows(), ball);
    std::size_t sym_diff = 0;
    for (ArrowId a : translated)
      if (!ball_set.count(a)) ++sym_diff;
    std::set<ArrowId> translated_set(translated.begin(), translated.end());
    for (ArrowId a : ball)
      if (!translated_set.count(a)) ++sym_diff;
    Rational bound = Rational(static_cast<long long>(sym_diff)) / size;
    if (defect > bound)
      throw InvariantViolation(
          "empirical defect exceeds its symmetric-difference bound");
    out.defect = std::max(out.defect, defect);
    out.bound = std::max(out.bound, bound);
  }
  return out;
}

Rational banach_upper_density(const FiniteGroupoid& g, const ClopenSet& a,
                              int n) {
  require_same_space(g.space(), a.space(), "banach_upper_density");
  const std::size_t points = g.space().point_count();
  Rational sup(0);
  for (std::size_t x = 0; x < points; ++x) {
    auto ball = ball_source(g, static_cast<WordIndex>(x), n);
    long long hits = 0;
    for (ArrowId arr : ball)
      if (a.contains(g.range(arr))) ++hits;
    Rational ratio(hits, static_cast<long long>(ball.size()));
    if (ratio > sup) sup = ratio;
  }
  return sup;
}

Rational banach_lower_density(const FiniteGroupoid& g, const ClopenSet& a,
                              int n) {
  require_same_space(g.space(), a.space(), "banach_lower_density");
  const std::size_t points = g.space().point_count();
  Rational inf(1);
  for (std::size_t x = 0; x < points; ++x) {
    auto ball = ball_source(g, static_cast<WordIndex>(x), n);
    long long hits = 0;
    for (ArrowId arr : ball)
      if (a.contains(g.range(arr))) ++hits;
    Rational ratio(hits, static_cast<long long>(ball.size()));
    if (ratio < inf) inf = ratio;
  }
  return inf;
}

Rational translation_defect_ratio(const FiniteGroupoid& g, int n) {
  const std::size_t points = g.space().point_count();
  Rational sup(0);
  for (std::size_t x = 0; x < points; ++x) {
    auto ball = ball_source(g, static_cast<WordIndex>(x), n);
    auto translated = left_translate_ball(g, g.generators(), ball);
    std::set<ArrowId> ball_set(ball.begin(), ball.end());
    std::set<ArrowId> trans_set(translated.begin(), translated.end());
    std::size_t sym_diff = 0;
    for (ArrowId a : trans_set)
      if (!ball_set.count(a)) ++sym_diff;
    for (ArrowId a : ball_set)
      if (!trans_set.count(a)) ++sym_diff;
    Rational ratio(static_cast<long long>(sym_diff),
                   static_cast<long long>(ball.size()));
    if (ratio > sup) sup = ratio;
  }
  return sup;
}

CertificateReport verify_density_certificate(const FiniteGroupoid& g,
                                             const DensitySequence& seq,
                                             std::span<const ArrowId> k_test,
                                             const Rational& eps) {
  if (seq.levels.empty())
    throw SpecError("density sequence is empty");
  const auto& [n, values] = *seq.levels.rbegin();
  if (values.size() != g.arrow_count())
    throw SpecError("density values do not cover the arrow set");
  for (const Rational& v : values)
    if (v < 0) throw SpecError("density values must be nonnegative");

  CertificateReport rep;
  rep.n = n;
  rep.fiber_sums_bounded = true;
  rep.deficit = Rational(0);
  const std::size_t points = g.space().point_count();
  for (std::size_t x = 0; x < points; ++x) {
    Rational sum(0);
    for (ArrowId a : g.range_fiber(static_cast<WordIndex>(x)))
      sum += values[static_cast<std::size_t>(a)];
    if (sum > 1) rep.fiber_sums_bounded = false;
    rep.deficit = std::max(rep.deficit, Rational(1) - sum);
  }

  rep.displacement = Rational(0);
  for (ArrowId mu : k_test) {
    Rational sum(0);
    ArrowId mu_inv = g.inverse(mu);
    for (ArrowId gamma : g.range_fiber(g.range(mu))) {
      auto moved = g.compose(mu_inv, gamma);
      Rational translated =
          moved ? values[static_cast<std::size_t>(*moved)] : Rational(0);
      Rational d = translated - values[static_cast<std::size_t>(gamma)];
      sum += d < 0 ? -d : d;
    }
    rep.displacement = std::max(rep.displacement, sum);
  }

  rep.pass = rep.fiber_sums_bounded && rep.deficit < eps &&
             rep.displacement < eps;
  return rep;
}

DensitySequence fiber_normalized_ball_densities(const FiniteGroupoid& g,
                                                const std::vector<int>& ns) {
  DensitySequence seq;
  const std::size_t points = g.space().point_count();
  for (int n : ns) {
    std::vector<Rational> values(g.arrow_count(), Rational(0));
    for (std::size_t x = 0; x < points; ++x) {
      std::vector<ArrowId> fiber_ball;
      for (ArrowId a : g.range_fiber(static_cast<WordIndex>(x)))
        if (g.word_length(a) <= n) fiber_ball.push_back(a);
      Rational share(1, static_cast<long long>(fiber_ball.size()));
      for (ArrowId a : fiber_ball) values[static_cast<std::size_t>(a)] = share;
    }
    seq.levels[n] = std::move(values);
  }
  return seq;
}

ExtensionReport extend_density_by_zero(const FiniteGroupoid& g,
                                       std::span<const ArrowId> h_arrows,
                                       const std::map<ArrowId, Rational>& f) {
  std::set<ArrowId> h_set(h_arrows.begin(), h_arrows.end());
  // H must be a subgroupoid for the fiber identities to make sense
  for (ArrowId a : h_set) {
    if (!h_set.count(g.inverse(a)))
      throw SpecError("H is not closed under inversion");
    if (!h_set.count(g.unit_at(g.source(a))) ||
        !h_set.count(g.unit_at(g.range(a))))
      throw SpecError("H does not contain the units of its arrows");
    for (ArrowId b : h_set) {
      auto c = g.compose(a, b);
      if (c && !h_set.count(*c))
        throw SpecError("H is not closed under composition");
    }
  }
  for (const auto& [a, v] : f) {
    if (v < 0) throw SpecError("density values must be nonnegative");
    if (!h_set.count(a))
      throw SpecError("support escapes H: arrow " + std::to_string(a));
  }

  ExtensionReport rep;
  rep.extended.assign(g.arrow_count(), Rational(0));
  for (const auto& [a, v] : f) rep.extended[static_cast<std::size_t>(a)] = v;

  auto value = [&](ArrowId a) { return rep.extended[static_cast<std::size_t>(a)]; };

  rep.fiber_sums_equal = true;
  rep.displacements_equal = true;
  for (ArrowId gamma : h_set) {
    WordIndex x = g.range(gamma);
    Rational sum_g(0), sum_h(0);
    Rational disp_g(0), disp_h(0);
    for (ArrowId mu : g.source_fiber(x)) {
      sum_g += value(mu);
      auto prod = g.compose(mu, gamma);
      Rational moved = prod ? value(*prod) : Rational(0);
      Rational d = value(mu) - moved;
      disp_g += d < 0 ? -d : d;
      if (h_set.count(mu)) {
        sum_h += value(mu);
        disp_h += d < 0 ? -d : d;
      }
    }
    if (sum_g != sum_h) rep.fiber_sums_equal = false;
    if (disp_g != disp_h) rep.displacements_equal = false;
  }
  return rep;
}

}  // namespace ample
