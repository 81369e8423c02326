#include "ample/growth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <thread>

namespace ample {

std::vector<ArrowId> ball_source(const FiniteGroupoid& g, WordIndex x, int n) {
  if (n < 0) throw PreconditionError("ball radius must be nonnegative");
  std::vector<ArrowId> out;
  for (ArrowId a : g.source_fiber_by_length(x)) {
    if (g.word_length(a) > n) break;
    out.push_back(a);
  }
  return out;
}

std::vector<ArrowId> ball_range(const FiniteGroupoid& g, WordIndex x, int n) {
  std::vector<ArrowId> out;
  for (ArrowId a : ball_source(g, x, n)) out.push_back(g.inverse(a));
  std::sort(out.begin(), out.end());
  return out;
}

long long ball_source_size(const FiniteGroupoid& g, WordIndex x, int n) {
  long long c = 0;
  for (ArrowId a : g.source_fiber_by_length(x)) {
    if (g.word_length(a) > n) break;
    ++c;
  }
  return c;
}

namespace {

std::optional<int> detect_saturation(const std::vector<long long>& t) {
  // trailing plateau of length >= 3
  int n_max = static_cast<int>(t.size()) - 1;
  if (n_max < 2) return std::nullopt;
  int start = n_max;
  while (start > 0 && t[static_cast<std::size_t>(start - 1)] ==
                          t[static_cast<std::size_t>(n_max)])
    --start;
  if (n_max - start >= 2) return start;
  return std::nullopt;
}

}  // namespace

GrowthProfile growth_function(const FiniteGroupoid& g, int n_max,
                              int threads) {
  if (n_max < 1) throw PreconditionError("n_max must be at least 1");
  const std::size_t points = g.space().point_count();
  GrowthProfile profile;
  profile.table.assign(static_cast<std::size_t>(n_max) + 1, 0);

  auto scan = [&](std::size_t lo, std::size_t hi,
                  std::vector<long long>& local) {
    for (std::size_t x = lo; x < hi; ++x) {
      auto fiber = g.source_fiber_by_length(static_cast<WordIndex>(x));
      std::size_t i = 0;
      for (int n = 0; n <= n_max; ++n) {
        while (i < fiber.size() && g.word_length(fiber[i]) <= n) ++i;
        local[static_cast<std::size_t>(n)] =
            std::max(local[static_cast<std::size_t>(n)],
                     static_cast<long long>(i));
      }
    }
  };

  if (threads <= 1 || points < 64) {
    scan(0, points, profile.table);
  } else {
    int workers = std::min<int>(threads, 16);
    std::vector<std::vector<long long>> partial(
        static_cast<std::size_t>(workers),
        std::vector<long long>(static_cast<std::size_t>(n_max) + 1, 0));
    std::vector<std::thread> pool;
    std::size_t chunk = (points + static_cast<std::size_t>(workers) - 1) /
                        static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      std::size_t lo = static_cast<std::size_t>(w) * chunk;
      std::size_t hi = std::min(points, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(scan, lo, hi, std::ref(partial[static_cast<std::size_t>(w)]));
    }
    for (auto& th : pool) th.join();
    for (const auto& local : partial)
      for (std::size_t n = 0; n < profile.table.size(); ++n)
        profile.table[n] = std::max(profile.table[n], local[n]);
  }

  profile.saturation_n = detect_saturation(profile.table);

  bool constant = true;
  for (int n = 2; n <= n_max && constant; ++n)
    constant = profile.table[static_cast<std::size_t>(n)] ==
               profile.table[1];
  if (constant) {
    profile.estimated_ord = 0.0;
    profile.residual = 0.0;
    profile.window_lo = 1;
    profile.window_hi = n_max;
  } else {
    int hi = profile.saturation_n ? *profile.saturation_n - 1 : n_max;
    if (hi >= 2) {
      auto est = estimate_ord(profile, 1, hi);
      profile.estimated_ord = est.slope;
      profile.residual = est.residual;
      profile.window_lo = 1;
      profile.window_hi = hi;
    }
  }
  return profile;
}

OrdEstimate estimate_ord(const GrowthProfile& profile, int n_lo, int n_hi) {
  int n_max = static_cast<int>(profile.table.size()) - 1;
  if (n_lo < 1 || n_hi > n_max || n_lo > n_hi)
    throw PreconditionError("ord estimation window is empty or out of range");
  bool constant = true;
  for (int n = n_lo; n <= n_hi && constant; ++n)
    constant = profile.table[static_cast<std::size_t>(n)] ==
               profile.table[static_cast<std::size_t>(n_lo)];
  if (constant) return {0.0, 0.0};
  if (profile.saturation_n && n_hi >= *profile.saturation_n)
    throw PreconditionError(
        "ord estimation window reaches the saturated plateau");
  if (n_lo == n_hi)
    throw PreconditionError("ord estimation needs at least two points");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int n = n_lo; n <= n_hi; ++n) {
    double x = std::log(static_cast<double>(n));
    double y = std::log(static_cast<double>(
        profile.table[static_cast<std::size_t>(n)]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  double denom = count * sxx - sx * sx;
  double slope = (count * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / count;
  double ss = 0;
  for (int n = n_lo; n <= n_hi; ++n) {
    double x = std::log(static_cast<double>(n));
    double y = std::log(static_cast<double>(
        profile.table[static_cast<std::size_t>(n)]));
    double e = y - (slope * x + intercept);
    ss += e * e;
  }
  return {slope, std::sqrt(ss / count)};
}

int find_doubling_scale(const GrowthProfile& profile, int N,
                        const Rational& ord) {
  if (ord < 0) throw SpecError("growth order must be nonnegative");
  int n_max = static_cast<int>(profile.table.size()) - 1;
  if (N < 0) throw PreconditionError("doubling search start must be >= 0");
  const BigInt p = numerator(ord);
  const BigInt q = denominator(ord);
  for (int m = std::max(N, 1); 2 * m <= n_max; ++m) {
    BigInt g2m(profile.table[static_cast<std::size_t>(2 * m)]);
    BigInt gm(profile.table[static_cast<std::size_t>(m)]);
    // gamma(2M) <= (2^{p/q} + 1) gamma(M)  <=>  (gamma(2M)-gamma(M))^q <= 2^p gamma(M)^q
    BigInt lhs = g2m - gm;
    if (lhs <= 0) return m;
    BigInt l = 1, r = 1;
    for (BigInt i = 0; i < q; ++i) {
      l *= lhs;
      r *= gm;
    }
    BigInt two_p = 1;
    for (BigInt i = 0; i < p; ++i) two_p *= 2;
    if (l <= two_p * r) return m;
  }
  throw SearchExhausted(
      "no doubling scale with 2M <= n_max satisfies the inequality; extend n_max");
}

OrbitalGraph orbital_graph(const FiniteGroupoid& g) {
  const std::size_t points = g.space().point_count();
  std::vector<std::set<WordIndex>> adj(points);
  for (ArrowId k : g.generators()) {
    WordIndex s = g.source(k), r = g.range(k);
    if (s == r) continue;
    adj[s].insert(r);
    adj[r].insert(s);
  }
  OrbitalGraph out;
  out.adjacency.resize(points);
  for (std::size_t w = 0; w < points; ++w)
    out.adjacency[w].assign(adj[w].begin(), adj[w].end());
  return out;
}

std::vector<WordIndex> orbital_ball(const OrbitalGraph& graph, WordIndex x,
                                    int n) {
  std::vector<int> dist(graph.adjacency.size(), -1);
  std::deque<WordIndex> queue{x};
  dist[x] = 0;
  std::vector<WordIndex> out{x};
  while (!queue.empty()) {
    WordIndex v = queue.front();
    queue.pop_front();
    if (dist[v] == n) continue;
    for (WordIndex u : graph.adjacency[v]) {
      if (dist[u] == -1) {
        dist[u] = dist[v] + 1;
        out.push_back(u);
        queue.push_back(u);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SurjectionReport check_source_surjection(const FiniteGroupoid& g, WordIndex x,
                                         int n) {
  SurjectionReport rep;
  std::set<WordIndex> sources;
  for (ArrowId a : g.range_fiber(x)) {
    if (g.word_length(a) <= n) {
      ++rep.cayley_count;
      sources.insert(g.source(a));
    }
  }
  OrbitalGraph graph = orbital_graph(g);
  auto orb = orbital_ball(graph, x, n);
  rep.orbital_count = orb.size();
  rep.surjective =
      std::includes(sources.begin(), sources.end(), orb.begin(), orb.end()) &&
      std::includes(orb.begin(), orb.end(), sources.begin(), sources.end());
  rep.cardinality_ok = rep.orbital_count <= rep.cayley_count;
  return rep;
}

std::vector<ArrowId> left_translate_ball(const FiniteGroupoid& g,
                                         std::span<const ArrowId> multipliers,
                                         std::span<const ArrowId> ball) {
  std::set<ArrowId> out;
  for (ArrowId gamma : ball) {
    for (ArrowId k : multipliers) {
      if (g.source(k) != g.range(gamma)) continue;
      auto prod = g.compose(k, gamma);
      if (prod) out.insert(*prod);
    }
  }
  return {out.begin(), out.end()};
}

FolnerResult folner_index(const FiniteGroupoid& g, const Rational& eps,
                          int n_max) {
  if (eps <= 0) throw PreconditionError("folner tolerance must be positive");
  const std::size_t points = g.space().point_count();
  const Rational bound = Rational(1) + eps;
  for (int n = 0; n <= n_max; ++n) {
    Rational sup(0);
    for (std::size_t x = 0; x < points; ++x) {
      auto ball = ball_source(g, static_cast<WordIndex>(x), n);
      std::vector<ArrowId> kball;
      {
        std::set<ArrowId> prods;
        for (ArrowId gamma : ball)
          for (ArrowId k : g.generators_from(g.range(gamma))) {
            auto p = g.compose(k, gamma);
            if (p) prods.insert(*p);
          }
        kball.assign(prods.begin(), prods.end());
      }
      Rational ratio(static_cast<long long>(kball.size()),
                     static_cast<long long>(ball.size()));
      if (ratio > sup) sup = ratio;
    }
    if (sup < bound) return {n, sup};
  }
  throw SearchExhausted("no Folner index within n_max; extend the table");
}

std::vector<int> word_lengths_for(const FiniteGroupoid& g,
                                  std::span<const ArrowId> generating) {
  // validate symmetry
  std::set<ArrowId> l_set(generating.begin(), generating.end());
  for (ArrowId k : generating)
    if (!l_set.count(g.inverse(k)))
      throw SpecError("generating set is not symmetric");

  const std::size_t points = g.space().point_count();
  std::vector<std::vector<ArrowId>> from(points);
  for (ArrowId k : l_set)
    if (!g.is_unit(k)) from[g.source(k)].push_back(k);

  std::vector<int> dist(g.arrow_count(), -1);
  std::deque<ArrowId> queue;
  for (std::size_t w = 0; w < points; ++w) {
    ArrowId u = g.unit_at(static_cast<WordIndex>(w));
    dist[static_cast<std::size_t>(u)] = 0;
    queue.push_back(u);
  }
  while (!queue.empty()) {
    ArrowId a = queue.front();
    queue.pop_front();
    for (ArrowId k : from[g.range(a)]) {
      auto ka = g.compose(k, a);
      if (ka && dist[static_cast<std::size_t>(*ka)] == -1) {
        dist[static_cast<std::size_t>(*ka)] =
            dist[static_cast<std::size_t>(a)] + 1;
        queue.push_back(*ka);
      }
    }
  }
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] == -1)
      throw SpecError("alternative generating set does not generate");
  return dist;
}

LengthComparisonReport compare_length_functions(const FiniteGroupoid& g,
                                                const std::vector<int>& ell,
                                                std::span<const ArrowId> l_set,
                                                int r_max) {
  if (ell.size() != g.arrow_count())
    throw SpecError("length table does not cover the arrow set");
  // Definition 2.3 axioms
  for (std::size_t i = 0; i < ell.size(); ++i) {
    ArrowId a = static_cast<ArrowId>(i);
    if (ell[i] < 0)
      throw SpecError("length axiom violated: negative value on arrow " +
                      std::to_string(i));
    if (g.is_unit(a) && ell[i] != 0)
      throw SpecError("length axiom (1) violated: nonzero on a unit");
    if (ell[static_cast<std::size_t>(g.inverse(a))] != ell[i])
      throw SpecError("length axiom (2) violated: not inversion-symmetric");
  }
  for (std::size_t i = 0; i < ell.size(); ++i) {
    ArrowId b = static_cast<ArrowId>(i);
    for (ArrowId a : g.source_fiber(g.range(b))) {
      auto ab = g.compose(a, b);
      if (ab && ell[static_cast<std::size_t>(*ab)] >
                    ell[static_cast<std::size_t>(a)] + ell[i])
        throw SpecError("length axiom (3) violated: not subadditive");
    }
  }

  std::vector<int> ell_l = word_lengths_for(g, l_set);

  LengthComparisonReport rep;
  rep.m_l = 0;
  for (ArrowId k : l_set)
    rep.m_l = std::max(rep.m_l, ell[static_cast<std::size_t>(k)]);

  rep.pointwise_ok = true;
  for (std::size_t i = 0; i < ell.size(); ++i)
    if (ell[i] > rep.m_l * ell_l[i]) rep.pointwise_ok = false;

  rep.ball_inclusion_ok = true;
  for (int r = 0; r <= r_max; ++r)
    for (std::size_t i = 0; i < ell.size(); ++i)
      if (ell_l[i] <= r && ell[i] > rep.m_l * r) rep.ball_inclusion_ok = false;

  return rep;
}

MParameter m_parameter(const FiniteGroupoid& g, const GrowthProfile& profile,
                       int N, std::optional<int> ord_override) {
  (void)g;
  int ord_c;
  if (ord_override) {
    ord_c = *ord_override;
  } else if (profile.estimated_ord) {
    ord_c = static_cast<int>(std::ceil(*profile.estimated_ord - 1e-9));
  } else {
    throw PreconditionError(
        "no usable ord estimate; pass an explicit override");
  }
  ord_c = std::max(ord_c, 0);
  int m_scale = find_doubling_scale(profile, N, Rational(ord_c));
  long long factor = (1ll << ord_c) + 1;
  return {m_scale,
          factor * profile.table[static_cast<std::size_t>(m_scale)], ord_c};
}

}  // namespace ample
