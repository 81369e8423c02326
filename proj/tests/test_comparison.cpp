#include <doctest.h>

#include <random>

#include "ample/comparison.hpp"
#include "ample/serialization.hpp"
#include "oracles.hpp"

using namespace ample;

namespace {

std::vector<ArrowId> ball_arrows(const FiniteGroupoid& g, int radius) {
  std::vector<ArrowId> d;
  for (std::size_t i = 0; i < g.arrow_count(); ++i)
    if (g.word_length(static_cast<ArrowId>(i)) <= radius)
      d.push_back(static_cast<ArrowId>(i));
  return d;
}

// all admissibility conditions of the step radius, checked from scratch
bool epsilon_admissible(const Bisection& v, const ClopenSet& a_n,
                        const ClopenSet& b_nk, DyadicRadius eps_n, int j) {
  const UnitSpace& sp = a_n.space();
  auto fat = [&](const ClopenSet& s, const Rational& radius) {
    return oracle::fatten_brute(s, radius);
  };
  Rational eps3 = Rational(3) * pow2(-j);
  Rational eps2 = Rational(2) * pow2(-j);
  if (!(pow2(-j) < eps_n.value())) return false;
  if (fat(v.source_image(), eps2) != v.source_image()) return false;
  if (fat(v.range_image(), eps2) != v.range_image()) return false;
  ClopenSet lhs2 = v.pull(fat(v.push(a_n), eps3));
  if (!lhs2.subset_of(fat(a_n, eps_n.value()))) return false;
  ClopenSet not_b = b_nk.complement();
  ClopenSet lhs3 = v.push(fat(v.pull(not_b), eps2));
  if (!lhs3.subset_of(fat(not_b, eps_n.value()))) return false;
  (void)sp;
  return true;
}

}  // namespace

TEST_CASE("witness verification") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();

  SUBCASE("empty witness covers the empty set") {
    SubequivalenceWitness w{ClopenSet::empty(sp), ClopenSet::full(sp), 1, {},
                            {}};
    CHECK(verify_witness(g, w.a, w.b, w).pass);
  }
  SUBCASE("identity bisection witnesses A within A") {
    ClopenSet a = ClopenSet::cylinder(sp, "01");
    std::vector<ArrowId> arrows;
    for (WordIndex w : a.words()) arrows.push_back(g.unit_at(w));
    SubequivalenceWitness w{a, a, 1, {{Bisection(g, arrows)}}, {}};
    CHECK(verify_witness(g, a, a, w).pass);
  }
  SUBCASE("overlapping ranges within a family are reported") {
    // two one-arrow pieces with the same range point
    ClopenSet a = ClopenSet::cylinder(sp, "00");
    ArrowId to2_from0 = -1, to2_from1 = -1;
    for (std::size_t i = 0; i < g.arrow_count(); ++i) {
      ArrowId arr = static_cast<ArrowId>(i);
      if (g.range(arr) == 2 && g.source(arr) == 0) to2_from0 = arr;
      if (g.range(arr) == 2 && g.source(arr) == 1) to2_from1 = arr;
    }
    REQUIRE(to2_from0 >= 0);
    REQUIRE(to2_from1 >= 0);
    SubequivalenceWitness w{
        a,
        ClopenSet::full(sp),
        1,
        {{Bisection(g, {to2_from0}), Bisection(g, {to2_from1})}},
        {}};
    auto rep = verify_witness(g, a, ClopenSet::full(sp), w);
    CHECK(!rep.pass);
    CHECK(rep.detail.find("overlapping") != std::string::npos);
  }
  SUBCASE("missing coverage is reported") {
    ClopenSet a = ClopenSet::cylinder(sp, "0");
    SubequivalenceWitness w{a, a, 1, {{}}, {}};
    auto rep = verify_witness(g, a, a, w);
    CHECK(!rep.pass);
    CHECK(rep.detail.find("cover") != std::string::npos);
  }
}

TEST_CASE("hypothesis evaluation on the odometer") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();
  ClopenSet a = ClopenSet::cylinder(sp, "00");
  ClopenSet b = ClopenSet::cylinder(sp, "1");
  auto all = g.all_arrows();

  auto rep = check_hypothesis(g, a, b, all, 1, DyadicRadius::dyadic(3));
  CHECK(rep.pass);
  CHECK(rep.min_margin == 2);  // 4 - 2 at every unit

  CHECK(!check_hypothesis(g, a, b, all, 0, DyadicRadius::dyadic(3)).pass);
  CHECK(!check_hypothesis(g, ClopenSet::full(sp), ClopenSet::empty(sp), all, 3,
                          DyadicRadius::dyadic(3))
             .pass);
}

TEST_CASE("step radius choice") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();
  std::vector<ArrowId> units;
  for (std::size_t w = 0; w < 8; ++w)
    units.push_back(g.unit_at(static_cast<WordIndex>(w)));
  Bisection identity(g, units);

  SUBCASE("at the resolution floor everything is admissible") {
    ClopenSet a = ClopenSet::cylinder(sp, "01");
    ClopenSet b = ClopenSet::cylinder(sp, "1");
    DyadicRadius floor = DyadicRadius::dyadic(sp.depth() + 1);
    DyadicRadius next = choose_epsilon(identity, a, b, floor);
    CHECK(next == DyadicRadius::dyadic(sp.depth() + 2));
  }

  SUBCASE("identity bisection, scale-matched set: one halving suffices") {
    ClopenSet a = ClopenSet::cylinder(sp, "00");
    ClopenSet b = ClopenSet::cylinder(sp, "1");
    DyadicRadius eps_n = DyadicRadius::dyadic(2);
    DyadicRadius next = choose_epsilon(identity, a, b, eps_n);
    CHECK(next == DyadicRadius::dyadic(3));  // eps_n / 2
  }

  SUBCASE("the returned radius is the largest admissible one (oracle)") {
    std::mt19937 rng(73);
    auto pieces = decompose_into_bisections(g, g.all_arrows());
    for (int trial = 0; trial < 40; ++trial) {
      const Bisection& v = pieces[rng() % pieces.size()];
      ClopenSet a = oracle::random_subset(rng, sp, 0.4);
      ClopenSet b = oracle::random_subset(rng, sp, 0.5);
      int e = 1 + static_cast<int>(rng() % 3);
      DyadicRadius eps_n = DyadicRadius::dyadic(e);
      DyadicRadius got = choose_epsilon(v, a, b, eps_n);
      int expected = -1;
      for (int j = e + 1; j <= sp.depth() + 2 && expected < 0; ++j)
        if (epsilon_admissible(v, a, b, eps_n, j)) expected = j;
      REQUIRE(expected >= 0);
      CHECK(got == DyadicRadius::dyadic(expected));
    }
  }

  SUBCASE("prefix-exchange isometries admit radii at the prefix scale") {
    // the bisection [00] -> [10], theta swapping the leading symbol pair
    std::vector<ArrowId> arrows;
    for (std::size_t i = 0; i < g.arrow_count(); ++i) {
      ArrowId arr = static_cast<ArrowId>(i);
      WordIndex s = g.source(arr);
      if (s < 2 && g.range(arr) == s + 4) arrows.push_back(arr);
    }
    Bisection v(g, arrows);
    REQUIRE(v.size() == 2);
    ClopenSet a = ClopenSet::cylinder(sp, "00");
    ClopenSet b = ClopenSet::cylinder(sp, "10");
    DyadicRadius got = choose_epsilon(v, a, b, DyadicRadius::dyadic(1));
    int expected = -1;
    for (int j = 2; j <= sp.depth() + 2 && expected < 0; ++j)
      if (epsilon_admissible(v, a, b, DyadicRadius::dyadic(1), j)) expected = j;
    CHECK(got == DyadicRadius::dyadic(expected));
  }
}

TEST_CASE("the witness-constructing algorithm on the odometer") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();
  ClopenSet a = ClopenSet::cylinder(sp, "00");
  ClopenSet b = ClopenSet::cylinder(sp, "1");
  auto all = g.all_arrows();

  auto w = run_m_comparison(g, a, b, all, 1, DyadicRadius::dyadic(3));
  CHECK(w.family_count() == 1);
  CHECK(w.log.size() == 8);  // m * M_D = 1 * 8 steps
  CHECK(w.piece_count() == 2);
  ClopenSet ranges(sp);
  for (const auto& piece : w.families[0])
    ranges = ranges.set_union(piece.range_image());
  CHECK(ranges.cardinality() == 2);
  CHECK(ranges.subset_of(b));
  CHECK(verify_witness(g, a, b, w).pass);
}

TEST_CASE("degenerate comparison inputs") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();
  auto all = g.all_arrows();

  SUBCASE("empty A gives an empty witness") {
    auto w = run_m_comparison(g, ClopenSet::empty(sp), ClopenSet::full(sp),
                              all, 2, DyadicRadius::dyadic(3));
    CHECK(w.piece_count() == 0);
    CHECK(verify_witness(g, w.a, w.b, w).pass);
  }
  SUBCASE("A = B = whole space succeeds with units in D") {
    auto d = ball_arrows(g, 1);
    auto w = run_m_comparison(g, ClopenSet::full(sp), ClopenSet::full(sp), d,
                              2, DyadicRadius::dyadic(4));
    CHECK(verify_witness(g, w.a, w.b, w).pass);
  }
  SUBCASE("a failing hypothesis is refused") {
    CHECK_THROWS_AS(
        run_m_comparison(g, ClopenSet::full(sp), ClopenSet::empty(sp), all, 2,
                         DyadicRadius::dyadic(3)),
        PreconditionError);
  }
}

TEST_CASE("auto compare") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();
  ClopenSet a = ClopenSet::cylinder(sp, "00");
  ClopenSet b = ClopenSet::cylinder(sp, "1");

  auto res = auto_compare(g, a, b, 8);
  CHECK(res.ball_radius == 2);
  CHECK(res.m == 15);
  CHECK(verify_witness(g, a, b, res.witness).pass);

  SUBCASE("A outside r(GB) is a precondition error") {
    UnitSpace sp2(2, 2);
    GeneratorMap partial;
    partial.name = "swap01";
    partial.image = {1, 0, -1, -1};
    auto h =
        from_transformation({sp2, TransformationMode::principal, {partial}});
    ClopenSet a2 = ClopenSet::singleton(sp2, 3);
    ClopenSet b2 = ClopenSet::cylinder(sp2, "0");
    CHECK_THROWS_AS(auto_compare(h, a2, b2, 6), PreconditionError);
  }
}

TEST_CASE("exhaustion to a single family") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();
  auto cover = decompose_into_bisections(g, g.all_arrows());

  SUBCASE("odometer [00] into [1]") {
    ClopenSet a = ClopenSet::cylinder(sp, "00");
    ClopenSet b = ClopenSet::cylinder(sp, "1");
    auto fallback = ball_arrows(g, 4);
    auto res = run_exhaustion_comparison(g, a, b, cover, 9, fallback,
                                         DyadicRadius::dyadic(3));
    CHECK(res.witness.family_count() == 1);
    CHECK(verify_witness(g, a, b, res.witness).pass);
    CHECK(res.loop_steps >= 1);
  }
  SUBCASE("empty A") {
    auto res = run_exhaustion_comparison(g, ClopenSet::empty(sp),
                                         ClopenSet::full(sp), cover, 2,
                                         ball_arrows(g, 4),
                                         DyadicRadius::dyadic(3));
    CHECK(res.witness.piece_count() == 0);
  }
  SUBCASE("A inside B with the identity in the cover: absorbed in one pass") {
    ClopenSet a = ClopenSet::cylinder(sp, "00");
    ClopenSet b = ClopenSet::cylinder(sp, "0");
    auto res = run_exhaustion_comparison(g, a, b, cover, 2, ball_arrows(g, 4),
                                         DyadicRadius::dyadic(3));
    CHECK(!res.fallback_used);
    CHECK(res.loop_steps == 1);
    CHECK(verify_witness(g, a, b, res.witness).pass);
  }
  SUBCASE("a stalled loop dispatches through the reserve") {
    // only the identity bisection: the loop cannot move A into B at all
    std::vector<ArrowId> units;
    for (std::size_t w = 0; w < 8; ++w)
      units.push_back(g.unit_at(static_cast<WordIndex>(w)));
    std::vector<Bisection> identity_cover{Bisection(g, units)};
    ClopenSet a = ClopenSet::singleton(sp, sp.word_from_string("000"));
    ClopenSet b = ClopenSet::cylinder(sp, "1");
    auto res = run_exhaustion_comparison(g, a, b, identity_cover, 9,
                                         ball_arrows(g, 4),
                                         DyadicRadius::dyadic(3));
    CHECK(res.fallback_used);
    CHECK(res.loop_steps == 0);
    CHECK(res.witness.family_count() == 1);
    CHECK(verify_witness(g, a, b, res.witness).pass);
  }
  SUBCASE("a stalled loop with a heavy remainder is refused") {
    std::vector<ArrowId> units;
    for (std::size_t w = 0; w < 8; ++w)
      units.push_back(g.unit_at(static_cast<WordIndex>(w)));
    std::vector<Bisection> identity_cover{Bisection(g, units)};
    ClopenSet a = ClopenSet::cylinder(sp, "00");
    ClopenSet b = ClopenSet::cylinder(sp, "1");
    CHECK_THROWS_AS(
        run_exhaustion_comparison(g, a, b, identity_cover, 9,
                                  ball_arrows(g, 4), DyadicRadius::dyadic(3)),
        PreconditionError);
  }
  SUBCASE("missing gap is refused") {
    ClopenSet a = ClopenSet::cylinder(sp, "0");
    CHECK_THROWS_AS(
        run_exhaustion_comparison(g, a, a, cover, 2, ball_arrows(g, 4),
                                  DyadicRadius::dyadic(3)),
        PreconditionError);
  }
  SUBCASE("non-minimal groupoids are refused") {
    auto units = group_bundle(UnitSpace(2, 2), 1);
    ClopenSet a = ClopenSet::singleton(units.space(), 0);
    ClopenSet b = ClopenSet::cylinder(units.space(), "1");
    std::vector<Bisection> no_cover;
    std::vector<ArrowId> empty_d;
    CHECK_THROWS_AS(
        run_exhaustion_comparison(units, a, b, no_cover, 1, empty_d,
                                  DyadicRadius::dyadic(2)),
        PreconditionError);
  }
}

TEST_CASE("randomized soundness of the core algorithm") {
  std::mt19937 rng(79);
  std::vector<FiniteGroupoid> pool;
  pool.push_back(from_transformation(odometer_spec(2, 3)));
  pool.push_back(from_transformation(odometer_spec(2, 4)));
  pool.push_back(from_transformation(odometer_spec(3, 2)));
  {
    BratteliSpec b;
    b.level_sizes = {1, 1, 1, 1};
    b.multiplicity = {{{2}}, {{2}}, {{2}}};
    b.truncation_depth = 3;
    pool.push_back(from_bratteli(b));
  }
  pool.push_back(pair_groupoid(UnitSpace(2, 2)));

  int accepted = 0;
  int attempts = 0;
  while (accepted < 60 && attempts < 2000) {
    ++attempts;
    const FiniteGroupoid& g = pool[rng() % pool.size()];
    const UnitSpace& sp = g.space();
    ClopenSet a = oracle::random_subset(rng, sp, 0.2);
    if (a.is_empty()) continue;
    ClopenSet b = oracle::random_subset(rng, sp, 0.7);
    int radius = 1 + static_cast<int>(rng() % 3);
    auto d = ball_arrows(g, radius);
    long long m = 2 + static_cast<long long>(rng() % 4);
    DyadicRadius eps = DyadicRadius::dyadic(
        1 + static_cast<int>(rng() % (sp.depth() + 1)));
    if (!check_hypothesis(g, a, b, d, m, eps).pass) continue;
    ++accepted;
    auto w = run_m_comparison(g, a, b, d, m, eps);  // asserts internally
    auto pieces = decompose_into_bisections(g, d);
    CHECK(w.log.size() == m * pieces.size());
    CHECK(verify_witness(g, a, b, w).pass);
  }
  CHECK(accepted == 60);
}

TEST_CASE("witness serialization round trip") {
  auto g = from_transformation(odometer_spec(2, 3));
  const UnitSpace& sp = g.space();
  ClopenSet a = ClopenSet::cylinder(sp, "00");
  ClopenSet b = ClopenSet::cylinder(sp, "1");
  auto w = run_m_comparison(g, a, b, g.all_arrows(), 1, DyadicRadius::dyadic(3));

  Json j = witness_to_json(w);
  SubequivalenceWitness loaded = witness_from_json(g, j);
  CHECK(loaded.a == w.a);
  CHECK(loaded.b == w.b);
  CHECK(loaded.family_count() == w.family_count());
  CHECK(verify_witness(g, loaded.a, loaded.b, loaded).pass);

  SUBCASE("tampering is caught by the verifier") {
    Json bad = witness_to_json(w);
    // remove one arrow from the first nonempty covering piece
    for (auto& fam : bad["families"]) {
      for (auto& piece : fam) {
        if (!piece.empty()) {
          piece.erase(0);
          goto tampered;
        }
      }
    }
  tampered:
    SubequivalenceWitness mangled = witness_from_json(g, bad);
    CHECK(!verify_witness(g, mangled.a, mangled.b, mangled).pass);
  }
}
