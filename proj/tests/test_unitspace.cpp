#include <doctest.h>

#include <random>

#include "ample/unitspace.hpp"
#include "oracles.hpp"

using namespace ample;

namespace {

ClopenSet cyl(const UnitSpace& sp, const char* p) {
  return ClopenSet::cylinder(sp, p);
}

}  // namespace

TEST_CASE("metric on depth-3 binary words") {
  UnitSpace sp(2, 3);
  WordIndex w000 = sp.word_from_string("000");
  WordIndex w001 = sp.word_from_string("001");
  WordIndex w100 = sp.word_from_string("100");
  CHECK(sp.metric(w000, w000) == Rational(0));
  CHECK(sp.metric(w000, w001) == Rational(1, 4));
  CHECK(sp.metric(w000, w100) == Rational(1));
  CHECK(sp.metric(w001, w000) == sp.metric(w000, w001));
}

TEST_CASE("ultrametric inequality, exhaustive at small depth") {
  for (auto [k, d] : {std::pair{2, 4}, std::pair{3, 2}}) {
    UnitSpace sp(k, d);
    for (std::size_t x = 0; x < sp.point_count(); ++x)
      for (std::size_t y = 0; y < sp.point_count(); ++y)
        for (std::size_t z = 0; z < sp.point_count(); ++z) {
          Rational dxz = sp.metric(static_cast<WordIndex>(x),
                                   static_cast<WordIndex>(z));
          Rational dxy = sp.metric(static_cast<WordIndex>(x),
                                   static_cast<WordIndex>(y));
          Rational dyz = sp.metric(static_cast<WordIndex>(y),
                                   static_cast<WordIndex>(z));
          CHECK(dxz <= std::max(dxy, dyz));
        }
  }
}

TEST_CASE("ultrametric inequality, randomized at depth 7") {
  UnitSpace sp(2, 7);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 3000; ++trial) {
    WordIndex x = rng() % sp.point_count();
    WordIndex y = rng() % sp.point_count();
    WordIndex z = rng() % sp.point_count();
    CHECK(sp.metric(x, z) <= std::max(sp.metric(x, y), sp.metric(y, z)));
  }
}

TEST_CASE("metric agrees with the string-prefix oracle") {
  UnitSpace sp(3, 3);
  for (std::size_t x = 0; x < sp.point_count(); ++x)
    for (std::size_t y = 0; y < sp.point_count(); ++y) {
      auto xs = sp.word_to_string(static_cast<WordIndex>(x));
      auto ys = sp.word_to_string(static_cast<WordIndex>(y));
      CHECK(sp.metric(static_cast<WordIndex>(x), static_cast<WordIndex>(y)) ==
            oracle::metric_of_strings(xs, ys));
    }
}

TEST_CASE("fattening examples at depth 3") {
  UnitSpace sp(2, 3);
  ClopenSet point = ClopenSet::singleton(sp, sp.word_from_string("000"));

  ClopenSet fat = fatten(point, DyadicRadius::dyadic(1));
  CHECK(fat.words() == std::vector<WordIndex>{sp.word_from_string("000"),
                                              sp.word_from_string("001")});

  CHECK(fatten(point, DyadicRadius::one_plus()) == ClopenSet::full(sp));
  CHECK(fatten(ClopenSet::empty(sp), DyadicRadius::one_plus()).is_empty());
  CHECK(fatten(cyl(sp, "0"), DyadicRadius::dyadic(1)) == cyl(sp, "0"));
}

TEST_CASE("shrinking examples at depth 3") {
  UnitSpace sp(2, 3);
  CHECK(shrink(cyl(sp, "0"), DyadicRadius::dyadic(2)) == cyl(sp, "0"));
  ClopenSet point = ClopenSet::singleton(sp, sp.word_from_string("000"));
  CHECK(shrink(point, DyadicRadius::dyadic(2)).is_empty());
  CHECK(shrink(ClopenSet::full(sp), DyadicRadius::dyadic(1)) ==
        ClopenSet::full(sp));
}

TEST_CASE("set algebra basics") {
  UnitSpace sp(2, 3);
  CHECK(cyl(sp, "0").complement() == cyl(sp, "1"));
  CHECK(cyl(sp, "00").set_union(cyl(sp, "01")) == cyl(sp, "0"));
  CHECK(cyl(sp, "0").cardinality() == 4);
  CHECK(cyl(sp, "0").set_intersection(cyl(sp, "1")).is_empty());
  CHECK(cyl(sp, "0").set_difference(cyl(sp, "00")) == cyl(sp, "01"));

  UnitSpace other(2, 2);
  CHECK_THROWS_AS((void)cyl(sp, "0").set_union(ClopenSet::full(other)),
                  PreconditionError);
}

TEST_CASE("fatten and shrink agree with the brute-force oracle") {
  std::mt19937 rng(11);
  for (auto [k, d] : {std::pair{2, 3}, std::pair{2, 4}, std::pair{3, 2}}) {
    UnitSpace sp(k, d);
    for (int trial = 0; trial < 25; ++trial) {
      ClopenSet a = oracle::random_subset(rng, sp, 0.35);
      for (int j = 0; j <= d + 1; ++j) {
        DyadicRadius eps = DyadicRadius::dyadic(j);
        CHECK(fatten(a, eps) == oracle::fatten_brute(a, eps.value()));
        CHECK(shrink(a, eps) == oracle::shrink_brute(a, eps.value()));
      }
    }
  }
}

TEST_CASE("fatten and shrink monotone in the radius") {
  std::mt19937 rng(13);
  UnitSpace sp(2, 4);
  for (int trial = 0; trial < 30; ++trial) {
    ClopenSet a = oracle::random_subset(rng, sp, 0.3);
    for (int j = 0; j < 5; ++j) {
      DyadicRadius small = DyadicRadius::dyadic(j + 1);
      DyadicRadius big = DyadicRadius::dyadic(j);
      CHECK(fatten(a, small).subset_of(fatten(a, big)));
      CHECK(shrink(a, big).subset_of(shrink(a, small)));
    }
  }
}

TEST_CASE("duality between fattening and shrinking") {
  std::mt19937 rng(17);
  UnitSpace sp(2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    ClopenSet a = oracle::random_subset(rng, sp, 0.4);
    for (int j = 0; j <= 5; ++j) {
      Rational eps = pow2(-j);
      // complement(A^eps) = { x : d(x, A) >= eps }
      ClopenSet lhs = fatten(a, DyadicRadius::dyadic(j)).complement();
      ClopenSet rhs(sp);
      for (std::size_t x = 0; x < sp.point_count(); ++x) {
        auto dist = distance_to_set(sp, static_cast<WordIndex>(x), a);
        if (!dist || *dist >= eps) rhs.set(static_cast<WordIndex>(x));
      }
      CHECK(lhs == rhs);
      // A^{-eps} = complement({ x : d(x, complement A) <= eps })
      ClopenSet close_to_comp(sp);
      for (std::size_t x = 0; x < sp.point_count(); ++x) {
        auto dist =
            distance_to_set(sp, static_cast<WordIndex>(x), a.complement());
        if (dist && *dist <= eps) close_to_comp.set(static_cast<WordIndex>(x));
      }
      CHECK(shrink(a, DyadicRadius::dyadic(j)) == close_to_comp.complement());
    }
  }
}

TEST_CASE("idempotence at the resolution floor") {
  std::mt19937 rng(19);
  UnitSpace sp(2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    ClopenSet a = oracle::random_subset(rng, sp, 0.5);
    for (int j = sp.depth(); j <= sp.depth() + 3; ++j) {
      CHECK(fatten(a, DyadicRadius::dyadic(j)) == a);
      CHECK(shrink(a, DyadicRadius::dyadic(j)) == a);
    }
  }
}

TEST_CASE("unit space guards") {
  CHECK_THROWS_AS(UnitSpace(1, 3), SpecError);
  CHECK_THROWS_AS(UnitSpace(2, 0), SpecError);
  CHECK_THROWS_AS(UnitSpace(2, 64), ResourceError);
  UnitSpace sp(2, 3);
  CHECK_THROWS_AS(sp.word_from_string("0102"), SpecError);
  CHECK_THROWS_AS(sp.word_from_string("012"), SpecError);
}
