#pragma once

#include <map>
#include <span>
#include <vector>

#include "ample/groupoid.hpp"
#include "ample/growth.hpp"
#include "ample/rational.hpp"

namespace ample {

// Finitely supported measure on the unit space, exact rational weights.
struct PointMeasure {
  explicit PointMeasure(const UnitSpace& s)
      : space(s), weights(s.point_count(), Rational(0)) {}

  UnitSpace space;
  std::vector<Rational> weights;

  Rational mass() const;
  bool is_probability() const;
  Rational of(const ClopenSet& a) const;
  Rational at(WordIndex w) const { return weights[w]; }
};

// Orbits of the unit space under the arrow relation, each sorted, listed by
// smallest member.
std::vector<std::vector<WordIndex>> unit_orbits(const FiniteGroupoid& g);

// Vertices of the polytope of invariant probability measures: the invariance
// equations force constant weights along orbits, so the vertices are the
// uniform measures on single orbits.
std::vector<PointMeasure> invariant_vertex_measures(const FiniteGroupoid& g);

// Max over sub-bisections of the canonical decomposition of K of
// |mu(s(V)) - mu(r(V))|; zero iff mu is invariant.
Rational invariance_defect(const FiniteGroupoid& g, const PointMeasure& mu);

// nu_{x,n}: each word weighted by the share of B(n)x-arrows ranging there.
PointMeasure empirical_measure(const FiniteGroupoid& g, WordIndex x, int n);

struct EmpiricalBound {
  Rational defect;
  Rational bound;
};

// Invariance defect of the empirical measure against generator
// sub-bisections, together with the symmetric-difference bound
// |U B(n)x Δ B(n)x| / |B(n)x| that dominates it.
EmpiricalBound empirical_invariance_bound(const FiniteGroupoid& g, WordIndex x,
                                          int n);

Rational banach_upper_density(const FiniteGroupoid& g, const ClopenSet& a,
                              int n);
Rational banach_lower_density(const FiniteGroupoid& g, const ClopenSet& a,
                              int n);

// rho(n) = sup_x |K B(n)x Δ B(n)x| / |B(n)x|, the finite-scale error term in
// the density sandwich.
Rational translation_defect_ratio(const FiniteGroupoid& g, int n);

// n -> per-arrow nonnegative values.
struct DensitySequence {
  std::map<int, std::vector<Rational>> levels;
};

struct CertificateReport {
  int n = 0;
  bool fiber_sums_bounded = false;  // sum over every range fiber <= 1
  Rational deficit;                 // max over x of 1 - sum
  Rational displacement;            // max over K_test of the translation sum
  bool pass = false;
};

// Checks the approximate-invariant-density conditions at the largest
// provided n: range-fiber sums bounded by one, deficit and displacement both
// strictly below eps.
CertificateReport verify_density_certificate(const FiniteGroupoid& g,
                                             const DensitySequence& seq,
                                             std::span<const ArrowId> k_test,
                                             const Rational& eps);

// The canonical certificate: g_n = fiber-normalized indicator of B(n) on
// range fibers.
DensitySequence fiber_normalized_ball_densities(const FiniteGroupoid& g,
                                                const std::vector<int>& ns);

struct ExtensionReport {
  std::vector<Rational> extended;  // per arrow of G, zero off H
  bool fiber_sums_equal = false;
  bool displacements_equal = false;
};

// Extend f (supported on the subgroupoid H) by zero to all of G, checking
// that fiber sums and translation sums through H-arrows agree whether
// computed in G or in H.
ExtensionReport extend_density_by_zero(const FiniteGroupoid& g,
                                       std::span<const ArrowId> h_arrows,
                                       const std::map<ArrowId, Rational>& f);

}  // namespace ample
