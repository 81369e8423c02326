#pragma once

#include <span>
#include <string>
#include <vector>

#include "ample/groupoid.hpp"
#include "ample/growth.hpp"
#include "ample/measure.hpp"
#include "ample/unitspace.hpp"

namespace ample {

struct WitnessLogEntry {
  int step = 0;      // 1-based
  int v_index = 0;   // index into the bisection decomposition of D
  int family = 0;    // 1-based family index
  DyadicRadius eps_next = DyadicRadius::zero();
  std::int64_t u_size = 0;
};

// Families U_1..U_m of bisections certifying a subequivalence: every family
// has pairwise disjoint range images inside B, and the source images jointly
// cover A.
struct SubequivalenceWitness {
  ClopenSet a;
  ClopenSet b;
  int hypothesis_m = 0;
  std::vector<std::vector<Bisection>> families;
  std::vector<WitnessLogEntry> log;

  std::size_t family_count() const { return families.size(); }
  std::size_t piece_count() const;
};

struct VerifyReport {
  bool pass = false;
  std::string detail;
};

// Re-checks a witness from its raw arrow lists, independently of how it was
// produced.
VerifyReport verify_witness(const FiniteGroupoid& g, const ClopenSet& a,
                            const ClopenSet& b,
                            const SubequivalenceWitness& w);

struct HypothesisReport {
  bool pass = false;
  long long min_margin = 0;  // min over x of RHS - LHS; pass iff >= 1
  WordIndex worst_x = 0;
};

// |{gamma in D^{-1}Dx : r(gamma) in A^eps}| < m |{gamma in Dx : r(gamma) in
// B^{-eps}}| at every unit x, evaluated exactly.
HypothesisReport check_hypothesis(const FiniteGroupoid& g, const ClopenSet& a,
                                  const ClopenSet& b,
                                  std::span<const ArrowId> d, long long m,
                                  DyadicRadius eps);

// Largest dyadic eps' < eps_n that keeps the two containments of the step
// construction valid under theta_V, plus the cylinder-coarseness of s(V) and
// r(V) at scale 2 eps' that makes the per-step injection well defined on the
// finite model. The resolution floor 2^-(depth+1) always qualifies.
DyadicRadius choose_epsilon(const Bisection& v, const ClopenSet& a_n,
                            const ClopenSet& b_nk, DyadicRadius eps_n);

// The witness-constructing algorithm: exactly m * M_D steps over the fixed
// enumeration (bisections outer, families inner), asserting the step
// inequality and the counting injection after every step. Requires
// check_hypothesis to pass; refuses otherwise.
SubequivalenceWitness run_m_comparison(const FiniteGroupoid& g,
                                       const ClopenSet& a, const ClopenSet& b,
                                       std::span<const ArrowId> d, long long m,
                                       DyadicRadius eps);

struct AutoCompareResult {
  SubequivalenceWitness witness;
  int ball_radius = 0;  // D = B(M)
  long long m = 0;
  DyadicRadius eps = DyadicRadius::zero();
};

// Convenience driver: checks A ⊆ r(GB), escalates the ball radius and m
// through the doubling search, picks the largest dyadic eps passing the
// hypothesis, then runs the core algorithm.
AutoCompareResult auto_compare(const FiniteGroupoid& g, const ClopenSet& a,
                               const ClopenSet& b, int n_max, int start_n = 1);

struct ExhaustionResult {
  SubequivalenceWitness witness;  // single family
  int loop_steps = 0;
  std::size_t reserve_count = 0;
  bool fallback_used = false;
};

// Upgrades to a single-family witness: reserve stage (arrows g_0.. from the
// smallest unit into B with distinct ranges, carved out of B while the exact
// invariant-measure gap stays positive), the U_n absorption loop over the
// cover (cycled to stabilization, the measure-gap identity asserted at every
// step), and, for a nonempty remainder, a dispatched core run through the
// reserve pieces once the density threshold is met.
ExhaustionResult run_exhaustion_comparison(const FiniteGroupoid& g,
                                           const ClopenSet& a,
                                           const ClopenSet& b,
                                           std::span<const Bisection> cover,
                                           long long m,
                                           std::span<const ArrowId> fallback_d,
                                           DyadicRadius eps);

}  // namespace ample
