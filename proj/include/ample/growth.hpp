#pragma once

#include <optional>
#include <vector>

#include "ample/groupoid.hpp"
#include "ample/rational.hpp"

namespace ample {

// gamma(n) = sup_x |{ arrows with source x and word length <= n }|,
// n = 0..n_max, plus the regression-based order estimate. The estimate is a
// heuristic read off a finite table; it is reported, never asserted.
struct GrowthProfile {
  std::vector<long long> table;
  std::optional<int> saturation_n;
  std::optional<double> estimated_ord;
  double residual = 0.0;
  int window_lo = 0;
  int window_hi = 0;
};

struct OrdEstimate {
  double slope;
  double residual;
};

std::vector<ArrowId> ball_source(const FiniteGroupoid& g, WordIndex x, int n);
std::vector<ArrowId> ball_range(const FiniteGroupoid& g, WordIndex x, int n);
long long ball_source_size(const FiniteGroupoid& g, WordIndex x, int n);

GrowthProfile growth_function(const FiniteGroupoid& g, int n_max,
                              int threads = 1);

// Least-squares slope of log gamma against log n over [n_lo, n_hi].
OrdEstimate estimate_ord(const GrowthProfile& profile, int n_lo, int n_hi);

// Smallest M >= N with gamma(2M) <= (2^ord + 1) gamma(M), exact rational
// comparison. Throws SearchExhausted when the table runs out.
int find_doubling_scale(const GrowthProfile& profile, int N,
                        const Rational& ord);

struct OrbitalGraph {
  std::vector<std::vector<WordIndex>> adjacency;
};

OrbitalGraph orbital_graph(const FiniteGroupoid& g);
std::vector<WordIndex> orbital_ball(const OrbitalGraph& graph, WordIndex x,
                                    int n);

struct SurjectionReport {
  std::size_t cayley_count = 0;
  std::size_t orbital_count = 0;
  bool surjective = false;
  bool cardinality_ok = false;
  bool pass() const { return surjective && cardinality_ok; }
};

// The source map restricted to { gamma : r(gamma) = x, length <= n } must
// cover the orbital n-ball around x, and the ball cardinalities must
// dominate. Failure signals an implementation bug.
SurjectionReport check_source_surjection(const FiniteGroupoid& g, WordIndex x,
                                         int n);

struct FolnerResult {
  int index = 0;
  Rational sup_ratio;
};

// Smallest n with sup_x |K B(n)x| / |B(n)x| < 1 + eps.
FolnerResult folner_index(const FiniteGroupoid& g, const Rational& eps,
                          int n_max);

// K' B(n)x by exact left multiplication, deduplicated.
std::vector<ArrowId> left_translate_ball(const FiniteGroupoid& g,
                                         std::span<const ArrowId> multipliers,
                                         std::span<const ArrowId> ball);

// Word lengths with respect to an alternative symmetric generating set.
std::vector<int> word_lengths_for(const FiniteGroupoid& g,
                                  std::span<const ArrowId> generating);

struct LengthComparisonReport {
  int m_l = 0;
  bool pointwise_ok = false;
  bool ball_inclusion_ok = false;
  bool pass() const { return pointwise_ok && ball_inclusion_ok; }
};

// Validates ell as a length function, computes M_L = max_{k in L} ell(k),
// and checks ell <= M_L * ell_L arrow by arrow plus the ball inclusions
// B_{ell_L}(r) ⊆ B_ell(M_L r) for r <= r_max.
LengthComparisonReport compare_length_functions(const FiniteGroupoid& g,
                                                const std::vector<int>& ell,
                                                std::span<const ArrowId> l_set,
                                                int r_max);

struct MParameter {
  int doubling_scale = 0;  // M
  long long m = 0;         // (2^ord + 1) * gamma(M)
  int ord_ceil = 0;
};

MParameter m_parameter(const FiniteGroupoid& g, const GrowthProfile& profile,
                       int N, std::optional<int> ord_override = std::nullopt);

}  // namespace ample
