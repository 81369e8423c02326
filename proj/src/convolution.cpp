#include "ample/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ample {

GroupoidFunction zero_function(const FiniteGroupoid& g) {
  return GroupoidFunction(g.arrow_count());
}

GroupoidFunction delta(const FiniteGroupoid& g, ArrowId a) {
  GroupoidFunction f(g.arrow_count());
  f[static_cast<std::size_t>(a)] = ComplexRational(Rational(1));
  return f;
}

GroupoidFunction unit_indicator(const FiniteGroupoid& g) {
  GroupoidFunction f(g.arrow_count());
  for (std::size_t w = 0; w < g.space().point_count(); ++w)
    f[static_cast<std::size_t>(g.unit_at(static_cast<WordIndex>(w)))] =
        ComplexRational(Rational(1));
  return f;
}

GroupoidFunction indicator(const FiniteGroupoid& g,
                           std::span<const ArrowId> arrows) {
  GroupoidFunction f(g.arrow_count());
  for (ArrowId a : arrows)
    f[static_cast<std::size_t>(a)] = ComplexRational(Rational(1));
  return f;
}

GroupoidFunction convolve(const FiniteGroupoid& g, const GroupoidFunction& f,
                          const GroupoidFunction& h) {
  if (f.size() != g.arrow_count() || h.size() != g.arrow_count())
    throw PreconditionError("convolve: functions live on a different groupoid");
  GroupoidFunction out(g.arrow_count());
  for (std::size_t i = 0; i < g.arrow_count(); ++i) {
    ArrowId gamma = static_cast<ArrowId>(i);
    ComplexRational sum;
    for (ArrowId mu : g.source_fiber(g.source(gamma))) {
      const ComplexRational& hv = h[static_cast<std::size_t>(mu)];
      if (hv.is_zero()) continue;
      auto left = g.compose(gamma, g.inverse(mu));
      if (!left) continue;
      const ComplexRational& fv = f[static_cast<std::size_t>(*left)];
      if (fv.is_zero()) continue;
      sum = sum + fv * hv;
    }
    out[i] = sum;
  }
  return out;
}

GroupoidFunction involution(const FiniteGroupoid& g,
                            const GroupoidFunction& f) {
  GroupoidFunction out(g.arrow_count());
  for (std::size_t i = 0; i < g.arrow_count(); ++i)
    out[i] = f[static_cast<std::size_t>(g.inverse(static_cast<ArrowId>(i)))]
                 .conj();
  return out;
}

Rational i_norm(const FiniteGroupoid& g, const GroupoidFunction& f) {
  for (const ComplexRational& v : f)
    if (!v.is_real())
      throw PreconditionError(
          "the exact I-norm is only defined for real-valued functions");
  auto abs_val = [](const Rational& r) { return r < 0 ? -r : r; };
  Rational best(0);
  for (std::size_t w = 0; w < g.space().point_count(); ++w) {
    Rational source_sum(0), range_sum(0);
    for (ArrowId a : g.source_fiber(static_cast<WordIndex>(w)))
      source_sum += abs_val(f[static_cast<std::size_t>(a)].re);
    for (ArrowId a : g.range_fiber(static_cast<WordIndex>(w)))
      range_sum += abs_val(f[static_cast<std::size_t>(a)].re);
    best = std::max(best, std::max(source_sum, range_sum));
  }
  return best;
}

FiberMatrix regular_representation(const FiniteGroupoid& g, WordIndex x,
                                   const GroupoidFunction& f) {
  FiberMatrix m;
  auto fiber = g.source_fiber(x);
  m.basis.assign(fiber.begin(), fiber.end());
  std::sort(m.basis.begin(), m.basis.end());
  const std::size_t d = m.basis.size();
  m.entries.assign(d * d, ComplexRational());
  for (std::size_t row = 0; row < d; ++row) {
    for (std::size_t col = 0; col < d; ++col) {
      auto prod = g.compose(m.basis[row], g.inverse(m.basis[col]));
      if (prod) m.entries[row * d + col] = f[static_cast<std::size_t>(*prod)];
    }
  }
  return m;
}

FiberMatrix matrix_multiply(const FiberMatrix& a, const FiberMatrix& b) {
  if (a.basis != b.basis)
    throw PreconditionError("matrix product needs matching fibers");
  const std::size_t d = a.dim();
  FiberMatrix out;
  out.basis = a.basis;
  out.entries.assign(d * d, ComplexRational());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const ComplexRational& av = a.at(i, k);
      if (av.is_zero()) continue;
      for (std::size_t j = 0; j < d; ++j)
        out.entries[i * d + j] = out.entries[i * d + j] + av * b.at(k, j);
    }
  return out;
}

FiberMatrix matrix_adjoint(const FiberMatrix& a) {
  const std::size_t d = a.dim();
  FiberMatrix out;
  out.basis = a.basis;
  out.entries.assign(d * d, ComplexRational());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out.entries[i * d + j] = a.at(j, i).conj();
  return out;
}

namespace {

// Largest eigenvalue of the PSD operator M^dagger M by power iteration from
// the given start vector; returns the Rayleigh quotient, a lower bound.
double psd_top_eigenvalue(const std::vector<std::complex<double>>& m,
                          std::size_t d, std::vector<std::complex<double>> v,
                          double tolerance, int max_iter) {
  auto apply = [&](const std::vector<std::complex<double>>& in,
                   std::vector<std::complex<double>>& out) {
    std::vector<std::complex<double>> tmp(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) tmp[i] += m[i * d + j] * in[j];
    for (std::size_t j = 0; j < d; ++j) {
      std::complex<double> s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += std::conj(m[i * d + j]) * tmp[i];
      out[j] = s;
    }
  };
  double prev = -1.0;
  std::vector<std::complex<double>> av(d);
  for (int iter = 0; iter < max_iter; ++iter) {
    double norm = 0.0;
    for (const auto& c : v) norm += std::norm(c);
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (auto& c : v) c /= norm;
    apply(v, av);
    double rayleigh = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      rayleigh += (std::conj(v[i]) * av[i]).real();
    if (rayleigh <= 0.0) return 0.0;
    if (prev >= 0.0 &&
        std::abs(rayleigh - prev) <= tolerance * std::max(rayleigh, 1e-300))
      return rayleigh;
    prev = rayleigh;
    v = av;
  }
  throw NumericError(
      "power iteration did not converge within the iteration cap (" +
      std::to_string(max_iter) + " iterations, last estimate " +
      std::to_string(prev) + ")");
}

}  // namespace

double operator_norm(const FiberMatrix& m, double tolerance) {
  if (tolerance <= 0) throw PreconditionError("tolerance must be positive");
  const std::size_t d = m.dim();
  if (d == 0) return 0.0;
  std::vector<std::complex<double>> md(d * d);
  bool all_zero = true;
  for (std::size_t i = 0; i < d * d; ++i) {
    md[i] = m.entries[i].to_complex();
    if (md[i] != std::complex<double>(0.0)) all_zero = false;
  }
  if (all_zero) return 0.0;

  const int cap = 200000;
  std::vector<std::complex<double>> ones(d, 1.0);
  double best = psd_top_eigenvalue(md, d, ones, tolerance / 4, cap);
  // second deterministic start, in case the all-ones vector is orthogonal
  // to the top eigenspace
  std::vector<std::complex<double>> mixed(d);
  std::uint64_t lcg = 0x2545F4914F6CDD1Dull;
  for (std::size_t i = 0; i < d; ++i) {
    lcg = lcg * 6364136223846793005ull + 1442695040888963407ull;
    mixed[i] = 0.5 + static_cast<double>(lcg >> 40) * 1e-8;
  }
  best = std::max(best, psd_top_eigenvalue(md, d, mixed, tolerance / 4, cap));
  return std::sqrt(best);
}

double reduced_norm(const FiniteGroupoid& g, const GroupoidFunction& f,
                    double tolerance, int threads) {
  if (tolerance <= 0) throw PreconditionError("tolerance must be positive");
  const std::size_t points = g.space().point_count();
  auto norm_at = [&](std::size_t x) {
    return operator_norm(
        regular_representation(g, static_cast<WordIndex>(x), f), tolerance);
  };
  if (threads <= 1 || points < 8) {
    double best = 0.0;
    for (std::size_t x = 0; x < points; ++x) best = std::max(best, norm_at(x));
    return best;
  }
  int workers = std::min<int>(threads, 16);
  std::vector<double> partial(static_cast<std::size_t>(workers), 0.0);
  std::vector<std::thread> pool;
  std::size_t chunk = (points + static_cast<std::size_t>(workers) - 1) /
                      static_cast<std::size_t>(workers);
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = std::min(points, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      double best = 0.0;
      for (std::size_t x = lo; x < hi; ++x) best = std::max(best, norm_at(x));
      partial[static_cast<std::size_t>(w)] = best;
    });
  }
  for (auto& th : pool) th.join();
  double best = 0.0;
  for (double v : partial) best = std::max(best, v);
  return best;
}

}  // namespace ample
