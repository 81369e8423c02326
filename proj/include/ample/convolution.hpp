#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ample/groupoid.hpp"
#include "ample/rational.hpp"

namespace ample {

struct ComplexRational {
  Rational re;
  Rational im;

  ComplexRational() : re(0), im(0) {}
  ComplexRational(Rational r) : re(std::move(r)), im(0) {}
  ComplexRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  ComplexRational conj() const { return {re, -im}; }
  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  ComplexRational operator+(const ComplexRational& o) const {
    return {re + o.re, im + o.im};
  }
  ComplexRational operator-(const ComplexRational& o) const {
    return {re - o.re, im - o.im};
  }
  ComplexRational operator*(const ComplexRational& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  bool operator==(const ComplexRational& o) const {
    return re == o.re && im == o.im;
  }
  bool operator!=(const ComplexRational& o) const { return !(*this == o); }

  std::complex<double> to_complex() const {
    return {to_double(re), to_double(im)};
  }
};

// Element of the convolution algebra: one value per arrow.
using GroupoidFunction = std::vector<ComplexRational>;

GroupoidFunction zero_function(const FiniteGroupoid& g);
GroupoidFunction delta(const FiniteGroupoid& g, ArrowId a);
GroupoidFunction unit_indicator(const FiniteGroupoid& g);
GroupoidFunction indicator(const FiniteGroupoid& g,
                           std::span<const ArrowId> arrows);

// (f * g)(gamma) = sum over the source fiber at s(gamma) of
// f(gamma mu^{-1}) g(mu)
GroupoidFunction convolve(const FiniteGroupoid& g, const GroupoidFunction& f,
                          const GroupoidFunction& h);

// f^*(gamma) = conj(f(gamma^{-1}))
GroupoidFunction involution(const FiniteGroupoid& g, const GroupoidFunction& f);

// max of the sup over source fibers and the sup over range fibers of the
// l1 fiber sums. Exact; defined for real-valued functions.
Rational i_norm(const FiniteGroupoid& g, const GroupoidFunction& f);

// Matrix of the left regular representation at x on l2 of the source fiber:
// entry (gamma, mu) = f(gamma mu^{-1}).
struct FiberMatrix {
  std::vector<ArrowId> basis;  // the source fiber at x, ascending ids
  std::vector<ComplexRational> entries;  // row-major, basis x basis

  std::size_t dim() const { return basis.size(); }
  const ComplexRational& at(std::size_t row, std::size_t col) const {
    return entries[row * basis.size() + col];
  }
};

FiberMatrix regular_representation(const FiniteGroupoid& g, WordIndex x,
                                   const GroupoidFunction& f);

FiberMatrix matrix_multiply(const FiberMatrix& a, const FiberMatrix& b);
FiberMatrix matrix_adjoint(const FiberMatrix& a);

// Spectral norm via power iteration on M^dagger M, deterministic seeds.
double operator_norm(const FiberMatrix& m, double tolerance);

// sup over units of the operator norm of the left regular representation.
double reduced_norm(const FiniteGroupoid& g, const GroupoidFunction& f,
                    double tolerance, int threads = 1);

}  // namespace ample
