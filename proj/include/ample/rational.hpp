#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace ample {

// All measure/density arithmetic is exact; floating point appears only in
// the ord regression and in operator-norm estimation.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long long num, long long den) {
  return Rational(BigInt(num), BigInt(den));
}

// 2^e for e possibly negative.
inline Rational pow2(int e) {
  if (e >= 0) return Rational(BigInt(1) << e);
  return Rational(BigInt(1), BigInt(1) << (-e));
}

inline std::string to_string(const Rational& r) {
  return r.str();
}

inline double to_double(const Rational& r) {
  return r.convert_to<double>();
}

}  // namespace ample
