#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>

namespace planspace {

// Plan counts grow far beyond 64 bits, so every count is exact and unbounded.
using BigInt = boost::multiprecision::cpp_int;

inline BigInt pow2(std::size_t exponent) {
  BigInt r = 1;
  r <<= exponent;
  return r;
}

inline std::string to_decimal(const BigInt& v) { return v.str(); }

inline BigInt from_decimal(const std::string& s) { return BigInt(s); }

}  // namespace planspace
