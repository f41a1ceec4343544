#pragma once

#include <cstdint>

#include <boost/rational.hpp>

#include "imcopt/error.hpp"

namespace imcopt {

// Latencies are carried as exact rational cycle counts and converted to
// seconds only at reporting boundaries.
using Cycles = boost::rational<std::int64_t>;

inline double to_double(const Cycles& c) { return boost::rational_cast<double>(c); }

// Overflow-checked multiply for the integer factors feeding Cycles.
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  __int128 p = static_cast<__int128>(a) * static_cast<__int128>(b);
  if (p > INT64_MAX || p < INT64_MIN) {
    throw Error(ErrorKind::validation, "integer overflow in cost arithmetic");
  }
  return static_cast<std::int64_t>(p);
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace imcopt
