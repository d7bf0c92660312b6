#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <gmpxx.h>

namespace bwcs {

// All probabilities and expectations are exact rationals; edge weights stay
// machine integers. mpq_class keeps values canonical (reduced, positive
// denominator) after every operation.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Rat rat_of_int64(int64_t v) {
  Rat r;
  r = Int(static_cast<long>(v));
  return r;
}

/// Nearest integer to n/d (d > 0), ties away from zero.
Int round_nearest(const Int& n, const Int& d);

/// Parses "p/q", "p", or a decimal like "4.5" / "-0.125" into an exact
/// rational. Returns nullopt on malformed input or zero denominator.
std::optional<Rat> parse_rational(const std::string& text);

/// "p/q" (or just "p" when q = 1).
std::string to_fraction_string(const Rat& r);

/// Decimal rendering: exact when the reduced denominator is 2^a*5^b,
/// otherwise rounded to `digits` places and prefixed with "~".
std::string to_decimal_string(const Rat& r, int digits = 9);

}  // namespace bwcs
