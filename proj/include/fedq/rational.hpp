#pragma once

#include <gmpxx.h>

#include <string>

namespace fedq {

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator (GMP canonical form).
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// q^e for a nonnegative integer exponent.
inline Rational pow(const Rational& q, unsigned e) {
    Rational r(1);
    for (unsigned i = 0; i < e; ++i) r *= q;
    return r;
}

}  // namespace fedq
