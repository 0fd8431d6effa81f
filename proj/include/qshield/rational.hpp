#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace qshield {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Decimal rendering rounded half-up to `digits` places, without a trailing
// exponent. Dyadic values (the only probabilities this toolkit emits) are
// exact whenever digits >= log2(denominator).
std::string decimal_string(const Rational& r, int digits);

} // namespace qshield
