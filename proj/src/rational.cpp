#include "qshield/rational.hpp"

namespace qshield {

std::string decimal_string(const Rational& r, int digits) {
    bool neg = r < 0;
    Rational abs = neg ? Rational(-r) : r;
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    // round half up
    BigInt scaled = (boost::multiprecision::numerator(abs) * scale * 2 +
                     boost::multiprecision::denominator(abs)) /
                    (boost::multiprecision::denominator(abs) * 2);
    BigInt whole = scaled / scale;
    BigInt frac = scaled % scale;
    std::string out = neg ? "-" : "";
    out += whole.str();
    if (digits > 0) {
        std::string f = frac.str();
        out += '.';
        out += std::string(static_cast<std::size_t>(digits) - f.size(), '0');
        out += f;
    }
    return out;
}

} // namespace qshield
