#include "overlap_lab/rational.hpp"

#include <cstdlib>
#include <numeric>

#include "overlap_lab/error.hpp"

namespace overlap_lab {

namespace {

using Wide = __int128;

Rational from_wide(Wide num, Wide den) {
    if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    Wide a = num < 0 ? -num : num;
    Wide b = den;
    while (b != 0) {
        Wide t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g > 1 ? num / g : num;
    den_ = g > 1 ? den / g : den;
}

Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(Wide(a.num_) * b.den_ + Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return from_wide(Wide(a.num_) * b.den_ - Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(Wide(a.num_) * b.num_, Wide(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    return from_wide(Wide(a.num_) * b.den_, Wide(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    const Wide lhs = Wide(a.num_) * b.den_;
    const Wide rhs = Wide(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Rational::percent(int decimals) const {
    Wide scale = 100;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const bool negative = num_ < 0;
    const Wide n = (negative ? -Wide(num_) : Wide(num_)) * scale;
    // round half up on the magnitude
    const Wide q = (2 * n + den_) / (2 * Wide(den_));

    Wide pow10 = 1;
    for (int i = 0; i < decimals; ++i) pow10 *= 10;
    const auto whole = static_cast<long long>(q / pow10);
    std::string out = (negative && q != 0 ? "-" : "") + std::to_string(whole);
    if (decimals > 0) {
        std::string frac = std::to_string(static_cast<long long>(q % pow10));
        out += '.';
        out += std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
    }
    return out;
}

std::string to_string(const Rational& r) {
    return std::to_string(r.num()) + "/" + std::to_string(r.den());
}

}  // namespace overlap_lab
