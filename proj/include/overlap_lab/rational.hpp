#pragma once

#include <cstdint>
#include <compare>
#include <string>

namespace overlap_lab {

// Exact non-negative-denominator fraction, always kept in lowest terms.
class Rational {
  public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    // 100 * value rounded half-up to `decimals` places, e.g. 33/37 -> "89.189".
    std::string percent(int decimals = 3) const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

  private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

std::string to_string(const Rational& r);

}  // namespace overlap_lab
