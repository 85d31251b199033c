#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace fairdiv {

/// Exact rational number in lowest terms with a positive denominator.
///
/// Values whose numerator and denominator fit in 63 bits are kept inline and
/// handled with 128-bit intermediate arithmetic; anything larger is promoted to
/// an immutable GMP rational shared between copies. Results are demoted back to
/// the inline form whenever they fit, so equality of representations is
/// equality of values.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t value);  // NOLINT(google-explicit-constructor)
    Rational(std::int64_t num, std::int64_t den);
    explicit Rational(const mpq_class& value);
    explicit Rational(const mpz_class& value);

    /// Parses "p" or "p/q" with decimal integers; q must be nonzero.
    static Rational parse(std::string_view text);
    static Rational pow2(long exponent);

    std::string str() const;
    /// Decimal rendering rounded to `significant` digits, e.g. "0.36602540378443864676".
    std::string to_decimal(int significant = 20) const;
    double to_double() const;

    int sign() const;
    bool is_zero() const { return sign() == 0; }
    bool is_integer() const;
    bool is_small() const { return !big_; }

    mpz_class numerator() const;
    mpz_class denominator() const;
    mpq_class to_mpq() const;

    Rational abs() const;
    Rational reciprocal() const;
    Rational floor() const;
    Rational ceil() const;
    /// Largest integer z with 2^z <= value. Requires value > 0.
    long floor_log2() const;

    Rational& operator+=(const Rational& rhs);
    Rational& operator-=(const Rational& rhs);
    Rational& operator*=(const Rational& rhs);
    Rational& operator/=(const Rational& rhs);

    friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
    friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
    friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
    friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
    Rational operator-() const;

    friend bool operator==(const Rational& a, const Rational& b);
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    std::size_t hash() const;

private:
    void assign_big(mpq_class value);

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
    std::shared_ptr<const mpq_class> big_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

/// ceil(a / b) for integers a >= 0, b > 0.
std::int64_t ceil_div(std::int64_t a, std::int64_t b);

}  // namespace fairdiv

template <>
struct std::hash<fairdiv::Rational> {
    std::size_t operator()(const fairdiv::Rational& r) const noexcept { return r.hash(); }
};
