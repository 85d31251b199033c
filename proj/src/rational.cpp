#include "fairdiv/rational.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>

#include "fairdiv/error.hpp"

namespace fairdiv {
namespace {

using i128 = __int128;

constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

bool fits(i128 v) { return v <= kMax && v >= -kMax; }

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

int bit_length(std::uint64_t v) { return v == 0 ? 0 : 64 - __builtin_clzll(v); }

mpz_class mpz_from_i64(std::int64_t v) {
    mpz_class z;
    mpz_set_si(z.get_mpz_t(), static_cast<long>(v));
    return z;
}

bool mpz_fits_i64(const mpz_class& z) {
    return mpz_sizeinbase(z.get_mpz_t(), 2) <= 63;
}

std::int64_t mpz_to_i64(const mpz_class& z) { return static_cast<std::int64_t>(mpz_get_si(z.get_mpz_t())); }

}  // namespace

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

Rational::Rational(std::int64_t value) {
    if (value == std::numeric_limits<std::int64_t>::min()) {
        assign_big(mpq_class(mpz_from_i64(value)));
    } else {
        num_ = value;
    }
}

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw InvalidInput("rational with zero denominator");
    if (num == std::numeric_limits<std::int64_t>::min() || den == std::numeric_limits<std::int64_t>::min()) {
        mpq_class q(mpz_from_i64(num), mpz_from_i64(den));
        q.canonicalize();
        assign_big(std::move(q));
        return;
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Rational::Rational(const mpq_class& value) {
    mpq_class q(value);
    q.canonicalize();
    assign_big(std::move(q));
}

Rational::Rational(const mpz_class& value) { assign_big(mpq_class(value)); }

void Rational::assign_big(mpq_class value) {
    if (mpz_fits_i64(value.get_num()) && mpz_fits_i64(value.get_den())) {
        num_ = mpz_to_i64(value.get_num());
        den_ = mpz_to_i64(value.get_den());
        big_.reset();
    } else {
        big_ = std::make_shared<const mpq_class>(std::move(value));
    }
}

Rational Rational::parse(std::string_view text) {
    auto is_int = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (start == s.size()) return false;
        return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                           [](char c) { return c >= '0' && c <= '9'; });
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!is_int(num) || !is_int(den) || den.find_first_of("+-") != std::string_view::npos)
        throw ParseError("malformed rational '" + std::string(text) + "'");
    mpz_class p{std::string(num[0] == '+' ? num.substr(1) : num)};
    mpz_class q{std::string(den)};
    if (q == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    mpq_class r(p, q);
    r.canonicalize();
    Rational out;
    out.assign_big(std::move(r));
    return out;
}

Rational Rational::pow2(long exponent) {
    if (exponent >= 0 && exponent <= 62) return Rational(std::int64_t{1} << exponent);
    if (exponent < 0 && exponent >= -62) return Rational(1, std::int64_t{1} << (-exponent));
    mpz_class p = 1;
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent >= 0 ? exponent : -exponent));
    return exponent >= 0 ? Rational(p) : Rational(mpq_class(mpz_class(1), p));
}

std::string Rational::str() const {
    if (big_) return big_->get_str();
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::to_decimal(int significant) const {
    if (significant < 1) significant = 1;
    mpq_class q = to_mpq();
    if (q == 0) return "0";
    bool negative = q < 0;
    if (negative) q = -q;
    // Find e with 10^e <= q < 10^(e+1).
    long e = static_cast<long>(mpz_sizeinbase(q.get_num().get_mpz_t(), 10)) -
             static_cast<long>(mpz_sizeinbase(q.get_den().get_mpz_t(), 10));
    auto pow10 = [](long k) {
        mpz_class r;
        mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(k));
        return r;
    };
    auto scaled = [&](long exp10) {
        return exp10 >= 0 ? mpq_class(q.get_num(), q.get_den() * pow10(exp10))
                          : mpq_class(q.get_num() * pow10(-exp10), q.get_den());
    };
    for (int guard = 0; guard < 4; ++guard) {
        mpq_class s = scaled(e);
        if (s >= 10) ++e;
        else if (s < 1) --e;
        else break;
    }
    // digits = round(q * 10^(significant-1-e))
    long shift = significant - 1 - e;
    mpq_class s = scaled(-shift);
    mpz_class digits = (s.get_num() * 2 + s.get_den()) / (s.get_den() * 2);
    std::string ds = digits.get_str();
    if (static_cast<int>(ds.size()) > significant) {  // rounding carried into a new digit
        ++e;
        --shift;
        ds.pop_back();
    }
    std::string out = negative ? "-" : "";
    long point = static_cast<long>(ds.size()) - shift;  // digits before the decimal point
    if (point <= 0) {
        out += "0." + std::string(static_cast<std::size_t>(-point), '0') + ds;
    } else if (point >= static_cast<long>(ds.size())) {
        out += ds + std::string(static_cast<std::size_t>(point - static_cast<long>(ds.size())), '0');
    } else {
        out += ds.substr(0, static_cast<std::size_t>(point)) + "." + ds.substr(static_cast<std::size_t>(point));
    }
    return out;
}

double Rational::to_double() const {
    if (big_) return big_->get_d();
    return static_cast<double>(num_) / static_cast<double>(den_);
}

int Rational::sign() const {
    if (big_) return sgn(*big_);
    return (num_ > 0) - (num_ < 0);
}

bool Rational::is_integer() const {
    if (big_) return big_->get_den() == 1;
    return den_ == 1;
}

mpz_class Rational::numerator() const { return big_ ? mpz_class(big_->get_num()) : mpz_from_i64(num_); }
mpz_class Rational::denominator() const { return big_ ? mpz_class(big_->get_den()) : mpz_from_i64(den_); }

mpq_class Rational::to_mpq() const {
    if (big_) return *big_;
    return mpq_class(mpz_from_i64(num_), mpz_from_i64(den_));
}

Rational Rational::abs() const { return sign() < 0 ? -*this : *this; }

Rational Rational::reciprocal() const {
    if (is_zero()) throw InvalidInput("reciprocal of zero");
    if (big_) return Rational(mpq_class(big_->get_den(), big_->get_num()));
    return Rational(den_, num_);
}

Rational Rational::floor() const {
    if (big_) {
        mpz_class f;
        mpz_fdiv_q(f.get_mpz_t(), big_->get_num().get_mpz_t(), big_->get_den().get_mpz_t());
        return Rational(f);
    }
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return Rational(q);
}

Rational Rational::ceil() const { return -((-*this).floor()); }

long Rational::floor_log2() const {
    if (sign() <= 0) throw InvalidInput("floor_log2 of non-positive value");
    if (!big_) {
        int z0 = bit_length(static_cast<std::uint64_t>(num_)) - bit_length(static_cast<std::uint64_t>(den_));
        bool at_least = z0 >= 0 ? static_cast<i128>(num_) >= (static_cast<i128>(den_) << z0)
                                : (static_cast<i128>(num_) << (-z0)) >= static_cast<i128>(den_);
        return at_least ? z0 : z0 - 1;
    }
    const mpz_class& p = big_->get_num();
    const mpz_class& q = big_->get_den();
    long z0 = static_cast<long>(mpz_sizeinbase(p.get_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2));
    mpz_class lhs = p, rhs = q;
    if (z0 >= 0) mpz_mul_2exp(rhs.get_mpz_t(), rhs.get_mpz_t(), static_cast<mp_bitcnt_t>(z0));
    else mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(-z0));
    return lhs >= rhs ? z0 : z0 - 1;
}

Rational& Rational::operator+=(const Rational& rhs) {
    if (!big_ && !rhs.big_) {
        if (den_ == 1 && rhs.den_ == 1) {
            i128 s = static_cast<i128>(num_) + rhs.num_;
            if (fits(s)) {
                num_ = static_cast<std::int64_t>(s);
                return *this;
            }
        }
        std::int64_t g = std::gcd(den_, rhs.den_);
        i128 num = static_cast<i128>(num_) * (rhs.den_ / g) + static_cast<i128>(rhs.num_) * (den_ / g);
        i128 den = static_cast<i128>(den_) * (rhs.den_ / g);
        i128 h = gcd128(num, den);
        if (h > 1) {
            num /= h;
            den /= h;
        }
        if (fits(num) && fits(den)) {
            num_ = static_cast<std::int64_t>(num);
            den_ = static_cast<std::int64_t>(den);
            return *this;
        }
    }
    assign_big(to_mpq() + rhs.to_mpq());
    return *this;
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
    if (!big_ && !rhs.big_) {
        std::int64_t g1 = std::gcd(num_, rhs.den_);
        std::int64_t g2 = std::gcd(rhs.num_, den_);
        if (g1 == 0) g1 = 1;
        if (g2 == 0) g2 = 1;
        i128 num = static_cast<i128>(num_ / g1) * (rhs.num_ / g2);
        i128 den = static_cast<i128>(den_ / g2) * (rhs.den_ / g1);
        if (fits(num) && fits(den)) {
            num_ = static_cast<std::int64_t>(num);
            den_ = num == 0 ? 1 : static_cast<std::int64_t>(den);
            return *this;
        }
    }
    assign_big(to_mpq() * rhs.to_mpq());
    return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
    if (rhs.is_zero()) throw InvalidInput("division by zero");
    return *this *= rhs.reciprocal();
}

Rational Rational::operator-() const {
    Rational r;
    if (big_) {
        r.assign_big(-*big_);
    } else {
        r.num_ = -num_;
        r.den_ = den_;
    }
    return r;
}

bool operator==(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) return a.num_ == b.num_ && a.den_ == b.den_;
    if (!a.big_ || !b.big_) return false;  // canonical forms differ in size class
    return *a.big_ == *b.big_;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
        i128 l = static_cast<i128>(a.num_) * b.den_;
        i128 r = static_cast<i128>(b.num_) * a.den_;
        return l <=> r;
    }
    int c = cmp(a.to_mpq(), b.to_mpq());
    return c <=> 0;
}

std::size_t Rational::hash() const {
    if (!big_) {
        std::size_t h = std::hash<std::int64_t>{}(num_);
        return h ^ (std::hash<std::int64_t>{}(den_) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
    return std::hash<std::string>{}(big_->get_str());
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace fairdiv
