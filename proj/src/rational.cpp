#include "bgidx/rational.hpp"

#include "bgidx/errors.hpp"

#include <charconv>
#include <compare>
#include <limits>
#include <ostream>

namespace bgidx {

namespace {

__int128 gcd_wide(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

Rational Rational::from_wide(__int128 num, __int128 den) {
    if (den == 0) {
        throw DomainError("rational with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const __int128 g = gcd_wide(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    constexpr auto lo = std::numeric_limits<std::int64_t>::min();
    constexpr auto hi = std::numeric_limits<std::int64_t>::max();
    if (num < lo || num > hi || den > hi) {
        throw NumericalError("rational arithmetic overflow");
    }
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
}

Rational::Rational(std::int64_t num, std::int64_t den) { *this = from_wide(num, den); }

Rational Rational::parse(std::string_view text) {
    auto fail = [&] { return DomainError("not a rational number: '" + std::string(text) + "'"); };
    if (text.empty()) {
        throw fail();
    }
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        std::int64_t p = 0;
        std::int64_t q = 0;
        const auto a = text.substr(0, slash);
        const auto b = text.substr(slash + 1);
        const auto ra = std::from_chars(a.data(), a.data() + a.size(), p);
        const auto rb = std::from_chars(b.data(), b.data() + b.size(), q);
        if (ra.ec != std::errc{} || ra.ptr != a.data() + a.size() || rb.ec != std::errc{} ||
            rb.ptr != b.data() + b.size() || q == 0) {
            throw fail();
        }
        return Rational(p, q);
    }
    std::size_t i = 0;
    bool negative = false;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        ++i;
    }
    __int128 num = 0;
    __int128 den = 1;
    bool digits = false;
    bool point = false;
    for (; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == '.' && !point) {
            point = true;
            continue;
        }
        if (ch < '0' || ch > '9') {
            throw fail();
        }
        digits = true;
        num = num * 10 + (ch - '0');
        if (point) {
            den *= 10;
        }
        if (num > (__int128{1} << 100) || den > (__int128{1} << 100)) {
            throw NumericalError("rational literal too long: '" + std::string(text) + "'");
        }
    }
    if (!digits) {
        throw fail();
    }
    return from_wide(negative ? -num : num, den);
}

double Rational::to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    return Rational::from_wide(__int128{a.num_} * b.den_ + __int128{b.num_} * a.den_,
                               __int128{a.den_} * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
    return Rational::from_wide(__int128{a.num_} * b.num_, __int128{a.den_} * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) {
        throw DomainError("rational division by zero");
    }
    return Rational::from_wide(__int128{a.num_} * b.den_, __int128{a.den_} * b.num_);
}

Rational Rational::operator-() const { return from_wide(-__int128{num_}, den_); }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 l = __int128{a.num_} * b.den_;
    const __int128 r = __int128{b.num_} * a.den_;
    return l <=> r;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace bgidx
