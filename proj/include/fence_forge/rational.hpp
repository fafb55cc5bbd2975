#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "fence_forge/errors.hpp"

namespace ff {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

inline Integer num(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer den(const Rational& q) { return boost::multiprecision::denominator(q); }

inline Rational frac(long long p, long long q) { return Rational(p) / Rational(q); }

/// 2^{-e}; e may be negative.
inline Rational pow2neg(int e) {
    if (e >= 0) return Rational(1) / Rational(Integer(1) << e);
    return Rational(Integer(1) << (-e));
}

inline Rational rpow(const Rational& base, unsigned e) {
    Rational out = 1, b = base;
    while (e) {
        if (e & 1U) out *= b;
        e >>= 1U;
        if (e) b *= b;
    }
    return out;
}

inline Rational rabs(const Rational& q) { return q < 0 ? Rational(-q) : q; }
inline const Rational& rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline const Rational& rmin(const Rational& a, const Rational& b) { return b < a ? b : a; }

/// Canonical "p/q" form; the denominator is always written ("0/1", "1/1").
inline std::string to_string(const Rational& q) {
    return num(q).str() + "/" + den(q).str();
}

inline Rational parse_rational(std::string_view s) {
    auto bad = [&] { return Error(ErrorKind::ParseError, "not a rational: '" + std::string(s) + "'"); };
    if (s.empty()) throw bad();
    auto digits_ok = [](std::string_view d, bool sign) {
        std::size_t i = 0;
        if (sign && !d.empty() && (d[0] == '-' || d[0] == '+')) i = 1;
        if (i >= d.size()) return false;
        for (; i < d.size(); ++i)
            if (d[i] < '0' || d[i] > '9') return false;
        return true;
    };
    auto slash = s.find('/');
    std::string_view p = s.substr(0, slash);
    std::string_view q = slash == std::string_view::npos ? std::string_view("1") : s.substr(slash + 1);
    if (!digits_ok(p, true) || !digits_ok(q, false)) throw bad();
    std::string ps(p);
    if (ps[0] == '+') ps.erase(0, 1);
    Integer pi(ps), qi{std::string(q)};
    if (qi == 0) throw bad();
    return Rational(pi) / Rational(qi);
}

/// Fixed-point decimal with `digits` fractional digits, rounded half away from zero.
inline std::string to_decimal(const Rational& q, int digits) {
    Integer scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    bool neg = q < 0;
    Rational a = neg ? Rational(-q) : q;
    Rational scaled = a * Rational(scale) + Rational(1) / 2;
    Integer n = num(scaled) / den(scaled);
    Integer ip = n / scale, fp = n % scale;
    std::string f = fp.str();
    if (static_cast<int>(f.size()) < digits) f.insert(0, static_cast<std::size_t>(digits) - f.size(), '0');
    std::string out = (neg && n != 0 ? "-" : "") + ip.str();
    if (digits > 0) out += "." + f;
    return out;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Exponent e when q == 2^{-e} exactly, otherwise -1.
inline int dyadic_exponent(const Rational& q) {
    if (num(q) != 1) return -1;
    Integer d = den(q);
    int e = 0;
    while (d > 1) {
        if ((d & 1) != 0) return -1;
        d >>= 1;
        ++e;
    }
    return e;
}

}  // namespace ff
