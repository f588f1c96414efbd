#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace cct {

/// All bound arithmetic is exact. Rationals are GMP mpq values kept in
/// canonical form; Probability is a Rational restricted to [0,1] at the
/// points where the restriction is an invariant (constraint endpoints,
/// interpretation masses), not a separate type.
using Rational = mpq_class;
using Probability = Rational;

inline Rational rat(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline bool in_unit_interval(const Rational& q) {
    return q >= 0 && q <= 1;
}

/// Parses "p/q", "p", or a decimal literal ("0.85" -> 17/20) exactly.
inline std::optional<Rational> parse_rational(std::string_view text) {
    std::string s(text);
    if (s.empty()) return std::nullopt;
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        if (num.empty() || den.empty()) return std::nullopt;
        try {
            mpz_class n(num, 10), d(den, 10);
            if (d == 0) return std::nullopt;
            Rational q(n, d);
            q.canonicalize();
            return q;
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    }
    auto dot = s.find('.');
    std::string digits = s;
    std::size_t frac_len = 0;
    if (dot != std::string::npos) {
        frac_len = s.size() - dot - 1;
        digits = s.substr(0, dot) + s.substr(dot + 1);
        if (digits.empty() || digits == "-" || digits == "+") return std::nullopt;
    }
    for (std::size_t i = 0; i < digits.size(); ++i) {
        char c = digits[i];
        if (i == 0 && (c == '-' || c == '+')) continue;
        if (c < '0' || c > '9') return std::nullopt;
    }
    try {
        mpz_class num(digits, 10);
        mpz_class den = 1;
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        Rational q(num, den);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

inline std::string to_string(const Rational& q) {
    std::ostringstream os;
    os << q.get_num();
    if (q.get_den() != 1) os << '/' << q.get_den();
    return os.str();
}

/// Round-half-up decimal rendering with `places` digits, e.g. 169/10000 -> "0.0169".
/// Used for display only; rationals are the authoritative values.
inline std::string to_decimal(const Rational& q, int places = 4) {
    mpz_class scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    bool neg = q < 0;
    Rational a = neg ? Rational(-q) : q;
    // round(a * scale) with ties up
    mpz_class num = a.get_num() * scale * 2 + a.get_den();
    mpz_class scaled = num / (a.get_den() * 2);
    mpz_class ip = scaled / scale, fp = scaled % scale;
    std::string out = ip.get_str();
    if (places > 0) {
        std::string frac = fp.get_str();
        frac.insert(frac.begin(), places - frac.size(), '0');
        out += "." + frac;
    }
    if (neg && scaled != 0) out.insert(out.begin(), '-');
    return out;
}

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace cct
