#include "actmc/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace actmc {

namespace {

Integer pow10(unsigned long e) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
    return r;
}

Rational parse_decimal(const std::string& s) {
    size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    std::string digits;
    long frac = 0;
    bool seen_digit = false, seen_point = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits += c;
            seen_digit = true;
            if (seen_point) ++frac;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw std::invalid_argument("not a number: '" + s + "'");
    long exp10 = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw std::invalid_argument("not a number: '" + s + "'");
        ++i;
        std::string e = s.substr(i);
        if (e.empty()) throw std::invalid_argument("not a number: '" + s + "'");
        size_t used = 0;
        try {
            exp10 = std::stol(e, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("not a number: '" + s + "'");
        }
        if (used != e.size()) throw std::invalid_argument("not a number: '" + s + "'");
    }
    Rational r(Integer(digits, 10));
    long shift = exp10 - frac;
    if (shift >= 0)
        r *= pow10(static_cast<unsigned long>(shift));
    else
        r /= pow10(static_cast<unsigned long>(-shift));
    r.canonicalize();
    return neg ? Rational(-r) : r;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\n\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\n\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Rational frac(const Integer& n, const Integer& d) {
    Rational r(n, d);
    r.canonicalize();
    return r;
}

Rational parse_rational(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty number");
    auto slash = s.find('/');
    if (slash == std::string::npos) return parse_decimal(s);
    Rational num = parse_decimal(trim(s.substr(0, slash)));
    Rational den = parse_decimal(trim(s.substr(slash + 1)));
    if (den == 0) throw std::invalid_argument("zero denominator: '" + s + "'");
    Rational r = num / den;
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

long log10_floor(const Rational& q) {
    Rational a = abs(q);
    // Start from a bit-length estimate, then correct exactly.
    long bits = static_cast<long>(mpz_sizeinbase(a.get_num_mpz_t(), 2)) -
                static_cast<long>(mpz_sizeinbase(a.get_den_mpz_t(), 2));
    long e = static_cast<long>(static_cast<double>(bits) * 0.30102999566398120);
    auto p10 = [](long k) {
        Rational r(1);
        if (k >= 0)
            r = Rational(pow10(static_cast<unsigned long>(k)));
        else
            r = Rational(Integer(1), pow10(static_cast<unsigned long>(-k)));
        return r;
    };
    while (a < p10(e)) --e;
    while (a >= p10(e + 1)) ++e;
    return e;
}

std::string to_decimal(const Rational& q, int digits) {
    if (q == 0) return "0";
    if (digits < 1) digits = 1;
    bool neg = q < 0;
    Rational a = abs(q);
    long e = log10_floor(a);
    // mantissa = round(a * 10^(digits-1-e))
    long shift = digits - 1 - e;
    Rational scaled = a;
    if (shift >= 0)
        scaled *= pow10(static_cast<unsigned long>(shift));
    else
        scaled /= pow10(static_cast<unsigned long>(-shift));
    Integer m = floor(scaled + Rational(1, 2));
    std::string ms = m.get_str();
    if (static_cast<int>(ms.size()) > digits) {  // rounding carried into a new digit
        ++e;
        ms.pop_back();
    }
    std::string out;
    if (e >= -5 && e < digits) {
        if (e >= 0) {
            std::string ip = ms.substr(0, static_cast<size_t>(e) + 1);
            std::string fp = ms.substr(static_cast<size_t>(e) + 1);
            while (!fp.empty() && fp.back() == '0') fp.pop_back();
            out = fp.empty() ? ip : ip + "." + fp;
        } else {
            std::string fp = std::string(static_cast<size_t>(-e - 1), '0') + ms;
            while (!fp.empty() && fp.back() == '0') fp.pop_back();
            out = "0." + fp;
        }
    } else {
        std::string fp = ms.substr(1);
        while (!fp.empty() && fp.back() == '0') fp.pop_back();
        out = ms.substr(0, 1) + (fp.empty() ? "" : "." + fp) + "e" + std::to_string(e);
    }
    return neg ? "-" + out : out;
}

double to_double(const Rational& q) { return q.get_d(); }

Integer floor(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Integer ceil(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

long ceil_log2(const Rational& q) {
    Rational a = abs(q);
    long e = static_cast<long>(mpz_sizeinbase(a.get_num_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(a.get_den_mpz_t(), 2));
    while (a > dyadic(1, e)) ++e;
    while (a <= dyadic(1, e - 1)) --e;
    return e;
}

Rational dyadic(const Integer& m, long e) {
    Rational r(m);
    if (e >= 0)
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    else
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    return r;
}

Rational pow(const Rational& q, unsigned long e) {
    Rational r;
    mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), e);
    mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), e);
    r.canonicalize();
    return r;
}

Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Integer mul_div_floor(const Integer& a, const Integer& n, const Integer& d) {
    Integer t = a * n;
    mpz_fdiv_q(t.get_mpz_t(), t.get_mpz_t(), d.get_mpz_t());
    return t;
}

Integer mul_div_ceil(const Integer& a, const Integer& n, const Integer& d) {
    Integer t = a * n;
    mpz_cdiv_q(t.get_mpz_t(), t.get_mpz_t(), d.get_mpz_t());
    return t;
}

Integer to_fixed_floor(const Rational& q, long prec) { return floor(dyadic(1, prec) * q); }
Integer to_fixed_ceil(const Rational& q, long prec) { return ceil(dyadic(1, prec) * q); }

Integer common_denominator(const std::vector<Rational>& v) {
    Integer l = 1;
    for (const auto& q : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    return l;
}

}  // namespace actmc
