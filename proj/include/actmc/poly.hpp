#pragma once

#include "actmc/expbracket.hpp"
#include "actmc/rational.hpp"

#include <string>
#include <vector>

namespace actmc {

// Univariate polynomial with rational coefficients, c[i] is the coefficient of d^i.
class RationalPoly {
public:
    RationalPoly() = default;
    explicit RationalPoly(std::vector<Rational> coeffs);
    static RationalPoly constant(const Rational& c);
    static RationalPoly monomial(const Rational& c, size_t degree);

    bool is_zero() const { return c_.empty(); }
    // -1 for the zero polynomial
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    const std::vector<Rational>& coeffs() const { return c_; }
    Rational coeff(size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
    const Rational& leading() const { return c_.back(); }

    Rational operator()(const Rational& d) const;
    // Fixed-point interval Horner; lo <= p(d) <= hi and hi - lo <= tol.
    Bracket eval_bracket(const Rational& d, const Rational& tol) const;
    RationalPoly derivative() const;
    // antiderivative with zero constant term
    RationalPoly integral() const;
    // p(d + a)
    RationalPoly shifted(const Rational& a) const;

    RationalPoly& operator+=(const RationalPoly& o);
    RationalPoly& operator-=(const RationalPoly& o);
    RationalPoly& operator*=(const Rational& s);

    friend RationalPoly operator+(RationalPoly a, const RationalPoly& b) { return a += b; }
    friend RationalPoly operator-(RationalPoly a, const RationalPoly& b) { return a -= b; }
    friend RationalPoly operator*(RationalPoly a, const Rational& s) { return a *= s; }
    friend RationalPoly operator*(const Rational& s, RationalPoly a) { return a *= s; }
    friend RationalPoly operator*(const RationalPoly& a, const RationalPoly& b);
    friend bool operator==(const RationalPoly& a, const RationalPoly& b) { return a.c_ == b.c_; }

    std::string to_string(const std::string& var = "d") const;

private:
    void trim();
    std::vector<Rational> c_;
};

// Quotient and remainder of polynomial division (b nonzero).
void divmod(const RationalPoly& a, const RationalPoly& b, RationalPoly& q, RationalPoly& r);
RationalPoly gcd(const RationalPoly& a, const RationalPoly& b);  // monic
RationalPoly square_free_part(const RationalPoly& p);            // monic

// e^{-r d} V(d), plain V(d), or V(d)/d.
class ExpPoly {
public:
    enum class Form { Plain, Exp, OverD };

    ExpPoly() = default;
    static ExpPoly plain(RationalPoly v);
    static ExpPoly exp(Rational rate, RationalPoly v);
    static ExpPoly over_d(RationalPoly v);

    Form form() const { return form_; }
    const Rational& rate() const { return rate_; }
    const RationalPoly& poly() const { return v_; }

    // Exact for Plain/OverD; for Exp the exponential is bracketed to width `tol`.
    Bracket eval(const Rational& d, const Rational& tol) const;
    // Derivative (Plain/Exp stay in their form); OverD throws.
    ExpPoly derivative() const;
    // Polynomial whose sign equals the sign of the derivative for d > 0.
    RationalPoly derivative_sign_poly() const;

    ExpPoly& operator+=(const ExpPoly& o);
    ExpPoly& operator*=(const Rational& s);

private:
    Form form_ = Form::Plain;
    Rational rate_;
    RationalPoly v_;
};

}  // namespace actmc
