#include "actmc/poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace actmc {

RationalPoly::RationalPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

RationalPoly RationalPoly::constant(const Rational& c) { return RationalPoly({c}); }

RationalPoly RationalPoly::monomial(const Rational& c, size_t degree) {
    std::vector<Rational> v(degree + 1);
    v[degree] = c;
    return RationalPoly(std::move(v));
}

void RationalPoly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rational RationalPoly::operator()(const Rational& d) const {
    if (c_.empty()) return 0;
    // integer Horner for den * b^n * p(a / b), one normalization at the end
    Integer den = common_denominator(c_);
    const Integer &a = d.get_num(), &b = d.get_den();
    auto scaled = [&](const Rational& c) { return Integer(c.get_num() * (den / c.get_den())); };
    size_t n = c_.size() - 1;
    Integer acc = scaled(c_[n]), bp = 1;
    for (size_t i = n; i-- > 0;) {
        bp *= b;
        acc *= a;
        acc += scaled(c_[i]) * bp;
    }
    return Rational(acc) / (Rational(den) * Rational(bp));
}

Bracket RationalPoly::eval_bracket(const Rational& d, const Rational& tol) const {
    if (c_.empty()) return {0, 0};
    long grow = degree() * std::max(0L, ceil_log2(abs(d) + 1));
    for (long prec = 32 + grow + std::max(0L, -ceil_log2(tol));; prec += 64) {
        Integer dl = to_fixed_floor(d, prec), dh = to_fixed_ceil(d, prec);
        Integer lo = to_fixed_floor(c_.back(), prec), hi = to_fixed_ceil(c_.back(), prec);
        Integer p[4];
        for (size_t i = c_.size() - 1; i-- > 0;) {
            p[0] = lo * dl;
            p[1] = lo * dh;
            p[2] = hi * dl;
            p[3] = hi * dh;
            const Integer* mn = &p[0];
            const Integer* mx = &p[0];
            for (const auto& x : p) {
                if (x < *mn) mn = &x;
                if (x > *mx) mx = &x;
            }
            mpz_fdiv_q_2exp(lo.get_mpz_t(), mn->get_mpz_t(), static_cast<mp_bitcnt_t>(prec));
            mpz_cdiv_q_2exp(hi.get_mpz_t(), mx->get_mpz_t(), static_cast<mp_bitcnt_t>(prec));
            lo += to_fixed_floor(c_[i], prec);
            hi += to_fixed_ceil(c_[i], prec);
        }
        Bracket b{dyadic(lo, -prec), dyadic(hi, -prec)};
        if (b.hi - b.lo <= tol) return b;
    }
}

RationalPoly RationalPoly::derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Rational> v(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) v[i - 1] = c_[i] * static_cast<unsigned long>(i);
    return RationalPoly(std::move(v));
}

RationalPoly RationalPoly::integral() const {
    if (c_.empty()) return {};
    std::vector<Rational> v(c_.size() + 1);
    for (size_t i = 0; i < c_.size(); ++i) v[i + 1] = c_[i] / static_cast<unsigned long>(i + 1);
    return RationalPoly(std::move(v));
}

RationalPoly RationalPoly::shifted(const Rational& a) const {
    std::vector<Rational> v = c_;
    size_t n = v.size();
    for (size_t i = 0; i + 1 < n; ++i)
        for (size_t j = n - 1; j-- > i;) v[j] += a * v[j + 1];
    return RationalPoly(std::move(v));
}

RationalPoly& RationalPoly::operator+=(const RationalPoly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
}

RationalPoly& RationalPoly::operator-=(const RationalPoly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
}

RationalPoly& RationalPoly::operator*=(const Rational& s) {
    if (s == 0) {
        c_.clear();
        return *this;
    }
    for (auto& x : c_) x *= s;
    return *this;
}

RationalPoly operator*(const RationalPoly& a, const RationalPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> v(a.c_.size() + b.c_.size() - 1);
    for (size_t i = 0; i < a.c_.size(); ++i) {
        if (a.c_[i] == 0) continue;
        for (size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
    }
    return RationalPoly(std::move(v));
}

std::string RationalPoly::to_string(const std::string& var) const {
    if (c_.empty()) return "0";
    std::string out;
    for (size_t i = c_.size(); i-- > 0;) {
        if (c_[i] == 0) continue;
        std::string coef = actmc::to_string(abs(c_[i]));
        if (!out.empty())
            out += c_[i] < 0 ? " - " : " + ";
        else if (c_[i] < 0)
            out += "-";
        if (i == 0)
            out += coef;
        else {
            if (abs(c_[i]) != 1) out += coef + "*";
            out += var;
            if (i > 1) out += "^" + std::to_string(i);
        }
    }
    return out;
}

void divmod(const RationalPoly& a, const RationalPoly& b, RationalPoly& q, RationalPoly& r) {
    if (b.is_zero()) throw std::domain_error("polynomial division by zero");
    std::vector<Rational> rem = a.coeffs();
    long db = b.degree();
    long da = a.degree();
    std::vector<Rational> quo(da >= db ? static_cast<size_t>(da - db + 1) : 0);
    for (long k = da - db; k >= 0; --k) {
        Rational f = rem[static_cast<size_t>(k + db)] / b.leading();
        quo[static_cast<size_t>(k)] = f;
        if (f == 0) continue;
        for (long j = 0; j <= db; ++j) rem[static_cast<size_t>(k + j)] -= f * b.coeffs()[static_cast<size_t>(j)];
    }
    if (db > 0)
        rem.resize(static_cast<size_t>(std::min(da + 1, db)));
    else
        rem.clear();
    q = RationalPoly(std::move(quo));
    r = RationalPoly(std::move(rem));
}

namespace {
RationalPoly monic(RationalPoly p) {
    if (p.is_zero()) return p;
    Rational l = p.leading();
    return p * (1 / l);
}
}  // namespace

RationalPoly gcd(const RationalPoly& a, const RationalPoly& b) {
    RationalPoly x = a, y = b;
    while (!y.is_zero()) {
        RationalPoly q, r;
        divmod(x, y, q, r);
        x = std::move(y);
        y = monic(std::move(r));
    }
    return monic(x);
}

RationalPoly square_free_part(const RationalPoly& p) {
    if (p.degree() <= 0) return monic(p);
    RationalPoly g = gcd(p, p.derivative());
    RationalPoly q, r;
    divmod(p, g, q, r);
    return monic(q);
}

ExpPoly ExpPoly::plain(RationalPoly v) {
    ExpPoly e;
    e.form_ = Form::Plain;
    e.v_ = std::move(v);
    return e;
}

ExpPoly ExpPoly::exp(Rational rate, RationalPoly v) {
    if (rate < 0) throw std::invalid_argument("ExpPoly: negative rate");
    ExpPoly e;
    e.form_ = rate == 0 ? Form::Plain : Form::Exp;
    e.rate_ = rate;
    e.v_ = std::move(v);
    return e;
}

ExpPoly ExpPoly::over_d(RationalPoly v) {
    ExpPoly e;
    e.form_ = Form::OverD;
    e.v_ = std::move(v);
    return e;
}

Bracket ExpPoly::eval(const Rational& d, const Rational& tol) const {
    switch (form_) {
        case Form::Plain: {
            Rational x = v_(d);
            return {x, x};
        }
        case Form::OverD: {
            if (d <= 0) throw std::domain_error("V(d)/d evaluated at d <= 0");
            Rational x = v_(d) / d;
            return {x, x};
        }
        case Form::Exp: {
            Rational v = v_(d);
            if (v == 0) return {Rational(0), Rational(0)};
            Bracket e = exp_bracket(-rate_ * d, tol / (abs(v) + 1));
            if (v > 0) return {e.lo * v, e.hi * v};
            return {e.hi * v, e.lo * v};
        }
    }
    return {};
}

ExpPoly ExpPoly::derivative() const {
    switch (form_) {
        case Form::Plain: return plain(v_.derivative());
        case Form::Exp: return exp(rate_, v_.derivative() - v_ * rate_);
        case Form::OverD: break;
    }
    throw std::logic_error("derivative of V(d)/d is not an ExpPoly; use derivative_sign_poly");
}

RationalPoly ExpPoly::derivative_sign_poly() const {
    switch (form_) {
        case Form::Plain: return v_.derivative();
        case Form::Exp: return v_.derivative() - v_ * rate_;
        case Form::OverD: return v_.derivative() * RationalPoly({Rational(0), Rational(1)}) - v_;
    }
    return {};
}

ExpPoly& ExpPoly::operator+=(const ExpPoly& o) {
    if (o.v_.is_zero()) return *this;
    if (v_.is_zero()) return *this = o;
    if (form_ != o.form_ || (form_ == Form::Exp && rate_ != o.rate_))
        throw std::logic_error("ExpPoly: adding mixed forms");
    v_ += o.v_;
    return *this;
}

ExpPoly& ExpPoly::operator*=(const Rational& s) {
    v_ *= s;
    return *this;
}

}  // namespace actmc
