#include "rdmc/exact.hpp"

#include "rdmc/error.hpp"

#include <boost/multiprecision/integer.hpp>

#include <cctype>
#include <cmath>
#include <sstream>

namespace rdmc {

namespace mp = boost::multiprecision;

int sign(const Rational& r) { return r.sign(); }
int sign(const Integer& i) { return i.sign(); }

namespace {

Integer isqrt_int(const Integer& v)
{
    if (v <= 0) return 0;
    return mp::sqrt(v);
}

bool is_square_int(const Integer& v)
{
    if (v < 0) return false;
    Integer s = isqrt_int(v);
    return s * s == v;
}

}  // namespace

Integer floor_div(const Rational& r)
{
    Integer n = mp::numerator(r);
    Integer d = mp::denominator(r);
    Integer q = n / d;  // truncates toward zero
    if (n % d != 0 && n < 0) q -= 1;
    return q;
}

Integer ceil_div(const Rational& r)
{
    Integer n = mp::numerator(r);
    Integer d = mp::denominator(r);
    Integer q = n / d;
    if (n % d != 0 && n > 0) q += 1;
    return q;
}

Integer isqrt_floor(const Rational& r)
{
    require(r >= 0, ErrorCode::InvalidArgument, "isqrt of negative rational");
    return isqrt_int(floor_div(r));
}

bool is_perfect_square(const Rational& r)
{
    if (r < 0) return false;
    return is_square_int(mp::numerator(r)) && is_square_int(mp::denominator(r));
}

Rational exact_sqrt(const Rational& r)
{
    require(is_perfect_square(r), ErrorCode::Internal, "exact_sqrt of non-square");
    return Rational(isqrt_int(mp::numerator(r)), isqrt_int(mp::denominator(r)));
}

std::string to_string(const Rational& r)
{
    std::ostringstream os;
    os << mp::numerator(r);
    if (mp::denominator(r) != 1) os << '/' << mp::denominator(r);
    return os.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

// ---------------------------------------------------------------- Surd

Surd::Surd(Rational coef) : coef_(std::move(coef)) {}

Surd::Surd(Rational coef, Rational radicand) : coef_(std::move(coef)), radicand_(std::move(radicand))
{
    require(radicand_ >= 0, ErrorCode::InvalidArgument, "square root of a negative number");
    normalize();
}

Surd Surd::sqrt_of(const Rational& r) { return Surd(Rational(1), r); }

void Surd::normalize()
{
    if (coef_ == 0 || radicand_ == 0) {
        coef_ = 0;
        radicand_ = 1;
        return;
    }
    // sqrt(p/q) = sqrt(p*q)/q, then pull small square factors out.
    Integer p = mp::numerator(radicand_);
    Integer q = mp::denominator(radicand_);
    Integer m = p * q;
    coef_ /= Rational(q);
    if (is_square_int(m)) {
        coef_ *= Rational(isqrt_int(m));
        radicand_ = 1;
        return;
    }
    Integer pulled = 1;
    for (unsigned f = 2; f <= 1000; ++f) {
        const Integer f2 = Integer(f) * f;
        if (f2 > m) break;
        while (m % f2 == 0) {
            m /= f2;
            pulled *= f;
        }
    }
    coef_ *= Rational(pulled);
    radicand_ = Rational(m);
}

double Surd::to_double() const
{
    return rdmc::to_double(coef_) * std::sqrt(rdmc::to_double(radicand_));
}

bool Surd::same_radical(const Surd& other) const
{
    if (is_zero() || other.is_zero()) return true;
    return is_perfect_square(radicand_ * other.radicand_);
}

Rational Surd::ratio_on_radical(const Surd& other) const
{
    // other = c2 sqrt(r2) = c2 sqrt(r2/r1) sqrt(r1)
    if (other.is_zero()) return 0;
    require(same_radical(other), ErrorCode::Internal, "radicals differ");
    if (is_zero()) return other.coef_;
    return other.coef_ * exact_sqrt(other.radicand_ / radicand_);
}

Surd operator*(const Surd& a, const Surd& b)
{
    return Surd(a.coef_ * b.coef_, a.radicand_ * b.radicand_);
}

Surd operator/(const Surd& a, const Surd& b)
{
    require(!b.is_zero(), ErrorCode::InvalidArgument, "division by zero");
    // a / (c sqrt(r)) = (a/(c r)) sqrt(r)
    return Surd(a.coef_ / (b.coef_ * b.radicand_), a.radicand_ * b.radicand_);
}

std::string Surd::str() const
{
    if (is_rational()) return to_string(coef_);
    if (coef_ == 1) return "sqrt(" + to_string(radicand_) + ")";
    if (coef_ == -1) return "-sqrt(" + to_string(radicand_) + ")";
    return to_string(coef_) + "*sqrt(" + to_string(radicand_) + ")";
}

// ---------------------------------------------------------------- SurdSum

SurdSum::SurdSum(std::initializer_list<Surd> terms)
{
    for (const auto& t : terms) add(t);
}

SurdSum::SurdSum(std::vector<Surd> terms)
{
    for (const auto& t : terms) add(t);
}

void SurdSum::add(const Surd& s)
{
    if (s.is_zero()) return;
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
        if (it->same_radical(s)) {
            Rational c = it->coef() + it->ratio_on_radical(s);
            Surd merged(c, it->radicand());
            if (merged.is_zero())
                terms_.erase(it);
            else
                *it = merged;
            return;
        }
    }
    terms_.push_back(s);
}

SurdSum& SurdSum::operator+=(const SurdSum& other)
{
    for (const auto& t : other.terms_) add(t);
    return *this;
}

SurdSum SurdSum::operator-() const
{
    SurdSum out;
    for (const auto& t : terms_) out.terms_.push_back(-t);
    return out;
}

int SurdSum::sign() const
{
    require(terms_.size() <= 3, ErrorCode::Internal, "exact sign supports at most three radicals");
    if (terms_.empty()) return 0;
    if (terms_.size() == 1) return terms_[0].sign();

    // x = A + B, A a single surd. If the signs disagree, sign(x) = sign(A) * sign(A^2 - B^2);
    // A^2 is rational, B^2 has at most two distinct radicals.
    const Surd& a = terms_[0];
    SurdSum b(std::vector<Surd>(terms_.begin() + 1, terms_.end()));
    const int sa = a.sign();
    const int sb = b.sign();
    if (sb == 0 || sa == sb) return sa;
    if (sa == 0) return sb;

    SurdSum diff;
    diff.add(Surd(a.square()));
    for (std::size_t i = 0; i < b.terms_.size(); ++i) {
        diff.add(Surd(-b.terms_[i].square()));
        for (std::size_t j = i + 1; j < b.terms_.size(); ++j)
            diff.add(Surd(Rational(-2)) * b.terms_[i] * b.terms_[j]);
    }
    return sa * diff.sign();
}

double SurdSum::to_double() const
{
    double v = 0.0;
    for (const auto& t : terms_) v += t.to_double();
    return v;
}

std::string SurdSum::str() const
{
    if (terms_.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0) out += " + ";
        out += terms_[i].str();
    }
    return out;
}

// ---------------------------------------------------------------- parsing

namespace {

class SurdParser {
public:
    explicit SurdParser(std::string_view text) : s_(text) {}

    Surd parse()
    {
        Surd v = expr();
        skip_ws();
        if (pos_ != s_.size()) error("unexpected trailing input");
        return v;
    }

private:
    [[noreturn]] void error(const std::string& what) const
    {
        fail(ErrorCode::InvalidArgument, "cannot parse '" + std::string(s_) + "': " + what);
    }

    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Surd expr()
    {
        skip_ws();
        bool negate = false;
        if (accept('-'))
            negate = true;
        else
            accept('+');
        Surd v = term();
        for (;;) {
            if (accept('*'))
                v = v * term();
            else if (accept('/'))
                v = v / term();
            else
                break;
        }
        return negate ? -v : v;
    }

    Surd term()
    {
        skip_ws();
        if (s_.substr(pos_, 5) == "sqrt(") {
            pos_ += 5;
            Surd inner = expr();
            if (!accept(')')) error("missing ')'");
            if (!inner.is_rational()) error("nested square roots are not supported");
            if (inner.coef() < 0) error("square root of a negative number");
            return Surd::sqrt_of(inner.coef());
        }
        if (accept('(')) {
            Surd inner = expr();
            if (!accept(')')) error("missing ')'");
            return inner;
        }
        return Surd(number());
    }

    Rational number()
    {
        skip_ws();
        const std::size_t start = pos_;
        Integer whole = 0;
        Integer frac = 0;
        Integer scale = 1;
        bool digits = false;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            whole = whole * 10 + (s_[pos_] - '0');
            ++pos_;
            digits = true;
        }
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                frac = frac * 10 + (s_[pos_] - '0');
                scale *= 10;
                ++pos_;
                digits = true;
            }
        }
        if (!digits) {
            pos_ = start;
            error("expected a number");
        }
        Rational value = Rational(whole) + Rational(frac, scale);
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            ++pos_;
            bool neg = false;
            if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) neg = s_[pos_++] == '-';
            int e = 0;
            bool edigits = false;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                e = e * 10 + (s_[pos_] - '0');
                ++pos_;
                edigits = true;
                if (e > 400) error("exponent out of range");
            }
            if (!edigits) error("malformed exponent");
            Integer p = mp::pow(Integer(10), static_cast<unsigned>(e));
            value = neg ? value / Rational(p) : value * Rational(p);
        }
        return value;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

Surd parse_surd(std::string_view text) { return SurdParser(text).parse(); }

Rational parse_rational(std::string_view text)
{
    Surd s = parse_surd(text);
    require(s.is_rational(), ErrorCode::InvalidArgument, "expected a rational, got '" + std::string(text) + "'");
    return s.coef();
}

std::vector<Surd> parse_surd_list(std::string_view text)
{
    std::vector<Surd> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view tok = text.substr(start, comma - start);
        bool blank = tok.find_first_not_of(" \t\r\n") == std::string_view::npos;
        require(!blank, ErrorCode::InvalidArgument, "empty entry in list '" + std::string(text) + "'");
        out.push_back(parse_surd(tok));
        start = comma + 1;
    }
    return out;
}

}  // namespace rdmc
