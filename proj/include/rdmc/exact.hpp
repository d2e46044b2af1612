#pragma once

// Exact scalars used by the enumeration oracles: big rationals, surds
// (rational multiples of square roots of rationals) and short sums of surds
// with an exact sign test.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace rdmc {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

int sign(const Rational& r);
int sign(const Integer& i);

/// floor(sqrt(r)) for r >= 0.
Integer isqrt_floor(const Rational& r);
bool is_perfect_square(const Rational& r);
/// Exact square root of a perfect-square rational.
Rational exact_sqrt(const Rational& r);

Integer floor_div(const Rational& r);
Integer ceil_div(const Rational& r);

std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// coef * sqrt(radicand), radicand > 0 (or the zero surd).
class Surd {
public:
    Surd() = default;
    Surd(Rational coef);  // NOLINT(google-explicit-constructor)
    Surd(Rational coef, Rational radicand);

    static Surd sqrt_of(const Rational& r);

    const Rational& coef() const { return coef_; }
    const Rational& radicand() const { return radicand_; }

    bool is_zero() const { return coef_ == 0; }
    bool is_rational() const { return radicand_ == 1; }
    int sign() const { return rdmc::sign(coef_); }
    Rational square() const { return coef_ * coef_ * radicand_; }
    double to_double() const;

    /// True when this and other differ by a rational factor.
    bool same_radical(const Surd& other) const;
    /// Rational q with other == q * (this / coef), i.e. other expressed on this radical.
    Rational ratio_on_radical(const Surd& other) const;

    Surd operator-() const { return Surd(-coef_, radicand_); }
    friend Surd operator*(const Surd& a, const Surd& b);
    friend Surd operator/(const Surd& a, const Surd& b);

    std::string str() const;

private:
    void normalize();

    Rational coef_{0};
    Rational radicand_{1};
};

/// A sum of at most three surds after merging like radicals. sign() is exact.
class SurdSum {
public:
    SurdSum() = default;
    SurdSum(std::initializer_list<Surd> terms);
    explicit SurdSum(std::vector<Surd> terms);

    void add(const Surd& s);
    SurdSum& operator+=(const SurdSum& other);
    SurdSum operator-() const;

    const std::vector<Surd>& terms() const { return terms_; }
    int sign() const;
    double to_double() const;
    std::string str() const;

private:
    std::vector<Surd> terms_;
};

/// Parses "3", "-1/3", "0.35", "sqrt(7/30)", "1/sqrt(6)", "-1/2*sqrt(1/3)".
Surd parse_surd(std::string_view text);
Rational parse_rational(std::string_view text);
/// Comma-separated list of surd tokens.
std::vector<Surd> parse_surd_list(std::string_view text);

}  // namespace rdmc
