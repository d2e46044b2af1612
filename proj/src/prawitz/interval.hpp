#pragma once

// Small interval and second-order jet arithmetic for the certified integrator.
//
// Rounding is handled by widening every computed endpoint by a few ulps
// (relative 2^-50) instead of switching the FPU rounding mode; libm's
// transcendental functions are within that margin. Infinite endpoints are
// legal and mean "no usable bound"; a NaN endpoint product collapses to the
// whole line.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rdmc::prawitz::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double dn(double v) { return v - (std::fabs(v) * 0x1p-50 + 0x1p-1000); }
inline double up(double v) { return v + (std::fabs(v) * 0x1p-50 + 0x1p-1000); }

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double v) : lo(v), hi(v) {}  // NOLINT(google-explicit-constructor)
    Interval(double l, double h) : lo(l), hi(h) {}

    static Interval entire() { return {-kInf, kInf}; }
    double mid() const { return 0.5 * lo + 0.5 * hi; }
    double width() const { return hi - lo; }
    double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
    bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
    bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

inline Interval operator+(Interval a, Interval b) { return {dn(a.lo + b.lo), up(a.hi + b.hi)}; }
inline Interval operator-(Interval a, Interval b) { return {dn(a.lo - b.hi), up(a.hi - b.lo)}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline Interval operator*(Interval a, Interval b)
{
    const double p0 = a.lo * b.lo;
    const double p1 = a.lo * b.hi;
    const double p2 = a.hi * b.lo;
    const double p3 = a.hi * b.hi;
    if (std::isnan(p0 + p1 + p2 + p3)) {
        // 0 * inf with an exact zero factor is zero; anything else is unbounded.
        if ((a.lo == 0.0 && a.hi == 0.0) || (b.lo == 0.0 && b.hi == 0.0)) return {0.0, 0.0};
        if (!std::isnan(p0) && !std::isnan(p1) && !std::isnan(p2) && !std::isnan(p3))
            return {dn(std::min(std::min(p0, p1), std::min(p2, p3))), up(std::max(std::max(p0, p1), std::max(p2, p3)))};
        return Interval::entire();
    }
    return {dn(std::min(std::min(p0, p1), std::min(p2, p3))), up(std::max(std::max(p0, p1), std::max(p2, p3)))};
}

inline Interval operator*(Interval a, double c)
{
    if (c >= 0.0) return {dn(a.lo * c), up(a.hi * c)};
    return {dn(a.hi * c), up(a.lo * c)};
}

inline Interval sqr(Interval a)
{
    const double l = a.lo * a.lo;
    const double h = a.hi * a.hi;
    if (a.contains_zero()) return {0.0, up(std::max(l, h))};
    return {dn(std::min(l, h)), up(std::max(l, h))};
}

inline Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }
inline Interval max(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)}; }
inline Interval clamp_nonneg(Interval a) { return {std::max(a.lo, 0.0), std::max(a.hi, 0.0)}; }

inline Interval abs(Interval a)
{
    if (a.lo >= 0.0) return a;
    if (a.hi <= 0.0) return -a;
    return {0.0, a.mag()};
}

inline Interval exp(Interval a)
{
    return {std::max(0.0, dn(std::exp(a.lo))), up(std::exp(a.hi))};
}

/// Ranges of sin and cos over [lo, hi]: endpoint values plus the interior
/// extrema at multiples of pi/2, tested on a slightly widened range.
inline void sincos(Interval a, Interval& s, Interval& c)
{
    constexpr double pi = std::numbers::pi;
    if (!a.finite() || a.width() >= 2.0 * pi) {
        s = c = {-1.0, 1.0};
        return;
    }
    double s1, c1, s2, c2;
    ::sincos(a.lo, &s1, &c1);
    if (a.hi == a.lo) {
        s = {dn(s1), up(s1)};
        c = {dn(c1), up(c1)};
        return;
    }
    ::sincos(a.hi, &s2, &c2);
    double slo = std::min(s1, s2), shi = std::max(s1, s2);
    double clo = std::min(c1, c2), chi = std::max(c1, c2);
    const double jlo = std::ceil(dn(a.lo) / (pi / 2.0) - 1e-12);
    const double jhi = std::floor(up(a.hi) / (pi / 2.0) + 1e-12);
    for (double j = jlo; j <= jhi; j += 1.0) {
        // j * pi/2: j = 0 mod 4 -> cos max, 1 -> sin max, 2 -> cos min, 3 -> sin min
        double r = std::fmod(j, 4.0);
        if (r < 0.0) r += 4.0;
        if (r == 0.0)
            chi = 1.0;
        else if (r == 1.0)
            shi = 1.0;
        else if (r == 2.0)
            clo = -1.0;
        else
            slo = -1.0;
    }
    s = {std::max(-1.0, dn(slo)), std::min(1.0, up(shi))};
    c = {std::max(-1.0, dn(clo)), std::min(1.0, up(chi))};
}

inline Interval cos(Interval a)
{
    Interval s, c;
    sincos(a, s, c);
    return c;
}

inline Interval sin(Interval a)
{
    Interval s, c;
    sincos(a, s, c);
    return s;
}

/// v^p for v >= 0 (negative parts clamped away by the caller), real p.
inline Interval pow_nonneg(Interval a, double p)
{
    const double lo = std::max(a.lo, 0.0);
    const double hi = std::max(a.hi, 0.0);
    if (p == 0.0) return {1.0, 1.0};
    if (p > 0.0) return {std::max(0.0, dn(std::pow(lo, p))), up(std::pow(hi, p))};
    return {std::max(0.0, dn(std::pow(hi, p))), lo == 0.0 ? kInf : up(std::pow(lo, p))};
}

/// 1/v for an interval of one sign.
inline Interval recip(Interval a)
{
    if (a.contains_zero()) return Interval::entire();
    return {dn(1.0 / a.hi), up(1.0 / a.lo)};
}

// sinc(z) = sin(z)/z and its first two derivatives at a point, with series
// expansions near 0 where the closed forms cancel.
struct SincPoint {
    double s0, s1, s2;
};

inline SincPoint sinc_point(double z)
{
    const double z2 = z * z;
    if (std::fabs(z) < 0.1) {
        return {1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0))),
                z * (-1.0 / 3.0 + z2 * (1.0 / 30.0 - z2 * (1.0 / 840.0 - z2 / 45360.0))),
                -1.0 / 3.0 + z2 * (1.0 / 10.0 - z2 * (1.0 / 168.0 - z2 / 6480.0))};
    }
    const double s = std::sin(z);
    const double c = std::cos(z);
    return {s / z, (z * c - s) / z2, (-z2 * s - 2.0 * z * c + 2.0 * s) / (z2 * z)};
}

/// Enclosures of sinc^(n) (n = 0, 1, 2) over an interval. sinc(z) = int_0^1 cos(zt) dt
/// gives |sinc^(n)| <= 1/(n+1), hence each derivative is 1/(n+2)-Lipschitz;
/// for |z| >= m > 0 the closed forms also give |sinc| <= 1/m, |sinc'| <= 1/m + 1/m^2,
/// |sinc''| <= 1/m + 2/m^2 + 2/m^3.
inline void sinc_enclosure(Interval z, Interval out[3])
{
    if (!z.finite()) {
        out[0] = {-1.0, 1.0};
        out[1] = {-0.5, 0.5};
        out[2] = {-1.0 / 3.0, 1.0 / 3.0};
        return;
    }
    const double m = z.mid();
    const double r = up(std::max(z.hi - m, m - z.lo));
    const SincPoint p = sinc_point(m);
    const double vals[3] = {p.s0, p.s1, p.s2};
    double cap[3] = {1.0, 0.5, 1.0 / 3.0};
    const double amin = z.contains_zero() ? 0.0 : std::min(std::fabs(z.lo), std::fabs(z.hi));
    if (amin > 0.0) {
        const double i1 = 1.0 / amin;
        cap[0] = std::min(cap[0], up(i1));
        cap[1] = std::min(cap[1], up(i1 + i1 * i1));
        cap[2] = std::min(cap[2], up(i1 + 2.0 * i1 * i1 + 2.0 * i1 * i1 * i1));
    }
    for (int n = 0; n < 3; ++n) {
        const double rad = up(r / (n + 2) + 1e-14);
        out[n] = {std::max(-cap[n], dn(vals[n] - rad)), std::min(cap[n], up(vals[n] + rad))};
    }
}

inline Interval sinc(Interval z)
{
    Interval e[3];
    sinc_enclosure(z, e);
    return e[0];
}

// ---------------------------------------------------------------- jets

/// Value and first two derivatives with respect to the integration variable,
/// each enclosed over the whole panel.
struct Jet {
    Interval v, d, dd;

    Jet() = default;
    Jet(double c) : v(c), d(0.0), dd(0.0) {}  // NOLINT(google-explicit-constructor)
    Jet(Interval a, Interval b, Interval c) : v(a), d(b), dd(c) {}

    static Jet variable(Interval u) { return {u, Interval(1.0), Interval(0.0)}; }
};

inline Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet operator-(const Jet& a) { return {-a.v, -a.d, -a.dd}; }

inline Jet operator*(const Jet& a, const Jet& b)
{
    return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + Interval(2.0) * (a.d * b.d) + a.v * b.dd};
}

inline Jet operator*(const Jet& a, double c) { return {a.v * c, a.d * c, a.dd * c}; }
inline Jet operator*(double c, const Jet& a) { return a * c; }
inline Jet operator+(const Jet& a, double c) { return {a.v + Interval(c), a.d, a.dd}; }
inline Jet operator-(double c, const Jet& a) { return {Interval(c) - a.v, -a.d, -a.dd}; }

inline Jet sqr(const Jet& a)
{
    return {sqr(a.v), Interval(2.0) * (a.v * a.d), Interval(2.0) * (sqr(a.d) + a.v * a.dd)};
}

/// f(g) given enclosures f0, f1, f2 of f, f', f'' over the range of g.
inline Jet compose(const Jet& g, Interval f0, Interval f1, Interval f2)
{
    return {f0, f1 * g.d, f2 * sqr(g.d) + f1 * g.dd};
}

inline Jet exp(const Jet& g)
{
    const Interval e = exp(g.v);
    return compose(g, e, e, e);
}

inline void sincos(const Jet& g, Jet& s, Jet& c)
{
    Interval si, ci;
    sincos(g.v, si, ci);
    s = compose(g, si, ci, -si);
    c = compose(g, ci, -si, -ci);
}

inline Jet sin(const Jet& g)
{
    Jet s, c;
    sincos(g, s, c);
    return s;
}

inline Jet cos(const Jet& g)
{
    Jet s, c;
    sincos(g, s, c);
    return c;
}

inline Jet sinc(const Jet& g)
{
    Interval e[3];
    sinc_enclosure(g.v, e);
    return compose(g, e[0], e[1], e[2]);
}

inline Jet recip(const Jet& g)
{
    const Interval r = recip(g.v);
    return compose(g, r, -sqr(r), Interval(2.0) * (r * sqr(r)));
}

inline Jet clamp_nonneg(const Jet& g) { return {clamp_nonneg(g.v), g.d, g.dd}; }

/// g^p on g >= 0. Where a derivative is unbounded (p < 2 near g = 0) the
/// enclosure is infinite and the integrator falls back to a weaker bound.
inline Jet pow_nonneg(const Jet& g, double p)
{
    // v^(p-1) = v^p / v and v^(p-2) = v^p / v^2 share the two pow calls.
    const double lo = std::max(g.v.lo, 0.0);
    const double hi = std::max(g.v.hi, 0.0);
    const double plo = std::pow(lo, p);
    const double phi = std::pow(hi, p);
    auto power = [&](double k) -> Interval {
        // v^(p-k) on [lo, hi], p >= 1 here.
        const double e = p - k;
        if (e == 0.0) return {1.0, 1.0};
        const double vlo = lo == 0.0 ? (e > 0.0 ? 0.0 : kInf) : plo / std::pow(lo, k);
        const double vhi = hi == 0.0 ? (e > 0.0 ? 0.0 : kInf) : phi / std::pow(hi, k);
        if (e > 0.0) return {std::max(0.0, dn(dn(vlo))), up(up(vhi))};
        return {std::max(0.0, dn(dn(vhi))), up(up(vlo))};
    };
    if (p < 1.0) {
        const Interval f0 = pow_nonneg(g.v, p);
        const Interval f1 = Interval(p) * pow_nonneg(g.v, p - 1.0);
        const Interval f2 = Interval(p * (p - 1.0)) * pow_nonneg(g.v, p - 2.0);
        return compose(g, f0, f1, f2);
    }
    const Interval f0{std::max(0.0, dn(plo)), up(phi)};
    return compose(g, f0, power(1.0) * p, power(2.0) * (p * (p - 1.0)));
}

/// |g|: smooth where g keeps one sign; across a zero the value is still
/// enclosed and the derivative lies in [-|g'|, |g'|] almost everywhere, but
/// the second derivative does not exist (a kink).
inline Jet abs(const Jet& g)
{
    if (g.v.lo > 0.0) return g;
    if (g.v.hi < 0.0) return -g;
    const double m = g.d.mag();
    return {abs(g.v), Interval(-m, m), Interval::entire()};
}

/// Pointwise max of two branches: enclosed value, derivatives unusable.
inline Jet max(const Jet& a, const Jet& b) { return {max(a.v, b.v), Interval::entire(), Interval::entire()}; }

}  // namespace rdmc::prawitz::detail
