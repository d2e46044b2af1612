#include "rdmc/prawitz.hpp"

#include "interval.hpp"
#include "rdmc/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace rdmc::prawitz {

using detail::Interval;
using detail::Jet;

namespace {

constexpr double kPi = std::numbers::pi;
// Applied on top of the interval bounds, which are already rigorous up to libm accuracy.
constexpr double kSafetyFactor = 2.0;

double theta_residual(double t) { return std::exp(-0.5 * t * t) + std::cos(t); }

}  // namespace

ThetaConstant theta_root()
{
    static const ThetaConstant cached = [] {
        double lo = kPi / 2.0;
        double hi = kPi;
        // residual > 0 at pi/2 (cos vanishes), < 0 at pi.
        while (hi - lo > 1e-11) {
            const double mid = 0.5 * (lo + hi);
            if (theta_residual(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return ThetaConstant{lo, hi};
    }();
    return cached;
}

PrawitzParams PrawitzParams::defaults(double a, double x)
{
    PrawitzParams p;
    p.a = a;
    p.x = x;
    p.T = kPi / a;
    p.q = 0.5;
    return p;
}

void PrawitzParams::validate() const
{
    require(std::isfinite(a) && a > 0.0 && a <= 1.0, ErrorCode::InvalidArgument, "a must lie in (0, 1]");
    require(std::isfinite(x), ErrorCode::InvalidArgument, "x must be finite");
    require(std::isfinite(T) && T > 0.0, ErrorCode::InvalidArgument, "T must be positive");
    require(q >= 0.0 && q <= 1.0, ErrorCode::InvalidArgument, "q must lie in [0, 1]");
}

Integrator parse_integrator(std::string_view name)
{
    if (name == "trapezoid" || name == "trapezoid-certified") return Integrator::TRAPEZOID_CERTIFIED;
    if (name == "adaptive" || name == "adaptive-discounted") return Integrator::ADAPTIVE_DISCOUNTED;
    fail(ErrorCode::InvalidArgument, "unknown integrator '" + std::string(name) + "'");
}

std::string_view to_string(Integrator mode)
{
    return mode == Integrator::TRAPEZOID_CERTIFIED ? "TRAPEZOID_CERTIFIED" : "ADAPTIVE_DISCOUNTED";
}

// ---------------------------------------------------------------- pointwise

double kernel_k(double u, double x, double T)
{
    require(u >= 0.0 && u <= 1.0, ErrorCode::InvalidArgument, "u must lie in [0, 1]");
    if (u == 0.0) return 1.0 + T * x / kPi;
    if (u == 1.0) return 0.0;
    // Same rewrite as the certified integrand; sin(pi u) never appears in a denominator.
    const double tux = T * u * x;
    const double rho = u <= 0.5 ? (1.0 - u) / detail::sinc_point(kPi * u).s0
                                : u / detail::sinc_point(kPi * (1.0 - u)).s0;
    return (1.0 - u) * std::cos(tux) + std::cos(kPi * u) * rho * (T * x / kPi) * detail::sinc_point(tux).s0 +
           std::sin(tux) / kPi;
}

double envelope_g(double v, double a)
{
    require(a > 0.0 && a <= 1.0 && v >= 0.0, ErrorCode::InvalidArgument, "envelope_g needs a in (0,1], v >= 0");
    const double e = std::exp(-0.5 * v * v);
    const double av = a * v;
    if (av < kPi / 2.0) return e - std::pow(std::cos(av), 1.0 / (a * a));
    return e + 1.0;  // also the larger branch at av = pi/2
}

double envelope_h(double v, double a)
{
    require(a > 0.0 && a <= 1.0 && v >= 0.0, ErrorCode::InvalidArgument, "envelope_h needs a in (0,1], v >= 0");
    const ThetaConstant th = theta_root();
    const double av = a * v;
    const double p = 1.0 / (a * a);
    const double e = std::exp(-0.5 * v * v);
    if (av < th.lo) return e;
    if (av <= th.hi) return std::max(e, std::pow(std::max(0.0, -std::cos(av)), p));
    if (av < kPi) return std::pow(std::max(0.0, -std::cos(av)), p);
    return 1.0;
}

// ---------------------------------------------------------------- integrands

namespace {

enum class Branch {
    NONE,       // integrand without branches
    G_SMOOTH,   // a v < pi/2
    G_JUMP,     // a v > pi/2
    H_EXP,      // a v < theta
    H_THETA,    // inside the theta bracket: max of the neighbours
    H_COS,      // theta < a v < pi
    H_ONE,      // a v > pi
};

struct Context {
    IntegrandSpec spec;
    double Tx = 0.0;
    double aT = 0.0;
    double p = 1.0;  // 1 / a^2
    bool upper_half = false;
    Branch branch = Branch::NONE;
};

template <class N>
N kernel(const N& u, const Context& c)
{
    using detail::recip;
    using detail::sinc;
    using detail::sincos;
    const N tux = u * c.Tx;
    const N one_minus_u = 1.0 - u;
    const N rho = c.upper_half ? u * recip(sinc(one_minus_u * kPi)) : one_minus_u * recip(sinc(u * kPi));
    N s, co;
    sincos(tux, s, co);
    N spu, cpu;
    sincos(u * kPi, spu, cpu);
    return one_minus_u * co + cpu * rho * sinc(tux) * (c.Tx / kPi) + s * (1.0 / kPi);
}

template <class N>
N evaluate(const N& u, const Context& c)
{
    using detail::abs;
    using detail::clamp_nonneg;
    using detail::cos;
    using detail::exp;
    using detail::max;
    using detail::pow_nonneg;
    using detail::sqr;

    switch (c.spec.id) {
        case IntegrandId::ONE: return N(1.0);
        case IntegrandId::KERNEL_GAUSS: return kernel(u, c) * exp(sqr(u) * -0.5);
        default: break;
    }
    const N k = kernel(u, c);
    const N gauss = exp(sqr(u * c.spec.T) * -0.5);
    const N av = u * c.aT;
    switch (c.branch) {
        case Branch::G_SMOOTH:
            // cos(av) >= 0 on this piece; clamping only removes rounding noise past pi/2.
            return abs(k) * (gauss - pow_nonneg(clamp_nonneg(cos(av)), c.p)) + k * gauss;
        case Branch::G_JUMP: return abs(k) * (gauss + 1.0) + k * gauss;
        case Branch::H_EXP: return abs(k) * gauss;
        case Branch::H_THETA: return abs(k) * max(gauss, pow_nonneg(clamp_nonneg(-cos(av)), c.p));
        case Branch::H_COS: return abs(k) * pow_nonneg(clamp_nonneg(-cos(av)), c.p);
        case Branch::H_ONE: return abs(k);
        case Branch::NONE: break;
    }
    fail(ErrorCode::Internal, "integrand branch not set");
}

struct Segment {
    double lo, hi;
    Context ctx;
};

std::vector<Segment> split(const IntegrandSpec& f, double lo, double hi)
{
    Context base;
    base.spec = f;
    base.Tx = f.T * f.x;
    base.aT = f.a * f.T;
    base.p = 1.0 / (f.a * f.a);

    std::vector<double> cuts{lo, hi};
    auto add = [&](double c) {
        if (c > lo && c < hi) cuts.push_back(c);
    };
    if (f.id != IntegrandId::ONE) add(0.5);
    const ThetaConstant th = theta_root();
    if (f.id == IntegrandId::PRAWITZ_LOWER) add(kPi / 2.0 / base.aT);
    if (f.id == IntegrandId::PRAWITZ_UPPER) {
        add(th.lo / base.aT);
        add(th.hi / base.aT);
        add(kPi / base.aT);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Segment> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Segment s{cuts[i], cuts[i + 1], base};
        const double mid = 0.5 * (s.lo + s.hi);
        s.ctx.upper_half = mid > 0.5;
        const double av = mid * base.aT;
        if (f.id == IntegrandId::PRAWITZ_LOWER) {
            s.ctx.branch = av < kPi / 2.0 ? Branch::G_SMOOTH : Branch::G_JUMP;
        } else if (f.id == IntegrandId::PRAWITZ_UPPER) {
            if (av < th.lo)
                s.ctx.branch = Branch::H_EXP;
            else if (av < th.hi)
                s.ctx.branch = Branch::H_THETA;
            else if (av < kPi)
                s.ctx.branch = Branch::H_COS;
            else
                s.ctx.branch = Branch::H_ONE;
        }
        out.push_back(s);
    }
    return out;
}

void check_spec(const IntegrandSpec& f)
{
    require(std::isfinite(f.x) && std::isfinite(f.T) && f.T > 0.0, ErrorCode::InvalidArgument,
            "integrand parameters must be finite with T > 0");
    if (f.id == IntegrandId::PRAWITZ_LOWER || f.id == IntegrandId::PRAWITZ_UPPER)
        require(f.a > 0.0 && f.a <= 1.0, ErrorCode::InvalidArgument, "a must lie in (0, 1]");
}

Interval point(double u, const Context& c)
{
    const Interval v = evaluate(Interval(u), c);
    if (!v.finite()) fail(ErrorCode::NonFinite, "integrand is not finite at u = " + std::to_string(u));
    return v;
}

// Bounds for one trapezoid panel. The rule's error is exactly -h^3/12 f''(xi)
// for a C^2 integrand, so a signed enclosure of f'' both shifts the estimate
// and bounds what is left. Where f'' is unavailable (a kink of |k|, a max of
// branches) the Lipschitz bound L h^2/4 and the range bound h (sup - inf)
// still apply. The safety factor widens every uncertainty, never a shift.
struct PanelBounds {
    double est, upper, lower;
    double spread() const { return upper - lower; }
};

PanelBounds assess(const Context& c, double u0, double u1, Interval f0, Interval f1)
{
    const double h = u1 - u0;
    const Jet j = evaluate(Jet::variable({u0, u1}), c);
    const double t_lo = 0.5 * h * (f0.lo + f1.lo);
    const double t_hi = 0.5 * h * (f0.hi + f1.hi);
    PanelBounds b{0.5 * h * (f0.mid() + f1.mid()), detail::kInf, -detail::kInf};

    double sym = j.v.finite() ? h * j.v.width() : detail::kInf;
    if (j.d.finite()) sym = std::min(sym, j.d.mag() * h * h / 4.0);
    if (std::isfinite(sym)) {
        b.upper = t_hi + kSafetyFactor * sym;
        b.lower = t_lo - kSafetyFactor * sym;
    }
    if (j.dd.finite()) {
        const double c12 = h * h * h / 12.0;
        const double shift = -c12 * j.dd.mid();
        const double rad = kSafetyFactor * 0.5 * c12 * j.dd.width();
        b.upper = std::min(b.upper, t_hi + shift + rad);
        b.lower = std::max(b.lower, t_lo + shift - rad);
        b.est = std::clamp(b.est + shift, b.lower, b.upper);
    }
    return b;
}

struct Accum {
    double est = 0.0;
    double upper = 0.0;
    double lower = 0.0;
    std::size_t panels = 0;

    void add(const PanelBounds& b)
    {
        est += b.est;
        upper += b.upper;
        lower += b.lower;
        ++panels;
    }
};

void integrate_uniform(const Segment& s, int n, Accum& acc)
{
    const double h = (s.hi - s.lo) / n;
    Interval f0 = point(s.lo, s.ctx);
    for (int i = 0; i < n; ++i) {
        const double u0 = s.lo + h * i;
        const double u1 = i + 1 == n ? s.hi : s.lo + h * (i + 1);
        const Interval f1 = point(u1, s.ctx);
        acc.add(assess(s.ctx, u0, u1, f0, f1));
        f0 = f1;
    }
}

// Global refinement: always bisect the panel with the widest bounds until the
// summed spread meets the tolerance or the panel cap is hit.
void integrate_adaptive(const std::vector<Segment>& segments, double tolerance, std::size_t max_panels,
                        Accum& acc)
{
    struct Panel {
        double u0, u1;
        Interval f0, f1;
        PanelBounds b;
        const Context* ctx;
        bool operator<(const Panel& o) const { return b.spread() < o.b.spread(); }
    };
    std::priority_queue<Panel> open;
    std::vector<Panel> done;
    double spread = 0.0;

    constexpr int kInitial = 2;
    for (const Segment& s : segments) {
        const double h0 = (s.hi - s.lo) / kInitial;
        Interval f0 = point(s.lo, s.ctx);
        for (int i = 0; i < kInitial; ++i) {
            const double u0 = s.lo + h0 * i;
            const double u1 = i + 1 == kInitial ? s.hi : s.lo + h0 * (i + 1);
            const Interval f1 = point(u1, s.ctx);
            Panel p{u0, u1, f0, f1, assess(s.ctx, u0, u1, f0, f1), &s.ctx};
            spread += p.b.spread();
            open.push(p);
            f0 = f1;
        }
    }

    while (!open.empty() && !(spread <= tolerance) && open.size() + done.size() < max_panels) {
        const Panel p = open.top();
        open.pop();
        const double um = 0.5 * (p.u0 + p.u1);
        if (um <= p.u0 || um >= p.u1) {
            done.push_back(p);
            continue;
        }
        const Interval fm = point(um, *p.ctx);
        Panel left{p.u0, um, p.f0, fm, assess(*p.ctx, p.u0, um, p.f0, fm), p.ctx};
        Panel right{um, p.u1, fm, p.f1, assess(*p.ctx, um, p.u1, fm, p.f1), p.ctx};
        if (std::isfinite(p.b.spread()))
            spread += left.b.spread() + right.b.spread() - p.b.spread();
        else
            spread = detail::kInf;
        open.push(left);
        open.push(right);
        if (!std::isfinite(spread)) {
            // Re-sum once the infinite panels are gone.
            bool all_finite = true;
            double total = 0.0;
            auto copy = open;
            while (!copy.empty()) {
                total += copy.top().b.spread();
                all_finite = all_finite && std::isfinite(copy.top().b.spread());
                copy.pop();
            }
            for (const Panel& d : done) total += d.b.spread();
            if (all_finite) spread = total;
        }
    }
    while (!open.empty()) {
        done.push_back(open.top());
        open.pop();
    }
    // Sum in position order so the result does not depend on heap layout.
    std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) { return x.u0 < y.u0; });
    for (const Panel& p : done) acc.add(p.b);
}

}  // namespace

CertifiedIntegral integrate_certified(const IntegrandSpec& f, double lo, double hi, const Resolution& res)
{
    check_spec(f);
    require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, ErrorCode::InvalidArgument,
            "integration interval must be finite and ordered");
    require(res.panels >= 0 && res.tolerance > 0.0, ErrorCode::InvalidArgument, "resolution must be positive");
    if (lo == hi) return {};

    Accum acc;
    const std::vector<Segment> segments = split(f, lo, hi);
    if (res.panels > 0) {
        for (const Segment& s : segments) integrate_uniform(s, res.panels, acc);
    } else {
        integrate_adaptive(segments, res.tolerance, res.max_panels, acc);
    }
    if (!std::isfinite(acc.upper) || !std::isfinite(acc.lower))
        fail(ErrorCode::NonFinite, "certified integral has no finite bound");

    CertifiedIntegral out;
    out.value = acc.est;
    out.error = std::max(acc.upper - acc.est, acc.est - acc.lower) + kFloatSlack;
    out.panels = acc.panels;
    if (res.panels > 0 && out.error > res.max_error)
        fail(ErrorCode::Precondition, "subdivision too coarse: error bound " + std::to_string(out.error) +
                                          " exceeds requested " + std::to_string(res.max_error));
    return out;
}

namespace {

PrawitzEvaluation adaptive_discounted(const PrawitzParams& p)
{
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    double err_total = 0.0;
    auto run = [&](IntegrandId id, double lo, double hi) {
        for (const Segment& s : split({id, p.a, p.x, p.T}, lo, hi)) {
            auto fn = [&s](double u) { return evaluate(Interval(u), s.ctx).mid(); };
            double err = 0.0;
            total += gauss_kronrod<double, 31>::integrate(fn, s.lo, s.hi, 10, 1e-9, &err);
            err_total += err;
        }
    };
    if (p.q > 0.0) run(IntegrandId::PRAWITZ_LOWER, 0.0, p.q);
    if (p.q < 1.0) run(IntegrandId::PRAWITZ_UPPER, p.q, 1.0);
    if (!std::isfinite(total)) fail(ErrorCode::NonFinite, "adaptive integral is not finite");
    require(err_total < kAdaptiveDiscount, ErrorCode::Precondition,
            "adaptive error estimate " + std::to_string(err_total) + " is not below the discount");

    PrawitzEvaluation out;
    out.integrator = Integrator::ADAPTIVE_DISCOUNTED;
    out.estimate = 0.5 - total;
    out.error_budget = kAdaptiveDiscount;
    out.value = out.estimate - kAdaptiveDiscount;
    return out;
}

}  // namespace

PrawitzEvaluation prawitz_F(const PrawitzParams& p, Integrator mode, const Resolution& res)
{
    p.validate();
    if (mode == Integrator::ADAPTIVE_DISCOUNTED) return adaptive_discounted(p);

    CertifiedIntegral low, high;
    if (p.q > 0.0) low = integrate_certified({IntegrandId::PRAWITZ_LOWER, p.a, p.x, p.T}, 0.0, p.q, res);
    if (p.q < 1.0) high = integrate_certified({IntegrandId::PRAWITZ_UPPER, p.a, p.x, p.T}, p.q, 1.0, res);

    PrawitzEvaluation out;
    out.integrator = Integrator::TRAPEZOID_CERTIFIED;
    out.estimate = 0.5 - low.value - high.value;
    out.value = 0.5 - low.upper() - high.upper();
    out.error_budget = out.estimate - out.value;
    out.panels = low.panels + high.panels;
    if (!std::isfinite(out.value)) fail(ErrorCode::NonFinite, "Prawitz bound is not finite");
    return out;
}

}  // namespace rdmc::prawitz
