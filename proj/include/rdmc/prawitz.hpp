#pragma once

// Prawitz smoothing lower bound F(a, x, T, q) on inf Pr[X > x], taken over
// unit-variance Rademacher sums whose largest weight is at most a:
//
//   F = 1/2 - int_0^q |k| g(Tu, a) du - int_q^1 |k| h(Tu, a) du - int_0^q k exp(-(Tu)^2/2) du
//
// Every evaluation carries the error budget that was already subtracted, so
// `value` is a one-sided (lower) bound.

#include <cstddef>
#include <limits>
#include <string_view>

namespace rdmc::prawitz {

/// Bracket for the root of exp(-t^2/2) + cos(t) on [pi/2, pi].
struct ThetaConstant {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
};

/// Bisection bracket of width <= 1e-10. Computed once and cached.
ThetaConstant theta_root();

struct PrawitzParams {
    double a = 1.0;
    double x = 0.0;
    double T = 0.0;
    double q = 0.5;

    /// T = pi / a, q = 1/2 (the parameters the table is built with).
    static PrawitzParams defaults(double a, double x);
    void validate() const;
};

enum class Integrator : unsigned char { TRAPEZOID_CERTIFIED = 1, ADAPTIVE_DISCOUNTED = 2 };

Integrator parse_integrator(std::string_view name);
std::string_view to_string(Integrator mode);

/// Step control. panels > 0 selects a uniform rule with that many panels per
/// smooth piece; panels == 0 bisects the worst panel until the certified
/// bracket of the whole integral is narrower than `tolerance`.
struct Resolution {
    int panels = 0;
    double tolerance = 2e-5;
    std::size_t max_panels = std::size_t{1} << 18;
    /// Uniform mode only: fail instead of returning a looser bound.
    double max_error = std::numeric_limits<double>::infinity();
};

struct PrawitzEvaluation {
    double value = 0.0;         // certified lower bound on F
    double error_budget = 0.0;  // already subtracted from value
    Integrator integrator = Integrator::TRAPEZOID_CERTIFIED;
    double estimate = 0.0;      // value + error_budget
    std::size_t panels = 0;
};

/// (1-u) sin(pi u + T u x) / sin(pi u) + sin(T u x) / pi, continued to u = 0 and u = 1.
double kernel_k(double u, double x, double T);

/// The branch envelopes of the formula; at a branch point the larger branch is returned.
double envelope_g(double v, double a);
double envelope_h(double v, double a);

enum class IntegrandId {
    ONE,             // 1
    KERNEL_GAUSS,    // k(u, x, T) exp(-u^2 / 2)
    PRAWITZ_LOWER,   // |k| g(Tu, a) + k exp(-(Tu)^2/2), the [0, q] integrand
    PRAWITZ_UPPER,   // |k| h(Tu, a), the [q, 1] integrand
};

struct IntegrandSpec {
    IntegrandId id = IntegrandId::ONE;
    double a = 1.0;
    double x = 0.0;
    double T = 1.0;
};

struct CertifiedIntegral {
    double value = 0.0;  // trapezoid estimate
    double error = 0.0;  // |integral - value| <= error
    std::size_t panels = 0;
    double upper() const { return value + error; }
    double lower() const { return value - error; }
};

/// Trapezoid rule with per-panel bounds from interval enclosures of the
/// integrand and its first two derivatives. The interval is split at every
/// branch point of the integrand first.
CertifiedIntegral integrate_certified(const IntegrandSpec& f, double lo, double hi, const Resolution& res = {});

PrawitzEvaluation prawitz_F(const PrawitzParams& p, Integrator mode = Integrator::TRAPEZOID_CERTIFIED,
                            const Resolution& res = {});

/// Flat discount used by the Gauss-Kronrod path.
inline constexpr double kAdaptiveDiscount = 0.01;
/// Additive floating-point slack per certified integral.
inline constexpr double kFloatSlack = 1e-9;

}  // namespace rdmc::prawitz
