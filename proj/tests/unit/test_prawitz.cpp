#include "doctest.h"

#include "../support/lattice_oracle.hpp"
#include "rdmc/error.hpp"
#include "rdmc/prawitz.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace rdmc::prawitz;
using rdmc::Error;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson rule, used as the self-refinement reference.
template <class F>
double simpson(F f, double lo, double hi, int panels)
{
    const double h = (hi - lo) / panels;
    double s = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
}

double k_direct(double u, double x, double T)
{
    return (1 - u) * std::sin(kPi * u + T * u * x) / std::sin(kPi * u) + std::sin(T * u * x) / kPi;
}

}  // namespace

TEST_CASE("theta bracket")
{
    auto th = theta_root();
    CHECK(th.hi - th.lo <= 1e-10);
    CHECK(th.hi >= th.lo);
    CHECK(std::abs(th.mid() - 1.778) <= 1e-4);
    auto r = [](double t) { return std::exp(-t * t / 2) + std::cos(t); };
    CHECK(r(th.lo) * r(th.hi) <= 0);
    CHECK(std::abs(r(th.mid())) <= 1e-9);
    CHECK(r(kPi / 2) > 0);

    // Independent root finder.
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(r, kPi / 2, kPi, tol, it);
    double root = 0.5 * (lo + hi);
    CHECK(root >= th.lo - 1e-12);
    CHECK(root <= th.hi + 1e-12);
}

TEST_CASE("kernel values at the ends and the middle")
{
    for (double x : {-2.0, 0.0, 0.7, 3.0}) {
        for (double T : {1.0, kPi, 10.0}) {
            CHECK(kernel_k(0, x, T) == doctest::Approx(1 + T * x / kPi));
            CHECK(kernel_k(1, x, T) == doctest::Approx(0).epsilon(1e-12));
            CHECK(std::abs(kernel_k(1e-6, x, T) - kernel_k(0, x, T)) < 1e-4);
            CHECK(std::abs(kernel_k(1 - 1e-6, x, T)) < 1e-4);
            for (double u : {0.1, 0.37, 0.5, 0.9})
                CHECK(kernel_k(u, x, T) == doctest::Approx(k_direct(u, x, T)).epsilon(1e-12));
        }
        CHECK(kernel_k(0.5, 0, 3.0) == doctest::Approx(0.5));
    }
}

TEST_CASE("envelope branches")
{
    const auto th = theta_root();
    for (double a : {0.1, 0.3, 0.5, 1.0}) {
        CHECK(envelope_g(0, a) == doctest::Approx(0).epsilon(1e-15));
        double v = (kPi / 2 + 0.1) / a;
        CHECK(envelope_g(v, a) == doctest::Approx(std::exp(-v * v / 2) + 1));
        v = 1.0 / a;
        CHECK(envelope_g(v, a) == doctest::Approx(std::exp(-v * v / 2) - std::pow(std::cos(1.0), 1 / (a * a))));

        v = (th.lo - 0.2) / a;
        CHECK(envelope_h(v, a) == doctest::Approx(std::exp(-v * v / 2)));
        v = (kPi + 0.01) / a;
        CHECK(envelope_h(v, a) == 1.0);
        v = 2.5 / a;
        CHECK(envelope_h(v, a) == doctest::Approx(std::pow(-std::cos(2.5), 1 / (a * a))));

        // At the branch points the larger neighbour is returned.
        v = kPi / 2 / a;
        double left = std::exp(-v * v / 2) - 0.0, right = std::exp(-v * v / 2) + 1;
        CHECK(envelope_g(v, a) == doctest::Approx(std::max(left, right)));
        v = kPi / a;
        CHECK(envelope_h(v, a) == doctest::Approx(1.0));
        v = th.mid() / a;
        double e = std::exp(-v * v / 2), c = std::pow(-std::cos(th.mid()), 1 / (a * a));
        CHECK(envelope_h(v, a) >= std::max(e, c) - 1e-15);
    }
    CHECK_THROWS_AS(envelope_g(-1, 0.5), Error);
    CHECK_THROWS_AS(envelope_h(1, 0), Error);
}

TEST_CASE("certified integral of the constant one")
{
    auto r = integrate_certified({IntegrandId::ONE}, 0, 1);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.error <= 1e-8);
    CHECK(r.lower() <= 1.0);
    CHECK(r.upper() >= 1.0);
}

TEST_CASE("kernel times Gaussian against closed form and a fine reference")
{
    // x = 0, T = 1: k = 1 - u, so the integral is sqrt(pi/2) erf(1/sqrt 2) - (1 - e^-1/2).
    const double exact = std::sqrt(kPi / 2) * std::erf(1 / std::sqrt(2.0)) - (1 - std::exp(-0.5));
    auto r = integrate_certified({IntegrandId::KERNEL_GAUSS, 1.0, 0.0, 1.0}, 0, 1, {0, 1e-7});
    CHECK(std::abs(r.value - exact) <= 1e-6);
    CHECK(std::abs(r.value - exact) <= r.error);

    for (double x : {-1.0, 0.5, 1.3}) {
        const double T = kPi;
        auto f = [&](double u) {
            double k = u == 0 ? 1 + T * x / kPi : (u == 1 ? 0 : k_direct(u, x, T));
            return k * std::exp(-u * u / 2);
        };
        const double ref = simpson(f, 0, 1, 1'000'000);
        auto c = integrate_certified({IntegrandId::KERNEL_GAUSS, 1.0, x, T}, 0, 1, {0, 1e-7});
        CHECK(std::abs(c.value - ref) <= 1e-6);
        CHECK(std::abs(c.value - ref) <= c.error + 1e-12);
    }
}

TEST_CASE("uniform rule converges at second order or better")
{
    // The bound carries the signed end correction, so it falls by about 8
    // per doubling; the plain second-order rate is the floor asserted here.
    const double x = 0.8, T = kPi;
    auto f = [&](double u) {
        double k = u == 0 ? 1 + T * x / kPi : (u == 1 ? 0 : k_direct(u, x, T));
        return k * std::exp(-u * u / 2);
    };
    const double ref = simpson(f, 0, 1, 1'000'000);
    double prev = 0;
    for (int n : {16, 32, 64, 128, 256}) {
        Resolution res;
        res.panels = n;
        auto c = integrate_certified({IntegrandId::KERNEL_GAUSS, 1.0, x, T}, 0, 1, res);
        CHECK(std::abs(c.value - ref) <= c.error + 1e-12);
        if (prev > 0) CHECK(prev / c.error >= 3.9);
        prev = c.error;
    }
}

TEST_CASE("error bound is non-increasing under refinement")
{
    IntegrandSpec f{IntegrandId::PRAWITZ_UPPER, 0.3, 1.0, kPi / 0.3};
    double prev = INFINITY;
    for (int n : {8, 16, 32, 64, 128}) {
        Resolution res;
        res.panels = n;
        auto c = integrate_certified(f, 0.5, 1, res);
        CHECK(c.error <= prev);
        prev = c.error;
    }
}

TEST_CASE("Prawitz value is a lower bound on exact tails")
{
    using rdmc::testing::LatticeVector;
    std::mt19937_64 rng(7);
    int checked = 0;
    // a = 0.3, x = 1 with the default parameters.
    auto F = prawitz_F(PrawitzParams::defaults(0.3, 1.0));
    CHECK(F.value <= F.estimate);
    CHECK(F.error_budget >= 0);
    std::uniform_int_distribution<int> kd(1, 16), nd(12, 60);
    while (checked < 100) {
        LatticeVector v;
        int n = nd(rng);
        for (int i = 0; i < n; ++i) v.k.push_back(kd(rng));
        if (v.max_weight() > 0.3) continue;
        auto p = rdmc::testing::lattice_tail_gt(v, 1.0);
        CHECK(F.value <= p.value());
        ++checked;
    }
}

TEST_CASE("Prawitz monotonicity and vanishing")
{
    auto f2 = prawitz_F(PrawitzParams::defaults(0.2, 1.0));
    auto f3 = prawitz_F(PrawitzParams::defaults(0.3, 1.0));
    CHECK(f2.value >= f3.value);
    CHECK(prawitz_F(PrawitzParams::defaults(1.0, 10.0)).value <= 0);
}

TEST_CASE("trapezoid and adaptive paths agree within their budgets")
{
    for (double a : {0.15, 0.3, 0.55}) {
        for (double x : {-0.5, 0.3, 1.0, 1.7}) {
            auto p = PrawitzParams::defaults(a, x);
            auto t = prawitz_F(p, Integrator::TRAPEZOID_CERTIFIED);
            auto d = prawitz_F(p, Integrator::ADAPTIVE_DISCOUNTED);
            CHECK(d.integrator == Integrator::ADAPTIVE_DISCOUNTED);
            CHECK(d.error_budget >= kAdaptiveDiscount);
            CHECK(std::abs(t.estimate - d.estimate) <= t.error_budget + d.error_budget);
        }
    }
}

TEST_CASE("parameter validation")
{
    PrawitzParams p = PrawitzParams::defaults(0.5, 1.0);
    CHECK(p.T == doctest::Approx(2 * kPi));
    CHECK(p.q == 0.5);
    p.a = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = PrawitzParams::defaults(0.5, 1.0);
    p.q = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
    p.q = 0.5;
    p.T = -1;
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK_THROWS_AS(parse_integrator("simpson"), Error);
    CHECK(parse_integrator("adaptive") == Integrator::ADAPTIVE_DISCOUNTED);
}
