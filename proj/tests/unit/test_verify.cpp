#include "doctest.h"

#include "rdmc/error.hpp"
#include "rdmc/verify.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <set>
#include <tuple>

using namespace rdmc::verify;
using rdmc::dptable::BoundTable;
using rdmc::dptable::GridSpec;
using Q = boost::multiprecision::cpp_rational;

namespace {

// Cell (m, j) holds (4096 m + j) / 2^24, so every lookup identifies its cell exactly.
const BoundTable& coded_table()
{
    static const BoundTable t = [] {
        GridSpec g;
        g.delta_den = 400;
        BoundTable b(g, 10, rdmc::prawitz::Integrator::TRAPEZOID_CERTIFIED);
        for (std::size_t m = 0; m < g.a_count(); ++m)
            for (std::size_t j = 0; j < g.x_count(); ++j) b.at(m, j) = std::ldexp(4096.0 * m + j, -24);
        return b;
    }();
    return t;
}

double code(int m, int j) { return std::ldexp(4096.0 * m + j, -24); }

// Axis from the mesh rule: multiples of h in [lo, hi], plus off-grid endpoints.
std::vector<Q> rational_axis(const Q& lo, const Q& hi, const Q& h)
{
    std::vector<Q> out;
    if (lo > hi) return out;
    using boost::multiprecision::cpp_int;
    const Q klo = lo / h, khi = hi / h;
    cpp_int first = numerator(klo) / denominator(klo);
    if (Q(first) < klo) ++first;
    cpp_int last = numerator(khi) / denominator(khi);
    if (Q(last) > khi) --last;
    if (first > last) {
        out.push_back(lo);
        if (hi > lo) out.push_back(hi);
        return out;
    }
    if (Q(first) * h != lo) out.push_back(lo);
    for (cpp_int k = first; k <= last; ++k) out.push_back(Q(k) * h);
    if (Q(last) * h != hi) out.push_back(hi);
    return out;
}

}  // namespace

TEST_CASE("pair mesh size matches the closed form")
{
    // a1 = k/2000 for k in [600, 1400]; a2 runs over 0..min(k, 2000 - k) in the same units.
    long long expected = 0;
    for (int k = 600; k <= 1400; ++k) expected += std::min(k, 2000 - k) + 1;
    CHECK(expected == 641401);
    auto mesh = mesh_pairs(0.3, 0.7, 0.005 / 10);
    CHECK(static_cast<long long>(mesh.size()) == expected);
    for (const auto& p : mesh) {
        CHECK(p.a2 <= p.a1 + 1e-12);
        CHECK(p.a1 + p.a2 <= 1 + 1e-12);
    }

    expected = 0;
    for (int k = 400; k <= 600; ++k) expected += std::min(k, 1000 - k) + 1;
    CHECK(mesh_pairs(0.4, 0.6, 0.01 / 10).size() == static_cast<std::size_t>(expected));
}

TEST_CASE("triple mesh matches an exact rational enumeration")
{
    const Q h(1, 200);
    std::set<std::tuple<long long, long long, long long>> want;
    auto key = [](double v) { return std::llround(v * 1e9); };
    for (const Q& a1 : rational_axis(Q(1, 3), Q(7, 10), h))
        for (const Q& a2 : rational_axis(Q((1 - a1) / 2), std::min(a1, Q(1 - a1)), h))
            for (const Q& a3 : rational_axis(std::max(Q(0), Q(1 - a1 - a2)), a2, h))
                want.emplace(key(a1.convert_to<double>()), key(a2.convert_to<double>()), key(a3.convert_to<double>()));
    auto mesh = mesh_triples(0.005);
    std::set<std::tuple<long long, long long, long long>> got;
    for (const auto& p : mesh) got.emplace(key(p.a1), key(p.a2), key(p.a3));
    CHECK(mesh.size() == got.size());
    CHECK(got == want);
    for (const auto& p : mesh) {
        CHECK(p.a3 <= p.a2 + 1e-12);
        CHECK(p.a2 <= p.a1 + 1e-12);
        CHECK(p.a1 + p.a2 + p.a3 >= 1 - 1e-12);
        CHECK(p.a1 + p.a2 <= 1 + 1e-12);
    }
}

TEST_CASE("A1 objective reads the hand-computed cells")
{
    // (a1, a2) = (0.35, 0.33): a = 0.32, s2^2 = 3843/5000. Arguments 0.3650.., and
    // (1 +- a1 +- a2)/s2 = 0.3650.., 1.1178.., 1.1635.., 1.9163.. round up to
    // a index 147 and x indices 1347, 1648, 1666, 1967.
    const BoundTable& t = coded_table();
    const double want = (code(147, 1347) + code(147, 1648) + code(147, 1666) + code(147, 1967)) / 4;
    CHECK(a1_objective(t, 0.35, 0.33, 0.0) == want);
    // A slack of one grid step moves every index up by one.
    const double shifted = (code(148, 1348) + code(148, 1649) + code(148, 1667) + code(148, 1968)) / 4;
    CHECK(a1_objective(t, 0.35, 0.33, 1.0 / 400) == shifted);
}

TEST_CASE("A3 objective reads the hand-computed cells")
{
    // (0.45, 0.4): a = min(0.4, 0.15) = 0.15, s2^2 = 51/80. Arguments 0.1879..,
    // 1.1898.., 1.3151.., 2.3170.. give a index 76 and x indices 1276, 1676, 1727, 2127.
    const BoundTable& t = coded_table();
    const double want = (code(76, 1276) + code(76, 1676) + code(76, 1727) + code(76, 2127)) / 4;
    CHECK(a3_objective(t, 0.45, 0.4, 0.0) == want);
}

TEST_CASE("A2 fourth-weight bound")
{
    SUBCASE("condition fails: default bound min(a3, sigma3)")
    {
        auto b = a2_bounds(0.45, 0.35, 0.3, 0.03);
        CHECK_FALSE(b.improved);
        CHECK(b.sigma3 == doctest::Approx(std::sqrt(0.585)));
        CHECK(b.a4_bound == doctest::Approx(0.3));
        CHECK(b.L[0] == doctest::Approx(0.5));
        CHECK(b.L[1] == doctest::Approx(0.6));
        CHECK(b.L[2] == doctest::Approx(0.8));
    }
    SUBCASE("condition holds: 1 - a1 - a3 is also a bound")
    {
        // L2 - L1 + delta/2 = 0.035 < 0.35 sqrt(0.1049) = 0.1134
        auto b = a2_bounds(0.5, 0.49, 0.45, 0.03);
        CHECK(b.improved);
        CHECK(b.a4_bound == doctest::Approx(0.05));
    }
    SUBCASE("the box around (1/2, 1/2, 1/2) always uses the improved bound")
    {
        auto b = a2_bounds(0.5, 0.5, 0.5, 0.03);
        CHECK(b.improved);
        CHECK(b.sigma3 == doctest::Approx(0.5));
        CHECK(b.a4_bound == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("objective sums the three lookups")
    {
        const BoundTable& t = coded_table();
        auto b = a2_objective(t, 0.45, 0.35, 0.3, 0.0, 0.03);
        double sum = 0;
        for (double L : b.L) sum += rdmc::dptable::query(t, b.a4_bound / b.sigma3, L / b.sigma3);
        CHECK(b.value == sum);
    }
}

TEST_CASE("campaigns refuse a table coarser than their delta")
{
    GridSpec g;
    g.delta_den = 20;
    BoundTable coarse(g, 1, rdmc::prawitz::Integrator::TRAPEZOID_CERTIFIED);
    try {
        verify_A3(coarse);
        FAIL("expected a precondition error");
    } catch (const rdmc::Error& e) {
        CHECK(e.code() == rdmc::ErrorCode::Precondition);
    }
}

TEST_CASE("a table of zeros fails the mesh campaign and lists points")
{
    GridSpec g;
    g.delta_den = 100;
    BoundTable zeros(g, 1, rdmc::prawitz::Integrator::TRAPEZOID_CERTIFIED);
    CampaignOptions opt;
    opt.off_mesh_samples = 100;
    opt.crossfire_vectors = 5;
    auto r = verify_A3(zeros, opt);
    CHECK_FALSE(r.all_pass());
    bool listed = false;
    for (const auto& item : r.items)
        if (item.description == "failing mesh points") listed = !item.pass && !item.detail.empty();
    CHECK(listed);
}

TEST_CASE("fixture campaign passes")
{
    auto r = verify_fixtures(1);
    CHECK(r.items.size() >= 20);
    CHECK(r.all_pass());
}
