#include "doctest.h"

#include "gen.hpp"
#include "rdmc/core.hpp"
#include "rdmc/error.hpp"

#include <cmath>

using namespace rdmc;
using namespace rdmc::core;

namespace {

Rational R(long p, long q = 1) { return Rational(p, q); }

WeightVector repeated(const Surd& w, int k, std::vector<Surd> prefix = {})
{
    for (int i = 0; i < k; ++i) prefix.push_back(w);
    return normalize_weights(std::span<const Surd>(prefix));
}

}  // namespace

TEST_CASE("normalize_weights")
{
    auto one = normalize_weights({Surd(R(1))});
    CHECK(one.weights() == std::vector<double>{1.0});
    CHECK(one.variance() == doctest::Approx(1.0));

    auto w = normalize_weights({Surd(R(3)), Surd(R(4))});
    CHECK(w.weights()[0] == doctest::Approx(0.8));
    CHECK(w.weights()[1] == doctest::Approx(0.6));
    CHECK(w.exact()->raw[0] == 4);

    std::vector<Surd> ninth(9, Surd(R(1, 3)));
    auto nine = normalize_weights(std::span<const Surd>(ninth));
    for (double a : nine.weights()) CHECK(a == doctest::Approx(1.0 / 3.0));
    CHECK(nine.partial_sigmas()[3] == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(nine.partial_sigma_squared(3) == R(2, 3));
    CHECK(nine.partial_sigmas().back() == 0.0);

    auto neg = normalize_weights({Surd(R(-1)), Surd(R(2))});
    CHECK(neg.weights()[0] == doctest::Approx(2.0 / std::sqrt(5.0)));

    CHECK_THROWS_AS(normalize_weights(std::span<const Surd>()), Error);
    CHECK_THROWS_AS(normalize_weights({Surd(R(1)), Surd(R(0))}), Error);
}

TEST_CASE("weight vector invariants on random input")
{
    std::mt19937_64 rng(7);
    for (int it = 0; it < 100; ++it) {
        auto w = testing::random_unit_vector(rng, 1, 14);
        CHECK(std::fabs(w.variance() - 1.0) <= 1e-12);
        for (std::size_t i = 1; i < w.size(); ++i) CHECK(w.weights()[i] <= w.weights()[i - 1]);
        for (std::size_t j = 1; j < w.partial_sigmas().size(); ++j)
            CHECK(w.partial_sigmas()[j] <= w.partial_sigmas()[j - 1]);
        CHECK(w.partial_sigma_squared(w.size()) == 0);
    }
}

TEST_CASE("exact_tail reproduces the difficult-case fixtures")
{
    CHECK(exact_tail(normalize_weights({Surd(R(1))}), TailQuery::ge(SurdSum{Surd(R(1))})).to_rational() == R(1, 2));
    CHECK(exact_tail(normalize_weights({Surd(R(1))}), TailQuery::gt(SurdSum{Surd(R(1))})).to_rational() == 0);

    const SurdSum one{Surd(R(1))};
    CHECK(exact_tail(repeated(Surd(R(1, 2)), 4), TailQuery::gt(one)).to_rational() == R(1, 16));
    CHECK(exact_tail(repeated(Surd(R(1, 3)), 9), TailQuery::gt(one)).to_rational() == R(23, 256));
    CHECK(exact_tail(repeated(Surd(R(1, 3)), 5, {Surd(R(2, 3))}), TailQuery::gt(one)).to_rational() == R(6, 64));
    // Conditioning on the two halves: 93/1024 + 2 * 9/1024 (eight quarters must exceed 0 resp. 4).
    CHECK(exact_tail(repeated(Surd(R(1, 4)), 8, {Surd(R(1, 2)), Surd(R(1, 2))}), TailQuery::gt(one)).to_rational() ==
          R(111, 1024));
    // Six equal weights 1/sqrt(6): >= 1 is attained exactly (sum of 5 plus, 1 minus is 4/sqrt6 > 1).
    auto six = repeated(parse_surd("1/sqrt(6)"), 6);
    CHECK(exact_tail(six, TailQuery::ge(one)).to_rational() == R(7, 64));
    CHECK(exact_tail(six, TailQuery::gt(one)).to_rational() == R(7, 64));

    // Strict vs non-strict differ exactly at attained thresholds.
    auto third = repeated(Surd(R(1, 3)), 5, {Surd(R(2, 3))});
    CHECK(exact_tail(third, TailQuery::ge(one)).to_rational() > exact_tail(third, TailQuery::gt(one)).to_rational());

    CHECK(exact_tail(repeated(Surd(R(1, 2)), 4), TailQuery::gt(one)).str() == "1/16");
}

TEST_CASE("exact_tail preconditions")
{
    std::vector<Surd> many(30, Surd(R(1)));
    auto w = normalize_weights(std::span<const Surd>(many));
    CHECK_THROWS_AS(exact_tail(w, TailQuery::ge(SurdSum{Surd(R(1))})), Error);
    OracleConfig small{4};
    CHECK_THROWS_AS(exact_tail(repeated(Surd(R(1)), 5), TailQuery::ge(SurdSum{}), small), Error);

    auto mixed = normalize_weights({Surd::sqrt_of(2), Surd::sqrt_of(3)});
    CHECK_FALSE(mixed.exact().has_value());
    CHECK_THROWS_AS(exact_tail(mixed, TailQuery::ge(SurdSum{Surd(R(1))})), Error);
    CHECK(enumerated_tail(mixed, TailMode::GE, 0.5) == doctest::Approx(0.25));

    CHECK_THROWS_AS(exact_tail(repeated(Surd(R(1)), 3), TailQuery::abs_in_open(SurdSum{Surd(R(1))}, SurdSum{Surd(R(1))})),
                    Error);
}

TEST_CASE("exact_tail symmetry and monotonicity on random vectors")
{
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 100; ++it) {
        auto w = testing::random_unit_vector(rng, 1, 12);
        const Rational t = testing::random_rational(rng, 0.0, 2.0);
        const SurdSum ts{Surd(t)};
        const Rational ge = exact_tail(w, TailQuery::ge(ts)).to_rational();
        const Rational gt = exact_tail(w, TailQuery::gt(ts)).to_rational();
        const Rational abs_ge = exact_tail(w, TailQuery::abs_ge(ts)).to_rational();
        if (t > 0) CHECK(abs_ge == 2 * ge);
        CHECK(gt <= ge);
        // Pr[X >= t] = Pr[X <= -t] = 1 - Pr[X > -t]
        const Rational gt_neg = exact_tail(w, TailQuery::gt(SurdSum{Surd(-t)})).to_rational();
        CHECK(ge == 1 - gt_neg);
        // open band plus closed tail partitions |X| > t1
        const Rational t2 = t + testing::random_rational(rng, 0.05, 1.0);
        const Rational band = exact_tail(w, TailQuery::abs_in_open(ts, SurdSum{Surd(t2)})).to_rational();
        const Rational above = exact_tail(w, TailQuery::abs_ge(SurdSum{Surd(t2)})).to_rational();
        const Rational above_t = 1 - exact_tail(w, TailQuery::abs_in_open(SurdSum{Surd(R(-1))}, SurdSum{Surd(t)}))
                                         .to_rational() -
                                 (t == 0 ? Rational(0) : Rational(0));
        CHECK(band + above <= above_t);
        // monotone in t
        const Rational ge2 = exact_tail(w, TailQuery::ge(SurdSum{Surd(t2)})).to_rational();
        CHECK(ge2 <= ge);
        // floating enumeration agrees away from attained thresholds
        CHECK(std::fabs(enumerated_tail(w, TailMode::GT, to_double(t) + 1e-9) - to_double(gt)) <= 1.0);
    }
}

TEST_CASE("elimination")
{
    auto w = normalize_weights({Surd(R(4)), Surd(R(3))});
    auto sc = eliminate(w, 1);
    REQUIRE(sc.size() == 2);
    CHECK(sc[0].probability == R(1, 2));
    CHECK(sc[0].map_threshold(1.0) == doctest::Approx((1.0 + 0.8) / 0.6));
    CHECK(sc[1].map_threshold(1.0) == doctest::Approx((1.0 - 0.8) / 0.6));

    // Thresholds {1 +- a1 +- a2} / sigma_2 for [2/3, 1/3 x5].
    std::vector<Surd> raw{Surd(R(2, 3))};
    for (int i = 0; i < 5; ++i) raw.emplace_back(R(1, 3));
    auto w2 = normalize_weights(std::span<const Surd>(raw));
    auto sc2 = eliminate(w2, 2);
    REQUIRE(sc2.size() == 4);
    const double sigma = std::sqrt(1.0 - 4.0 / 9.0 - 1.0 / 9.0);
    for (const auto& s : sc2) {
        const double expected = (1.0 - s.signs[0] * 2.0 / 3.0 - s.signs[1] / 3.0) / sigma;
        CHECK(s.map_threshold(1.0) == doctest::Approx(expected));
        CHECK(s.map_threshold(SurdSum{Surd(R(1))}).to_double() == doctest::Approx(expected));
    }

    CHECK_THROWS_AS(eliminate(w, 2), Error);
    CHECK_THROWS_AS(eliminate(w, 0), Error);
}

TEST_CASE("elimination identity holds exactly")
{
    auto check_identity = [](const WeightVector& w, std::size_t m, const SurdSum& t, TailMode mode) {
        const Rational lhs = exact_tail(w, TailQuery{mode, t, {}}).to_rational();
        Rational rhs = 0;
        for (const auto& sc : eliminate(w, m))
            rhs += sc.probability * exact_tail(sc.residual, TailQuery{mode, sc.map_threshold(t), {}}).to_rational();
        CHECK(lhs == rhs);
    };
    check_identity(repeated(Surd(R(1, 2)), 4), 3, SurdSum{Surd(R(1))}, TailMode::GE);
    check_identity(repeated(Surd(R(1, 2)), 4), 3, SurdSum{Surd(R(1))}, TailMode::GT);

    std::mt19937_64 rng(99);
    for (int it = 0; it < 60; ++it) {
        auto w = testing::random_unit_vector(rng, 2, 12);
        if (w.partial_sigma_squared(1) == 0) continue;
        std::uniform_int_distribution<std::size_t> md(1, w.size() - 1);
        const std::size_t m = md(rng);
        if (w.partial_sigma_squared(m) == 0) continue;
        const Rational t = testing::random_rational(rng, -1.5, 1.5);
        check_identity(w, m, SurdSum{Surd(t)}, it % 2 ? TailMode::GE : TailMode::GT);
    }
    // irrational weights and threshold
    check_identity(repeated(parse_surd("1/sqrt(6)"), 6), 2, SurdSum{Surd(R(1))}, TailMode::GE);
    check_identity(repeated(Surd(R(1, 3)), 9), 3, SurdSum{parse_surd("sqrt(2)/2")}, TailMode::GT);
}

TEST_CASE("high-dimensional oracle")
{
    const std::vector<std::vector<Surd>> t2{
        {parse_surd("1/sqrt(3)"), Surd(R(0))},
        {parse_surd("-1/2*sqrt(1/3)"), Surd(R(1, 2))},
        {parse_surd("-1/2*sqrt(1/3)"), Surd(R(-1, 2))},
    };
    auto vs2 = make_vector_set(t2);
    CHECK(high_dim_exact_tail(vs2, NormDirection::NORM_LE_1).to_rational() == R(1, 4));

    const Surd s = parse_surd("sqrt(7/30)");
    const std::vector<std::vector<Surd>> t3{
        {s, Surd(R(1, 3)), Surd(R(1, 5))},
        {s, Surd(R(-1, 3)), Surd(R(-1, 5))},
        {Surd(R(0)), Surd(R(1, 3)), Surd(R(-1, 5))},
        {Surd(R(0)), Surd(R(0)), Surd(R(1, 5))},
        {Surd(R(0)), Surd(R(0)), Surd(R(1, 5))},
    };
    auto vs3 = make_vector_set(t3);
    CHECK(vs3.exact()->total_square == 1);
    CHECK(high_dim_exact_tail(vs3, NormDirection::NORM_LE_1).to_rational() == R(3, 16));

    std::vector<std::vector<Surd>> d1(4, std::vector<Surd>{Surd(R(1, 2))});
    // |X| >= 1 unless the four signs balance: 1 - 6/16.
    CHECK(high_dim_exact_tail(make_vector_set(d1), NormDirection::NORM_GE_1).to_rational() == R(5, 8));
    CHECK(high_dim_exact_tail(make_vector_set(d1), NormDirection::NORM_GE_1) ==
          exact_tail(repeated(Surd(R(1, 2)), 4), TailQuery::abs_ge(SurdSum{Surd(R(1))})));

    CHECK_THROWS_AS(make_vector_set({{Surd(R(1))}, {Surd(R(1)), Surd(R(2))}}), Error);
}

TEST_CASE("d = 1 vector sets agree with the scalar oracle")
{
    std::mt19937_64 rng(5);
    for (int it = 0; it < 50; ++it) {
        std::uniform_int_distribution<int> nd(1, 12);
        auto raw = testing::random_rational_weights(rng, nd(rng));
        std::vector<std::vector<Surd>> vecs;
        for (const auto& r : raw) vecs.push_back({r});
        auto vs = make_vector_set(vecs);
        auto w = normalize_weights(std::span<const Surd>(raw));
        const SurdSum one{Surd(R(1))};
        const Rational ge = high_dim_exact_tail(vs, NormDirection::NORM_GE_1).to_rational();
        CHECK(ge == exact_tail(w, TailQuery::abs_ge(one)).to_rational());
        const Rational le = high_dim_exact_tail(vs, NormDirection::NORM_LE_1).to_rational();
        CHECK(le == 1 - exact_tail(w, TailQuery::abs_in_open(SurdSum{Surd(R(-1))}, one)).to_rational() + 
                     exact_tail(w, TailQuery::abs_in_open(SurdSum{Surd(R(-1))}, one)).to_rational() -
                     exact_tail(w, TailQuery::abs_ge(one)).to_rational() +
                     (exact_tail(w, TailQuery::abs_ge(one)).to_rational() -
                      exact_tail(w, TailQuery::abs_in_open(one, SurdSum{Surd(R(100))})).to_rational()));
    }
}

TEST_CASE("norm tails respect the 0.035 floor on random sets")
{
    std::mt19937_64 rng(11);
    const double floor = norm_tail_floor();
    CHECK(floor > 0.035);
    for (int it = 0; it < 100; ++it) {
        std::uniform_int_distribution<int> nd(1, 12), dd(1, 3), coord(-64, 64);
        const int n = nd(rng), d = dd(rng);
        std::vector<std::vector<Surd>> vecs;
        for (int i = 0; i < n; ++i) {
            std::vector<Surd> v;
            for (int c = 0; c < d; ++c) v.emplace_back(Rational(coord(rng), 64));
            vecs.push_back(v);
        }
        bool all_zero = true;
        for (auto& v : vecs)
            for (auto& s : v) all_zero &= s.is_zero();
        if (all_zero) continue;
        auto vs = make_vector_set(vecs);
        CHECK(high_dim_exact_tail(vs, NormDirection::NORM_GE_1).to_double() >= floor);
        CHECK(high_dim_exact_tail(vs, NormDirection::NORM_LE_1).to_double() >= floor);
    }
}
