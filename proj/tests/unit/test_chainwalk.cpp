#include "doctest.h"

#include "gen.hpp"
#include "rdmc/chainwalk.hpp"
#include "rdmc/error.hpp"

#include <algorithm>
#include <random>

using namespace rdmc;
using namespace rdmc::chainwalk;

namespace {

Rational R(long p, long q = 1) { return Rational(p, q); }

std::vector<Surd> surds(std::initializer_list<Rational> v)
{
    std::vector<Surd> out;
    for (const auto& r : v) out.emplace_back(r);
    return out;
}

// Independent window oracle: every open window of length 2 alpha that holds a
// maximal cluster can be shifted so its left end sits just below a sum, so
// counting sums in [s, s + 2 alpha) for every sum s suffices.
std::uint64_t window_oracle(const std::vector<Rational>& w, const Rational& alpha)
{
    std::vector<Rational> sums;
    for (std::size_t m = 0; m < (std::size_t{1} << w.size()); ++m) {
        Rational s = 0;
        for (std::size_t i = 0; i < w.size(); ++i) s += (m >> i & 1) ? w[i] : -w[i];
        sums.push_back(s);
    }
    std::uint64_t best = 0;
    for (const auto& lo : sums) {
        std::uint64_t c = 0;
        for (const auto& s : sums) c += (s >= lo && s < lo + 2 * alpha) ? 1 : 0;
        best = std::max(best, c);
    }
    return best;
}

// Independent walk oracle: a full sign vector succeeds iff some prefix reaches |W| >= x.
Rational walk_oracle(const std::vector<Rational>& d, const Rational& x)
{
    std::uint64_t wins = 0;
    for (std::size_t m = 0; m < (std::size_t{1} << d.size()); ++m) {
        Rational s = 0;
        bool hit = false;
        for (std::size_t i = 0; i < d.size() && !hit; ++i) {
            s += (m >> i & 1) ? d[i] : -d[i];
            hit = s >= x || s <= -x;
        }
        wins += hit ? 1 : 0;
    }
    return Rational(Integer(wins), Integer(1) << d.size());
}

std::vector<Rational> rationals(const std::vector<Surd>& v)
{
    std::vector<Rational> out;
    for (const auto& s : v) out.push_back(s.coef());
    return out;
}

WalkInstance walk(std::vector<Surd> S, Surd x, WalkPolicy p = WalkPolicy::FIXED_ORDER)
{
    WalkInstance w;
    w.S = std::move(S);
    w.x = std::move(x);
    w.policy = p;
    return w;
}

}  // namespace

TEST_CASE("f_largest_binomials")
{
    CHECK(f_largest_binomials(1, 4) == 6);
    CHECK(f_largest_binomials(2, 2) == 3);
    CHECK(f_largest_binomials(3, 3) == 7);
    CHECK(f_largest_binomials(5, 4) == 16);
    CHECK(f_largest_binomials(9, 4) == 16);
    CHECK(f_largest_binomials(2, 5) == 20);
    CHECK_THROWS_AS(f_largest_binomials(0, 3), Error);

    for (long long t = 1; t <= 20; ++t) {
        for (long long k = 1; k <= t; ++k) {
            CHECK(f_largest_binomials(k, t) >= f_largest_binomials(k - (k > 1 ? 1 : 0), t));
            CHECK(f_largest_binomials(k, t + 1) >= f_largest_binomials(k, t));
            // f(k,t)/2^t does not increase with t.
            CHECK(f_largest_binomials(k, t + 1) <= 2 * f_largest_binomials(k, t));
        }
    }
}

TEST_CASE("antichain bound examples")
{
    auto r = check_antichain_bound({surds({R(1), R(1)}), 2, Surd(R(2)), {}});
    CHECK(r.all_pass());
    CHECK(r.items.back().target == doctest::Approx(0.75));

    auto r2 = check_antichain_bound({surds({R(1), R(1), R(1), R(1)}), 1, Surd(R(1)), {}});
    CHECK(r2.all_pass());
    CHECK(r2.items.back().achieved == doctest::Approx(6.0 / 16));  // sums 0 appear 6 times
    CHECK(r2.items.back().target == doctest::Approx(3.0 / 8));

    // k = t with alpha the full sum.
    auto r3 = check_antichain_bound({surds({R(3), R(2), R(1)}), 3, Surd(R(6)), surds({R(1, 2)})});
    CHECK(r3.all_pass());

    // Premise fails: smallest weight 1 < alpha = 2 with k = 1.
    auto bad = check_antichain_bound({surds({R(2), R(1)}), 1, Surd(R(2)), {}});
    CHECK_FALSE(bad.all_pass());
    CHECK(bad.notes.size() == 1);
    for (const auto& it : bad.items) CHECK(it.description.find("mass") == std::string::npos);
}

TEST_CASE("window mass matches the breakpoint oracle")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto w = testing::random_rational_weights(rng, 1 + static_cast<int>(rng() % 9), 16);
        Rational alpha = testing::random_rational(rng, 1.0 / 16, 2.0, 16);
        auto m = max_window_mass(w, Surd(alpha));
        CHECK(m.count == window_oracle(rationals(w), alpha));
        CHECK(m.total == (std::uint64_t{1} << w.size()));
    }
}

TEST_CASE("antichain bound holds on random premise-satisfying certificates")
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        int t = 1 + static_cast<int>(rng() % 8);
        auto b = testing::random_rational_weights(rng, t);
        std::sort(b.begin(), b.end(), [](const Surd& x, const Surd& y) { return x.coef() > y.coef(); });
        long long k = 1 + static_cast<long long>(rng() % static_cast<unsigned>(t));
        Rational smallest = 0;
        for (long long i = t - k; i < t; ++i) smallest += b[static_cast<std::size_t>(i)].coef();
        // alpha anywhere in (0, smallest-k sum].
        Rational alpha = smallest * Rational(1 + static_cast<long>(rng() % 64), 64);
        auto tail = testing::random_rational_weights(rng, static_cast<int>(rng() % 5));
        auto r = check_antichain_bound({b, k, Surd(alpha), tail});
        CHECK(r.all_pass());
    }
}

TEST_CASE("observation k = 2")
{
    const Surd delta(R(1, 10));
    auto r = check_obs_k2(Surd(R(2, 10)), Surd(R(4, 10)), delta, surds({R(1, 7), R(3, 5)}));
    CHECK(r.all_pass());
    CHECK(r.items.back().achieved <= 0.25);

    auto bad = check_obs_k2(delta, delta, delta);
    CHECK_FALSE(bad.all_pass());
    CHECK(bad.notes == std::vector<std::string>{"premise violated; no conclusion claimed"});

    // Surd weights on one radical.
    auto s = check_obs_k2(parse_surd("sqrt(2)"), parse_surd("3*sqrt(2)"), Surd(R(1)), {parse_surd("1/2*sqrt(2)")});
    CHECK(s.all_pass());
}

TEST_CASE("observation k = 3")
{
    const Surd delta(R(1, 10));
    auto r = check_obs_k3(Surd(R(7, 10)), Surd(R(5, 10)), Surd(R(3, 10)), delta);
    CHECK(r.all_pass());
    CHECK(r.items.back().achieved == doctest::Approx(1.0 / 8));

    // |c1 - c2 - c3| = 0 < delta.
    auto bad = check_obs_k3(Surd(R(8, 10)), Surd(R(5, 10)), Surd(R(3, 10)), delta);
    CHECK_FALSE(bad.all_pass());

    std::mt19937_64 rng(13);
    int checked = 0;
    while (checked < 100) {
        auto c = testing::random_rational_weights(rng, 3);
        std::sort(c.begin(), c.end(), [](const Surd& x, const Surd& y) { return x.coef() > y.coef(); });
        Rational d = testing::random_rational(rng, 1.0 / 64, 0.25);
        Rational c1 = c[0].coef(), c2 = c[1].coef(), c3 = c[2].coef();
        Rational e = c1 - c2 - c3;
        if (c3 < d || c1 - c2 < d || c2 - c3 < d || (e < 0 ? -e : e) < d) continue;
        auto tail = testing::random_rational_weights(rng, static_cast<int>(rng() % 5));
        CHECK(check_obs_k3(c[0], c[1], c[2], Surd(d), tail).all_pass());
        ++checked;
    }
}

TEST_CASE("walk success probability examples")
{
    const Surd x(R(1));
    CHECK(walk_success_probability(walk(surds({R(1, 2)}), x)) == 0);
    CHECK(walk_success_probability(walk(surds({R(3, 5), R(3, 5)}), x)) == R(1, 2));
    CHECK(walk_success_probability(walk(surds({R(1, 3), R(3, 2)}), x, WalkPolicy::BEST_ORDER_EXHAUSTIVE)) == 1);
    // Hitting exactly x counts.
    CHECK(walk_success_probability(walk(surds({R(1, 2), R(1, 2)}), x)) == R(1, 2));

    // x / sqrt(2) four times: a simple walk absorbed at +-2 within 4 steps.
    std::vector<Surd> s(4, parse_surd("sqrt(1/2)"));
    CHECK(walk_success_probability(walk(s, x)) == R(3, 4));

    CHECK_THROWS_AS(walk_success_probability(walk(std::vector<Surd>(9, Surd(R(1))), x, WalkPolicy::BEST_ORDER_EXHAUSTIVE)),
                    Error);
    CHECK_THROWS_AS(walk_success_probability(walk(std::vector<Surd>(31, Surd(R(1))), x)), Error);
    CHECK_THROWS_AS(walk_success_probability(walk(surds({R(1, 2), R(0)}), x)), Error);
    CHECK(parse_walk_policy("best") == WalkPolicy::BEST_ORDER_EXHAUSTIVE);
    CHECK_THROWS_AS(parse_walk_policy("greedy"), Error);
}

TEST_CASE("walk probability matches the prefix oracle")
{
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 150; ++trial) {
        auto S = testing::random_rational_weights(rng, 1 + static_cast<int>(rng() % 10), 16);
        Rational x = testing::random_rational(rng, 0.1, 2.0, 16);
        CHECK(walk_success_probability(walk(S, Surd(x))) == walk_oracle(rationals(S), x));
    }
}

TEST_CASE("best order dominates every fixed order")
{
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 40; ++trial) {
        auto S = testing::random_rational_weights(rng, 1 + static_cast<int>(rng() % 6), 8);
        Rational x = testing::random_rational(rng, 0.25, 1.5, 8);
        Rational best = walk_success_probability(walk(S, Surd(x), WalkPolicy::BEST_ORDER_EXHAUSTIVE));
        auto sorted = rationals(S);
        std::sort(sorted.begin(), sorted.end());
        Rational max_fixed = 0;
        do {
            max_fixed = std::max(max_fixed, walk_oracle(sorted, x));
        } while (std::next_permutation(sorted.begin(), sorted.end()));
        CHECK(best == max_fixed);
        CHECK(walk_success_probability(walk(S, Surd(x), WalkPolicy::HEURISTIC_DESCENDING)) <= best);

        WalkInstance w = walk(S, Surd(x), WalkPolicy::BEST_ORDER_EXHAUSTIVE);
        CHECK(walk_success_probability(walk(walk_order(w), Surd(x))) == best);
    }
}

TEST_CASE("walk probability is scale invariant")
{
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 30; ++trial) {
        auto S = testing::random_rational_weights(rng, 1 + static_cast<int>(rng() % 8), 16);
        Rational x = testing::random_rational(rng, 0.1, 2.0, 16);
        Surd lambda = trial % 2 ? Surd(R(7, 3)) : parse_surd("sqrt(3)");
        std::vector<Surd> scaled;
        for (const auto& s : S) scaled.push_back(lambda * s);
        CHECK(walk_success_probability(walk(S, Surd(x))) ==
              walk_success_probability(walk(scaled, lambda * Surd(x))));
    }
}

TEST_CASE("hitting lemma")
{
    std::vector<Surd> s(4, parse_surd("sqrt(1/2)"));
    auto r = check_hitting_lemma(walk(s, Surd(R(1))));
    REQUIRE(r.items.size() == 1);
    CHECK(r.items[0].target == doctest::Approx(0.2));
    CHECK(r.items[0].achieved == doctest::Approx(0.75));
    CHECK(r.all_pass());

    // c <= 1 is skipped.
    auto skip = check_hitting_lemma(walk(surds({R(1, 2)}), Surd(R(1))));
    CHECK(skip.items.empty());
    CHECK(skip.notes.size() == 1);

    // A weight beyond x forces p = 1.
    auto big = check_hitting_lemma(walk(surds({R(2), R(1, 3)}), Surd(R(1))));
    CHECK(big.all_pass());
    CHECK(big.items[0].achieved == 1.0);

    // Random exactly solvable instances, both forms.
    std::mt19937_64 rng(17);
    int checked = 0;
    while (checked < 150) {
        auto S = testing::random_rational_weights(rng, 2 + static_cast<int>(rng() % 13), 32);
        Rational x = testing::random_rational(rng, 0.1, 1.5, 32);
        WalkInstance w = walk(S, Surd(x));
        if (w.c() <= 1) continue;
        Rational eta = 0;
        for (const auto& d : S)
            if (d.coef() < x) eta = std::max(eta, Rational(d.coef() / x));
        if (eta > 0) w.eta = eta;
        auto rep = check_hitting_lemma(w);
        CHECK(rep.all_pass());
        ++checked;
    }
}

TEST_CASE("monte carlo walk")
{
    const Surd x(R(1));
    auto sure = simulate_walk(walk(surds({R(2)}), x), 1000, 5);
    CHECK(sure.successes == 1000);
    CHECK(sure.p_hat == 1.0);
    CHECK(sure.lcb > 0.99);

    auto w = walk(surds({R(3, 5), R(3, 5), R(1, 4), R(1, 3)}), x);
    auto a = simulate_walk(w, 100000, 42, 1);
    auto b = simulate_walk(w, 100000, 42, 3);
    CHECK(a.successes == b.successes);
    auto c = simulate_walk(w, 100000, 43, 1);
    CHECK(a.successes != c.successes);

    const double p = to_double(walk_success_probability(w));
    CHECK(a.lcb <= p);
    CHECK(p <= a.ucb);
    CHECK_THROWS_AS(simulate_walk(w, 0, 1), Error);
}
