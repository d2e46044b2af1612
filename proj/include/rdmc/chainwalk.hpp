#pragma once

// Antichain (Erdos) bounds for clustered signed sums, the k = 2 and k = 3
// separation checks, and the stopped sign-walk W(S; x).
//
// Inputs are surds; every list that gets summed must share one radical so
// the partial sums live on an integer lattice and all checks stay exact.

#include "rdmc/exact.hpp"
#include "rdmc/report.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace rdmc::chainwalk {

/// Largest signed-sum enumeration (weights) for the window checks.
inline constexpr std::size_t kEnumerationCap = 24;
inline constexpr std::size_t kWalkCap = 30;
inline constexpr std::size_t kBestOrderCap = 8;

/// Sum of the k largest entries of the row C(t, 0..t); k > t gives 2^t.
Integer f_largest_binomials(long long k, long long t);

struct ChainCertificate {
    std::vector<Surd> b;             // large weights, descending
    long long k = 1;
    Surd alpha;                      // window half-width
    std::vector<Surd> tail_weights;  // arbitrary extra weights
};

/// Checks Pr[sum of b_i e_i over all weights in (x - alpha, x + alpha)] <= f(k,t)/2^t
/// for every center x by exhaustive enumeration.
VerificationReport check_antichain_bound(const ChainCertificate& c);
VerificationReport check_obs_k2(const Surd& b1, const Surd& b2, const Surd& delta,
                                const std::vector<Surd>& tail = {});
VerificationReport check_obs_k3(const Surd& c1, const Surd& c2, const Surd& c3, const Surd& delta,
                                const std::vector<Surd>& tail = {});

/// Largest number of signed sums of `w` inside one open window of length
/// 2*alpha, together with the number of sums 2^|w|.
struct WindowMass {
    std::uint64_t count = 0;
    std::uint64_t total = 0;
    double fraction() const { return static_cast<double>(count) / static_cast<double>(total); }
};
WindowMass max_window_mass(const std::vector<Surd>& w, const Surd& alpha);

enum class WalkPolicy { FIXED_ORDER, BEST_ORDER_EXHAUSTIVE, HEURISTIC_DESCENDING };
WalkPolicy parse_walk_policy(std::string_view name);  // fixed | best | heuristic
std::string_view to_string(WalkPolicy p);

struct WalkInstance {
    std::vector<Surd> S;
    Surd x;
    WalkPolicy policy = WalkPolicy::BEST_ORDER_EXHAUSTIVE;
    std::optional<Rational> eta;

    /// c = sum d_i^2 / x^2.
    Rational c() const;
    void validate() const;
};

/// Exact Pr[|W_n| >= x] for the walk that freezes once |W_j| >= x.
Rational walk_success_probability(const WalkInstance& w);
/// The order used for `w.policy` (the maximizing one for BEST_ORDER).
std::vector<Surd> walk_order(const WalkInstance& w);

struct WalkEstimate {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double p_hat = 0.0;
    double lcb = 0.0;  // 99% Wilson interval
    double ucb = 1.0;
};

/// Monte Carlo over the order chosen by walk_order. Trials are split into
/// fixed chunks seeded from (seed, chunk index), so the result does not
/// depend on `threads`.
WalkEstimate simulate_walk(const WalkInstance& w, std::uint64_t trials, std::uint64_t seed, unsigned threads = 1);

struct LemmaOptions {
    std::uint64_t mc_trials = 1'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Compares p(S; x) against (c-1)/(c+3) and, when eta is set, (c-1)/(c+eta^2+2eta).
/// Uses the exhaustive best order up to 8 weights, the descending order up to
/// 30 and a Monte Carlo lower confidence bound beyond that.
VerificationReport check_hitting_lemma(const WalkInstance& w, const LemmaOptions& opt = {});

}  // namespace rdmc::chainwalk
