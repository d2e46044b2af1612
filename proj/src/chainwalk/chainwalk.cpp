#include "rdmc/chainwalk.hpp"

#include "rdmc/error.hpp"

#include <boost/integer/common_factor_rt.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <thread>

namespace rdmc::chainwalk {

namespace {

using i64 = std::int64_t;

// Values n * sqrt(r) / L with integer n: a common radical r and a common
// denominator L for a list of surds.
struct Lattice {
    Rational radicand{1};
    Integer scale{1};
    std::vector<i64> steps;

    // Smallest integer M >= 0 with M sqrt(r) / L >= y.
    i64 reach(const Surd& y) const
    {
        if (y.sign() <= 0) return 0;
        Rational tau = y.square() * Rational(scale * scale) / radicand;
        Integer m = isqrt_floor(tau);
        if (Rational(m * m) != tau) m += 1;
        require(m < Integer(std::numeric_limits<i64>::max() / 4), ErrorCode::CapExceeded,
                "threshold does not fit the integer lattice");
        return static_cast<i64>(m);
    }
};

Lattice make_lattice(const std::vector<Surd>& values)
{
    Lattice lat;
    const Surd* base = nullptr;
    for (const auto& v : values) {
        if (!v.is_zero()) {
            base = &v;
            break;
        }
    }
    if (base == nullptr) {
        lat.steps.assign(values.size(), 0);
        return lat;
    }
    lat.radicand = base->radicand();
    std::vector<Rational> q;
    q.reserve(values.size());
    Integer L = 1;
    for (const auto& v : values) {
        require(base->same_radical(v), ErrorCode::ExactUnavailable,
                "weights " + base->str() + " and " + v.str() + " do not share a radical");
        q.push_back(base->ratio_on_radical(v));
        L = boost::integer::lcm(L, Integer(boost::multiprecision::denominator(q.back())));
    }
    lat.scale = L;
    Integer total = 0;
    for (const auto& r : q) {
        Integer n = boost::multiprecision::numerator(r) * (L / boost::multiprecision::denominator(r));
        total += abs(n);
        lat.steps.push_back(0);
        if (total < Integer(std::numeric_limits<i64>::max() / 4)) lat.steps.back() = static_cast<i64>(n);
    }
    require(total < Integer(std::numeric_limits<i64>::max() / 4), ErrorCode::CapExceeded,
            "weights do not fit the integer lattice");
    return lat;
}

// All 2^n signed sums, sorted, built by merging S - w and S + w.
std::vector<i64> signed_sums(const std::vector<i64>& w)
{
    std::vector<i64> s{0};
    std::vector<i64> lo, hi;
    for (i64 v : w) {
        lo.resize(s.size());
        hi.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            lo[i] = s[i] - v;
            hi[i] = s[i] + v;
        }
        if (v < 0) std::swap(lo, hi);
        s.resize(lo.size() * 2);
        std::merge(lo.begin(), lo.end(), hi.begin(), hi.end(), s.begin());
    }
    return s;
}

// Max number of sorted values with max - min <= span (two pointers).
std::uint64_t max_cluster(const std::vector<i64>& sorted, i64 span)
{
    std::uint64_t best = 0;
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < sorted.size(); ++hi) {
        while (sorted[hi] - sorted[lo] > span) ++lo;
        best = std::max<std::uint64_t>(best, hi - lo + 1);
    }
    return best;
}

WindowMass window_mass(const Lattice& lat, const Surd& alpha)
{
    require(alpha.sign() > 0, ErrorCode::InvalidArgument, "window half-width must be positive");
    require(lat.steps.size() <= kEnumerationCap, ErrorCode::CapExceeded,
            "window enumeration is capped at " + std::to_string(kEnumerationCap) + " weights");
    // Sums fit in an open window of length 2 alpha iff their spread D satisfies
    // D sqrt(r)/L < 2 alpha, i.e. D <= reach(2 alpha) - 1.
    const i64 span = lat.reach(Surd(Rational(2)) * alpha) - 1;
    const auto sums = signed_sums(lat.steps);
    WindowMass m;
    m.total = sums.size();
    m.count = span < 0 ? 1 : max_cluster(sums, span);
    return m;
}

std::vector<Surd> concat(const std::vector<Surd>& a, const std::vector<Surd>& b)
{
    std::vector<Surd> out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::string join(const std::vector<Surd>& v)
{
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x.str();
    return s;
}

std::string ratio(std::uint64_t num, std::uint64_t den)
{
    return std::to_string(num) + "/" + std::to_string(den);
}

// Shared tail of the k = 2 and k = 3 checks: the premise items are already in r.
void separation_conclusion(VerificationReport& r, const std::vector<Surd>& lead, const std::vector<Surd>& tail,
                           const Surd& delta, std::uint64_t denominator)
{
    if (!r.all_pass()) {
        r.notes.push_back("premise violated; no conclusion claimed");
        return;
    }
    const auto all = concat(lead, tail);
    const WindowMass m = window_mass(make_lattice(all), delta);
    // count / 2^s <= 1/den  <=>  count * den <= 2^s
    r.add_at_most("max mass of an open window of length 2*delta", 1.0 / static_cast<double>(denominator),
                  m.fraction(), ratio(m.count, m.total) + " over " + std::to_string(all.size()) + " weights")
        .pass = m.count * denominator <= m.total;
}

// |sum over a nonempty signed subset| >= delta for every subset of `lead`.
void difference_set(VerificationReport& r, const std::vector<Surd>& lead, const Surd& delta)
{
    const Lattice lat = make_lattice(lead);
    const i64 need = lat.reach(delta);
    const std::size_t n = lead.size();
    i64 smallest = std::numeric_limits<i64>::max();
    // Fixing the sign of the first member of the subset covers each value up to sign.
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::size_t first = static_cast<std::size_t>(__builtin_ctzll(mask));
        std::size_t others = mask & ~(std::size_t{1} << first);
        for (std::size_t signs = 0; signs < (std::size_t{1} << n); ++signs) {
            if ((signs & ~others) != 0) continue;
            i64 v = lat.steps[first];
            for (std::size_t i = first + 1; i < n; ++i) {
                if (!(others >> i & 1)) continue;
                v += (signs >> i & 1) ? -lat.steps[i] : lat.steps[i];
            }
            smallest = std::min(smallest, v < 0 ? -v : v);
        }
    }
    const bool ok = smallest >= need;
    r.add_check("difference set has no element below delta", ok,
                "smallest |signed subset sum| = " +
                    (Surd(Rational(smallest) / Rational(lat.scale), lat.radicand)).str());
}

void premise(VerificationReport& r, const std::string& what, const SurdSum& lhs_minus_rhs)
{
    r.add_check(what, lhs_minus_rhs.sign() >= 0);
}

SurdSum diff(const Surd& a, const Surd& b) { return SurdSum{a, -b}; }

}  // namespace

Integer f_largest_binomials(long long k, long long t)
{
    require(k > 0, ErrorCode::InvalidArgument, "k must be positive");
    require(t >= 0, ErrorCode::InvalidArgument, "t must be non-negative");
    std::vector<Integer> row(static_cast<std::size_t>(t) + 1);
    row[0] = 1;
    for (long long i = 1; i <= t; ++i) row[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(i - 1)] * (t - i + 1) / i;
    std::sort(row.begin(), row.end(), std::greater<>());
    Integer sum = 0;
    for (std::size_t i = 0; i < row.size() && static_cast<long long>(i) < k; ++i) sum += row[i];
    return sum;
}

WindowMass max_window_mass(const std::vector<Surd>& w, const Surd& alpha)
{
    return window_mass(make_lattice(w), alpha);
}

VerificationReport check_antichain_bound(const ChainCertificate& c)
{
    VerificationReport r;
    r.campaign = "chain-antichain";
    r.set("b", join(c.b));
    r.set("k", std::to_string(c.k));
    r.set("alpha", c.alpha.str());
    r.set("tail", join(c.tail_weights));

    const auto t = static_cast<long long>(c.b.size());
    require(t > 0, ErrorCode::InvalidArgument, "certificate needs at least one weight");
    require(c.k > 0, ErrorCode::InvalidArgument, "k must be positive");
    require(c.alpha.sign() > 0, ErrorCode::InvalidArgument, "alpha must be positive");

    bool positive = std::all_of(c.b.begin(), c.b.end(), [](const Surd& s) { return s.sign() > 0; });
    r.add_check("weights b are positive", positive);
    bool sorted = true;
    for (std::size_t i = 1; i < c.b.size(); ++i) sorted = sorted && diff(c.b[i - 1], c.b[i]).sign() >= 0;
    r.add_check("weights b are sorted descending", sorted);
    r.add_check("k <= t", c.k <= t);
    if (r.all_pass()) {
        SurdSum smallest_k;
        for (long long i = t - c.k; i < t; ++i) smallest_k.add(c.b[static_cast<std::size_t>(i)]);
        smallest_k.add(-c.alpha);
        premise(r, "sum of the k smallest b is at least alpha", smallest_k);
    }
    if (!r.all_pass()) {
        r.notes.push_back("premise violated; no conclusion claimed");
        return r;
    }

    const auto all = concat(c.b, c.tail_weights);
    const WindowMass m = window_mass(make_lattice(all), c.alpha);
    const Integer f = f_largest_binomials(c.k, t);
    // count / 2^s <= f / 2^t  <=>  count <= f * 2^(s - t)
    const Integer allowed = f << static_cast<unsigned>(all.size() - c.b.size());
    r.add_at_most("max mass of an open window of length 2*alpha", to_double(Rational(f, Integer(1) << t)),
                  m.fraction(), ratio(m.count, m.total) + " vs f(k,t)/2^t = " + f.str() + "/2^" + std::to_string(t))
        .pass = Integer(m.count) <= allowed;
    return r;
}

VerificationReport check_obs_k2(const Surd& b1, const Surd& b2, const Surd& delta, const std::vector<Surd>& tail)
{
    VerificationReport r;
    r.campaign = "chain-k2";
    r.set("b", join({b1, b2}));
    r.set("delta", delta.str());
    r.set("tail", join(tail));
    require(delta.sign() > 0, ErrorCode::InvalidArgument, "delta must be positive");
    premise(r, "b1 >= delta", diff(b1, delta));
    premise(r, "b2 >= delta", diff(b2, delta));
    const Surd& hi = diff(b1, b2).sign() >= 0 ? b1 : b2;
    const Surd& lo = &hi == &b1 ? b2 : b1;
    premise(r, "|b1 - b2| >= delta", SurdSum{hi, -lo, -delta});
    if (r.all_pass()) difference_set(r, {b1, b2}, delta);
    separation_conclusion(r, {b1, b2}, tail, delta, 4);
    return r;
}

VerificationReport check_obs_k3(const Surd& c1, const Surd& c2, const Surd& c3, const Surd& delta,
                                const std::vector<Surd>& tail)
{
    VerificationReport r;
    r.campaign = "chain-k3";
    r.set("c", join({c1, c2, c3}));
    r.set("delta", delta.str());
    r.set("tail", join(tail));
    require(delta.sign() > 0, ErrorCode::InvalidArgument, "delta must be positive");
    premise(r, "c3 >= delta", diff(c3, delta));
    premise(r, "c1 - c2 >= delta", SurdSum{c1, -c2, -delta});
    premise(r, "c2 - c3 >= delta", SurdSum{c2, -c3, -delta});
    // |c1 - c2 - c3| >= delta, tested on both signs; SurdSum holds at most three radicals.
    const Lattice lat = make_lattice({c1, c2, c3});
    const i64 v = lat.steps[0] - lat.steps[1] - lat.steps[2];
    r.add_check("|c1 - c2 - c3| >= delta", (v < 0 ? -v : v) >= lat.reach(delta));
    if (r.all_pass()) difference_set(r, {c1, c2, c3}, delta);
    separation_conclusion(r, {c1, c2, c3}, tail, delta, 8);
    return r;
}

WalkPolicy parse_walk_policy(std::string_view name)
{
    if (name == "fixed") return WalkPolicy::FIXED_ORDER;
    if (name == "best") return WalkPolicy::BEST_ORDER_EXHAUSTIVE;
    if (name == "heuristic") return WalkPolicy::HEURISTIC_DESCENDING;
    fail(ErrorCode::InvalidArgument, "unknown walk policy '" + std::string(name) + "' (fixed|best|heuristic)");
}

std::string_view to_string(WalkPolicy p)
{
    switch (p) {
    case WalkPolicy::FIXED_ORDER: return "fixed";
    case WalkPolicy::BEST_ORDER_EXHAUSTIVE: return "best";
    case WalkPolicy::HEURISTIC_DESCENDING: return "heuristic";
    }
    return "?";
}

Rational WalkInstance::c() const
{
    Rational s = 0;
    for (const auto& d : S) s += d.square();
    return s / x.square();
}

void WalkInstance::validate() const
{
    require(!S.empty(), ErrorCode::InvalidArgument, "walk needs at least one weight");
    require(x.sign() > 0, ErrorCode::InvalidArgument, "threshold x must be positive");
    for (const auto& d : S) require(d.sign() > 0, ErrorCode::InvalidArgument, "walk weights must be positive");
    if (eta) require(*eta > 0, ErrorCode::InvalidArgument, "eta must be positive");
    const std::size_t cap = policy == WalkPolicy::BEST_ORDER_EXHAUSTIVE ? kBestOrderCap : kWalkCap;
    require(S.size() <= cap, ErrorCode::CapExceeded,
            "policy '" + std::string(to_string(policy)) + "' is capped at " + std::to_string(cap) + " weights");
}

namespace {

// Exact absorbed mass in units of 2^-n for a fixed order of integer steps.
std::uint64_t absorbed_mass(const std::vector<i64>& steps, i64 cut)
{
    const std::size_t n = steps.size();
    std::map<i64, std::uint64_t> live{{0, std::uint64_t{1} << n}};
    std::uint64_t absorbed = 0;
    if (cut <= 0) return std::uint64_t{1} << n;
    for (i64 d : steps) {
        std::map<i64, std::uint64_t> next;
        for (const auto& [s, mass] : live) {
            const std::uint64_t half = mass / 2;
            for (i64 v : {s - d, s + d}) {
                if (v >= cut || v <= -cut)
                    absorbed += half;
                else
                    next[v] += half;
            }
        }
        live.swap(next);
        if (live.empty()) break;
    }
    return absorbed;
}

struct WalkLattice {
    std::vector<i64> steps;  // in the order of WalkInstance::S
    i64 cut = 0;
};

WalkLattice walk_lattice(const WalkInstance& w)
{
    Lattice lat = make_lattice(w.S);
    return {lat.steps, lat.reach(w.x)};
}

std::vector<std::size_t> descending_order(const WalkInstance& w)
{
    std::vector<std::size_t> idx(w.S.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return diff(w.S[a], w.S[b]).sign() > 0; });
    return idx;
}

// Best fixed order: the permutation of the (sorted) integer steps with the largest absorbed mass.
std::pair<std::vector<i64>, std::uint64_t> best_order(const WalkLattice& lat)
{
    std::vector<i64> perm = lat.steps;
    std::sort(perm.begin(), perm.end());
    std::vector<i64> best = perm;
    std::uint64_t best_mass = 0;
    do {
        const std::uint64_t m = absorbed_mass(perm, lat.cut);
        if (m > best_mass) {
            best_mass = m;
            best = perm;
        }
    } while (best_mass < (std::uint64_t{1} << perm.size()) && std::next_permutation(perm.begin(), perm.end()));
    return {best, best_mass};
}

std::vector<i64> ordered_steps(const WalkInstance& w, const WalkLattice& lat)
{
    switch (w.policy) {
    case WalkPolicy::FIXED_ORDER: return lat.steps;
    case WalkPolicy::HEURISTIC_DESCENDING: {
        std::vector<i64> out;
        for (std::size_t i : descending_order(w)) out.push_back(lat.steps[i]);
        return out;
    }
    case WalkPolicy::BEST_ORDER_EXHAUSTIVE: return best_order(lat).first;
    }
    return lat.steps;
}

}  // namespace

Rational walk_success_probability(const WalkInstance& w)
{
    w.validate();
    const WalkLattice lat = walk_lattice(w);
    const std::uint64_t mass = absorbed_mass(ordered_steps(w, lat), lat.cut);
    return Rational(Integer(mass), Integer(1) << w.S.size());
}

std::vector<Surd> walk_order(const WalkInstance& w)
{
    w.validate();
    switch (w.policy) {
    case WalkPolicy::FIXED_ORDER: return w.S;
    case WalkPolicy::HEURISTIC_DESCENDING: {
        std::vector<Surd> out;
        for (std::size_t i : descending_order(w)) out.push_back(w.S[i]);
        return out;
    }
    case WalkPolicy::BEST_ORDER_EXHAUSTIVE: {
        const WalkLattice lat = walk_lattice(w);
        const auto best = best_order(lat).first;
        // Map integer steps back to the surds they came from.
        std::vector<Surd> out;
        std::vector<bool> used(w.S.size(), false);
        for (i64 v : best) {
            for (std::size_t i = 0; i < w.S.size(); ++i) {
                if (!used[i] && lat.steps[i] == v) {
                    used[i] = true;
                    out.push_back(w.S[i]);
                    break;
                }
            }
        }
        return out;
    }
    }
    return w.S;
}

namespace {

constexpr std::uint64_t kChunk = 1 << 14;

double wilson_z()
{
    static const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.995);
    return z;
}

// Successes in trials [chunk*kChunk, min(trials, (chunk+1)*kChunk)).
std::uint64_t run_chunk(const std::vector<i64>& steps, i64 cut, std::uint64_t seed, std::uint64_t chunk,
                        std::uint64_t count)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    std::mt19937_64 rng(seq);
    std::uint64_t wins = 0;
    std::uint64_t bits = 0;
    int left = 0;
    for (std::uint64_t t = 0; t < count; ++t) {
        i64 s = 0;
        bool hit = cut <= 0;
        for (std::size_t i = 0; i < steps.size() && !hit; ++i) {
            if (left == 0) {
                bits = rng();
                left = 64;
            }
            s += (bits & 1) ? steps[i] : -steps[i];
            bits >>= 1;
            --left;
            hit = s >= cut || s <= -cut;
        }
        wins += hit ? 1 : 0;
    }
    return wins;
}

}  // namespace

WalkEstimate simulate_walk(const WalkInstance& w, std::uint64_t trials, std::uint64_t seed, unsigned threads)
{
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be at least 1");
    WalkInstance fixed = w;
    fixed.S = walk_order(w);
    fixed.policy = WalkPolicy::FIXED_ORDER;
    const WalkLattice lat = walk_lattice(fixed);

    const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> wins(chunks, 0);
    auto work = [&](unsigned id, unsigned stride) {
        for (std::uint64_t c = id; c < chunks; c += stride)
            wins[c] = run_chunk(lat.steps, lat.cut, seed, c, std::min(kChunk, trials - c * kChunk));
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work, i, threads);
        for (auto& t : pool) t.join();
    }

    WalkEstimate e;
    e.trials = trials;
    for (auto v : wins) e.successes += v;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(e.successes) / n;
    const double z = wilson_z();
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    e.p_hat = p;
    e.lcb = std::max(0.0, centre - half);
    e.ucb = std::min(1.0, centre + half);
    return e;
}

VerificationReport check_hitting_lemma(const WalkInstance& w, const LemmaOptions& opt)
{
    VerificationReport r;
    r.campaign = "walk-lemma";
    r.set("S", join(w.S));
    r.set("x", w.x.str());
    if (w.eta) r.set("eta", rdmc::to_string(*w.eta));

    WalkInstance probe = w;
    probe.policy = WalkPolicy::FIXED_ORDER;
    probe.S.resize(std::min(w.S.size(), kWalkCap));
    probe.validate();  // positivity checks without the size cap
    const Rational c = w.c();
    r.set("c", rdmc::to_string(c));
    if (c <= 1) {
        r.set("status", "skipped");
        r.notes.push_back("c = " + rdmc::to_string(c) + " <= 1, the bound is vacuous");
        return r;
    }

    // A success probability or a certified lower bound on it.
    double achieved = 0.0;
    std::string how;
    Rational exact = -1;
    if (w.S.size() <= kBestOrderCap) {
        WalkInstance best = w;
        best.policy = WalkPolicy::BEST_ORDER_EXHAUSTIVE;
        exact = walk_success_probability(best);
        how = "exact, best order";
    } else if (w.S.size() <= kWalkCap) {
        WalkInstance desc = w;
        desc.policy = WalkPolicy::HEURISTIC_DESCENDING;
        exact = walk_success_probability(desc);
        how = "exact, descending order";
    } else {
        WalkInstance desc = w;
        desc.policy = WalkPolicy::HEURISTIC_DESCENDING;
        const auto est = simulate_walk(desc, opt.mc_trials, opt.seed, opt.threads);
        achieved = est.lcb;
        how = "Monte Carlo 99% lower confidence bound, " + std::to_string(est.trials) + " trials, p_hat " +
              std::to_string(est.p_hat);
    }
    if (exact >= 0) achieved = to_double(exact);
    r.set("method", how);

    auto compare = [&](const std::string& label, const Rational& bound) {
        std::string detail = "bound " + rdmc::to_string(bound);
        if (exact >= 0) detail += ", p = " + rdmc::to_string(exact);
        auto& item = r.add_at_least(label, to_double(bound), achieved, detail);
        if (exact >= 0) item.pass = exact >= bound;
    };
    compare("p(S;x) >= (c-1)/(c+3)", (c - 1) / (c + 3));

    if (w.eta) {
        const Rational& eta = *w.eta;
        bool split = true;
        for (const auto& d : w.S) {
            const Rational d2 = d.square();
            const Rational x2 = w.x.square();
            split = split && (d2 <= eta * eta * x2 || d2 >= x2);
        }
        r.add_check("every weight lies in (0, eta x] or [x, inf)", split);
        if (split)
            compare("p(S;x) >= (c-1)/(c+eta^2+2eta)", (c - 1) / (c + eta * eta + 2 * eta));
        else
            r.notes.push_back("eta premise violated; the eta bound is not claimed");
    }
    return r;
}

}  // namespace rdmc::chainwalk
