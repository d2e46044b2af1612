#include "rdmc/core.hpp"

#include "rdmc/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace rdmc::core {

namespace mp = boost::multiprecision;

namespace {

/// Raw weights scaled to integers over a common denominator: raw_i = ints[i] / denom.
struct IntegerWeights {
    std::vector<std::int64_t> ints;
    Integer denom;
    std::int64_t total = 0;  // sum |ints|, bounds every signed sum
};

IntegerWeights integerize(const std::vector<Rational>& raw)
{
    IntegerWeights iw;
    iw.denom = 1;
    for (const auto& r : raw) iw.denom = mp::lcm(iw.denom, Integer(mp::denominator(r)));
    Integer total = 0;
    const Integer limit = Integer(1) << 61;
    for (const auto& r : raw) {
        Integer v = mp::numerator(r) * (iw.denom / mp::denominator(r));
        total += mp::abs(v);
        require(total < limit, ErrorCode::ExactUnavailable,
                "weights need more than 61 bits over a common denominator");
        iw.ints.push_back(v.convert_to<std::int64_t>());
    }
    iw.total = total.convert_to<std::int64_t>();
    return iw;
}

void check_cap(std::size_t n, const OracleConfig& cfg)
{
    require(cfg.enumeration_cap >= 1 && cfg.enumeration_cap <= kMaxEnumerationCap, ErrorCode::InvalidArgument,
            "enumeration cap must be in [1, " + std::to_string(kMaxEnumerationCap) + "]");
    require(n <= static_cast<std::size_t>(cfg.enumeration_cap), ErrorCode::CapExceeded,
            "n = " + std::to_string(n) + " exceeds the enumeration cap " + std::to_string(cfg.enumeration_cap));
}

/// Visits sum_i eps_i ints[i] for all 2^n sign vectors (Gray code order).
template <class Visit>
void for_each_signed_sum(const std::vector<std::int64_t>& ints, Visit&& visit)
{
    const std::size_t n = ints.size();
    std::int64_t sum = 0;
    for (auto v : ints) sum -= v;
    std::uint64_t state = 0;  // bit set = sign +1
    visit(sum);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int bit = std::countr_zero(k);
        const std::uint64_t mask = std::uint64_t{1} << bit;
        if (state & mask)
            sum -= 2 * ints[bit];
        else
            sum += 2 * ints[bit];
        state ^= mask;
        visit(sum);
    }
}

/// Smallest integer N in [-bound, bound + 1] with N * unit - t >= 0 (strict: > 0).
/// The predicate is monotone in N; a floating guess is refined by exact sign tests.
std::int64_t threshold_cut(const Surd& unit, const SurdSum& t, std::int64_t bound, bool strict)
{
    auto holds = [&](std::int64_t n) {
        SurdSum diff = -t;
        diff.add(Surd(Rational(n)) * unit);
        const int s = diff.sign();
        return strict ? s > 0 : s >= 0;
    };
    const double guess_d = t.to_double() / unit.to_double();
    std::int64_t lo = -bound - 1;  // holds(lo) treated as false
    std::int64_t hi = bound + 1;   // holds(hi) treated as true
    if (std::isfinite(guess_d)) {
        auto g = static_cast<std::int64_t>(std::clamp(std::floor(guess_d), static_cast<double>(-bound),
                                                      static_cast<double>(bound)));
        // Gallop from the guess until the transition is bracketed.
        if (holds(g)) {
            hi = g;
            for (std::int64_t step = 1; hi > -bound; step *= 2) {
                std::int64_t probe = std::max(-bound, hi - step);
                if (!holds(probe)) {
                    lo = probe;
                    break;
                }
                hi = probe;
                if (probe == -bound) break;
            }
        } else {
            lo = g;
            for (std::int64_t step = 1; lo < bound; step *= 2) {
                std::int64_t probe = std::min(bound, lo + step);
                if (holds(probe)) {
                    hi = probe;
                    break;
                }
                lo = probe;
                if (probe == bound) break;
            }
        }
    }
    while (hi - lo > 1) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (holds(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace

Dyadic exact_tail(const WeightVector& w, const TailQuery& q, const OracleConfig& cfg)
{
    check_cap(w.size(), cfg);
    require(w.exact().has_value(), ErrorCode::ExactUnavailable, "weight vector has no exact mirror");
    const auto& ex = *w.exact();
    const IntegerWeights iw = integerize(ex.raw);
    // X = N * unit
    const Surd unit(Rational(Integer(1), iw.denom), ex.radical);
    const std::int64_t bound = iw.total;

    std::uint64_t count = 0;
    switch (q.mode) {
        case TailMode::GE:
        case TailMode::GT: {
            const std::int64_t cut = threshold_cut(unit, q.threshold, bound, q.mode == TailMode::GT);
            for_each_signed_sum(iw.ints, [&](std::int64_t s) { count += s >= cut; });
            break;
        }
        case TailMode::ABS_GE: {
            const std::int64_t cut = threshold_cut(unit, q.threshold, bound, false);
            for_each_signed_sum(iw.ints, [&](std::int64_t s) { count += (s < 0 ? -s : s) >= cut; });
            break;
        }
        case TailMode::ABS_IN_OPEN: {
            SurdSum gap = q.second_threshold;
            gap += -q.threshold;
            require(gap.sign() > 0, ErrorCode::InvalidArgument, "open interval needs t1 < t2");
            const std::int64_t lo = threshold_cut(unit, q.threshold, bound, true);
            const std::int64_t hi = threshold_cut(unit, q.second_threshold, bound, false);
            for_each_signed_sum(iw.ints, [&](std::int64_t s) {
                const std::int64_t a = s < 0 ? -s : s;
                count += a >= lo && a < hi;
            });
            break;
        }
    }
    return Dyadic(count, static_cast<unsigned>(w.size()));
}

double enumerated_tail(const WeightVector& w, TailMode mode, double t, double t2, const OracleConfig& cfg)
{
    check_cap(w.size(), cfg);
    const auto& a = w.weights();
    const std::size_t n = a.size();
    double sum = 0.0;
    for (double v : a) sum -= v;
    std::uint64_t state = 0;
    std::uint64_t count = 0;
    auto visit = [&](double s) {
        switch (mode) {
            case TailMode::GE: count += s >= t; break;
            case TailMode::GT: count += s > t; break;
            case TailMode::ABS_GE: count += std::fabs(s) >= t; break;
            case TailMode::ABS_IN_OPEN: count += std::fabs(s) > t && std::fabs(s) < t2; break;
        }
    };
    visit(sum);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int bit = std::countr_zero(k);
        const std::uint64_t mask = std::uint64_t{1} << bit;
        sum += (state & mask) ? -2 * a[bit] : 2 * a[bit];
        state ^= mask;
        visit(sum);
    }
    return std::ldexp(static_cast<double>(count), -static_cast<int>(n));
}

// ---------------------------------------------------------------- elimination

SurdSum EliminationScenario::map_threshold(const SurdSum& t) const
{
    SurdSum out;
    for (const auto& term : t.terms()) out.add(term / sigma);
    out.add(-shift / sigma);
    return out;
}

std::vector<EliminationScenario> eliminate(const WeightVector& w, std::size_t m)
{
    const std::size_t n = w.size();
    require(m >= 1 && m < n, ErrorCode::InvalidArgument, "elimination needs 1 <= m < n");
    require(w.exact().has_value(), ErrorCode::ExactUnavailable, "weight vector has no exact mirror");
    require(m <= 20, ErrorCode::CapExceeded, "too many eliminated weights");
    const auto& ex = *w.exact();
    const Rational sigma_sq = w.partial_sigma_squared(m);
    require(sigma_sq > 0, ErrorCode::Precondition, "sigma_m = 0: cannot eliminate all variance");

    const std::vector<Rational> tail(ex.raw.begin() + static_cast<std::ptrdiff_t>(m), ex.raw.end());
    std::vector<Surd> tail_surds(tail.begin(), tail.end());
    const WeightVector residual = normalize_weights(std::span<const Surd>(tail_surds));
    const Surd sigma = Surd::sqrt_of(sigma_sq);

    std::vector<EliminationScenario> out;
    const std::uint64_t count = std::uint64_t{1} << m;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        EliminationScenario sc;
        Rational shift_coef = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const int e = (mask >> (m - 1 - i)) & 1 ? 1 : -1;
            sc.signs.push_back(e);
            shift_coef += e * ex.raw[i];
        }
        sc.probability = Rational(Integer(1), Integer(count));
        sc.residual = residual;
        sc.shift = Surd(shift_coef, ex.radical);
        sc.sigma = sigma;
        sc.shift_value = sc.shift.to_double();
        sc.sigma_value = sigma.to_double();
        out.push_back(std::move(sc));
    }
    return out;
}

// ---------------------------------------------------------------- d-dimensional

VectorWeightSet make_vector_set(const std::vector<std::vector<Surd>>& raw)
{
    require(!raw.empty(), ErrorCode::InvalidArgument, "vector set is empty");
    const std::size_t d = raw.front().size();
    require(d >= 1, ErrorCode::InvalidArgument, "vectors must have at least one coordinate");
    for (const auto& v : raw)
        require(v.size() == d, ErrorCode::InvalidArgument, "vectors have inconsistent dimensions");

    VectorWeightSet vs;
    vs.dim_ = d;

    // Exact mirror: every coordinate must carry a single radical.
    bool exact_ok = true;
    ExactVectors ex;
    ex.radicals.assign(d, Rational(1));
    ex.coefs.assign(raw.size(), std::vector<Rational>(d, Rational(0)));
    for (std::size_t c = 0; c < d && exact_ok; ++c) {
        const Surd* base = nullptr;
        for (const auto& v : raw)
            if (!v[c].is_zero()) {
                base = &v[c];
                break;
            }
        if (!base) continue;
        ex.radicals[c] = base->radicand();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (!base->same_radical(raw[i][c])) {
                exact_ok = false;
                break;
            }
            ex.coefs[i][c] = base->ratio_on_radical(raw[i][c]);
        }
    }

    double total = 0.0;
    for (const auto& v : raw)
        for (const auto& s : v) total += s.to_double() * s.to_double();
    if (exact_ok) {
        ex.total_square = 0;
        for (std::size_t i = 0; i < raw.size(); ++i)
            for (std::size_t c = 0; c < d; ++c) ex.total_square += ex.coefs[i][c] * ex.coefs[i][c] * ex.radicals[c];
        require(ex.total_square > 0, ErrorCode::InvalidArgument, "all vectors are zero");
        total = to_double(ex.total_square);
        vs.exact_ = std::move(ex);
    }
    require(total > 0, ErrorCode::InvalidArgument, "all vectors are zero");
    const double inv = 1.0 / std::sqrt(total);
    for (const auto& v : raw) {
        std::vector<double> out;
        for (const auto& s : v) out.push_back(s.to_double() * inv);
        vs.vectors_.push_back(std::move(out));
    }
    return vs;
}

Dyadic high_dim_exact_tail(const VectorWeightSet& vs, NormDirection dir, const OracleConfig& cfg)
{
    check_cap(vs.size(), cfg);
    require(vs.exact().has_value(), ErrorCode::ExactUnavailable, "vector set has no exact mirror");
    const auto& ex = *vs.exact();
    const std::size_t n = vs.size();
    const std::size_t d = vs.dimension();

    // |X|^2 <= 1 after normalization  <=>  sum_c rho_c N_c^2 <= sum_{i,c} rho_c n_ic^2,
    // with v_ic = (n_ic / L) sqrt(rho_c); multiply through by the lcm of rho denominators.
    Integer L = 1;
    for (const auto& row : ex.coefs)
        for (const auto& q : row) L = mp::lcm(L, Integer(mp::denominator(q)));
    Integer B = 1;
    for (const auto& r : ex.radicals) B = mp::lcm(B, Integer(mp::denominator(r)));

    std::vector<std::vector<std::int64_t>> ints(d, std::vector<std::int64_t>(n));
    std::vector<__int128> wts(d);
    Integer rhs = 0;
    const Integer limit = Integer(1) << 40;
    for (std::size_t c = 0; c < d; ++c) {
        const Integer wc = mp::numerator(ex.radicals[c]) * (B / mp::denominator(ex.radicals[c]));
        require(wc < limit, ErrorCode::ExactUnavailable, "coordinate radical too large for exact enumeration");
        wts[c] = static_cast<__int128>(wc.convert_to<std::int64_t>());
        Integer col = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Integer v = mp::numerator(ex.coefs[i][c]) * (L / mp::denominator(ex.coefs[i][c]));
            col += mp::abs(v);
            require(col < limit, ErrorCode::ExactUnavailable, "coordinates too fine for exact enumeration");
            ints[c][i] = v.convert_to<std::int64_t>();
            rhs += wc * v * v;
        }
    }
    require(rhs < (Integer(1) << 120), ErrorCode::ExactUnavailable, "squared norm exceeds exact range");
    const auto rhs_hi = static_cast<__int128>((rhs >> 60).convert_to<std::int64_t>());
    const auto rhs_lo = static_cast<__int128>((rhs & ((Integer(1) << 60) - 1)).convert_to<std::int64_t>());
    const __int128 K = (rhs_hi << 60) + rhs_lo;

    std::vector<std::int64_t> sums(d, 0);
    for (std::size_t c = 0; c < d; ++c)
        for (auto v : ints[c]) sums[c] -= v;
    auto norm_ok = [&]() {
        __int128 qv = 0;
        for (std::size_t c = 0; c < d; ++c) qv += wts[c] * static_cast<__int128>(sums[c]) * sums[c];
        return dir == NormDirection::NORM_LE_1 ? qv <= K : qv >= K;
    };
    std::uint64_t count = norm_ok();
    std::uint64_t state = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int bit = std::countr_zero(k);
        const std::uint64_t mask = std::uint64_t{1} << bit;
        const std::int64_t sgn = (state & mask) ? -2 : 2;
        for (std::size_t c = 0; c < d; ++c) sums[c] += sgn * ints[c][bit];
        state ^= mask;
        count += norm_ok();
    }
    return Dyadic(count, static_cast<unsigned>(n));
}

double norm_tail_floor() { return (1.0 - std::sqrt(1.0 - std::exp(-2.0))) / 2.0; }

}  // namespace rdmc::core
