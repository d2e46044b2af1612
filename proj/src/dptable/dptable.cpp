#include "rdmc/dptable.hpp"

#include "rdmc/error.hpp"
#include "rdmc/exact.hpp"

#include <boost/crc.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <list>
#include <sstream>
#include <thread>

namespace rdmc::dptable {

static_assert(std::endian::native == std::endian::little, "table files are written in host byte order");

// ---------------------------------------------------------------- grid

std::int64_t GridSpec::steps_per_unit() const
{
    return static_cast<std::int64_t>(delta_den / delta_num);
}

void GridSpec::validate() const
{
    require(delta_num > 0 && delta_den > 0, ErrorCode::InvalidArgument, "delta must be positive");
    require(delta_den % delta_num == 0, ErrorCode::InvalidArgument, "1/delta must be an integer");
    require(delta_den / delta_num <= 4000, ErrorCode::InvalidArgument, "delta below 1/4000 is not supported");
    require(iterations >= 1, ErrorCode::InvalidArgument, "at least one iteration is required");
}

std::string GridSpec::delta_str() const
{
    return std::to_string(delta_num) + "/" + std::to_string(delta_den);
}

GridSpec GridSpec::from_delta(const std::string& text, std::uint32_t iterations)
{
    const Rational d = parse_rational(text);
    require(d > 0 && d <= 1, ErrorCode::InvalidArgument, "delta must lie in (0, 1]");
    require(boost::multiprecision::numerator(d) == 1, ErrorCode::InvalidArgument,
            "delta must be 1/N for an integer N, got " + text);
    GridSpec g;
    g.delta_num = 1;
    g.delta_den = boost::multiprecision::denominator(d).convert_to<std::uint64_t>();
    g.iterations = iterations;
    g.validate();
    return g;
}

BoundTable::BoundTable(GridSpec grid, std::uint32_t iteration, prawitz::Integrator integrator)
    : grid_(grid), iteration_(iteration), integrator_(integrator), x_count_(grid.x_count())
{
    grid_.validate();
    values_.assign(grid_.a_count() * x_count_, 0.0);
}

double BoundTable::a_of(std::size_t m) const
{
    return static_cast<double>(m) / static_cast<double>(grid_.steps_per_unit());
}

double BoundTable::x_of(std::size_t j) const
{
    const auto n = grid_.steps_per_unit();
    return static_cast<double>(static_cast<std::int64_t>(j) - 3 * n) / static_cast<double>(n);
}

// ---------------------------------------------------------------- queries

std::size_t a_index(const GridSpec& g, double a)
{
    require(std::isfinite(a) && a > 0.0 && a <= 1.0, ErrorCode::InvalidArgument, "a must lie in (0, 1]");
    const auto n = g.steps_per_unit();
    const double m = std::ceil(a * static_cast<double>(n) - 1e-9);
    return static_cast<std::size_t>(std::clamp<double>(m, 1.0, static_cast<double>(n)));
}

std::ptrdiff_t x_index(const GridSpec& g, double x)
{
    require(!std::isnan(x), ErrorCode::InvalidArgument, "x is NaN");
    if (x >= 3.0) return -1;
    if (x < -3.0) return 0;
    const auto n = g.steps_per_unit();
    const double j = std::ceil((x + 3.0) * static_cast<double>(n) - 1e-9);
    return static_cast<std::ptrdiff_t>(std::clamp<double>(j, 0.0, static_cast<double>(6 * n)));
}

double query(const BoundTable& t, double a, double x)
{
    const std::size_t m = a_index(t.grid(), a);
    const std::ptrdiff_t j = x_index(t.grid(), x);
    if (j < 0) return 0.0;
    return t.at(m, static_cast<std::size_t>(j));
}

// ---------------------------------------------------------------- D0

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Raise each cell to the max over all cells at larger x in its row. Sound
/// because the bounded quantity is non-increasing in x.
std::size_t repair_along_x(BoundTable& t)
{
    std::size_t raised = 0;
    const std::size_t nx = t.grid().x_count();
    for (std::size_t m = 0; m < t.grid().a_count(); ++m) {
        double running = 0.0;
        for (std::size_t j = nx; j-- > 0;) {
            double& v = t.at(m, j);
            if (v < running) {
                v = running;
                ++raised;
            } else {
                running = v;
            }
        }
    }
    return raised;
}

template <class Fn>
void parallel_rows(std::size_t rows, unsigned threads, Fn&& fn)
{
    threads = std::max(1u, threads);
    if (threads == 1 || rows < 2) {
        for (std::size_t r = 0; r < rows; ++r) fn(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t r = next++; r < rows; r = next++) fn(r);
            } catch (...) {
                errors[w] = std::current_exception();
                next = rows;
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

bool cache_matches(const BoundTable& t, const GridSpec& g, prawitz::Integrator mode)
{
    return t.iteration() == 0 && t.integrator() == mode && t.grid().delta_num == g.delta_num &&
           t.grid().delta_den == g.delta_den;
}

}  // namespace

BoundTable build_d0(const GridSpec& g, const BuildOptions& opt, BuildReport* report)
{
    g.validate();
    const auto t0 = Clock::now();

    if (!opt.d0_cache.empty() && std::ifstream(opt.d0_cache).good()) {
        BoundTable cached = load_table(opt.d0_cache);
        if (cache_matches(cached, g, opt.integrator)) {
            // The cached file stores the caller's iteration count in the grid; only D0 is reused.
            BoundTable t(g, 0, opt.integrator);
            t.values() = cached.values();
            if (report) {
                report->d0_from_cache = true;
                report->d0_seconds = seconds_since(t0);
            }
            if (opt.progress) opt.progress("D0 loaded from " + opt.d0_cache);
            return t;
        }
        if (opt.progress) opt.progress("D0 cache " + opt.d0_cache + " does not match; rebuilding");
    }

    BoundTable t(g, 0, opt.integrator);
    const std::size_t na = g.a_count();
    const std::size_t nx = g.x_count();
    std::vector<double> row_budget(na, 0.0);
    std::atomic<std::size_t> evaluations{0};
    std::atomic<std::size_t> rows_done{0};

    parallel_rows(na - 1, opt.threads, [&](std::size_t r) {
        const std::size_t m = r + 1;  // the a = 0 row is filled afterwards
        const double a = t.a_of(m);
        for (std::size_t j = 0; j + 1 < nx; ++j) {  // last column is x = 3
            const double x = t.x_of(j);
            const auto ev = prawitz::prawitz_F(prawitz::PrawitzParams::defaults(a, x), opt.integrator, opt.resolution);
            row_budget[m] = std::max(row_budget[m], ev.error_budget);
            const double floor = x < 0.0 ? 0.5 : 0.0;
            t.at(m, j) = std::clamp(ev.value, floor, 1.0);
        }
        evaluations += nx - 1;
        const std::size_t done = ++rows_done;
        if (opt.progress && (done % 20 == 0 || done == na - 1))
            opt.progress("D0 rows " + std::to_string(done) + "/" + std::to_string(na - 1));
    });
    for (std::size_t j = 0; j < nx; ++j) t.at(0, j) = t.at(1, j);
    repair_along_x(t);

    if (report) {
        report->d0_seconds = seconds_since(t0);
        report->prawitz_evaluations = evaluations;
        report->max_error_budget = *std::max_element(row_budget.begin(), row_budget.end());
    }
    if (!opt.d0_cache.empty()) save_table(t, opt.d0_cache);
    return t;
}

// ---------------------------------------------------------------- recursion

namespace {

/// Smallest integer M with M >= n*t/sqrt(d), d > 0, decided exactly on integers.
std::int64_t ceil_scaled_ratio(std::int64_t n, std::int64_t t, std::int64_t d)
{
    const double guess = static_cast<double>(n) * static_cast<double>(t) / std::sqrt(static_cast<double>(d));
    std::int64_t m = static_cast<std::int64_t>(std::ceil(guess));
    // M >= n t / sqrt(d)  <=>  M sqrt(d) >= n t ; compare with signs and squares.
    const __int128 rhs2 = static_cast<__int128>(n) * n * t * t;
    auto ok = [&](std::int64_t cand) {
        if (cand >= 0 && t <= 0) return true;
        if (cand < 0 && t >= 0) return false;
        const __int128 lhs2 = static_cast<__int128>(cand) * cand * d;
        return cand >= 0 ? lhs2 >= rhs2 : lhs2 <= rhs2;
    };
    while (!ok(m)) ++m;
    while (ok(m - 1)) --m;
    return m;
}

struct ChildIndex {
    std::int32_t m = 0;  // a index of the child, clamped to N
    std::vector<std::int32_t> minus, plus;  // x index per parent j; -1 means x >= 3
};

/// Child indices for candidate a = k/N, exact.
ChildIndex grid_children(std::int64_t n, std::int64_t k, std::size_t nx)
{
    ChildIndex c;
    const std::int64_t d = n * n - k * k;
    // a' = a / sqrt(1 - a^2) = k / sqrt(d); index ceil(n k / sqrt(d)), capped at a' = 1.
    c.m = static_cast<std::int32_t>(std::min<std::int64_t>(n, ceil_scaled_ratio(n, k, d)));
    c.minus.resize(nx);
    c.plus.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) {
        // (x -+ a)/sqrt(1-a^2) = (j - 3n -+ k)/sqrt(d) in grid units after scaling by n.
        for (int sgn : {-1, 1}) {
            const std::int64_t t = static_cast<std::int64_t>(j) - 3 * n + sgn * k;
            const std::int64_t idx = ceil_scaled_ratio(n, t, d) + 3 * n;
            const std::int32_t v = idx >= 6 * n ? -1 : static_cast<std::int32_t>(std::max<std::int64_t>(idx, 0));
            (sgn < 0 ? c.minus : c.plus)[j] = v;
        }
    }
    return c;
}

/// Child indices valid for every a in ((k-1)/N, k/N]: each argument maximized
/// over the cell, then rounded up with a small upward nudge.
ChildIndex envelope_children(std::int64_t n, std::int64_t k, std::size_t nx)
{
    ChildIndex c;
    const long double lo = static_cast<long double>(k - 1) / n;
    const long double hi = static_cast<long double>(k) / n;
    const bool open_top = k == n;
    if (open_top) {
        c.m = static_cast<std::int32_t>(n);
    } else {
        const std::int64_t d = n * n - k * k;
        c.m = static_cast<std::int32_t>(std::min<std::int64_t>(n, ceil_scaled_ratio(n, k, d)));
    }
    c.minus.resize(nx);
    c.plus.resize(nx);
    constexpr long double inf = std::numeric_limits<long double>::infinity();
    for (std::size_t j = 0; j < nx; ++j) {
        const long double x = static_cast<long double>(static_cast<std::int64_t>(j) - 3 * n) / n;
        for (int sgn : {-1, 1}) {
            // phi(a) = (x + s a)/sqrt(1-a^2) has phi' proportional to s + x a: monotone
            // pieces around a* = -s/x, so the sup is at lo, hi (or the limit) or a*.
            auto phi = [&](long double a) { return (x + sgn * a) / std::sqrt(1.0L - a * a); };
            long double best = phi(lo);
            if (open_top) {
                const long double lim = x + sgn;
                best = std::max(best, lim > 0 ? inf : (lim < 0 ? -inf : 0.0L));
            } else {
                best = std::max(best, phi(hi));
            }
            if (x != 0) {
                const long double star = -sgn / x;
                if (star > lo && star < hi) best = std::max(best, phi(star));
            }
            std::int32_t v;
            if (best >= 3.0L) {
                v = -1;
            } else if (best < -3.0L) {
                v = 0;
            } else {
                const long double idx = std::ceil((best + 3.0L) * n + 1e-9L);
                v = idx >= 6 * n ? -1 : static_cast<std::int32_t>(std::max<long double>(idx, 0));
            }
            (sgn < 0 ? c.minus : c.plus)[j] = v;
        }
    }
    return c;
}

/// Exact Pr[eps > x] for a single unit weight.
double single_sign_tail(double x)
{
    return 0.5 * (x < 1.0 ? 1.0 : 0.0) + 0.5 * (x < -1.0 ? 1.0 : 0.0);
}

struct RecursionPlan {
    std::vector<ChildIndex> children;  // index k-1 for candidate k
    CandidateMode mode;
};

const RecursionPlan& plan_for(const GridSpec& g, CandidateMode mode)
{
    // Child indices depend only on the grid; build once per (grid, mode).
    static thread_local std::list<std::pair<std::pair<std::int64_t, CandidateMode>, RecursionPlan>> cache;
    const std::int64_t n = g.steps_per_unit();
    for (const auto& [key, plan] : cache)
        if (key.first == n && key.second == mode) return plan;
    RecursionPlan plan;
    plan.mode = mode;
    const std::size_t nx = g.x_count();
    const std::int64_t last = mode == CandidateMode::GRID ? n - 1 : n;
    for (std::int64_t k = 1; k <= last; ++k)
        plan.children.push_back(mode == CandidateMode::GRID ? grid_children(n, k, nx) : envelope_children(n, k, nx));
    cache.emplace_back(std::make_pair(n, mode), std::move(plan));
    return cache.back().second;
}

}  // namespace

BoundTable iterate(const BoundTable& prev, CandidateMode mode, IterationStats* stats)
{
    const GridSpec& g = prev.grid();
    const std::int64_t n = g.steps_per_unit();
    const std::size_t na = g.a_count();
    const std::size_t nx = g.x_count();
    const RecursionPlan& plan = plan_for(g, mode);

    auto child_value = [&](std::int32_t m, std::int32_t j) { return j < 0 ? 0.0 : prev.at(m, j); };

    BoundTable next = prev;
    next.set_iteration(prev.iteration() + 1);
    // running[j] = min over candidates k <= m of the averaged children.
    std::vector<double> running(nx, std::numeric_limits<double>::infinity());
    for (std::size_t m = 1; m < na; ++m) {
        const auto k = static_cast<std::int64_t>(m);
        for (std::size_t j = 0; j < nx; ++j) {
            double cand = std::numeric_limits<double>::infinity();
            if (k < n || mode == CandidateMode::CELL_ENVELOPE) {
                const ChildIndex& c = plan.children[static_cast<std::size_t>(k - 1)];
                cand = 0.5 * (child_value(c.m, c.minus[j]) + child_value(c.m, c.plus[j]));
            }
            if (k == n) cand = std::min(cand, single_sign_tail(next.x_of(j)));
            running[j] = std::min(running[j], cand);
            if (j + 1 < nx) next.at(m, j) = std::max(prev.at(m, j), std::min(1.0, running[j]));
        }
    }
    for (std::size_t j = 0; j < nx; ++j) next.at(0, j) = next.at(1, j);
    const std::size_t repaired = repair_along_x(next);

    if (stats) {
        stats->iteration = next.iteration();
        stats->monotone_repairs = repaired;
        stats->max_increase = 0.0;
        stats->cells_improved = 0;
        stats->dominates_previous = true;
        for (std::size_t i = 0; i < next.values().size(); ++i) {
            const double diff = next.values()[i] - prev.values()[i];
            if (diff < 0.0) stats->dominates_previous = false;
            if (diff > 0.0) ++stats->cells_improved;
            stats->max_increase = std::max(stats->max_increase, diff);
        }
    }
    return next;
}

BoundTable build_table(const GridSpec& g, const BuildOptions& opt, BuildReport* report)
{
    g.validate();
    BoundTable t = build_d0(g, opt, report);
    const auto t0 = Clock::now();
    for (std::uint32_t i = 0; i < g.iterations; ++i) {
        IterationStats st;
        t = iterate(t, opt.candidates, &st);
        if (report) report->iterations.push_back(st);
        if (opt.progress)
            opt.progress("iteration " + std::to_string(st.iteration) + ": max increase " + std::to_string(st.max_increase));
    }
    if (report) {
        report->recursion_seconds = seconds_since(t0);
        std::size_t viol = 0;
        for (std::size_t m = 1; m + 1 < g.a_count(); ++m)
            for (std::size_t j = 0; j < g.x_count(); ++j)
                if (t.at(m + 1, j) > t.at(m, j) + 1e-12) ++viol;
        report->a_monotonicity_violations = viol;
    }
    return t;
}

// ---------------------------------------------------------------- files

namespace {

constexpr char kMagic[4] = {'R', 'D', 'M', 'C'};

template <class T>
void put(std::string& buf, T v)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    buf.append(bytes, sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t& pos)
{
    require(pos + sizeof(T) <= buf.size(), ErrorCode::Checksum, "table file is truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

std::uint64_t checksum(const char* data, std::size_t n)
{
    boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0, 0, false, false> crc;
    crc.process_bytes(data, n);
    return crc.checksum();
}

constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8 + 4 * 8 + 4 + 1;

}  // namespace

void save_table(const BoundTable& t, const std::string& path)
{
    std::string buf;
    buf.reserve(kHeaderBytes + t.values().size() * 8 + 8);
    buf.append(kMagic, 4);
    put<std::uint32_t>(buf, kFormatVersion);
    put<std::uint64_t>(buf, t.grid().delta_num);
    put<std::uint64_t>(buf, t.grid().delta_den);
    // a in [0, 1], x in [-3, 3], in quarters
    put<std::int64_t>(buf, 0);
    put<std::int64_t>(buf, 4);
    put<std::int64_t>(buf, -12);
    put<std::int64_t>(buf, 12);
    put<std::uint32_t>(buf, t.iteration());
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(t.integrator()));
    for (double v : t.values()) put<double>(buf, v);
    put<std::uint64_t>(buf, checksum(buf.data(), buf.size()));

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), ErrorCode::Io, "cannot write '" + tmp + "'");
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        require(out.good(), ErrorCode::Io, "write to '" + tmp + "' failed");
    }
    require(std::rename(tmp.c_str(), path.c_str()) == 0, ErrorCode::Io, "cannot move table into '" + path + "'");
}

BoundTable load_table(const std::string& path, const GridSpec* expected)
{
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open table '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    require(buf.size() >= 8 && std::memcmp(buf.data(), kMagic, 4) == 0, ErrorCode::Format,
            "'" + path + "' is not a table file");
    std::size_t pos = 4;
    const auto version = get<std::uint32_t>(buf, pos);
    require(version == kFormatVersion, ErrorCode::Version,
            "table format version " + std::to_string(version) + " is not supported (expected " +
                std::to_string(kFormatVersion) + ")");
    require(buf.size() >= kHeaderBytes + 8, ErrorCode::Checksum, "table file is truncated");
    const std::uint64_t stored = [&] {
        std::size_t p = buf.size() - 8;
        return get<std::uint64_t>(buf, p);
    }();
    require(stored == checksum(buf.data(), buf.size() - 8), ErrorCode::Checksum, "table checksum mismatch");

    GridSpec g;
    g.delta_num = get<std::uint64_t>(buf, pos);
    g.delta_den = get<std::uint64_t>(buf, pos);
    const auto a_lo = get<std::int64_t>(buf, pos);
    const auto a_hi = get<std::int64_t>(buf, pos);
    const auto x_lo = get<std::int64_t>(buf, pos);
    const auto x_hi = get<std::int64_t>(buf, pos);
    require(a_lo == 0 && a_hi == 4 && x_lo == -12 && x_hi == 12, ErrorCode::Format, "unsupported table ranges");
    const auto iteration = get<std::uint32_t>(buf, pos);
    const auto tag = get<std::uint8_t>(buf, pos);
    require(tag == 1 || tag == 2, ErrorCode::Format, "unknown integrator tag");
    g.iterations = std::max<std::uint32_t>(iteration, 1);
    g.validate();
    if (expected) {
        require(expected->delta_num == g.delta_num && expected->delta_den == g.delta_den, ErrorCode::Format,
                "table grid delta " + g.delta_str() + " does not match requested " + expected->delta_str());
        require(expected->iterations == iteration, ErrorCode::Format,
                "table has " + std::to_string(iteration) + " iterations, requested " +
                    std::to_string(expected->iterations));
    }

    BoundTable t(g, iteration, static_cast<prawitz::Integrator>(tag));
    const std::size_t cells = t.values().size();
    require(buf.size() == kHeaderBytes + cells * 8 + 8, ErrorCode::Format, "table size does not match its header");
    for (std::size_t i = 0; i < cells; ++i) t.values()[i] = get<double>(buf, pos);
    for (double v : t.values())
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::Format, "table holds a value outside [0, 1]");
    return t;
}

}  // namespace rdmc::dptable
