#pragma once

// The iterated lower-bound table D_I(a, x) <= inf Pr[X > x] over unit-variance
// Rademacher sums with largest weight <= a.
//
// Grid: a = m*delta (m = 0..N), x = -3 + j*delta (j = 0..6N), N = 1/delta.
// Arguments are always rounded up to grid points; x >= 3 reads as 0 and
// x < -3 reads the x = -3 column.

#include "rdmc/prawitz.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rdmc::dptable {

inline constexpr std::uint32_t kFormatVersion = 1;

struct GridSpec {
    std::uint64_t delta_num = 1;
    std::uint64_t delta_den = 400;
    std::uint32_t iterations = 10;

    /// Grid points per unit, N = 1/delta.
    std::int64_t steps_per_unit() const;
    double delta() const { return static_cast<double>(delta_num) / static_cast<double>(delta_den); }
    std::size_t a_count() const { return static_cast<std::size_t>(steps_per_unit()) + 1; }
    std::size_t x_count() const { return static_cast<std::size_t>(6 * steps_per_unit()) + 1; }
    void validate() const;
    std::string delta_str() const;

    /// Parses "1/400" or "0.0025" (must be 1/N exactly).
    static GridSpec from_delta(const std::string& text, std::uint32_t iterations);
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class BoundTable {
public:
    BoundTable() = default;
    BoundTable(GridSpec grid, std::uint32_t iteration, prawitz::Integrator integrator);

    const GridSpec& grid() const { return grid_; }
    std::uint32_t iteration() const { return iteration_; }
    prawitz::Integrator integrator() const { return integrator_; }

    double at(std::size_t m, std::size_t j) const { return values_[m * x_count_ + j]; }
    double& at(std::size_t m, std::size_t j) { return values_[m * x_count_ + j]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double a_of(std::size_t m) const;
    double x_of(std::size_t j) const;

    void set_iteration(std::uint32_t i) { iteration_ = i; }

private:
    GridSpec grid_;
    std::uint32_t iteration_ = 0;
    prawitz::Integrator integrator_ = prawitz::Integrator::TRAPEZOID_CERTIFIED;
    std::size_t x_count_ = 0;
    std::vector<double> values_;
};

/// How the infimum over the eliminated weight a in (0, a1] is discretized.
enum class CandidateMode {
    /// Grid multiples k*delta only, each with rounded-up child arguments.
    GRID,
    /// Every a in ((k-1)*delta, k*delta]: child arguments maximized over the
    /// whole cell before rounding up.
    CELL_ENVELOPE,
};

struct BuildOptions {
    prawitz::Integrator integrator = prawitz::Integrator::TRAPEZOID_CERTIFIED;
    prawitz::Resolution resolution{0, 5e-5};
    CandidateMode candidates = CandidateMode::GRID;
    unsigned threads = 1;
    std::string d0_cache;  // reused when it matches the grid and integrator, written otherwise
    std::function<void(const std::string&)> progress;
};

struct IterationStats {
    std::uint32_t iteration = 0;
    double max_increase = 0.0;        // max_cell D_i - D_{i-1}
    std::size_t cells_improved = 0;
    std::size_t monotone_repairs = 0;  // cells raised by the x-repair
    bool dominates_previous = true;    // D_i >= D_{i-1} cellwise
};

struct BuildReport {
    double d0_seconds = 0.0;
    double recursion_seconds = 0.0;
    bool d0_from_cache = false;
    double max_error_budget = 0.0;  // over all D0 cells
    std::size_t prawitz_evaluations = 0;
    std::vector<IterationStats> iterations;
    std::size_t a_monotonicity_violations = 0;  // cells with D(a+delta, x) > D(a, x)
};

/// Base layer D0 = max(F, 1{x<0}/2, 0), monotone-repaired along x.
BoundTable build_d0(const GridSpec& g, const BuildOptions& opt, BuildReport* report = nullptr);

/// One application of the recursion; returns D_{i+1}.
BoundTable iterate(const BoundTable& prev, CandidateMode mode, IterationStats* stats = nullptr);

BoundTable build_table(const GridSpec& g, const BuildOptions& opt = {}, BuildReport* report = nullptr);

/// Cell index for a query, rounding up (inputs within 1e-9 grid units of a
/// grid point snap to it, so decimal literals such as 0.35 hit their cell).
std::size_t a_index(const GridSpec& g, double a);
/// x index, or -1 for x >= 3 (value 0); x < -3 maps to 0.
std::ptrdiff_t x_index(const GridSpec& g, double x);

/// Rounded-up lookup; a must lie in (0, 1].
double query(const BoundTable& t, double a, double x);

void save_table(const BoundTable& t, const std::string& path);
/// Reads a table; when `expected` is given the header must match it.
BoundTable load_table(const std::string& path, const GridSpec* expected = nullptr);

}  // namespace rdmc::dptable
