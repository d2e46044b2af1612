#pragma once

// Rademacher weight vectors and the exact enumeration oracle.
//
// X = sum_i a_i eps_i with independent uniform signs. Every probability the
// oracle returns is k / 2^n, counted over all 2^n sign vectors with exact
// threshold comparisons (see exact.hpp), never with a floating tolerance.

#include "rdmc/exact.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdmc::core {

inline constexpr int kDefaultEnumerationCap = 24;
inline constexpr int kMaxEnumerationCap = 40;

struct OracleConfig {
    int enumeration_cap = kDefaultEnumerationCap;
};

/// A probability with power-of-two denominator, k / 2^n.
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(std::uint64_t count, unsigned log2_denominator);

    std::uint64_t count() const { return count_; }
    unsigned log2_denominator() const { return log2_den_; }

    Rational to_rational() const;
    double to_double() const;
    /// Reduced "p/q" (or "0", "1").
    std::string str() const;

    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.to_rational() == b.to_rational(); }

private:
    std::uint64_t count_ = 0;
    unsigned log2_den_ = 0;
};

/// Exact mirror of a normalized weight vector: a_i = raw_i * sqrt(radical).
struct ExactWeights {
    std::vector<Rational> raw;  // positive, non-increasing
    Rational radical;           // positive
};

class WeightVector {
public:
    const std::vector<double>& weights() const { return weights_; }
    const std::optional<ExactWeights>& exact() const { return exact_; }
    std::size_t size() const { return weights_.size(); }
    double max_weight() const { return weights_.front(); }
    double variance() const;
    /// sigma_j = sqrt(1 - sum_{i<=j} a_i^2), j = 0..n.
    const std::vector<double>& partial_sigmas() const { return sigmas_; }
    /// Exact sigma_j^2 (requires the exact mirror).
    Rational partial_sigma_squared(std::size_t j) const;

    std::string str() const;

private:
    friend WeightVector normalize_weights(std::span<const Surd> raw);
    friend WeightVector normalize_weights(std::span<const double> raw);
    void finish();

    std::vector<double> weights_;
    std::vector<double> sigmas_;
    std::optional<ExactWeights> exact_;
};

/// Sorts |raw| descending and rescales to unit variance. The exact mirror is
/// kept whenever all inputs share one square-root radical (always for rationals).
WeightVector normalize_weights(std::span<const Surd> raw);
WeightVector normalize_weights(std::span<const double> raw);
WeightVector normalize_weights(std::initializer_list<Surd> raw);

enum class TailMode { GE, GT, ABS_GE, ABS_IN_OPEN };

struct TailQuery {
    TailMode mode = TailMode::GE;
    SurdSum threshold;
    SurdSum second_threshold;  // ABS_IN_OPEN upper end

    static TailQuery ge(SurdSum t) { return {TailMode::GE, std::move(t), {}}; }
    static TailQuery gt(SurdSum t) { return {TailMode::GT, std::move(t), {}}; }
    static TailQuery abs_ge(SurdSum t) { return {TailMode::ABS_GE, std::move(t), {}}; }
    static TailQuery abs_in_open(SurdSum lo, SurdSum hi) { return {TailMode::ABS_IN_OPEN, std::move(lo), std::move(hi)}; }
};

TailMode parse_tail_mode(std::string_view name);
std::string_view to_string(TailMode mode);

Dyadic exact_tail(const WeightVector& w, const TailQuery& q, const OracleConfig& cfg = {});

/// Floating evaluation by enumeration; used where no exact mirror exists.
double enumerated_tail(const WeightVector& w, TailMode mode, double t, double t2 = 0.0,
                       const OracleConfig& cfg = {});

struct EliminationScenario {
    std::vector<int> signs;  // eps_1..eps_m
    Rational probability;    // 2^-m
    WeightVector residual;   // a_{m+1..n} / sigma_m
    Surd shift;              // sum_{i<=m} a_i eps_i
    Surd sigma;              // sigma_m
    double shift_value = 0.0;
    double sigma_value = 0.0;

    /// t -> (t - shift) / sigma
    SurdSum map_threshold(const SurdSum& t) const;
    double map_threshold(double t) const { return (t - shift_value) / sigma_value; }
};

std::vector<EliminationScenario> eliminate(const WeightVector& w, std::size_t m);

// ------------------------------------------------------------ d-dimensional

struct ExactVectors {
    std::vector<Rational> radicals;             // per coordinate
    std::vector<std::vector<Rational>> coefs;   // [vector][coordinate]
    Rational total_square;                      // sum_i |v_i|^2 of the raw input
};

class VectorWeightSet {
public:
    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    const std::vector<std::vector<double>>& vectors() const { return vectors_; }
    const std::optional<ExactVectors>& exact() const { return exact_; }

private:
    friend VectorWeightSet make_vector_set(const std::vector<std::vector<Surd>>& raw);
    std::size_t dim_ = 0;
    std::vector<std::vector<double>> vectors_;
    std::optional<ExactVectors> exact_;
};

/// Rescales so that sum |v_i|^2 = 1.
VectorWeightSet make_vector_set(const std::vector<std::vector<Surd>>& raw);

enum class NormDirection { NORM_GE_1, NORM_LE_1 };

Dyadic high_dim_exact_tail(const VectorWeightSet& vs, NormDirection dir, const OracleConfig& cfg = {});

/// Proposition-style lower bound (1 - sqrt(1 - e^-2)) / 2 on both norm tails.
double norm_tail_floor();

// ------------------------------------------------------------ input files

/// One weight per line; blank lines and '#' comments ignored.
std::vector<Surd> read_weight_file(const std::string& path);
/// One vector per line, coordinates separated by whitespace.
std::vector<std::vector<Surd>> read_vector_file(const std::string& path);

}  // namespace rdmc::core
