#pragma once

// Mesh campaigns over the leading weights, the q-sum inequalities, the
// quoted table values and the exact fixture suite.

#include "rdmc/dptable.hpp"
#include "rdmc/report.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace rdmc::verify {

/// Every table-side value is reduced by this before comparing with a target.
inline constexpr double kTableSlack = 1e-9;

struct CampaignOptions {
    double delta = 0.0;  // 0 picks the campaign default
    unsigned threads = 1;
    std::size_t off_mesh_samples = 10000;
    std::size_t crossfire_vectors = 50;
    std::uint64_t seed = 1;
};

struct MeshPoint {
    double a1 = 0, a2 = 0, a3 = 0;
};

/// Mesh over {a1 + a2 <= 1, a2 <= a1, a1 in [lo, hi]} with step `step`.
std::vector<MeshPoint> mesh_pairs(double lo, double hi, double step);
/// Mesh over {a3 <= a2 <= a1 <= 0.7, a1 + a2 + a3 >= 1, a1 + a2 <= 1}.
std::vector<MeshPoint> mesh_triples(double step);

/// E over two signs of D(a/s2 + slack, (1 + a1 e1 + a2 e2)/s2 + slack),
/// where a is the A.1 bound min(1 - a1 - a2, a2, 0.325).
double a1_objective(const dptable::BoundTable& t, double a1, double a2, double slack);
/// Same with the A.3 bound min(a2, 1 - a1 - a2).
double a3_objective(const dptable::BoundTable& t, double a1, double a2, double slack);

struct A2Terms {
    double sigma3 = 0;
    double a4_bound = 0;
    bool improved = false;  // a4 bounded by 1 - a1 - a3
    std::array<double, 3> L{};  // L2, L3, L4
    double value = 0;           // sum of the three D terms
};
/// The a4 bound and thresholds alone (no table access).
A2Terms a2_bounds(double a1, double a2, double a3, double delta);
A2Terms a2_objective(const dptable::BoundTable& t, double a1, double a2, double a3, double slack, double delta);

VerificationReport verify_A1(const dptable::BoundTable& t, const CampaignOptions& opt = {});
VerificationReport verify_A2(const dptable::BoundTable& t, const CampaignOptions& opt = {});
VerificationReport verify_A3(const dptable::BoundTable& t, const CampaignOptions& opt = {});
VerificationReport verify_qsums(const dptable::BoundTable& t);
VerificationReport verify_stash(const dptable::BoundTable& t);
VerificationReport verify_fixtures(std::uint64_t seed = 1);

}  // namespace rdmc::verify
