#pragma once

// Exact Pr[X > x] for X = sum k_i e_i / sqrt(K), K = sum k_i^2, with small
// positive integers k_i. Counts sign vectors by a subset-sum recursion over
// the integer sum, so it reaches n in the hundreds where enumeration cannot.
// Independent of the library oracle: only Boost rationals are shared.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rdmc::testing {

struct LatticeVector {
    std::vector<int> k;  // positive integers, any order

    long long K() const
    {
        long long s = 0;
        for (int v : k) s += static_cast<long long>(v) * v;
        return s;
    }
    double max_weight() const
    {
        int m = 0;
        for (int v : k) m = std::max(m, v);
        return m / std::sqrt(static_cast<double>(K()));
    }
    std::vector<double> weights() const
    {
        std::vector<double> w;
        double s = std::sqrt(static_cast<double>(K()));
        for (int v : k) w.push_back(v / s);
        return w;
    }
};

/// Smallest integer S with S > x sqrt(K), decided exactly (x is a double, so a dyadic rational).
inline long long first_integer_above(double x, long long K)
{
    using boost::multiprecision::cpp_rational;
    const cpp_rational xr(x);
    const cpp_rational x2K = xr * xr * K;
    // S > x sqrt(K)  <=>  (x < 0 and (S >= 0 or S^2 < x^2 K)) or (x >= 0 and S > 0 and S^2 > x^2 K)
    auto above = [&](long long S) {
        cpp_rational s2 = cpp_rational(S) * S;
        if (x < 0) return S >= 0 || s2 < x2K;
        return S > 0 && s2 > x2K;
    };
    long long S = static_cast<long long>(std::floor(x * std::sqrt(static_cast<double>(K)))) - 2;
    while (!above(S)) ++S;
    while (above(S - 1)) --S;
    return S;
}

/// Exact probability as (count, n): Pr = count / 2^n. Requires n <= 126.
struct LatticeTail {
    unsigned __int128 count = 0;
    int n = 0;
    double value() const { return std::ldexp(static_cast<double>(count), -n); }
};

inline LatticeTail lattice_tail_gt(const LatticeVector& v, double x)
{
    const int n = static_cast<int>(v.k.size());
    if (n > 126) throw std::invalid_argument("lattice oracle supports at most 126 weights");
    long long total = 0;
    for (int k : v.k) total += k;
    // counts[s + total] = number of sign vectors with sum s
    std::vector<unsigned __int128> counts(static_cast<std::size_t>(2 * total + 1), 0), next(counts.size());
    counts[static_cast<std::size_t>(total)] = 1;
    long long reach = 0;
    for (int k : v.k) {
        std::fill(next.begin(), next.end(), 0);
        for (long long s = -reach; s <= reach; ++s) {
            auto c = counts[static_cast<std::size_t>(s + total)];
            if (c == 0) continue;
            next[static_cast<std::size_t>(s + k + total)] += c;
            next[static_cast<std::size_t>(s - k + total)] += c;
        }
        reach += k;
        counts.swap(next);
    }
    LatticeTail out;
    out.n = n;
    long long s0 = std::max(-total, first_integer_above(x, v.K()));
    for (long long s = s0; s <= total; ++s) out.count += counts[static_cast<std::size_t>(s + total)];
    return out;
}

}  // namespace rdmc::testing
