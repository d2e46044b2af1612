#include "rdmc/core.hpp"

#include "rdmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rdmc::core {

namespace mp = boost::multiprecision;

// ---------------------------------------------------------------- Dyadic

Dyadic::Dyadic(std::uint64_t count, unsigned log2_denominator) : count_(count), log2_den_(log2_denominator)
{
    require(log2_denominator <= 63, ErrorCode::Internal, "dyadic denominator too large");
    require(count <= (std::uint64_t{1} << log2_denominator), ErrorCode::Internal, "probability above one");
}

Rational Dyadic::to_rational() const
{
    return Rational(Integer(count_), Integer(1) << log2_den_);
}

double Dyadic::to_double() const { return std::ldexp(static_cast<double>(count_), -static_cast<int>(log2_den_)); }

std::string Dyadic::str() const { return rdmc::to_string(to_rational()); }

// ---------------------------------------------------------------- WeightVector

double WeightVector::variance() const
{
    double s = 0.0;
    for (double a : weights_) s += a * a;
    return s;
}

Rational WeightVector::partial_sigma_squared(std::size_t j) const
{
    require(exact_.has_value(), ErrorCode::ExactUnavailable, "weight vector has no exact mirror");
    require(j <= weights_.size(), ErrorCode::InvalidArgument, "sigma index out of range");
    Rational used = 0;
    for (std::size_t i = 0; i < j; ++i) used += exact_->raw[i] * exact_->raw[i];
    return 1 - used * exact_->radical;
}

void WeightVector::finish()
{
    sigmas_.assign(weights_.size() + 1, 0.0);
    double remaining = 1.0;
    sigmas_[0] = 1.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        remaining -= weights_[j] * weights_[j];
        sigmas_[j + 1] = std::sqrt(std::max(0.0, remaining));
    }
    sigmas_.back() = 0.0;
}

std::string WeightVector::str() const
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (i) os << ", ";
        if (exact_) {
            os << Surd(exact_->raw[i], exact_->radical).str();
        } else {
            os << weights_[i];
        }
    }
    os << ']';
    return os.str();
}

WeightVector normalize_weights(std::span<const Surd> raw)
{
    require(!raw.empty(), ErrorCode::InvalidArgument, "weight vector is empty");
    for (const auto& s : raw)
        require(!s.is_zero(), ErrorCode::InvalidArgument, "weight vector has a zero entry");

    WeightVector w;
    const Surd& base = raw.front();
    const bool common = std::all_of(raw.begin(), raw.end(), [&](const Surd& s) { return base.same_radical(s); });
    if (common) {
        std::vector<Rational> q;
        q.reserve(raw.size());
        for (const auto& s : raw) q.push_back(mp::abs(base.ratio_on_radical(s)));
        std::sort(q.begin(), q.end(), std::greater<>());
        Rational sum_sq = 0;
        for (const auto& v : q) sum_sq += v * v;
        // |s_i| = q_i sqrt(r0); sum a^2 = r0 sum q^2, so a_i = q_i sqrt(1 / sum q^2).
        ExactWeights ex{std::move(q), 1 / sum_sq};
        const double scale = std::sqrt(to_double(ex.radical));
        for (const auto& v : ex.raw) w.weights_.push_back(to_double(v) * scale);
        w.exact_ = std::move(ex);
    } else {
        std::vector<double> d;
        for (const auto& s : raw) d.push_back(std::fabs(s.to_double()));
        std::sort(d.begin(), d.end(), std::greater<>());
        double ss = 0.0;
        for (double v : d) ss += v * v;
        const double inv = 1.0 / std::sqrt(ss);
        for (double v : d) w.weights_.push_back(v * inv);
    }
    w.finish();
    return w;
}

WeightVector normalize_weights(std::span<const double> raw)
{
    // Doubles are dyadic rationals, so the exact mirror is the exact input.
    std::vector<Surd> s;
    s.reserve(raw.size());
    for (double v : raw) {
        require(std::isfinite(v), ErrorCode::InvalidArgument, "weight is not finite");
        s.emplace_back(Rational(v));
    }
    return normalize_weights(std::span<const Surd>(s));
}

WeightVector normalize_weights(std::initializer_list<Surd> raw)
{
    return normalize_weights(std::span<const Surd>(raw.begin(), raw.size()));
}

TailMode parse_tail_mode(std::string_view name)
{
    if (name == "ge") return TailMode::GE;
    if (name == "gt") return TailMode::GT;
    if (name == "abs-ge" || name == "abs_ge") return TailMode::ABS_GE;
    if (name == "abs-in-open" || name == "abs_in_open") return TailMode::ABS_IN_OPEN;
    fail(ErrorCode::InvalidArgument, "unknown tail mode '" + std::string(name) + "'");
}

std::string_view to_string(TailMode mode)
{
    switch (mode) {
        case TailMode::GE: return "ge";
        case TailMode::GT: return "gt";
        case TailMode::ABS_GE: return "abs-ge";
        case TailMode::ABS_IN_OPEN: return "abs-in-open";
    }
    return "?";
}

// ---------------------------------------------------------------- files

namespace {

std::vector<std::string> data_lines(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(line);
    }
    return out;
}

}  // namespace

std::vector<Surd> read_weight_file(const std::string& path)
{
    std::vector<Surd> out;
    for (const auto& line : data_lines(path)) out.push_back(parse_surd(line));
    return out;
}

std::vector<std::vector<Surd>> read_vector_file(const std::string& path)
{
    std::vector<std::vector<Surd>> out;
    for (const auto& line : data_lines(path)) {
        std::istringstream is(line);
        std::vector<Surd> v;
        std::string tok;
        while (is >> tok) v.push_back(parse_surd(tok));
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace rdmc::core
