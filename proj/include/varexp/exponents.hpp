#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "varexp/grid.hpp"

namespace varexp {

inline constexpr double euler_e = 2.71828182845904523536;

/// Deterministic plan of sample-index pairs for sup-type estimates.
/// Full O(N^2) sweep for small 1d grids, seeded subsampling otherwise.
struct PairPlan {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

    static PairPlan build(const Box& box, std::size_t budget = 1'000'000,
                          std::uint64_t seed = 0x5eedULL) {
        PairPlan plan;
        const std::size_t M = box.size();
        if (box.dim == 1 && M <= 512) {
            plan.pairs.reserve(M * (M - 1) / 2);
            for (std::uint32_t i = 0; i < M; ++i)
                for (std::uint32_t j = i + 1; j < M; ++j) plan.pairs.emplace_back(i, j);
        } else {
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(M - 1));
            plan.pairs.reserve(budget);
            while (plan.pairs.size() < budget) {
                const std::uint32_t i = pick(rng), j = pick(rng);
                if (i != j) plan.pairs.emplace_back(i, j);
            }
        }
        return plan;
    }
};

inline double point_distance(const Box& box, std::size_t i, std::size_t j) {
    if (box.dim == 1) return std::abs(box.coord(i) - box.coord(j));
    const std::size_t N = box.n_axis;
    const double dx = box.coord(i % N) - box.coord(j % N);
    const double dy = box.coord(i / N) - box.coord(j / N);
    return std::hypot(dx, dy);
}

inline double point_norm(const Box& box, std::size_t i) {
    if (box.dim == 1) return std::abs(box.coord(i));
    const std::size_t N = box.n_axis;
    return std::hypot(box.coord(i % N), box.coord(i / N));
}

/// A sampled positive exponent p(.) with cached bounds. Samples equal to
/// +infinity encode the p = infinity convention.
struct VariableExponent {
    GridFunction samples;
    double p_minus = 0.0;
    double p_plus = 0.0;
    std::optional<double> infinity_value;  // g_inf for global log-Hoelder checks

    VariableExponent() = default;

    explicit VariableExponent(GridFunction g, std::optional<double> g_inf = std::nullopt)
        : samples(std::move(g)), infinity_value(g_inf) {
        p_minus = std::numeric_limits<double>::infinity();
        p_plus = 0.0;
        for (const auto& v : samples.values) {
            const double s = v.real();
            if (std::isnan(s) || s <= 0.0)
                throw std::domain_error("VariableExponent: exponent samples must be positive");
            p_minus = std::min(p_minus, s);
            p_plus = std::max(p_plus, s);
        }
    }

    static VariableExponent constant(const Box& box, double c) {
        return VariableExponent(make_grid_function_real([c](double, double) { return c; }, box));
    }

    static VariableExponent from_function(const std::function<double(double, double)>& fn,
                                          const Box& box) {
        return VariableExponent(make_grid_function_real(fn, box));
    }

    const Box& box() const { return samples.box; }
    double at(std::size_t i) const { return samples.values[i].real(); }
    bool bounded() const { return std::isfinite(p_plus); }

    /// Pointwise p(.)/r for r > 0; infinity samples stay infinite.
    VariableExponent divided_by(double r) const {
        GridFunction g = samples;
        for (auto& v : g.values) v = cplx(v.real() / r, 0.0);
        return VariableExponent(std::move(g));
    }
};

inline std::pair<double, double> exponent_bounds(const VariableExponent& p) {
    return {p.p_minus, p.p_plus};
}

/// Smallest c with |g(x)-g(y)| <= c / log(e + 1/|x-y|) over the sampled pairs.
/// Empirical evidence only: can certify failure under refinement, not membership.
inline double check_log_holder_local(const VariableExponent& g, const PairPlan& plan) {
    if (!g.bounded())
        throw std::domain_error("check_log_holder_local: exponent must be bounded");
    double c = 0.0;
    for (const auto& [i, j] : plan.pairs) {
        const double d = point_distance(g.box(), i, j);
        if (d <= 0.0) continue;
        c = std::max(c, std::abs(g.at(i) - g.at(j)) * std::log(euler_e + 1.0 / d));
    }
    return c;
}

inline double check_log_holder_local(const VariableExponent& g) {
    return check_log_holder_local(g, PairPlan::build(g.box()));
}

/// max over the grid of |g(x) - g_inf| * log(e + |x|).
inline double check_log_holder_global(const VariableExponent& g, double g_inf) {
    if (!g.bounded())
        throw std::domain_error("check_log_holder_global: exponent must be bounded");
    double c = 0.0;
    for (std::size_t i = 0; i < g.samples.values.size(); ++i)
        c = std::max(c, std::abs(g.at(i) - g_inf) * std::log(euler_e + point_norm(g.box(), i)));
    return c;
}

}  // namespace varexp
