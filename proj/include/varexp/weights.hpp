#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "varexp/exponents.hpp"
#include "varexp/grid.hpp"

namespace varexp {

/// Nearest-sample evaluation of a grid function at an arbitrary point.
inline double value_at_point(const GridFunction& f, double x, double y = 0.0) {
    const Box& b = f.box;
    auto clampi = [&](double v) {
        long i = std::lround((v + b.half_width) / b.spacing());
        return static_cast<std::size_t>(
            std::min<long>(static_cast<long>(b.n_axis) - 1, std::max<long>(0, i)));
    };
    const std::size_t ix = clampi(x);
    const std::size_t iy = b.dim == 2 ? clampi(y) : 0;
    return f.values[b.index(ix, iy)].real();
}

/// Admissible weight sequence (w_j)_{j=0..J}: positive levels on a common box,
/// with the dyadic growth 2^{alpha1} w_j <= w_{j+1} <= 2^{alpha2} w_j at every
/// sample. The locality parameter alpha is declared and checked empirically.
struct WeightSequence {
    std::vector<GridFunction> levels;
    double alpha = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;

    WeightSequence() = default;

    WeightSequence(std::vector<GridFunction> lv, double a, double a1, double a2)
        : levels(std::move(lv)), alpha(a), alpha1(a1), alpha2(a2) {
        if (levels.empty()) throw std::invalid_argument("WeightSequence: empty");
        if (!(a >= 0.0) || !(a1 <= a2))
            throw std::invalid_argument("WeightSequence: need alpha >= 0 and alpha1 <= alpha2");
        for (const auto& w : levels) {
            if (!(w.box == levels.front().box))
                throw std::invalid_argument("WeightSequence: mixed boxes");
            for (const auto& v : w.values)
                if (!(v.real() > 0.0) || !std::isfinite(v.real()))
                    throw std::domain_error("WeightSequence: weights must be positive");
        }
        const double tol = 1e-9;
        for (std::size_t j = 0; j + 1 < levels.size(); ++j)
            for (std::size_t i = 0; i < levels[j].values.size(); ++i) {
                const double r = levels[j + 1].values[i].real() / levels[j].values[i].real();
                if (std::log2(r) < alpha1 - tol || std::log2(r) > alpha2 + tol)
                    throw std::domain_error("WeightSequence: dyadic growth bound violated");
            }
    }

    const Box& box() const { return levels.front().box; }
    std::size_t truncation() const { return levels.size() - 1; }
    double at(std::size_t j, std::size_t i) const { return levels[j].values[i].real(); }
};

/// w_j(x) = 2^{j s(x)} for a bounded smoothness function s; alpha1 = s^-,
/// alpha2 = s^+, alpha from the log-Hoelder estimate of s.
inline WeightSequence make_weight_sequence_from_smoothness(const VariableExponent& s,
                                                           std::size_t J) {
    if (!s.bounded())
        throw std::domain_error("make_weight_sequence_from_smoothness: s must be bounded");
    std::vector<GridFunction> lv;
    for (std::size_t j = 0; j <= J; ++j) {
        GridFunction w(s.box());
        for (std::size_t i = 0; i < w.values.size(); ++i)
            w.values[i] = cplx(std::exp2(static_cast<double>(j) * s.at(i)), 0.0);
        lv.push_back(std::move(w));
    }
    // s may take negative values; the log-Hoelder machinery wants positivity,
    // so shift by a constant (the estimate is shift-invariant)
    GridFunction shifted = s.samples;
    const double shift = s.p_minus <= 0.0 ? 1.0 - s.p_minus : 0.0;
    for (auto& v : shifted.values) v = cplx(v.real() + shift, 0.0);
    const double clog = check_log_holder_local(VariableExponent(std::move(shifted)));
    return WeightSequence(std::move(lv), clog, s.p_minus, s.p_plus);
}

/// Empirical class parameters: the extreme per-sample dyadic growth rates and
/// the smallest alpha making the locality condition
///   w_j(x) <= 1.05 * w_j(y) * (1 + 2^j |x-y|)^alpha
/// hold over the pair plan.
inline std::tuple<double, double, double> check_admissible_weights(const WeightSequence& w,
                                                                   const PairPlan& plan) {
    double a1 = std::numeric_limits<double>::infinity();
    double a2 = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < w.levels.size(); ++j)
        for (std::size_t i = 0; i < w.levels[j].values.size(); ++i) {
            const double r = std::log2(w.at(j + 1, i) / w.at(j, i));
            a1 = std::min(a1, r);
            a2 = std::max(a2, r);
        }
    if (w.levels.size() == 1) a1 = a2 = 0.0;

    const double c = 1.05;
    double alpha = 0.0;
    for (std::size_t j = 0; j < w.levels.size(); ++j) {
        const double twoj = std::exp2(static_cast<double>(j));
        for (const auto& [i, k] : plan.pairs) {
            const double d = point_distance(w.box(), i, k);
            if (d <= 0.0) continue;
            const double bracket = std::log1p(twoj * d);
            const double ratio = std::max(w.at(j, i) / w.at(j, k), w.at(j, k) / w.at(j, i));
            if (ratio > c) alpha = std::max(alpha, std::log(ratio / c) / bracket);
        }
    }
    return {alpha, a1, a2};
}

inline std::tuple<double, double, double> check_admissible_weights(const WeightSequence& w) {
    return check_admissible_weights(w, PairPlan::build(w.box()));
}

/// Empirical constant in the shift bound for j >= nu:
///   w_j(x) <= C * 2^{(j-nu) alpha2} w_nu(2^{-nu} k) (1 + 2^nu |x - 2^{-nu} k|)^alpha.
/// Scans all sample points x, all level pairs j >= nu, and lattice points
/// 2^{-nu} k inside the box.
inline double weight_shift_constant_down(const WeightSequence& w) {
    const Box& b = w.box();
    double C = 0.0;
    for (std::size_t nu = 0; nu < w.levels.size(); ++nu) {
        const double twonu = std::exp2(static_cast<double>(nu));
        const long k_lo = static_cast<long>(std::floor(-b.half_width * twonu));
        const long k_hi = static_cast<long>(std::ceil(b.half_width * twonu)) - 1;
        const long stride = std::max<long>(1, (k_hi - k_lo + 1) / 16);
        for (long k = k_lo; k <= k_hi; k += stride) {
            const double xk = static_cast<double>(k) / twonu;
            for (std::size_t j = nu; j < w.levels.size(); ++j) {
                const double lvl =
                    std::exp2(static_cast<double>(j - nu) * w.alpha2) *
                    value_at_point(w.levels[nu], xk);
                for (std::size_t i = 0; i < b.size(); ++i) {
                    const double x = b.dim == 1 ? b.coord(i) : b.coord(i % b.n_axis);
                    const double y = b.dim == 2 ? b.coord(i / b.n_axis) : 0.0;
                    const double dist = b.dim == 1 ? std::abs(x - xk) : std::hypot(x - xk, y);
                    const double denom = lvl * std::pow(1.0 + twonu * dist, w.alpha);
                    C = std::max(C, w.at(j, i) / denom);
                }
            }
        }
    }
    return C;
}

/// Dual bound for nu > j, with decay -(nu-j) alpha1 and the 2^j-scaled bracket:
///   w_j(x) <= C * 2^{-(nu-j) alpha1} w_nu(2^{-nu} k) (1 + 2^j |x - 2^{-nu} k|)^alpha.
inline double weight_shift_constant_up(const WeightSequence& w) {
    const Box& b = w.box();
    double C = 0.0;
    for (std::size_t nu = 1; nu < w.levels.size(); ++nu) {
        const double twonu = std::exp2(static_cast<double>(nu));
        const long k_lo = static_cast<long>(std::floor(-b.half_width * twonu));
        const long k_hi = static_cast<long>(std::ceil(b.half_width * twonu)) - 1;
        const long stride = std::max<long>(1, (k_hi - k_lo + 1) / 16);
        for (long k = k_lo; k <= k_hi; k += stride) {
            const double xk = static_cast<double>(k) / twonu;
            for (std::size_t j = 0; j < nu; ++j) {
                const double twoj = std::exp2(static_cast<double>(j));
                const double lvl =
                    std::exp2(-static_cast<double>(nu - j) * w.alpha1) *
                    value_at_point(w.levels[nu], xk);
                for (std::size_t i = 0; i < b.size(); ++i) {
                    const double x = b.dim == 1 ? b.coord(i) : b.coord(i % b.n_axis);
                    const double y = b.dim == 2 ? b.coord(i / b.n_axis) : 0.0;
                    const double dist = b.dim == 1 ? std::abs(x - xk) : std::hypot(x - xk, y);
                    const double denom = lvl * std::pow(1.0 + twoj * dist, w.alpha);
                    C = std::max(C, w.at(j, i) / denom);
                }
            }
        }
    }
    return C;
}

}  // namespace varexp
