#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "varexp/exponents.hpp"
#include "varexp/grid.hpp"

namespace varexp {

/// Indicator of a measurable set E on the grid.
struct RegionMask {
    Box box;
    std::vector<std::uint8_t> indicator;

    RegionMask() = default;
    explicit RegionMask(const Box& b, bool fill = true)
        : box(b), indicator(b.size(), fill ? 1 : 0) {}

    static RegionMask full(const Box& b) { return RegionMask(b, true); }

    static RegionMask from_predicate(const Box& b,
                                     const std::function<bool(double, double)>& pred) {
        RegionMask m(b, false);
        const std::size_t rows = b.dim == 2 ? b.n_axis : 1;
        for (std::size_t iy = 0; iy < rows; ++iy)
            for (std::size_t ix = 0; ix < b.n_axis; ++ix)
                m.indicator[b.index(ix, iy)] =
                    pred(b.coord(ix), b.dim == 2 ? b.coord(iy) : 0.0) ? 1 : 0;
        return m;
    }

    /// 1d half-open interval [a, b).
    static RegionMask interval(const Box& b, double a, double c) {
        return from_predicate(b, [a, c](double x, double) { return x >= a && x < c; });
    }

    double measure() const {
        std::size_t cnt = 0;
        for (auto v : indicator) cnt += v;
        return static_cast<double>(cnt) * std::pow(box.spacing(), box.dim);
    }

    bool empty() const {
        for (auto v : indicator)
            if (v) return false;
        return true;
    }
};

/// h^n * sum_E (|f(x)|/lambda)^{p(x)}, with the essential-sup convention for
/// p(x) = infinity: such samples contribute 0 when |f|/lambda <= 1 and make
/// the modular +infinity otherwise.
inline double modular_scaled(const GridFunction& f, const VariableExponent& p,
                             const RegionMask& E, double lambda) {
    require_same_box(f, p.samples, "modular");
    if (!(f.box == E.box)) throw std::invalid_argument("modular: mask box mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (!E.indicator[i]) continue;
        const double a = std::abs(f.values[i]) / lambda;
        if (a == 0.0) continue;
        const double pe = p.at(i);
        if (std::isinf(pe)) {
            if (a > 1.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        sum += std::pow(a, pe);
    }
    return sum * std::pow(f.box.spacing(), f.box.dim);
}

inline double modular(const GridFunction& f, const VariableExponent& p, const RegionMask& E) {
    return modular_scaled(f, p, E, 1.0);
}

namespace detail {

/// inf{lambda > 0 : g(lambda) <= 1} for a non-increasing g, by bisection.
inline double bisect_modular(const std::function<double(double)>& g, double lo, double hi,
                             double rel_tol = 1e-12, int max_iter = 200) {
    // ensure the bracket actually brackets
    int guard = 0;
    while (g(hi) > 1.0 && guard++ < 64) hi *= 2.0;
    if (g(lo) <= 1.0) return lo;
    for (int it = 0; it < max_iter && (hi - lo) > rel_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace detail

/// Luxemburg norm inf{lambda > 0 : modular(f/lambda) <= 1}. Returns 0 iff
/// f vanishes on E. The modular is strictly decreasing in lambda on finite
/// grids, so bisection resolves the infimum to relative tolerance 1e-12.
inline double luxemburg_norm(const GridFunction& f, const VariableExponent& p,
                             const RegionMask& E) {
    require_same_box(f, p.samples, "luxemburg_norm");
    double maxval = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (E.indicator[i]) maxval = std::max(maxval, std::abs(f.values[i]));
    if (maxval == 0.0) return 0.0;
    const double meas = E.measure();
    const double lo = 1e-12 * maxval;
    // bracket cap per the constant-exponent bound ||f|| <= maxval * |E|^{1/p^-};
    // clamped below by maxval so the decreasing-tail estimate applies
    const double hi = maxval * std::max(1.0, std::pow(meas, 1.0 / p.p_minus)) + 1.0;
    return detail::bisect_modular(
        [&](double lam) { return modular_scaled(f, p, E, lam); }, lo, hi);
}

inline double luxemburg_norm(const GridFunction& f, const VariableExponent& p) {
    return luxemburg_norm(f, p, RegionMask::full(f.box));
}

}  // namespace varexp
