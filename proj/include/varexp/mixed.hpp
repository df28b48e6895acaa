#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "varexp/lebesgue.hpp"

namespace varexp {

/// Q_{jk} = 2^{-j}([0,1)^n + k): corner-anchored, side 2^{-j}, j_Q = j.
struct DyadicCube {
    int dim = 1;
    int j = 0;
    long kx = 0;
    long ky = 0;

    double side() const { return std::ldexp(1.0, -j); }
    double corner_x() const { return std::ldexp(static_cast<double>(kx), -j); }
    double corner_y() const { return std::ldexp(static_cast<double>(ky), -j); }
    double center_x() const { return corner_x() + 0.5 * side(); }
    double center_y() const { return corner_y() + 0.5 * side(); }

    bool contains(double x, double y = 0.0) const {
        const double s = side();
        if (x < corner_x() || x >= corner_x() + s) return false;
        if (dim == 2 && (y < corner_y() || y >= corner_y() + s)) return false;
        return true;
    }
};

/// All cubes with jMin <= j <= jMax meeting the box; j >= 0 only if
/// unitOrSmaller (the family of cubes with side <= 1).
inline std::vector<DyadicCube> enumerate_dyadic_cubes(const Box& box, int jMin, int jMax,
                                                      bool unitOrSmaller = false) {
    if (jMin > jMax) throw std::invalid_argument("enumerate_dyadic_cubes: jMin > jMax");
    if (std::ldexp(1.0, -jMax) < box.spacing() - 1e-15)
        throw std::invalid_argument(
            "enumerate_dyadic_cubes: finest cube side below grid resolution");
    std::vector<DyadicCube> cubes;
    const double L = box.half_width;
    for (int j = unitOrSmaller ? std::max(jMin, 0) : jMin; j <= jMax; ++j) {
        const double scale = std::ldexp(1.0, j);  // 2^j
        const long k_lo = static_cast<long>(std::floor(-L * scale));
        const long k_hi = static_cast<long>(std::ceil(L * scale)) - 1;
        for (long kx = k_lo; kx <= k_hi; ++kx) {
            if (box.dim == 1) {
                cubes.push_back({1, j, kx, 0});
            } else {
                for (long ky = k_lo; ky <= k_hi; ++ky) cubes.push_back({2, j, kx, ky});
            }
        }
    }
    return cubes;
}

/// Truncated sequence (f_j)_{j=0..J} of grid functions on a common box.
struct FunctionSequence {
    std::vector<GridFunction> levels;

    FunctionSequence() = default;
    explicit FunctionSequence(std::vector<GridFunction> lv) : levels(std::move(lv)) {
        if (levels.empty()) throw std::invalid_argument("FunctionSequence: empty");
        for (const auto& f : levels)
            if (!(f.box == levels.front().box))
                throw std::invalid_argument("FunctionSequence: mixed boxes");
    }

    const Box& box() const { return levels.front().box; }
    std::size_t truncation() const { return levels.size() - 1; }

    /// The shifted family (f_j)_{j >= jstart}; empty if jstart exceeds J.
    FunctionSequence tail(std::size_t jstart) const {
        FunctionSequence t;
        if (jstart >= levels.size()) return t;  // deliberately empty, norm 0
        t.levels.assign(levels.begin() + static_cast<long>(jstart), levels.end());
        return t;
    }

    bool empty() const { return levels.empty(); }
};

/// phi(x, r) on box x (0, infinity); cubes are evaluated at (center, side).
struct SetFunction {
    std::function<double(double, double, double)> eval;  // (x, y, r)
    double c1 = 1.0, c1_tilde = 1.0, c2 = 1.0;           // cached class constants

    double operator()(double x, double y, double r) const {
        const double v = eval(x, y, r);
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::domain_error("SetFunction: non-positive value");
        return v;
    }

    double of_cube(const DyadicCube& Q) const {
        return (*this)(Q.center_x(), Q.center_y(), Q.side());
    }

    static SetFunction one() {
        SetFunction phi;
        phi.eval = [](double, double, double) { return 1.0; };
        return phi;
    }

    /// phi(Q) = |Q|^tau, i.e. phi(x, r) = r^{n tau}.
    static SetFunction power(int dim, double tau) {
        SetFunction phi;
        phi.eval = [dim, tau](double, double, double r) { return std::pow(r, dim * tau); };
        return phi;
    }
};

/// Seeded sample plan for the doubling / compatibility constants.
struct SetFunctionPlan {
    // (x, y, r) for the doubling ratio phi(x,r)/phi(x,2r)
    std::vector<std::array<double, 3>> doubling;
    // (x, y, x2, y2, r) with |(x,y)-(x2,y2)| <= r
    std::vector<std::array<double, 5>> compatibility;

    static SetFunctionPlan make(const Box& box, std::size_t count = 4000,
                                std::uint64_t seed = 0x9e3779b9ULL) {
        SetFunctionPlan plan;
        std::mt19937_64 rng(seed);
        const double L = box.half_width;
        std::uniform_real_distribution<double> ux(-L, L);
        std::uniform_real_distribution<double> ulogr(std::log(box.spacing()), std::log(4.0 * L));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        auto clamp = [L](double v) { return std::min(L, std::max(-L, v)); };
        for (std::size_t i = 0; i < count; ++i) {
            const double x = ux(rng), y = box.dim == 2 ? ux(rng) : 0.0;
            const double r = std::exp(ulogr(rng));
            plan.doubling.push_back({x, y, r});
            double dx = unit(rng), dy = box.dim == 2 ? unit(rng) : 0.0;
            const double nrm = std::hypot(dx, dy);
            if (nrm > 1.0) {
                dx /= nrm;
                dy /= nrm;
            }
            plan.compatibility.push_back({x, y, clamp(x + r * dx),
                                          box.dim == 2 ? clamp(y + r * dy) : 0.0, r});
        }
        return plan;
    }
};

/// Smallest constants with 1/c1Tilde <= phi(x,r)/phi(x,2r) <= c1 over the
/// doubling samples and 1/c2 <= phi(x,r)/phi(x',r) <= c2 over the
/// compatibility samples. Empirical lower estimates of the class constants.
inline std::tuple<double, double, double> check_set_function_class(const SetFunction& phi,
                                                                   const SetFunctionPlan& plan) {
    double c1 = 1.0, c1t = 1.0, c2 = 1.0;
    for (const auto& [x, y, r] : plan.doubling) {
        const double ratio = phi(x, y, r) / phi(x, y, 2.0 * r);
        c1 = std::max(c1, ratio);
        c1t = std::max(c1t, 1.0 / ratio);
    }
    for (const auto& [x, y, x2, y2, r] : plan.compatibility) {
        const double ratio = phi(x, y, r) / phi(x2, y2, r);
        c2 = std::max(c2, std::max(ratio, 1.0 / ratio));
    }
    return {c1, c1t, c2};
}

inline SetFunction checked_set_function(SetFunction phi, const Box& box) {
    auto [c1, c1t, c2] = check_set_function_class(phi, SetFunctionPlan::make(box));
    phi.c1 = c1;
    phi.c1_tilde = c1t;
    phi.c2 = c2;
    return phi;
}

/// Pointwise quotient p(.)/q(.) of exponents (q bounded).
inline VariableExponent exponent_quotient(const VariableExponent& p, const VariableExponent& q) {
    if (!q.bounded()) throw std::domain_error("exponent_quotient: divisor must be bounded");
    GridFunction g = p.samples;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] = cplx(p.at(i) / q.at(i), 0.0);
    return VariableExponent(std::move(g));
}

/// || (sum_j |f_j(x)|^{q(x)})^{1/q(x)} ||_{L_p(.)(E)}  — the F-side inner norm.
inline double norm_Lp_lq(const FunctionSequence& fs, const VariableExponent& p,
                         const VariableExponent& q, const RegionMask& E) {
    if (!p.bounded() || !q.bounded())
        throw std::domain_error("norm_Lp_lq: requires bounded exponents");
    if (fs.empty()) return 0.0;
    const Box& b = fs.box();
    GridFunction g(b);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double qe = q.at(i);
        double s = 0.0;
        for (const auto& f : fs.levels) {
            const double a = std::abs(f.values[i]);
            if (a > 0.0) s += std::pow(a, qe);
        }
        g.values[i] = cplx(s > 0.0 ? std::pow(s, 1.0 / qe) : 0.0, 0.0);
    }
    return luxemburg_norm(g, p, E);
}

namespace detail {

/// inf{lambda > 0 : varrho_p(f / lambda^{1/q(.)}) <= 1}, with lambda^{1/inf}=1.
inline double inner_level_infimum(const GridFunction& f, const VariableExponent& p,
                                  const VariableExponent& q, const RegionMask& E) {
    double maxval = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (E.indicator[i]) maxval = std::max(maxval, std::abs(f.values[i]));
    if (maxval == 0.0) return 0.0;
    auto g = [&](double lam) {
        GridFunction scaled = f;
        for (std::size_t i = 0; i < scaled.values.size(); ++i) {
            const double qe = q.at(i);
            const double div = std::isinf(qe) ? 1.0 : std::pow(lam, 1.0 / qe);
            scaled.values[i] = cplx(std::abs(f.values[i]) / div, 0.0);
        }
        return modular(scaled, p, E);
    };
    const double lo = 1e-14;
    if (g(lo) <= 1.0) return 0.0;  // infimum over (0, infinity) is 0
    if (!std::isfinite(g(1e30)))
        return std::numeric_limits<double>::infinity();  // q=inf samples alone exceed 1
    double hi = 1.0;
    return bisect_modular(g, lo, hi, 1e-10);
}

}  // namespace detail

/// Semi-modular of the B-side space: sum over levels of the inner infima.
/// With q^+ < infinity the simplified form sum_j || |f_j|^{q(.)} ||_{p(.)/q(.)}
/// is used unless forceGeneral requests the definition-level bisection path.
inline double modular_lq_Lp(const FunctionSequence& fs, const VariableExponent& p,
                            const VariableExponent& q, const RegionMask& E,
                            bool forceGeneral = false) {
    if (fs.empty()) return 0.0;
    double total = 0.0;
    if (q.bounded() && !forceGeneral) {
        const auto pq = exponent_quotient(p, q);
        for (const auto& f : fs.levels) {
            GridFunction powed(f.box);
            for (std::size_t i = 0; i < f.values.size(); ++i) {
                const double a = std::abs(f.values[i]);
                powed.values[i] = cplx(a > 0.0 ? std::pow(a, q.at(i)) : 0.0, 0.0);
            }
            total += luxemburg_norm(powed, pq, E);
        }
        return total;
    }
    for (const auto& f : fs.levels) {
        total += detail::inner_level_infimum(f, p, q, E);
        if (!std::isfinite(total)) break;
    }
    return total;
}

/// || (f_j) | l_q(.)(L_p(.)) || = inf{ mu > 0 : modular((f_j/mu)) <= 1 }.
inline double norm_lq_Lp(const FunctionSequence& fs, const VariableExponent& p,
                         const VariableExponent& q, const RegionMask& E) {
    if (fs.empty()) return 0.0;
    double maxval = 0.0;
    for (const auto& f : fs.levels)
        for (std::size_t i = 0; i < f.values.size(); ++i)
            if (E.indicator[i]) maxval = std::max(maxval, std::abs(f.values[i]));
    if (maxval == 0.0) return 0.0;

    // q = infinity everywhere: the norm collapses to sup_j ||f_j||_{p(.)}
    if (q.p_minus == std::numeric_limits<double>::infinity()) {
        double s = 0.0;
        for (const auto& f : fs.levels) s = std::max(s, luxemburg_norm(f, p, E));
        return s;
    }

    // constant q: modular(mu) = mu^{-q} * sum_j |||f_j|^q||_{p/q}, closed form
    if (q.bounded() && q.p_plus == q.p_minus) {
        const double qc = q.p_plus;
        const double m = modular_lq_Lp(fs, p, q, E);
        return m > 0.0 ? std::pow(m, 1.0 / qc) : 0.0;
    }

    double hi = 1.0;
    for (const auto& f : fs.levels) hi += luxemburg_norm(f, p, E);
    auto g = [&](double mu) {
        FunctionSequence scaled = fs;
        for (auto& f : scaled.levels)
            for (auto& v : f.values) v /= mu;
        return modular_lq_Lp(scaled, p, q, E);
    };
    return detail::bisect_modular(g, 1e-12 * maxval, hi, 1e-10);
}

inline double norm_lq_Lp(const FunctionSequence& fs, const VariableExponent& p,
                         const VariableExponent& q) {
    return fs.empty() ? 0.0 : norm_lq_Lp(fs, p, q, RegionMask::full(fs.box()));
}

/// Mask of samples whose grid cells [x_k, x_k + h) have centers inside Q.
inline RegionMask cube_mask(const Box& box, const DyadicCube& Q) {
    const double h2 = 0.5 * box.spacing();
    return RegionMask::from_predicate(
        box, [&](double x, double y) { return Q.contains(x + h2, box.dim == 2 ? y + h2 : 0.0); });
}

struct CubeScanRow {
    DyadicCube cube;
    double restricted_norm = 0.0;
    double phi_value = 0.0;
    double ratio = 0.0;
};

namespace detail {

template <typename InnerNorm>
std::vector<CubeScanRow> cube_scan_impl(const FunctionSequence& fs, const SetFunction& phi,
                                        const std::vector<DyadicCube>& cubes, InnerNorm inner) {
    if (cubes.empty()) throw std::invalid_argument("cube scan: empty cube list");
    std::vector<CubeScanRow> rows;
    rows.reserve(cubes.size());
    for (const auto& P : cubes) {
        CubeScanRow row;
        row.cube = P;
        row.phi_value = phi.of_cube(P);
        const auto mask = cube_mask(fs.box(), P);
        if (!mask.empty()) {
            const auto tail = fs.tail(static_cast<std::size_t>(std::max(P.j, 0)));
            if (!tail.empty()) row.restricted_norm = inner(tail, mask);
        }
        row.ratio = row.restricted_norm / row.phi_value;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

inline std::vector<CubeScanRow> cube_scan_B(const FunctionSequence& fs, const VariableExponent& p,
                                            const VariableExponent& q, const SetFunction& phi,
                                            const std::vector<DyadicCube>& cubes) {
    return detail::cube_scan_impl(fs, phi, cubes, [&](const FunctionSequence& t, const RegionMask& m) {
        return norm_lq_Lp(t, p, q, m);
    });
}

inline std::vector<CubeScanRow> cube_scan_F(const FunctionSequence& fs, const VariableExponent& p,
                                            const VariableExponent& q, const SetFunction& phi,
                                            const std::vector<DyadicCube>& cubes) {
    return detail::cube_scan_impl(fs, phi, cubes, [&](const FunctionSequence& t, const RegionMask& m) {
        return norm_Lp_lq(t, p, q, m);
    });
}

inline double sup_ratio(const std::vector<CubeScanRow>& rows) {
    double s = 0.0;
    for (const auto& r : rows) s = std::max(s, r.ratio);
    return s;
}

/// || (f_j) | l_q^phi(L_p) || = sup_P phi(P)^{-1} ||(f_j)_{j>=(j_P v 0)} chi_P||.
inline double phi_norm_B(const FunctionSequence& fs, const VariableExponent& p,
                         const VariableExponent& q, const SetFunction& phi,
                         const std::vector<DyadicCube>& cubes) {
    return sup_ratio(cube_scan_B(fs, p, q, phi, cubes));
}

inline double phi_norm_F(const FunctionSequence& fs, const VariableExponent& p,
                         const VariableExponent& q, const SetFunction& phi,
                         const std::vector<DyadicCube>& cubes) {
    if (!p.bounded() || !q.bounded())
        throw std::domain_error("phi_norm_F: requires bounded exponents");
    return sup_ratio(cube_scan_F(fs, p, q, phi, cubes));
}

inline void save_cube_scan_csv(const std::vector<CubeScanRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_cube_scan_csv: cannot open " + path);
    out << "level,kx,ky,restricted_norm,phi,ratio\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.cube.j << ',' << r.cube.kx << ',' << r.cube.ky << ',' << r.restricted_norm << ','
            << r.phi_value << ',' << r.ratio << '\n';
}

/// Default cube-sup truncation: coarsest cubes 4x the box, finest cubes with
/// at least 8 samples per side.
inline std::pair<int, int> default_cube_levels(const Box& box) {
    const int jMin = -static_cast<int>(std::ceil(std::log2(2.0 * box.half_width))) - 2;
    const int jMax = static_cast<int>(
        std::floor(std::log2(static_cast<double>(box.n_axis) / (16.0 * box.half_width))));
    return {jMin, std::max(jMin, jMax)};
}

}  // namespace varexp
