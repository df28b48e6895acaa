#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "varexp/kernels.hpp"
#include "varexp/mixed.hpp"
#include "varexp/weights.hpp"

namespace varexp {

enum class SpaceFamily { B, F };

/// Level convolver: (f, j) -> psi_j * f. Adapts both kernel types.
using LevelConvolver = std::function<GridFunction(const GridFunction&, int)>;

inline LevelConvolver convolver(const KernelPair& pair) {
    return [&pair](const GridFunction& f, int j) { return pair.conv_level(f, j); };
}

inline LevelConvolver convolver(const LocalMeansPair& lm) {
    return [&lm](const GridFunction& f, int j) { return lm.conv_level(f, j); };
}

/// Empirical c_log of 1/q: smallest c with |1/q(x) - 1/q(y)| <= c / log(e + 1/|x-y|),
/// with the 1/infinity = 0 convention.
inline double clog_inverse(const VariableExponent& q, const PairPlan& plan) {
    const Box& b = q.box();
    auto inv = [&](std::size_t i) {
        const double v = q.at(i);
        return std::isinf(v) ? 0.0 : 1.0 / v;
    };
    double c = 0.0;
    for (const auto& [i, j] : plan.pairs) {
        const double d = point_distance(b, i, j);
        if (d <= 0.0) continue;
        c = std::max(c, std::abs(inv(i) - inv(j)) * std::log(euler_e + 1.0 / d));
    }
    return c;
}

inline double clog_inverse(const VariableExponent& q) {
    return clog_inverse(q, PairPlan::build(q.box()));
}

/// Full parameter set of one B- or F-space instance.
struct SpaceParams {
    VariableExponent p, q;
    WeightSequence w;
    SetFunction phi;
    std::size_t J = 0;
    int jMin = 0, jMax = 0;
    SpaceFamily family = SpaceFamily::B;

    std::vector<DyadicCube> cubes() const { return enumerate_dyadic_cubes(box(), jMin, jMax); }
    const Box& box() const { return p.box(); }
    double log2_c1_tilde() const { return std::max(0.0, std::log2(phi.c1_tilde)); }
};

/// Deepest level whose spectral annulus (up to 1.9 * 2^J) stays under Nyquist,
/// capped by log2(N) - 3.
inline std::size_t default_truncation(const Box& box) {
    const int byN = static_cast<int>(std::log2(static_cast<double>(box.n_axis))) - 3;
    const int bySpec = static_cast<int>(std::floor(std::log2(box.nyquist() / 1.9)));
    return static_cast<std::size_t>(std::max(0, std::min(byN, bySpec)));
}

inline SpaceParams make_space_params(const VariableExponent& p, const VariableExponent& q,
                                     WeightSequence w, SetFunction phi, SpaceFamily family) {
    if (family == SpaceFamily::F && (!p.bounded() || !q.bounded()))
        throw std::domain_error("make_space_params: F family requires bounded exponents");
    SpaceParams sp;
    sp.p = p;
    sp.q = q;
    sp.J = std::min(default_truncation(p.box()), w.truncation());
    sp.w = std::move(w);
    sp.phi = checked_set_function(std::move(phi), p.box());
    auto [jMin, jMax] = default_cube_levels(p.box());
    sp.jMin = jMin;
    sp.jMax = jMax;
    sp.family = family;
    return sp;
}

/// The weighted level sequence (w_j * (psi_j * f))_{j = 0..J}.
inline FunctionSequence weighted_levels(const GridFunction& f, const SpaceParams& sp,
                                        const LevelConvolver& conv) {
    if (sp.w.truncation() < sp.J)
        throw std::invalid_argument("space_norm: weight sequence shorter than truncation");
    std::vector<GridFunction> lv;
    for (std::size_t j = 0; j <= sp.J; ++j) {
        GridFunction g = conv(f, static_cast<int>(j));
        for (std::size_t i = 0; i < g.values.size(); ++i)
            g.values[i] *= sp.w.levels[j].values[i].real();
        lv.push_back(std::move(g));
    }
    return FunctionSequence(std::move(lv));
}

inline double phi_norm(const FunctionSequence& fs, const SpaceParams& sp) {
    const auto cubes = sp.cubes();
    return sp.family == SpaceFamily::B ? phi_norm_B(fs, sp.p, sp.q, sp.phi, cubes)
                                       : phi_norm_F(fs, sp.p, sp.q, sp.phi, cubes);
}

inline double space_norm(const GridFunction& f, const SpaceParams& sp, const KernelPair& pair) {
    return phi_norm(weighted_levels(f, sp, convolver(pair)), sp);
}

inline double space_norm(const GridFunction& f, const SpaceParams& sp, const LocalMeansPair& lm) {
    return phi_norm(weighted_levels(f, sp, convolver(lm)), sp);
}

enum class NormVariant { convolution, peetre };

/// Threshold on the Peetre parameter a for the given family.
inline double peetre_threshold(const SpaceParams& sp) {
    const double tail = sp.w.alpha + sp.log2_c1_tilde();
    const double n = sp.box().dim;
    if (sp.family == SpaceFamily::B) return n / sp.p.p_minus + clog_inverse(sp.q) + tail;
    return n / std::min(sp.p.p_minus, sp.q.p_minus) + tail;
}

/// Moment order required of a general kernel pair.
inline int required_moment_order(const SpaceParams& sp) {
    return static_cast<int>(std::floor(sp.w.alpha2 + sp.log2_c1_tilde())) + 1;
}

/// Quasi-norm with a general pair: levels are psi_j * f or the Peetre maximal
/// functions (psi_j^* f)_a. momentOrder declares the kernel's verified moment
/// order R (cond: D^beta psi-hat(0) = 0 for |beta| < R).
inline double space_norm_variants(const GridFunction& f, const SpaceParams& sp,
                                  const LevelConvolver& conv, int momentOrder, double a,
                                  NormVariant variant) {
    const int needR = required_moment_order(sp);
    if (momentOrder < needR)
        throw std::invalid_argument("space_norm_variants: kernel moment order " +
                                    std::to_string(momentOrder) + " below required " +
                                    std::to_string(needR));
    if (variant == NormVariant::peetre) {
        const double bound = peetre_threshold(sp);
        if (!(a > bound))
            throw std::invalid_argument("space_norm_variants: a = " + std::to_string(a) +
                                        " below the threshold " + std::to_string(bound));
    }
    if (sp.w.truncation() < sp.J)
        throw std::invalid_argument("space_norm_variants: weight sequence too short");
    std::vector<GridFunction> lv;
    for (std::size_t j = 0; j <= sp.J; ++j) {
        GridFunction g = conv(f, static_cast<int>(j));
        if (variant == NormVariant::peetre)
            g = peetre_maximal_from_conv(g, static_cast<int>(j), a);
        for (std::size_t i = 0; i < g.values.size(); ++i)
            g.values[i] *= sp.w.levels[j].values[i].real();
        lv.push_back(std::move(g));
    }
    return phi_norm(FunctionSequence(std::move(lv)), sp);
}

struct EquivalenceReport {
    std::vector<double> norms_a, norms_b, ratios;  // ratios skip degenerate entries
    std::size_t skipped_zero = 0;
    double ratio_min = 0.0, ratio_max = 0.0;

    double spread() const { return ratio_min > 0.0 ? ratio_max / ratio_min : 0.0; }
};

/// Per-function norm ratios between two kernel systems on a test family.
inline EquivalenceReport equivalence_experiment(const SpaceParams& sp, const LevelConvolver& ka,
                                                const LevelConvolver& kb,
                                                const std::vector<GridFunction>& family) {
    EquivalenceReport rep;
    rep.ratio_min = std::numeric_limits<double>::infinity();
    rep.ratio_max = 0.0;
    for (const auto& f : family) {
        const double na = phi_norm(weighted_levels(f, sp, ka), sp);
        const double nb = phi_norm(weighted_levels(f, sp, kb), sp);
        rep.norms_a.push_back(na);
        rep.norms_b.push_back(nb);
        if (na <= 0.0 || nb <= 0.0) {
            ++rep.skipped_zero;
            continue;
        }
        const double r = na / nb;
        rep.ratios.push_back(r);
        rep.ratio_min = std::min(rep.ratio_min, r);
        rep.ratio_max = std::max(rep.ratio_max, r);
    }
    return rep;
}

/// Fixed 20-function test family: gaussians (3 scales, 3 offsets), modulated
/// gaussians, mollified indicators, a chirp, and 9 seeded band-limited fields.
inline std::vector<GridFunction> canonical_family(const Box& box) {
    std::vector<GridFunction> fam;
    auto push = [&](auto&& fn) { fam.push_back(make_grid_function_real(fn, box)); };
    for (double s : {0.5, 1.0, 2.0})
        push([s](double x, double y) { return std::exp(-(x * x + y * y) / (s * s)); });
    for (double c : {-2.0, 1.0, 2.0})
        push([c](double x, double y) { return std::exp(-((x - c) * (x - c) + y * y)); });
    for (double xi : {1.5, 3.0})
        push([xi](double x, double y) {
            return std::cos(xi * x) * std::exp(-(x * x + y * y));
        });
    for (double wdt : {0.2, 0.05})
        push([wdt](double x, double y) {
            auto edge = [wdt](double t) { return detail::smooth_step((1.0 - std::abs(t)) / wdt); };
            return edge(x) * edge(y);  // edge(0) = 1, so this covers n = 1 too
        });
    push([](double x, double y) { return std::sin(x * x) * std::exp(-0.25 * (x * x + y * y)); });
    for (std::uint64_t seed = 101; seed <= 109; ++seed)
        fam.push_back(random_band_limited(box, 6.0, seed));
    return fam;
}

/// Random level sequences for the convolution-inequality experiments.
inline FunctionSequence random_level_sequence(const Box& box, std::size_t J, std::uint64_t seed) {
    std::vector<GridFunction> lv;
    for (std::size_t nu = 0; nu <= J; ++nu) {
        const double cut = std::min(box.nyquist() * 0.8, 1.5 * std::ldexp(1.0, nu));
        lv.push_back(random_band_limited(box, cut, seed * 977 + nu));
    }
    return FunctionSequence(std::move(lv));
}

/// max over trials of ||(eta_{nu,R} * f_nu)||_phi / ||(f_nu)||_phi.
inline double test_eta_conv_inequality(const SpaceParams& sp, double R, int trials,
                                       std::uint64_t seed) {
    const double n = sp.box().dim;
    const double bound = sp.family == SpaceFamily::B
                             ? n + clog_inverse(sp.q) + sp.log2_c1_tilde()
                             : n + sp.log2_c1_tilde();
    if (!(R > bound))
        throw std::invalid_argument("test_eta_conv_inequality: R = " + std::to_string(R) +
                                    " below the bound " + std::to_string(bound));
    if (sp.family == SpaceFamily::B && sp.p.p_minus < 1.0)
        throw std::invalid_argument("test_eta_conv_inequality: B family needs p^- >= 1");
    if (sp.family == SpaceFamily::F && (sp.p.p_minus < 1.0 || sp.q.p_minus < 1.0))
        throw std::invalid_argument("test_eta_conv_inequality: F family needs p^-, q^- >= 1");

    std::vector<GridFunction> etas;
    for (std::size_t nu = 0; nu <= sp.J; ++nu)
        etas.push_back(eta(static_cast<int>(nu), R, sp.box()));

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto fs = random_level_sequence(sp.box(), sp.J, seed + static_cast<std::uint64_t>(t));
        std::vector<GridFunction> out;
        for (std::size_t nu = 0; nu <= sp.J; ++nu) out.push_back(convolve(etas[nu], fs.levels[nu]));
        const double denom = phi_norm(fs, sp);
        if (denom <= 0.0) continue;
        worst = std::max(worst, phi_norm(FunctionSequence(std::move(out)), sp) / denom);
    }
    return worst;
}

/// G_j = sum_{nu <= j} 2^{-(j-nu) D2} g_nu + sum_{nu > j} 2^{-(nu-j) D1} g_nu.
inline FunctionSequence discrete_conv_transform(const FunctionSequence& g, double D1, double D2) {
    std::vector<GridFunction> out;
    for (std::size_t j = 0; j < g.levels.size(); ++j) {
        GridFunction G(g.box());
        for (std::size_t nu = 0; nu < g.levels.size(); ++nu) {
            const double wgt = nu <= j ? std::exp2(-static_cast<double>(j - nu) * D2)
                                       : std::exp2(-static_cast<double>(nu - j) * D1);
            for (std::size_t i = 0; i < G.values.size(); ++i)
                G.values[i] += wgt * std::abs(g.levels[nu].values[i]);
        }
        out.push_back(std::move(G));
    }
    return FunctionSequence(std::move(out));
}

/// max over trials of ||(G_j)|| / ||(g_nu)|| in the B- and F-side phi norms.
inline std::pair<double, double> test_discrete_conv_inequality(const SpaceParams& sp, double D1,
                                                               double D2, int trials,
                                                               std::uint64_t seed) {
    if (!(D1 > 0.0) || !(D2 > sp.log2_c1_tilde()))
        throw std::invalid_argument(
            "test_discrete_conv_inequality: need D1 > 0 and D2 > max{0, log2 c1~} = " +
            std::to_string(sp.log2_c1_tilde()));
    const auto cubes = sp.cubes();
    double worstB = 0.0, worstF = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto g = random_level_sequence(sp.box(), sp.J, seed + static_cast<std::uint64_t>(t));
        auto G = discrete_conv_transform(g, D1, D2);
        const double dB = phi_norm_B(g, sp.p, sp.q, sp.phi, cubes);
        const double dF = phi_norm_F(g, sp.p, sp.q, sp.phi, cubes);
        if (dB > 0.0) worstB = std::max(worstB, phi_norm_B(G, sp.p, sp.q, sp.phi, cubes) / dB);
        if (dF > 0.0) worstF = std::max(worstF, phi_norm_F(G, sp.p, sp.q, sp.phi, cubes) / dF);
    }
    return {worstB, worstF};
}

}  // namespace varexp
