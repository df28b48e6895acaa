#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "varexp/spaces.hpp"

namespace varexp {

namespace detail {

/// Indices at least `margin` samples away from the periodic wrap seam on every
/// axis. Derivatives and difference quotients are only trusted there: the grid
/// is periodic, so finite differences across the box edge see the jump between
/// f(L - h) and f(-L).
inline bool interior_index(const Box& b, std::size_t i, std::size_t margin) {
    const std::size_t N = b.n_axis;
    const std::size_t ix = b.dim == 2 ? i % N : i;
    if (ix < margin || ix + margin >= N) return false;
    if (b.dim == 2) {
        const std::size_t iy = i / N;
        if (iy < margin || iy + margin >= N) return false;
    }
    return true;
}

inline double interior_sup(const GridFunction& f, std::size_t margin) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (interior_index(f.box, i, margin)) s = std::max(s, std::abs(f.values[i]));
    return s;
}

/// sup over interior pairs at lag >= 2 samples of |g(x)-g(y)| / |x-y|^sigma.
/// Deterministic multiplicative lag ladder along the axes (and the diagonal in
/// 2d): short lags catch the Lipschitz regime, long lags the sup-norm regime.
inline double holder_seminorm(const GridFunction& g, double sigma, std::size_t margin) {
    const Box& b = g.box;
    const std::size_t N = b.n_axis;
    std::vector<std::size_t> lags;
    for (std::size_t d = 2; d <= N / 2; d = std::max(d + 1, d + d / 2)) lags.push_back(d);
    const double h = b.spacing();
    double s = 0.0;
    auto scan = [&](long dx, long dy, double dist) {
        const double denom = std::pow(dist, sigma);
        const std::size_t rows = b.dim == 2 ? N : 1;
        for (std::size_t iy = 0; iy < rows; ++iy) {
            const long jy = static_cast<long>(iy) + dy;
            if (jy < 0 || jy >= static_cast<long>(rows)) continue;
            for (std::size_t ix = 0; ix < N; ++ix) {
                const long jx = static_cast<long>(ix) + dx;
                if (jx < 0 || jx >= static_cast<long>(N)) continue;
                const std::size_t ia = b.index(ix, iy);
                const std::size_t ib = b.index(static_cast<std::size_t>(jx),
                                               static_cast<std::size_t>(jy));
                if (!interior_index(b, ia, margin) || !interior_index(b, ib, margin)) continue;
                s = std::max(s, std::abs(g.values[ia] - g.values[ib]) / denom);
            }
        }
    };
    for (std::size_t d : lags) {
        const long dl = static_cast<long>(d);
        scan(dl, 0, static_cast<double>(d) * h);
        if (b.dim == 2) {
            scan(0, dl, static_cast<double>(d) * h);
            scan(dl, dl, static_cast<double>(d) * h * std::sqrt(2.0));
        }
    }
    return s;
}

/// All multi-indices with |gamma| == m (or <= m) valid on the box dimension.
inline std::vector<std::array<int, 2>> multi_indices(int dim, int m, bool exact) {
    std::vector<std::array<int, 2>> out;
    for (int gx = 0; gx <= m; ++gx)
        for (int gy = 0; gy <= (dim == 2 ? m : 0); ++gy) {
            const int tot = gx + gy;
            if (exact ? tot == m : tot <= m) out.push_back({gx, gy});
        }
    return out;
}

/// Split s > 0 into s = m + sigma with integer m >= 0 and sigma in (0, 1].
inline std::pair<int, double> holder_split(double s) {
    double fl = std::floor(s);
    if (fl == s) fl -= 1.0;  // integer s: sigma = 1
    return {static_cast<int>(fl), s - fl};
}

constexpr std::size_t holder_margin = 6;

}  // namespace detail

/// Hoelder norm on C^s: the C^m norm (sup of |D^gamma f| over |gamma| <= m by
/// central finite differences) plus the order-sigma difference-quotient sup of
/// the top derivatives, where s = m + sigma with sigma in (0, 1]. s = 0 gives
/// the sup norm. The wrap seam of the periodic grid is excluded.
inline double holder_norm(const GridFunction& f, double s) {
    if (s < 0.0) throw std::invalid_argument("holder_norm: s must be >= 0");
    if (s == 0.0) return detail::interior_sup(f, detail::holder_margin);
    const auto [m, sigma] = detail::holder_split(s);
    if (m > 4) throw std::invalid_argument("holder_norm: derivative order exceeds budget");
    double total = 0.0;
    for (const auto& g : detail::multi_indices(f.box.dim, m, false))
        total += detail::interior_sup(finite_difference(f, g), detail::holder_margin);
    for (const auto& g : detail::multi_indices(f.box.dim, m, true))
        total += detail::holder_seminorm(finite_difference(f, g), sigma, detail::holder_margin);
    return total;
}

/// Hoelder norm of the dilated function a(2^{-nu} .), computed exactly from
/// the samples of a through the chain rule: D^gamma[a(2^{-nu} x)] =
/// 2^{-nu |gamma|} (D^gamma a)(2^{-nu} x), and the order-sigma quotient picks
/// up the remaining factor, for a total weight 2^{-nu s} on the seminorm.
inline double holder_norm_scaled(const GridFunction& a, int nu, double s) {
    if (s < 0.0) throw std::invalid_argument("holder_norm_scaled: s must be >= 0");
    if (s == 0.0) return detail::interior_sup(a, detail::holder_margin);
    const auto [m, sigma] = detail::holder_split(s);
    if (m > 4) throw std::invalid_argument("holder_norm_scaled: derivative order exceeds budget");
    double total = 0.0;
    for (const auto& g : detail::multi_indices(a.box.dim, m, false))
        total += std::exp2(-static_cast<double>(nu * (g[0] + g[1]))) *
                 detail::interior_sup(finite_difference(a, g), detail::holder_margin);
    for (const auto& g : detail::multi_indices(a.box.dim, m, true))
        total += std::exp2(-static_cast<double>(nu) * s) *
                 detail::holder_seminorm(finite_difference(a, g), sigma, detail::holder_margin);
    return total;
}

/// Classical (integer) scaled C^K norm of a(2^{-nu} .), same chain-rule trick.
inline double holder_norm_scaled_ck(const GridFunction& a, int nu, int K) {
    if (K < 0) throw std::invalid_argument("holder_norm_scaled_ck: K must be >= 0");
    if (K > 4) throw std::invalid_argument("holder_norm_scaled_ck: derivative order exceeds budget");
    double total = 0.0;
    for (const auto& g : detail::multi_indices(a.box.dim, K, false))
        total += std::exp2(-static_cast<double>(nu * (g[0] + g[1]))) *
                 detail::interior_sup(finite_difference(a, g), detail::holder_margin);
    return total;
}

enum class AtomKind { smooth, nonsmooth };

/// An atom candidate: grid values, the anchoring dyadic cube (side <= 1), and
/// the declared regularity/moment parameters.
struct Atom {
    DyadicCube cube;
    GridFunction values;
    double K = 0.0;
    double L = 0.0;
    AtomKind kind = AtomKind::smooth;

    int level() const { return cube.j; }
};

namespace detail {

inline bool in_three_q(const DyadicCube& Q, double x, double y, double slack) {
    const double ext = 1.5 * Q.side() + slack;
    if (std::abs(x - Q.center_x()) > ext) return false;
    if (Q.dim == 2 && std::abs(y - Q.center_y()) > ext) return false;
    return true;
}

}  // namespace detail

/// Bump-based smooth atom on 3Q: moment conditions of order < L are realized
/// exactly (in box quadrature) by applying L first-order central differences
/// along the first axis to a compactly supported profile -- the difference of
/// x^g with g < L telescopes to zero under summation by parts. Each
/// application widens the support by one sample, absorbed by the margin. The
/// output is normalized so the scaled C^K norm equals 1 exactly.
inline Atom make_smooth_atom(const Box& box, const DyadicCube& Q, int K, int L,
                             std::uint64_t shapeSeed) {
    if (Q.j < 0) throw std::invalid_argument("make_smooth_atom: cube side must be <= 1");
    if (K < 0 || L < 0 || K > 4) throw std::invalid_argument("make_smooth_atom: bad (K, L)");
    const double h = box.spacing();
    const double side = Q.side();
    if (3.0 * side / h < 16.0 - 1e-12)
        throw std::invalid_argument("make_smooth_atom: 3Q needs >= 16 samples per side");
    const double margin = static_cast<double>(L + 4) * h;
    const double R = 1.5 * side - margin;
    if (R < 4.0 * h) throw std::invalid_argument("make_smooth_atom: 3Q under-resolved");
    const double cx = Q.center_x(), cy = Q.center_y();
    if (cx - 1.5 * side < -box.half_width + margin ||
        cx + 1.5 * side > box.half_width - margin ||
        (box.dim == 2 && (cy - 1.5 * side < -box.half_width + margin ||
                          cy + 1.5 * side > box.half_width - margin)))
        throw std::invalid_argument("make_smooth_atom: 3Q leaves the box");

    std::mt19937_64 rng(shapeSeed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double omega = 1.0 + 2.0 * unif(rng);
    const double theta = 2.0 * pi * unif(rng);
    auto bump = [](double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; };
    GridFunction a = make_grid_function_real(
        [&](double x, double y) {
            const double tx = (x - cx) / R;
            const double ty = box.dim == 2 ? (y - cy) / R : 0.0;
            const double base = box.dim == 2 ? bump(tx) * bump(ty) : bump(tx);
            return base * (1.0 + 0.3 * std::sin(omega * pi * tx + theta));
        },
        box);
    if (Q.j >= 1)
        for (int l = 0; l < L; ++l) a = finite_difference(a, {1, 0});
    const double snorm = holder_norm_scaled_ck(a, Q.j, K);
    if (!(snorm > 0.0)) throw std::runtime_error("make_smooth_atom: degenerate profile");
    for (auto& v : a.values) v /= snorm;
    return Atom{Q, std::move(a), static_cast<double>(K), static_cast<double>(L),
                AtomKind::smooth};
}

struct AtomValidationReport {
    double support_leak = 0.0;  // max |a| outside 3Q relative to the peak
    bool support_ok = false;
    double scaled_norm = 0.0;  // ||a(2^{-nu} .) | C^K||
    bool norm_ok = false;
    double duality_c = 0.0;  // smallest c making the probe duality bound hold
    bool ok = false;
};

/// Checks the three non-smooth atom conditions: support in 3Q up to 1e-12
/// relative leakage, scaled Hoelder bound <= 1, and the duality bound
/// |int psi a| <= c 2^{-nu(L+n)} ||psi | C^L|| over the probe bank (reporting
/// the smallest c that works). Report-style: never throws on failure.
inline AtomValidationReport validate_nonsmooth_atom(const Atom& a, double K, double L,
                                                    const std::vector<GridFunction>& probes) {
    AtomValidationReport rep;
    const Box& b = a.values.box;
    const double peak = a.values.max_abs();
    double leak = 0.0;
    for (std::size_t i = 0; i < a.values.values.size(); ++i) {
        const double x = b.dim == 1 ? b.coord(i) : b.coord(i % b.n_axis);
        const double y = b.dim == 2 ? b.coord(i / b.n_axis) : 0.0;
        if (!detail::in_three_q(a.cube, x, y, 0.5 * b.spacing()))
            leak = std::max(leak, std::abs(a.values.values[i]));
    }
    rep.support_leak = peak > 0.0 ? leak / peak : 0.0;
    rep.support_ok = rep.support_leak <= 1e-12;
    rep.scaled_norm = holder_norm_scaled(a.values, a.cube.j, K);
    rep.norm_ok = rep.scaled_norm <= 1.0 + 1e-6;
    const double n = static_cast<double>(b.dim);
    const double decay = std::exp2(-static_cast<double>(a.cube.j) * (L + n));
    for (const auto& psi : probes) {
        const double hn = holder_norm(psi, L);
        if (!(hn > 0.0)) continue;
        const double val = std::abs(integrate(psi * a.values));
        rep.duality_c = std::max(rep.duality_c, val / (decay * hn));
    }
    rep.ok = rep.support_ok && rep.norm_ok;
    return rep;
}

/// Fixed 12-probe bank for the duality condition: polynomials through degree
/// ceil(L) (in the normalized variable x/L_box), modulated gaussians, a chirp,
/// and seeded Weierstrass-type partial sums of regularity just above L.
inline std::vector<GridFunction> make_probe_bank(const Box& box, double L) {
    std::vector<GridFunction> bank;
    auto push = [&](auto&& fn) { bank.push_back(make_grid_function_real(fn, box)); };
    const double Lb = box.half_width;
    const int maxdeg = std::min(3, static_cast<int>(std::ceil(L)));
    for (int d = 0; d <= maxdeg; ++d)
        push([d, Lb](double x, double y) {
            return std::pow(x / Lb, d) * (d >= 2 ? 1.0 + 0.2 * y / Lb : 1.0);
        });
    const int gaussians = 12 - (maxdeg + 1) - 1 - 3;  // fill to exactly 12 probes
    for (int i = 0; i < gaussians; ++i) {
        const double xi = std::exp2(i);
        push([xi](double x, double y) {
            return std::cos(xi * x) * std::exp(-0.2 * (x * x + y * y));
        });
    }
    push([](double x, double y) { return std::sin(x * x) * std::exp(-0.1 * (x * x + y * y)); });
    const double reg = L + 0.1;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 2.0 * pi);
        std::array<double, 9> phases{};
        for (auto& ph : phases) ph = unif(rng);
        push([phases, reg](double x, double y) {
            double s = 0.0;
            for (int k = 0; k < 9; ++k)
                s += std::exp2(-k * reg) * std::cos(std::exp2(k) * (x + 0.5 * y) + phases[k]);
            return s;
        });
    }
    while (bank.size() > 12) bank.pop_back();
    return bank;
}

/// Finitely supported coefficient sequence over the cubes with side <= 1.
struct CoefficientSequence {
    std::map<std::array<long, 3>, cplx> entries;  // key (j, kx, ky)

    static std::array<long, 3> key(const DyadicCube& Q) { return {Q.j, Q.kx, Q.ky}; }

    void set(const DyadicCube& Q, cplx v) {
        if (Q.j < 0)
            throw std::invalid_argument("CoefficientSequence: cube side must be <= 1");
        if (v == cplx(0.0, 0.0))
            entries.erase(key(Q));
        else
            entries[key(Q)] = v;
    }

    cplx get(const DyadicCube& Q) const {
        auto it = entries.find(key(Q));
        return it == entries.end() ? cplx(0.0, 0.0) : it->second;
    }

    int max_level() const {
        int m = 0;
        for (const auto& [k, v] : entries) m = std::max(m, static_cast<int>(k[0]));
        return m;
    }
};

/// Level functions g_nu = sum_m w_nu(x_Q) |t_Q| chi_Q with the weight taken at
/// the cube corner; cube membership uses the cell-center convention shared
/// with the dyadic cube scans.
inline FunctionSequence sequence_levels(const CoefficientSequence& t, const WeightSequence& w,
                                        const Box& box, std::size_t J) {
    std::vector<GridFunction> lv(J + 1, GridFunction(box));
    const double h2 = 0.5 * box.spacing();
    for (const auto& [k, v] : t.entries) {
        const DyadicCube Q{box.dim, static_cast<int>(k[0]), k[1], k[2]};
        if (static_cast<std::size_t>(Q.j) > J)
            throw std::invalid_argument("sequence_levels: coefficient level above truncation");
        const double wq = value_at_point(w.levels[static_cast<std::size_t>(Q.j)], Q.corner_x(),
                                         Q.corner_y());
        auto& g = lv[static_cast<std::size_t>(Q.j)];
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            const double x = box.dim == 1 ? box.coord(i) : box.coord(i % box.n_axis);
            const double y = box.dim == 2 ? box.coord(i / box.n_axis) : 0.0;
            if (Q.contains(x + h2, box.dim == 2 ? y + h2 : 0.0))
                g.values[i] += wq * std::abs(v);
        }
    }
    return FunctionSequence(std::move(lv));
}

/// Sequence-space quasi-norm: the b-space (family B) or f-space (family F)
/// phi-norm of the level functions.
inline double sequence_norm(const CoefficientSequence& t, const SpaceParams& sp) {
    if (static_cast<std::size_t>(t.max_level()) > sp.J)
        throw std::invalid_argument("sequence_norm: coefficient level above truncation");
    return phi_norm(sequence_levels(t, sp.w, sp.box(), sp.J), sp);
}

using AtomBank = std::map<std::array<long, 3>, Atom>;

/// Lower regularity thresholds on (K, L) for synthesis in the given space.
inline std::pair<double, double> synthesis_thresholds(const SpaceParams& sp) {
    const double n = static_cast<double>(sp.box().dim);
    const double Kmin = sp.w.alpha2 + sp.log2_c1_tilde();
    const double mn = sp.family == SpaceFamily::B ? std::min(1.0, sp.p.p_minus)
                                                  : std::min({1.0, sp.p.p_minus, sp.q.p_minus});
    return {Kmin, n / mn - n - sp.w.alpha1};
}

/// f = sum_Q t_Q a_Q over the coefficient support; every atom must meet the
/// declared (K, L) thresholds of the space.
inline GridFunction synthesize(const CoefficientSequence& t, const AtomBank& bank,
                               const SpaceParams& sp) {
    const auto [Kmin, Lmin] = synthesis_thresholds(sp);
    GridFunction f(sp.box());
    for (const auto& [k, v] : t.entries) {
        auto it = bank.find(k);
        if (it == bank.end())
            throw std::invalid_argument("synthesize: missing atom for cube level " +
                                        std::to_string(k[0]) + ", k = " + std::to_string(k[1]));
        const Atom& a = it->second;
        if (!(a.K > Kmin) || !(a.L > Lmin))
            throw std::invalid_argument(
                "synthesize: atom regularity (K, L) = (" + std::to_string(a.K) + ", " +
                std::to_string(a.L) + ") below the thresholds (" + std::to_string(Kmin) + ", " +
                std::to_string(Lmin) + ")");
        if (!(a.values.box == f.box)) throw std::invalid_argument("synthesize: box mismatch");
        for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += v * a.values.values[i];
    }
    return f;
}

/// Heuristic inverse: local-mean samples at cube corners, t_Q = (k_nu * f)(x_Q).
/// Diagnostic plumbing only -- no norm assertions are tied to it.
inline CoefficientSequence extract_coefficients(const GridFunction& f, const LocalMeansPair& lm,
                                                int J) {
    const Box& b = f.box;
    if (J < 0 || std::ldexp(1.0, -J) < 4.0 * b.spacing())
        throw std::invalid_argument("extract_coefficients: level J under-resolved");
    CoefficientSequence t;
    for (int nu = 0; nu <= J; ++nu) {
        GridFunction conv = lm.conv_level(f, nu);
        const double scale = std::ldexp(1.0, nu);
        const long klo = static_cast<long>(std::floor(-b.half_width * scale));
        const long khi = static_cast<long>(std::ceil(b.half_width * scale)) - 1;
        auto sample_index = [&](double x) {
            return static_cast<std::size_t>(std::llround((x + b.half_width) / b.spacing()));
        };
        for (long kx = klo; kx <= khi; ++kx) {
            const double x = static_cast<double>(kx) / scale;
            if (b.dim == 1) {
                t.set(DyadicCube{1, nu, kx, 0}, conv.values[sample_index(x)]);
            } else {
                for (long ky = klo; ky <= khi; ++ky) {
                    const double y = static_cast<double>(ky) / scale;
                    t.set(DyadicCube{2, nu, kx, ky},
                          conv.values[b.index(sample_index(x), sample_index(y))]);
                }
            }
        }
    }
    return t;
}

struct KernelAtomRow {
    int j = 0;
    double sup_field = 0.0;
    double decay_c = 0.0;        // sup / (2^{-(j-nu)K} or 2^{-(nu-j)(L+n)})
    double support_dilate = 0.0;  // smallest c with field inside c Q (resp. c 2^{nu-j} Q)
};

/// Convolution fields k_j * a_Q against the local means with d = 3: for each
/// j, the fitted decay constant and the fitted concentric support dilate
/// (relative to Q for j >= nu and to 2^{nu-j} Q for j < nu).
inline std::vector<KernelAtomRow> kernel_atom_estimates(const LocalMeansPair& lm, const Atom& a,
                                                        int jlo, int jhi) {
    if (std::abs(lm.d - 3.0) > 1e-12)
        throw std::invalid_argument("kernel_atom_estimates: requires local means with d = 3");
    if (jlo < 0 || jlo > jhi) throw std::invalid_argument("kernel_atom_estimates: bad j range");
    const Box& b = a.values.box;
    const int nu = a.cube.j;
    const double n = static_cast<double>(b.dim);

    // Level kernels by lag-scaled differencing: subsampling the differenced
    // kernel would squeeze its stencil below the grid and lose the vanishing
    // moments to quadrature error, flooring the decay. Differencing the
    // dilated bump instead keeps every moment cancellation exact. The lag
    // grows with the level, so the differenced amplitude is not a clean
    // 2^{2Mj} multiple of the fixed-lag kernel; each level is normalized to
    // the canonical amplitude ||k_j||_inf = 2^{jn} ||k||_inf instead.
    auto level_kernel = [&](int j) {
        if (j == 0) return lm.k;
        GridFunction kj = KernelPair::spatial_dilate(lm.k0, j);
        for (int m = 0; m < lm.M; ++m) {
            GridFunction lap = finite_difference(kj, {2, 0});
            if (b.dim == 2) lap = lap + finite_difference(kj, {0, 2});
            kj = std::move(lap);
        }
        const double scale = std::exp2(n * j) * lm.k.max_abs() / kj.max_abs();
        for (auto& v : kj.values) v *= scale;
        return kj;
    };

    std::vector<KernelAtomRow> rows;
    for (int j = jlo; j <= jhi; ++j) {
        GridFunction field = convolve(level_kernel(j), a.values);
        KernelAtomRow row;
        row.j = j;
        row.sup_field = field.max_abs();
        const double decay = j >= nu ? std::exp2(-static_cast<double>(j - nu) * a.K)
                                     : std::exp2(-static_cast<double>(nu - j) * (a.L + n));
        row.decay_c = row.sup_field / decay;
        const double ell = a.cube.side() * (j >= nu ? 1.0 : std::exp2(nu - j));
        const double thr = 1e-10 * row.sup_field;
        double dil = 0.0;
        for (std::size_t i = 0; i < field.values.size(); ++i) {
            if (std::abs(field.values[i]) <= thr) continue;
            const double x = b.dim == 1 ? b.coord(i) : b.coord(i % b.n_axis);
            const double y = b.dim == 2 ? b.coord(i / b.n_axis) : 0.0;
            double dist = std::abs(x - a.cube.center_x());
            if (b.dim == 2) dist = std::max(dist, std::abs(y - a.cube.center_y()));
            dil = std::max(dil, 2.0 * dist / ell);
        }
        row.support_dilate = dil;
        rows.push_back(row);
    }
    return rows;
}

struct MultiplierReport {
    double threshold = 0.0;
    double holder = 0.0;
    double norm_f = 0.0;
    double norm_product = 0.0;
    double ratio = 0.0;  // ||phi f|| / (||phi | C^rho|| ||f||)
};

/// Pointwise multiplier experiment: the quasi-norm ratio of phi * f against
/// the Hoelder-norm bound, with the family threshold on rho enforced.
inline MultiplierReport multiplier_test(const GridFunction& phim, double rho,
                                        const GridFunction& f, const SpaceParams& sp,
                                        const LevelConvolver& conv) {
    const double n = static_cast<double>(sp.box().dim);
    const double mn = sp.family == SpaceFamily::B ? std::min(1.0, sp.p.p_minus)
                                                  : std::min({1.0, sp.p.p_minus, sp.q.p_minus});
    MultiplierReport rep;
    rep.threshold = std::max({sp.w.alpha2, sp.w.alpha2 + sp.log2_c1_tilde(),
                              n / mn - n - sp.w.alpha1});
    if (!(rho > rep.threshold))
        throw std::invalid_argument("multiplier_test: rho = " + std::to_string(rho) +
                                    " below the threshold " + std::to_string(rep.threshold));
    rep.holder = holder_norm(phim, rho);
    rep.norm_f = phi_norm(weighted_levels(f, sp, conv), sp);
    rep.norm_product = phi_norm(weighted_levels(phim * f, sp, conv), sp);
    rep.ratio = rep.holder > 0.0 && rep.norm_f > 0.0
                    ? rep.norm_product / (rep.holder * rep.norm_f)
                    : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// JSON serialization: atom banks, coefficient sets, validator reports.
// ---------------------------------------------------------------------------

inline nlohmann::json cube_to_json(const DyadicCube& Q) {
    return {{"j", Q.j}, {"kx", Q.kx}, {"ky", Q.ky}};
}

inline DyadicCube cube_from_json(const nlohmann::json& j, int dim) {
    return DyadicCube{dim, j.at("j").get<int>(), j.at("kx").get<long>(), j.at("ky").get<long>()};
}

inline nlohmann::json atom_to_json(const Atom& a) {
    nlohmann::json j;
    j["cube"] = cube_to_json(a.cube);
    j["kind"] = a.kind == AtomKind::smooth ? "smooth" : "nonsmooth";
    j["K"] = a.K;
    j["L"] = a.L;
    std::vector<double> re, im;
    re.reserve(a.values.values.size());
    im.reserve(a.values.values.size());
    for (const auto& v : a.values.values) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

inline void save_atom_bank(const std::string& path, const Box& box,
                           const std::vector<Atom>& atoms) {
    nlohmann::json j;
    j["box"] = {{"dim", box.dim}, {"half_width", box.half_width}, {"n_axis", box.n_axis}};
    j["atoms"] = nlohmann::json::array();
    for (const auto& a : atoms) j["atoms"].push_back(atom_to_json(a));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_atom_bank: cannot open " + path);
    out << j.dump(1) << "\n";
}

inline std::vector<Atom> load_atom_bank(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_atom_bank: cannot open " + path);
    nlohmann::json j;
    in >> j;
    const Box box(j.at("box").at("dim").get<int>(), j.at("box").at("half_width").get<double>(),
                  j.at("box").at("n_axis").get<std::size_t>());
    std::vector<Atom> atoms;
    for (const auto& ja : j.at("atoms")) {
        Atom a;
        a.cube = cube_from_json(ja.at("cube"), box.dim);
        a.kind = ja.at("kind").get<std::string>() == "smooth" ? AtomKind::smooth
                                                              : AtomKind::nonsmooth;
        a.K = ja.at("K").get<double>();
        a.L = ja.at("L").get<double>();
        const auto re = ja.at("re").get<std::vector<double>>();
        const auto im = ja.at("im").get<std::vector<double>>();
        if (re.size() != box.size() || im.size() != box.size())
            throw std::runtime_error("load_atom_bank: value size mismatch");
        a.values = GridFunction(box);
        for (std::size_t i = 0; i < re.size(); ++i) a.values.values[i] = cplx(re[i], im[i]);
        atoms.push_back(std::move(a));
    }
    return atoms;
}

inline void save_coefficients(const std::string& path, const CoefficientSequence& t) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [k, v] : t.entries)
        j.push_back({{"j", k[0]}, {"kx", k[1]}, {"ky", k[2]}, {"re", v.real()}, {"im", v.imag()}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_coefficients: cannot open " + path);
    out << j.dump(1) << "\n";
}

inline CoefficientSequence load_coefficients(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_coefficients: cannot open " + path);
    nlohmann::json j;
    in >> j;
    CoefficientSequence t;
    for (const auto& e : j)
        t.set(DyadicCube{dim, e.at("j").get<int>(), e.at("kx").get<long>(),
                         e.at("ky").get<long>()},
              cplx(e.at("re").get<double>(), e.at("im").get<double>()));
    return t;
}

inline nlohmann::json validation_to_json(const AtomValidationReport& r) {
    return {{"support_leak", r.support_leak}, {"support_ok", r.support_ok},
            {"scaled_norm", r.scaled_norm},   {"norm_ok", r.norm_ok},
            {"duality_c", r.duality_c},       {"ok", r.ok}};
}

}  // namespace varexp
