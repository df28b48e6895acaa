#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "varexp/grid.hpp"

namespace varexp {

namespace detail {

inline double bump_B(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between.
inline double smooth_step(double t) {
    const double a = bump_B(t), b = bump_B(1.0 - t);
    return a / (a + b);
}

/// Radial cutoff: 1 on [0, r0], 0 on [r1, inf), smooth in between.
inline double radial_cutoff(double u, double r0, double r1) {
    if (u <= r0) return 1.0;
    if (u >= r1) return 0.0;
    return smooth_step((r1 - u) / (r1 - r0));
}

inline double freq_radius(const Box& box, std::size_t idx) {
    const std::size_t N = box.n_axis;
    const long half = static_cast<long>(N) / 2;
    if (box.dim == 1) return std::abs(box.freq(static_cast<long>(idx) - half));
    const long mx = static_cast<long>(idx % N) - half;
    const long my = static_cast<long>(idx / N) - half;
    return std::hypot(box.freq(mx), box.freq(my));
}

/// Inverse transform of an analytic radial spectral profile.
inline GridFunction from_radial_profile(const Box& box,
                                        const std::function<double(double)>& hat) {
    std::vector<cplx> spec(box.size());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = cplx(hat(freq_radius(box, i)), 0.0);
    return from_spectrum(box, spec);
}

}  // namespace detail

/// Analysis pair (psi0, psi) with dilates psi_j(x) = 2^{jn} psi(2^j x) handled
/// spectrally through the stored radial profiles (band-limited pairs only).
struct KernelPair {
    GridFunction psi0, psi;
    std::function<double(double)> hat0, hat;  // radial spectral profiles
    int moment_order = 0;
    double tauberian_eps = 0.0;
    double tauberian_k = 0.0;

    /// psi_j * f (psi_0 * f for j = 0) as a spectral product with the exact
    /// dilated profile hat(2^{-j} |xi|).
    GridFunction conv_level(const GridFunction& f, int j) const {
        if (j < 0) throw std::invalid_argument("KernelPair::conv_level: j >= 0");
        const double scale = std::ldexp(1.0, -j);
        auto spec = spectrum(f);
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const double u = detail::freq_radius(f.box, i);
            spec[i] *= j == 0 ? hat0(u) : hat(scale * u);
        }
        return from_spectrum(f.box, spec);
    }

    /// Spatial samples of the level-j dilate 2^{jn} psi(2^j x).
    GridFunction dilate_level(int j) const {
        if (j == 0) return psi0;
        return spatial_dilate(psi, j);
    }

    /// 2^{jn} g(2^j x) on the grid: exact index remap, zero beyond the box
    /// (appropriate for decaying kernels; no periodic wrap).
    static GridFunction spatial_dilate(const GridFunction& g, int j) {
        const Box& b = g.box;
        GridFunction out(b);
        const long N = static_cast<long>(b.n_axis);
        const long half = N / 2;
        const long factor = 1L << j;
        const double amp = std::pow(2.0, j * b.dim);
        const long rows = b.dim == 2 ? N : 1;
        for (long iy = 0; iy < rows; ++iy) {
            const long sy = b.dim == 2 ? (iy - half) * factor + half : 0;
            const bool oky = b.dim == 1 || (sy >= 0 && sy < N);
            for (long ix = 0; ix < N; ++ix) {
                const long sx = (ix - half) * factor + half;
                if (!oky || sx < 0 || sx >= N) continue;
                out.values[b.index(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy))] =
                    amp * g.values[b.index(static_cast<std::size_t>(sx),
                                           static_cast<std::size_t>(sy))];
            }
        }
        return out;
    }
};

/// Smooth dyadic pair: hat0 = 1 on |xi| <= 1.1, supported in |xi| < 1.9;
/// hat(xi) = hat0(xi) - hat0(2 xi), supported in 0.55 < |xi| < 1.9 and
/// telescoping exactly. Satisfies the Tauberian conditions with
/// eps = 6/5 and k = 25/18 (k * eps = 5/3).
inline KernelPair make_admissible_pair(const Box& box) {
    // the dyadic annulus 1/2 <= |xi| <= 2 must carry enough modes
    std::size_t modes = 0;
    for (std::size_t i = 0; i < box.size(); ++i) {
        const double u = detail::freq_radius(box, i);
        if (u >= 0.5 && u <= 2.0) ++modes;
    }
    if (modes < 8)
        throw std::invalid_argument("make_admissible_pair: annulus 1/2<=|xi|<=2 under-resolved");

    KernelPair pair;
    pair.hat0 = [](double u) { return detail::radial_cutoff(u, 1.1, 1.9); };
    pair.hat = [h0 = pair.hat0](double u) { return h0(u) - h0(2.0 * u); };
    pair.psi0 = detail::from_radial_profile(box, pair.hat0);
    pair.psi = detail::from_radial_profile(box, pair.hat);
    pair.moment_order = 6;  // hat vanishes identically near 0
    pair.tauberian_eps = 1.2;
    pair.tauberian_k = 25.0 / 18.0;

    for (std::size_t i = 0; i < box.size(); ++i) {
        const double u = detail::freq_radius(box, i);
        if (u <= 5.0 / 3.0 && !(pair.hat0(u) > 0.0))
            throw std::runtime_error("make_admissible_pair: hat0 not positive on |xi|<=5/3");
        if (u >= 0.6 && u <= 5.0 / 3.0 && !(std::abs(pair.hat(u)) > 0.0))
            throw std::runtime_error("make_admissible_pair: hat not positive on the annulus");
    }
    return pair;
}

/// eta_{nu,R}(x) = 2^{n nu} / (1 + 2^nu |x|)^R.
inline GridFunction eta(int nu, double R, const Box& box) {
    if (!(R > 0.0)) throw std::invalid_argument("eta: R > 0 required");
    const double amp = std::pow(2.0, nu * box.dim);
    const double scale = std::ldexp(1.0, nu);
    return make_grid_function_real(
        [&](double x, double y) {
            const double r = box.dim == 1 ? std::abs(x) : std::hypot(x, y);
            return amp / std::pow(1.0 + scale * r, R);
        },
        box);
}

/// Local means k = Delta^M k0 with k0 a smooth bump supported in d*Q_{0,0}.
struct LocalMeansPair {
    GridFunction k0, k;
    double d = 1.0;
    int N = 0;
    int M = 0;
    double eps = 0.0;  // scanned spectral annulus with k-hat nonvanishing

    GridFunction conv_level(const GridFunction& f, int j) const {
        const GridFunction kernel =
            j == 0 ? k0 : KernelPair::spatial_dilate(k, j);  // exact: compact support
        return convolve(kernel, f);
    }
};

inline LocalMeansPair make_local_means(double d, int N, const Box& box) {
    if (!(d > 0.0) || N < 0) throw std::invalid_argument("make_local_means: need d > 0, N >= 0");
    if (d / box.spacing() < 32.0)
        throw std::invalid_argument("make_local_means: support under-resolved (< 32 samples)");
    if (d > box.half_width)
        throw std::invalid_argument("make_local_means: support exceeds the box");

    LocalMeansPair lm;
    lm.d = d;
    lm.N = N;
    lm.M = (N + 1) / 2;

    // product bump strictly inside (0, d)^n, unit mass; the margin leaves room
    // for the Laplacian stencils so the support never leaks out of d*Q_{0,0}
    const double margin = (2.0 * lm.M + 2.0) * box.spacing();
    const double c = 0.5 * d, r = 0.5 * d - margin;
    if (!(r > 8.0 * box.spacing()))
        throw std::invalid_argument("make_local_means: support under-resolved after margins");
    auto profile = [c, r](double t) {
        const double u = (t - c) / r;
        return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
    };
    lm.k0 = make_grid_function_real(
        [&](double x, double y) {
            return box.dim == 1 ? profile(x) : profile(x) * profile(y);
        },
        box);
    const double mass = integrate(lm.k0).real();
    for (auto& v : lm.k0.values) v /= mass;

    // Delta^M by repeated central differences: the discrete Laplacian maps
    // x^gamma to a polynomial of degree gamma - 2, so all moments of order
    // < 2M are annihilated exactly, and the support widens by one sample per
    // application (absorbed by the margin above)
    lm.k = lm.k0;
    for (int m = 0; m < lm.M; ++m) {
        GridFunction lap = finite_difference(lm.k, {2, 0});
        if (box.dim == 2) lap = lap + finite_difference(lm.k, {0, 2});
        lm.k = lap;
    }

    // scan the smallest spectral zero of k-hat: eps is the largest sampled
    // radius such that |k-hat| > 1e-6 on all grid modes with 0 < |xi| <= eps
    auto kspec = spectrum(lm.k);
    std::vector<std::pair<double, double>> radial;  // (|xi|, |k-hat|)
    for (std::size_t i = 0; i < kspec.size(); ++i)
        radial.emplace_back(detail::freq_radius(box, i), std::abs(kspec[i]));
    std::sort(radial.begin(), radial.end());
    double epsmax = 0.0;
    for (const auto& [u, mag] : radial) {
        if (u == 0.0) continue;
        if (mag <= 1e-6) break;
        epsmax = u;
    }
    lm.eps = epsmax;
    return lm;
}

/// max over |gamma| < R of |integral of x^gamma psi(x) dx| on the box.
inline double check_moments(const GridFunction& psi, int R) {
    double worst = 0.0;
    auto moment_1d = [&](int gx, int gy) {
        GridFunction g = psi;
        const Box& b = psi.box;
        for (std::size_t iy = 0; iy < (b.dim == 2 ? b.n_axis : 1); ++iy)
            for (std::size_t ix = 0; ix < b.n_axis; ++ix) {
                double m = std::pow(b.coord(ix), gx);
                if (b.dim == 2) m *= std::pow(b.coord(iy), gy);
                g.values[b.index(ix, iy)] *= m;
            }
        return std::abs(integrate(g));
    };
    for (int gx = 0; gx < R; ++gx) {
        if (psi.box.dim == 1) {
            worst = std::max(worst, moment_1d(gx, 0));
        } else {
            for (int gy = 0; gx + gy < R; ++gy) worst = std::max(worst, moment_1d(gx, gy));
        }
    }
    return worst;
}

/// Tauberian conditions on the sampled spectrum: |psi0-hat| > 1e-8 on
/// |xi| <= k*eps and |psi-hat| > 1e-8 on eps/2 <= |xi| <= k*eps.
inline bool check_tauberian(const GridFunction& psi0, const GridFunction& psi, double eps,
                            double k) {
    if (!(k > 1.0) || !(k <= 2.0))
        throw std::invalid_argument("check_tauberian: k must lie in (1, 2]");
    const auto s0 = spectrum(psi0);
    const auto s = spectrum(psi);
    const double thresh = 1e-8;
    for (std::size_t i = 0; i < s0.size(); ++i) {
        const double u = detail::freq_radius(psi0.box, i);
        if (u <= k * eps && std::abs(s0[i]) <= thresh) return false;
        if (u >= 0.5 * eps && u <= k * eps && std::abs(s[i]) <= thresh) return false;
    }
    return true;
}

/// Peetre maximal function of a precomputed level convolution g = psi_j * f:
/// sup over grid y of |g(y)| / (1 + 2^j |x - y|)^a.
inline GridFunction peetre_maximal_from_conv(const GridFunction& g, int j, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("peetre_maximal: a > 0 required");
    const Box& b = g.box;
    if ((b.dim == 1 && b.n_axis > 4096) || (b.dim == 2 && b.n_axis > 64))
        throw std::invalid_argument("peetre_maximal: grid exceeds the direct-sup budget");
    const double scale = std::ldexp(1.0, j);
    GridFunction out(b);
    const std::size_t rows = b.dim == 2 ? b.n_axis : 1;
    std::vector<double> mag(b.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(g.values[i]);
    for (std::size_t iy = 0; iy < rows; ++iy)
        for (std::size_t ix = 0; ix < b.n_axis; ++ix) {
            const double x = b.coord(ix), y = b.dim == 2 ? b.coord(iy) : 0.0;
            double best = 0.0;
            for (std::size_t jy = 0; jy < rows; ++jy)
                for (std::size_t jx = 0; jx < b.n_axis; ++jx) {
                    const double dx = x - b.coord(jx);
                    const double dy = b.dim == 2 ? y - b.coord(jy) : 0.0;
                    const double dist = b.dim == 1 ? std::abs(dx) : std::hypot(dx, dy);
                    best = std::max(best,
                                    mag[b.index(jx, jy)] / std::pow(1.0 + scale * dist, a));
                }
            out.values[b.index(ix, iy)] = cplx(best, 0.0);
        }
    return out;
}

/// Peetre maximal with the level kernel formed by exact spatial dilation.
inline GridFunction peetre_maximal(const GridFunction& f, const GridFunction& psi, int j,
                                   double a) {
    const GridFunction kernel = j == 0 ? psi : KernelPair::spatial_dilate(psi, j);
    return peetre_maximal_from_conv(convolve(kernel, f), j, a);
}

}  // namespace varexp
