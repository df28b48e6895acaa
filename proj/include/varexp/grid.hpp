#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "varexp/fft.hpp"

namespace varexp {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Uniform periodic grid on [-L, L)^n with N samples per axis, N a power of two.
struct Box {
    int dim = 1;               // n in {1, 2}
    double half_width = 1.0;   // L
    std::size_t n_axis = 8;    // N, power of two

    Box() = default;
    Box(int n, double L, std::size_t N) : dim(n), half_width(L), n_axis(N) {
        if (n != 1 && n != 2) throw std::invalid_argument("Box: dimension must be 1 or 2");
        if (!(L > 0.0)) throw std::invalid_argument("Box: half-width must be positive");
        if (N < 8 || !fft::is_power_of_two(N))
            throw std::invalid_argument("Box: N must be a power of two with N >= 8");
    }

    double spacing() const { return 2.0 * half_width / static_cast<double>(n_axis); }
    std::size_t size() const { return dim == 1 ? n_axis : n_axis * n_axis; }
    double coord(std::size_t k) const { return -half_width + static_cast<double>(k) * spacing(); }
    /// Frequency of centered mode m in [-N/2, N/2).
    double freq(long m) const { return pi * static_cast<double>(m) / half_width; }
    double nyquist() const { return pi / spacing(); }

    std::size_t index(std::size_t ix, std::size_t iy = 0) const {
        return dim == 1 ? ix : iy * n_axis + ix;
    }

    bool operator==(const Box& o) const {
        return dim == o.dim && half_width == o.half_width && n_axis == o.n_axis;
    }
};

/// Complex samples on a Box; values are immutable by convention once built
/// (all operations return fresh objects).
struct GridFunction {
    Box box;
    std::vector<cplx> values;

    GridFunction() = default;
    explicit GridFunction(const Box& b, cplx fill = cplx(0.0, 0.0))
        : box(b), values(b.size(), fill) {}
    GridFunction(const Box& b, std::vector<cplx> v) : box(b), values(std::move(v)) {
        if (values.size() != box.size()) throw std::invalid_argument("GridFunction: size mismatch");
    }

    cplx& at(std::size_t ix, std::size_t iy = 0) { return values[box.index(ix, iy)]; }
    cplx at(std::size_t ix, std::size_t iy = 0) const { return values[box.index(ix, iy)]; }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        for (const auto& v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    GridFunction map(const std::function<cplx(cplx)>& f) const {
        GridFunction out(box);
        for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = f(values[i]);
        return out;
    }

    GridFunction abs() const {
        return map([](cplx v) { return cplx(std::abs(v), 0.0); });
    }
};

inline void require_same_box(const GridFunction& f, const GridFunction& g, const char* what) {
    if (!(f.box == g.box)) throw std::invalid_argument(std::string(what) + ": box mismatch");
}

inline GridFunction operator+(const GridFunction& f, const GridFunction& g) {
    require_same_box(f, g, "operator+");
    GridFunction out(f.box);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f.values[i] + g.values[i];
    return out;
}

inline GridFunction operator-(const GridFunction& f, const GridFunction& g) {
    require_same_box(f, g, "operator-");
    GridFunction out(f.box);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f.values[i] - g.values[i];
    return out;
}

inline GridFunction operator*(cplx c, const GridFunction& f) {
    GridFunction out(f.box);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = c * f.values[i];
    return out;
}

inline GridFunction operator*(const GridFunction& f, const GridFunction& g) {
    require_same_box(f, g, "operator*");
    GridFunction out(f.box);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f.values[i] * g.values[i];
    return out;
}

/// Pointwise sampling. expr is called with (x, y); y is 0 in one dimension.
/// Throws if a sample is not finite, naming the offending coordinate.
inline GridFunction make_grid_function(const std::function<cplx(double, double)>& expr,
                                       const Box& box) {
    GridFunction out(box);
    const std::size_t rows = box.dim == 2 ? box.n_axis : 1;
    for (std::size_t iy = 0; iy < rows; ++iy) {
        const double y = box.dim == 2 ? box.coord(iy) : 0.0;
        for (std::size_t ix = 0; ix < box.n_axis; ++ix) {
            const double x = box.coord(ix);
            const cplx v = expr(x, y);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::domain_error("make_grid_function: non-finite sample at x=" +
                                        std::to_string(x) +
                                        (box.dim == 2 ? " y=" + std::to_string(y) : ""));
            out.at(ix, iy) = v;
        }
    }
    return out;
}

inline GridFunction make_grid_function_real(const std::function<double(double, double)>& expr,
                                            const Box& box) {
    return make_grid_function([&](double x, double y) { return cplx(expr(x, y), 0.0); }, box);
}

/// Discrete approximation of the Fourier transform f_hat(xi) = int f(x) e^{-i xi x} dx,
/// evaluated at the grid frequencies xi_m = pi m / L and stored with the centered
/// index m + N/2 per axis.
inline std::vector<cplx> spectrum(const GridFunction& f) {
    const std::size_t N = f.box.n_axis;
    const double hn = std::pow(f.box.spacing(), f.box.dim);
    std::vector<cplx> a = f.values;
    if (f.box.dim == 1)
        fft::forward(a);
    else
        fft::forward_2d(a, N);
    std::vector<cplx> out(a.size());
    const long half = static_cast<long>(N) / 2;
    if (f.box.dim == 1) {
        for (long i = 0; i < static_cast<long>(N); ++i) {
            const long m = i - half;
            const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
            out[static_cast<std::size_t>(i)] = sgn * hn * a[static_cast<std::size_t>((m + static_cast<long>(N)) % static_cast<long>(N))];
        }
    } else {
        for (long iy = 0; iy < static_cast<long>(N); ++iy) {
            const long my = iy - half;
            for (long ix = 0; ix < static_cast<long>(N); ++ix) {
                const long mx = ix - half;
                const double sgn = ((mx + my) % 2 == 0) ? 1.0 : -1.0;
                const std::size_t src =
                    static_cast<std::size_t>((my + static_cast<long>(N)) % static_cast<long>(N)) * N +
                    static_cast<std::size_t>((mx + static_cast<long>(N)) % static_cast<long>(N));
                out[static_cast<std::size_t>(iy) * N + static_cast<std::size_t>(ix)] = sgn * hn * a[src];
            }
        }
    }
    return out;
}

/// Inverse of spectrum(): rebuild samples from centered spectral coefficients.
inline GridFunction from_spectrum(const Box& box, const std::vector<cplx>& spec) {
    const std::size_t N = box.n_axis;
    if (spec.size() != box.size()) throw std::invalid_argument("from_spectrum: size mismatch");
    std::vector<cplx> a(spec.size());
    const long half = static_cast<long>(N) / 2;
    if (box.dim == 1) {
        for (long i = 0; i < static_cast<long>(N); ++i) {
            const long m = i - half;
            const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
            a[static_cast<std::size_t>((m + static_cast<long>(N)) % static_cast<long>(N))] =
                sgn * spec[static_cast<std::size_t>(i)];
        }
        fft::inverse(a);
    } else {
        for (long iy = 0; iy < static_cast<long>(N); ++iy) {
            const long my = iy - half;
            for (long ix = 0; ix < static_cast<long>(N); ++ix) {
                const long mx = ix - half;
                const double sgn = ((mx + my) % 2 == 0) ? 1.0 : -1.0;
                const std::size_t dst =
                    static_cast<std::size_t>((my + static_cast<long>(N)) % static_cast<long>(N)) * N +
                    static_cast<std::size_t>((mx + static_cast<long>(N)) % static_cast<long>(N));
                a[dst] = sgn * spec[static_cast<std::size_t>(iy) * N + static_cast<std::size_t>(ix)];
            }
        }
        fft::inverse_2d(a, N);
    }
    GridFunction out(box);
    const double hn = std::pow(box.spacing(), box.dim);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a[i] / hn;
    return out;
}

/// Periodic convolution scaled by the Riemann measure h^n:
/// (f*g)(x) ~ int f(y) g(x-y) dy with wraparound.
inline GridFunction convolve(const GridFunction& f, const GridFunction& g) {
    require_same_box(f, g, "convolve");
    auto sf = spectrum(f);
    const auto sg = spectrum(g);
    for (std::size_t i = 0; i < sf.size(); ++i) sf[i] *= sg[i];
    return from_spectrum(f.box, sf);
}

/// h^n * sum of samples; realizes int_{R^n} under periodic truncation.
inline cplx integrate(const GridFunction& f) {
    cplx s(0.0, 0.0);
    for (const auto& v : f.values) s += v;
    return s * std::pow(f.box.spacing(), f.box.dim);
}

namespace detail {

inline GridFunction diff_axis_order1(const GridFunction& f, int axis) {
    const std::size_t N = f.box.n_axis;
    const double inv2h = 1.0 / (2.0 * f.box.spacing());
    GridFunction out(f.box);
    const std::size_t rows = f.box.dim == 2 ? N : 1;
    for (std::size_t iy = 0; iy < rows; ++iy)
        for (std::size_t ix = 0; ix < N; ++ix) {
            std::size_t ip_x = ix, im_x = ix, ip_y = iy, im_y = iy;
            if (axis == 0) {
                ip_x = (ix + 1) % N;
                im_x = (ix + N - 1) % N;
            } else {
                ip_y = (iy + 1) % N;
                im_y = (iy + N - 1) % N;
            }
            out.at(ix, iy) = (f.at(ip_x, ip_y) - f.at(im_x, im_y)) * inv2h;
        }
    return out;
}

inline GridFunction diff_axis_order2(const GridFunction& f, int axis) {
    const std::size_t N = f.box.n_axis;
    const double invh2 = 1.0 / (f.box.spacing() * f.box.spacing());
    GridFunction out(f.box);
    const std::size_t rows = f.box.dim == 2 ? N : 1;
    for (std::size_t iy = 0; iy < rows; ++iy)
        for (std::size_t ix = 0; ix < N; ++ix) {
            std::size_t ip_x = ix, im_x = ix, ip_y = iy, im_y = iy;
            if (axis == 0) {
                ip_x = (ix + 1) % N;
                im_x = (ix + N - 1) % N;
            } else {
                ip_y = (iy + 1) % N;
                im_y = (iy + N - 1) % N;
            }
            out.at(ix, iy) = (f.at(ip_x, ip_y) - 2.0 * f.at(ix, iy) + f.at(im_x, im_y)) * invh2;
        }
    return out;
}

}  // namespace detail

/// Central finite differences for D^gamma, second order, periodic wrap.
/// Exact on polynomials of degree <= 2 per axis (away from the wrap seam).
inline GridFunction finite_difference(const GridFunction& f, const std::array<int, 2>& gamma) {
    const int total = gamma[0] + gamma[1];
    if (gamma[0] < 0 || gamma[1] < 0 || total > 4)
        throw std::invalid_argument("finite_difference: |gamma| must be <= 4");
    if (f.box.dim == 1 && gamma[1] != 0)
        throw std::invalid_argument("finite_difference: y-derivative on a 1d grid");
    GridFunction out = f;
    for (int axis = 0; axis < 2; ++axis) {
        int m = gamma[static_cast<std::size_t>(axis)];
        while (m >= 2) {
            out = detail::diff_axis_order2(out, axis);
            m -= 2;
        }
        if (m == 1) out = detail::diff_axis_order1(out, axis);
    }
    return out;
}

/// Seeded real-valued band-limited field: random spectrum supported on
/// |xi| <= xi_cut, normalized to unit sup norm. Deterministic per seed.
inline GridFunction random_band_limited(const Box& box, double xi_cut, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t N = box.n_axis;
    const long half = static_cast<long>(N) / 2;
    std::vector<cplx> spec(box.size(), cplx(0.0, 0.0));
    auto idx = [&](long mx, long my) {
        return box.dim == 1
                   ? static_cast<std::size_t>(mx + half)
                   : static_cast<std::size_t>(my + half) * N + static_cast<std::size_t>(mx + half);
    };
    const long rows = box.dim == 2 ? half : 0;
    for (long my = box.dim == 2 ? -rows : 0; my <= (box.dim == 2 ? rows - 1 : 0); ++my)
        for (long mx = -half; mx < half; ++mx) {
            const double xi = std::hypot(box.freq(mx), box.dim == 2 ? box.freq(my) : 0.0);
            if (xi > xi_cut) continue;
            spec[idx(mx, my)] = cplx(gauss(rng), gauss(rng));
        }
    // hermitian symmetrization makes the field real
    std::vector<cplx> sym(spec.size(), cplx(0.0, 0.0));
    for (long my = box.dim == 2 ? -half : 0; my <= (box.dim == 2 ? half - 1 : 0); ++my)
        for (long mx = -half; mx < half; ++mx) {
            const long cx = -mx, cy = -my;
            cplx conj_part(0.0, 0.0);
            if (cx >= -half && cx < half && cy >= -half && cy < half)
                conj_part = std::conj(spec[idx(cx, cy)]);
            sym[idx(mx, my)] = 0.5 * (spec[idx(mx, my)] + conj_part);
        }
    GridFunction out = from_spectrum(box, sym);
    for (auto& v : out.values) v = cplx(v.real(), 0.0);
    const double m = out.max_abs();
    if (m > 0.0)
        for (auto& v : out.values) v /= m;
    return out;
}

/// Flat binary layout: n, N as little-endian 64-bit unsigned, L as a 64-bit
/// double, then re/im doubles in row-major order.
inline void save_binary(const GridFunction& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_binary: cannot open " + path);
    const std::uint64_t n = static_cast<std::uint64_t>(f.box.dim);
    const std::uint64_t N = static_cast<std::uint64_t>(f.box.n_axis);
    const double L = f.box.half_width;
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(&N), 8);
    os.write(reinterpret_cast<const char*>(&L), 8);
    for (const auto& v : f.values) {
        const double re = v.real(), im = v.imag();
        os.write(reinterpret_cast<const char*>(&re), 8);
        os.write(reinterpret_cast<const char*>(&im), 8);
    }
}

inline GridFunction load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_binary: cannot open " + path);
    std::uint64_t n = 0, N = 0;
    double L = 0.0;
    is.read(reinterpret_cast<char*>(&n), 8);
    is.read(reinterpret_cast<char*>(&N), 8);
    is.read(reinterpret_cast<char*>(&L), 8);
    Box box(static_cast<int>(n), L, static_cast<std::size_t>(N));
    GridFunction f(box);
    for (auto& v : f.values) {
        double re = 0.0, im = 0.0;
        is.read(reinterpret_cast<char*>(&re), 8);
        is.read(reinterpret_cast<char*>(&im), 8);
        v = cplx(re, im);
    }
    if (!is) throw std::runtime_error("load_binary: truncated file " + path);
    return f;
}

inline void save_csv(const GridFunction& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_csv: cannot open " + path);
    os.precision(17);
    os << (f.box.dim == 1 ? "x,re,im\n" : "x,y,re,im\n");
    const std::size_t rows = f.box.dim == 2 ? f.box.n_axis : 1;
    for (std::size_t iy = 0; iy < rows; ++iy)
        for (std::size_t ix = 0; ix < f.box.n_axis; ++ix) {
            os << f.box.coord(ix);
            if (f.box.dim == 2) os << ',' << f.box.coord(iy);
            os << ',' << f.at(ix, iy).real() << ',' << f.at(ix, iy).imag() << '\n';
        }
}

}  // namespace varexp
