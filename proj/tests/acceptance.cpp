// Acceptance gate: one self-contained check per release criterion, each
// printed as a single PASS/FAIL line. The binary exits nonzero if any
// criterion fails. All checks are property-based at desk scale.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "varexp/scenario.hpp"

using namespace varexp;

namespace {

int g_failures = 0;

class Criterion {
    int idx_;
    std::string title_;
    std::chrono::steady_clock::time_point t0_;

public:
    bool ok = true;
    std::string detail;

    Criterion(int idx, std::string title)
        : idx_(idx), title_(std::move(title)), t0_(std::chrono::steady_clock::now()) {}

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

    void finish() {
        const double t = seconds();
        std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << idx_ << ": " << title_ << "  ["
                  << t << " s]";
        if (!detail.empty()) std::cout << "  -- " << detail;
        std::cout << std::endl;
        if (!ok) ++g_failures;
    }
};

template <typename Fn>
void run_criterion(int idx, const std::string& title, Fn&& body) {
    Criterion c(idx, title);
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail += std::string("exception: ") + e.what();
    }
    c.finish();
}

GridFunction random_field(const Box& b, std::uint64_t seed, double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    GridFunction f(b);
    for (auto& v : f.values) v = cplx(u(rng), 0.0);
    return f;
}

FunctionSequence random_sequence(const Box& b, std::size_t J, std::uint64_t seed) {
    std::vector<GridFunction> lv;
    for (std::size_t j = 0; j <= J; ++j)
        lv.push_back(random_field(b, seed + 31 * j, std::pow(2.0, -0.5 * static_cast<double>(j))));
    return FunctionSequence(std::move(lv));
}

FunctionSequence scale_sequence(const FunctionSequence& fs, double c) {
    FunctionSequence g = fs;
    for (auto& f : g.levels)
        for (auto& v : f.values) v *= c;
    return g;
}

// pointwise l_{q(x)} combination of the levels (bounded q only)
GridFunction pointwise_lq(const FunctionSequence& fs, const VariableExponent& q) {
    GridFunction out(fs.box());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double qq = q.at(i);
        double acc = 0.0;
        for (const auto& f : fs.levels) acc += std::pow(std::abs(f.values[i]), qq);
        out.values[i] = cplx(std::pow(acc, 1.0 / qq), 0.0);
    }
    return out;
}

SpaceParams preset_B(const Box& b) {
    auto p = VariableExponent::from_function(
        [](double x, double) { return 2.0 + std::sin(x) * std::sin(x); }, b);
    auto q = VariableExponent::constant(b, 2.0);
    auto s = VariableExponent::from_function(
        [](double x, double) { return 0.5 + 0.25 * std::sin(x); }, b);
    return make_space_params(p, q, make_weight_sequence_from_smoothness(s, 8),
                             SetFunction::power(1, 0.1), SpaceFamily::B);
}

SpaceParams preset_F(const Box& b) {
    auto p = VariableExponent::from_function(
        [](double x, double) { return 2.0 + std::sin(x) * std::sin(x); }, b);
    auto q = VariableExponent::from_function(
        [](double x, double) { return 1.5 + 0.5 * std::cos(x); }, b);
    auto s = VariableExponent::constant(b, 0.5);
    return make_space_params(p, q, make_weight_sequence_from_smoothness(s, 8),
                             SetFunction::power(1, 0.1), SpaceFamily::F);
}

SpaceParams atom_preset(const Box& b, SpaceFamily fam) {
    // p varies and q differs between the families so the two mixed-norm
    // orders produce genuinely distinct values
    auto p = VariableExponent::from_function(
        [](double x, double) { return 2.0 + std::sin(x) * std::sin(x); }, b);
    auto q = fam == SpaceFamily::B
                 ? VariableExponent::constant(b, 2.0)
                 : VariableExponent::from_function(
                       [](double x, double) { return 1.5 + 0.5 * std::cos(x); }, b);
    auto s = VariableExponent::constant(b, 0.5);
    return make_space_params(p, q, make_weight_sequence_from_smoothness(s, 8),
                             SetFunction::power(1, 0.1), fam);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

int main() {
    const auto wall0 = std::chrono::steady_clock::now();
    std::cout << "acceptance gate\n";

    // 1. Constant-exponent reduction of the Luxemburg norm.
    run_criterion(1, "luxemburg norm matches the closed-form L_p norm (p in {1,2,4})", [](Criterion& c) {
        const Box b(1, 2.0, 256);
        const auto E = RegionMask::full(b);
        const auto fam = canonical_family(b);
        c.require(fam.size() == 20, "family size != 20");
        double worst = 0.0;
        for (double pc : {1.0, 2.0, 4.0}) {
            auto p = VariableExponent::constant(b, pc);
            for (const auto& f : fam) {
                double direct = 0.0;
                for (const auto& v : f.values) direct += std::pow(std::abs(v), pc);
                direct = std::pow(b.spacing() * direct, 1.0 / pc);
                const double lux = luxemburg_norm(f, p, E);
                worst = std::max(worst, std::abs(lux - direct) / direct);
            }
        }
        c.require(worst <= 1e-6, "worst relative error " + fmt(worst) + " > 1e-6");
        c.require(c.seconds() < 5.0, "runtime over 5 s");
        c.detail = "worst rel err " + fmt(worst);
    });

    // 2. Two-piece exponent whose modular has an analytic root at 1.
    run_criterion(2, "two-piece exponent: quadratic-modular root is exactly 1", [](Criterion& c) {
        const Box b(1, 2.0, 256);
        const auto E = RegionMask::interval(b, 0.0, 1.0);
        auto p = VariableExponent::from_function(
            [](double x, double) { return x < 0.5 ? 2.0 : 4.0; }, b);
        auto one = make_grid_function_real([](double, double) { return 1.0; }, b);
        const double lam = luxemburg_norm(one, p, E);
        c.require(std::abs(lam - 1.0) <= 1e-9, "lambda = " + fmt(lam));
        c.detail = "|lambda - 1| = " + fmt(std::abs(lam - 1.0));
    });

    // 3. Unit-ball property of both mixed norms on 100 seeded sequences.
    run_criterion(3, "unit-ball property, both mixed norms, 100 sequences", [](Criterion& c) {
        const Box b(1, 1.0, 128);
        const auto E = RegionMask::full(b);
        auto p = VariableExponent::from_function(
            [](double x, double) { return 1.5 + 0.5 * std::cos(x); }, b);
        auto q = VariableExponent::from_function(
            [](double x, double) { return 2.0 + 0.5 * std::sin(2 * x); }, b);
        for (std::uint64_t s = 1; s <= 100 && c.ok; ++s) {
            auto fs = random_sequence(b, 3, 1000 + s);
            const double mu = norm_lq_Lp(fs, p, q, E);
            c.require(mu > 0.0, "degenerate norm");
            if (!c.ok) break;
            c.require(modular_lq_Lp(scale_sequence(fs, 1.0 / mu), p, q, E) <= 1.0 + 1e-8,
                      "lq(Lp) modular above 1 at the unit sphere (seed " + std::to_string(s) + ")");
            c.require(modular_lq_Lp(scale_sequence(fs, 1.001 / mu), p, q, E) >= 1.0 - 1e-8,
                      "lq(Lp) modular below 1 just outside (seed " + std::to_string(s) + ")");

            const double mu2 = norm_Lp_lq(fs, p, q, E);
            c.require(mu2 > 0.0, "degenerate Lp(lq) norm");
            if (!c.ok) break;
            auto g1 = pointwise_lq(scale_sequence(fs, 1.0 / mu2), q);
            auto g2 = pointwise_lq(scale_sequence(fs, 1.001 / mu2), q);
            c.require(modular(g1, p, E) <= 1.0 + 1e-8,
                      "Lp(lq) modular above 1 at the unit sphere (seed " + std::to_string(s) + ")");
            c.require(modular(g2, p, E) >= 1.0 - 1e-8,
                      "Lp(lq) modular below 1 just outside (seed " + std::to_string(s) + ")");
        }
    });

    // 4. r-power identities for the Lebesgue and mixed norms.
    run_criterion(4, "r-power identities (r in {1/2, 2}), 50 seeded inputs", [](Criterion& c) {
        const Box b(1, 1.0, 128);
        const auto E = RegionMask::full(b);
        auto p = VariableExponent::from_function(
            [](double x, double) { return 2.0 + std::sin(x) * std::sin(x); }, b);
        auto q = VariableExponent::from_function(
            [](double x, double) { return 1.5 + 0.5 * std::cos(2 * x); }, b);
        double worst = 0.0;
        for (std::uint64_t s = 1; s <= 50; ++s) {
            auto f = random_field(b, 2000 + s);
            const double n0 = luxemburg_norm(f, p, E);
            auto fs = random_sequence(b, 3, 3000 + s);
            const double m0 = norm_lq_Lp(fs, p, q, E);
            for (double r : {0.5, 2.0}) {
                GridFunction fr = f;
                for (auto& v : fr.values) v = cplx(std::pow(std::abs(v), r), 0.0);
                const double nr = std::pow(luxemburg_norm(fr, p.divided_by(r), E), 1.0 / r);
                worst = std::max(worst, std::abs(nr - n0) / (1.0 + n0));

                FunctionSequence gr = fs;
                for (auto& g : gr.levels)
                    for (auto& v : g.values) v = cplx(std::pow(std::abs(v), r), 0.0);
                const double mr =
                    std::pow(norm_lq_Lp(gr, p.divided_by(r), q.divided_by(r), E), 1.0 / r);
                worst = std::max(worst, std::abs(mr - m0) / (1.0 + m0));
            }
        }
        c.require(worst <= 1e-8, "worst deviation " + fmt(worst) + " > 1e-8");
        c.detail = "worst deviation " + fmt(worst);
    });

    // 5. r-quasi-triangle inequality across all five norm layers.
    run_criterion(5, "r-quasi-triangle inequality, 50 pairs, five norm layers", [](Criterion& c) {
        const Box b(1, 1.0, 128);
        const auto E = RegionMask::full(b);
        auto pLow = VariableExponent::from_function(
            [](double x, double) { return 0.8 + 0.4 / (1.0 + x * x); }, b);
        auto p = VariableExponent::from_function(
            [](double x, double) { return 1.5 + 0.5 * std::cos(x); }, b);
        auto q = VariableExponent::from_function(
            [](double x, double) { return 0.9 + 0.6 / (1.0 + x * x); }, b);
        const auto phi = SetFunction::power(1, 0.1);
        const auto cubes = enumerate_dyadic_cubes(b, -2, 3);
        const double rLeb = 0.9 * std::min(1.0, pLow.p_minus);
        const double rMix = 0.9 * std::min({1.0, p.p_minus, q.p_minus});
        for (std::uint64_t s = 1; s <= 50 && c.ok; ++s) {
            auto f = random_field(b, 4000 + 2 * s);
            auto g = random_field(b, 4001 + 2 * s);
            const double lhsL = std::pow(luxemburg_norm(f + g, pLow, E), rLeb);
            const double rhsL = std::pow(luxemburg_norm(f, pLow, E), rLeb) +
                                std::pow(luxemburg_norm(g, pLow, E), rLeb);
            c.require(lhsL <= rhsL + 1e-8, "Lebesgue layer (seed " + std::to_string(s) + ")");

            auto fs = random_sequence(b, 3, 5000 + 2 * s);
            auto gs = random_sequence(b, 3, 5001 + 2 * s);
            FunctionSequence sum = fs;
            for (std::size_t j = 0; j < sum.levels.size(); ++j)
                sum.levels[j] = sum.levels[j] + gs.levels[j];
            auto layer = [&](auto&& nrm, const char* tag) {
                const double lhs = std::pow(nrm(sum), rMix);
                const double rhs = std::pow(nrm(fs), rMix) + std::pow(nrm(gs), rMix);
                c.require(lhs <= rhs + 1e-8,
                          std::string(tag) + " layer (seed " + std::to_string(s) + ")");
            };
            layer([&](const FunctionSequence& h) { return norm_lq_Lp(h, p, q, E); }, "lq(Lp)");
            layer([&](const FunctionSequence& h) { return norm_Lp_lq(h, p, q, E); }, "Lp(lq)");
            layer([&](const FunctionSequence& h) { return phi_norm_B(h, p, q, phi, cubes); },
                  "phi-B");
            layer([&](const FunctionSequence& h) { return phi_norm_F(h, p, q, phi, cubes); },
                  "phi-F");
        }
    });

    // 6. phi = 1 reduction to the plain mixed norms on 20 seeded sequences.
    run_criterion(6, "phi = 1 reduces to the plain mixed norms, 20 sequences", [](Criterion& c) {
        const Box b(1, 1.0, 256);
        const auto E = RegionMask::full(b);
        auto p = VariableExponent::from_function(
            [](double x, double) { return 1.5 + 0.5 * std::cos(x); }, b);
        auto q = VariableExponent::from_function(
            [](double x, double) { return 2.0 + 0.5 * std::sin(2 * x); }, b);
        const auto phi = SetFunction::one();
        const auto cubes = enumerate_dyadic_cubes(b, -2, 4);
        double worst = 0.0;
        for (std::uint64_t s = 1; s <= 20; ++s) {
            auto fs = random_sequence(b, 3, 6000 + s);
            // support confined to the dyadic cube [0, 1/2): the covering cube
            // achieves the full-box norm, so sup and plain norm coincide
            for (auto& lvl : fs.levels)
                for (std::size_t i = 0; i < b.size(); ++i) {
                    const double xc = b.coord(i) + 0.5 * b.spacing();
                    if (xc < 0.0 || xc >= 0.5) lvl.values[i] = 0.0;
                }
            const double fullB = norm_lq_Lp(fs, p, q, E);
            const double fullF = norm_Lp_lq(fs, p, q, E);
            worst = std::max(worst,
                             std::abs(phi_norm_B(fs, p, q, phi, cubes) - fullB) / fullB);
            worst = std::max(worst,
                             std::abs(phi_norm_F(fs, p, q, phi, cubes) - fullF) / fullF);
        }
        c.require(worst <= 1e-10, "worst relative gap " + fmt(worst) + " > 1e-10");
        c.detail = "worst rel gap " + fmt(worst);
    });

    // 7. Constant-index space norms vs an independent direct evaluation.
    run_criterion(7, "constant-index reduction + power-type set function constant",
                  [](Criterion& c) {
        const Box desk(1, 8.0, 512);
        const double pc = 2.0, qc = 2.0, sc = 1.0, tau = 0.2;
        auto p = VariableExponent::constant(desk, pc);
        auto q = VariableExponent::constant(desk, qc);
        auto sp = make_space_params(p, q,
                                    make_weight_sequence_from_smoothness(
                                        VariableExponent::constant(desk, sc), 8),
                                    SetFunction::power(1, tau), SpaceFamily::B);
        auto pair = make_admissible_pair(desk);
        const double h = desk.spacing();

        // direct evaluation with plain Riemann sums and explicit cube loops
        auto oracle = [&](const FunctionSequence& fs, bool besov) {
            double sup = 0.0;
            for (int j = sp.jMin; j <= sp.jMax; ++j) {
                const double side = std::ldexp(1.0, -j);
                const long klo = static_cast<long>(std::floor(-desk.half_width / side));
                const long khi = static_cast<long>(std::ceil(desk.half_width / side)) - 1;
                for (long k = klo; k <= khi; ++k) {
                    const double x0 = side * static_cast<double>(k), x1 = x0 + side;
                    const std::size_t j0 = static_cast<std::size_t>(std::max(j, 0));
                    double val = 0.0;
                    if (besov) {
                        double acc = 0.0;
                        for (std::size_t lvl = j0; lvl <= sp.J; ++lvl) {
                            double mod = 0.0;
                            for (std::size_t i = 0; i < desk.size(); ++i) {
                                const double xc = desk.coord(i) + 0.5 * h;
                                if (xc >= x0 && xc < x1)
                                    mod += std::pow(std::abs(fs.levels[lvl].values[i]), pc);
                            }
                            acc += std::pow(std::pow(h * mod, 1.0 / pc), qc);
                        }
                        val = std::pow(acc, 1.0 / qc);
                    } else {
                        double mod = 0.0;
                        for (std::size_t i = 0; i < desk.size(); ++i) {
                            const double xc = desk.coord(i) + 0.5 * h;
                            if (xc < x0 || xc >= x1) continue;
                            double inner = 0.0;
                            for (std::size_t lvl = j0; lvl <= sp.J; ++lvl)
                                inner += std::pow(std::abs(fs.levels[lvl].values[i]), qc);
                            mod += std::pow(std::pow(inner, 1.0 / qc), pc);
                        }
                        val = std::pow(h * mod, 1.0 / pc);
                    }
                    sup = std::max(sup, val / std::pow(side, tau));
                }
            }
            return sup;
        };

        auto spF = sp;
        spF.family = SpaceFamily::F;
        double worst = 0.0;
        for (const auto& f : canonical_family(desk)) {
            auto fs = weighted_levels(f, sp, convolver(pair));
            const double oB = oracle(fs, true), oF = oracle(fs, false);
            worst = std::max(worst, std::abs(space_norm(f, sp, pair) - oB) / oB);
            worst = std::max(worst, std::abs(space_norm(f, spF, pair) - oF) / oF);
        }
        c.require(worst <= 1e-6, "worst rel err " + fmt(worst) + " > 1e-6");

        // the measured growth constant of |Q|^tau recovers tau per dimension
        for (int dim : {1, 2}) {
            const Box bb(dim, 2.0, dim == 1 ? 128 : 32);
            auto plan = SetFunctionPlan::make(bb);
            auto [c1, c1t, c2] = check_set_function_class(SetFunction::power(dim, tau), plan);
            (void)c1;
            (void)c2;
            c.require(std::abs(std::log2(c1t) - dim * tau) <= 1e-8,
                      "dimension " + std::to_string(dim) + " growth constant " +
                          fmt(std::log2(c1t)));
        }
        c.detail = "worst rel err " + fmt(worst);
    });

    // 8. Radial-kernel convolution inequality: stable above the threshold.
    run_criterion(8, "radial-kernel convolution bound, 100 trials, seed-stable", [](Criterion& c) {
        const Box desk(1, 8.0, 512);
        auto sp = preset_B(desk);
        const double bound = 1.0 + clog_inverse(sp.q) + sp.log2_c1_tilde();
        const double R = bound + 1.0;
        const double r1 = test_eta_conv_inequality(sp, R, 100, 1000);
        const double r2 = test_eta_conv_inequality(sp, R, 100, 9000);
        c.require(std::isfinite(r1) && r1 > 0.0, "ratio not finite/positive");
        c.require(std::abs(r1 - r2) < 0.2 * std::max(r1, r2),
                  "seed instability: " + fmt(r1) + " vs " + fmt(r2));

        // diagnostic only: with the decay order pushed far below the
        // dimension, the ratio grows as the truncation level is refined
        // (the kernel needs a positive order, so clamp at 1/4)
        const double Rlow = std::max(desk.dim - 2.0, 0.25);
        auto ratio_at = [&](std::size_t J) {
            SpaceParams t = sp;
            t.J = J;
            double worst = 0.0;
            for (int trial = 0; trial < 5; ++trial) {
                auto fs = random_level_sequence(desk, t.J, 500 + trial);
                std::vector<GridFunction> out;
                for (std::size_t nu = 0; nu <= t.J; ++nu)
                    out.push_back(convolve(eta(static_cast<int>(nu), Rlow, desk), fs.levels[nu]));
                const double den = phi_norm(fs, t);
                if (den > 0.0)
                    worst = std::max(worst, phi_norm(FunctionSequence(std::move(out)), t) / den);
            }
            return worst;
        };
        const double low3 = ratio_at(3), low5 = ratio_at(5);
        c.detail = "max ratio " + fmt(r1) + " / " + fmt(r2) + "; low-order diagnostic J=3: " +
                   fmt(low3) + ", J=5: " + fmt(low5);
    });

    // 9. Discrete convolution inequality: finite and seed-stable for B and F.
    run_criterion(9, "discrete convolution bound, 100 trials, seed-stable", [](Criterion& c) {
        const Box desk(1, 8.0, 512);
        auto sp = preset_B(desk);
        const double D1 = 1.0, D2 = sp.log2_c1_tilde() + 1.0;
        auto [b1, f1] = test_discrete_conv_inequality(sp, D1, D2, 100, 1000);
        auto [b2, f2] = test_discrete_conv_inequality(sp, D1, D2, 100, 9000);
        c.require(std::isfinite(b1) && std::isfinite(f1), "ratio not finite");
        c.require(std::abs(b1 - b2) < 0.2 * std::max(b1, b2),
                  "B-side seed instability: " + fmt(b1) + " vs " + fmt(b2));
        c.require(std::abs(f1 - f2) < 0.2 * std::max(f1, f2),
                  "F-side seed instability: " + fmt(f1) + " vs " + fmt(f2));
        c.detail = "B " + fmt(b1) + "/" + fmt(b2) + ", F " + fmt(f1) + "/" + fmt(f2);
    });

    // 10. Kernel-system equivalence and Peetre domination.
    run_criterion(10, "kernel equivalence spreads, refinement stability, Peetre domination",
                  [](Criterion& c) {
        // pin the truncation depth and cube-level range to their coarse-grid
        // values so refinement re-evaluates the same functional on a finer grid
        const int jMaxCoarse = default_cube_levels(Box(1, 8.0, 512)).second;
        const std::size_t JCoarse = default_truncation(Box(1, 8.0, 512));
        for (int preset = 0; preset < 2; ++preset) {
            double spread512 = 0.0;
            for (std::size_t N : {512u, 1024u}) {
                const Box b(1, 8.0, N);
                auto sp = preset == 0 ? preset_B(b) : preset_F(b);
                sp.jMax = jMaxCoarse;
                sp.J = JCoarse;
                auto pair = make_admissible_pair(b);
                auto lm = make_local_means(3.0, 2, b);
                auto rep = equivalence_experiment(sp, convolver(pair), convolver(lm),
                                                  canonical_family(b));
                const char* tag = preset == 0 ? "B" : "F";
                c.require(rep.skipped_zero == 0, std::string(tag) + ": zero norms skipped");
                c.require(rep.spread() <= 50.0,
                          std::string(tag) + " N=" + std::to_string(N) + ": spread " +
                              fmt(rep.spread()) + " > 50");
                if (N == 512) {
                    spread512 = rep.spread();
                } else {
                    c.require(std::abs(rep.spread() - spread512) <
                                  0.2 * std::max(rep.spread(), spread512),
                              std::string(tag) + ": spread moved from " + fmt(spread512) +
                                  " to " + fmt(rep.spread()) + " under refinement");
                    c.detail += std::string(c.detail.empty() ? "" : ", ") + tag + " spread " +
                                fmt(spread512) + " -> " + fmt(rep.spread());
                }
            }
        }

        // Peetre maximal level dominates the plain convolution level pointwise
        {
            const Box b(1, 8.0, 512);
            auto sp = preset_B(b);
            auto pair = make_admissible_pair(b);
            const double a = peetre_threshold(sp) + 1.0;
            for (const auto& f : canonical_family(b))
                for (int j = 0; j <= 3 && c.ok; ++j) {
                    auto g = convolver(pair)(f, j);
                    auto m = peetre_maximal_from_conv(g, j, a);
                    for (std::size_t i = 0; i < b.size(); ++i)
                        if (m.values[i].real() < std::abs(g.values[i]) - 1e-12) {
                            c.require(false, "1-D Peetre domination fails at level " +
                                                 std::to_string(j));
                            break;
                        }
                }
        }
        {
            const Box b2(2, 8.0, 64);
            auto pair2 = make_admissible_pair(b2);
            for (std::uint64_t seed : {11u, 12u, 13u}) {
                auto f = random_band_limited(b2, 4.0, seed);
                for (int j = 0; j <= 1 && c.ok; ++j) {
                    auto g = convolver(pair2)(f, j);
                    auto m = peetre_maximal_from_conv(g, j, 5.0);
                    for (std::size_t i = 0; i < b2.size(); ++i)
                        if (m.values[i].real() < std::abs(g.values[i]) - 1e-12) {
                            c.require(false, "2-D Peetre domination fails");
                            break;
                        }
                }
            }
        }
        c.require(c.seconds() < 600.0, "runtime over 10 min");
    });

    // 11. Kernel moment and spectral non-degeneracy conditions.
    run_criterion(11, "local-means moments vanish; admissible pair is Tauberian",
                  [](Criterion& c) {
        const Box desk(1, 8.0, 512);
        auto lm = make_local_means(3.0, 4, desk);
        const double worst = check_moments(lm.k, 4);
        c.require(worst <= 1e-8, "worst moment " + fmt(worst) + " > 1e-8");
        auto pair = make_admissible_pair(desk);
        c.require(check_tauberian(pair.psi0, pair.psi, 1.2, 25.0 / 18.0),
                  "Tauberian check failed at eps = 6/5, k = 25/18");
        c.detail = "worst moment " + fmt(worst);
    });

    // 12. Atom validation, ordering, and kernel-atom decay rates.
    run_criterion(12, "atom validator, condition ordering, kernel-atom decay exponents",
                  [](Criterion& c) {
        const Box desk(1, 8.0, 512);
        auto a = make_smooth_atom(desk, DyadicCube{1, 1, 0, 0}, 2, 2, 9);
        auto rep = validate_nonsmooth_atom(a, 2.0, 2.0, make_probe_bank(desk, 2.0));
        c.require(rep.ok, "smooth atom fails the validator at (2, 2)");
        auto repLow = validate_nonsmooth_atom(a, 1.0, 1.0, make_probe_bank(desk, 1.0));
        c.require(repLow.ok && repLow.scaled_norm <= rep.scaled_norm + 1e-9,
                  "a pass at (2, 2) must imply a pass at (1, 1)");

        // scaled local means qualify as non-smooth atoms
        auto lmd = make_local_means(3.0, 2, desk);
        for (int j : {1, 2}) {
            GridFunction v = KernelPair::spatial_dilate(lmd.k, j);
            for (auto& val : v.values) val *= std::exp2(-static_cast<double>(j));
            Atom ka{DyadicCube{1, j, 1, 0}, v, 2.0, 3.0, AtomKind::nonsmooth};
            const double sn = holder_norm_scaled(ka.values, j, 2.0);
            for (auto& val : ka.values.values) val /= sn;
            auto krep = validate_nonsmooth_atom(ka, 2.0, 3.0, make_probe_bank(desk, 3.0));
            c.require(krep.ok, "scaled local means fail as atoms at level " + std::to_string(j));
        }

        // measured decay exponents of the kernel-atom field over windows of
        // width 4, compared against the predicted rates K and L + n; the fine
        // window sits above the atom level, the coarse window well below it
        // so both endpoints stay inside the asymptotic regime
        const Box big(1, 8.0, 16384);
        auto lm = make_local_means(3.0, 4, big);
        const double K = 2.0, L = 1.0, n = 1.0;

        auto aHi = make_smooth_atom(big, DyadicCube{1, 0, 1, 0}, static_cast<int>(K),
                                    static_cast<int>(L), 5);
        auto rowsHi = kernel_atom_estimates(lm, aHi, 1, 5);
        const double eK =
            std::log2(rowsHi.front().sup_field / rowsHi.back().sup_field) / 4.0;
        c.require(eK >= 0.5 * K && eK <= 2.0 * K,
                  "fine-scale exponent " + fmt(eK) + " outside [K/2, 2K] = [" + fmt(0.5 * K) +
                      ", " + fmt(2.0 * K) + "]");

        auto aLo = make_smooth_atom(big, DyadicCube{1, 7, 1, 0}, 3,
                                    static_cast<int>(L), 6);
        auto rowsLo = kernel_atom_estimates(lm, aLo, 0, 4);
        const double eL =
            std::log2(rowsLo.back().sup_field / rowsLo.front().sup_field) / 4.0;
        c.require(eL >= 0.5 * (L + n) && eL <= 2.0 * (L + n),
                  "coarse-scale exponent " + fmt(eL) + " outside [(L+n)/2, 2(L+n)]");
        c.detail = "fine exponent " + fmt(eK) + " (K = " + fmt(K) + "), coarse exponent " +
                   fmt(eL) + " (L+n = " + fmt(L + n) + ")";
    });

    // 13. Synthesis bound over 50 seeded coefficient sets, both families.
    run_criterion(13, "synthesis norm bound, 50 coefficient sets per family, seed-stable",
                  [](Criterion& c) {
        const Box big(1, 8.0, 2048);
        for (SpaceFamily fam : {SpaceFamily::B, SpaceFamily::F}) {
            auto sp = atom_preset(big, fam);
            auto pair = make_admissible_pair(big);
            AtomBank bank;
            auto atom_for = [&](const DyadicCube& Q) {
                auto k = CoefficientSequence::key(Q);
                if (!bank.count(k))
                    bank.emplace(k, make_smooth_atom(big, Q, 2, 1,
                                                     static_cast<std::uint64_t>(
                                                         1000 + k[0] * 37 + k[1])));
            };
            auto batch_max = [&](std::uint64_t s0, double& rmin) {
                double rmax = 0.0;
                rmin = std::numeric_limits<double>::infinity();
                for (std::uint64_t seed = s0; seed < s0 + 50; ++seed) {
                    std::mt19937_64 rng(seed);
                    std::uniform_real_distribution<double> unif(-1.0, 1.0);
                    CoefficientSequence t;
                    for (int nu = 0; nu <= 4; ++nu) {
                        std::uniform_int_distribution<long> pick(-2 * (1L << nu),
                                                                 2 * (1L << nu) - 1);
                        for (int k = 0; k < 4; ++k)
                            t.set(DyadicCube{1, nu, pick(rng), 0}, cplx(unif(rng), unif(rng)));
                    }
                    for (const auto& [k, v] : t.entries)
                        atom_for(DyadicCube{1, static_cast<int>(k[0]), k[1], k[2]});
                    auto f = synthesize(t, bank, sp);
                    const double r = space_norm(f, sp, pair) / sequence_norm(t, sp);
                    if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
                    rmax = std::max(rmax, r);
                    rmin = std::min(rmin, r);
                }
                return rmax;
            };
            double rmin1 = 0.0, rmin2 = 0.0;
            const double m1 = batch_max(1, rmin1);
            const double m2 = batch_max(201, rmin2);
            const char* tag = fam == SpaceFamily::B ? "B" : "F";
            c.require(std::isfinite(m1) && std::isfinite(m2), std::string(tag) + ": ratio blew up");
            c.require(m1 / rmin1 <= 100.0,
                      std::string(tag) + ": within-batch spread " + fmt(m1 / rmin1) + " > 100");
            c.require(std::abs(m1 - m2) < 0.2 * std::max(m1, m2),
                      std::string(tag) + ": seed instability " + fmt(m1) + " vs " + fmt(m2));
            c.detail += std::string(c.detail.empty() ? "" : ", ") + tag + " max ratio " +
                        fmt(m1) + "/" + fmt(m2);
        }
    });

    // 14. Pointwise multipliers and the Hoelder algebra constant.
    run_criterion(14, "multiplier ratios bounded, identity multiplier exact, algebra constant",
                  [](Criterion& c) {
        const Box desk(1, 8.0, 512);
        auto one = make_grid_function_real([](double, double) { return 1.0; }, desk);
        auto smooth = make_grid_function_real(
            [](double x, double) { return 1.0 + 0.5 * std::sin(2.0 * x); }, desk);
        auto bump = make_grid_function_real(
            [](double x, double) {
                return std::abs(x) < 3.0 ? std::exp(-1.0 / (1.0 - x * x / 9.0)) : 0.0;
            },
            desk);
        const double rho = 2.0;
        for (SpaceFamily fam : {SpaceFamily::B, SpaceFamily::F}) {
            auto sp = atom_preset(desk, fam);
            auto pair = make_admissible_pair(desk);
            double cmax = 0.0;
            for (const auto& f : canonical_family(desk)) {
                auto r1 = multiplier_test(one, rho, f, sp, convolver(pair));
                c.require(r1.ratio == 1.0, "identity multiplier ratio != 1 exactly");
                for (const GridFunction* m : {&smooth, &bump}) {
                    auto r = multiplier_test(*m, rho, f, sp, convolver(pair));
                    c.require(std::isfinite(r.ratio) && r.ratio > 0.0, "degenerate ratio");
                    cmax = std::max(cmax, r.ratio);
                }
                if (!c.ok) break;
            }
            c.require(cmax <= 100.0, "multiplier constant " + fmt(cmax) + " > 100");
            c.detail += std::string(c.detail.empty() ? "" : ", ") +
                        (fam == SpaceFamily::B ? "B" : "F") + " max ratio " + fmt(cmax);
        }

        double worstAlg = 0.0;
        for (double s : {0.5, 1.0, 1.5})
            for (std::uint64_t seed = 1; seed <= 50; ++seed) {
                auto f = random_band_limited(desk, 3.0, 7000 + 2 * seed);
                auto g = random_band_limited(desk, 3.0, 7001 + 2 * seed);
                worstAlg = std::max(
                    worstAlg, holder_norm(f * g, s) / (holder_norm(f, s) * holder_norm(g, s)));
            }
        c.require(worstAlg <= 4.0, "algebra constant " + fmt(worstAlg) + " > 4");
        c.detail += ", algebra constant " + fmt(worstAlg);
    });

    // 15. Expression grammar suite and report determinism.
    run_criterion(15, "30-case expression grammar suite; byte-identical reports",
                  [](Criterion& c) {
        struct ValidCase {
            const char* src;
            double x, y, r, expect;
        };
        const double piHalf = std::acos(0.0);
        const ValidCase valid[] = {
            {"2 + sin(x)^2", piHalf, 0, 0, 3.0},
            {"min(2, 1/(1+x^2)+1)", 0, 0, 0, 2.0},
            {"42", 0, 0, 0, 42.0},
            {"1.5e2", 0, 0, 0, 150.0},
            {".5", 0, 0, 0, 0.5},
            {"x", 3.25, 0, 0, 3.25},
            {"y", 0, -2.0, 0, -2.0},
            {"r", 0, 0, 0.125, 0.125},
            {"1 + 2 * 3", 0, 0, 0, 7.0},
            {"(1 + 2) * 3", 0, 0, 0, 9.0},
            {"2 ^ 3 ^ 2", 0, 0, 0, 512.0},
            {"-2 ^ 2", 0, 0, 0, -4.0},
            {"2 ^ -1", 0, 0, 0, 0.5},
            {"10 - 4 - 3", 0, 0, 0, 3.0},
            {"16 / 4 / 2", 0, 0, 0, 2.0},
            {"--3", 0, 0, 0, 3.0},
            {"abs(-7)", 0, 0, 0, 7.0},
            {"cos(0)", 0, 0, 0, 1.0},
            {"max(1, x)", 5.0, 0, 0, 5.0},
            {"clamp(x, 0, 1)", 3.0, 0, 0, 1.0},
        };
        int cases = 0;
        for (const auto& v : valid) {
            auto e = parse_expression(v.src);
            c.require(std::abs(e(v.x, v.y, v.r) - v.expect) <= 1e-12 * (1.0 + std::abs(v.expect)),
                      std::string("wrong value for '") + v.src + "'");
            c.require(parse_expression(e.pretty()).pretty() == e.pretty(),
                      std::string("pretty-print not a fixed point for '") + v.src + "'");
            ++cases;
        }
        const char* invalid[] = {"2 + foo(x)", "sin(x, 1)", "min(1)", "(1 + 2", "1 + ",
                                 "1 2",        "#",          "z + 1",  "1 + * 2", ""};
        for (const char* src : invalid) {
            bool threw = false;
            try {
                parse_expression(src);
            } catch (const ParseError&) {
                threw = true;
            }
            c.require(threw, std::string("accepted invalid input '") + src + "'");
            ++cases;
        }
        c.require(cases >= 30, "fewer than 30 grammar cases");

        nlohmann::json j = {{"box", {{"dim", 1}, {"half_width", 8.0}, {"n", 256}}},
                            {"p", "2 + sin(x)^2"},
                            {"q", "2"},
                            {"s", "0.5"},
                            {"phi", {{"tau", 0.1}}},
                            {"family", "B"},
                            {"trials", 2},
                            {"seed", 7},
                            {"experiments", {"ineq-eta", "atoms"}}};
        auto sc = Scenario::from_json(j);
        auto r1 = run_scenario(sc);
        auto r2 = run_scenario(sc);
        r1.report.erase("timestamp");
        r2.report.erase("timestamp");
        c.require(r1.report.dump() == r2.report.dump(), "reports differ between identical runs");
        c.detail = std::to_string(cases) + " grammar cases";
    });

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
                            .count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASS" : std::to_string(g_failures) +
                                                              " CRITERIA FAILED")
              << "  [total " << wall << " s]" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
