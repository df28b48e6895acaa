#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "varexp/atoms.hpp"
#include "varexp/expr.hpp"
#include "varexp/spaces.hpp"

namespace varexp {

/// A declarative experiment description: box, exponents and weights as
/// expression strings, the set function, the family, and the experiment list.
struct Scenario {
    Box box{1, 8.0, 512};
    std::string pExpr = "2";
    std::string qExpr = "2";
    std::string sExpr = "0.5";
    std::vector<std::string> wExprs;  // optional explicit weight levels (overrides sExpr)
    bool phiIsTau = true;
    double tau = 0.0;
    std::string phiExpr;  // phi(x, y, r) when !phiIsTau
    SpaceFamily family = SpaceFamily::B;
    std::vector<std::string> experiments;
    nlohmann::json thresholds = nlohmann::json::object();
    int trials = 5;
    std::uint64_t seed = 1;
    std::string outDir;
    std::string format = "json";  // json | csv
    bool plots = false;

    static Scenario from_json(const nlohmann::json& j) {
        Scenario s;
        if (j.contains("box")) {
            const auto& b = j.at("box");
            s.box = Box(b.value("dim", 1), b.value("half_width", 8.0),
                        b.value("n", static_cast<std::size_t>(512)));
        }
        s.pExpr = j.value("p", s.pExpr);
        s.qExpr = j.value("q", s.qExpr);
        s.sExpr = j.value("s", s.sExpr);
        if (j.contains("w")) s.wExprs = j.at("w").get<std::vector<std::string>>();
        if (j.contains("phi")) {
            const auto& ph = j.at("phi");
            if (ph.contains("tau")) {
                s.phiIsTau = true;
                s.tau = ph.at("tau").get<double>();
            } else {
                s.phiIsTau = false;
                s.phiExpr = ph.at("expr").get<std::string>();
            }
        }
        const std::string fam = j.value("family", "B");
        if (fam != "B" && fam != "F")
            throw std::invalid_argument("scenario: family must be 'B' or 'F'");
        s.family = fam == "B" ? SpaceFamily::B : SpaceFamily::F;
        if (j.contains("experiments"))
            s.experiments = j.at("experiments").get<std::vector<std::string>>();
        if (j.contains("thresholds")) s.thresholds = j.at("thresholds");
        s.trials = j.value("trials", 5);
        s.seed = j.value("seed", static_cast<std::uint64_t>(1));
        s.outDir = j.value("out_dir", std::string());
        s.format = j.value("format", std::string("json"));
        s.plots = j.value("plots", false);
        return s;
    }

    static Scenario from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("scenario: cannot open " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
};

namespace detail {

inline VariableExponent exponent_from_expr(const std::string& text, const Box& box) {
    auto e = parse_expression(text);
    return VariableExponent::from_function(
        [e](double x, double y) { return e(x, y, 0.0); }, box);
}

inline WeightSequence weights_from_exprs(const std::vector<std::string>& exprs, const Box& box) {
    if (exprs.size() < 2)
        throw std::invalid_argument("scenario: explicit weight list needs >= 2 levels");
    std::vector<GridFunction> lv;
    for (const auto& text : exprs) {
        auto e = parse_expression(text);
        lv.push_back(make_grid_function_real([e](double x, double y) { return e(x, y, 0.0); },
                                             box));
    }
    double a1 = std::numeric_limits<double>::infinity(), a2 = -a1;
    for (std::size_t j = 0; j + 1 < lv.size(); ++j)
        for (std::size_t i = 0; i < lv[j].values.size(); ++i) {
            const double r = std::log2(lv[j + 1].values[i].real() / lv[j].values[i].real());
            a1 = std::min(a1, r);
            a2 = std::max(a2, r);
        }
    WeightSequence w(lv, 0.0, a1, a2);
    const double alpha = std::get<0>(check_admissible_weights(w));
    return WeightSequence(std::move(w.levels), alpha, a1, a2);
}

}  // namespace detail

/// Builds and validates the space parameters of a scenario; throws with the
/// violated precondition named.
inline SpaceParams scenario_params(const Scenario& s) {
    auto p = detail::exponent_from_expr(s.pExpr, s.box);
    auto q = detail::exponent_from_expr(s.qExpr, s.box);
    WeightSequence w = s.wExprs.empty()
                           ? make_weight_sequence_from_smoothness(
                                 detail::exponent_from_expr(s.sExpr, s.box), 8)
                           : detail::weights_from_exprs(s.wExprs, s.box);
    SetFunction phi;
    if (s.phiIsTau) {
        phi = SetFunction::power(s.box.dim, s.tau);
    } else {
        auto e = parse_expression(s.phiExpr);
        phi.eval = [e](double x, double y, double r) { return e(x, y, r); };
    }
    return make_space_params(p, q, std::move(w), std::move(phi), s.family);
}

struct ScenarioResult {
    nlohmann::ordered_json report;
    int exit_code = 0;
};

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
}

inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
    return os.str();
}

/// Minimal SVG polyline of a value series, for --plots.
inline std::string svg_polyline(const std::vector<double>& ys) {
    const double W = 480.0, H = 240.0, pad = 20.0;
    double lo = 0.0, hi = 1.0;
    if (!ys.empty()) {
        lo = hi = ys[0];
        for (double v : ys) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi <= lo) hi = lo + 1.0;
    }
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n<polyline fill='none' "
          "stroke='steelblue' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double x = pad + (W - 2 * pad) * (ys.size() > 1 ? double(i) / (ys.size() - 1) : 0.5);
        const double y = H - pad - (H - 2 * pad) * (ys[i] - lo) / (hi - lo);
        os << x << "," << y << " ";
    }
    os << "'/>\n</svg>\n";
    return os.str();
}

}  // namespace detail

/// Runs the selected experiments; returns the report (deterministic for a
/// fixed scenario and seed, except the "timestamp" field) and an exit code:
/// 0 on success, 1 on a failed assertion, 2 on a validation error.
inline ScenarioResult run_scenario(const Scenario& s) {
    nlohmann::ordered_json rep;
    rep["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
    rep["seed"] = s.seed;
    rep["parameters"] = {{"box", {{"dim", s.box.dim},
                                  {"half_width", s.box.half_width},
                                  {"n", s.box.n_axis}}},
                         {"p", s.pExpr},
                         {"q", s.qExpr},
                         {"s", s.sExpr},
                         {"family", s.family == SpaceFamily::B ? "B" : "F"},
                         {"phi", s.phiIsTau ? ("|Q|^" + std::to_string(s.tau)) : s.phiExpr},
                         {"trials", s.trials}};
    rep["experiments"] = nlohmann::ordered_json::array();

    SpaceParams sp;
    try {
        sp = scenario_params(s);

        // validate experiment preconditions before any computation
        for (const auto& name : s.experiments) {
            if (name == "ineq-eta") {
                const double n = s.box.dim;
                const double bound = s.family == SpaceFamily::B
                                         ? n + clog_inverse(sp.q) + sp.log2_c1_tilde()
                                         : n + sp.log2_c1_tilde();
                const double R = s.thresholds.value("R", bound + 1.0);
                if (!(R > bound))
                    throw std::invalid_argument(
                        "ineq-eta: R = " + std::to_string(R) +
                        " violates the convolution lemma bound R > " + std::to_string(bound));
            } else if (name == "ineq-discrete") {
                const double D2 = s.thresholds.value("D2", sp.log2_c1_tilde() + 1.0);
                const double D1 = s.thresholds.value("D1", 1.0);
                if (!(D1 > 0.0) || !(D2 > sp.log2_c1_tilde()))
                    throw std::invalid_argument(
                        "ineq-discrete: need D1 > 0 and D2 > max{0, log2 c1~} = " +
                        std::to_string(sp.log2_c1_tilde()));
            } else if (name == "peetre") {
                const double bound = peetre_threshold(sp);
                const double a = s.thresholds.value("a", bound + 1.0);
                if (!(a > bound))
                    throw std::invalid_argument(
                        "peetre: a = " + std::to_string(a) +
                        " violates the maximal-function theorem bound a > " +
                        std::to_string(bound));
            } else if (name == "multiplier") {
                const double n = s.box.dim;
                const double mn = s.family == SpaceFamily::B
                                      ? std::min(1.0, sp.p.p_minus)
                                      : std::min({1.0, sp.p.p_minus, sp.q.p_minus});
                const double bound = std::max({sp.w.alpha2,
                                               sp.w.alpha2 + sp.log2_c1_tilde(),
                                               n / mn - n - sp.w.alpha1});
                const double rho = s.thresholds.value("rho", bound + 1.0);
                if (!(rho > bound))
                    throw std::invalid_argument(
                        "multiplier: rho = " + std::to_string(rho) +
                        " violates the multiplier theorem bound rho > " + std::to_string(bound));
            } else if (name != "norm" && name != "equiv" && name != "atoms") {
                throw std::invalid_argument("unknown experiment '" + name + "'");
            }
        }
    } catch (const std::exception& e) {
        rep["validation_error"] = e.what();
        rep["pass"] = false;
        return {rep, 2};
    }

    bool allPass = true;
    const std::size_t familySize =
        s.thresholds.value("family_size", static_cast<std::size_t>(6));
    auto outPath = [&](const std::string& name) {
        return (std::filesystem::path(s.outDir) / name).string();
    };
    if (!s.outDir.empty()) std::filesystem::create_directories(s.outDir);

    for (const auto& name : s.experiments) {
        nlohmann::ordered_json ex;
        ex["name"] = name;
        bool pass = true;

        if (name == "norm") {
            auto pair = make_admissible_pair(s.box);
            auto family = canonical_family(s.box);
            family.resize(std::min(family.size(), familySize));
            std::vector<double> norms;
            for (const auto& f : family) {
                const double v = space_norm(f, sp, pair);
                pass = pass && std::isfinite(v);
                norms.push_back(v);
            }
            ex["norms"] = norms;
            if (!s.outDir.empty()) {
                std::vector<std::vector<double>> rows;
                for (std::size_t i = 0; i < norms.size(); ++i)
                    rows.push_back({static_cast<double>(i), norms[i]});
                detail::write_text(outPath("norms.csv"), detail::csv_table({"index", "norm"}, rows));
                if (s.plots) detail::write_text(outPath("norms.svg"), detail::svg_polyline(norms));
            }
        } else if (name == "equiv") {
            auto pair = make_admissible_pair(s.box);
            auto lm = make_local_means(3.0, 2, s.box);
            auto family = canonical_family(s.box);
            family.resize(std::min(family.size(), familySize));
            auto r = equivalence_experiment(sp, convolver(pair), convolver(lm), family);
            ex["ratios"] = r.ratios;
            ex["spread"] = r.spread();
            ex["skipped_zero"] = r.skipped_zero;
            pass = r.skipped_zero == 0 && std::isfinite(r.spread()) &&
                   r.spread() <= s.thresholds.value("max_spread", 50.0);
            if (!s.outDir.empty()) {
                std::vector<std::vector<double>> rows;
                for (std::size_t i = 0; i < r.ratios.size(); ++i)
                    rows.push_back({static_cast<double>(i), r.norms_a[i], r.norms_b[i],
                                    r.ratios[i]});
                detail::write_text(outPath("equiv.csv"),
                                   detail::csv_table({"index", "norm_a", "norm_b", "ratio"}, rows));
            }
        } else if (name == "ineq-eta") {
            const double n = s.box.dim;
            const double bound = s.family == SpaceFamily::B
                                     ? n + clog_inverse(sp.q) + sp.log2_c1_tilde()
                                     : n + sp.log2_c1_tilde();
            const double R = s.thresholds.value("R", bound + 1.0);
            const double ratio = test_eta_conv_inequality(sp, R, s.trials, s.seed);
            ex["R"] = R;
            ex["bound"] = bound;
            ex["max_ratio"] = ratio;
            pass = std::isfinite(ratio) && ratio > 0.0;
        } else if (name == "ineq-discrete") {
            const double D1 = s.thresholds.value("D1", 1.0);
            const double D2 = s.thresholds.value("D2", sp.log2_c1_tilde() + 1.0);
            auto [rB, rF] = test_discrete_conv_inequality(sp, D1, D2, s.trials, s.seed);
            ex["D1"] = D1;
            ex["D2"] = D2;
            ex["max_ratio_B"] = rB;
            ex["max_ratio_F"] = rF;
            pass = std::isfinite(rB) && std::isfinite(rF);
        } else if (name == "peetre") {
            auto pair = make_admissible_pair(s.box);
            const double a = s.thresholds.value("a", peetre_threshold(sp) + 1.0);
            auto f = random_band_limited(s.box, 6.0, s.seed);
            const double conv = space_norm_variants(f, sp, convolver(pair), pair.moment_order,
                                                    a, NormVariant::convolution);
            const double peetre = space_norm_variants(f, sp, convolver(pair), pair.moment_order,
                                                      a, NormVariant::peetre);
            ex["a"] = a;
            ex["norm_convolution"] = conv;
            ex["norm_peetre"] = peetre;
            pass = peetre >= conv && std::isfinite(peetre);
        } else if (name == "atoms") {
            std::vector<Atom> bank;
            nlohmann::ordered_json reports = nlohmann::ordered_json::array();
            for (int nu : {0, 1}) {
                auto a = make_smooth_atom(s.box, DyadicCube{s.box.dim, nu, 0, 0}, 2, 1,
                                          s.seed + static_cast<std::uint64_t>(nu));
                auto r = validate_nonsmooth_atom(a, a.K, a.L, make_probe_bank(s.box, a.L));
                pass = pass && r.ok;
                reports.push_back(nlohmann::ordered_json(validation_to_json(r)));
                bank.push_back(std::move(a));
            }
            ex["validations"] = reports;
            if (!s.outDir.empty()) save_atom_bank(outPath("atoms.json"), s.box, bank);
        } else if (name == "multiplier") {
            auto pair = make_admissible_pair(s.box);
            const double n = s.box.dim;
            const double mn = s.family == SpaceFamily::B
                                  ? std::min(1.0, sp.p.p_minus)
                                  : std::min({1.0, sp.p.p_minus, sp.q.p_minus});
            const double bound = std::max({sp.w.alpha2, sp.w.alpha2 + sp.log2_c1_tilde(),
                                           n / mn - n - sp.w.alpha1});
            const double rho = s.thresholds.value("rho", bound + 1.0);
            auto bump = make_grid_function_real(
                [&](double x, double y) {
                    const double r2 = (x * x + y * y) / (0.25 * s.box.half_width *
                                                         s.box.half_width);
                    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
                },
                s.box);
            auto family = canonical_family(s.box);
            family.resize(std::min(family.size(), familySize));
            std::vector<double> ratios;
            for (const auto& f : family) {
                auto r = multiplier_test(bump, rho, f, sp, convolver(pair));
                ratios.push_back(r.ratio);
                pass = pass && std::isfinite(r.ratio);
            }
            ex["rho"] = rho;
            ex["ratios"] = ratios;
        }

        ex["pass"] = pass;
        allPass = allPass && pass;
        rep["experiments"].push_back(std::move(ex));
    }

    rep["pass"] = allPass;
    return {rep, allPass ? 0 : 1};
}

/// Serializes the report to out_dir/report.json (if an output directory is
/// configured) and returns the dump.
inline std::string write_scenario_report(const Scenario& s, const ScenarioResult& r) {
    const std::string text = r.report.dump(1) + "\n";
    if (!s.outDir.empty()) {
        std::filesystem::create_directories(s.outDir);
        detail::write_text((std::filesystem::path(s.outDir) / "report.json").string(), text);
    }
    return text;
}

}  // namespace varexp
