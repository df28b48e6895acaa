#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "varexp/exponents.hpp"

using namespace varexp;

TEST_CASE("exponent bounds") {
    Box b(1, 4.0, 256);
    auto p2 = VariableExponent::constant(b, 2.0);
    CHECK(exponent_bounds(p2) == std::pair{2.0, 2.0});

    auto p = VariableExponent::from_function(
        [](double x, double) { return 2.0 + std::sin(x) * std::sin(x); }, b);
    auto [lo, hi] = exponent_bounds(p);
    CHECK(lo == Catch::Approx(2.0).margin(1e-3));
    CHECK(hi == Catch::Approx(3.0).margin(1e-3));

    Box b10(1, 10.0, 1024);
    auto q = VariableExponent::from_function(
        [](double x, double) { return 3.0 + 1.0 / (1.0 + x * x); }, b10);
    auto [qlo, qhi] = exponent_bounds(q);
    CHECK(qlo == Catch::Approx(3.0).margin(0.02));
    CHECK(qhi == Catch::Approx(4.0).margin(1e-6));

    CHECK_THROWS_AS(VariableExponent::constant(b, -1.0), std::domain_error);
}

TEST_CASE("local log-Hoelder estimate") {
    Box b(1, 1.0, 256);
    auto c = VariableExponent::constant(b, 1.7);
    CHECK(check_log_holder_local(c) == 0.0);

    // the critical profile 1/log(e + 1/|x|) has constant about 1
    auto g = VariableExponent::from_function(
        [](double x, double) {
            return x == 0.0 ? 1e-12 : 1e-12 + 1.0 / std::log(euler_e + 1.0 / std::abs(x));
        },
        b);
    const double est = check_log_holder_local(g);
    CHECK(est >= 0.9);
    CHECK(est <= 2.5);
}

TEST_CASE("too-slow modulus fails log-Hoelder under refinement") {
    // |g(x) - g(0)| log(e + 1/|x|) = sqrt(log(e + 1/|x|)) -> infinity, so the
    // estimate must grow strictly as the grid refines (grids are nested).
    double prev = 0.0;
    for (std::size_t N : {128u, 256u, 512u}) {
        Box b(1, 1.0, N);
        auto g = VariableExponent::from_function(
            [](double x, double) {
                return x == 0.0 ? 1e-12
                                : 1e-12 + 1.0 / std::sqrt(std::log(euler_e + 1.0 / std::abs(x)));
            },
            b);
        const double est = check_log_holder_local(g);
        CHECK(est > prev + 0.01);
        prev = est;
    }
}

TEST_CASE("global log-Hoelder estimate") {
    Box b(1, 10.0, 512);
    auto c = VariableExponent::constant(b, 3.0);
    CHECK(check_log_holder_global(c, 3.0) == 0.0);

    auto g = VariableExponent::from_function(
        [](double x, double) { return 2.0 + 1.0 / std::log(euler_e + std::abs(x)); }, b);
    const double est = check_log_holder_global(g, 2.0);
    CHECK(est == Catch::Approx(1.0).margin(0.05));

    // wrong limit: the estimate grows with the box size
    Box bwide(1, 100.0, 512);
    auto gw = VariableExponent::from_function(
        [](double x, double) { return 2.0 + 1.0 / std::log(euler_e + std::abs(x)); }, bwide);
    CHECK(check_log_holder_global(gw, 3.0) > 2.0 * check_log_holder_global(g, 3.0));
}

TEST_CASE("reciprocal exponent estimates are comparable") {
    Box b(1, 4.0, 256);
    auto g = VariableExponent::from_function(
        [](double x, double) { return 2.0 + std::sin(x) * std::sin(x); }, b);
    GridFunction inv = g.samples;
    for (auto& v : inv.values) v = cplx(1.0 / v.real(), 0.0);
    auto ginv = VariableExponent(std::move(inv));

    const double eg = check_log_holder_local(g);
    const double einv = check_log_holder_local(ginv);
    // |1/g(x) - 1/g(y)| = |g(x)-g(y)| / (g(x) g(y)), so the two sup-estimates
    // are squeezed between (g^-)^2 and (g^+)^2
    CHECK(eg >= einv * g.p_minus * g.p_minus - 1e-12);
    CHECK(eg <= einv * g.p_plus * g.p_plus + 1e-12);
    CHECK(std::isfinite(eg));
    CHECK(std::isfinite(einv));
}

TEST_CASE("estimate is monotone under pair subsampling") {
    Box b(1, 2.0, 128);
    auto g = VariableExponent::from_function(
        [](double x, double) { return 2.0 + 0.5 * std::cos(3.0 * x); }, b);
    auto full = PairPlan::build(b);
    PairPlan half;
    half.pairs.assign(full.pairs.begin(), full.pairs.begin() + full.pairs.size() / 2);
    CHECK(check_log_holder_local(g, half) <= check_log_holder_local(g, full));
}
