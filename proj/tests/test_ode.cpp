#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dcnet/ode/integrate.hpp"
#include "order_check.hpp"

using namespace dcnet;
using namespace dcnet::ode;

TEST(ErrorNorm, Examples) {
    const std::vector<double> zero = {0.0}, one = {1.0}, e = {1e-3}, e2 = {2e-3};
    EXPECT_EQ(error_norm(zero, one, one, 1e-6, 1e-3), 0.0);
    EXPECT_NEAR(error_norm(e, one, one, 1e-6, 1e-3), 1e-3 / 1.001e-3, 1e-12);
    EXPECT_NEAR(error_norm(e2, one, one, 1e-6, 1e-3), 2.0 * error_norm(e, one, one, 1e-6, 1e-3), 1e-12);
    const std::vector<double> two = {1.0, 2.0};
    EXPECT_THROW(error_norm(two, one, one, 1e-6, 1e-3), ValidationError);
}

TEST(ErrorNorm, UsesLargerOfOldAndNew) {
    const std::vector<double> e = {1.0}, small = {0.0}, big = {1000.0};
    EXPECT_DOUBLE_EQ(error_norm(e, small, big, 0.0, 1e-3), 1.0);
    EXPECT_DOUBLE_EQ(error_norm(e, big, small, 0.0, 1e-3), 1.0);
}

TEST(Controller, Examples) {
    PiController c(4);  // k = 5
    auto p = propose_step(1.0, 1.0, c, 100.0, 1e-14);
    EXPECT_TRUE(p.accepted);
    EXPECT_DOUBLE_EQ(p.h_next, 0.9);

    PiController c0(4);
    EXPECT_DOUBLE_EQ(propose_step(1e-3, 0.0, c0, 1e-2, 1e-14).h_next, 1e-2);
    PiController c1(4);
    EXPECT_DOUBLE_EQ(propose_step(1e-4, 0.0, c1, 1e-2, 1e-14).h_next, 1e-3);

    PiController c2(4);
    auto r = propose_step(1.0, std::pow(2.0, 5), c2, 100.0, 1e-14);
    EXPECT_FALSE(r.accepted);
    EXPECT_NEAR(r.h_next, 0.45, 1e-12);
}

TEST(Controller, PiMemoryAndClamps) {
    PiController c(4);
    c.accept_factor(0.5, false);
    EXPECT_TRUE(c.has_memory());
    const double f = c.accept_factor(0.5, false);
    EXPECT_NEAR(f, 0.9 * std::pow(0.5, -0.7 / 5) * std::pow(0.5, 0.4 / 5), 1e-12);
    EXPECT_LE(c.accept_factor(1e-3, true), 1.0);  // growth capped after rejection
    EXPECT_EQ(c.reject_factor(1e30), PiController::min_factor);
    EXPECT_EQ(c.reject_factor(INFINITY), PiController::min_factor);
}

TEST(Controller, StallThrows) {
    PiController c(4);
    EXPECT_THROW(propose_step(1e-14, 1e10, c, 1.0, 1e-14), IntegrationError);
}

TEST(Tableaux, ConsistencyConditions) {
    for (Method m : {Method::rk23, Method::rk45, Method::dop853}) {
        const auto& t = tableau(m);
        double bsum = 0.0, esum = 0.0;
        for (int i = 0; i < t.stages; ++i) {
            bsum += t.b[static_cast<std::size_t>(i)];
            double row = 0.0;
            for (int j = 0; j < t.stages; ++j) row += t.a_at(i, j);
            EXPECT_NEAR(row, t.c[static_cast<std::size_t>(i)], 1e-14) << to_string(m);
        }
        for (double e : t.e) esum += e;
        EXPECT_NEAR(bsum, 1.0, 1e-14);
        EXPECT_NEAR(esum, 0.0, 1e-14);
    }
}

namespace {

SolverRun one_step(Method m, double h, const AffineSystem& sys, std::vector<double> y0) {
    SolverConfig c;
    c.method = m;
    c.fixed_step = true;
    c.h_init = h;
    c.h_max = h;
    return integrate(sys, y0, 0.0, h, {}, c);
}

}  // namespace

TEST(ExplicitStep, ConstantSolutionIsExact) {
    const AffineSystem zero(CsrMatrix<double>(2, 2), {0.0, 0.0});
    for (Method m : {Method::rk23, Method::rk45, Method::dop853}) {
        const auto run = one_step(m, 0.3, zero, {1.5, -2.0});
        EXPECT_EQ(run.final_state(), (std::vector<double>{1.5, -2.0}));
        EXPECT_EQ(run.trace.back().error_norm, 0.0);
    }
}

TEST(ExplicitStep, Rk45MatchesExponential) {
    const auto run = one_step(Method::rk45, 0.1, test::decay_system(), {1.0});
    EXPECT_LE(std::abs(run.final_state()[0] - std::exp(-0.1)), 1e-8);
}

TEST(Orders, StepHalvingSlopes) {
    for (const auto& c : test::order_cases()) {
        const double p = test::observed_order(c.method, c.h0, c.levels, c.bdf_order);
        EXPECT_NEAR(p, c.nominal, 0.3) << c.label;
    }
}

TEST(Orders, Bdf4And5Too) {
    EXPECT_NEAR(test::observed_order(Method::bdf, 0.05, 3, 4), 4.0, 0.3);
    EXPECT_NEAR(test::observed_order(Method::bdf, 0.05, 3, 5), 5.0, 0.3);
}

TEST(Radau, LStability) {
    // y' = -1e6 (y - 1): A = -1e6, b = 1e6
    const AffineSystem sys(CsrMatrix<double>::from_triplets(1, 1, {{0, 0, -1e6}}), {1e6});
    const auto run = one_step(Method::radau, 1.0, sys, {0.0});
    EXPECT_LE(std::abs(run.final_state()[0] - 1.0), 1e-5);
}

TEST(Bdf, FirstOrderIsImplicitEuler) {
    SolverConfig c;
    c.method = Method::bdf;
    c.fixed_step = true;
    c.h_init = 0.1;
    c.h_max = 0.1;
    c.bdf_max_order = 1;
    const std::vector<double> y0 = {1.0};
    const auto run = integrate(test::decay_system(), y0, 0.0, 0.1, {}, c);
    EXPECT_NEAR(run.final_state()[0], 1.0 / 1.1, 1e-15);
}

TEST(Bdf, DifferenceRescalingIsExactForPolynomials) {
    // D built from a quadratic sampled at spacing h must, after change_d to
    // factor*h, equal the differences of the same quadratic at the new spacing
    auto q = [](double t) { return 3.0 - 2.0 * t + 0.5 * t * t; };
    const double h = 0.2, factor = 0.7;
    auto diffs = [&](double step) {
        std::vector<double> v = {q(0.0), q(-step), q(-2 * step)};
        std::vector<std::vector<double>> d(bdf::max_order + 3, std::vector<double>(1, 0.0));
        d[0][0] = v[0];
        d[1][0] = v[0] - v[1];
        d[2][0] = v[0] - 2 * v[1] + v[2];
        return d;
    };
    auto d = diffs(h);
    bdf::change_d(d, 2, factor);
    const auto expect = diffs(h * factor);
    for (int j = 0; j <= 2; ++j) EXPECT_NEAR(d[j][0], expect[j][0], 1e-13);
}

TEST(Equilibrium, AllMethodsHoldStillAndReachHmax) {
    const AffineSystem sys(CsrMatrix<double>::from_triplets(2, 2, {{0, 0, -1.0}, {1, 0, 1.0}, {1, 1, -2.0}}),
                           {2.0, 0.0});
    const std::vector<double> eq = {2.0, 1.0};
    for (Method m : all_methods) {
        SolverConfig c;
        c.method = m;
        c.h_max = 0.05;
        const auto run = integrate(sys, eq, 0.0, 2.0, {}, c);
        EXPECT_NEAR(run.final_state()[0], 2.0, c.atol) << to_string(m);
        EXPECT_NEAR(run.final_state()[1], 1.0, c.atol) << to_string(m);
        double hmax_seen = 0.0;
        for (const auto& s : run.trace) hmax_seen = std::max(hmax_seen, s.h);
        // trace h is a difference of times
        EXPECT_NEAR(hmax_seen, 0.05, 1e-15) << to_string(m);
    }
}
