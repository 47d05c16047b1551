#include "phaseres/errors.hpp"
#include "phaseres/harmonic_balance.hpp"
#include "phaseres/time_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace phaseres;

namespace {

// Free damped linear oscillator from x = 1, v = 0.
double free_linear(double zeta, double t) {
    const double wd = std::sqrt(1.0 - zeta * zeta);
    return std::exp(-zeta * t) * (std::cos(wd * t) + zeta / wd * std::sin(wd * t));
}

OscillatorConfig linear(double zeta) {
    OscillatorConfig cfg;
    cfg.damping = 2.0 * zeta;
    cfg.nl_stiffness = 0.0;
    return cfg;
}

}  // namespace

TEST(Integrator, FourthOrderConvergence) {
    const auto cfg = linear(0.05);
    const auto fz = Forcing::make(cfg, 0.0, 1.0);
    double err[2];
    const int spp[2] = {200, 400};
    for (int i = 0; i < 2; ++i) {
        const auto tr = oracle::integrate(cfg, fz, 1.0, 0.0, 5, spp[i]);
        err[i] = std::abs(tr.x.back() - free_linear(0.05, tr.time(tr.size() - 1)));
    }
    const double ratio = err[0] / err[1];
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(Integrator, ConservativeEnergyDrift) {
    OscillatorConfig cfg;
    cfg.damping = 0.0;
    const auto fz = Forcing::make(cfg, 0.0, 1.0);
    const double x0 = 0.5;
    const auto tr = oracle::integrate(cfg, fz, x0, 0.0, 100, 2000);
    auto energy = [&](double x, double v) { return 0.5 * v * v + 0.5 * x * x + 0.25 * x * x * x * x; };
    const double e0 = energy(x0, 0.0);
    EXPECT_LT(std::abs(energy(tr.x.back(), tr.v.back()) - e0) / e0, 1e-10);
}

TEST(Integrator, AdvanceMatchesStoredPath) {
    const OscillatorConfig cfg;
    const auto fz = Forcing::make(cfg, 0.3, 0.9);
    const auto tr = oracle::integrate(cfg, fz, 0.1, 0.0, 7);
    const auto s = oracle::advance(cfg, fz, {0.1, 0.0}, 7);
    EXPECT_DOUBLE_EQ(s.x, tr.x.back());
    EXPECT_DOUBLE_EQ(s.v, tr.v.back());
}

TEST(Integrator, RejectsCoarseSteps) {
    const OscillatorConfig cfg;
    EXPECT_THROW(oracle::integrate(cfg, Forcing::make(cfg, 0.1, 1.0), 0, 0, 10, 100), InvalidArgument);
}

TEST(Integrator, ForcedLinearSteadyState) {
    const auto cfg = linear(0.05);
    const double w = 1.3, f = 0.2;
    const auto tr = oracle::integrate(cfg, Forcing::make(cfg, f, w), 0.0, 0.0, 200);
    const auto h = oracle::steady_harmonics(tr, w, 3);
    const double d = 1.0 - w * w, c = 2.0 * 0.05 * w;
    EXPECT_NEAR(h.amplitude(1), f / std::hypot(d, c), 1e-8);
    EXPECT_NEAR(h.phase(1), std::atan2(c, d), 1e-7);
}

TEST(Extraction, PureSine) {
    oracle::Trajectory tr;
    tr.steps_per_period = 256;
    tr.forcing = Forcing::make(OscillatorConfig{}, 0.0, 1.0);
    tr.time_step = kTwoPi / tr.steps_per_period;
    for (int i = 0; i <= 12 * tr.steps_per_period; ++i) {
        const double t = tr.time_step * i;
        tr.x.push_back(std::sin(t - kPi / 3));
        tr.v.push_back(std::cos(t - kPi / 3));
    }
    const auto h = oracle::steady_harmonics(tr, 1.0, 4);
    EXPECT_NEAR(h.amplitude(1), 1.0, 1e-10);
    EXPECT_NEAR(h.phase(1), kPi / 3, 1e-10);
    EXPECT_NEAR(h.a0(), 0.0, 1e-12);
    EXPECT_LT(h.amplitude(2), 1e-12);
}

TEST(Extraction, DetectsUnsettledSignal) {
    oracle::Trajectory tr;
    tr.steps_per_period = 256;
    tr.forcing = Forcing::make(OscillatorConfig{}, 0.0, 1.0);
    tr.time_step = kTwoPi / tr.steps_per_period;
    for (int i = 0; i <= 12 * tr.steps_per_period; ++i) {
        const double t = tr.time_step * i;
        tr.x.push_back(std::exp(0.01 * t) * std::sin(t));
        tr.v.push_back(0.0);
    }
    EXPECT_THROW(oracle::steady_harmonics(tr, 1.0, 4), NotSettled);
}

TEST(Transient, MultipleOfSubharmonicOrder) {
    const OscillatorConfig cfg;
    for (int nu : {1, 2, 3, 5}) {
        const long n = oracle::transient_periods(cfg, nu);
        EXPECT_EQ(n % nu, 0);
        EXPECT_GE(n * kTwoPi, 500.0 / cfg.zeta_bar());
    }
}

TEST(Residual, ExactLinearSolution) {
    const auto cfg = linear(0.05);
    const double w = 0.8, f = 0.1;
    HarmonicSolution x(w, 1);
    const double d = 1.0 - w * w, c = 2.0 * 0.05 * w;
    x.set_polar(1, f / std::hypot(d, c), std::atan2(c, d));
    EXPECT_LT(oracle::ode_residual_rms(cfg, f, w, x), 1e-15);
    x.set_polar(1, 1.01 * f / std::hypot(d, c), std::atan2(c, d));
    EXPECT_GT(oracle::ode_residual_rms(cfg, f, w, x), 1e-4);
}

TEST(Verify, StableHarmonicBalancePointMatches) {
    const OscillatorConfig cfg;
    const hb::HBProblem p{cfg, 0.01, ResonanceId(1, 1)};
    const auto b = hb::continue_branch(p, 0.8, 0.8, 1.0);
    const auto& q = b.points.back();
    const auto rep = oracle::verify_point(q, 1, cfg, 0.01);
    EXPECT_EQ(rep.verdict, oracle::Verdict::Match);
    EXPECT_TRUE(rep.consistent());
    EXPECT_LT(rep.max_amplitude_error(), 1e-6);
}

TEST(Verify, UnstablePointIsUnreachable) {
    const OscillatorConfig cfg;
    const hb::HBProblem p{cfg, 0.01, ResonanceId(1, 1)};
    const auto b = hb::continue_branch(p, 0.8, 0.8, 1.6);
    const hb::BranchPoint* unstable = nullptr;
    for (const auto& q : b.points)
        if (q.stable == false && q.solution.amplitude(1) > 0.3 && q.solution.amplitude(1) < 0.6) unstable = &q;
    ASSERT_NE(unstable, nullptr);
    const auto rep = oracle::verify_point(*unstable, 1, cfg, 0.01);
    EXPECT_EQ(rep.verdict, oracle::Verdict::Unreachable);
    EXPECT_TRUE(rep.consistent());
}

TEST(Verify, SlowFlowPointOfSuperharmonic) {
    const OscillatorConfig cfg;
    const slow_flow::SlowFlowSystem sys(ResonanceId(3, 1));
    const auto states = slow_flow::find_steady_states(sys, 0.25, cfg, 0.1);
    ASSERT_EQ(states.size(), 1u);
    oracle::Tolerances tol;
    tol.amplitude = 0.05;  // first-order averaging
    const auto rep = oracle::verify_point(states[0], ResonanceId(3, 1), cfg, 0.1, tol);
    EXPECT_EQ(rep.harmonics, (std::vector<int>{3, 1}));
    EXPECT_EQ(rep.verdict, oracle::Verdict::Match);
}
