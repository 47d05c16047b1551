#include "phaseres/closed_form.hpp"
#include "phaseres/errors.hpp"
#include "phaseres/slow_flow.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace phaseres;
namespace sf = phaseres::slow_flow;

namespace {

// Positive real roots y = A^2 of the 1:1 frequency-response cubic
// 9/16 alpha^2 y^3 + 3/2 alpha D y^2 + (D^2 + (2 zeta w0 w)^2) y - gamma^2 = 0.
std::vector<double> primary_cubic_roots(const OscillatorConfig& cfg, double f, double w) {
    const double al = cfg.alpha();
    const double D = cfg.omega0() * cfg.omega0() - w * w;
    const double c = 2.0 * cfg.zeta_bar() * cfg.omega0() * w;
    const double g = f / cfg.mass;
    const double a3 = 9.0 / 16.0 * al * al;
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 0) = -(1.5 * al * D) / a3;
    comp(0, 1) = -(D * D + c * c) / a3;
    comp(0, 2) = g * g / a3;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    std::vector<double> out;
    for (const auto& e : comp.eigenvalues())
        if (std::abs(e.imag()) < 1e-9 && e.real() > 0.0) out.push_back(std::sqrt(e.real()));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(Primary, ThreeCoexistingStates) {
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(1, 1));
    const double f = 0.01, w = 1.1;
    const auto oracle = primary_cubic_roots(cfg, f, w);
    ASSERT_EQ(oracle.size(), 3u);
    auto states = sf::find_steady_states(sys, w, cfg, f);
    ASSERT_EQ(states.size(), 3u);
    std::sort(states.begin(), states.end(),
              [](const auto& a, const auto& b) { return a.state.r < b.state.r; });
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(states[i].state.r, oracle[i], 1e-9);
    ASSERT_TRUE(states[1].stable.has_value());
    EXPECT_TRUE(*states[0].stable);
    EXPECT_FALSE(*states[1].stable);
    EXPECT_TRUE(*states[2].stable);
}

TEST(Primary, SingleStateAwayFromFolds) {
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(1, 1));
    for (double w : {0.8, 1.5}) {
        const auto oracle = primary_cubic_roots(cfg, 0.01, w);
        const auto states = sf::find_steady_states(sys, w, cfg, 0.01);
        ASSERT_EQ(states.size(), oracle.size());
        EXPECT_NEAR(states[0].state.r, oracle[0], 1e-9);
    }
}

TEST(Primary, BranchCrossesQuadratureAtClosedForm) {
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(1, 1));
    const auto b = sf::sweep_branch(sys, 0.8, 1.6, cfg, 0.01);
    const auto pr = sf::phase_crossings(sys, b, kPi / 2, cfg, 0.01);
    ASSERT_EQ(pr.size(), 1u);
    const auto cf = closed_form::primary_phase_resonance(cfg, 0.01);
    EXPECT_NEAR(pr[0].omega, cf.omega, 1e-8);
    EXPECT_NEAR(pr[0].state.r, cf.amplitude, 1e-8);
    const auto peak = sf::refine_branch_maximum(sys, b, cfg, 0.01);
    const auto ar = closed_form::primary_amplitude_resonance(cfg, 0.01);
    EXPECT_NEAR(peak.omega, ar.omega, 1e-6);
    EXPECT_NEAR(peak.state.r, ar.amplitude, 1e-8);
}

TEST(Primary, ResidualAndRatesAgree) {
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(1, 1));
    const auto s = sf::find_steady_states(sys, 1.3, cfg, 0.01).front();
    const auto rates = sys.rates(s.state, 1.3, cfg, 0.01);
    EXPECT_NEAR(rates[0], 0.0, 1e-10);
    EXPECT_NEAR(rates[1], 0.0, 1e-10);
}

TEST(Sub13, IsolaClosesAndPeaksNearLocus) {
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(1, 3));
    EXPECT_TRUE(sys.trivial_root());
    const auto b = sf::sweep_branch(sys, 1.5, 15.0, cfg, 0.6);
    EXPECT_TRUE(b.closed);
    const auto pts = closed_form::locus_points_at_forcing(ResonanceId(1, 3), cfg, 0.6, 3.0001, 15.0);
    ASSERT_FALSE(pts.empty());
    for (const auto& p : pts) {
        const auto cross = sf::phase_crossings(sys, b, kPi / 2, cfg, 0.6);
        double best = 1e9;
        for (const auto& c : cross) best = std::min(best, std::abs(c.omega - p.omega_p));
        EXPECT_LT(best, 1e-6);
    }
}

TEST(Sub13, NoBranchBelowLocusFold) {
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(1, 3));
    EXPECT_THROW(sf::sweep_branch(sys, 1.5, 15.0, cfg, 0.2), SeedNotFound);
}

TEST(Super31, AmplitudeMaximumNearClosedForm) {
    slow_flow::Options opts;
    opts.freeze_gamma = true;
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(3, 1), opts);
    const auto b = sf::sweep_branch(sys, 0.3, 0.4, cfg, 0.2);
    const auto peak = sf::refine_branch_maximum(sys, b, cfg, 0.2);
    const auto a = closed_form::super31_amplitude_resonance(cfg, 0.2);
    EXPECT_NEAR(peak.omega, a.omega, 1e-5);
    EXPECT_NEAR(peak.state.r, a.amplitude, 1e-5 * a.amplitude);
    // the closed-form point itself lies on the branch
    double nearest = 1e9;
    for (const auto& s : sf::find_steady_states(sys, a.omega, cfg, 0.2))
        nearest = std::min(nearest, std::abs(s.state.r - a.amplitude));
    EXPECT_LT(nearest, 1e-8);
}

TEST(Families, RelationOnlyFamiliesHaveNoFlow) {
    const OscillatorConfig cfg;
    for (const auto& r : {ResonanceId(1, 5), ResonanceId(1, 4), ResonanceId(5, 1), ResonanceId(2, 1),
                          ResonanceId(2, 3), ResonanceId(3, 2)}) {
        const sf::SlowFlowSystem sys(r);
        EXPECT_FALSE(sys.has_flow());
        EXPECT_THROW((void)sys.rates({0.1, 0.1}, 1.0, cfg, 1.0), UnsupportedFamily);
    }
    EXPECT_THROW(sf::SlowFlowSystem(ResonanceId(4, 1)), UnsupportedFamily);
    EXPECT_EQ(sf::family_name(ResonanceId(1, 1)), "primary");
    EXPECT_EQ(sf::family_name(ResonanceId(3, 1)), "superharmonic");
    EXPECT_EQ(sf::family_name(ResonanceId(1, 2)), "subharmonic");
    EXPECT_EQ(sf::family_name(ResonanceId(2, 3)), "ultra-subharmonic");
}

TEST(Families, RelationSeedsSatisfyReducedResidual) {
    const OscillatorConfig cfg;
    const sf::SlowFlowSystem sys(ResonanceId(1, 5));
    const auto seeds = sf::relation_seeds(sys, 9.0, cfg, 10.0);
    ASSERT_FALSE(seeds.empty());
    for (const auto& s : seeds) {
        const auto r = sys.reduced_residual(s, 9.0, cfg, 10.0);
        EXPECT_NEAR(r[0], 0.0, 1e-8 * (1 + s.r));
        EXPECT_NEAR(r[1], 0.0, 1e-8 * (1 + s.r));
    }
}

TEST(Phase, CanonicalPeriod) {
    const sf::SlowFlowSystem s13(ResonanceId(1, 3));
    EXPECT_NEAR(s13.phase_period(), kTwoPi / 3, 1e-15);
    EXPECT_NEAR(s13.canonical_phase(kTwoPi / 3 + 0.1), 0.1, 1e-14);
    const sf::SlowFlowSystem s12(ResonanceId(1, 2));
    EXPECT_NEAR(s12.phase_period(), kPi / 2, 1e-15);
    EXPECT_NEAR(s12.canonical_phase(-0.1), kPi / 2 - 0.1, 1e-14);
}
