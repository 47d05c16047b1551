#include "phaseres/closed_form.hpp"
#include "phaseres/errors.hpp"
#include "phaseres/harmonic_balance.hpp"
#include "phaseres/time_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace phaseres;
using Eigen::VectorXd;

TEST(Aft, CubeOfCosineIsExact) {
    const hb::Aft aft(9, 64);
    VectorXd c = VectorXd::Zero(19);
    const double a = 0.8;
    c(1) = a;  // a cos(theta)
    const VectorXd x = aft.to_time(c);
    const VectorXd cube = aft.to_freq(x.array().cube().matrix());
    // cos^3 = 3/4 cos + 1/4 cos 3
    for (int i = 0; i < cube.size(); ++i) {
        double expect = 0.0;
        if (i == 1) expect = 0.75 * a * a * a;
        if (i == 5) expect = 0.25 * a * a * a;
        EXPECT_NEAR(cube(i), expect, 1e-14);
    }
}

// A trigonometric polynomial of degree 3N is integrated exactly by any
// uniform rule with more than 3N points, so a fine direct quadrature is an
// independent reference for the projected cube.
TEST(Aft, CubeOfRandomSeriesMatchesQuadrature) {
    const int n = 5;
    const hb::Aft aft(n, 4 * n + 1);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd c(2 * n + 1);
    for (int i = 0; i < c.size(); ++i) c(i) = u(rng);
    const VectorXd got = aft.to_freq(aft.to_time(c).array().cube().matrix());

    const int q = 5000;
    VectorXd ref = VectorXd::Zero(2 * n + 1);
    for (int m = 0; m < q; ++m) {
        const double th = kTwoPi * (m + 0.37) / q;
        double x = c(0);
        for (int j = 1; j <= n; ++j) x += c(2 * j - 1) * std::cos(j * th) + c(2 * j) * std::sin(j * th);
        const double x3 = x * x * x;
        ref(0) += x3 / q;
        for (int j = 1; j <= n; ++j) {
            ref(2 * j - 1) += 2.0 * x3 * std::cos(j * th) / q;
            ref(2 * j) += 2.0 * x3 * std::sin(j * th) / q;
        }
    }
    for (int i = 0; i < got.size(); ++i) EXPECT_NEAR(got(i), ref(i), 1e-12);
}

TEST(Problem, Validation) {
    hb::HBProblem p{OscillatorConfig{}, 0.01, ResonanceId(1, 1), 8, 128};
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.n_harmonics = 15;
    p.time_samples = 60;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.time_samples = 61;
    EXPECT_NO_THROW(p.validate());
    hb::HBProblem q{OscillatorConfig{}, 1.0, ResonanceId(2, 5), 9, 64};
    EXPECT_THROW(q.validate(), InvalidArgument);  // needs N >= 10
}

TEST(Solve, LinearOscillatorFrequencyResponse) {
    OscillatorConfig cfg;
    cfg.nl_stiffness = 0.0;
    const hb::HBProblem p{cfg, 0.01, ResonanceId(1, 1), 9, 64};
    for (double w : {0.5, 0.99, 1.0, 1.3}) {
        const auto sol = hb::hb_solve(p, w, hb::linear_seed(p, w));
        const double d = 1.0 - w * w, c = 2.0 * 0.005 * w;
        EXPECT_NEAR(sol.amplitude(1), 0.01 / std::hypot(d, c), 1e-12);
        EXPECT_NEAR(sol.phase(1), std::atan2(c, d), 1e-10);
        for (int j = 2; j <= 9; ++j) EXPECT_LT(sol.amplitude(j), 1e-14);
    }
}

TEST(Solve, JacobianMatchesFiniteDifferences) {
    const hb::HBProblem p{OscillatorConfig{}, 0.3, ResonanceId(1, 1), 9, 64};
    const hb::HBSystem sys(p);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    VectorXd x(p.size());
    for (int i = 0; i < x.size(); ++i) x(i) = u(rng);
    const double w = 0.7;
    const auto J = sys.jacobian(x, w);
    const double h = 1e-6;
    for (int i = 0; i < x.size(); ++i) {
        VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const VectorXd col = (sys.residual(xp, w) - sys.residual(xm, w)) / (2 * h);
        EXPECT_LT((col - J.col(i)).norm(), 1e-7);
    }
    const VectorXd dw = (sys.residual(x, w + h) - sys.residual(x, w - h)) / (2 * h);
    EXPECT_LT((dw - sys.d_omega(x, w)).norm(), 1e-7);
}

TEST(Solve, HarmonicTruncationConverges) {
    const OscillatorConfig cfg;
    const double w = 1.2, f = 0.01;
    const hb::HBProblem p9{cfg, f, ResonanceId(1, 1), 9, 64};
    const hb::HBProblem p18{cfg, f, ResonanceId(1, 1), 18, 128};
    const auto b9 = hb::continue_branch(p9, 0.8, 0.8, w);
    const auto s9 = hb::hb_solve(p9, w, b9.points.back().solution);
    HarmonicSolution g18(w, 18);
    for (int j = 1; j <= 9; ++j) g18.coeff(j) = s9.coeff(j);
    const auto s18 = hb::hb_solve(p18, w, g18);
    EXPECT_NEAR(s9.amplitude(1), s18.amplitude(1), 1e-10);
    EXPECT_NEAR(s9.amplitude(3), s18.amplitude(3), 1e-10);
    EXPECT_LT(s18.amplitude(17), 1e-14);
}

TEST(Floquet, LinearMultipliersDecayAtDampingRate) {
    OscillatorConfig cfg;
    cfg.nl_stiffness = 0.0;
    for (const auto& res : {ResonanceId(1, 1), ResonanceId(1, 3)}) {
        const hb::HBProblem p{cfg, 0.1, res, 9, 64};
        const double w = 2.2;
        const auto sol = hb::hb_solve(p, w, hb::linear_seed(p, w));
        const auto fl = hb::floquet_multipliers(p, sol, w);
        const double period = kTwoPi * res.nu() / w;
        const double expect = std::exp(-0.005 * period);
        EXPECT_NEAR(std::abs(fl.mu1), expect, 1e-9);
        EXPECT_NEAR(std::abs(fl.mu2), expect, 1e-9);
    }
}

TEST(Continuation, PrimaryBranchFoldsAndPhaseResonance) {
    const OscillatorConfig cfg;
    const hb::HBProblem p{cfg, 0.01, ResonanceId(1, 1)};
    auto b = hb::continue_branch(p, 0.8, 0.8, 1.6);
    int folds = 0, unstable = 0;
    for (const auto& q : b.points) {
        folds += q.has_tag(hb::TagKind::Fold);
        unstable += q.stable.has_value() && !*q.stable;
    }
    EXPECT_EQ(folds, 2);
    EXPECT_GT(unstable, 0);
    EXPECT_LT(b.points.front().omega, 0.81);
    EXPECT_GT(b.points.back().omega, 1.59);

    const auto pr = hb::detect_phase_resonance(p, b, ResonanceId(1, 1));
    ASSERT_EQ(pr.size(), 1u);
    EXPECT_NEAR(pr[0].solution.phase(1), kPi / 2, 1e-8);
    EXPECT_TRUE(pr[0].stable.value_or(false));
    EXPECT_LT(hb::hb_residual(p, pr[0].solution, pr[0].omega).lpNorm<Eigen::Infinity>(), 1e-9);
    const std::size_t before = b.points.size();
    hb::merge_points(b, pr);
    EXPECT_EQ(b.points.size(), before + 1);
    for (std::size_t i = 1; i < b.points.size(); ++i)
        EXPECT_LE(b.points[i - 1].arclength, b.points[i].arclength);
}

TEST(Continuation, SeriesSatisfiesEquationOfMotion) {
    const OscillatorConfig cfg;
    const double f = 0.01;
    const hb::HBProblem p{cfg, f, ResonanceId(1, 1)};
    const auto b = hb::continue_branch(p, 0.8, 0.8, 1.6);
    for (std::size_t i = 0; i < b.points.size(); i += 10) {
        const auto& q = b.points[i];
        EXPECT_LT(oracle::ode_residual_rms(cfg, f, q.omega, q.solution), 1e-6 * f);
    }
}

TEST(Continuation, SuperharmonicPeakHasQuadraturePhase) {
    const OscillatorConfig cfg;
    const hb::HBProblem p{cfg, 0.2, ResonanceId(3, 1)};
    const auto b = hb::continue_branch(p, 0.3, 0.3, 0.4);
    const auto m = hb::branch_maximum(p, b, 3);
    EXPECT_LT(phase_distance(m.solution.phase(3), {kPi / 2}), 0.05);
    const auto pr = hb::detect_phase_resonance(p, b, ResonanceId(3, 1));
    ASSERT_FALSE(pr.empty());
    EXPECT_NEAR(pr[0].omega, m.omega, 0.01 * m.omega);
}

TEST(Isola, NeedsSubharmonicFamily) {
    const hb::HBProblem p{OscillatorConfig{}, 0.3, ResonanceId(3, 1)};
    EXPECT_THROW(hb::find_isola(p, 0.3, 0.4), UnsupportedFamily);
}

TEST(Isola, SubharmonicIsolaIsClosed) {
    const hb::HBProblem p{OscillatorConfig{}, 0.6, ResonanceId(1, 3)};
    const auto b = hb::find_isola(p, 1.5, 18.0);
    ASSERT_TRUE(b.has_value());
    EXPECT_TRUE(b->closed);
    for (const auto& q : b->points) EXPECT_GT(q.solution.amplitude(1), 1e-3);
}

// no averaged window for 3:2, so only the direct polar seeds can reach it
TEST(Isola, UltraSubharmonicWithoutSlowFlowSeed) {
    const hb::HBProblem p{OscillatorConfig{}, 2.0, ResonanceId(3, 2)};
    const auto b = hb::find_isola(p, 1.0, 2.0);
    ASSERT_TRUE(b.has_value());
    double lo = 1e9, hi = 0.0;
    for (const auto& q : b->points) {
        EXPECT_GT(q.solution.amplitude(3), 1e-3);
        lo = std::min(lo, q.omega);
        hi = std::max(hi, q.omega);
    }
    EXPECT_GT(lo, 1.0);
    EXPECT_LT(hi, 2.0);
}

TEST(SymmetryBreaking, EvenSuperharmonicBranch) {
    const hb::HBProblem p{OscillatorConfig{}, 1.0, ResonanceId(2, 1)};
    const auto main = hb::continue_branch(p, 0.3, 0.3, 1.5);
    for (const auto& q : main.points) EXPECT_LT(q.solution.amplitude(2), 1e-10);
    const auto bifs = hb::symmetry_breaking_points(p, main);
    ASSERT_FALSE(bifs.empty());
    const auto br = hb::switch_branch(p, bifs.front(), 0.3, 1.5);
    double a2 = 0.0;
    for (const auto& q : br.points) a2 = std::max(a2, q.solution.amplitude(2));
    EXPECT_GT(a2, 0.1);
}
