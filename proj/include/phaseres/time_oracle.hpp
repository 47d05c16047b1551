#pragma once

// Direct time integration of the forced Duffing equation with fixed-step RK4,
// steady-state Fourier extraction and point-wise verification of slow-flow
// and harmonic-balance results.

#include "phaseres/core.hpp"
#include "phaseres/harmonic_balance.hpp"
#include "phaseres/slow_flow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace phaseres::oracle {

struct Trajectory {
    double time_step = 0.0;
    int steps_per_period = 0;  // per forcing period
    double t0 = 0.0;           // time of the first sample
    std::vector<double> x;
    std::vector<double> v;
    Forcing forcing;

    [[nodiscard]] std::size_t size() const { return x.size(); }
    [[nodiscard]] double time(std::size_t i) const { return t0 + time_step * static_cast<double>(i); }
};

struct State {
    double x = 0.0;
    double v = 0.0;
};

/// RK4 over n_periods forcing periods from (x0, v0) at t0, which must be a
/// whole number of forcing periods. Stores every step. Throws InvalidArgument
/// when steps_per_period < 200 and NonFinite when the state overflows.
Trajectory integrate(const OscillatorConfig& cfg, const Forcing& forcing, double x0, double v0,
                     int n_periods, int steps_per_period = 200, double t0 = 0.0);

/// Same integration without storing the path; returns the final state.
State advance(const OscillatorConfig& cfg, const Forcing& forcing, State s, long n_periods,
              int steps_per_period = 200, double t0 = 0.0);

/// Fourier projection over the last `periods` whole base periods of the
/// trajectory (at least 8). NotSettled when the harmonic content of the last
/// two base periods differs by more than 1e-4 relative.
HarmonicSolution steady_harmonics(const Trajectory& traj, double base_freq, int n_harm,
                                  int periods = 8);

/// Number of forcing periods covering 500 / zeta_bar radians of forcing phase,
/// rounded up to a multiple of nu.
long transient_periods(const OscillatorConfig& cfg, int nu);

/// RMS over one response period of x'' + 2 zeta omega0 x' + omega0^2 x +
/// alpha x^3 - gamma sin(omega t), evaluated from the series.
double ode_residual_rms(const OscillatorConfig& cfg, double f, double omega,
                        const HarmonicSolution& x, int samples = 1024);

enum class Verdict { Match, Mismatch, Unreachable };

std::string verdict_name(Verdict v);

struct Tolerances {
    double amplitude = 0.01;  // relative to the dominant harmonic
    double phase = 0.05;      // rad
    /// Beyond these the trajectory is taken to have left the point.
    double departed_amplitude = 0.2;
    double departed_phase = 0.5;
    int steps_per_period = 200;
    /// Override of the transient length in forcing periods; negative uses
    /// transient_periods().
    long transient = -1;
};

struct VerificationReport {
    std::vector<int> harmonics;                // compared harmonic indices
    std::vector<double> amplitude_error;       // per harmonic, relative to the dominant one
    std::vector<double> phase_error;           // per harmonic, rad (0 for negligible harmonics)
    double ode_residual_rms = 0.0;             // of the point's own series
    Verdict verdict = Verdict::Mismatch;
    std::optional<bool> stable;                // stability claimed by the point
    HarmonicSolution simulated;

    [[nodiscard]] double max_amplitude_error() const;
    [[nodiscard]] double max_phase_error() const;
    /// Match for stable points, Unreachable for unstable ones.
    [[nodiscard]] bool consistent() const;
};

/// Integrate from the state of `reference` at t = 0 and compare the settled
/// harmonics listed in `harmonics`.
VerificationReport verify_solution(const HarmonicSolution& reference, int nu,
                                   const std::vector<int>& harmonics, const OscillatorConfig& cfg,
                                   double f, double omega, std::optional<bool> stable,
                                   const Tolerances& tol = {});

/// Harmonic-balance point: every harmonic of the series is compared.
VerificationReport verify_point(const hb::BranchPoint& point, int nu, const OscillatorConfig& cfg,
                                double f, const Tolerances& tol = {});

/// Slow-flow point reconstructed as r sin(k omega t / nu - phi) + Gamma sin(omega t)
/// (the second term only for nu != k). Harmonics k and nu are compared.
VerificationReport verify_point(const slow_flow::SteadyState& point, const ResonanceId& res,
                                const OscillatorConfig& cfg, double f, const Tolerances& tol = {});

}  // namespace phaseres::oracle
