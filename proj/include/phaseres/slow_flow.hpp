#pragma once

// Averaged (slow-flow) equations for the amplitude r and phase phi of the
// resonant harmonic, one system per k:nu family.
//
// Families 1:1, 3:1, 1:3 and 1:2 come with a full flow (r', phi'). The
// higher-order families 1:5, 1:4, 5:1, 2:1, 2:3 and 3:2 are only known
// through their steady-state relations, so they expose a residual pair and
// their stability is left unclassified.

#include "phaseres/core.hpp"
#include "phaseres/step_control.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phaseres::slow_flow {

/// Exact rational constant of a higher-order system.
struct Rational {
    std::int64_t num;
    std::int64_t den;

    [[nodiscard]] long double value() const {
        return static_cast<long double>(num) / static_cast<long double>(den);
    }
    [[nodiscard]] std::string text() const;
};

struct Options {
    /// Evaluate Gamma at the nominal frequency nu omega0 / k instead of at omega.
    bool freeze_gamma = false;
    /// 1:2 only: drop the second-order terms of the phase equation, which is the
    /// model the closed-form 1:2 locus and the existence inequality are built on.
    bool truncate_12 = false;
    /// 1:2 full system: steady states whose second-order phase correction
    /// exceeds this fraction of the size of the leading-order terms are
    /// outside the validity of the expansion and are discarded by the root
    /// search. Non-positive disables the filter.
    double max_correction_ratio = 0.25;
};

struct SteadyState {
    SlowFlowState state;
    double omega = 0.0;
    double residual_norm = 0.0;
    std::optional<bool> stable;  // empty for families without a full flow
    std::optional<std::array<std::complex<double>, 2>> eigenvalues;
};

struct Branch {
    std::vector<SteadyState> points;
    bool closed = false;  // isola: continuation came back to its start
};

class SlowFlowSystem {
public:
    /// Throws UnsupportedFamily for labels outside
    /// {1:1, 3:1, 1:3, 1:2, 1:5, 1:4, 5:1, 2:1, 2:3, 3:2}.
    explicit SlowFlowSystem(ResonanceId res, Options opts = {});

    [[nodiscard]] const ResonanceId& resonance() const { return res_; }
    [[nodiscard]] const Options& options() const { return opts_; }
    /// Averaging order of the underlying result.
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] bool has_flow() const { return has_flow_; }
    /// Coupling constant of a higher-order family (1 for the others).
    [[nodiscard]] const Rational& coupling() const { return coupling_; }

    /// Gamma seen by this system at forcing frequency omega.
    [[nodiscard]] double gamma(double omega, const OscillatorConfig& cfg, double f) const;
    /// (k omega / nu)^2 - omega0^2.
    [[nodiscard]] double detuning(double omega, const OscillatorConfig& cfg) const;

    /// (r', phi'). UnsupportedFamily for systems without a full flow.
    [[nodiscard]] std::array<double, 2> rates(const SlowFlowState& s, double omega,
                                              const OscillatorConfig& cfg, double f) const;

    /// Steady-state residual pair. For flow families this is (r', r phi');
    /// for the others the printed relations multiplied by r. Both components
    /// vanish at r = 0 when f = 0.
    [[nodiscard]] std::array<double, 2> residual(const SlowFlowState& s, double omega,
                                                 const OscillatorConfig& cfg, double f) const;

    /// Residual with the trivial factor r divided out where one exists; the
    /// function Newton iterates on.
    [[nodiscard]] std::array<double, 2> reduced_residual(const SlowFlowState& s, double omega,
                                                         const OscillatorConfig& cfg,
                                                         double f) const;

    /// m of the sin(m phi) coupling term.
    [[nodiscard]] int coupling_harmonic() const { return harmonic_; }

    /// Whether r = 0 is a root of the residual for every f (subharmonic-like families).
    [[nodiscard]] bool trivial_root() const { return trivial_root_; }

    /// Spacing of physically identical phases: 2 pi / nu for odd-odd
    /// families, pi / nu otherwise.
    [[nodiscard]] double phase_period() const;
    /// Map phi into [0, phase_period()).
    [[nodiscard]] double canonical_phase(double phi) const;

private:
    ResonanceId res_;
    Options opts_;
    int order_ = 1;
    bool has_flow_ = false;
    bool trivial_root_ = false;
    Rational coupling_{1, 1};
    int harmonic_ = 1;
};

/// Relative size of the second-order phase terms of the 1:2 system at a
/// state; 0 for every other family or when the system is truncated.
double correction_ratio(const SlowFlowSystem& sys, const SlowFlowState& s, double omega,
                        const OscillatorConfig& cfg, double f);

/// Seeds for families known only through steady-state relations: at r = r0,
/// the phases solving the first relation. Empty outside the existence window.
std::vector<SlowFlowState> relation_seeds(const SlowFlowSystem& sys, double omega,
                                          const OscillatorConfig& cfg, double f);

/// Eigenvalues of the 2x2 slow-flow Jacobian by central differences,
/// h = max(1e-7, 1e-7 |r|). Cartesian coordinates are used near r = 0.
std::array<std::complex<double>, 2> stability_eigenvalues(const SlowFlowSystem& sys,
                                                          const SlowFlowState& s, double omega,
                                                          const OscillatorConfig& cfg, double f);

struct NewtonSettings {
    double tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 8;
    double merge_tol = 1e-6;
};

/// Damped Newton from a single seed. Empty when the seed does not converge.
std::optional<SteadyState> solve_steady_state(const SlowFlowSystem& sys, SlowFlowState seed,
                                              double omega, const OscillatorConfig& cfg, double f,
                                              const NewtonSettings& ns = {});

/// Multi-start damped Newton over a 16-phase x 4-amplitude seed grid.
std::vector<SteadyState> find_steady_states(const SlowFlowSystem& sys, double omega,
                                            const OscillatorConfig& cfg, double f,
                                            const NewtonSettings& ns = {});

/// Pseudo-arclength continuation in (r, phi, omega). Isolated 1:3 and 1:2
/// branches are seeded from the closed-form quadrature loci. Throws
/// SeedNotFound when no steady state is found anywhere in range.
Branch sweep_branch(const SlowFlowSystem& sys, double omega_min, double omega_max,
                    const OscillatorConfig& cfg, double f, const StepControl& step = {});

/// Continue from a known steady state; direction +1 starts towards larger omega.
Branch continue_from(const SlowFlowSystem& sys, const SteadyState& start, int direction,
                     double omega_min, double omega_max, const OscillatorConfig& cfg, double f,
                     const StepControl& step = {});

/// Point of maximal r on a branch, refined by solving F = 0 together with the
/// vanishing of the r-component of the tangent.
SteadyState refine_branch_maximum(const SlowFlowSystem& sys, const Branch& branch,
                                  const OscillatorConfig& cfg, double f);

/// Points where phi crosses `target` (any member of target + j phase_period),
/// refined on the branch to 1e-10.
std::vector<SteadyState> phase_crossings(const SlowFlowSystem& sys, const Branch& branch,
                                         double target, const OscillatorConfig& cfg, double f);

struct R0Approximation {
    double r0 = 0.0;
    double dr0_domega = 0.0;
};

/// r0 = sqrt(4 Omega / (3 alpha) - 2 Gamma^2) and its frequency derivative.
/// Throws NotExist when the radicand is negative.
R0Approximation r0_approximation(const ResonanceId& res, double omega, const OscillatorConfig& cfg,
                                 double f);

std::string family_name(const ResonanceId& res);

}  // namespace phaseres::slow_flow
