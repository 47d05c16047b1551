#pragma once

// Multi-harmonic balance for the forced Duffing oscillator with the cubic term
// evaluated by alternating frequency/time (AFT), plus pseudo-arclength
// continuation in the excitation frequency.
//
// Unknown vector layout [a0, c1, s1, ..., cN, sN] at base frequency omega/nu,
// so the forcing sits on harmonic nu.

#include "phaseres/core.hpp"
#include "phaseres/step_control.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

namespace phaseres::hb {

struct HBProblem {
    OscillatorConfig cfg;
    double forcing = 0.0;  // f, N
    ResonanceId resonance{1, 1};
    int n_harmonics = 15;
    int time_samples = 128;

    /// Throws InvalidArgument unless N >= max(k nu, 9) and M >= 4N + 1.
    void validate() const;
    [[nodiscard]] double base_freq(double omega) const { return omega / resonance.nu(); }
    [[nodiscard]] int size() const { return 2 * n_harmonics + 1; }
};

/// Precomputed sampling (E) and projection (P) matrices of the AFT scheme.
class Aft {
public:
    Aft(int n_harmonics, int samples);
    /// time samples of the series over one base period
    [[nodiscard]] Eigen::VectorXd to_time(const Eigen::VectorXd& coeffs) const { return E_ * coeffs; }
    /// Fourier coefficients of sampled values
    [[nodiscard]] Eigen::VectorXd to_freq(const Eigen::VectorXd& samples) const { return P_ * samples; }
    [[nodiscard]] const Eigen::MatrixXd& sampling() const { return E_; }
    [[nodiscard]] const Eigen::MatrixXd& projection() const { return P_; }

private:
    Eigen::MatrixXd E_;
    Eigen::MatrixXd P_;
};

/// Residual, its Jacobian in the coefficients and its derivative in omega.
class HBSystem {
public:
    explicit HBSystem(HBProblem problem);

    [[nodiscard]] const HBProblem& problem() const { return p_; }
    [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& x, double omega) const;
    [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double omega) const;
    [[nodiscard]] Eigen::VectorXd d_omega(const Eigen::VectorXd& x, double omega) const;
    /// Tolerance on the residual infinity norm: 1e-10 max(1, gamma_bar).
    [[nodiscard]] double tolerance() const;

private:
    HBProblem p_;
    Aft aft_;
};

/// Balance residual of x'' + 2 zeta omega0 x' + omega0^2 x + alpha x^3 - gamma sin(omega t).
Eigen::VectorXd hb_residual(const HBProblem& problem, const HarmonicSolution& coeffs, double omega);

/// Damped Newton. Throws NoConvergence after 50 iterations.
HarmonicSolution hb_solve(const HBProblem& problem, double omega, const HarmonicSolution& initial_guess);
HarmonicSolution hb_solve(const HBSystem& sys, double omega, const HarmonicSolution& initial_guess,
                          int* iterations = nullptr);

/// Steady response of the underlying linear oscillator.
HarmonicSolution linear_seed(const HBProblem& problem, double omega);
/// Harmonic k set to (r, phi), the forced harmonic nu to Gamma sin(omega t).
HarmonicSolution isola_seed(const HBProblem& problem, double omega, double r, double phi);

enum class TagKind { Fold, PhaseResonance };

struct Tag {
    TagKind kind;
    int harmonic = 0;  // PhaseResonance only

    friend bool operator==(const Tag&, const Tag&) = default;
};

struct BranchPoint {
    double omega = 0.0;
    HarmonicSolution solution;
    double max_displacement = 0.0;
    std::optional<bool> stable;
    std::vector<Tag> tags;
    double arclength = 0.0;
    double tangent_omega = 0.0;  // omega-component of the unit tangent

    [[nodiscard]] bool has_tag(TagKind kind) const;
};

struct Branch {
    std::vector<BranchPoint> points;
    bool closed = false;
};

struct ContinuationOptions {
    StepControl step{1e-2, 1e-7, 1e-2, 1.3, 4, 20000};
    bool compute_stability = true;
    int direction = +1;  // initial sense of omega
    /// Stop after this much arclength; non-positive for no limit.
    double max_arclength = 0.0;
};

/// Pseudo-arclength continuation from a solution at omega_start. `guess`
/// defaults to the linear response. Stops when omega leaves
/// [omega_min, omega_max] or the branch closes on itself.
Branch continue_branch(const HBProblem& problem, double omega_start, double omega_min,
                       double omega_max, const ContinuationOptions& opts = {},
                       const std::optional<HarmonicSolution>& guess = std::nullopt);

/// Points where phi_k crosses a member of equivalent_phase_lags(res), refined
/// by an Illinois secant along the bracketing chord (each iterate corrected
/// back onto the branch) to |phi_k - target| < 1e-8. Tagged PhaseResonance(k).
std::vector<BranchPoint> detect_phase_resonance(const HBProblem& problem, const Branch& branch,
                                                const ResonanceId& res);

/// Insert refined points into a branch in arclength order.
void merge_points(Branch& branch, const std::vector<BranchPoint>& extra);

struct FloquetResult {
    std::complex<double> mu1, mu2;
    [[nodiscard]] double max_modulus() const { return std::max(std::abs(mu1), std::abs(mu2)); }
};

/// Multipliers of y'' + 2 zeta omega0 y' + (omega0^2 + 3 alpha x(t)^2) y = 0
/// over one response period, integrated by RK4.
FloquetResult floquet_multipliers(const HBProblem& problem, const HarmonicSolution& x, double omega,
                                  int steps = 2000);
/// All multipliers inside the unit circle, with tolerance 1e-6.
bool stability_hill(const HBProblem& problem, const BranchPoint& point);

/// Point of maximal amplitude of harmonic j (0 for max displacement) on the
/// branch, refined between the neighbours of the best sample.
BranchPoint branch_maximum(const HBProblem& problem, const Branch& branch, int harmonic);

/// Every interior local maximum of the same quantity, refined likewise.
std::vector<BranchPoint> local_maxima(const HBProblem& problem, const Branch& branch,
                                      int harmonic);

/// Symmetry-breaking points on a branch of odd-harmonic solutions: sign
/// changes of the determinant of the even-harmonic block of the Jacobian.
std::vector<BranchPoint> symmetry_breaking_points(const HBProblem& problem, const Branch& branch);

/// Isolated branch in a nu > 1 window. Seeds are the nontrivial slow-flow steady
/// states at the closed-form locus frequencies (1:3, 1:2) and on an n_grid
/// frequency grid over the range, mapped through isola_seed. The first seed
/// whose harmonic-balance solution keeps a nonzero harmonic k is continued
/// both ways. Without any slow-flow seed a polar grid of harmonic-k seeds is
/// tried on a coarser grid. Empty when no seed gets there.
std::optional<Branch> find_isola(const HBProblem& problem, double omega_min, double omega_max,
                                 const ContinuationOptions& opts = {}, int n_grid = 100);

/// Continue the even-harmonic branch born at a symmetry-breaking point.
Branch switch_branch(const HBProblem& problem, const BranchPoint& bif, double omega_min,
                     double omega_max, const ContinuationOptions& opts = {});

}  // namespace phaseres::hb
