#pragma once

// Closed-form amplitude/phase resonance formulas for the hardening Duffing
// oscillator. All functions take the forcing amplitude f in newtons and use
// the mass-normalized parameters of OscillatorConfig.

#include "phaseres/core.hpp"

#include <array>
#include <optional>

namespace phaseres::closed_form {

struct PrimaryResonanceResult {
    double omega_a = 0.0;
    double omega_p = 0.0;
    double amp_a = 0.0;
    double amp_p = 0.0;
    double phi_a = 0.0;
    double delta_omega = 0.0;
};

enum class RootSign { Plus, Minus };

/// One point of a phase- or amplitude-resonance locus parametrized by frequency.
struct LocusPoint {
    double omega_p = 0.0;
    double forcing_gamma_bar = 0.0;
    double amplitude = 0.0;
    RootSign root_sign = RootSign::Minus;

    [[nodiscard]] double forcing(const OscillatorConfig& cfg) const {
        return forcing_gamma_bar * cfg.mass;
    }
};

struct ExistenceWindow {
    double omega_inf = 0.0;
    double omega_sup = 0.0;
};

// Linear oscillator.
ResonancePoint linear_amplitude_resonance(const OscillatorConfig& cfg, double f);
ResonancePoint linear_phase_resonance(const OscillatorConfig& cfg, double f);

// Primary (1:1) resonance of the Duffing oscillator.
ResonancePoint primary_amplitude_resonance(const OscillatorConfig& cfg, double f);
ResonancePoint primary_phase_resonance(const OscillatorConfig& cfg, double f);
/// omega_p - omega_a evaluated from the single difference formula.
double primary_resonance_gap(const OscillatorConfig& cfg, double f);
PrimaryResonanceResult primary_resonance(const OscillatorConfig& cfg, double f);
/// Multiple-scales prediction; amplitude and phase resonance coincide there.
ResonancePoint multiple_scales_primary(const OscillatorConfig& cfg, double f);

// 3:1 superharmonic resonance with the static response frozen at omega0/3.
/// 9 gamma_bar / (8 omega0^2).
double super31_static_response(const OscillatorConfig& cfg, double f);
ResonancePoint super31_phase_resonance(const OscillatorConfig& cfg, double f);
ResonancePoint super31_amplitude_resonance(const OscillatorConfig& cfg, double f);

// 1:3 subharmonic resonance loci, indexed [Minus, Plus].
std::array<LocusPoint, 2> sub13_phase_locus(const OscillatorConfig& cfg, double omega_p);
std::array<LocusPoint, 2> sub13_amplitude_locus(const OscillatorConfig& cfg, double omega_a);
/// Phase lag at 1:3 amplitude resonance, taken in the family nearest pi/2.
double sub13_amplitude_phase_lag(const OscillatorConfig& cfg, double omega_a);

// 1:2 subharmonic resonance.
std::array<LocusPoint, 2> sub12_phase_locus(const OscillatorConfig& cfg, double omega_p);
/// LHS - RHS of the 1:2 existence inequality; non-negative inside the window.
double sub12_existence_margin(const OscillatorConfig& cfg, double f, double omega);
/// Scans [omega_lo, omega_hi] for the contiguous window where the 1:2
/// existence inequality holds; endpoints refined by bisection.
std::optional<ExistenceWindow> sub12_existence_window(const OscillatorConfig& cfg, double f,
                                                      double omega_lo, double omega_hi,
                                                      int n_scan = 2000);

// 5:1 superharmonic resonance.
bool super51_existence(const OscillatorConfig& cfg, double f, double omega);

/// Forcing frequencies at which a 1:3 or 1:2 phase-resonance locus
/// (minus root first, then plus root) passes through forcing f. Sorted by
/// frequency within each root sign.
std::vector<LocusPoint> locus_points_at_forcing(const ResonanceId& res, const OscillatorConfig& cfg,
                                                double f, double omega_lo, double omega_hi,
                                                int n_scan = 4000);

}  // namespace phaseres::closed_form
