#pragma once

// Domain types shared by every solver: oscillator parameters, forcing,
// resonance labels, polar slow coordinates, truncated Fourier responses and
// the resonant phase-lag rule.
//
// Governing equation (mass normalized):
//   x'' + 2 zeta omega0 x' + omega0^2 x + alpha x^3 = gamma sin(omega t)
// Harmonic j of a response with base frequency omega/nu is written
//   A_j sin(j omega t / nu - phi_j)
// and phi_j is the lag of that harmonic behind the forcing sin(omega t).

#include <Eigen/Dense>

#include <json.hpp>

#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phaseres {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle to [0, 2pi).
double wrap_two_pi(double angle);

/// Wrap an angle to (-pi, pi].
double wrap_pi(double angle);

struct OscillatorConfig {
    double mass = 1.0;           // kg
    double damping = 0.01;       // kg/s
    double lin_stiffness = 1.0;  // N/m
    double nl_stiffness = 1.0;   // N/m^3

    [[nodiscard]] double omega0() const;
    [[nodiscard]] double zeta_bar() const;
    [[nodiscard]] double alpha() const;

    /// Throws InvalidArgument unless the parameters describe an underdamped,
    /// non-softening oscillator. nl_stiffness == 0 is accepted as the linear
    /// limit.
    void validate() const;

    /// Omitted fields keep their defaults.
    static OscillatorConfig from_json(const nlohmann::json& j);
    static OscillatorConfig from_file(const std::string& path);
    [[nodiscard]] nlohmann::json to_json() const;
};

struct Forcing {
    double amplitude = 0.0;  // f, N
    double gamma_bar = 0.0;  // f / m
    double omega = 1.0;      // rad/s

    static Forcing make(const OscillatorConfig& cfg, double f, double omega);
    [[nodiscard]] double period() const { return kTwoPi / omega; }
};

/// k:nu label. Harmonic k of a response at base frequency omega/nu.
class ResonanceId {
public:
    ResonanceId(int k, int nu);

    /// Parses "K:NU".
    static ResonanceId parse(std::string_view text);

    [[nodiscard]] int k() const { return k_; }
    [[nodiscard]] int nu() const { return nu_; }
    [[nodiscard]] double response_frequency(double omega) const { return k_ * omega / nu_; }
    /// Forcing frequency that puts harmonic k on omega0.
    [[nodiscard]] double nominal_frequency(double omega0) const { return nu_ * omega0 / k_; }
    [[nodiscard]] bool both_odd() const { return (k_ % 2 == 1) && (nu_ % 2 == 1); }
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const ResonanceId&, const ResonanceId&) = default;

private:
    int k_;
    int nu_;
};

/// Polar slow coordinates of the resonant harmonic, x_k = r sin(omega_k t - phi).
struct SlowFlowState {
    double r = 0.0;
    double phi = 0.0;

    /// (u, v) with x_k = u cos(omega_k t) - v sin(omega_k t).
    [[nodiscard]] std::pair<double, double> to_uv() const;
    static SlowFlowState from_uv(double u, double v);
};

struct HarmonicCoeff {
    double cos = 0.0;
    double sin = 0.0;
};

/// Truncated Fourier series x(t) = a0 + sum_j [c_j cos(j w t) + s_j sin(j w t)],
/// w = base_freq.
class HarmonicSolution {
public:
    HarmonicSolution() = default;
    HarmonicSolution(double base_freq, int n_harmonics);

    /// Layout [a0, c1, s1, c2, s2, ...].
    static HarmonicSolution from_vector(double base_freq, const Eigen::VectorXd& v);
    [[nodiscard]] Eigen::VectorXd to_vector() const;

    [[nodiscard]] double base_freq() const { return base_freq_; }
    [[nodiscard]] int n_harmonics() const { return static_cast<int>(coeffs_.size()); }
    [[nodiscard]] double a0() const { return a0_; }
    void set_a0(double v) { a0_ = v; }
    [[nodiscard]] const HarmonicCoeff& coeff(int j) const { return coeffs_.at(j - 1); }
    HarmonicCoeff& coeff(int j) { return coeffs_.at(j - 1); }

    /// Polar form of harmonic j: A_j sin(j w t - phi_j).
    [[nodiscard]] double amplitude(int j) const;
    [[nodiscard]] double phase(int j) const;
    void set_polar(int j, double amplitude, double phase);

    [[nodiscard]] double value(double t) const;
    [[nodiscard]] double velocity(double t) const;
    [[nodiscard]] double acceleration(double t) const;

    /// max |x(t)| over one base period, sampled on `samples` points.
    [[nodiscard]] double max_displacement(int samples = 1024) const;

private:
    double base_freq_ = 1.0;
    double a0_ = 0.0;
    std::vector<HarmonicCoeff> coeffs_;
};

enum class ResonanceKind { AmplitudeResonance, PhaseResonance };

struct ResonancePoint {
    double omega = 0.0;
    double amplitude = 0.0;
    double phase_lag = 0.0;
    ResonanceKind kind = ResonanceKind::PhaseResonance;
    int harmonic_index = 1;
};

/// pi/2 when k and nu are both odd, 3pi/(4 nu) otherwise.
double resonant_phase_lag(const ResonanceId& res);

/// All phase lags in [0, 2pi) equivalent to the canonical one, sorted.
/// Generated by the time shift of one forcing period and by the odd symmetry
/// x(t) -> -x(t + T/2) of the Duffing equation; the step between members is
/// 2pi/nu when k and nu are odd, pi/nu otherwise.
std::vector<double> equivalent_phase_lags(const ResonanceId& res);

/// Smallest wrapped distance from `phi` to any member of `targets`.
double phase_distance(double phi, const std::vector<double>& targets);

/// gamma_bar / (omega0^2 - omega^2). f in N.
/// Throws SingularFrequency when |omega^2 - omega0^2| < 1e-6 omega0^2.
double gamma_capital(double omega, const OscillatorConfig& cfg, double f);

}  // namespace phaseres
