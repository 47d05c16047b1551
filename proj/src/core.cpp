#include "phaseres/core.hpp"

#include "phaseres/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <algorithm>

namespace phaseres {

double wrap_two_pi(double angle) {
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w -= kTwoPi;
    return w;
}

double wrap_pi(double angle) {
    double w = wrap_two_pi(angle);
    return w > kPi ? w - kTwoPi : w;
}

// ---------------------------------------------------------------------------
// OscillatorConfig

double OscillatorConfig::omega0() const { return std::sqrt(lin_stiffness / mass); }

double OscillatorConfig::zeta_bar() const {
    return damping / (2.0 * std::sqrt(lin_stiffness * mass));
}

double OscillatorConfig::alpha() const { return nl_stiffness / mass; }

void OscillatorConfig::validate() const {
    if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
    if (!(lin_stiffness > 0.0)) throw InvalidArgument("lin_stiffness must be positive");
    if (!(damping >= 0.0)) throw InvalidArgument("damping must be non-negative");
    if (!(nl_stiffness >= 0.0))
        throw InvalidArgument("nl_stiffness must be non-negative (softening is not supported)");
    if (!(zeta_bar() < 1.0)) throw InvalidArgument("oscillator must be underdamped");
}

OscillatorConfig OscillatorConfig::from_json(const nlohmann::json& j) {
    OscillatorConfig cfg;
    if (!j.is_object()) throw InvalidArgument("oscillator descriptor must be a JSON object");
    cfg.mass = j.value("mass", cfg.mass);
    cfg.damping = j.value("damping", cfg.damping);
    cfg.lin_stiffness = j.value("lin_stiffness", cfg.lin_stiffness);
    cfg.nl_stiffness = j.value("nl_stiffness", cfg.nl_stiffness);
    cfg.validate();
    return cfg;
}

OscillatorConfig OscillatorConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open oscillator descriptor: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("malformed oscillator descriptor " + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json OscillatorConfig::to_json() const {
    return {{"mass", mass},
            {"damping", damping},
            {"lin_stiffness", lin_stiffness},
            {"nl_stiffness", nl_stiffness}};
}

Forcing Forcing::make(const OscillatorConfig& cfg, double f, double omega) {
    if (!(f >= 0.0)) throw InvalidArgument("forcing amplitude must be non-negative");
    if (!(omega > 0.0)) throw InvalidArgument("excitation frequency must be positive");
    return Forcing{f, f / cfg.mass, omega};
}

// ---------------------------------------------------------------------------
// ResonanceId

ResonanceId::ResonanceId(int k, int nu) : k_(k), nu_(nu) {
    if (k <= 0 || nu <= 0) throw InvalidArgument("resonance indices must be positive");
    if (std::gcd(k, nu) != 1)
        throw InvalidArgument("resonance indices must be coprime: " + std::to_string(k) + ":" +
                              std::to_string(nu));
}

ResonanceId ResonanceId::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw InvalidArgument("resonance must be written K:NU, got '" + std::string(text) + "'");
    auto to_int = [&](std::string_view s) {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw InvalidArgument("bad resonance index '" + std::string(s) + "'");
        return v;
    };
    return ResonanceId(to_int(text.substr(0, colon)), to_int(text.substr(colon + 1)));
}

std::string ResonanceId::to_string() const {
    return std::to_string(k_) + ":" + std::to_string(nu_);
}

// ---------------------------------------------------------------------------
// SlowFlowState

std::pair<double, double> SlowFlowState::to_uv() const {
    // r sin(wt - phi) = u cos(wt) - v sin(wt)  =>  u = -r sin(phi), v = -r cos(phi)
    return {-r * std::sin(phi), -r * std::cos(phi)};
}

SlowFlowState SlowFlowState::from_uv(double u, double v) {
    return {std::hypot(u, v), wrap_two_pi(std::atan2(-u, -v))};
}

// ---------------------------------------------------------------------------
// HarmonicSolution

HarmonicSolution::HarmonicSolution(double base_freq, int n_harmonics)
    : base_freq_(base_freq), coeffs_(static_cast<std::size_t>(n_harmonics)) {
    if (n_harmonics < 1) throw InvalidArgument("need at least one harmonic");
}

HarmonicSolution HarmonicSolution::from_vector(double base_freq, const Eigen::VectorXd& v) {
    if (v.size() < 3 || v.size() % 2 == 0)
        throw InvalidArgument("harmonic vector must have length 2N+1");
    HarmonicSolution h(base_freq, static_cast<int>((v.size() - 1) / 2));
    h.a0_ = v(0);
    for (int j = 1; j <= h.n_harmonics(); ++j) {
        h.coeff(j) = {v(2 * j - 1), v(2 * j)};
    }
    return h;
}

Eigen::VectorXd HarmonicSolution::to_vector() const {
    Eigen::VectorXd v(2 * n_harmonics() + 1);
    v(0) = a0_;
    for (int j = 1; j <= n_harmonics(); ++j) {
        v(2 * j - 1) = coeff(j).cos;
        v(2 * j) = coeff(j).sin;
    }
    return v;
}

double HarmonicSolution::amplitude(int j) const {
    const auto& c = coeff(j);
    return std::hypot(c.cos, c.sin);
}

double HarmonicSolution::phase(int j) const {
    const auto& c = coeff(j);
    return wrap_two_pi(std::atan2(-c.cos, c.sin));
}

void HarmonicSolution::set_polar(int j, double amplitude, double phase) {
    coeff(j) = {-amplitude * std::sin(phase), amplitude * std::cos(phase)};
}

double HarmonicSolution::value(double t) const {
    double x = a0_;
    for (int j = 1; j <= n_harmonics(); ++j) {
        const double th = j * base_freq_ * t;
        x += coeff(j).cos * std::cos(th) + coeff(j).sin * std::sin(th);
    }
    return x;
}

double HarmonicSolution::velocity(double t) const {
    double v = 0.0;
    for (int j = 1; j <= n_harmonics(); ++j) {
        const double w = j * base_freq_;
        const double th = w * t;
        v += w * (-coeff(j).cos * std::sin(th) + coeff(j).sin * std::cos(th));
    }
    return v;
}

double HarmonicSolution::acceleration(double t) const {
    double a = 0.0;
    for (int j = 1; j <= n_harmonics(); ++j) {
        const double w = j * base_freq_;
        const double th = w * t;
        a -= w * w * (coeff(j).cos * std::cos(th) + coeff(j).sin * std::sin(th));
    }
    return a;
}

double HarmonicSolution::max_displacement(int samples) const {
    const double period = kTwoPi / base_freq_;
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        m = std::max(m, std::abs(value(period * i / samples)));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Phase-lag rule

double resonant_phase_lag(const ResonanceId& res) {
    if (res.both_odd()) return kPi / 2.0;
    return 3.0 * kPi / (4.0 * res.nu());
}

std::vector<double> equivalent_phase_lags(const ResonanceId& res) {
    const double step = (res.both_odd() ? 2.0 : 1.0) * kPi / res.nu();
    const int count = static_cast<int>(std::lround(kTwoPi / step));
    const double base = resonant_phase_lag(res);
    std::vector<double> lags;
    lags.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) lags.push_back(wrap_two_pi(base + i * step));
    std::sort(lags.begin(), lags.end());
    return lags;
}

double phase_distance(double phi, const std::vector<double>& targets) {
    double best = kPi;
    for (double t : targets) best = std::min(best, std::abs(wrap_pi(phi - t)));
    return best;
}

double gamma_capital(double omega, const OscillatorConfig& cfg, double f) {
    const double w02 = cfg.omega0() * cfg.omega0();
    const double d = w02 - omega * omega;
    if (std::abs(d) < 1e-6 * w02)
        throw SingularFrequency("gamma_capital: omega too close to omega0");
    return (f / cfg.mass) / d;
}

}  // namespace phaseres
