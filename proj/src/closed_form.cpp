#include "phaseres/closed_form.hpp"

#include "phaseres/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phaseres::closed_form {

namespace {

double zeta_checked(const OscillatorConfig& cfg) {
    const double z = cfg.zeta_bar();
    if (!(z > 0.0)) throw ZeroDamping("closed-form resonance needs positive damping");
    return z;
}

double gamma_bar_checked(const OscillatorConfig& cfg, double f) {
    if (!(f >= 0.0)) throw InvalidArgument("forcing amplitude must be non-negative");
    return f / cfg.mass;
}

// 3 alpha gamma^2 / (4 zeta^2 omega0^6)
double primary_q(const OscillatorConfig& cfg, double g) {
    const double z = cfg.zeta_bar();
    const double w0 = cfg.omega0();
    return 3.0 * cfg.alpha() * g * g / (4.0 * z * z * std::pow(w0, 6));
}

// Roots (gamma_bar) of the quadrature locus
//   gamma = |w0^2 - w^2| / sqrt(c alpha) * sqrt(B -/+ sqrt(B^2 - D)).
// Returned as [Minus, Plus]; throws BelowFoldPoint when no real root.
std::array<double, 2> locus_gammas(double w0, double w, double alpha, double c, double big_b,
                                   double d) {
    const double disc = big_b * big_b - d;
    if (!(big_b > 0.0) || disc < 0.0)
        throw BelowFoldPoint("no quadrature point at omega = " + std::to_string(w));
    const double s = std::sqrt(disc);
    const double pre = std::abs(w0 * w0 - w * w) / std::sqrt(c * alpha);
    // B - sqrt(B^2 - D) written as D / (B + sqrt(...)) to keep the small root accurate.
    const double minus = d / (big_b + s);
    return {pre * std::sqrt(minus), pre * std::sqrt(big_b + s)};
}

double quadratic_root_omega(double c1, double c2, double c3) {
    const double disc = c2 * c2 - 4.0 * c1 * c3;
    if (disc < 0.0) throw NoResonance("no real root of the resonance-frequency quadratic");
    const double w2 = (-c2 + std::sqrt(disc)) / (2.0 * c1);
    if (!(w2 > 0.0)) throw NoResonance("resonance-frequency quadratic has no positive root");
    return std::sqrt(w2);
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear oscillator

ResonancePoint linear_amplitude_resonance(const OscillatorConfig& cfg, double f) {
    const double g = gamma_bar_checked(cfg, f);
    const double z = cfg.zeta_bar();
    const double w0 = cfg.omega0();
    if (z * z >= 0.5) throw OverdampedPeak("zeta^2 >= 1/2: linear response has no peak");
    if (!(z > 0.0)) throw ZeroDamping("amplitude resonance undefined without damping");
    ResonancePoint p;
    p.kind = ResonanceKind::AmplitudeResonance;
    p.omega = w0 * std::sqrt(1.0 - 2.0 * z * z);
    p.amplitude = g / (2.0 * z * w0 * w0 * std::sqrt(1.0 - z * z));
    p.phase_lag = std::atan(std::sqrt(1.0 - 2.0 * z * z) / z);
    return p;
}

ResonancePoint linear_phase_resonance(const OscillatorConfig& cfg, double f) {
    const double g = gamma_bar_checked(cfg, f);
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    return {w0, g / (2.0 * z * w0 * w0), kPi / 2.0, ResonanceKind::PhaseResonance, 1};
}

// ---------------------------------------------------------------------------
// Primary resonance

ResonancePoint primary_amplitude_resonance(const OscillatorConfig& cfg, double f) {
    const double g = gamma_bar_checked(cfg, f);
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double q = primary_q(cfg, g);
    const double a = 1.0 - z * z;
    const double s = std::sqrt(a * a + q);
    // 2 w0^2/(3 alpha) * (s - a) with the alpha cancelled analytically, so the
    // linear limit alpha -> 0 stays finite.
    const double amp2 = g * g / (2.0 * z * z * std::pow(w0, 4) * (s + a));
    const double inner = std::sqrt(1.0 - 3.0 * z * z + s);
    ResonancePoint p;
    p.kind = ResonanceKind::AmplitudeResonance;
    p.omega = w0 / std::sqrt(2.0) * inner;
    p.amplitude = std::sqrt(amp2);
    p.phase_lag = std::atan(inner / (std::sqrt(2.0) * z));
    return p;
}

ResonancePoint primary_phase_resonance(const OscillatorConfig& cfg, double f) {
    const double g = gamma_bar_checked(cfg, f);
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double s = std::sqrt(1.0 + primary_q(cfg, g));
    ResonancePoint p;
    p.kind = ResonanceKind::PhaseResonance;
    p.omega = w0 / std::sqrt(2.0) * std::sqrt(1.0 + s);
    p.amplitude = std::sqrt(g * g / (2.0 * z * z * std::pow(w0, 4) * (s + 1.0)));
    p.phase_lag = kPi / 2.0;
    return p;
}

double primary_resonance_gap(const OscillatorConfig& cfg, double f) {
    const double g = gamma_bar_checked(cfg, f);
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double q = primary_q(cfg, g);
    const double a = 1.0 - z * z;
    return w0 / std::sqrt(2.0) *
           (std::sqrt(1.0 + std::sqrt(1.0 + q)) - std::sqrt(1.0 - 3.0 * z * z + std::sqrt(a * a + q)));
}

PrimaryResonanceResult primary_resonance(const OscillatorConfig& cfg, double f) {
    const auto a = primary_amplitude_resonance(cfg, f);
    const auto p = primary_phase_resonance(cfg, f);
    return {a.omega, p.omega, a.amplitude, p.amplitude, a.phase_lag, primary_resonance_gap(cfg, f)};
}

ResonancePoint multiple_scales_primary(const OscillatorConfig& cfg, double f) {
    const double g = gamma_bar_checked(cfg, f);
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    ResonancePoint p;
    p.kind = ResonanceKind::PhaseResonance;
    p.amplitude = g / (2.0 * z * w0 * w0);
    p.omega = w0 + 3.0 * cfg.alpha() * g * g / (32.0 * z * z * std::pow(w0, 5));
    p.phase_lag = kPi / 2.0;
    return p;
}

// ---------------------------------------------------------------------------
// 3:1

double super31_static_response(const OscillatorConfig& cfg, double f) {
    const double w0 = cfg.omega0();
    return 9.0 * gamma_bar_checked(cfg, f) / (8.0 * w0 * w0);
}

ResonancePoint super31_phase_resonance(const OscillatorConfig& cfg, double f) {
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double al = cfg.alpha();
    if (!(al > 0.0)) throw InvalidArgument("3:1 closed form needs a hardening nonlinearity");
    const double G = super31_static_response(cfg, f);
    const double c1 = 1728.0 / al;
    const double c2 = -144.0 * (2.0 * G * G + 4.0 * w0 * w0 / (3.0 * al));
    const double c3 = -al * al * std::pow(G, 6) / (4.0 * z * z * w0 * w0);
    ResonancePoint p;
    p.kind = ResonanceKind::PhaseResonance;
    p.harmonic_index = 3;
    p.omega = quadratic_root_omega(c1, c2, c3);
    p.amplitude = al * G * G * G / (24.0 * z * w0 * p.omega);
    p.phase_lag = kPi / 2.0;
    return p;
}

ResonancePoint super31_amplitude_resonance(const OscillatorConfig& cfg, double f) {
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double al = cfg.alpha();
    if (!(al > 0.0)) throw InvalidArgument("3:1 closed form needs a hardening nonlinearity");
    const double G = super31_static_response(cfg, f);
    const double zw2 = z * z * w0 * w0;
    const double c1 = 1728.0 / al;
    const double c2 = -144.0 * (2.0 * G * G + 4.0 * w0 * w0 / (3.0 * al) - 3.0 * zw2 / (4.0 * al));
    const double c3 = (2.0 * zw2 / (3.0 * al) - 2.0 * G * G - 4.0 * w0 * w0 / (3.0 * al)) * zw2 -
                      al * al * std::pow(G, 6) / (4.0 * zw2);
    ResonancePoint p;
    p.kind = ResonanceKind::AmplitudeResonance;
    p.harmonic_index = 3;
    p.omega = quadratic_root_omega(c1, c2, c3);
    p.amplitude = al * G * G * G / (2.0 * z * w0 * std::sqrt(zw2 + 144.0 * p.omega * p.omega));
    p.phase_lag = std::atan(12.0 * p.omega / (z * w0));
    return p;
}

// ---------------------------------------------------------------------------
// 1:3

std::array<LocusPoint, 2> sub13_phase_locus(const OscillatorConfig& cfg, double omega_p) {
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double al = cfg.alpha();
    const double W = omega_p * omega_p / 9.0 - w0 * w0;
    const double d = 32.0 / 9.0 * z * z * w0 * w0 * omega_p * omega_p;
    const auto gs = locus_gammas(w0, omega_p, al, 3.0, W, d);
    std::array<LocusPoint, 2> out;
    for (int i = 0; i < 2; ++i) {
        const double G = std::abs(gs[i] / (w0 * w0 - omega_p * omega_p));
        out[i] = {omega_p, gs[i], 8.0 * z * w0 * omega_p / (9.0 * al * G),
                  i == 0 ? RootSign::Minus : RootSign::Plus};
    }
    return out;
}

std::array<LocusPoint, 2> sub13_amplitude_locus(const OscillatorConfig& cfg, double omega_a) {
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double al = cfg.alpha();
    const double zw2 = z * z * w0 * w0;
    const double W = omega_a * omega_a / 9.0 - w0 * w0;
    const double S = 1521.0 * zw2 + 16.0 * omega_a * omega_a;
    const double B = 2.0 * W + 13.0 * zw2;
    const auto gs = locus_gammas(w0, omega_a, al, 6.0, B, 8.0 / 9.0 * zw2 * S);
    std::array<LocusPoint, 2> out;
    for (int i = 0; i < 2; ++i) {
        const double G = std::abs(gs[i] / (w0 * w0 - omega_a * omega_a));
        out[i] = {omega_a, gs[i], 2.0 * z * w0 / (9.0 * al * G) * std::sqrt(S),
                  i == 0 ? RootSign::Minus : RootSign::Plus};
    }
    return out;
}

double sub13_amplitude_phase_lag(const OscillatorConfig& cfg, double omega_a) {
    const double z = zeta_checked(cfg);
    // 3 phi in (pi, 3pi/2) so that sin 3phi < 0 with Gamma < 0 gives r > 0.
    return (std::atan(4.0 * omega_a / (39.0 * z * cfg.omega0())) + kPi) / 3.0;
}

// ---------------------------------------------------------------------------
// 1:2

std::array<LocusPoint, 2> sub12_phase_locus(const OscillatorConfig& cfg, double omega_p) {
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double al = cfg.alpha();
    const double W = omega_p * omega_p / 4.0 - w0 * w0;
    const double d = 12.0 / 11.0 * z * w0 * std::pow(omega_p, 3);
    const auto gs = locus_gammas(w0, omega_p, al, 3.0, W, d);
    std::array<LocusPoint, 2> out;
    for (int i = 0; i < 2; ++i) {
        const double G = gs[i] / (w0 * w0 - omega_p * omega_p);
        out[i] = {omega_p, gs[i],
                  std::sqrt(8.0 * z * w0 * std::pow(omega_p, 3) / (33.0 * al * al * G * G)),
                  i == 0 ? RootSign::Minus : RootSign::Plus};
    }
    return out;
}

double sub12_existence_margin(const OscillatorConfig& cfg, double f, double omega) {
    const double z = cfg.zeta_bar();
    const double w0 = cfg.omega0();
    const double al = cfg.alpha();
    const double G = gamma_capital(omega, cfg, f);
    if (G == 0.0) return -std::numeric_limits<double>::infinity();
    const double W = omega * omega / 4.0 - w0 * w0;
    return 4.0 * W / (3.0 * al) - 2.0 * G * G -
           8.0 * z * w0 * std::pow(omega, 3) / (33.0 * al * al * G * G);
}

std::optional<ExistenceWindow> sub12_existence_window(const OscillatorConfig& cfg, double f,
                                                      double omega_lo, double omega_hi,
                                                      int n_scan) {
    if (!(omega_hi > omega_lo) || n_scan < 2)
        throw InvalidArgument("existence scan needs omega_lo < omega_hi and n_scan >= 2");
    auto margin = [&](double w) { return sub12_existence_margin(cfg, f, w); };
    auto refine = [&](double a, double b) {
        // invariant: margin(a) and margin(b) have opposite signs
        const bool a_in = margin(a) >= 0.0;
        for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
            const double m = 0.5 * (a + b);
            ((margin(m) >= 0.0) == a_in ? a : b) = m;
        }
        return 0.5 * (a + b);
    };

    std::optional<ExistenceWindow> best;
    double prev_w = omega_lo;
    bool prev_in = margin(prev_w) >= 0.0;
    double start = prev_in ? omega_lo : 0.0;
    auto close = [&](double end) {
        if (!best || end - start > best->omega_sup - best->omega_inf) best = ExistenceWindow{start, end};
    };
    for (int i = 1; i <= n_scan; ++i) {
        const double w = omega_lo + (omega_hi - omega_lo) * i / n_scan;
        const bool in = margin(w) >= 0.0;
        if (in && !prev_in) start = refine(prev_w, w);
        if (!in && prev_in) close(refine(prev_w, w));
        prev_w = w;
        prev_in = in;
    }
    if (prev_in) close(omega_hi);
    return best;
}

// ---------------------------------------------------------------------------
// 5:1

bool super51_existence(const OscillatorConfig& cfg, double f, double omega) {
    const double z = zeta_checked(cfg);
    const double w0 = cfg.omega0();
    const double al = cfg.alpha();
    const double G = gamma_capital(omega, cfg, f);
    const double mid = 4.0 * (25.0 * omega * omega - w0 * w0) / (3.0 * al);
    const double lo = 2.0 * G * G;
    const double hi = std::pow(3.0 * al * al * std::pow(G, 5) / (2560.0 * z * w0 * std::pow(omega, 3)), 2) + lo;
    return lo <= mid && mid <= hi && mid > 0.0;
}

// ---------------------------------------------------------------------------

std::vector<LocusPoint> locus_points_at_forcing(const ResonanceId& res, const OscillatorConfig& cfg,
                                                double f, double omega_lo, double omega_hi,
                                                int n_scan) {
    using Locus = std::array<LocusPoint, 2> (*)(const OscillatorConfig&, double);
    Locus locus = nullptr;
    if (res == ResonanceId(1, 3)) locus = &sub13_phase_locus;
    else if (res == ResonanceId(1, 2)) locus = &sub12_phase_locus;
    else throw UnsupportedFamily("no quadrature locus for " + res.to_string());

    const double g = gamma_bar_checked(cfg, f);
    std::vector<LocusPoint> out;
    for (int sign = 0; sign < 2; ++sign) {
        // NaN marks frequencies below the fold of the locus.
        auto h = [&](double w) {
            try {
                return locus(cfg, w)[sign].forcing_gamma_bar - g;
            } catch (const BelowFoldPoint&) {
                return std::numeric_limits<double>::quiet_NaN();
            }
        };
        double wp = omega_lo;
        double hp = h(wp);
        for (int i = 1; i <= n_scan; ++i) {
            const double w = omega_lo + (omega_hi - omega_lo) * i / n_scan;
            const double hw = h(w);
            if (std::isfinite(hp) && std::isfinite(hw) && (hp < 0.0) != (hw < 0.0)) {
                double a = wp, b = w, ha = hp;
                for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                    const double m = 0.5 * (a + b);
                    const double hm = h(m);
                    if ((hm < 0.0) == (ha < 0.0)) {
                        a = m;
                        ha = hm;
                    } else {
                        b = m;
                    }
                }
                out.push_back(locus(cfg, 0.5 * (a + b))[sign]);
            }
            wp = w;
            hp = hw;
        }
    }
    return out;
}

}  // namespace phaseres::closed_form
