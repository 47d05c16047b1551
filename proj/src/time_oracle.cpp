#include "phaseres/time_oracle.hpp"

#include "phaseres/errors.hpp"

#include <algorithm>
#include <cmath>

namespace phaseres::oracle {

namespace {

struct Rhs {
    double w02;
    double damp;
    double alpha;
    double gamma;

    [[nodiscard]] double accel(double x, double v, double s) const {
        return gamma * s - damp * v - w02 * x - alpha * x * x * x;
    }
};

Rhs make_rhs(const OscillatorConfig& cfg, const Forcing& forcing) {
    const double w0 = cfg.omega0();
    return {w0 * w0, 2.0 * cfg.zeta_bar() * w0, cfg.alpha(), forcing.gamma_bar};
}

/// sin(omega t) on the half-step grid of one forcing period.
std::vector<double> forcing_table(int steps_per_period) {
    std::vector<double> s(static_cast<std::size_t>(2 * steps_per_period + 1));
    for (int i = 0; i <= 2 * steps_per_period; ++i)
        s[static_cast<std::size_t>(i)] = std::sin(kPi * i / steps_per_period);
    return s;
}

/// One RK4 step from grid index i within the forcing period.
inline State rk4_step(const Rhs& f, const std::vector<double>& table, int i, double h, State s) {
    const double s0 = table[static_cast<std::size_t>(2 * i)];
    const double s1 = table[static_cast<std::size_t>(2 * i + 1)];
    const double s2 = table[static_cast<std::size_t>(2 * i + 2)];
    const double k1x = s.v;
    const double k1v = f.accel(s.x, s.v, s0);
    const double k2x = s.v + 0.5 * h * k1v;
    const double k2v = f.accel(s.x + 0.5 * h * k1x, k2x, s1);
    const double k3x = s.v + 0.5 * h * k2v;
    const double k3v = f.accel(s.x + 0.5 * h * k2x, k3x, s1);
    const double k4x = s.v + h * k3v;
    const double k4v = f.accel(s.x + h * k3x, k4x, s2);
    return {s.x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            s.v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

void check_inputs(const Forcing& forcing, int steps_per_period, long n_periods) {
    if (steps_per_period < 200) throw InvalidArgument("steps_per_period must be at least 200");
    if (n_periods < 0) throw InvalidArgument("number of periods must be non-negative");
    if (!(forcing.omega > 0.0)) throw InvalidArgument("excitation frequency must be positive");
}

}  // namespace

Trajectory integrate(const OscillatorConfig& cfg, const Forcing& forcing, double x0, double v0,
                     int n_periods, int steps_per_period, double t0) {
    check_inputs(forcing, steps_per_period, n_periods);
    const Rhs f = make_rhs(cfg, forcing);
    const auto table = forcing_table(steps_per_period);
    const double h = forcing.period() / steps_per_period;

    Trajectory traj;
    traj.time_step = h;
    traj.steps_per_period = steps_per_period;
    traj.t0 = t0;
    traj.forcing = forcing;
    const auto total = static_cast<std::size_t>(n_periods) * static_cast<std::size_t>(steps_per_period);
    traj.x.reserve(total + 1);
    traj.v.reserve(total + 1);
    State s{x0, v0};
    traj.x.push_back(s.x);
    traj.v.push_back(s.v);
    for (int p = 0; p < n_periods; ++p) {
        for (int i = 0; i < steps_per_period; ++i) {
            s = rk4_step(f, table, i, h, s);
            traj.x.push_back(s.x);
            traj.v.push_back(s.v);
        }
        if (!std::isfinite(s.x) || !std::isfinite(s.v) || std::abs(s.x) > 1e150)
            throw NonFinite("state overflow during time integration");
    }
    return traj;
}

State advance(const OscillatorConfig& cfg, const Forcing& forcing, State s, long n_periods,
              int steps_per_period, double /*t0*/) {
    check_inputs(forcing, steps_per_period, n_periods);
    const Rhs f = make_rhs(cfg, forcing);
    const auto table = forcing_table(steps_per_period);
    const double h = forcing.period() / steps_per_period;
    for (long p = 0; p < n_periods; ++p) {
        for (int i = 0; i < steps_per_period; ++i) s = rk4_step(f, table, i, h, s);
        if (!std::isfinite(s.x) || !std::isfinite(s.v) || std::abs(s.x) > 1e150)
            throw NonFinite("state overflow during time integration");
    }
    return s;
}

namespace {

/// Projection of samples [first, first + count) onto harmonics 0..n_harm.
HarmonicSolution project(const Trajectory& traj, double base_freq, int n_harm, std::size_t first,
                         std::size_t count) {
    HarmonicSolution h(base_freq, n_harm);
    double a0 = 0.0;
    std::vector<double> c(static_cast<std::size_t>(n_harm) + 1, 0.0);
    std::vector<double> s(static_cast<std::size_t>(n_harm) + 1, 0.0);
    for (std::size_t i = first; i < first + count; ++i) {
        const double theta = base_freq * traj.time(i);
        const double x = traj.x[i];
        a0 += x;
        // harmonic multiples by rotation
        const double c1 = std::cos(theta);
        const double s1 = std::sin(theta);
        double cj = c1;
        double sj = s1;
        for (int j = 1; j <= n_harm; ++j) {
            c[static_cast<std::size_t>(j)] += x * cj;
            s[static_cast<std::size_t>(j)] += x * sj;
            const double cn = cj * c1 - sj * s1;
            sj = sj * c1 + cj * s1;
            cj = cn;
        }
    }
    const double n = static_cast<double>(count);
    h.set_a0(a0 / n);
    for (int j = 1; j <= n_harm; ++j)
        h.coeff(j) = {2.0 * c[static_cast<std::size_t>(j)] / n, 2.0 * s[static_cast<std::size_t>(j)] / n};
    return h;
}

double content(const HarmonicSolution& h) {
    double s = h.a0() * h.a0();
    for (int j = 1; j <= h.n_harmonics(); ++j) s += std::pow(h.amplitude(j), 2);
    return std::sqrt(s);
}

}  // namespace

HarmonicSolution steady_harmonics(const Trajectory& traj, double base_freq, int n_harm,
                                  int periods) {
    if (periods < 8) throw InvalidArgument("harmonic extraction needs at least 8 base periods");
    if (n_harm < 1) throw InvalidArgument("need at least one harmonic");
    if (!(base_freq > 0.0)) throw InvalidArgument("base frequency must be positive");
    const double ratio = traj.forcing.omega / base_freq;
    const long nu = std::lround(ratio);
    if (nu < 1 || std::abs(ratio - static_cast<double>(nu)) > 1e-9)
        throw InvalidArgument("base frequency must be omega / nu for an integer nu");
    const auto per_base = static_cast<std::size_t>(nu * traj.steps_per_period);
    const std::size_t need = per_base * static_cast<std::size_t>(periods);
    if (traj.size() < need + 1)
        throw InvalidArgument("trajectory is shorter than the requested number of base periods");

    // samples are anchored at the end so the window covers whole periods
    const std::size_t first = traj.size() - 1 - need;
    const HarmonicSolution out = project(traj, base_freq, n_harm, first, need);

    const HarmonicSolution last = project(traj, base_freq, n_harm, traj.size() - 1 - per_base, per_base);
    const HarmonicSolution prev =
        project(traj, base_freq, n_harm, traj.size() - 1 - 2 * per_base, per_base);
    const double a = content(last);
    const double b = content(prev);
    if (std::abs(a - b) > 1e-4 * std::max({a, b, 1e-300}))
        throw NotSettled("harmonic content still drifting: " + std::to_string(a) + " vs " +
                         std::to_string(b));
    return out;
}

long transient_periods(const OscillatorConfig& cfg, int nu) {
    const double zeta = cfg.zeta_bar();
    if (!(zeta > 0.0)) throw ZeroDamping("transient discard needs positive damping");
    auto n = static_cast<long>(std::ceil(500.0 / zeta / kTwoPi));
    return ((n + nu - 1) / nu) * nu;
}

double ode_residual_rms(const OscillatorConfig& cfg, double f, double omega,
                        const HarmonicSolution& x, int samples) {
    const double w0 = cfg.omega0();
    const double period = kTwoPi / x.base_freq();
    const double gamma = f / cfg.mass;
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = period * i / samples;
        const double xv = x.value(t);
        const double r = x.acceleration(t) + 2.0 * cfg.zeta_bar() * w0 * x.velocity(t) +
                         w0 * w0 * xv + cfg.alpha() * xv * xv * xv - gamma * std::sin(omega * t);
        acc += r * r;
    }
    return std::sqrt(acc / samples);
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Match: return "Match";
        case Verdict::Mismatch: return "Mismatch";
        case Verdict::Unreachable: return "Unreachable";
    }
    return "Mismatch";
}

double VerificationReport::max_amplitude_error() const {
    return amplitude_error.empty() ? 0.0
                                   : *std::max_element(amplitude_error.begin(), amplitude_error.end());
}

double VerificationReport::max_phase_error() const {
    return phase_error.empty() ? 0.0 : *std::max_element(phase_error.begin(), phase_error.end());
}

bool VerificationReport::consistent() const {
    if (!stable) return verdict == Verdict::Match;
    return *stable ? verdict == Verdict::Match : verdict == Verdict::Unreachable;
}

VerificationReport verify_solution(const HarmonicSolution& reference, int nu,
                                   const std::vector<int>& harmonics, const OscillatorConfig& cfg,
                                   double f, double omega, std::optional<bool> stable,
                                   const Tolerances& tol) {
    VerificationReport rep;
    rep.harmonics = harmonics;
    rep.stable = stable;
    rep.ode_residual_rms = ode_residual_rms(cfg, f, omega, reference);

    const Forcing forcing = Forcing::make(cfg, f, omega);
    const long transient = tol.transient >= 0 ? tol.transient : transient_periods(cfg, nu);
    constexpr int kExtract = 8;
    int n_harm = reference.n_harmonics();
    for (int j : harmonics) n_harm = std::max(n_harm, j);

    double scale = 0.0;
    for (int j : harmonics) scale = std::max(scale, reference.amplitude(j));
    if (scale == 0.0) scale = 1.0;

    try {
        const State s = advance(cfg, forcing, {reference.value(0.0), reference.velocity(0.0)},
                                transient, tol.steps_per_period);
        const double t_start = static_cast<double>(transient) * forcing.period();
        const Trajectory tail = integrate(cfg, forcing, s.x, s.v, kExtract * nu,
                                          tol.steps_per_period, t_start);
        rep.simulated = steady_harmonics(tail, omega / nu, n_harm, kExtract);
    } catch (const NonFinite&) {
        rep.verdict = Verdict::Unreachable;
        return rep;
    } catch (const NotSettled&) {
        rep.verdict = Verdict::Unreachable;
        return rep;
    }

    for (int j : harmonics) {
        const double a_ref = reference.amplitude(j);
        const double a_sim = rep.simulated.amplitude(j);
        rep.amplitude_error.push_back(std::abs(a_sim - a_ref) / scale);
        const bool significant = a_ref > 1e-2 * scale;
        rep.phase_error.push_back(
            significant ? std::abs(wrap_pi(rep.simulated.phase(j) - reference.phase(j))) : 0.0);
    }
    const double ea = rep.max_amplitude_error();
    const double ep = rep.max_phase_error();
    if (ea < tol.amplitude && ep < tol.phase) {
        rep.verdict = Verdict::Match;
    } else if (ea > tol.departed_amplitude || ep > tol.departed_phase) {
        rep.verdict = Verdict::Unreachable;
    } else {
        rep.verdict = Verdict::Mismatch;
    }
    return rep;
}

VerificationReport verify_point(const hb::BranchPoint& point, int nu, const OscillatorConfig& cfg,
                                double f, const Tolerances& tol) {
    std::vector<int> harmonics;
    for (int j = 1; j <= point.solution.n_harmonics(); ++j) harmonics.push_back(j);
    return verify_solution(point.solution, nu, harmonics, cfg, f, point.omega, point.stable, tol);
}

VerificationReport verify_point(const slow_flow::SteadyState& point, const ResonanceId& res,
                                const OscillatorConfig& cfg, double f, const Tolerances& tol) {
    const int k = res.k();
    const int nu = res.nu();
    HarmonicSolution h(point.omega / nu, std::max(k, nu));
    if (k != nu) h.coeff(nu).sin = gamma_capital(point.omega, cfg, f);
    h.set_polar(k, point.state.r, point.state.phi);
    std::vector<int> harmonics{k};
    if (k != nu) harmonics.push_back(nu);
    return verify_solution(h, nu, harmonics, cfg, f, point.omega, point.stable, tol);
}

}  // namespace phaseres::oracle
