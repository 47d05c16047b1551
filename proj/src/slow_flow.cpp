#include "phaseres/slow_flow.hpp"

#include "phaseres/closed_form.hpp"
#include "phaseres/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

namespace phaseres::slow_flow {

std::string Rational::text() const { return std::to_string(num) + "/" + std::to_string(den); }

namespace {

struct FamilySpec {
    int k, nu, order;
    bool flow;
    bool trivial_root;
    Rational coupling;
    int harmonic;  // m in the sin(m phi) coupling term
};

// Coupling constants as printed for the higher-order families.
constexpr FamilySpec kFamilies[] = {
    {1, 1, 1, true, false, {1, 1}, 1},
    {3, 1, 1, true, false, {1, 24}, 1},
    {1, 3, 1, true, true, {9, 8}, 3},
    {1, 2, 2, true, true, {33, 4}, 4},
    {1, 5, 2, false, true, {1875, 128}, 5},
    {1, 4, 4, false, true, {1665, 1}, 8},
    {5, 1, 2, false, false, {3, 1280}, 1},
    {2, 1, 2, false, true, {21, 640}, 2},
    {2, 3, 4, false, true, {297257881995LL, 282591232LL}, 6},
    {3, 2, 4, false, true, {1973735, 22289904}, 4},
};

const FamilySpec* find_family(const ResonanceId& r) {
    for (const auto& f : kFamilies)
        if (f.k == r.k() && f.nu == r.nu()) return &f;
    return nullptr;
}

using Vec3 = Eigen::Vector3d;

Vec3 pack(const SlowFlowState& s, double omega) { return {s.r, s.phi, omega}; }

}  // namespace

// ---------------------------------------------------------------------------

SlowFlowSystem::SlowFlowSystem(ResonanceId res, Options opts) : res_(res), opts_(opts) {
    const FamilySpec* spec = find_family(res);
    if (!spec) throw UnsupportedFamily("no slow flow for resonance " + res.to_string());
    order_ = spec->order;
    has_flow_ = spec->flow;
    trivial_root_ = spec->trivial_root;
    coupling_ = spec->coupling;
    harmonic_ = spec->harmonic;
}

double SlowFlowSystem::gamma(double omega, const OscillatorConfig& cfg, double f) const {
    if (res_ == ResonanceId(1, 1)) return 0.0;
    const double w = opts_.freeze_gamma ? res_.nominal_frequency(cfg.omega0()) : omega;
    return gamma_capital(w, cfg, f);
}

double SlowFlowSystem::detuning(double omega, const OscillatorConfig& cfg) const {
    const double wk = res_.response_frequency(omega);
    const double w0 = cfg.omega0();
    return wk * wk - w0 * w0;
}

double SlowFlowSystem::phase_period() const {
    return (res_.both_odd() ? kTwoPi : kPi) / res_.nu();
}

double SlowFlowSystem::canonical_phase(double phi) const {
    const double p = phase_period();
    double w = std::fmod(phi, p);
    if (w < 0.0) w += p;
    if (w >= p) w -= p;
    return w;
}

std::array<double, 2> SlowFlowSystem::rates(const SlowFlowState& s, double omega,
                                            const OscillatorConfig& cfg, double f) const {
    if (!has_flow_)
        throw UnsupportedFamily("resonance " + res_.to_string() +
                                " is only available as steady-state relations");
    const double zw = cfg.zeta_bar() * cfg.omega0();
    const double al = cfg.alpha();
    const double g = f / cfg.mass;
    const double W = detuning(omega, cfg);
    const double r = s.r;
    const double phi = s.phi;

    if (res_ == ResonanceId(1, 1)) {
        const double dr = -zw * r + g / (2.0 * omega) * std::sin(phi);
        const double dphi =
            -(1.0 / omega) * ((3.0 * al * r * r - 4.0 * W) / 8.0 - g / (2.0 * r) * std::cos(phi));
        return {dr, dphi};
    }
    const double G = gamma(omega, cfg, f);
    const double big = al * (3.0 * r * r + 6.0 * G * G) - 4.0 * W;
    if (res_ == ResonanceId(3, 1)) {
        const double c = al * G * G * G / (24.0 * omega);
        return {-zw * r + c * std::sin(phi), -big / (24.0 * omega) + c / r * std::cos(phi)};
    }
    if (res_ == ResonanceId(1, 3)) {
        const double c = 9.0 * al * G / (8.0 * omega);
        return {-zw * r + c * r * r * std::sin(3.0 * phi),
                -3.0 * big / (8.0 * omega) + c * r * std::cos(3.0 * phi)};
    }
    // 1:2, second order
    const double w3 = omega * omega * omega;
    const double c = 33.0 * al * al * G * G / (4.0 * w3);
    const double dr = -zw * r - 0.5 * c * r * r * r * std::sin(4.0 * phi);
    double dphi = -big / (4.0 * omega);
    if (!opts_.truncate_12) {
        const double r2 = r * r;
        const double R = (2.0 * W * W / w3 - 6.0 * al * G * G * W / w3 - 51.0 * al * al * G * G / (10.0 * w3)) * r2 -
                         (6.0 * al * W / w3 + c) * r2 * r2 + 51.0 * al * al / (16.0 * w3) * r2 * r2 * r2;
        dphi += 0.5 * (R - c * r2 * std::cos(4.0 * phi));
    }
    return {dr, dphi};
}

std::array<double, 2> SlowFlowSystem::reduced_residual(const SlowFlowState& s, double omega,
                                                       const OscillatorConfig& cfg,
                                                       double f) const {
    const double r = s.r;
    if (has_flow_) {
        const auto d = rates(s, omega, cfg, f);
        if (trivial_root_) return {d[0] / r, d[1]};
        return {d[0], r * d[1]};
    }
    const long double zw = cfg.zeta_bar() * cfg.omega0();
    const long double al = cfg.alpha();
    const long double G = gamma(omega, cfg, f);
    const long double w = omega;
    const long double C = coupling_.value();
    const long double lr = r;
    const long double sec = 3.0L * lr * lr + 6.0L * G * G - 4.0L * detuning(omega, cfg) / al;
    long double first = 0.0L;
    const int k = res_.k(), nu = res_.nu();
    if (k == 1 && nu == 5) {
        first = 2.0L * zw + C * al * al * G / (w * w * w) * lr * lr * lr * std::sin(5.0L * s.phi);
    } else if (k == 1 && nu == 4) {
        first = zw + C * std::pow(al, 4) * G * G / std::pow(w, 6) * std::pow(lr, 6) *
                         std::sin(8.0L * s.phi);
    } else if (k == 5 && nu == 1) {
        first = 2.0L * zw * lr - C * al * al * std::pow(G, 5) / (w * w * w) * std::sin((long double)s.phi);
    } else if (k == 2 && nu == 1) {
        first = 2.0L * zw + C * al * al * std::pow(G, 4) / (w * w * w) * std::sin(2.0L * s.phi);
    } else if (k == 2 && nu == 3) {
        first = 24.0L * zw + C * std::pow(al, 4) * std::pow(G, 4) / std::pow(w, 7) * std::pow(lr, 4) *
                                 std::sin(6.0L * s.phi);
    } else {  // 3:2
        first = 24.0L * zw + C * std::pow(al, 4) * std::pow(G, 6) / std::pow(w, 7) * lr * lr *
                                 std::sin(4.0L * s.phi);
    }
    return {static_cast<double>(first), static_cast<double>(sec)};
}

std::array<double, 2> SlowFlowSystem::residual(const SlowFlowState& s, double omega,
                                               const OscillatorConfig& cfg, double f) const {
    if (has_flow_) {
        if (trivial_root_ && s.r == 0.0) return {0.0, 0.0};
        const auto d = rates(s, omega, cfg, f);
        return {d[0], s.r * d[1]};
    }
    if (s.r == 0.0) {
        if (trivial_root_) return {0.0, 0.0};
        // 5:1 is forced directly through Gamma^5
        const auto red = reduced_residual(s, omega, cfg, f);
        return {red[0], 0.0};
    }
    const auto red = reduced_residual(s, omega, cfg, f);
    return {trivial_root_ ? s.r * red[0] : red[0], s.r * red[1]};
}

double correction_ratio(const SlowFlowSystem& sys, const SlowFlowState& s, double omega,
                        const OscillatorConfig& cfg, double f) {
    if (!(sys.resonance() == ResonanceId(1, 2)) || sys.options().truncate_12) return 0.0;
    const double al = cfg.alpha();
    const double G = sys.gamma(omega, cfg, f);
    const double W = sys.detuning(omega, cfg);
    const double lead = -(al * (3.0 * s.r * s.r + 6.0 * G * G) - 4.0 * W) / (4.0 * omega);
    const double scale = (al * (3.0 * s.r * s.r + 6.0 * G * G) + 4.0 * std::abs(W)) / (4.0 * omega);
    const double full = sys.rates(s, omega, cfg, f)[1];
    return scale > 0.0 ? std::abs(full - lead) / scale : 0.0;
}

std::vector<SlowFlowState> relation_seeds(const SlowFlowSystem& sys, double omega,
                                          const OscillatorConfig& cfg, double f) {
    if (sys.has_flow()) return {};
    double r0 = 0.0;
    try {
        r0 = r0_approximation(sys.resonance(), omega, cfg, f).r0;
    } catch (const Error&) {
        return {};
    }
    if (!(r0 > 0.0)) return {};
    // first relation is a + b sin(m phi) at fixed r
    const int m = sys.coupling_harmonic();
    const double p = sys.reduced_residual({r0, kPi / (2.0 * m)}, omega, cfg, f)[0];
    const double q = sys.reduced_residual({r0, 3.0 * kPi / (2.0 * m)}, omega, cfg, f)[0];
    const double a = 0.5 * (p + q), b = 0.5 * (p - q);
    if (b == 0.0 || std::abs(a) > std::abs(b)) return {};
    const double s = std::asin(-a / b);
    std::vector<SlowFlowState> out;
    for (int j = 0; j < m; ++j) {
        out.push_back({r0, wrap_two_pi((s + kTwoPi * j) / m)});
        out.push_back({r0, wrap_two_pi((kPi - s + kTwoPi * j) / m)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stability

std::array<std::complex<double>, 2> stability_eigenvalues(const SlowFlowSystem& sys,
                                                          const SlowFlowState& s, double omega,
                                                          const OscillatorConfig& cfg, double f) {
    Eigen::Matrix2d J;
    if (s.r > 1e-6) {
        const double h = std::max(1e-7, 1e-7 * std::abs(s.r));
        for (int j = 0; j < 2; ++j) {
            SlowFlowState p = s, m = s;
            (j == 0 ? p.r : p.phi) += h;
            (j == 0 ? m.r : m.phi) -= h;
            const auto fp = sys.rates(p, omega, cfg, f);
            const auto fm = sys.rates(m, omega, cfg, f);
            J(0, j) = (fp[0] - fm[0]) / (2.0 * h);
            J(1, j) = (fp[1] - fm[1]) / (2.0 * h);
        }
    } else {
        // Cartesian (u, v): the polar phase equation is singular at r = 0.
        auto field = [&](double u, double v) -> Eigen::Vector2d {
            const SlowFlowState q = SlowFlowState::from_uv(u, v);
            const auto res = sys.residual(q, omega, cfg, f);  // (r', r phi')
            const double sp = std::sin(q.phi), cp = std::cos(q.phi);
            return {-res[0] * sp - res[1] * cp, -res[0] * cp + res[1] * sp};
        };
        const auto [u0, v0] = s.to_uv();
        const double h = 1e-7;
        for (int j = 0; j < 2; ++j) {
            const Eigen::Vector2d fp = field(u0 + (j == 0 ? h : 0.0), v0 + (j == 1 ? h : 0.0));
            const Eigen::Vector2d fm = field(u0 - (j == 0 ? h : 0.0), v0 - (j == 1 ? h : 0.0));
            J.col(j) = (fp - fm) / (2.0 * h);
        }
    }
    const double tr = J.trace();
    const double det = J.determinant();
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det));
    return {tr / 2.0 + disc, tr / 2.0 - disc};
}

// ---------------------------------------------------------------------------
// Newton

namespace {

Eigen::Vector2d eval_reduced(const SlowFlowSystem& sys, const SlowFlowState& s, double omega,
                             const OscillatorConfig& cfg, double f) {
    const auto r = sys.reduced_residual(s, omega, cfg, f);
    return {r[0], r[1]};
}

SlowFlowState normalized(SlowFlowState s) {
    if (s.r < 0.0) {
        s.r = -s.r;
        s.phi += kPi;
    }
    s.phi = wrap_two_pi(s.phi);
    return s;
}

SteadyState classify(const SlowFlowSystem& sys, SlowFlowState s, double omega,
                     const OscillatorConfig& cfg, double f) {
    SteadyState out;
    out.state = normalized(s);
    out.omega = omega;
    out.residual_norm = eval_reduced(sys, out.state, omega, cfg, f).norm();
    if (sys.has_flow()) {
        const auto ev = stability_eigenvalues(sys, out.state, omega, cfg, f);
        out.eigenvalues = ev;
        out.stable = ev[0].real() < 0.0 && ev[1].real() < 0.0;
    }
    return out;
}

// 2x3 Jacobian of the reduced residual in (r, phi, omega).
Eigen::Matrix<double, 2, 3> jacobian3(const SlowFlowSystem& sys, const Vec3& y,
                                      const OscillatorConfig& cfg, double f) {
    Eigen::Matrix<double, 2, 3> J;
    for (int j = 0; j < 3; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(y(j)));
        Vec3 p = y, m = y;
        p(j) += h;
        m(j) -= h;
        const Eigen::Vector2d fp = eval_reduced(sys, {p(0), p(1)}, p(2), cfg, f);
        const Eigen::Vector2d fm = eval_reduced(sys, {m(0), m(1)}, m(2), cfg, f);
        J.col(j) = (fp - fm) / (2.0 * h);
    }
    return J;
}

}  // namespace

std::optional<SteadyState> solve_steady_state(const SlowFlowSystem& sys, SlowFlowState seed,
                                              double omega, const OscillatorConfig& cfg, double f,
                                              const NewtonSettings& ns) {
    SlowFlowState s = seed;
    Eigen::Vector2d F = eval_reduced(sys, s, omega, cfg, f);
    if (!F.allFinite()) return std::nullopt;
    for (int it = 0; it < ns.max_iter; ++it) {
        if (F.norm() < ns.tol) break;
        const auto J3 = jacobian3(sys, {s.r, s.phi, omega}, cfg, f);
        const Eigen::Matrix2d J = J3.leftCols<2>();
        Eigen::Vector2d dx = J.fullPivLu().solve(-F);
        if (!dx.allFinite()) return std::nullopt;
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= ns.max_halvings; ++h, lambda *= 0.5) {
            SlowFlowState t{s.r + lambda * dx(0), s.phi + lambda * dx(1)};
            if (sys.trivial_root() && std::abs(t.r) < 1e-12) continue;
            const Eigen::Vector2d Ft = eval_reduced(sys, t, omega, cfg, f);
            if (Ft.allFinite() && Ft.norm() < F.norm()) {
                s = t;
                F = Ft;
                accepted = true;
                break;
            }
        }
        if (!accepted) return std::nullopt;
    }
    if (!(F.norm() < ns.tol)) return std::nullopt;
    if (sys.trivial_root() && std::abs(s.r) < 1e-9) return std::nullopt;
    return classify(sys, s, omega, cfg, f);
}

std::vector<SteadyState> find_steady_states(const SlowFlowSystem& sys, double omega,
                                            const OscillatorConfig& cfg, double f,
                                            const NewtonSettings& ns) {
    const double G = sys.resonance() == ResonanceId(1, 1) ? 0.0 : sys.gamma(omega, cfg, f);
    const double W = sys.detuning(omega, cfg);
    const double al = cfg.alpha();
    std::vector<double> radii;
    double base = 0.0;
    const double rad0 = al > 0.0 ? 4.0 * W / (3.0 * al) - 2.0 * G * G : -1.0;
    if (rad0 > 0.0) base = std::sqrt(rad0);
    else base = std::abs(G);
    if (sys.resonance() == ResonanceId(1, 1)) {
        // linear response magnitude as an extra scale for the small-amplitude root
        const double g = f / cfg.mass;
        const double zw = cfg.zeta_bar() * cfg.omega0();
        const double lin = g / std::hypot(W, 2.0 * zw * omega);
        for (double m : {0.5, 1.0, 2.0}) radii.push_back(m * lin);
        if (base == 0.0) base = lin;
    }
    std::vector<SlowFlowState> seeds = relation_seeds(sys, omega, cfg, f);
    if (base > 0.0)
        for (double m : {0.25, 0.5, 1.0, 2.0}) radii.push_back(m * base);
    for (double r : radii)
        for (int i = 0; i < 16; ++i) seeds.push_back({r, kTwoPi * i / 16.0});

    const double max_ratio = sys.options().max_correction_ratio;
    std::vector<SteadyState> roots;
    for (const auto& seed : seeds) {
        {
            auto sol = solve_steady_state(sys, seed, omega, cfg, f, ns);
            if (!sol) continue;
            if (max_ratio > 0.0 && correction_ratio(sys, sol->state, omega, cfg, f) > max_ratio)
                continue;
            const double cp = sys.canonical_phase(sol->state.phi);
            bool dup = false;
            for (const auto& q : roots) {
                const double dphi = std::abs(cp - sys.canonical_phase(q.state.phi));
                const double dwrap = std::min(dphi, sys.phase_period() - dphi);
                if (std::abs(q.state.r - sol->state.r) < ns.merge_tol && dwrap < ns.merge_tol) {
                    dup = true;
                    break;
                }
            }
            if (!dup) {
                sol->state.phi = cp;
                roots.push_back(*sol);
            }
        }
    }
    std::sort(roots.begin(), roots.end(),
              [](const SteadyState& a, const SteadyState& b) { return a.state.r < b.state.r; });
    return roots;
}

// ---------------------------------------------------------------------------
// Continuation

namespace {

Vec3 tangent(const Eigen::Matrix<double, 2, 3>& J) {
    Vec3 t = J.row(0).transpose().cross(J.row(1).transpose());
    return t / t.norm();
}

// Solve F(y) = 0 with t.(y - yp) = 0.
std::optional<Vec3> correct(const SlowFlowSystem& sys, Vec3 y, const Vec3& yp, const Vec3& t,
                            const OscillatorConfig& cfg, double f, int& iters) {
    for (iters = 0; iters < 12; ++iters) {
        const Eigen::Vector2d F = eval_reduced(sys, {y(0), y(1)}, y(2), cfg, f);
        const double c = t.dot(y - yp);
        if (!F.allFinite()) return std::nullopt;
        if (F.norm() < 1e-10 && std::abs(c) < 1e-12) return y;
        Eigen::Matrix3d A;
        A.topRows<2>() = jacobian3(sys, y, cfg, f);
        A.row(2) = t.transpose();
        Eigen::Vector3d rhs;
        rhs << -F, -c;
        const Vec3 dy = A.fullPivLu().solve(rhs);
        if (!dy.allFinite()) return std::nullopt;
        y += dy;
    }
    const Eigen::Vector2d F = eval_reduced(sys, {y(0), y(1)}, y(2), cfg, f);
    if (F.allFinite() && F.norm() < 1e-9) return y;
    return std::nullopt;
}

// Distance between two continuation states after mapping (r, phi) onto the
// same physical representative.
double physical_distance(const SlowFlowSystem& sys, const Vec3& a, const Vec3& b) {
    auto norm = [&](const Vec3& y) {
        SlowFlowState s = normalized({y(0), y(1)});
        return Vec3(s.r, sys.canonical_phase(s.phi), y(2));
    };
    Vec3 d = norm(a) - norm(b);
    const double P = sys.phase_period();
    d(1) = std::fmod(std::abs(d(1)), P);
    d(1) = std::min(d(1), P - d(1));
    return d.norm();
}

}  // namespace

Branch continue_from(const SlowFlowSystem& sys, const SteadyState& start, int direction,
                     double omega_min, double omega_max, const OscillatorConfig& cfg, double f,
                     const StepControl& step) {
    Branch br;
    Vec3 y = pack(start.state, start.omega);
    br.points.push_back(classify(sys, start.state, start.omega, cfg, f));
    Vec3 t = tangent(jacobian3(sys, y, cfg, f));
    if (t(2) * direction < 0.0) t = -t;
    const Vec3 y0 = y;
    double h = step.initial;
    const double max_ratio = sys.options().max_correction_ratio;
    double travelled = 0.0;
    bool left_start = false;

    while (static_cast<int>(br.points.size()) < step.max_points) {
        const Vec3 yp = y + h * t;
        int iters = 0;
        auto yc = correct(sys, yp, yp, t, cfg, f, iters);
        if (!yc || (sys.trivial_root() && std::abs((*yc)(0)) < 1e-9) ||
            (*yc - y).norm() > 2.0 * h) {
            h *= 0.5;
            if (h < step.min) break;
            continue;
        }
        Vec3 tn = tangent(jacobian3(sys, *yc, cfg, f));
        if (tn.dot(t) < 0.0) tn = -tn;
        travelled += (*yc - y).norm();
        y = *yc;
        t = tn;
        if (y(2) < omega_min || y(2) > omega_max) break;
        if (max_ratio > 0.0 && correction_ratio(sys, {y(0), y(1)}, y(2), cfg, f) > max_ratio) break;
        br.points.push_back(classify(sys, {y(0), y(1)}, y(2), cfg, f));

        const double d0 = physical_distance(sys, y, y0);
        if (d0 > 4.0 * step.max) left_start = true;
        if (left_start && d0 < 1.5 * h && travelled > 8.0 * step.max) {
            br.closed = true;
            br.points.push_back(br.points.front());
            break;
        }
        if (iters < step.fast_iterations) h = std::min(h * step.grow, step.max);
    }
    return br;
}

Branch sweep_branch(const SlowFlowSystem& sys, double omega_min, double omega_max,
                    const OscillatorConfig& cfg, double f, const StepControl& step) {
    if (!(omega_max > omega_min)) throw InvalidArgument("sweep needs omega_min < omega_max");
    std::optional<SteadyState> seed;
    const auto& res = sys.resonance();
    const bool isola = res == ResonanceId(1, 3) || res == ResonanceId(1, 2);
    if (isola) {
        std::vector<closed_form::LocusPoint> pts;
        try {
            pts = closed_form::locus_points_at_forcing(res, cfg, f, omega_min, omega_max);
        } catch (const Error&) {
        }
        const double target = resonant_phase_lag(res);
        const double max_ratio = sys.options().max_correction_ratio;
        for (const auto& p : pts) {
            seed = solve_steady_state(sys, {p.amplitude, target}, p.omega_p, cfg, f);
            if (seed && max_ratio > 0.0 &&
                correction_ratio(sys, seed->state, seed->omega, cfg, f) > max_ratio)
                seed.reset();
            if (seed) break;
        }
    }
    if (!seed && !sys.has_flow()) {
        // existence windows of these families can be very narrow
        const int n = 200000;
        for (int i = 0; i <= n && !seed; ++i) {
            const double w = omega_min + (omega_max - omega_min) * i / n;
            try {
                for (const auto& s : relation_seeds(sys, w, cfg, f)) {
                    seed = solve_steady_state(sys, s, w, cfg, f);
                    if (seed) break;
                }
            } catch (const SingularFrequency&) {
            }
        }
    }
    if (!seed) {
        const int n = 400;
        for (int i = 0; i <= n && !seed; ++i) {
            const double w = omega_min + (omega_max - omega_min) * i / n;
            try {
                auto roots = find_steady_states(sys, w, cfg, f);
                if (!roots.empty()) seed = roots.back();
            } catch (const SingularFrequency&) {
            }
        }
    }
    if (!seed) throw SeedNotFound("no " + res.to_string() + " steady state in [" +
                                  std::to_string(omega_min) + ", " + std::to_string(omega_max) + "]");

    Branch fwd = continue_from(sys, *seed, +1, omega_min, omega_max, cfg, f, step);
    if (fwd.closed) return fwd;
    Branch back = continue_from(sys, *seed, -1, omega_min, omega_max, cfg, f, step);
    Branch out;
    out.points.assign(back.points.rbegin(), back.points.rend());
    out.points.insert(out.points.end(), fwd.points.begin() + 1, fwd.points.end());
    return out;
}

// ---------------------------------------------------------------------------
// Refinement on a branch

namespace {

// Unwrapped copy of the branch in (r, phi, omega).
std::vector<Vec3> unwrap(const Branch& b) {
    std::vector<Vec3> ys;
    for (const auto& p : b.points) {
        Vec3 y = pack(p.state, p.omega);
        if (!ys.empty()) y(1) = ys.back()(1) + wrap_pi(y(1) - ys.back()(1));
        ys.push_back(y);
    }
    return ys;
}

}  // namespace

SteadyState refine_branch_maximum(const SlowFlowSystem& sys, const Branch& branch,
                                  const OscillatorConfig& cfg, double f) {
    if (branch.points.empty()) throw InvalidArgument("empty branch");
    const auto ys = unwrap(branch);
    std::size_t im = 0;
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i](0) > ys[im](0)) im = i;
    if (im == 0 || im + 1 >= ys.size()) return branch.points[im];

    // Golden-section search on the offset s of the hyperplane t.(y - y_im) = s.
    const Vec3 base = ys[im];
    const Vec3 t = tangent(jacobian3(sys, base, cfg, f));
    double a = t.dot(ys[im - 1] - base), b = t.dot(ys[im + 1] - base);
    if (a > b) std::swap(a, b);
    auto point_at = [&](double s) -> std::optional<Vec3> {
        int it = 0;
        const Vec3 yp = base + s * t;
        return correct(sys, yp, yp, t, cfg, f, it);
    };
    auto r_at = [&](double s) {
        auto y = point_at(s);
        return y ? (*y)(0) : -1.0;
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = r_at(c), fd = r_at(d);
    for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = r_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = r_at(d);
        }
    }
    auto y = point_at(0.5 * (a + b));
    if (!y) return branch.points[im];
    return classify(sys, {(*y)(0), (*y)(1)}, (*y)(2), cfg, f);
}

std::vector<SteadyState> phase_crossings(const SlowFlowSystem& sys, const Branch& branch,
                                         double target, const OscillatorConfig& cfg, double f) {
    const double P = sys.phase_period();
    auto g = [&](double phi) { return wrap_pi((phi - target) * kTwoPi / P); };
    std::vector<SteadyState> out;
    const auto& pts = branch.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double g0 = g(pts[i - 1].state.phi), g1 = g(pts[i].state.phi);
        // sign change away from the wrap-around discontinuity
        if ((g0 < 0.0) == (g1 < 0.0) || std::abs(g0 - g1) > kPi) continue;
        // Solve F = 0 with phi fixed at the crossing member of the target family.
        const double phi_t = pts[i - 1].state.phi - g0 * P / kTwoPi;
        const double lam = g0 / (g0 - g1);
        double r = pts[i - 1].state.r + lam * (pts[i].state.r - pts[i - 1].state.r);
        double w = pts[i - 1].omega + lam * (pts[i].omega - pts[i - 1].omega);
        bool ok = false;
        for (int it = 0; it < 30; ++it) {
            const Eigen::Vector2d F = eval_reduced(sys, {r, phi_t}, w, cfg, f);
            if (!F.allFinite()) break;
            if (F.norm() < 1e-12) {
                ok = true;
                break;
            }
            const auto J = jacobian3(sys, {r, phi_t, w}, cfg, f);
            Eigen::Matrix2d A;
            A << J(0, 0), J(0, 2), J(1, 0), J(1, 2);
            const Eigen::Vector2d dx = A.fullPivLu().solve(-F);
            r += dx(0);
            w += dx(1);
            if (dx.norm() < 1e-14 * std::max(1.0, std::abs(w))) {
                ok = eval_reduced(sys, {r, phi_t}, w, cfg, f).norm() < 1e-9;
                break;
            }
        }
        if (ok) out.push_back(classify(sys, {r, phi_t}, w, cfg, f));
    }
    return out;
}

// ---------------------------------------------------------------------------

R0Approximation r0_approximation(const ResonanceId& res, double omega, const OscillatorConfig& cfg,
                                 double f) {
    const double al = cfg.alpha();
    if (!(al > 0.0)) throw InvalidArgument("r0 approximation needs alpha > 0");
    const double w0 = cfg.omega0();
    const double G = gamma_capital(omega, cfg, f);
    const double wk = res.response_frequency(omega);
    const double rad = 4.0 * (wk * wk - w0 * w0) / (3.0 * al) - 2.0 * G * G;
    if (rad < 0.0) throw NotExist("r0 radicand negative at omega = " + std::to_string(omega));
    R0Approximation out;
    out.r0 = std::sqrt(rad);
    const double k = res.k(), nu = res.nu();
    const double g = f / cfg.mass;
    const double d = w0 * w0 - omega * omega;
    out.dr0_domega = 4.0 / out.r0 * (k * k / (3.0 * nu * nu * al) - g * g / (d * d * d)) * omega;
    return out;
}

std::string family_name(const ResonanceId& res) {
    if (res.k() == 1 && res.nu() == 1) return "primary";
    if (res.nu() == 1) return "superharmonic";
    if (res.k() == 1) return "subharmonic";
    return "ultra-subharmonic";
}

}  // namespace phaseres::slow_flow
