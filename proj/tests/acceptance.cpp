// Acceptance checks: one PASS/FAIL line per criterion, with the measured
// numbers underneath. Exit status is non-zero when any criterion fails.

#include "phaseres/cli.hpp"
#include "phaseres/closed_form.hpp"
#include "phaseres/errors.hpp"
#include "phaseres/harmonic_balance.hpp"
#include "phaseres/time_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace phaseres;
namespace cf = phaseres::closed_form;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
};

std::string num(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

OscillatorConfig with_zeta(double zeta) {
    OscillatorConfig cfg;
    cfg.damping = 2.0 * zeta * std::sqrt(cfg.lin_stiffness * cfg.mass);
    return cfg;
}

// ---------------------------------------------------------------------------

Outcome closed_form_consistency() {
    Outcome o;
    const OscillatorConfig cfg;
    const double z = cfg.zeta_bar(), w0 = cfg.omega0();
    for (double f : {0.001, 0.005, 0.01}) {
        const auto p = cf::primary_phase_resonance(cfg, f);
        const double quad = (f / cfg.mass) / (2.0 * z * w0 * p.omega);
        const double rel = std::abs(p.amplitude - quad) / quad;
        o.check(rel < 1e-10, "f=" + num(f) + ": A_p vs gamma/(2 zeta w0 w_p) rel " + num(rel, 3));
    }
    const auto p = cf::primary_phase_resonance(cfg, 0.01);
    const double ew = std::abs(p.omega - std::sqrt(1.5));
    const double ea = std::abs(p.amplitude - std::sqrt(2.0 / 3.0));
    o.check(ew <= 1e-9, "f=0.01: |w_p - sqrt(3/2)| = " + num(ew, 3));
    o.check(ea <= 1e-9, "f=0.01: |A_p - sqrt(2/3)| = " + num(ea, 3));
    return o;
}

Outcome amplitude_phase_gap() {
    Outcome o;
    const double f = 0.01;
    std::vector<double> zetas{0.0025, 0.005, 0.01};
    std::vector<double> gaps;
    for (double z : zetas) {
        const auto cfg = with_zeta(z);
        const double d = cf::primary_resonance_gap(cfg, f);
        gaps.push_back(d);
        o.check(d > 0.0, "zeta=" + num(z) + ": delta_omega = " + num(d) + " > 0");
        o.check(d / cfg.omega0() < 10.0 * z * z,
                "zeta=" + num(z) + ": delta_omega/w0 = " + num(d / cfg.omega0()) + " < 10 zeta^2 = " +
                    num(10 * z * z));
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        const double r = gaps[i] / gaps[i - 1];
        o.check(r >= 3.0 && r <= 5.0,
                "delta(" + num(zetas[i]) + ")/delta(" + num(zetas[i - 1]) + ") = " + num(r) + " in [3, 5]");
    }
    return o;
}

Outcome primary_cross_solver() {
    Outcome o;
    const OscillatorConfig cfg;
    const double f = 0.01;
    const hb::HBProblem p{cfg, f, ResonanceId(1, 1), 15, 128};
    const auto b = hb::continue_branch(p, 0.8, 0.8, 1.6);
    const auto peak = hb::branch_maximum(p, b, 0);
    const auto a = cf::primary_amplitude_resonance(cfg, f);
    const double ea = std::abs(peak.max_displacement - a.amplitude) / a.amplitude;
    const double ew = std::abs(peak.omega - a.omega) / a.omega;
    o.check(ea < 0.02, "HB peak max|x| " + num(peak.max_displacement, 8) + " vs A_a " +
                           num(a.amplitude, 8) + ": rel " + num(ea, 3) + " < 2%");
    o.check(ew < 0.005, "HB peak omega " + num(peak.omega, 8) + " vs w_a " + num(a.omega, 8) +
                            ": rel " + num(ew, 3) + " < 0.5%");
    o.check(peak.stable.value_or(false), "peak point is stable");
    oracle::Tolerances tol;
    tol.amplitude = 0.01;
    const auto rep = oracle::verify_point(peak, 1, cfg, f, tol);
    o.check(rep.verdict == oracle::Verdict::Match,
            "time integration verdict " + oracle::verdict_name(rep.verdict) + " (amplitude err " +
                num(rep.max_amplitude_error(), 3) + ", phase err " + num(rep.max_phase_error(), 3) + ")");
    return o;
}

Outcome superharmonic31() {
    Outcome o;
    const OscillatorConfig cfg;
    const ResonanceId res(3, 1);
    for (double f : {0.1, 0.15, 0.2}) {
        const hb::HBProblem p{cfg, f, res, 15, 128};
        const auto b = hb::continue_branch(p, 0.3, 0.3, 0.4);
        const auto pr = hb::detect_phase_resonance(p, b, res);
        const auto cfp = cf::super31_phase_resonance(cfg, f);
        if (pr.empty()) {
            o.check(false, "f=" + num(f) + ": no phi_3 = pi/2 crossing on the HB branch");
            continue;
        }
        const hb::BranchPoint* q = &pr.front();
        for (const auto& c : pr)
            if (c.solution.amplitude(3) > q->solution.amplitude(3)) q = &c;
        const auto m = hb::branch_maximum(p, b, 3);
        const double ew = std::abs(q->omega - cfp.omega) / cfp.omega;
        const double ea = std::abs(q->solution.amplitude(3) - m.solution.amplitude(3)) / m.solution.amplitude(3);
        o.check(ew < 0.05, "f=" + num(f) + ": HB quadrature omega " + num(q->omega) + " vs closed form " +
                               num(cfp.omega) + ": rel " + num(ew, 3) + " < 5%");
        o.check(ea < 0.05, "f=" + num(f) + ": A3 at quadrature " + num(q->solution.amplitude(3)) +
                               " vs branch A3 max " + num(m.solution.amplitude(3)) + ": rel " + num(ea, 3) +
                               " < 5%");
    }
    const auto p = cf::super31_phase_resonance(cfg, 0.2);
    o.check(std::abs(p.omega - 0.35430) < 5e-6 && std::abs(p.amplitude - 0.2679) < 5e-5,
            "closed-form point at f=0.2: (" + num(p.omega) + ", " + num(p.amplitude, 4) + ")");
    return o;
}

Outcome subharmonic13() {
    Outcome o;
    const OscillatorConfig cfg;
    const ResonanceId res(1, 3);
    for (double f : {0.3, 0.6, 1.0}) {
        const hb::HBProblem p{cfg, f, res, 15, 128};
        const auto b = hb::find_isola(p, 1.5, 18.0);
        if (!b) {
            o.check(false, "f=" + num(f) + ": no isola found");
            continue;
        }
        o.check(b->closed, "f=" + num(f) + ": isolated branch closes (" + std::to_string(b->points.size()) +
                               " points)");
        const auto m = hb::branch_maximum(p, *b, 1);
        const auto pr = hb::detect_phase_resonance(p, *b, res);
        double best = 1e9, w_best = 0.0;
        for (const auto& c : pr) {
            if (std::abs(c.omega - m.omega) < best) {
                best = std::abs(c.omega - m.omega);
                w_best = c.omega;
            }
        }
        o.check(best < 0.01 * m.omega, "f=" + num(f) + ": phi_1 = pi/2 at " + num(w_best, 8) +
                                           ", H1 max at " + num(m.omega, 8) + ": rel " +
                                           num(best / m.omega, 3) + " < 1%");
    }
    // lowest forcing reached by the closed-form locus
    double fmin = 1e9;
    for (int i = 0; i <= 40000; ++i) {
        const double w = 3.0 * (1 + 1e-6) + 15.0 * i / 40000.0;
        try {
            const auto lp = cf::sub13_phase_locus(cfg, w)[0];
            if (std::isfinite(lp.forcing_gamma_bar)) fmin = std::min(fmin, lp.forcing(cfg));
        } catch (const Error&) {
        }
    }
    const double below = 0.8 * fmin;
    const bool no_locus = cf::locus_points_at_forcing(res, cfg, below, 3.0 * (1 + 1e-6), 40.0).empty();
    o.check(no_locus, "f=" + num(below, 4) + " is below the locus minimum " + num(fmin, 6));
    const hb::HBProblem p{cfg, below, res, 15, 128};
    o.check(!hb::find_isola(p, 1.5, 18.0).has_value(), "f=" + num(below, 4) + ": no isola found");
    return o;
}

Outcome subharmonic12_existence() {
    Outcome o;
    const OscillatorConfig cfg;
    const ResonanceId res(1, 2);
    for (double f : {0.8, 1.0, 3.0}) {
        const auto r = cli::cmd_existence(res, cfg, f, 1.0, 8.0, 2000);
        const bool want = f > 0.9;
        std::string w = r.window ? "[" + num(r.window->first) + ", " + num(r.window->second) + "]" : "empty";
        o.check(r.window.has_value() == want, "f=" + num(f) + ": window " + w);
    }
    double fmin = 1e9, wmin = 0.0;
    for (int i = 0; i <= 60000; ++i) {
        const double w = 2.0 * (1 + 1e-6) + 6.0 * i / 60000.0;
        try {
            const auto lp = cf::sub12_phase_locus(cfg, w)[0];
            if (std::isfinite(lp.forcing_gamma_bar) && lp.forcing(cfg) < fmin) {
                fmin = lp.forcing(cfg);
                wmin = w;
            }
        } catch (const Error&) {
        }
    }
    o.check(fmin > 0.8 && fmin < 1.0, "locus minimum forcing " + num(fmin) + " at omega " + num(wmin, 4) +
                                          " in (0.8, 1.0)");
    return o;
}

// Resonant harmonic of a branch point against the equivalent lag set.
struct PhaseCase {
    ResonanceId res;
    double f;
    double lo, hi;
    enum Kind { Main, Isola, Switch, Endpoints } kind;
};

Outcome phase_classification() {
    Outcome o;
    const OscillatorConfig cfg;
    const double tol = 10.0 * cfg.zeta_bar();
    const std::vector<PhaseCase> cases{
        {ResonanceId(1, 1), 0.01, 0.8, 1.6, PhaseCase::Main},
        {ResonanceId(3, 1), 0.2, 0.3, 0.4, PhaseCase::Main},
        {ResonanceId(5, 1), 0.3, 0.1, 0.45, PhaseCase::Main},
        {ResonanceId(7, 1), 0.3, 0.1, 0.45, PhaseCase::Main},
        {ResonanceId(2, 1), 1.0, 0.3, 1.5, PhaseCase::Switch},
        {ResonanceId(1, 3), 0.6, 1.5, 18.0, PhaseCase::Isola},
        {ResonanceId(1, 2), 2.0, 1.5, 8.0, PhaseCase::Isola},
        {ResonanceId(1, 5), 10.0, 5.0, 20.0, PhaseCase::Isola},
        {ResonanceId(2, 3), 2.0, 1.0, 6.0, PhaseCase::Isola},
        {ResonanceId(1, 4), 10.0, 0.0, 0.0, PhaseCase::Isola},
        {ResonanceId(3, 2), 2.0, 1.0, 2.0, PhaseCase::Endpoints},
    };
    for (const auto& c : cases) {
        const int k = c.res.k();
        const std::string tag = c.res.to_string() + " f=" + num(c.f) + ": ";
        const auto lags = equivalent_phase_lags(c.res);
        double lo = c.lo, hi = c.hi;
        if (lo == 0.0) {
            // search only inside the steady-state relation window of the family
            const auto ex = cli::cmd_existence(c.res, cfg, c.f, 1.0 + 1e-3, 30.0, 3000);
            if (!ex.window) {
                o.check(false, tag + "empty relation window");
                continue;
            }
            lo = ex.window->first;
            hi = ex.window->second;
        }
        const hb::HBProblem p{cfg, c.f, c.res, 15, 128};
        hb::Branch b;
        try {
            if (c.kind == PhaseCase::Main) {
                b = hb::continue_branch(p, lo, lo, hi);
            } else if (c.kind == PhaseCase::Switch) {
                const auto main = hb::continue_branch(p, lo, lo, hi);
                const auto bifs = hb::symmetry_breaking_points(p, main);
                if (bifs.empty()) throw SeedNotFound("no symmetry-breaking point");
                b = hb::switch_branch(p, bifs.front(), lo, hi);
            } else {
                auto found = hb::find_isola(p, lo, hi);
                if (!found) throw SeedNotFound("no branch in [" + num(lo, 4) + ", " + num(hi, 4) + "]");
                b = std::move(*found);
            }
        } catch (const Error& e) {
            o.check(false, tag + e.what());
            continue;
        }

        if (c.kind == PhaseCase::Endpoints) {
            const hb::BranchPoint* left = &b.points.front();
            const hb::BranchPoint* right = &b.points.front();
            for (const auto& q : b.points) {
                if (q.omega < left->omega) left = &q;
                if (q.omega > right->omega) right = &q;
            }
            for (const auto* q : {left, right}) {
                const double d = phase_distance(q->solution.phase(k), lags);
                o.check(d < tol, tag + "branch end at omega " + num(q->omega) + ": phi_" + std::to_string(k) +
                                     " = " + num(q->solution.phase(k)) + ", distance " + num(d, 3) + " < " +
                                     num(tol, 3));
            }
            continue;
        }

        hb::BranchPoint m;
        if (c.kind == PhaseCase::Main && c.res.k() > 1) {
            // the branch also carries the neighbouring superharmonic peaks
            const double nominal = c.res.nominal_frequency(cfg.omega0());
            bool any = false;
            for (const auto& q : hb::local_maxima(p, b, k)) {
                if (q.omega < 0.75 * nominal || q.omega > 1.5 * nominal) continue;
                if (!any || q.solution.amplitude(k) > m.solution.amplitude(k)) m = q;
                any = true;
            }
            if (!any) {
                o.check(false, tag + "no A_" + std::to_string(k) + " maximum near " + num(nominal, 4));
                continue;
            }
        } else {
            m = hb::branch_maximum(p, b, k);
        }
        const double d = phase_distance(m.solution.phase(k), lags);
        o.check(d < tol, tag + "A_" + std::to_string(k) + " max at omega " + num(m.omega) + ": phi_" +
                             std::to_string(k) + " = " + num(m.solution.phase(k)) + ", distance " + num(d, 3) +
                             " < " + num(tol, 3));
    }
    return o;
}

Outcome oracle_invariants() {
    Outcome o;
    {
        // forced Duffing at f = 0.01, omega = 1.2; reference at a quarter of the coarse step
        const OscillatorConfig cfg;
        const auto fz = Forcing::make(cfg, 0.01, 1.2);
        auto end_x = [&](int spp) { return oracle::integrate(cfg, fz, 0.0, 0.0, 20, spp).x.back(); };
        const double ref = end_x(800);
        const double ratio = std::abs(end_x(200) - ref) / std::abs(end_x(400) - ref);
        const double order = std::log2(ratio);
        o.check(order > 3.7 && order < 4.3, "RK4 error ratio on halving " + num(ratio, 4) + ", observed order " +
                                                num(order, 4));
    }
    {
        OscillatorConfig cfg;
        cfg.damping = 0.0;
        const auto tr = oracle::integrate(cfg, Forcing::make(cfg, 0.0, 1.0), 0.5, 0.0, 100, 2000);
        auto energy = [&](double x, double v) { return 0.5 * v * v + 0.5 * x * x + 0.25 * std::pow(x, 4); };
        const double e0 = energy(0.5, 0.0);
        const double drift = std::abs(energy(tr.x.back(), tr.v.back()) - e0) / e0;
        o.check(drift < 1e-10, "conservative energy drift over 100 periods " + num(drift, 3));
    }
    {
        const OscillatorConfig cfg;
        double worst = 0.0;
        auto scan = [&](const hb::HBProblem& p, const hb::Branch& b) {
            for (const auto& q : b.points)
                worst = std::max(worst, oracle::ode_residual_rms(cfg, p.forcing, q.omega, q.solution) /
                                            (p.forcing / cfg.mass));
        };
        const hb::HBProblem p11{cfg, 0.01, ResonanceId(1, 1), 15, 128};
        scan(p11, hb::continue_branch(p11, 0.8, 0.8, 1.6));
        const hb::HBProblem p31{cfg, 0.2, ResonanceId(3, 1), 15, 128};
        scan(p31, hb::continue_branch(p31, 0.3, 0.3, 0.4));
        const hb::HBProblem p13{cfg, 0.6, ResonanceId(1, 3), 15, 128};
        if (auto b = hb::find_isola(p13, 1.5, 18.0)) scan(p13, *b);
        o.check(worst < 1e-6, "HB ODE residual RMS / gamma max " + num(worst, 3) + " < 1e-6");
    }
    return o;
}

Outcome figures() {
    Outcome o;
    const OscillatorConfig cfg;
    for (const char* id : {"fig1", "fig2", "fig3", "fig4", "fig5"}) {
        try {
            const auto rep = cli::cmd_figure(id, cfg, std::filesystem::path("figures") / id);
            o.check(rep.n_points > 0 && rep.max_point_distance <= rep.step_bound,
                    std::string(id) + ": " + std::to_string(rep.n_points) + " points, max distance " +
                        num(rep.max_point_distance, 3) + " <= step " + num(rep.step_bound, 3));
        } catch (const std::exception& e) {
            o.check(false, std::string(id) + ": " + e.what());
        }
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed-form self-consistency (1:1)", closed_form_consistency},
        {"amplitude/phase resonance gap scaling", amplitude_phase_gap},
        {"cross-solver agreement at primary resonance", primary_cross_solver},
        {"3:1 superharmonic quadrature vs closed form", superharmonic31},
        {"1:3 subharmonic isolas", subharmonic13},
        {"1:2 existence threshold", subharmonic12_existence},
        {"phase-lag classification over all families", phase_classification},
        {"time-integration and residual invariants", oracle_invariants},
        {"figure reproduction", figures},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %zu %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs);
        for (const auto& n : out.notes) std::printf("       %s\n", n.c_str());
        std::fflush(stdout);
        failed += !out.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
