#include "phaseres/cli.hpp"

#include "phaseres/closed_form.hpp"
#include "phaseres/errors.hpp"
#include "phaseres/harmonic_balance.hpp"
#include "phaseres/slow_flow.hpp"
#include "phaseres/time_oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace phaseres::cli {

namespace {

using closed_form::LocusPoint;
using closed_form::RootSign;

/// Largest-amplitude minus-root point of a locus passing through gamma_bar.
std::optional<LocusPoint> top_of_locus(std::array<LocusPoint, 2> (*locus)(const OscillatorConfig&,
                                                                          double),
                                       const OscillatorConfig& cfg, double gbar, double lo,
                                       double hi, int n_scan = 8000) {
    auto h = [&](double w) {
        try {
            return locus(cfg, w)[0].forcing_gamma_bar - gbar;
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    std::optional<LocusPoint> best;
    double wp = lo;
    double hp = h(wp);
    for (int i = 1; i <= n_scan; ++i) {
        const double w = lo + (hi - lo) * i / n_scan;
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
            const LocusPoint p = locus(cfg, 0.5 * (a + b))[0];
            if (!best || p.amplitude > best->amplitude) best = p;
        }
        wp = w;
        hp = hw;
    }
    return best;
}

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string stable_cell(const std::optional<bool>& s) {
    if (!s) return "";
    return *s ? "true" : "false";
}

std::optional<bool> parse_stable(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    return std::nullopt;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("bad number '" + s + "' in column " + what);
    }
}

std::string tags_cell(const hb::BranchPoint& bp) {
    std::string out;
    for (const auto& t : bp.tags) {
        if (!out.empty()) out += ';';
        out += t.kind == hb::TagKind::Fold ? std::string("Fold")
                                           : "PhaseResonance(" + std::to_string(t.harmonic) + ")";
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::json cmd_closed_form(const ResonanceId& res, const OscillatorConfig& cfg, double f) {
    if (!(f >= 0.0)) throw InvalidArgument("forcing amplitude must be non-negative");
    std::optional<double> wa, wp, aa, ap, pa, pp, dw;
    pp = resonant_phase_lag(res);
    const double w0 = cfg.omega0();
    const double gbar = f / cfg.mass;

    if (res == ResonanceId(1, 1)) {
        const auto r = closed_form::primary_resonance(cfg, f);
        wa = r.omega_a;
        wp = r.omega_p;
        aa = r.amp_a;
        ap = r.amp_p;
        pa = r.phi_a;
        dw = r.delta_omega;
    } else if (res == ResonanceId(3, 1)) {
        const auto a = closed_form::super31_amplitude_resonance(cfg, f);
        const auto p = closed_form::super31_phase_resonance(cfg, f);
        wa = a.omega;
        aa = a.amplitude;
        pa = a.phase_lag;
        wp = p.omega;
        ap = p.amplitude;
        dw = p.omega - a.omega;
    } else if (res == ResonanceId(1, 3)) {
        const double lo = 3.0 * w0 * (1.0 + 1e-9);
        const double hi = 40.0 * w0;
        if (auto p = top_of_locus(&closed_form::sub13_phase_locus, cfg, gbar, lo, hi)) {
            wp = p->omega_p;
            ap = p->amplitude;
        }
        if (auto a = top_of_locus(&closed_form::sub13_amplitude_locus, cfg, gbar, lo, hi)) {
            wa = a->omega_p;
            aa = a->amplitude;
            pa = closed_form::sub13_amplitude_phase_lag(cfg, a->omega_p);
        }
        if (wa && wp) dw = *wp - *wa;
    } else if (res == ResonanceId(1, 2)) {
        const double lo = 2.0 * w0 * (1.0 + 1e-9);
        const double hi = 40.0 * w0;
        if (auto p = top_of_locus(&closed_form::sub12_phase_locus, cfg, gbar, lo, hi)) {
            // phase and amplitude resonance coincide at leading order
            wp = wa = p->omega_p;
            ap = aa = p->amplitude;
            pa = pp;
            dw = 0.0;
        }
    }
    return {{"resonance", res.to_string()}, {"forcing", f},          {"omega_a", opt_json(wa)},
            {"omega_p", opt_json(wp)},      {"amp_a", opt_json(aa)}, {"amp_p", opt_json(ap)},
            {"phi_a", opt_json(pa)},        {"phi_p", opt_json(pp)}, {"delta_omega", opt_json(dw)}};
}

Table cmd_slowflow(const ResonanceId& res, const OscillatorConfig& cfg, double f,
                   double omega_min, double omega_max, int steps, SlowFlowMethod method) {
    if (steps < 1) throw InvalidArgument("--steps must be positive");
    if (!(omega_min < omega_max)) throw InvalidArgument("need omega-min < omega-max");
    cfg.validate();
    const slow_flow::SlowFlowSystem sys(res);
    Table t;
    t.header = {"omega", "r", "phi", "stable", "eig_re_1", "eig_im_1", "eig_re_2", "eig_im_2", "family"};

    auto emit = [&](const slow_flow::SteadyState& s) {
        auto eig = s.eigenvalues;
        auto stable = s.stable;
        if (sys.has_flow() && !eig) {
            eig = slow_flow::stability_eigenvalues(sys, s.state, s.omega, cfg, f);
            stable = (*eig)[0].real() < 0.0 && (*eig)[1].real() < 0.0;
        }
        std::vector<std::string> row{fmt(s.omega), fmt(s.state.r), fmt(s.state.phi),
                                     stable_cell(stable)};
        for (int i = 0; i < 2; ++i) {
            row.push_back(eig ? fmt((*eig)[static_cast<std::size_t>(i)].real()) : "");
            row.push_back(eig ? fmt((*eig)[static_cast<std::size_t>(i)].imag()) : "");
        }
        row.push_back(res.to_string());
        t.add_row(std::move(row));
    };

    if (method == SlowFlowMethod::Grid) {
        for (int i = 0; i < steps; ++i) {
            const double w =
                steps == 1 ? omega_min : omega_min + (omega_max - omega_min) * i / (steps - 1);
            try {
                for (const auto& s : slow_flow::find_steady_states(sys, w, cfg, f)) emit(s);
            } catch (const SingularFrequency&) {
            }
        }
        return t;
    }
    StepControl sc;
    sc.max_points = steps;
    const auto branch = slow_flow::sweep_branch(sys, omega_min, omega_max, cfg, f, sc);
    for (const auto& s : branch.points) emit(s);
    return t;
}

Table cmd_nfrc(const ResonanceId& res, const OscillatorConfig& cfg, double f, double omega_min,
               double omega_max, const NfrcSettings& settings) {
    if (!(omega_min < omega_max)) throw InvalidArgument("need omega-min < omega-max");
    const hb::HBProblem problem{cfg, f, res, settings.harmonics, settings.samples};
    problem.validate();
    const bool main_branch = res.nu() == 1 && res.k() % 2 == 1;
    const SeedKind seed =
        settings.seed ? *settings.seed : (main_branch ? SeedKind::Linear : SeedKind::SlowFlow);

    hb::Branch branch;
    if (seed == SeedKind::Linear) {
        branch = hb::continue_branch(problem, omega_min, omega_min, omega_max);
    } else if (res.nu() > 1) {
        auto b = hb::find_isola(problem, omega_min, omega_max);
        if (!b) throw SeedNotFound("no " + res.to_string() + " branch found in the window");
        branch = std::move(*b);
    } else if (res.k() % 2 == 0) {
        // even superharmonics live on branches born from symmetry breaking
        const auto main = hb::continue_branch(problem, omega_min, omega_min, omega_max);
        const auto bifs = hb::symmetry_breaking_points(problem, main);
        if (bifs.empty()) throw SeedNotFound("no symmetry-breaking point on the main branch");
        branch = hb::switch_branch(problem, bifs.front(), omega_min, omega_max);
    } else {
        const slow_flow::SlowFlowSystem sys(res);
        const auto states = slow_flow::find_steady_states(sys, omega_min, cfg, f);
        if (states.empty()) throw SeedNotFound("no slow-flow steady state at omega-min");
        const auto& s = states.front();
        HarmonicSolution guess =
            res.k() == 1 ? HarmonicSolution(problem.base_freq(omega_min), problem.n_harmonics)
                         : hb::isola_seed(problem, omega_min, s.state.r, s.state.phi);
        if (res.k() == 1) guess.set_polar(1, s.state.r, s.state.phi);
        branch = hb::continue_branch(problem, omega_min, omega_min, omega_max, {}, guess);
    }
    hb::merge_points(branch, hb::detect_phase_resonance(problem, branch, res));

    Table t;
    t.header = {"omega", "max_disp", "A0"};
    for (int j = 1; j <= problem.n_harmonics; ++j) {
        t.header.push_back("A" + std::to_string(j));
        t.header.push_back("phi" + std::to_string(j));
    }
    t.header.push_back("stable");
    t.header.push_back("tags");
    for (const auto& bp : branch.points) {
        std::vector<std::string> row{fmt(bp.omega), fmt(bp.max_displacement), fmt(bp.solution.a0())};
        for (int j = 1; j <= problem.n_harmonics; ++j) {
            row.push_back(fmt(bp.solution.amplitude(j)));
            row.push_back(fmt(bp.solution.phase(j)));
        }
        row.push_back(stable_cell(bp.stable));
        row.push_back(tags_cell(bp));
        t.add_row(std::move(row));
    }
    return t;
}

std::string nfrc_plot_script(const ResonanceId& res, const std::filesystem::path& data,
                             int harmonic) {
    std::ostringstream os;
    const std::string d = data.filename().string();
    const int col = 2 + 2 * harmonic;  // A_k column (1-based)
    os << "# nonlinear frequency response, " << res.to_string() << "\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 'omega [rad/s]'\n"
       << "set multiplot layout 1,2\n"
       << "set ylabel 'max |x| [m]'\n"
       << "plot '" << d << "' using 1:2 with lines lc rgb 'black' title 'NFRC', \\\n"
       << "     '" << d << "' using 1:(strstrt(strcol(" << (4 + 2 * 15) << "),'PhaseResonance') ? $2 : 1/0) "
       << "with points pt 7 lc rgb 'red' title 'phase resonance'\n"
       << "set ylabel 'A_" << harmonic << " [m]'\n"
       << "plot '" << d << "' using 1:" << col << " with lines lc rgb 'black' title 'A_" << harmonic
       << "'\n"
       << "unset multiplot\n";
    return os.str();
}

Table cmd_prnm_curve(const ResonanceId& res, const OscillatorConfig& cfg, double f_min,
                     double f_max, int n, std::optional<double> omega_min,
                     std::optional<double> omega_max) {
    if (n < 1) throw InvalidArgument("n must be positive");
    if (!(f_min >= 0.0) || !(f_max >= f_min)) throw InvalidArgument("need 0 <= f-min <= f-max");
    cfg.validate();
    Table t;
    t.header = {"f", "omega_p", "amp_p", "root"};
    const double w0 = cfg.omega0();

    if (res == ResonanceId(1, 1) || res == ResonanceId(3, 1)) {
        for (int i = 0; i < n; ++i) {
            const double f = n == 1 ? f_min : f_min + (f_max - f_min) * i / (n - 1);
            const auto p = res == ResonanceId(1, 1) ? closed_form::primary_phase_resonance(cfg, f)
                                                    : closed_form::super31_phase_resonance(cfg, f);
            t.add_row({fmt(f), fmt(p.omega), fmt(p.amplitude), ""});
        }
        return t;
    }
    using Locus = std::array<LocusPoint, 2> (*)(const OscillatorConfig&, double);
    Locus locus = nullptr;
    if (res == ResonanceId(1, 3)) locus = &closed_form::sub13_phase_locus;
    else if (res == ResonanceId(1, 2)) locus = &closed_form::sub12_phase_locus;
    else throw UnsupportedFamily("phase-resonance curve available for 1:1, 3:1, 1:3 and 1:2 only");

    const double nu = res.nu();
    const double lo = omega_min.value_or(nu * w0 * (1.0 + 1e-6));
    const double hi = omega_max.value_or(4.0 * nu * w0);
    if (!(lo < hi)) throw InvalidArgument("need omega-min < omega-max");
    for (int s = 0; s < 2; ++s) {
        for (int i = 0; i < n; ++i) {
            const double w = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
            try {
                const auto p = locus(cfg, w)[static_cast<std::size_t>(s)];
                const double f = p.forcing(cfg);
                if (f < f_min || f > f_max) continue;
                t.add_row({fmt(f), fmt(w), fmt(p.amplitude), s == 0 ? "minus" : "plus"});
            } catch (const Error&) {
            }
        }
    }
    return t;
}

ExistenceResult cmd_existence(const ResonanceId& res, const OscillatorConfig& cfg, double f,
                              double omega_min, double omega_max, int n) {
    if (n < 2) throw InvalidArgument("need at least two scan points");
    if (!(omega_min < omega_max)) throw InvalidArgument("need omega-min < omega-max");
    if (!(f >= 0.0)) throw InvalidArgument("forcing amplitude must be non-negative");
    cfg.validate();
    ExistenceResult out;
    out.scan.header = {"omega", "margin", "inside"};

    std::function<bool(double)> inside;
    std::function<std::optional<double>(double)> margin = [](double) { return std::nullopt; };
    std::optional<slow_flow::SlowFlowSystem> sys;
    if (res == ResonanceId(1, 2)) {
        margin = [&](double w) -> std::optional<double> {
            try {
                return closed_form::sub12_existence_margin(cfg, f, w);
            } catch (const Error&) {
                return std::nullopt;
            }
        };
        inside = [&](double w) {
            auto m = margin(w);
            return m && *m >= 0.0;
        };
    } else if (res == ResonanceId(5, 1)) {
        inside = [&](double w) { return closed_form::super51_existence(cfg, f, w); };
    } else {
        sys.emplace(res);
        if (sys->has_flow())
            throw UnsupportedFamily("existence scan covers 1:2 and the relation-only families");
        inside = [&](double w) {
            try {
                return !slow_flow::relation_seeds(*sys, w, cfg, f).empty();
            } catch (const Error&) {
                return false;
            }
        };
    }

    std::vector<double> ws(static_cast<std::size_t>(n));
    std::vector<bool> in(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double w = omega_min + (omega_max - omega_min) * i / (n - 1);
        ws[static_cast<std::size_t>(i)] = w;
        in[static_cast<std::size_t>(i)] = inside(w);
        out.scan.add_row({fmt(w), fmt_opt(margin(w)), in[static_cast<std::size_t>(i)] ? "true" : "false"});
    }
    // widest contiguous run, edges refined by bisection
    std::size_t best_a = 0, best_b = 0;
    bool found = false;
    for (std::size_t i = 0; i < in.size();) {
        if (!in[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < in.size() && in[j + 1]) ++j;
        if (!found || ws[j] - ws[i] > ws[best_b] - ws[best_a]) {
            best_a = i;
            best_b = j;
            found = true;
        }
        i = j + 1;
    }
    if (!found) return out;
    auto refine = [&](double a_in, double b_out) {
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a_in + b_out);
            if (inside(m)) a_in = m; else b_out = m;
        }
        return a_in;
    };
    const double lo = best_a > 0 ? refine(ws[best_a], ws[best_a - 1]) : ws[best_a];
    const double hi = best_b + 1 < ws.size() ? refine(ws[best_b], ws[best_b + 1]) : ws[best_b];
    out.window = std::make_pair(lo, hi);
    return out;
}

nlohmann::json cmd_verify(const std::filesystem::path& csv, const OscillatorConfig& cfg,
                          const VerifySource& src) {
    const Table t = read_csv(csv);
    std::optional<ResonanceId> res = src.resonance;
    std::optional<double> f = src.forcing;
    const auto side = sidecar_path(csv);
    if ((!res || !f) && std::filesystem::exists(side)) {
        std::ifstream in(side);
        nlohmann::json j;
        in >> j;
        const auto& s = j.at("settings");
        if (!res && s.contains("resonance")) res = ResonanceId::parse(s.at("resonance").get<std::string>());
        if (!f && s.contains("forcing")) f = s.at("forcing").get<double>();
    }
    if (!res || !f)
        throw InvalidArgument("resonance and forcing unknown: pass them or keep the sidecar file");

    const int nrows = static_cast<int>(t.rows.size());
    const int first = src.row_first.value_or(0);
    const int last = std::min(src.row_last.value_or(nrows - 1), nrows - 1);
    if (first < 0 || first > last) throw InvalidArgument("empty or invalid row range");

    const bool slow = std::find(t.header.begin(), t.header.end(), "r") != t.header.end();
    nlohmann::json out = nlohmann::json::array();
    for (int i = first; i <= last; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        const double w = parse_double(row[t.column("omega")], "omega");
        oracle::VerificationReport rep;
        if (slow) {
            slow_flow::SteadyState s;
            s.omega = w;
            s.state.r = parse_double(row[t.column("r")], "r");
            s.state.phi = parse_double(row[t.column("phi")], "phi");
            s.stable = parse_stable(row[t.column("stable")]);
            rep = oracle::verify_point(s, *res, cfg, *f);
        } else {
            int n = 0;
            while (std::find(t.header.begin(), t.header.end(), "A" + std::to_string(n + 1)) !=
                   t.header.end())
                ++n;
            if (n == 0) throw InvalidArgument("CSV has neither slow-flow nor harmonic columns");
            hb::BranchPoint bp;
            bp.omega = w;
            bp.solution = HarmonicSolution(w / res->nu(), n);
            bp.solution.set_a0(parse_double(row[t.column("A0")], "A0"));
            for (int j = 1; j <= n; ++j) {
                const std::string a = "A" + std::to_string(j);
                const std::string p = "phi" + std::to_string(j);
                bp.solution.set_polar(j, parse_double(row[t.column(a)], a),
                                      parse_double(row[t.column(p)], p));
            }
            bp.stable = parse_stable(row[t.column("stable")]);
            rep = oracle::verify_point(bp, res->nu(), cfg, *f);
        }
        nlohmann::json r = {{"row", i},
                            {"omega", w},
                            {"verdict", oracle::verdict_name(rep.verdict)},
                            {"consistent", rep.consistent()},
                            {"stable", rep.stable ? nlohmann::json(*rep.stable) : nlohmann::json(nullptr)},
                            {"harmonics", rep.harmonics},
                            {"amplitude_error", rep.amplitude_error},
                            {"phase_error", rep.phase_error},
                            {"max_amplitude_error", rep.max_amplitude_error()},
                            {"max_phase_error", rep.max_phase_error()},
                            {"ode_residual_rms", rep.ode_residual_rms}};
        out.push_back(std::move(r));
    }
    return out;
}

Table cmd_simulate(const OscillatorConfig& cfg, double f, double omega, double x0, double v0,
                   int periods, int steps_per_period) {
    cfg.validate();
    if (periods < 1) throw InvalidArgument("--periods must be positive");
    const auto traj =
        oracle::integrate(cfg, Forcing::make(cfg, f, omega), x0, v0, periods, steps_per_period);
    Table t;
    t.header = {"t", "x", "v"};
    t.rows.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        t.rows.push_back({fmt(traj.time(i)), fmt(traj.x[i]), fmt(traj.v[i])});
    return t;
}

// ---------------------------------------------------------------------------
// Argument handling

namespace {

struct Output {
    std::string path;
    std::string format;  // csv | json | "" for the command default
};

void emit_json(const nlohmann::json& j, const Output& out, const nlohmann::json& prov) {
    const std::string text = j.dump(2) + "\n";
    if (out.path.empty()) {
        std::cout << text;
        return;
    }
    write_text(out.path, text);
    write_text(sidecar_path(out.path), prov.dump(2) + "\n");
}

void emit_table(const Table& t, const Output& out, const nlohmann::json& prov) {
    if (out.format == "json") {
        emit_json(t.to_json(), out, prov);
        return;
    }
    std::ostringstream os;
    t.write_csv(os);
    if (out.path.empty()) {
        std::cout << os.str();
        return;
    }
    write_text(out.path, os.str());
    write_text(sidecar_path(out.path), prov.dump(2) + "\n");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const UnsupportedFamily*>(&e) ||
        dynamic_cast<const SingularFrequency*>(&e) || dynamic_cast<const ZeroDamping*>(&e) ||
        dynamic_cast<const OverdampedPeak*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e))
        return kExitInvalid;
    if (dynamic_cast<const NotExist*>(&e) || dynamic_cast<const NoResonance*>(&e) ||
        dynamic_cast<const BelowFoldPoint*>(&e))
        return kExitEmpty;
    return kExitSolver;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Amplitude and phase resonances of the forced hardening Duffing oscillator"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    Output out;
    app.add_option("--config", config_path, "oscillator descriptor (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", out.path, "output file (directory for figure)");
    app.add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    std::string res_text = "1:1";
    double forcing = 0.0;
    double omega_min = 0.0, omega_max = 0.0;

    auto* cf = app.add_subcommand("closed-form", "closed-form resonance point");
    cf->add_option("--resonance", res_text, "K:NU")->required();
    cf->add_option("--forcing", forcing, "forcing amplitude [N]")->required();

    int sf_steps = 20000;
    std::string sf_method = "continuation";
    auto* sf = app.add_subcommand("slowflow", "slow-flow steady states over frequency");
    sf->add_option("--resonance", res_text)->required();
    sf->add_option("--forcing", forcing)->required();
    sf->add_option("--omega-min", omega_min)->required();
    sf->add_option("--omega-max", omega_max)->required();
    sf->add_option("--steps", sf_steps, "continuation points, or grid size with --method grid");
    sf->add_option("--method", sf_method)->check(CLI::IsMember({"continuation", "grid"}));

    NfrcSettings nfrc_settings;
    std::string seed_text;
    std::string plot_path;
    auto* nf = app.add_subcommand("nfrc", "harmonic-balance frequency response");
    nf->add_option("--resonance", res_text)->required();
    nf->add_option("--forcing", forcing)->required();
    nf->add_option("--omega-min", omega_min)->required();
    nf->add_option("--omega-max", omega_max)->required();
    nf->add_option("--harmonics", nfrc_settings.harmonics);
    nf->add_option("--samples", nfrc_settings.samples);
    nf->add_option("--seed", seed_text)->check(CLI::IsMember({"slowflow", "linear"}));
    nf->add_option("--emit-plot", plot_path, "gnuplot script path");

    double f_min = 0.0, f_max = 0.0;
    int n_levels = 10;
    std::optional<double> pr_wmin, pr_wmax;
    auto* pr = app.add_subcommand("prnm-curve", "phase-resonance curve over forcing");
    pr->add_option("--resonance", res_text)->required();
    pr->add_option("--f-min", f_min)->required();
    pr->add_option("--f-max", f_max)->required();
    pr->add_option("--n", n_levels);
    pr->add_option("--omega-min", pr_wmin);
    pr->add_option("--omega-max", pr_wmax);

    int n_scan = 2000;
    auto* ex = app.add_subcommand("existence", "existence window scan");
    ex->add_option("--resonance", res_text)->required();
    ex->add_option("--forcing", forcing)->required();
    ex->add_option("--omega-min", omega_min)->required();
    ex->add_option("--omega-max", omega_max)->required();
    ex->add_option("--n", n_scan);

    std::string csv_path, rows_text;
    std::optional<double> verify_forcing;
    std::string verify_res;
    auto* ve = app.add_subcommand("verify", "check CSV rows against time integration");
    ve->add_option("--from-csv", csv_path)->required()->check(CLI::ExistingFile);
    ve->add_option("--rows", rows_text, "a..b (0-based, inclusive)");
    ve->add_option("--resonance", verify_res);
    ve->add_option("--forcing", verify_forcing);

    double sim_omega = 1.0, x0 = 0.0, v0 = 0.0;
    int periods = 100, spp = 200;
    auto* si = app.add_subcommand("simulate", "direct time integration");
    si->add_option("--forcing", forcing)->required();
    si->add_option("--omega", sim_omega)->required();
    si->add_option("--x0", x0);
    si->add_option("--v0", v0);
    si->add_option("--periods", periods);
    si->add_option("--steps-per-period", spp);

    std::string fig_id;
    auto* fi = app.add_subcommand("figure", "reproduce a figure's data");
    fi->add_option("id", fig_id)->required()->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        const OscillatorConfig cfg =
            config_path.empty() ? OscillatorConfig{} : OscillatorConfig::from_file(config_path);
        cfg.validate();

        if (cf->parsed()) {
            const auto res = ResonanceId::parse(res_text);
            const auto j = cmd_closed_form(res, cfg, forcing);
            const auto prov = provenance("closed-form", cfg, {{"resonance", res_text}, {"forcing", forcing}});
            if (out.format == "csv") {
                Table t;
                for (const auto& [k, v] : j.items()) {
                    t.header.push_back(k);
                }
                std::vector<std::string> row;
                for (const auto& [k, v] : j.items())
                    row.push_back(v.is_null() ? "" : v.is_string() ? v.get<std::string>() : fmt(v.get<double>()));
                t.add_row(row);
                emit_table(t, out, prov);
            } else {
                emit_json(j, out, prov);
            }
            return kExitOk;
        }
        if (sf->parsed()) {
            const auto res = ResonanceId::parse(res_text);
            const auto t = cmd_slowflow(res, cfg, forcing, omega_min, omega_max, sf_steps,
                                        sf_method == "grid" ? SlowFlowMethod::Grid
                                                            : SlowFlowMethod::Continuation);
            emit_table(t, out,
                       provenance("slowflow", cfg,
                                  {{"resonance", res_text}, {"forcing", forcing}, {"omega_min", omega_min},
                                   {"omega_max", omega_max}, {"steps", sf_steps}, {"method", sf_method}}));
            return kExitOk;
        }
        if (nf->parsed()) {
            const auto res = ResonanceId::parse(res_text);
            if (!seed_text.empty())
                nfrc_settings.seed = seed_text == "linear" ? SeedKind::Linear : SeedKind::SlowFlow;
            const auto prov = provenance(
                "nfrc", cfg,
                {{"resonance", res_text}, {"forcing", forcing}, {"omega_min", omega_min},
                 {"omega_max", omega_max}, {"harmonics", nfrc_settings.harmonics},
                 {"samples", nfrc_settings.samples}, {"seed", seed_text.empty() ? "default" : seed_text}});
            Table t;
            int code = kExitOk;
            try {
                t = cmd_nfrc(res, cfg, forcing, omega_min, omega_max, nfrc_settings);
            } catch (const SeedNotFound& e) {
                std::cerr << "error: " << e.what() << "\n";
                t.header = {"omega", "max_disp", "A0"};
                for (int j = 1; j <= nfrc_settings.harmonics; ++j) {
                    t.header.push_back("A" + std::to_string(j));
                    t.header.push_back("phi" + std::to_string(j));
                }
                t.header.push_back("stable");
                t.header.push_back("tags");
                code = kExitSolver;
            }
            emit_table(t, out, prov);
            if (!plot_path.empty()) {
                std::filesystem::path data = out.path.empty() ? std::filesystem::path(plot_path + ".csv")
                                                              : std::filesystem::path(out.path);
                if (out.path.empty()) {
                    std::ostringstream os;
                    t.write_csv(os);
                    write_text(data, os.str());
                }
                write_text(plot_path, nfrc_plot_script(res, data, res.k()));
            }
            return code;
        }
        if (pr->parsed()) {
            const auto res = ResonanceId::parse(res_text);
            const auto t = cmd_prnm_curve(res, cfg, f_min, f_max, n_levels, pr_wmin, pr_wmax);
            emit_table(t, out,
                       provenance("prnm-curve", cfg,
                                  {{"resonance", res_text}, {"f_min", f_min}, {"f_max", f_max}, {"n", n_levels}}));
            return kExitOk;
        }
        if (ex->parsed()) {
            const auto res = ResonanceId::parse(res_text);
            const auto r = cmd_existence(res, cfg, forcing, omega_min, omega_max, n_scan);
            nlohmann::json window = nullptr;
            if (r.window) window = {{"omega_inf", r.window->first}, {"omega_sup", r.window->second}};
            auto prov = provenance("existence", cfg,
                                   {{"resonance", res_text}, {"forcing", forcing}, {"omega_min", omega_min},
                                    {"omega_max", omega_max}, {"n", n_scan}});
            prov["window"] = window;
            if (out.format == "json") {
                emit_json({{"window", window}, {"scan", r.scan.to_json()}}, out, prov);
            } else {
                emit_table(r.scan, out, prov);
                if (r.window)
                    std::cerr << "window: [" << fmt(r.window->first) << ", " << fmt(r.window->second) << "]\n";
                else
                    std::cerr << "window: empty\n";
            }
            return r.window ? kExitOk : kExitEmpty;
        }
        if (ve->parsed()) {
            VerifySource src;
            if (!verify_res.empty()) src.resonance = ResonanceId::parse(verify_res);
            src.forcing = verify_forcing;
            if (!rows_text.empty()) {
                const auto dots = rows_text.find("..");
                if (dots == std::string::npos) {
                    src.row_first = src.row_last = std::stoi(rows_text);
                } else {
                    src.row_first = std::stoi(rows_text.substr(0, dots));
                    src.row_last = std::stoi(rows_text.substr(dots + 2));
                }
            }
            const auto j = cmd_verify(csv_path, cfg, src);
            emit_json(j, out, provenance("verify", cfg, {{"from_csv", csv_path}, {"rows", rows_text}}));
            return kExitOk;
        }
        if (si->parsed()) {
            const auto t = cmd_simulate(cfg, forcing, sim_omega, x0, v0, periods, spp);
            emit_table(t, out,
                       provenance("simulate", cfg,
                                  {{"forcing", forcing}, {"omega", sim_omega}, {"x0", x0}, {"v0", v0},
                                   {"periods", periods}, {"steps_per_period", spp}}));
            return kExitOk;
        }
        if (fi->parsed()) {
            const std::filesystem::path dir = out.path.empty() ? std::filesystem::path("figures") / fig_id
                                                               : std::filesystem::path(out.path);
            const auto rep = cmd_figure(fig_id, cfg, dir);
            std::cout << rep.summary.dump(2) << "\n";
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kExitInvalid;
}

}  // namespace phaseres::cli
