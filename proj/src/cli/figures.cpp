#include "phaseres/cli.hpp"

#include "phaseres/closed_form.hpp"
#include "phaseres/errors.hpp"
#include "phaseres/harmonic_balance.hpp"
#include "phaseres/slow_flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phaseres::cli {

namespace {

// Fixed forcing levels and windows for each figure.
constexpr double kSlowFlowStep = 5e-2;
constexpr double kHBStep = 1e-2;

struct Curve {
    std::vector<double> x;
    std::vector<double> y;
};

struct Writer {
    std::filesystem::path dir;
    FigureReport report;
    Table points;

    explicit Writer(std::filesystem::path d) : dir(std::move(d)) {
        points.header = {"family", "f", "kind", "omega", "amplitude", "distance"};
    }

    void table(const std::string& name, const Table& t) {
        std::ostringstream os;
        t.write_csv(os);
        write_text(dir / name, os.str());
        report.files.push_back(dir / name);
    }

    void text(const std::string& name, const std::string& body) {
        write_text(dir / name, body);
        report.files.push_back(dir / name);
    }

    /// Records a resonance point with its distance to `branch`.
    void point(const std::string& family, double f, const std::string& kind, double omega,
               double amp, const Curve& branch) {
        const double d = branch.x.empty() ? std::numeric_limits<double>::infinity()
                                          : polyline_distance(omega, amp, branch.x, branch.y);
        report.max_point_distance = std::max(report.max_point_distance, d);
        ++report.n_points;
        points.add_row({family, fmt(f), kind, fmt(omega), fmt(amp), fmt(d)});
    }

    FigureReport finish(const std::string& id, double bound, const std::string& script) {
        table(id + "_points.csv", points);
        text(id + ".gp", script);
        report.step_bound = bound;
        nlohmann::json files = nlohmann::json::array();
        for (const auto& p : report.files) files.push_back(p.filename().string());
        files.push_back(id + "_summary.json");
        report.summary = {{"figure", id},
                          {"files", files},
                          {"n_points", report.n_points},
                          {"max_point_distance", report.max_point_distance},
                          {"step_bound", bound},
                          {"within_bound", report.n_points > 0 && report.max_point_distance <= bound}};
        write_text(dir / (id + "_summary.json"), report.summary.dump(2) + "\n");
        report.files.push_back(dir / (id + "_summary.json"));
        return report;
    }
};

std::string tag(double f) {
    std::string s = fmt(f);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

Table slow_table(const slow_flow::Branch& b, Curve& c) {
    Table t;
    t.header = {"omega", "r", "phi", "stable"};
    for (const auto& s : b.points) {
        t.add_row({fmt(s.omega), fmt(s.state.r), fmt(s.state.phi),
                   s.stable ? (*s.stable ? "true" : "false") : ""});
        c.x.push_back(s.omega);
        c.y.push_back(s.state.r);
    }
    return t;
}

/// Max displacement plus harmonic `harmonic` of each point; the curve gets max displacement.
Table hb_table(const hb::Branch& b, int harmonic, Curve& c) {
    Table t;
    t.header = {"omega", "max_disp", "A" + std::to_string(harmonic), "phi" + std::to_string(harmonic),
                "stable"};
    for (const auto& p : b.points) {
        const double a = p.max_displacement;
        t.add_row({fmt(p.omega), fmt(p.max_displacement), fmt(p.solution.amplitude(harmonic)),
                   fmt(p.solution.phase(harmonic)), p.stable ? (*p.stable ? "true" : "false") : ""});
        c.x.push_back(p.omega);
        c.y.push_back(a);
    }
    return t;
}

std::string plot_header(const std::string& id, const std::string& ylabel) {
    std::ostringstream os;
    os << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << id << ".png'\n"
       << "set xlabel 'omega [rad/s]'\n"
       << "set ylabel '" << ylabel << "'\n"
       << "set key top left\n";
    return os.str();
}

// -- 1:1 ---------------------------------------------------------------------

FigureReport fig1(const OscillatorConfig& cfg, const std::filesystem::path& dir) {
    Writer w(dir);
    const slow_flow::SlowFlowSystem sys(ResonanceId(1, 1));
    std::ostringstream gp;
    gp << plot_header("fig1", "r [m]") << "plot ";
    for (double f : {0.001, 0.005, 0.01}) {
        Curve c;
        const auto b = slow_flow::sweep_branch(sys, 0.8, 1.6, cfg, f);
        const std::string name = "fig1_branch_f" + tag(f) + ".csv";
        w.table(name, slow_table(b, c));
        const auto r = closed_form::primary_resonance(cfg, f);
        w.point("1:1", f, "amplitude", r.omega_a, r.amp_a, c);
        w.point("1:1", f, "phase", r.omega_p, r.amp_p, c);
        gp << "'" << name << "' using 1:2 with lines lc rgb 'black' notitle, \\\n     ";
    }
    Table loci;
    loci.header = {"f", "omega_a", "amp_a", "omega_p", "amp_p"};
    for (int i = 0; i <= 200; ++i) {
        const double f = 0.011 * i / 200.0;
        const auto r = closed_form::primary_resonance(cfg, f);
        loci.add_row({fmt(f), fmt(r.omega_a), fmt(r.amp_a), fmt(r.omega_p), fmt(r.amp_p)});
    }
    w.table("fig1_loci.csv", loci);
    gp << "'fig1_loci.csv' using 2:3 with lines dt 2 lc rgb 'orange' title 'amplitude resonance', \\\n"
       << "     'fig1_loci.csv' using 4:5 with lines lc rgb 'orange' title 'phase resonance', \\\n"
       << "     'fig1_points.csv' using 4:5 with points pt 7 lc rgb 'red' title 'points'\n";
    return w.finish("fig1", kSlowFlowStep, gp.str());
}

// -- 3:1 ---------------------------------------------------------------------

FigureReport fig2(const OscillatorConfig& cfg, const std::filesystem::path& dir) {
    Writer w(dir);
    slow_flow::Options opts;
    opts.freeze_gamma = true;  // same static response as the closed-form curves
    const slow_flow::SlowFlowSystem sys(ResonanceId(3, 1), opts);
    std::ostringstream gp;
    gp << plot_header("fig2", "r [m]") << "plot ";
    for (double f : {0.1, 0.15, 0.2}) {
        Curve c;
        StepControl sc;
        sc.max = 5e-3;
        const auto b = slow_flow::sweep_branch(sys, 0.3, 0.4, cfg, f, sc);
        const std::string name = "fig2_branch_f" + tag(f) + ".csv";
        w.table(name, slow_table(b, c));
        const auto a = closed_form::super31_amplitude_resonance(cfg, f);
        const auto p = closed_form::super31_phase_resonance(cfg, f);
        w.point("3:1", f, "amplitude", a.omega, a.amplitude, c);
        w.point("3:1", f, "phase", p.omega, p.amplitude, c);
        gp << "'" << name << "' using 1:2 with lines lc rgb 'black' notitle, \\\n     ";
    }
    Table loci;
    loci.header = {"f", "omega_a", "amp_a", "omega_p", "amp_p"};
    for (int i = 0; i <= 200; ++i) {
        const double f = 0.22 * i / 200.0;
        const auto a = closed_form::super31_amplitude_resonance(cfg, f);
        const auto p = closed_form::super31_phase_resonance(cfg, f);
        loci.add_row({fmt(f), fmt(a.omega), fmt(a.amplitude), fmt(p.omega), fmt(p.amplitude)});
    }
    w.table("fig2_loci.csv", loci);
    gp << "'fig2_loci.csv' using 2:3 with lines dt 2 lc rgb 'orange' title 'amplitude resonance', \\\n"
       << "     'fig2_loci.csv' using 4:5 with lines lc rgb 'orange' title 'phase resonance', \\\n"
       << "     'fig2_points.csv' using 4:5 with points pt 7 lc rgb 'red' title 'points'\n";
    return w.finish("fig2", 5e-3, gp.str());
}

// -- 1:3 ---------------------------------------------------------------------

FigureReport fig3(const OscillatorConfig& cfg, const std::filesystem::path& dir) {
    Writer w(dir);
    const ResonanceId res(1, 3);
    const slow_flow::SlowFlowSystem sys(res);
    const double lo = 1.5, hi = 15.0;
    std::ostringstream gp;
    gp << plot_header("fig3", "r [m]") << "plot ";
    for (double f : {0.3, 0.6, 1.0}) {
        Curve c;
        const auto b = slow_flow::sweep_branch(sys, lo, hi, cfg, f);
        const std::string name = "fig3_branch_f" + tag(f) + ".csv";
        w.table(name, slow_table(b, c));
        for (const auto& p : closed_form::locus_points_at_forcing(res, cfg, f, lo, hi))
            w.point("1:3", f, "phase", p.omega_p, p.amplitude, c);
        gp << "'" << name << "' using 1:2 with lines lc rgb 'black' notitle, \\\n     ";
    }
    w.table("fig3_locus.csv", cmd_prnm_curve(res, cfg, 0.0, 1e9, 1000, 3.0 * cfg.omega0() * (1 + 1e-6), hi));
    gp << "'fig3_locus.csv' using 2:3 with lines lc rgb 'orange' title 'phase resonance', \\\n"
       << "     'fig3_points.csv' using 4:5 with points pt 7 lc rgb 'red' title 'points'\n";
    return w.finish("fig3", kSlowFlowStep, gp.str());
}

// -- 1:2 ---------------------------------------------------------------------

FigureReport fig4(const OscillatorConfig& cfg, const std::filesystem::path& dir) {
    Writer w(dir);
    const ResonanceId res(1, 2);
    slow_flow::Options opts;
    opts.truncate_12 = true;  // the model behind the locus and the margin
    const slow_flow::SlowFlowSystem sys(res, opts);
    const double lo = 1.0, hi = 8.0;
    Table windows;
    windows.header = {"f", "omega_inf", "omega_sup"};
    std::ostringstream gp;
    gp << plot_header("fig4", "r [m]") << "set multiplot layout 1,2\nplot ";
    std::ostringstream margins;
    margins << "set ylabel 'existence margin'\nplot ";
    for (double f : {0.8, 1.0, 3.0}) {
        const auto ex = cmd_existence(res, cfg, f, lo, hi, 2000);
        const std::string mname = "fig4_margin_f" + tag(f) + ".csv";
        w.table(mname, ex.scan);
        margins << "'" << mname << "' using 1:2 with lines title 'f=" << fmt(f) << "', \\\n     ";
        windows.add_row({fmt(f), ex.window ? fmt(ex.window->first) : "",
                         ex.window ? fmt(ex.window->second) : ""});
        Curve c;
        try {
            const auto b = slow_flow::sweep_branch(sys, lo, hi, cfg, f);
            const std::string name = "fig4_branch_f" + tag(f) + ".csv";
            w.table(name, slow_table(b, c));
            gp << "'" << name << "' using 1:2 with lines lc rgb 'black' notitle, \\\n     ";
        } catch (const SeedNotFound&) {
            continue;  // below the smallest forcing with a 1:2 branch
        }
        for (const auto& p : closed_form::locus_points_at_forcing(res, cfg, f, lo, hi))
            w.point("1:2", f, "phase", p.omega_p, p.amplitude, c);
    }
    w.table("fig4_windows.csv", windows);
    w.table("fig4_locus.csv", cmd_prnm_curve(res, cfg, 0.0, 1e9, 1000, 2.0 * cfg.omega0() * (1 + 1e-6), hi));
    gp << "'fig4_locus.csv' using 2:3 with lines lc rgb 'orange' title 'phase resonance', \\\n"
       << "     'fig4_points.csv' using 4:5 with points pt 7 lc rgb 'red' title 'points'\n"
       << margins.str() << "0 with lines lc rgb 'gray' notitle\n"
       << "unset multiplot\n";
    return w.finish("fig4", kSlowFlowStep, gp.str());
}

// -- harmonic balance -------------------------------------------------------

FigureReport fig5(const OscillatorConfig& cfg, const std::filesystem::path& dir) {
    Writer w(dir);
    std::ostringstream gp;
    gp << plot_header("fig5", "max |x| [m]") << "plot ";

    auto add = [&](const std::string& name, const hb::HBProblem& prob, const hb::Branch& b,
                   const std::vector<ResonanceId>& families) {
        Curve c;
        w.table(name, hb_table(b, prob.resonance.k(), c));
        gp << "'" << name << "' using 1:2 with lines lc rgb 'black' notitle, \\\n     ";
        for (const auto& fam : families) {
            // keep each family to its own frequency neighbourhood
            const double nominal = fam.nominal_frequency(cfg.omega0());
            for (const auto& p : hb::detect_phase_resonance(prob, b, fam)) {
                if (p.omega < 0.5 * nominal || p.omega > 2.0 * nominal) continue;
                w.point(fam.to_string(), prob.forcing, "phase", p.omega, p.max_displacement, c);
            }
        }
    };

    {
        const hb::HBProblem prob{cfg, 0.01, ResonanceId(1, 1)};
        add("fig5_1to1.csv", prob, hb::continue_branch(prob, 0.8, 0.8, 1.6), {ResonanceId(1, 1)});
    }
    {
        const hb::HBProblem prob{cfg, 0.3, ResonanceId(1, 1)};
        add("fig5_super.csv", prob, hb::continue_branch(prob, 0.1, 0.1, 0.45),
            {ResonanceId(3, 1), ResonanceId(5, 1), ResonanceId(7, 1)});
    }
    {
        const hb::HBProblem prob{cfg, 0.6, ResonanceId(1, 3)};
        if (auto b = hb::find_isola(prob, 1.5, 18.0)) add("fig5_1to3.csv", prob, *b, {prob.resonance});
    }
    {
        const hb::HBProblem prob{cfg, 2.0, ResonanceId(1, 2)};
        if (auto b = hb::find_isola(prob, 1.5, 8.0)) add("fig5_1to2.csv", prob, *b, {prob.resonance});
    }
    {
        const hb::HBProblem prob{cfg, 1.0, ResonanceId(2, 1)};
        const auto main = hb::continue_branch(prob, 0.3, 0.3, 1.5);
        const auto bifs = hb::symmetry_breaking_points(prob, main);
        if (!bifs.empty())
            add("fig5_2to1.csv", prob, hb::switch_branch(prob, bifs.front(), 0.3, 1.5), {prob.resonance});
    }
    gp << "'fig5_points.csv' using 4:5 with points pt 7 lc rgb 'red' title 'phase resonance'\n";
    return w.finish("fig5", kHBStep, gp.str());
}

}  // namespace

FigureReport cmd_figure(const std::string& id, const OscillatorConfig& cfg,
                        const std::filesystem::path& dir) {
    cfg.validate();
    if (id == "fig1") return fig1(cfg, dir);
    if (id == "fig2") return fig2(cfg, dir);
    if (id == "fig3") return fig3(cfg, dir);
    if (id == "fig4") return fig4(cfg, dir);
    if (id == "fig5") return fig5(cfg, dir);
    throw InvalidArgument("unknown figure '" + id + "'");
}

}  // namespace phaseres::cli
