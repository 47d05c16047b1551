#pragma once

// Command-line front end: every command is a plain function returning a
// Table or JSON so it can be driven from tests; run() adds argument parsing,
// file output and exit codes.

#include "phaseres/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace phaseres::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitEmpty = 4;

/// Header plus rows of already formatted cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    void write_csv(std::ostream& os) const;
    /// Array of objects; numeric-looking cells become numbers, empty cells null.
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Shortest round-trip representation.
std::string fmt(double v);
std::string fmt_opt(const std::optional<double>& v);

/// Reads a CSV with a header row. Throws InvalidArgument on ragged rows.
Table read_csv(const std::filesystem::path& path);

std::string version_string();

/// Provenance record written next to every output file. Contains no
/// timestamps so identical settings give identical bytes.
nlohmann::json provenance(const std::string& command, const OscillatorConfig& cfg,
                          const nlohmann::json& settings);

/// `path` + ".json".
std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Commands

nlohmann::json cmd_closed_form(const ResonanceId& res, const OscillatorConfig& cfg, double f);

enum class SlowFlowMethod { Continuation, Grid };

Table cmd_slowflow(const ResonanceId& res, const OscillatorConfig& cfg, double f,
                   double omega_min, double omega_max, int steps,
                   SlowFlowMethod method = SlowFlowMethod::Continuation);

enum class SeedKind { Linear, SlowFlow };

struct NfrcSettings {
    int harmonics = 15;
    int samples = 128;
    std::optional<SeedKind> seed;  // default: linear for odd k:1, slow flow otherwise
};

/// Branch rows (phase-resonance points merged in and tagged). Throws
/// SeedNotFound when no branch exists in the window.
Table cmd_nfrc(const ResonanceId& res, const OscillatorConfig& cfg, double f, double omega_min,
               double omega_max, const NfrcSettings& settings = {});

/// Gnuplot script for an nfrc table stored at `data`.
std::string nfrc_plot_script(const ResonanceId& res, const std::filesystem::path& data, int harmonic);

/// Phase-resonance curve over forcing. 1:1 and 3:1 give one row per forcing
/// level; 1:3 and 1:2 give the locus over omega_p with both root signs,
/// restricted to forcing in [f_min, f_max].
Table cmd_prnm_curve(const ResonanceId& res, const OscillatorConfig& cfg, double f_min,
                     double f_max, int n, std::optional<double> omega_min = std::nullopt,
                     std::optional<double> omega_max = std::nullopt);

struct ExistenceResult {
    Table scan;
    std::optional<std::pair<double, double>> window;  // widest contiguous window
};

ExistenceResult cmd_existence(const ResonanceId& res, const OscillatorConfig& cfg, double f,
                              double omega_min, double omega_max, int n = 2000);

struct VerifySource {
    std::optional<ResonanceId> resonance;
    std::optional<double> forcing;
    std::optional<int> row_first;
    std::optional<int> row_last;
};

/// Reports for the rows of an nfrc or slowflow CSV. Resonance and forcing
/// come from the sidecar unless given.
nlohmann::json cmd_verify(const std::filesystem::path& csv, const OscillatorConfig& cfg,
                          const VerifySource& src);

Table cmd_simulate(const OscillatorConfig& cfg, double f, double omega, double x0, double v0,
                   int periods, int steps_per_period = 200);

struct FigureReport {
    std::vector<std::filesystem::path> files;
    /// Largest distance from an emitted resonance point to its branch
    /// polyline in the (omega, amplitude) plane, and the step bound it is
    /// checked against.
    double max_point_distance = 0.0;
    double step_bound = 0.0;
    int n_points = 0;
    nlohmann::json summary;
};

/// fig1 .. fig5; writes data, resonance points and a gnuplot script to `dir`.
FigureReport cmd_figure(const std::string& id, const OscillatorConfig& cfg,
                        const std::filesystem::path& dir);

/// Distance from (x, y) to the polyline through `xs`, `ys`.
double polyline_distance(double x, double y, const std::vector<double>& xs,
                         const std::vector<double>& ys);

/// Parse arguments, dispatch, write outputs and map errors to exit codes.
int run(int argc, char** argv);

}  // namespace phaseres::cli
