#include "phaseres/cli.hpp"
#include "phaseres/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef PHASERES_VERSION
#define PHASERES_VERSION "0.1.0"
#endif

namespace phaseres::cli {

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw InvalidArgument("row width does not match header");
    rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

namespace {

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

nlohmann::json Table::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string& cell = r[i];
            if (cell.empty()) {
                obj[header[i]] = nullptr;
            } else if (cell == "true" || cell == "false") {
                obj[header[i]] = cell == "true";
            } else if (auto v = parse_number(cell)) {
                obj[header[i]] = *v;
            } else {
                obj[header[i]] = cell;
            }
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

std::size_t Table::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("empty CSV file " + path.string());
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw InvalidArgument("ragged row in " + path.string());
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::string version_string() { return std::string("phaseres ") + PHASERES_VERSION; }

nlohmann::json provenance(const std::string& command, const OscillatorConfig& cfg,
                          const nlohmann::json& settings) {
    return {{"version", version_string()},
            {"command", command},
            {"oscillator", cfg.to_json()},
            {"settings", settings},
            {"units", {{"frequency", "rad/s"}, {"forcing", "N"}, {"amplitude", "m"}}}};
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".json");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
}

double polyline_distance(double x, double y, const std::vector<double>& xs,
                         const std::vector<double>& ys) {
    double best = std::numeric_limits<double>::infinity();
    if (xs.size() == 1) return std::hypot(x - xs[0], y - ys[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double dx = xs[i] - xs[i - 1];
        const double dy = ys[i] - ys[i - 1];
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0.0 ? ((x - xs[i - 1]) * dx + (y - ys[i - 1]) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(x - (xs[i - 1] + t * dx), y - (ys[i - 1] + t * dy)));
    }
    return best;
}

}  // namespace phaseres::cli
