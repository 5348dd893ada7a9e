#include "parcap/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace parcap {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void atomic_write(const fs::path& path, const std::string& content, bool force) {
    if (!force && fs::exists(path))
        throw IoError("refusing to overwrite " + path.string() + " without force");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string());
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

ordered_json grid_json(const GridSpec& g) {
    ordered_json j;
    j["n"] = g.n;
    j["extent"] = g.n == 2 ? std::vector<double>{g.extent[0], g.extent[1]}
                           : std::vector<double>{g.extent[0]};
    j["h"] = g.h;
    j["tau"] = g.tau;
    j["T"] = g.T;
    j["p"] = std::to_string(g.p.num) + "/" + std::to_string(g.p.den);
    j["space_cells"] = g.n_space_cells();
    j["time_levels"] = g.nt();
    return j;
}

GridSpec grid_from_json(const ordered_json& j) {
    const auto ext = j.at("extent").get<std::vector<double>>();
    return GridSpec::make(j.at("n").get<int>(),
                          {ext[0], ext.size() > 1 ? ext[1] : 1.0}, j.at("h").get<double>(),
                          j.at("tau").get<double>(), j.at("T").get<double>(),
                          parse_rational(j.at("p").get<std::string>()));
}

}  // namespace

void write_field(const fs::path& base, const Field& u, bool force) {
    ordered_json hdr;
    hdr["grid"] = grid_json(u.grid());
    hdr["layout"] = "row-major space then time, level-major, levels 0..nt";
    hdr["count"] = u.values().size();
    hdr["truncated_nodes"] = u.truncated_count();
    atomic_write(fs::path(base.string() + ".json"), hdr.dump(2) + "\n", force);

    std::string bytes(reinterpret_cast<const char*>(u.values().data()),
                      u.values().size() * sizeof(double));
    atomic_write(fs::path(base.string() + ".bin"), bytes, force);
}

Field read_field(const fs::path& base) {
    std::ifstream hs(base.string() + ".json");
    if (!hs) throw IoError("missing field header " + base.string() + ".json");
    ordered_json hdr = ordered_json::parse(hs);
    const GridSpec g = grid_from_json(hdr.at("grid"));
    std::ifstream bs(base.string() + ".bin", std::ios::binary);
    if (!bs) throw IoError("missing field payload " + base.string() + ".bin");
    std::vector<double> values(hdr.at("count").get<size_t>());
    bs.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!bs) throw IoError("short read on " + base.string() + ".bin");
    return Field(g, std::move(values));
}

void write_measure_csv(const fs::path& path, const DiscreteMeasure& mu, bool force) {
    std::ostringstream os;
    os << "cell,weight\n";
    for (const auto& [cell, w] : mu.entries()) os << cell << "," << format_double(w) << "\n";
    atomic_write(path, os.str(), force);
}

DiscreteMeasure read_measure_csv(const fs::path& path, const GridSpec& grid) {
    std::ifstream is(path);
    if (!is) throw IoError("missing measure csv " + path.string());
    DiscreteMeasure mu(grid);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        mu.add(std::stol(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return mu;
}

void write_pointset_csv(const fs::path& path, const PointSet& s, bool force) {
    std::ostringstream os;
    os << "cell\n";
    for (long c : s.cells()) os << c << "\n";
    atomic_write(path, os.str(), force);
}

std::string table_to_csv(const ExperimentTable& t) {
    std::ostringstream os;
    for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << "\n";
    }
    return os.str();
}

void write_table_csv(const fs::path& path, const ExperimentTable& t, bool force) {
    atomic_write(path, table_to_csv(t), force);
}

std::string report_to_json(const ExperimentReport& rep) {
    ordered_json j;
    j["id"] = rep.id;
    ordered_json inputs;
    for (const auto& [k, v] : rep.inputs) inputs[k] = v;
    j["inputs"] = inputs;
    ordered_json crits = ordered_json::array();
    for (const auto& c : rep.criteria) {
        ordered_json cj;
        cj["name"] = c.name;
        cj["value"] = c.value;
        cj["comparison"] = c.comparison;
        cj["threshold"] = c.threshold;
        cj["pass"] = c.pass;
        crits.push_back(cj);
    }
    j["criteria"] = crits;
    j["passed"] = rep.passed();
    j["notes"] = rep.notes;
    ordered_json tables = ordered_json::array();
    for (const auto& t : rep.tables) tables.push_back(t.name);
    j["tables"] = tables;
    return j.dump(2) + "\n";
}

std::string run_meta_json(const ExperimentReport& rep, int threads) {
    ordered_json j;
    j["id"] = rep.id;
    j["runtime_sec"] = rep.runtime_sec;
    j["threads"] = threads;
    return j.dump(2) + "\n";
}

std::string capacity_to_json(const CapacityEstimate& est) {
    ordered_json j;
    j["value"] = est.value;
    j["method"] = est.method;
    j["trace"] = est.trace;
    j["last_two_osc"] = est.last_two_osc;
    j["t_stabilized"] = est.t_stabilized;
    j["t_stab_change"] = est.t_stab_change;
    j["warnings"] = est.warnings;
    return j.dump(2) + "\n";
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

std::string svg_loglog_plot(const std::string& csv, const std::string& xcol,
                            const std::string& ycol, const std::string& title) {
    const auto rows = parse_csv(csv);
    if (rows.size() < 2) return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n";
    int xi = -1, yi = -1;
    for (size_t i = 0; i < rows[0].size(); ++i) {
        if (rows[0][i] == xcol) xi = static_cast<int>(i);
        if (rows[0][i] == ycol) yi = static_cast<int>(i);
    }
    std::vector<std::pair<double, double>> pts;
    if (xi >= 0 && yi >= 0) {
        for (size_t r = 1; r < rows.size(); ++r) {
            const double x = std::stod(rows[r][xi]);
            const double y = std::stod(rows[r][yi]);
            if (x > 0 && y > 0) pts.emplace_back(std::log10(x), std::log10(y));
        }
    }
    const double W = 480, H = 360, M = 50;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << title
       << " (log-log)</text>\n";
    if (!pts.empty()) {
        double xlo = pts[0].first, xhi = xlo, ylo = pts[0].second, yhi = ylo;
        for (auto& [x, y] : pts) {
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
        if (xhi == xlo) xhi = xlo + 1;
        if (yhi == ylo) yhi = ylo + 1;
        auto X = [&](double x) { return M + (x - xlo) / (xhi - xlo) * (W - 2 * M); };
        auto Y = [&](double y) { return H - M - (y - ylo) / (yhi - ylo) * (H - 2 * M); };
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
        for (auto& [x, y] : pts) os << X(x) << "," << Y(y) << " ";
        os << "\"/>\n";
        for (auto& [x, y] : pts)
            os << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y)
               << "\" r=\"3\" fill=\"crimson\"/>\n";
        os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\""
           << H - M << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
           << "\" text-anchor=\"middle\" font-size=\"11\">log10 " << xcol << "</text>\n";
        os << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"11\" transform=\"rotate(-90 14 "
           << H / 2 << ")\" text-anchor=\"middle\">log10 " << ycol << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace parcap
