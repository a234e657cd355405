#include "nsr/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nsr {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, sep)) fields.push_back(trim(field));
    if (!line.empty() && line.back() == sep) fields.emplace_back();
    return fields;
}

double parse_double_field(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": expected a number, got '" + text + "'");
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: line " + std::to_string(lineno) + ": empty key");
        if (!cfg.entries_.emplace(key, value).second)
            throw std::runtime_error("config: key '" + key + "' appears twice");
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in = open_in(path);
    std::ostringstream all;
    all << in.rdbuf();
    return parse_string(all.str());
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return parse_double_field(it->second, "config: key '" + key + "'");
}

long Config::get_int(const std::string& key, long fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t used = 0;
        const long v = std::stol(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "': expected an integer, got '" +
                                 it->second + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config: key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return {};
    std::vector<int> out;
    for (const std::string& field : split(it->second, ',')) {
        if (field.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "': expected integers, got '" +
                                     it->second + "'");
        }
    }
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return {};
    std::vector<double> out;
    for (const std::string& field : split(it->second, ',')) {
        if (field.empty()) continue;
        out.push_back(parse_double_field(field, "config: key '" + key + "'"));
    }
    return out;
}

void write_waveform_csv(const std::string& path, const ThreePhaseSignal& signal) {
    std::ofstream out = open_out(path);
    out << "k,y_a,y_b,y_c\n";
    for (std::size_t i = 0; i < signal.samples(); ++i)
        out << (i + 1) << ',' << format_double(signal.a[i]) << ',' << format_double(signal.b[i])
            << ',' << format_double(signal.c[i]) << '\n';
}

ThreePhaseSignal read_waveform_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("waveform '" + path + "': missing header row");
    if (trim(line) != "k,y_a,y_b,y_c")
        throw std::runtime_error("waveform '" + path + "': unexpected header '" + trim(line) +
                                 "'");
    ThreePhaseSignal signal;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 4)
            throw std::runtime_error("waveform '" + path + "': line " + std::to_string(lineno) +
                                     ": expected 4 columns");
        const std::string where = "waveform '" + path + "': line " + std::to_string(lineno);
        signal.a.push_back(parse_double_field(fields[1], where));
        signal.b.push_back(parse_double_field(fields[2], where));
        signal.c.push_back(parse_double_field(fields[3], where));
    }
    return signal;
}

void write_trace_csv(const std::string& path, const DetectionTrace& trace) {
    std::ofstream out = open_out(path);
    out << 'k';
    for (int i = 1; i <= trace.model.m; ++i) out << ",amp_" << i;
    out << ",residual_norm,converged\n";
    for (const TraceRecord& rec : trace.records) {
        out << rec.k;
        for (double amp : rec.amplitudes) out << ',' << format_double(amp);
        out << ',' << format_double(rec.residual_norm) << ',' << (rec.converged ? 1 : 0)
            << '\n';
    }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& points) {
    std::ofstream out = open_out(path);
    out << "beta,kappa\n";
    for (const SweepPoint& p : points)
        out << format_double(p.beta) << ',' << format_double(p.kappa) << '\n';
}

void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < m.dim(); ++i) {
        for (std::size_t j = 0; j < m.dim(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

DenseMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::string where = "matrix '" + path + "': line " + std::to_string(lineno);
        std::vector<double> row;
        for (const std::string& field : split(line, ','))
            row.push_back(parse_double_field(field, where));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(where + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("matrix '" + path + "': empty file");
    if (rows.size() != rows.front().size())
        throw std::runtime_error("matrix '" + path + "': expected a square matrix, got " +
                                 std::to_string(rows.size()) + "x" +
                                 std::to_string(rows.front().size()));
    DenseMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    return m;
}

std::string solve_report_json(const SolveReport& report) {
    nlohmann::json j;
    j["theta"] = std::vector<double>(report.theta.data(),
                                     report.theta.data() + report.theta.size());
    j["residual_norm"] = report.residual_norm;
    j["iterations"] = report.iterations;
    j["mmm"] = report.mmm;
    j["mvm"] = report.mvm;
    j["converged"] = report.converged;
    return j.dump(2);
}

}  // namespace nsr
