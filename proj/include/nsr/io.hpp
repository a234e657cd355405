#pragma once

#include <map>
#include <string>
#include <vector>

#include "nsr/harmonic.hpp"
#include "nsr/matrix.hpp"
#include "nsr/precond.hpp"
#include "nsr/richardson.hpp"

namespace nsr {

/// Shortest round-trippable decimal form (%.17g); all CSV/JSON emitters use
/// this so fixed seeds reproduce byte-identical artifacts.
std::string format_double(double v);

/// Flat key = value configuration. Lines are `key = value`, blank, or
/// `# comment`; keys may be dotted (event.1.factor). Typed getters raise
/// std::runtime_error naming the offending key.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated integers, e.g. "3,4,5".
    std::vector<int> get_int_list(const std::string& key) const;
    /// Comma-separated reals, e.g. "1e-4,1e-3,1e-2".
    std::vector<double> get_double_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

void write_waveform_csv(const std::string& path, const ThreePhaseSignal& signal);
ThreePhaseSignal read_waveform_csv(const std::string& path);

void write_trace_csv(const std::string& path, const DetectionTrace& trace);

void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& points);

/// Matrix CSV: one row per line, comma-separated, no header; must be square.
void write_matrix_csv(const std::string& path, const DenseMatrix& m);
DenseMatrix read_matrix_csv(const std::string& path);

/// SolveReport as a JSON object with fields theta, residual_norm,
/// iterations, mmm, mvm, converged.
std::string solve_report_json(const SolveReport& report);

}  // namespace nsr
