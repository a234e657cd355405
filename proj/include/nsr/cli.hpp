#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsr/harmonic.hpp"
#include "nsr/io.hpp"
#include "nsr/richardson.hpp"

namespace nsr::cli {

/// Everything a command run needs: the subcommand, the config file, where to
/// write artifacts, and the flag overrides that shadow config values.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<long> seed;
    std::optional<double> beta;
    std::optional<long> freeze_after;
    std::optional<std::string> algo;
    std::optional<int> order;
};

SignalScenario scenario_from_config(const Config& cfg);
FaultSpec fault_from_config(const Config& cfg);
InverterSpec inverter_spec_from_name(const std::string& name, std::optional<int> order);
RichardsonConfig solver_from_config(const Config& cfg, const RunManifest& manifest);

/// A confirmed amplitude excursion: record indices [begin, end) into the
/// trace it was computed from, with direction +1 (swell) or -1 (sag).
struct FlaggedInterval {
    std::size_t begin = 0;
    std::size_t end = 0;
    int direction = 0;
};

/// Flags runs of at least min_run consecutive samples deviating more than
/// `threshold` (relative) from the median of `baseline` unflagged samples
/// ending `min_run` steps back — excursions never pollute the baseline, and
/// the guard gap keeps slow onset ramps from dragging it along. The first
/// `baseline + min_run` samples are warm-up.
std::vector<FlaggedInterval> flag_amplitude_events(const std::vector<double>& amps,
                                                   std::size_t baseline,
                                                   std::size_t min_run,
                                                   double threshold = 0.10);

int cmd_generate(const RunManifest& manifest);
int cmd_detect(const RunManifest& manifest);
int cmd_bench(const RunManifest& manifest);
int cmd_sweep(const RunManifest& manifest);

/// Dispatch on manifest.command; exceptions become a one-line stderr
/// diagnostic and a nonzero return.
int run(const RunManifest& manifest);

}  // namespace nsr::cli
