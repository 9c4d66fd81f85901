#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "latentshield/evaluation.hpp"
#include "latentshield/optimizer.hpp"

namespace latentshield::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Resolved settings of one tool invocation. Every field maps 1:1 to a
/// kebab-case CLI flag / config key, so a run manifest echoing these
/// values replays the run.
struct JobConfig {
    std::string command;

    std::string encoder_ref = "toy:0";
    std::string input;
    std::string output;
    std::string set_dir;
    std::string apply_dir;
    std::string source_dir;
    std::string candidate_dir;
    std::string embeddings_path;

    double budget_255 = 4.0;  // CLI budgets are in /255 units
    double beta = 0.2;
    int steps = 30;
    std::string alpha = "auto";
    std::string init_sigma = "auto";
    std::string distance = "mse";
    std::string eot = "on";
    std::string step_rule = "l2";
    std::uint64_t seed = 0;
    int workers = 1;
    double rel_tol = 1e-4;
    int window = 5;
    bool shuffle = true;

    std::vector<std::string> counters;  // subset of {ss, jpeg}
    int ss_window = 2;
    int jpeg_quality = 80;
    bool direction = false;

    int size = 16;     // gradcheck probe extent
    double tol = 1e-3; // gradcheck tolerance

    std::string axis;
    std::vector<std::string> values;

    ProtectOptions protect_options() const;

    /// Keys echoed into the run manifest, in a fixed order.
    std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

/// Flat key=value config text; '#' starts a comment, blank lines are
/// skipped.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies one config entry onto the job; unknown keys are an error.
/// "command" and "tool-version" (manifest metadata) are accepted and
/// ignored.
void apply_config_entry(JobConfig& cfg, const std::string& key, const std::string& value);

/// "toy:<seed>" or a weight file path.
Encoder resolve_encoder(const std::string& ref);

/// delta.bin: magic "LSD1", u32 LE version=1, u32 height, width,
/// channels, f64 budget, then the perturbation as LE f32 row-major.
void save_delta(const std::string& path, const Perturbation& perturbation);
Perturbation load_delta(const std::string& path);

/// Embedding records: u32 LE id length, id bytes, u32 LE dimension,
/// then dimension LE f32 values; records repeat until EOF.
std::map<std::string, std::vector<double>> read_embeddings(const std::string& path);
void write_embeddings(const std::string& path, const std::map<std::string, std::vector<double>>& records);

int cmd_protect(const JobConfig& cfg);
int cmd_protect_universal(const JobConfig& cfg);
int cmd_evaluate(const JobConfig& cfg);
int cmd_gradcheck(const JobConfig& cfg);
int cmd_sweep(const JobConfig& cfg);

/// Dispatch on cfg.command.
int run(const JobConfig& cfg);

}  // namespace latentshield::cli
