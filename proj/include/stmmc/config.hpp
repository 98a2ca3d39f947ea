#ifndef STMMC_CONFIG_HPP
#define STMMC_CONFIG_HPP

#include "stmmc/trainer.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace stmmc {

/// Everything a pipeline run needs: training/clustering settings plus input and output locations.
struct RunConfig {
    TrainConfig train;
    std::string expr_path;
    std::string coord_path;
    std::string feat_path;   // optional; empty means none
    std::string image_path;  // optional; used for patch features when feat_path is empty
    std::string out_dir = "stmmc_out";
    bool write_checkpoint = false;
};

/**
 * Parses the flat "key = value" format ('#' starts a comment). Keys mirror
 * the RunConfig / TrainConfig field names; theta1 and theta2 set the loss
 * weights and hidden_dims is a comma-separated width list. Unknown keys and
 * unparseable values throw ConfigError.
 */
std::map<std::string, std::string> parse_key_values(const std::string& text);

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Loads a key-value file, or a run manifest if the file is a JSON object.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical key-value rendering of every setting; parse_key_values() of it reproduces `cfg`.
std::string to_key_values(const RunConfig& cfg);

} // namespace stmmc

#endif
