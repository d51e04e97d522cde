#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fascai/harness.hpp"

namespace fascai {

inline constexpr int kConfigSchemaVersion = 1;

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "fascai-data";
    // Earliest moment (after the task is shown) an initial decision is accepted.
    std::int64_t min_think_ms = 0;
};

// One JSON document drives both `simulate` and `serve`:
// {
//   "schema_version": 1,
//   "seed": 1,
//   "phases": {"pre_test_trials": 0, "collaboration_trials": 1000, "post_test_trials": 0},
//   "controller": {"preset": "standard", "values": {...}, "policy": {...},
//                  "thresholds": {...}, "feedback": {...}, "window_size": 50},
//   "human": {...}, "solver": {...}, "task": {...}, "protocol": {...},
//   "arms": [{"name": "fascai", "kind": "fascai"}, ...],
//   "outcome_feedback": false, "step_budget": 6,
//   "service": {"host": "127.0.0.1", "port": 8080, "data_dir": "fascai-data", "min_think_ms": 0}
// }
struct AppConfig {
    int schema_version = kConfigSchemaVersion;
    ExperimentConfig experiment;
    ServiceOptions service;
};

AppConfig parse_config(const Json& j);
AppConfig load_config(const std::filesystem::path& path);
Json config_to_json(const AppConfig& c);

// FASCAI_PORT and FASCAI_DATA_DIR override the service block.
void apply_env_overrides(AppConfig& c);

} // namespace fascai
