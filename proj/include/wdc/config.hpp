#pragma once

// Run configuration: one JSON document per scenario. Field names carry
// their units (`_s`, `_m`, `_hz`). Unknown keys are rejected.

#include "wdc/analysis.hpp"
#include "wdc/event_generator.hpp"
#include "wdc/orbit_kinematics.hpp"
#include "wdc/protocol.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace wdc {

struct RunConfig {
    std::string scenario = "unnamed";
    std::optional<std::uint64_t> seed;
    std::string output_dir = "out";
    PassProfile pass;
    PhysicalConstants constants;
    SimulationConfig sim;
    ProtocolParams protocol;
    AnalysisParams analysis;

    void validate() const;
};

/// Throws ConfigError on schema or value errors.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

} // namespace wdc
