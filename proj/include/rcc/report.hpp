#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcc/metrics.hpp"
#include "rcc/survival.hpp"

namespace rcc {

inline constexpr const char* kToolVersion = "0.1.0";

// Right-continuous step paths with censor tick marks, legend, and an
// optional HR/CI/p annotation. Output is byte-deterministic for fixed
// inputs.
std::string render_km_svg(const std::vector<KmCurve>& curves,
                          const std::vector<std::string>& names,
                          const std::optional<HazardRatioResult>& hr = std::nullopt);

// Unit-square axes with the chance diagonal and a per-curve AUC legend;
// optional aligned CIs extend the legend entries.
std::string render_roc_svg(const std::vector<RocCurve>& curves,
                           const std::vector<AucResult>& cis = {});

struct RunManifest {
    std::string command_line;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_digests;  // path -> fnv1a hex
    std::string tool_version = kToolVersion;
    std::string timestamp;  // ISO-8601, the one non-deterministic field
    std::vector<std::string> outputs;  // files written, relative to the manifest
};

std::string manifest_to_json(const RunManifest& manifest);

// fills timestamp and writes <dir>/manifest.json
void write_manifest(const std::string& dir, RunManifest manifest);

}  // namespace rcc
