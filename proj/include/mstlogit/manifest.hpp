#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mstlogit/config.hpp"
#include "mstlogit/layout.hpp"
#include "mstlogit/priors.hpp"

namespace mstlogit {

inline constexpr const char* kEngineVersion = "0.1.0";

/// Reproducibility record emitted next to every command's outputs. Digests
/// are FNV-1a 64 over raw file bytes.
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::map<std::string, std::string> input_digests;
    std::map<std::string, std::string> output_digests;
    std::vector<std::string> parameter_names;
    double wall_seconds = 0.0;
    // warnings
    int divergences = 0;
    int pareto_k_above_05 = 0;
    int pareto_k_above_07 = 0;
    double max_jitter = 0.0;
    std::map<std::string, std::string> extra;
};

std::uint64_t file_digest(const std::string& path);

void write_manifest(const std::string& path, const RunManifest& manifest);

/// Serializes a truth record: the layout names, the flat unconstrained
/// vector, and the constrained blocks for human inspection.
void write_truth(const std::string& path, const ParameterState& state, const Vec& unconstrained,
                 const ParameterLayout& layout);

/// Reads back the structural prefix of a truth file (everything before the
/// per-respondent latents); per-respondent entries are redrawn by consumers.
Vec read_truth_unconstrained(const std::string& path);

}  // namespace mstlogit
