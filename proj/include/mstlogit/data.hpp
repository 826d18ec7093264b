#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mstlogit/config.hpp"

namespace mstlogit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raw per-respondent survey fields as they appear on disk.
struct RawFields {
    double sex = 0.0;
    double edu = 0.0;
    double eco = 0.0;
    double smoke = 0.0;
    double age = 0.0;
};

/// One survey response: binary diagnosis flags plus the design vector built
/// from the raw fields. Immutable after loading.
struct RespondentRecord {
    std::string id;
    int location = 0;  // 0-based, < num_locations
    int cohort = 0;    // 0-based offset from the earliest cohort
    std::vector<std::uint8_t> responses;
    Vec covariates;  // design vector; entry 0 is the intercept
    RawFields raw;   // kept for canonical serialization
};

using Dataset = std::vector<RespondentRecord>;

/// Locations with their region partition, symmetric adjacency and the
/// precomputed distance matrices feeding the distance kernels.
struct LocationTable {
    int num_locations = 0;
    int num_regions = 0;
    std::vector<int> region_of;               // size num_locations
    std::vector<std::vector<int>> adjacency;  // sorted, symmetric, irreflexive
    std::vector<int> degree;
    std::vector<Mat> distance_matrices;

    bool neighbors(int l, int lp) const;
    /// Throws on any violated structural invariant.
    void validate() const;
};

/// (age - min) / span.
double standardize_age(double age_years, double min_age, double span);

/// Builds the design vector for the configured covariate roster.
/// Throws AgeOutOfRange when the age lies outside [min, min + span].
Vec build_design(const RawFields& raw, const ModelConfig& config);

Dataset load_dataset(const std::string& respondents_path, const ModelConfig& config);

/// Checks every record's location/cohort against the table and config.
void validate_against_table(const Dataset& dataset, const LocationTable& table,
                            const ModelConfig& config);

LocationTable load_locations(const std::string& region_path, const std::string& adjacency_path,
                             const std::vector<std::string>& distance_paths,
                             const ModelConfig& config);

void write_dataset(const std::string& path, const Dataset& dataset, const ModelConfig& config);
void write_locations(const std::string& dir, const LocationTable& table);

/// Paths of the location files inside a dataset directory.
std::vector<std::string> distance_paths_in(const std::string& dir, int count);

}  // namespace mstlogit
