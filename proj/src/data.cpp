#include "mstlogit/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mstlogit/csv.hpp"
#include "mstlogit/errors.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

bool LocationTable::neighbors(int l, int lp) const {
    const auto& a = adjacency[l];
    return std::binary_search(a.begin(), a.end(), lp);
}

void LocationTable::validate() const {
    const int n = num_locations;
    if (n < 1) throw Error("location table is empty");
    if (static_cast<int>(region_of.size()) != n) throw IncompletePartition(n - 1);
    for (int l = 0; l < n; ++l) {
        if (region_of[l] < 0 || region_of[l] >= num_regions) throw IncompletePartition(l);
    }
    if (static_cast<int>(adjacency.size()) != n || static_cast<int>(degree.size()) != n) {
        throw Error("adjacency lists do not cover every location");
    }
    for (int l = 0; l < n; ++l) {
        if (degree[l] != static_cast<int>(adjacency[l].size())) {
            throw Error("degree does not match adjacency for location " + std::to_string(l));
        }
        for (int lp : adjacency[l]) {
            if (lp < 0 || lp >= n) throw DanglingAdjacency(l, lp);
            if (lp == l) throw Error("self adjacency at location " + std::to_string(l));
            const auto& back = adjacency[lp];
            if (!std::binary_search(back.begin(), back.end(), l)) throw DanglingAdjacency(l, lp);
        }
    }
    for (std::size_t m = 0; m < distance_matrices.size(); ++m) {
        const Mat& d = distance_matrices[m];
        if (d.rows() != n || d.cols() != n) {
            throw Error("distance matrix " + std::to_string(m) + " has wrong shape");
        }
        for (int l = 0; l < n; ++l) {
            if (d(l, l) != 0.0) throw NonzeroDiagonal(static_cast<int>(m), l);
            for (int lp = 0; lp < n; ++lp) {
                const double v = d(l, lp);
                if (!std::isfinite(v) || v < 0.0) {
                    throw Error("distance matrix " + std::to_string(m) +
                                " has a negative or non-finite entry");
                }
                const double diff = std::abs(v - d(lp, l));
                const double scale = std::max({std::abs(v), std::abs(d(lp, l)), 1.0});
                if (diff > 1e-9 * scale) throw AsymmetricMatrix(static_cast<int>(m), l, lp);
            }
        }
    }
}

double standardize_age(double age_years, double min_age, double span) {
    if (!(span > 0.0)) throw NonpositiveSpan();
    return (age_years - min_age) / span;
}

Vec build_design(const RawFields& raw, const ModelConfig& config) {
    if (raw.age < config.age_min || raw.age > config.age_min + config.age_span) {
        throw AgeOutOfRange(raw.age);
    }
    const double age_std = standardize_age(raw.age, config.age_min, config.age_span);
    Vec x(config.num_predictors());
    for (int h = 0; h < config.num_predictors(); ++h) {
        switch (config.covariates[h]) {
            case Covariate::Intercept: x[h] = 1.0; break;
            case Covariate::Sex: x[h] = raw.sex; break;
            case Covariate::Edu: x[h] = raw.edu; break;
            case Covariate::Eco: x[h] = raw.eco; break;
            case Covariate::Smoke: x[h] = raw.smoke; break;
            case Covariate::Age: x[h] = age_std; break;
            case Covariate::AgeSex: x[h] = age_std * raw.sex; break;
        }
    }
    return x;
}

namespace {

double parse_binary(const std::string& field, const std::string& name, long line) {
    const double v = csv::parse_double(field, name, line);
    if (v != 0.0 && v != 1.0) {
        throw MalformedRow(line, "field '" + name + "' must be 0 or 1, found '" + field + "'");
    }
    return v;
}

}  // namespace

Dataset load_dataset(const std::string& respondents_path, const ModelConfig& config) {
    const csv::Table t = csv::read_file(respondents_path);
    const int n_d = config.num_diseases;

    std::vector<std::string> expected = {"id", "location", "cohort"};
    for (int j = 0; j < n_d; ++j) expected.push_back("y_" + std::to_string(j + 1));
    for (const char* f : {"sex", "edu", "eco", "smoke", "age"}) expected.emplace_back(f);
    if (t.header != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want += ',';
            want += expected[i];
        }
        throw Error("respondents file header mismatch; expected '" + want + "'");
    }

    Dataset out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const long line = t.lines[r];
        RespondentRecord rec;
        rec.id = row[0];
        if (rec.id.empty()) throw MissingValue("id", line);

        const long loc = csv::parse_long(row[1], "location", line);
        if (loc < 0) throw IndexOutOfRange("location", line);
        rec.location = static_cast<int>(loc);

        const long coh = csv::parse_long(row[2], "cohort", line);
        if (coh < 0 || coh >= config.num_cohorts) throw IndexOutOfRange("cohort", line);
        rec.cohort = static_cast<int>(coh);

        rec.responses.resize(n_d);
        for (int j = 0; j < n_d; ++j) {
            rec.responses[j] =
                static_cast<std::uint8_t>(parse_binary(row[3 + j], "y_" + std::to_string(j + 1),
                                                       line));
        }

        const int base = 3 + n_d;
        rec.raw.sex = parse_binary(row[base + 0], "sex", line);
        rec.raw.edu = parse_binary(row[base + 1], "edu", line);
        rec.raw.eco = parse_binary(row[base + 2], "eco", line);
        rec.raw.smoke = parse_binary(row[base + 3], "smoke", line);
        rec.raw.age = csv::parse_double(row[base + 4], "age", line);
        if (!std::isfinite(rec.raw.age)) {
            throw MalformedRow(line, "age is not finite");
        }

        try {
            rec.covariates = build_design(rec.raw, config);
        } catch (const AgeOutOfRange&) {
            throw IndexOutOfRange("age", line);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void validate_against_table(const Dataset& dataset, const LocationTable& table,
                            const ModelConfig& config) {
    long line = 1;
    for (const auto& rec : dataset) {
        ++line;
        if (rec.location >= table.num_locations) throw IndexOutOfRange("location", line);
        if (rec.cohort >= config.num_cohorts) throw IndexOutOfRange("cohort", line);
    }
}

LocationTable load_locations(const std::string& region_path, const std::string& adjacency_path,
                             const std::vector<std::string>& distance_paths,
                             const ModelConfig& config) {
    LocationTable table;

    {
        const csv::Table t = csv::read_file(region_path);
        if (t.header != std::vector<std::string>{"location", "region"}) {
            throw Error("locations file must have header 'location,region'");
        }
        const int n = static_cast<int>(t.rows.size());
        table.num_locations = n;
        table.region_of.assign(n, -1);
        int max_region = -1;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const long line = t.lines[r];
            const long loc = csv::parse_long(t.rows[r][0], "location", line);
            const long reg = csv::parse_long(t.rows[r][1], "region", line);
            if (loc < 0 || loc >= n) throw IndexOutOfRange("location", line);
            if (reg < 0) throw IndexOutOfRange("region", line);
            if (table.region_of[loc] != -1) {
                throw MalformedRow(line, "location listed twice");
            }
            table.region_of[loc] = static_cast<int>(reg);
            max_region = std::max(max_region, static_cast<int>(reg));
        }
        for (int l = 0; l < n; ++l) {
            if (table.region_of[l] == -1) throw IncompletePartition(l);
        }
        table.num_regions = max_region + 1;
        // region indices must form a gap-free range so every theta_r is used
        std::set<int> seen(table.region_of.begin(), table.region_of.end());
        for (int r = 0; r < table.num_regions; ++r) {
            if (!seen.count(r)) {
                throw Error("region indices are not contiguous: region " + std::to_string(r) +
                            " is empty");
            }
        }
    }

    table.adjacency.assign(table.num_locations, {});
    {
        const csv::Table t = csv::read_file(adjacency_path);
        if (t.header != std::vector<std::string>{"location_a", "location_b"}) {
            throw Error("adjacency file must have header 'location_a,location_b'");
        }
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const long line = t.lines[r];
            const long a = csv::parse_long(t.rows[r][0], "location_a", line);
            const long b = csv::parse_long(t.rows[r][1], "location_b", line);
            if (a < 0 || a >= table.num_locations) throw IndexOutOfRange("location_a", line);
            if (b < 0 || b >= table.num_locations) throw IndexOutOfRange("location_b", line);
            if (a == b) throw MalformedRow(line, "self edge");
            table.adjacency[a].push_back(static_cast<int>(b));
            table.adjacency[b].push_back(static_cast<int>(a));
        }
        for (auto& lst : table.adjacency) {
            std::sort(lst.begin(), lst.end());
            if (std::adjacent_find(lst.begin(), lst.end()) != lst.end()) {
                throw Error("duplicate edge in adjacency file");
            }
        }
    }
    table.degree.resize(table.num_locations);
    for (int l = 0; l < table.num_locations; ++l) {
        table.degree[l] = static_cast<int>(table.adjacency[l].size());
    }

    for (const auto& path : distance_paths) {
        const csv::Table t = csv::read_file(path);
        const int n = table.num_locations;
        if (static_cast<int>(t.header.size()) != n + 1 || static_cast<int>(t.rows.size()) != n) {
            throw Error("distance matrix '" + path + "' must be " + std::to_string(n) + "x" +
                        std::to_string(n) + " with index header");
        }
        Mat d(n, n);
        for (int i = 0; i < n; ++i) {
            const long line = t.lines[i];
            const long idx = csv::parse_long(t.rows[i][0], "location", line);
            if (idx != i) throw MalformedRow(line, "distance rows must be ordered by location");
            for (int j = 0; j < n; ++j) {
                d(i, j) = csv::parse_double(t.rows[i][j + 1], "d", line);
            }
        }
        const int m = static_cast<int>(table.distance_matrices.size());
        for (int i = 0; i < n; ++i) {
            if (d(i, i) != 0.0) throw NonzeroDiagonal(m, i);
            for (int j = i + 1; j < n; ++j) {
                const double diff = std::abs(d(i, j) - d(j, i));
                const double scale = std::max({std::abs(d(i, j)), std::abs(d(j, i)), 1.0});
                if (diff > 1e-9 * scale) throw AsymmetricMatrix(m, i, j);
                if (!(d(i, j) >= 0.0) || !std::isfinite(d(i, j))) {
                    throw Error("distance matrix '" + path + "' has a bad entry");
                }
            }
        }
        table.distance_matrices.push_back(std::move(d));
    }

    // the configured distance kernels must have matrices to point at
    for (const auto& spec : config.kernels) {
        if (spec.kind == KernelKind::Distance &&
            spec.distance_index >= static_cast<int>(table.distance_matrices.size())) {
            throw Error("kernel roster references distance matrix " +
                        std::to_string(spec.distance_index) + " but only " +
                        std::to_string(table.distance_matrices.size()) + " were provided");
        }
    }

    table.validate();
    return table;
}

void write_dataset(const std::string& path, const Dataset& dataset, const ModelConfig& config) {
    csv::Table t;
    t.header = {"id", "location", "cohort"};
    for (int j = 0; j < config.num_diseases; ++j) t.header.push_back("y_" + std::to_string(j + 1));
    for (const char* f : {"sex", "edu", "eco", "smoke", "age"}) t.header.emplace_back(f);
    for (const auto& rec : dataset) {
        std::vector<std::string> row;
        row.push_back(rec.id);
        row.push_back(std::to_string(rec.location));
        row.push_back(std::to_string(rec.cohort));
        for (int j = 0; j < config.num_diseases; ++j) {
            row.push_back(rec.responses[j] ? "1" : "0");
        }
        row.push_back(format_double(rec.raw.sex));
        row.push_back(format_double(rec.raw.edu));
        row.push_back(format_double(rec.raw.eco));
        row.push_back(format_double(rec.raw.smoke));
        row.push_back(format_double(rec.raw.age));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

void write_locations(const std::string& dir, const LocationTable& table) {
    {
        csv::Table t;
        t.header = {"location", "region"};
        for (int l = 0; l < table.num_locations; ++l) {
            t.rows.push_back({std::to_string(l), std::to_string(table.region_of[l])});
        }
        csv::write_file(dir + "/locations.csv", t);
    }
    {
        csv::Table t;
        t.header = {"location_a", "location_b"};
        for (int l = 0; l < table.num_locations; ++l) {
            for (int lp : table.adjacency[l]) {
                if (lp > l) t.rows.push_back({std::to_string(l), std::to_string(lp)});
            }
        }
        csv::write_file(dir + "/adjacency.csv", t);
    }
    for (std::size_t m = 0; m < table.distance_matrices.size(); ++m) {
        csv::Table t;
        t.header = {"location"};
        for (int l = 0; l < table.num_locations; ++l) t.header.push_back(std::to_string(l));
        const Mat& d = table.distance_matrices[m];
        for (int i = 0; i < table.num_locations; ++i) {
            std::vector<std::string> row{std::to_string(i)};
            for (int j = 0; j < table.num_locations; ++j) row.push_back(format_double(d(i, j)));
            t.rows.push_back(std::move(row));
        }
        csv::write_file(dir + "/distance_" + std::to_string(m) + ".csv", t);
    }
}

std::vector<std::string> distance_paths_in(const std::string& dir, int count) {
    std::vector<std::string> out;
    for (int m = 0; m < count; ++m) {
        out.push_back(dir + "/distance_" + std::to_string(m) + ".csv");
    }
    return out;
}

}  // namespace mstlogit
