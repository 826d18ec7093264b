#include "mstlogit/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mstlogit/coefficients.hpp"
#include "mstlogit/errors.hpp"
#include "mstlogit/rng.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

using nlohmann::json;

std::uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for digesting");
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
    }
    return h;
}

void write_manifest(const std::string& path, const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["engine_version"] = kEngineVersion;
    j["rng_algorithm"] = Rng::kAlgorithm;
    j["seed"] = m.seed;
    j["config_digest"] = m.config_digest;
    j["input_digests"] = m.input_digests;
    j["output_digests"] = m.output_digests;
    if (!m.parameter_names.empty()) j["parameter_layout"] = m.parameter_names;
    j["timing"] = {{"wall_seconds", m.wall_seconds}};
    json warnings;
    warnings["divergences"] = m.divergences;
    warnings["pareto_k_above_05"] = m.pareto_k_above_05;
    warnings["pareto_k_above_07"] = m.pareto_k_above_07;
    warnings["max_jitter"] = m.max_jitter;
    j["warnings"] = warnings;
    for (const auto& [k, v] : m.extra) j[k] = v;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

namespace {

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

}  // namespace

void write_truth(const std::string& path, const ParameterState& state, const Vec& unconstrained,
                 const ParameterLayout& layout) {
    json j;
    j["dim"] = layout.dim;
    j["structural_dim"] = layout.comorbidity ? layout.off_eps : layout.dim;
    j["names"] = layout.names();
    j["unconstrained"] = vector_json(unconstrained);
    json c;
    if (layout.direct_mean) {
        c["b0"] = matrix_json(state.b0_direct);
    } else {
        c["b0"] = matrix_json(assemble_b0(state.phi, state.delta, state.psi));
        c["phi"] = matrix_json(state.phi);
        c["delta"] = vector_json(state.delta);
        c["psi"] = matrix_json(state.psi);
    }
    if (layout.has_lambda0) c["lambda0"] = matrix_json(state.lambda0);
    if (layout.has_lambda1) c["lambda1"] = matrix_json(state.lambda1);
    if (layout.off_theta_r >= 0) c["theta_region"] = vector_json(state.theta_region);
    if (layout.off_theta_c >= 0) c["theta_contiguity"] = state.theta_contiguity;
    if (layout.has_kernels) c["omega"] = matrix_json(state.omega);
    if (layout.comorbidity) c["gamma"] = vector_json(state.gamma);
    j["constrained"] = std::move(c);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

Vec read_truth_unconstrained(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open truth file '" + path + "'");
    json j;
    in >> j;
    const auto& arr = j.at("unconstrained");
    const int structural = j.value("structural_dim", static_cast<int>(arr.size()));
    Vec out(structural);
    for (int i = 0; i < structural; ++i) out[i] = arr.at(i).get<double>();
    return out;
}

}  // namespace mstlogit
