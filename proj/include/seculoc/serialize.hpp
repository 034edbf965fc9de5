#pragma once
// JSON round-trips for the simulation and estimation types, used by the CLI
// to pipe scenarios between `simulate` and `estimate`.

#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "seculoc/conic/solver.hpp"
#include "seculoc/estimator.hpp"
#include "seculoc/measurement.hpp"
#include "seculoc/scenario.hpp"

namespace seculoc {

inline nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vec vec_from_json(const nlohmann::json& a) {
    Vec v(static_cast<int>(a.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

inline nlohmann::json mat_to_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i)));
    return rows;
}

inline Mat mat_from_json(const nlohmann::json& rows) {
    const int r = static_cast<int>(rows.size());
    if (r == 0) return Mat(0, 0);
    const int c = static_cast<int>(rows.at(0).size());
    Mat m(r, c);
    for (int i = 0; i < r; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<int>(row.size()) != c)
            throw std::invalid_argument("mat_from_json: ragged rows");
        for (int j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return m;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json j;
    nlohmann::json anchors = nlohmann::json::array();
    for (const Vec& a : s.anchors) anchors.push_back(vec_to_json(a));
    j["anchors"] = std::move(anchors);
    j["target"] = vec_to_json(s.target);
    j["attacker_set"] = s.attacker_set;
    j["attack_magnitudes"] = vec_to_json(s.attack_magnitudes);
    j["area_side"] = s.area_side;
    j["seed"] = s.seed;
    return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    for (const auto& a : j.at("anchors")) s.anchors.push_back(vec_from_json(a));
    s.target = vec_from_json(j.at("target"));
    s.attacker_set = j.at("attacker_set").get<std::vector<int>>();
    s.attack_magnitudes = vec_from_json(j.at("attack_magnitudes"));
    s.area_side = j.at("area_side").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

inline nlohmann::json observations_to_json(const RangeObservations& o) {
    nlohmann::json j;
    j["samples"] = mat_to_json(o.samples);
    j["medians"] = vec_to_json(o.medians);
    j["sigma"] = o.sigma;
    j["k"] = o.k;
    return j;
}

inline RangeObservations observations_from_json(const nlohmann::json& j) {
    RangeObservations o;
    o.samples = mat_from_json(j.at("samples"));
    o.medians = vec_from_json(j.at("medians"));
    o.sigma = j.at("sigma").get<double>();
    o.k = j.at("k").get<int>();
    return o;
}

inline nlohmann::json report_to_json(const EstimateReport& r) {
    nlohmann::json j;
    j["x_hat"] = vec_to_json(r.x_hat);
    j["y_hat"] = vec_to_json(r.y_hat);
    j["e_hat"] = vec_to_json(r.e_hat);
    j["rho_hat"] = vec_to_json(r.rho_hat);
    j["detected"] = r.detected;
    j["iterations_used"] = r.iterations_used;
    nlohmann::json trace = nlohmann::json::array();
    for (const Vec& x : r.iterate_trace) trace.push_back(vec_to_json(x));
    j["iterate_trace"] = std::move(trace);
    j["subproblem_objectives"] = r.subproblem_objectives;
    j["data_objectives"] = r.data_objectives;
    nlohmann::json statuses = nlohmann::json::array();
    for (conic::SolveStatus s : r.solver_statuses) statuses.push_back(conic::to_string(s));
    j["solver_statuses"] = std::move(statuses);
    j["solver_failed"] = r.solver_failed;
    return j;
}

}  // namespace seculoc
