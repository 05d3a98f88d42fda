#pragma once

#include <cstdio>
#include <string>

#include "json.hpp"
#include "score.hpp"
#include "simulate.hpp"

namespace ggsel {

inline nlohmann::json edges_to_json(const std::vector<Edge>& edges) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto [i, j] : edges) arr.push_back({i + 1, j + 1});
    return arr;
}

// Machine-readable posterior summary; `config_echo` is embedded verbatim so
// every artifact carries its provenance.
inline nlohmann::json summary_to_json(const PosteriorSummary& summary,
                                      const nlohmann::json& config_echo) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : summary.models) {
        models.push_back({{"edges", edges_to_json(m.graph.edges())},
                          {"total", m.score.total},
                          {"log_fit", m.score.log_fit},
                          {"log_det_hessian", m.score.log_det_hessian},
                          {"regular", m.score.regular},
                          {"probability", m.probability}});
    }
    nlohmann::json inclusion = nlohmann::json::object();
    for (const auto& [e, pr] : summary.edge_inclusion)
        inclusion[std::to_string(e.first + 1) + "-" + std::to_string(e.second + 1)] = pr;

    return nlohmann::json{{"models", models},
                          {"edge_inclusion", inclusion},
                          {"median_probability_model", edges_to_json(summary.median_model.edges())},
                          {"visited_count", summary.visited_count},
                          {"config", config_echo}};
}

inline std::string study_csv_header() {
    return "family,p,n,sp_mean,sp_se,se_mean,se_se,mcc_mean,mcc_se,"
           "gl_sp_mean,gl_se_mean,gl_mcc_mean\n";
}

inline std::string study_csv_row(const StudyResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s,%d,%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  family_name(r.spec.family).c_str(), r.spec.p, r.n, r.sp.mean, r.sp.se, r.se.mean,
                  r.se.se, r.mcc.mean, r.mcc.se, r.gl_sp.mean, r.gl_se.mean, r.gl_mcc.mean);
    return buf;
}

}  // namespace ggsel
