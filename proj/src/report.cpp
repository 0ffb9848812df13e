/*
 * Copyright 2026 The qmalab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "report.hpp"

#include <algorithm>
#include <cstdio>

namespace qma {

namespace {

Json thresholds_of(const SolverConfig &config) {
    return Json{{"newton_tol", config.newton_tol},
                {"eps_pos", config.eps_pos},
                {"linear_tol", config.linear_tol}};
}

std::string csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string config_digest(std::vector<std::pair<std::string, std::string>> kv) {
    std::sort(kv.begin(), kv.end());
    std::string canon;
    for (const auto &[key, value] : kv) {
        canon += key;
        canon += '=';
        canon += value;
        canon += '\n';
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canon)));
    return buf;
}

Json suite_report_json(const SuiteResult &result,
                       const std::string &config_hash) {
    Json points = Json::array();
    for (const SuitePoint &sp : result.samples) {
        Json residuals = Json::object();
        for (const auto &[name, value] : sp.residuals) residuals[name] = value;
        points.push_back(
            Json{{"location", sp.location}, {"residuals", residuals}});
    }
    return Json{{"op", "verify"},
                {"suite", result.suite},
                {"chart", result.chart},
                {"chart_param", result.chart_param},
                {"seed", result.seed},
                {"mutation", mutation_name(result.mutation)},
                {"threshold", result.threshold},
                {"config_hash", config_hash},
                {"points", points},
                {"summary",
                 Json{{"max_rel_residual", result.max_rel_residual},
                      {"pass", result.pass}}}};
}

Json solve_report_json(const SolverConfig &config, const std::string &density,
                       const SolveResult &result,
                       const std::string &config_hash,
                       std::optional<double> recovery_error) {
    Json stages = Json::array();
    for (const StageRecord &st : result.report.stages) {
        stages.push_back(Json{{"t", st.t},
                              {"newton_iters", st.newton_iters},
                              {"linear_iters", st.linear_iters},
                              {"final_residual", st.final_residual},
                              {"b", st.final_b},
                              {"min_eig", st.min_eig},
                              {"converged", st.converged},
                              {"message", st.message},
                              {"residuals", st.residuals}});
    }
    Json doc{{"op", "solve"},
             {"grid", Json{{"n", config.n}, {"N", config.N}}},
             {"density", density},
             {"seed", config.seed},
             {"thresholds", thresholds_of(config)},
             {"config_hash", config_hash},
             {"converged", result.report.converged},
             {"message", result.report.message},
             {"b", result.state.b},
             {"t", result.state.t},
             {"final_residual", result.state.residual_history.empty()
                                    ? 0.0
                                    : result.state.residual_history.back()},
             {"stages", stages}};
    if (recovery_error) doc["recovery_error"] = *recovery_error;
    return doc;
}

Json path_report_json(const SolverConfig &config, const std::string &density,
                      const EstimateReport &estimate,
                      const std::string &config_hash,
                      const std::optional<GridComparison> &comparison) {
    Json rows = Json::array();
    for (const EstimateRow &row : estimate.rows) {
        rows.push_back(Json{{"t", row.t},
                            {"b", row.b},
                            {"sup_q", row.sup_q},
                            {"argmax", row.argmax},
                            {"tr_max", row.tr_max},
                            {"tr_mean", row.tr_mean},
                            {"phi_inf", row.phi_inf},
                            {"bridge_min", row.bridge_min},
                            {"bridge_eq_min", row.bridge_eq_min},
                            {"laplacian_at_argmax", row.laplacian_at_argmax}});
    }
    Json doc{{"op", "path"},
             {"grid", Json{{"n", config.n}, {"N", config.N}}},
             {"density", density},
             {"seed", config.seed},
             {"thresholds", thresholds_of(config)},
             {"config_hash", config_hash},
             {"constants", Json{{"a_constant", estimate.a_constant},
                                {"a_prime", estimate.a_prime},
                                {"c_emp", estimate.c_emp},
                                {"excluded", estimate.excluded}}},
             {"rows", rows}};
    if (comparison) {
        doc["comparison"] = Json{{"coarse_N", comparison->coarse_N},
                                 {"fine_N", comparison->fine_N},
                                 {"c_emp_coarse", comparison->c_emp_coarse},
                                 {"c_emp_fine", comparison->c_emp_fine},
                                 {"rel_change", comparison->rel_change}};
    }
    return doc;
}

std::string path_trace_csv(const EstimateReport &estimate) {
    std::string out = "t,sup_q,tr_max,phi_inf,b\n";
    for (const EstimateRow &row : estimate.rows) {
        out += csv_number(row.t);
        out += ',';
        out += csv_number(row.sup_q);
        out += ',';
        out += csv_number(row.tr_max);
        out += ',';
        out += csv_number(row.phi_inf);
        out += ',';
        out += csv_number(row.b);
        out += '\n';
    }
    return out;
}

std::string json_text(const Json &doc) { return doc.dump(2) + "\n"; }

}  // namespace qma
