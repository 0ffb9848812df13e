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

/**
 * @file report.hpp
 * @brief Machine-readable reports: JSON documents and the path trace CSV.
 *
 * Reports are deliberately timestamp-free so that a run with identical
 * configuration and seed produces byte-identical output.  Every document
 * embeds the seed, the acting thresholds, and a digest of the effective
 * configuration.
 */

#ifndef QMA_REPORT_HPP_
#define QMA_REPORT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "monitor.hpp"
#include "solver.hpp"
#include "suites.hpp"

namespace qma {

using Json = nlohmann::ordered_json;

/** FNV-1a 64-bit digest (stable across platforms, no dependencies). */
std::uint64_t fnv1a64(std::string_view text);

/**
 * @brief Canonical digest of a key=value configuration.
 *
 * Pairs are sorted by key and joined as "key=value\n" lines before
 * hashing, so insertion order never changes the digest.  Returned as a
 * fixed-width hex string.
 */
std::string config_digest(std::vector<std::pair<std::string, std::string>> kv);

/** Verification suite report: per-point residuals plus a verdict. */
Json suite_report_json(const SuiteResult &result,
                       const std::string &config_hash);

/** Continuity-path solve report: stage records plus the final state. */
Json solve_report_json(const SolverConfig &config, const std::string &density,
                       const SolveResult &result,
                       const std::string &config_hash,
                       std::optional<double> recovery_error = std::nullopt);

/** Refined-grid comparison appended to a path report when requested. */
struct GridComparison {
    int coarse_N = 0;
    int fine_N = 0;
    double c_emp_coarse = 0.0;
    double c_emp_fine = 0.0;
    double rel_change = 0.0;  ///< |fine - coarse| / |fine|
};

/** Trace-monitor report for a solved continuity path. */
Json path_report_json(const SolverConfig &config, const std::string &density,
                      const EstimateReport &estimate,
                      const std::string &config_hash,
                      const std::optional<GridComparison> &comparison =
                          std::nullopt);

/** CSV trace of the monitored path: t, sup_q, tr_max, phi_inf, b. */
std::string path_trace_csv(const EstimateReport &estimate);

/** Serialize with a stable layout (2-space indent, trailing newline). */
std::string json_text(const Json &doc);

}  // namespace qma

#endif  // QMA_REPORT_HPP_
