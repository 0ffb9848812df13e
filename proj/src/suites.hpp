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
 * @file suites.hpp
 * @brief Named verification suites: each sweeps an identity check over
 *        random sample points (or random fields on the torus) and reports
 *        named residuals per sample against a single threshold table.
 *
 * Suites and what they check:
 *   quaternionic  structure triple relations J J = -Id, IJ + JI = 0, KK = -Id
 *   bijection     metric <-> form round trip, q-reality, positivity agreement
 *   pre           structure-transport identities (raw and normal chart)
 *   fund          curvature-trace identities for twist-invariant pairings
 *   fund2         paired second-order identities and their conjugates
 *   frame         adapted-frame completeness, frame trace, pair invariance
 *   delta         trace-Laplacian expansion identity on random bundles
 *   eqns          separate vanishing of curvature/structure summands
 *   fform         potential-to-metric map against the (2,0)-form route
 *   equiv         log-density vs form-ratio residual, Pfaffian vs determinant
 *
 * Negative controls are first-class: `sign-flip` damages the curvature
 * block of the delta expansion, `de-hyperhermitianize` feeds non-invariant
 * data to fund/eqns.  A mutated run is expected to FAIL its threshold.
 *
 * Runs are deterministic for a given (suite, chart, points, seed)
 * regardless of the worker-pool size: every sample derives its own
 * generator from the seed and the sample index.
 */

#ifndef QMALAB_SUITES_HPP
#define QMALAB_SUITES_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "charts.hpp"
#include "common.hpp"

namespace qma {

/** Negative-control mutations accepted by some suites. */
enum class Mutation {
    none,
    sign_flip,             ///< delta: damaged curvature block
    de_hyperhermitianize,  ///< fund/eqns: non-twist-invariant pairing
};

/** Parse "none" | "sign-flip" | "de-hyperhermitianize"; config error else. */
Mutation mutation_from_string(const std::string &text);
std::string mutation_name(Mutation mu);

/** One sample of a suite: a labeled point with named residuals. */
struct SuitePoint {
    std::string location;
    std::vector<std::pair<std::string, double>> residuals;
};

/** Outcome of one suite run. */
struct SuiteResult {
    std::string suite;
    std::string chart;
    double chart_param = 0.0;
    int points = 0;
    std::uint64_t seed = 0;
    Mutation mutation = Mutation::none;
    double threshold = 0.0;
    std::vector<SuitePoint> samples;
    double max_rel_residual = 0.0;
    bool pass = false;  ///< all residuals below threshold
};

/** The ten suite names, in canonical order. */
const std::vector<std::string> &suite_names();

/**
 * @brief Threshold for a suite on a chart (single tuning table).
 *
 * Chart-independent for most suites; the jet-transport suites (pre,
 * delta) are exact on flat charts and inherit the transport tolerance on
 * curved ones.  Unknown suite names are a config error.
 */
double suite_threshold(const std::string &suite, const std::string &chart);

/**
 * @brief Run one suite over `points` samples.
 *
 * Chart-point suites draw base points from the chart's sampler; the
 * torus suites (fform, equiv) interpret `points` as the number of random
 * potential draws and require the flat chart.  `threads` > 1 distributes
 * samples over a worker pool (outputs independent of pool size).
 *
 * Errors: unknown suite, non-positive points, or a mutation the suite
 * does not define are config errors.
 */
SuiteResult run_suite(const std::string &suite,
                      const KahlerPotentialChart &chart, int points,
                      std::uint64_t seed, Mutation mutation = Mutation::none,
                      int threads = 1);

}  // namespace qma

#endif  // QMALAB_SUITES_HPP
