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
 * @file monitor.hpp
 * @brief A-posteriori instruments: the twisted Laplacian, the point-jet
 *        expansion identities behind the second-order trace estimate, and
 *        the trace test function Q monitored along solver paths.
 *
 * Two families of checks live here.
 *
 * Point-jet identities (per PointJetBundle, in normal coordinates):
 *   - delta_tr_check: the Laplacian of tr_ghat(g_phi), computed exactly
 *     from jets, equals the two-term display; all background-derivative,
 *     curvature, and structure-derivative contributions cancel.
 *   - eqns_term: the curvature and structure-second-derivative summands
 *     vanish separately for twist-invariant data.
 *   - phi4 checks: fourth derivatives of the potential cancel against the
 *     Laplacian of the log-density, leaving a non-negative quadratic term
 *     and a potential-independent remainder.
 *
 * Path monitoring (per solver state on the flat torus, ghat = Id):
 *   - estimate_trace: statistics of Q = tr_ghat(g_phi) - A*phi, the
 *     mixed-trace determinant inequality per grid point, the empirical
 *     constant C_emp, and the discrete maximum-principle sanity check.
 */

#ifndef QMALAB_MONITOR_HPP
#define QMALAB_MONITOR_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "bundle.hpp"
#include "common.hpp"
#include "fields.hpp"
#include "solver.hpp"

namespace qma {

/**
 * @brief Twisted-metric Laplacian of a field: (Delta_phi f) = g_phi^{r sbar}
 *        f_{r sbar} pointwise, with spectral second derivatives.
 *
 * Errors: non-positive g_phi is a config error.
 */
ScalarField chern_laplacian(const MetricField &g_phi, const ScalarField &f);

/** Jet flavor at a point: contraction of raised components with f_{r sbar}. */
cplx chern_laplacian_at(const Mat &g_up0, const Jet4 &f);

/** Outcome of the trace-Laplacian expansion identity at one point. */
struct DeltaReport {
    double lhs_abs = 0.0;   ///< |Laplacian of the trace|, from jets
    double rhs_abs = 0.0;   ///< |two-term display|
    double residual = 0.0;  ///< |LHS - RHS| / (1 + max(lhs_abs, rhs_abs))
};

/**
 * @brief Expansion identity for the Laplacian of tr_ghat(g_phi).
 *
 * LHS: Delta_{g_phi} of the jet product sum_{rs} ghat^{r sbar} g_phi(r,s)
 * at the center — this carries every product-rule term (derivatives of the
 * raised background, curvature, structure second derivatives).  RHS: the
 * two-term display g_phi^{i jbar} ghat^{r sbar} (g_{r sbar, i jbar} +
 * phi_{r sbar i jbar}).  Their agreement is exactly the cancellation the
 * symmetry lemmas provide.
 *
 * `flip_curvature_sign` injects a sign error into the curvature block of
 * the expansion (negative control); the residual must then blow up.
 *
 * Errors: a bundle whose background jets are not normal at the center
 * (first derivatives of ghat or J above 1e-8) is a config error.
 */
DeltaReport delta_tr_check(const PointJetBundle &b,
                           bool flip_curvature_sign = false);

/** The two summands of the vanishing curvature/structure term. */
struct EqnsReport {
    double first = 0.0;     ///< relative curvature summand
    double second = 0.0;    ///< relative structure-second-derivative summand
    double sum = 0.0;       ///< relative absolute sum
};

/**
 * @brief The two-term expression that vanishes for twist-invariant data:
 *
 *   g_phi^{i jbar} ghat^{a sbar} ghat^{r bbar} Rhat_{a bbar i jbar}
 *       g_{phi r sbar}
 *   + (1/2) g_phi^{i jbar} ghat^{r sbar} (J_{r,i jbar}^{abar} J_{sbar}^{b}
 *       + J_r^{abar} J_{sbar, i jbar}^{b}) phi_{b abar}
 *
 * Each summand must vanish separately (relative to its natural scale).
 * `de_hyperhermitianize` replaces the twist-invariant g_phi center value
 * by the non-invariant diag(1.3, 1.7, ...) in both of its slots (negative
 * control: the vanishing needs twist invariance).
 */
EqnsReport eqns_term(const PointJetBundle &b,
                     bool de_hyperhermitianize = false);

/**
 * @brief Potential-dependent discrepancy of the fourth-derivative
 *        cancellation.
 *
 * With F := (1/2) log(det g_phi / det g) as an order-2 jet from the
 * bundle:
 *
 *   D(phi) = Delta-hat F + (1/2) quadratic-term - (1/2) main-term,
 *
 * where Delta-hat is the background Laplacian at the center, the
 * quadratic term is ghat^{r sbar} g_phi^{i bbar} g_phi^{a jbar}
 * g_{phi a bbar, sbar} g_{phi i jbar, r}, and the main term is
 * ghat^{r sbar} g_phi^{i jbar} (g_{i jbar, r sbar} + phi_{r sbar i jbar}).
 * D depends on the background and g only, never on the potential jet —
 * the fourth-order derivatives of phi cancel identically.
 */
cplx phi4_discrepancy(const PointJetBundle &b);

/** The non-negative quadratic term of the same expansion (real part). */
double phi4_quadratic(const PointJetBundle &b);

/**
 * @brief Max |D(phi_i) - D(phi_0)| over `count` fresh potential jets on
 *        the bundle's chart point and metric jets, relative to 1 + |D|.
 *
 * Redraws potentials that break center positivity.
 */
double phi4_cancellation_check(const PointJetBundle &b, int count, Rng &rng);

/** Per-state row of the path monitor. */
struct EstimateRow {
    double t = 0.0;              ///< continuity parameter of the state
    double b = 0.0;              ///< additive normalization of the state
    double sup_q = 0.0;          ///< max of Q = tr_ghat(g_phi) - A*phi
    std::size_t argmax = 0;      ///< flat grid index attaining sup_q
    double tr_max = 0.0;         ///< max of tr_ghat(g_phi)
    double tr_mean = 0.0;        ///< mean of tr_ghat(g_phi)
    double phi_inf = 0.0;        ///< sup |phi| in mean-zero gauge
    double bridge_min = 0.0;     ///< min mixed-trace inequality residual
    double bridge_eq_min = 0.0;  ///< same with e^{2tF+2b} for the det ratio
    double laplacian_at_argmax = 0.0;  ///< discrete Delta_phi Q at argmax
};

/** Constants and rows of the trace-estimate monitor. */
struct EstimateReport {
    double a_constant = 0.0;  ///< A in Q; fixed point of A = C_emp/A' + 1
    double a_prime = 0.0;     ///< uniform lower bound of g against ghat
    double c_emp = 0.0;       ///< empirical constant of the chain
    int excluded = 0;         ///< states rejected for non-positivity
    std::vector<EstimateRow> rows;
};

/**
 * @brief Monitor the trace test function along a continuity path.
 *
 * Flat-torus backend: the reference metric ghat and the background g are
 * both the identity, so A' = 1.  States are re-normalized to mean-zero
 * gauge (a constant shift is invisible to g_phi).  Unless overridden, A
 * solves the fixed point A = C_emp(A)/A' + 1, where C_emp(A) is the max
 * over states of sup Q - A*sup|phi|.  Each row reports the per-point
 * mixed-trace inequality in two forms: with the true determinant ratio
 * (exact algebraic inequality) and with the ratio replaced by the
 * equation's volume factor e^{2tF+2b} (diagnostic; differs by the
 * truncation defect of the spectral solution).
 *
 * Errors: empty or grid-mismatched input is a config error; states whose
 * metric loses positivity are excluded and counted, not fatal.
 */
EstimateReport estimate_trace(const std::vector<SolverState> &states,
                              const ScalarField &F,
                              std::optional<double> a_override = std::nullopt);

}  // namespace qma

#endif  // QMALAB_MONITOR_HPP
