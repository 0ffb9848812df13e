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
 * @file solver.hpp
 * @brief Damped Newton continuity-path solver for the quaternionic
 *        Monge-Ampere equation on the flat hyperkaehler torus.
 *
 * The discrete problem is the Fourier-Galerkin system: find a band of
 * Fourier coefficients of phi plus the constant b such that the
 * log-density residual (1/2) log det g_phi - t F - b has no component
 * on the resolvable ("live") modes.  Modes whose every axis index sits
 * at 0 or Nyquist are invisible to the spectral derivative (the odd
 * Nyquist multiplier is zero for real data), so they are excluded from
 * both the unknowns and the residual norm; the leftover pointwise
 * residual on that tiny subspace is pure truncation error and is
 * reported separately by the monitors.
 */

#ifndef QMA_SOLVER_HPP
#define QMA_SOLVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fields.hpp"
#include "hypalg.hpp"

namespace qma {

/** Tunable parameters of the continuity-path Newton solver. */
struct SolverConfig {
    int n = 1;  ///< quaternionic dimension (grid has 4n axes)
    int N = 16; ///< points per axis (even, >= 4)

    /** Path values 0 = t_0 < ... < t_K = 1. */
    std::vector<double> path = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

    double newton_tol = 1e-10;       ///< sup-norm target for the live residual
    int max_newton = 30;             ///< Newton iterations per stage
    double backtrack_factor = 0.5;   ///< step shrink per damping round
    double sufficient_decrease = 0.1;///< Armijo fraction for acceptance
    double min_step = 1e-8;          ///< damping underflow => positivity cone exit
    double eps_pos = 1e-6;           ///< floor for min-eig of g_phi
    double linear_tol = 1e-10;       ///< relative BiCGStab tolerance
    int linear_max_iter = 500;       ///< BiCGStab iteration cap
    std::uint64_t seed = 0;          ///< recorded for report reproducibility

    /** Throws a config error when any invariant fails. */
    void validate() const;

    /** Uniform path 0, 1/stages, ..., 1 (the default shape). */
    static std::vector<double> uniform_path(int stages);
};

/** Solver iterate: potential, compatibility constant, path position. */
struct SolverState {
    ScalarField phi; ///< mean-normalized during iteration
    double b = 0.0;
    double t = 0.0;

    /** Accepted sup-residuals across the whole run (monotone per stage). */
    std::vector<double> residual_history;
    /** Min-eigenvalue of g_phi at each accepted iterate. */
    std::vector<double> min_eig_history;
};

/** Per-stage diagnostics for the JSON report. */
struct StageRecord {
    double t = 0.0;
    int newton_iters = 0;
    int linear_iters = 0;
    double final_residual = 0.0;
    double final_b = 0.0;
    double min_eig = 0.0;
    bool converged = false;
    std::string message; ///< failure diagnostics, empty on success
    std::vector<double> residuals;
    std::vector<double> b_history;
    std::vector<double> min_eigs;
};

/** Whole-run outcome: stage records plus the overall verdict. */
struct SolveReport {
    std::vector<StageRecord> stages;
    bool converged = false;
    std::string message; ///< non-empty when the path was abandoned
};

/** Final (or last good) state together with the report. */
struct SolveResult {
    SolverState state;
    SolveReport report;
    /// Accepted state after each completed stage (mean-zero gauge),
    /// for a posteriori diagnostics along the continuity path.
    std::vector<SolverState> stage_states;
};

/** Per-point raised metric [g^{i jbar}] = (G^T)^{-1}. */
MatrixField raise_metric(const MetricField &g);

/**
 * @brief Action of the linearization of the log-density residual.
 *
 * L(u) = (1/4) sum_{ij} g^{i jbar} (H_u + sigma_J H_u)(i, j) with H_u
 * the complex Hessian of u; this is the exact directional derivative
 * of (1/2) log det g_phi in phi, pinned by the finite-difference
 * oracle.  At g_phi = Id it reduces to (1/2) sum_c u_{c cbar}.
 * Annihilates constants.
 */
ScalarField linearized_apply(const MatrixField &g_up, const JTensor &J,
                             const ScalarField &u);

/** Convenience overload raising g_phi first; errors when non-positive. */
ScalarField linearized_operator(const MetricField &g_phi, const JTensor &J,
                                const ScalarField &u);

/**
 * @brief One continuity-path stage: solve the t-weighted equation.
 *
 * Newton iteration with b re-annihilated from the residual mean each
 * step, a spectrally preconditioned BiCGStab inner solve, and
 * backtracking damping that keeps min-eig(g_phi) above eps_pos.
 * Throws a stage error ("positivity cone exit" on damping underflow,
 * otherwise non-convergence diagnostics); the record is filled either
 * way.
 */
SolverState solve_stage(const SolverState &start, const ScalarField &F,
                        double t, const SolverConfig &config,
                        StageRecord &record);

/**
 * @brief Run the whole continuity path with adaptive stage halving.
 *
 * On success the returned phi is sup-normalized (sup phi = 0; the
 * constant shift is invisible to the equation, so b is untouched).
 * On unrecoverable stage failure the result carries the last good
 * state and converged = false; configuration problems throw.
 */
SolveResult solve_qma(const ScalarField &F, const SolverConfig &config);

/** Closed-form test potential 0.05(cos 2pi x1 + sin 2pi x3 cos 2pi x4). */
ScalarField manufactured_potential(const GridPtr &grid);

/** Density F with residual(phi*, F, b = 0) = 0, for solver validation. */
ScalarField manufactured_density(const GridPtr &grid);

}  // namespace qma

#endif  // QMA_SOLVER_HPP
