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
 * @file qma.h
 * @brief C interface to the quaternionic Monge-Ampere laboratory.
 *
 * All state lives behind an opaque session handle.  Every entry point
 * returns a status code; on failure qma_last_error() carries a message.
 * Calls on a NULL session return QMA_ERR_CONFIG.  Strings returned by
 * the session (reports, traces, error text) are owned by the session and
 * stay valid until the next run on it or its destruction.
 */

#ifndef QMA_QMA_H_
#define QMA_QMA_H_

#ifdef __cplusplus
extern "C" {
#endif

/** Status codes (shared with the command-line tool's exit codes). */
enum {
    QMA_OK = 0,           /**< success / all residuals under threshold */
    QMA_ERR_CONFIG = 1,   /**< bad key, malformed value, invalid setup */
    QMA_ERR_RESIDUAL = 2, /**< a verification residual exceeds threshold */
    QMA_ERR_STAGE = 3,    /**< a continuity stage failed to converge */
    QMA_ERR_RUNTIME = 4   /**< I/O or internal failure */
};

typedef struct qma_session qma_session;

/** Create a session with default configuration (NULL on allocation failure). */
qma_session *qma_session_create(void);

/** Destroy a session; NULL is allowed. */
void qma_session_destroy(qma_session *session);

/** Message of the most recent failing call; empty string when none. */
const char *qma_last_error(const qma_session *session);

/**
 * Set one configuration key.  Unknown keys and malformed values are
 * rejected with QMA_ERR_CONFIG.  Known keys:
 *
 *   chart        chart name for verification suites ("flat", "flat4", "eh")
 *   chart_param  scale parameter of the chart (default 1.0)
 *   points       sample points / trials per suite (default 20)
 *   seed         RNG seed, decimal 64-bit (default 0)
 *   mutate       "none", "sign-flip", or "de-hyperhermitianize"
 *   threads      worker threads for suite sweeps (default 1)
 *   grid_n       quaternionic dimension of the torus (default 1)
 *   grid_N       grid points per axis, even (default 16)
 *   f            density: "zero", "manufactured", "random:AMP", or a
 *                snapshot path ending in .snap
 *   steps        continuity stages; the path is uniform on [0,1] (default 5)
 *   compare_grid coarse N for a refined-pair comparison (0 = off)
 *   newton_tol   sup-norm residual target per stage (default 1e-10)
 *   linear_tol   relative tolerance of the linear solver (default 1e-10)
 *   max_newton   Newton iteration cap per stage (default 30)
 *   eps_pos      minimum eigenvalue floor for the evolving metric
 */
int qma_set(qma_session *session, const char *key, const char *value);

/**
 * Run one verification suite ("quaternionic", "bijection", "pre", "fund",
 * "fund2", "frame", "delta", "eqns", "fform", "equiv").  QMA_OK when the
 * worst residual passes the suite threshold, QMA_ERR_RESIDUAL otherwise;
 * mutated runs are expected to land on QMA_ERR_RESIDUAL.
 */
int qma_verify(qma_session *session, const char *suite);

/**
 * Solve the continuity path for the configured density.  On
 * QMA_ERR_STAGE the report and the last good state remain available.
 */
int qma_solve(qma_session *session);

/**
 * Solve the path and run the trace monitor over the accepted stage
 * states; fills the JSON report and the CSV trace.  With compare_grid
 * set, a second run on the coarse grid adds a comparison block.
 */
int qma_path(qma_session *session);

/** Most recent JSON report; empty string before the first run. */
const char *qma_report_json(const qma_session *session);

/** Most recent CSV trace (qma_path only); empty string otherwise. */
const char *qma_trace_csv(const qma_session *session);

/** Write the final (or last good) potential as a QMA1 scalar snapshot. */
int qma_save_snapshot(qma_session *session, const char *path);

/** Normalization constant b of the most recent solve (0 before any). */
double qma_b(const qma_session *session);

/** Final accepted sup-residual of the most recent solve. */
double qma_final_residual(const qma_session *session);

/** Number of completed stages in the most recent solve. */
int qma_stage_count(const qma_session *session);

#ifdef __cplusplus
}
#endif

#endif /* QMA_QMA_H_ */
