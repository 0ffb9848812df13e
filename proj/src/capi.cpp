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

#include "qma/qma.h"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <new>
#include <optional>
#include <string>

#include "charts.hpp"
#include "common.hpp"
#include "fields.hpp"
#include "monitor.hpp"
#include "report.hpp"
#include "snapshot.hpp"
#include "solver.hpp"
#include "suites.hpp"

using namespace qma;

namespace {

enum class KeyKind { text, integer, unsigned64, real, mutation };

const std::map<std::string, KeyKind> &known_keys() {
    static const std::map<std::string, KeyKind> keys = {
        {"chart", KeyKind::text},         {"chart_param", KeyKind::real},
        {"points", KeyKind::integer},     {"seed", KeyKind::unsigned64},
        {"mutate", KeyKind::mutation},    {"threads", KeyKind::integer},
        {"grid_n", KeyKind::integer},     {"grid_N", KeyKind::integer},
        {"f", KeyKind::text},             {"steps", KeyKind::integer},
        {"compare_grid", KeyKind::integer}, {"newton_tol", KeyKind::real},
        {"linear_tol", KeyKind::real},    {"max_newton", KeyKind::integer},
        {"eps_pos", KeyKind::real},
    };
    return keys;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

struct qma_session {
    std::map<std::string, std::string> raw;
    std::string error;
    std::string report;
    std::string csv;
    std::optional<SolveResult> result;

    // -- typed accessors with defaults -------------------------------------
    std::string text(const std::string &key, const std::string &dflt) const {
        const auto it = raw.find(key);
        return it == raw.end() ? dflt : it->second;
    }
    long long integer(const std::string &key, long long dflt) const {
        const auto it = raw.find(key);
        return it == raw.end() ? dflt : std::strtoll(it->second.c_str(),
                                                     nullptr, 10);
    }
    std::uint64_t unsigned64(const std::string &key,
                             std::uint64_t dflt) const {
        const auto it = raw.find(key);
        return it == raw.end() ? dflt : std::strtoull(it->second.c_str(),
                                                      nullptr, 10);
    }
    double real(const std::string &key, double dflt) const {
        const auto it = raw.find(key);
        return it == raw.end() ? dflt : std::strtod(it->second.c_str(),
                                                    nullptr);
    }

    SolverConfig solver_config() const {
        SolverConfig cfg;
        cfg.n = static_cast<int>(integer("grid_n", 1));
        cfg.N = static_cast<int>(integer("grid_N", 16));
        cfg.path =
            SolverConfig::uniform_path(static_cast<int>(integer("steps", 5)));
        cfg.newton_tol = real("newton_tol", 1e-10);
        cfg.linear_tol = real("linear_tol", 1e-10);
        cfg.max_newton = static_cast<int>(integer("max_newton", 30));
        cfg.eps_pos = real("eps_pos", 1e-6);
        cfg.seed = unsigned64("seed", 0);
        cfg.validate();
        return cfg;
    }

    /** Build the configured density on `grid`; `desc` echoes the recipe. */
    ScalarField density(const GridPtr &grid, std::string &desc) const {
        const std::string f = text("f", "zero");
        desc = f;
        if (f == "zero") {
            return ScalarField(grid,
                               std::vector<double>(grid->total(), 0.0));
        }
        if (f == "manufactured") return manufactured_density(grid);
        if (f.rfind("random:", 0) == 0) {
            char *end = nullptr;
            const std::string amp_text = f.substr(7);
            const double amp = std::strtod(amp_text.c_str(), &end);
            require(end && *end == '\0' && amp > 0.0, ErrorCode::config,
                    "density 'random:AMP' needs a positive amplitude");
            Rng rng(unsigned64("seed", 0) ^ 0x9E3779B97F4A7C15ull);
            return random_band_limited(grid, 1, amp, rng);
        }
        if (f.size() > 5 && f.compare(f.size() - 5, 5, ".snap") == 0) {
            ScalarField field = read_scalar_snapshot(f);
            require(field.grid()->same(*grid), ErrorCode::config,
                    "density snapshot grid does not match grid_n/grid_N");
            return field;
        }
        throw Error(ErrorCode::config, "unknown density recipe '" + f + "'");
    }

    std::vector<std::pair<std::string, std::string>> solver_kv(
        const char *op, const SolverConfig &cfg,
        const std::string &fdesc) const {
        return {{"op", op},
                {"grid_n", std::to_string(cfg.n)},
                {"grid_N", std::to_string(cfg.N)},
                {"f", fdesc},
                {"seed", std::to_string(cfg.seed)},
                {"steps", std::to_string(cfg.path.size() - 1)},
                {"compare_grid", std::to_string(integer("compare_grid", 0))},
                {"newton_tol", fmt_double(cfg.newton_tol)},
                {"linear_tol", fmt_double(cfg.linear_tol)},
                {"max_newton", std::to_string(cfg.max_newton)},
                {"eps_pos", fmt_double(cfg.eps_pos)}};
    }
};

namespace {

/** Shared wrapper: runs `body`, captures errors, returns a status code. */
template <typename Fn>
int guarded(qma_session *s, Fn &&body) {
    if (s == nullptr) return QMA_ERR_CONFIG;
    s->error.clear();
    try {
        return body();
    } catch (const Error &e) {
        s->error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::exception &e) {
        s->error = e.what();
        return QMA_ERR_RUNTIME;
    }
}

int run_solve_common(qma_session *s, bool monitored) {
    const SolverConfig cfg = s->solver_config();
    const GridPtr grid = TorusGrid::make(cfg.n, cfg.N);
    std::string fdesc;
    const ScalarField F = s->density(grid, fdesc);
    const char *op = monitored ? "path" : "solve";
    const std::string digest =
        config_digest(s->solver_kv(op, cfg, fdesc));

    s->result = solve_qma(F, cfg);
    const SolveResult &res = *s->result;
    if (!res.report.converged) s->error = res.report.message;

    if (!monitored) {
        std::optional<double> recovery;
        if (fdesc == "manufactured" && res.report.converged) {
            const ScalarField truth = manufactured_potential(grid);
            double mx = truth[0];
            for (std::size_t pt = 1; pt < truth.size(); ++pt)
                mx = std::max(mx, truth[pt]);
            double diff = 0.0;
            for (std::size_t pt = 0; pt < truth.size(); ++pt)
                diff = std::max(diff,
                                std::abs(res.state.phi[pt] -
                                         (truth[pt] - mx)));
            recovery = diff;
        }
        s->report = json_text(
            solve_report_json(cfg, fdesc, res, digest, recovery));
        s->csv.clear();
        return res.report.converged ? QMA_OK : QMA_ERR_STAGE;
    }

    // The monitor rows cover the whole path: the trivial accepted state
    // at t = 0 (phi = 0, b = 0) followed by each completed stage.
    const auto with_initial = [](const GridPtr &g,
                                 const std::vector<SolverState> &states) {
        std::vector<SolverState> all(1);
        all[0].phi = ScalarField(g, std::vector<double>(g->total(), 0.0));
        all.insert(all.end(), states.begin(), states.end());
        return all;
    };
    const EstimateReport estimate =
        estimate_trace(with_initial(grid, res.stage_states), F);

    std::optional<GridComparison> comparison;
    const int coarse_N = static_cast<int>(s->integer("compare_grid", 0));
    if (coarse_N > 0 && res.report.converged) {
        SolverConfig coarse_cfg = cfg;
        coarse_cfg.N = coarse_N;
        coarse_cfg.validate();
        const GridPtr coarse_grid = TorusGrid::make(coarse_cfg.n, coarse_N);
        std::string coarse_desc;
        const ScalarField coarse_F = s->density(coarse_grid, coarse_desc);
        const SolveResult coarse = solve_qma(coarse_F, coarse_cfg);
        require(coarse.report.converged, ErrorCode::stage,
                "comparison grid N=" + std::to_string(coarse_N) +
                    " failed: " + coarse.report.message);
        const EstimateReport coarse_est = estimate_trace(
            with_initial(coarse_grid, coarse.stage_states), coarse_F);
        GridComparison cmp;
        cmp.coarse_N = coarse_N;
        cmp.fine_N = cfg.N;
        cmp.c_emp_coarse = coarse_est.c_emp;
        cmp.c_emp_fine = estimate.c_emp;
        cmp.rel_change = std::abs(cmp.c_emp_fine - cmp.c_emp_coarse) /
                         std::abs(cmp.c_emp_fine);
        comparison = cmp;
    }

    Json doc = path_report_json(cfg, fdesc, estimate, digest, comparison);
    doc["converged"] = res.report.converged;
    doc["message"] = res.report.message;
    s->report = json_text(doc);
    s->csv = path_trace_csv(estimate);
    return res.report.converged ? QMA_OK : QMA_ERR_STAGE;
}

}  // namespace

extern "C" {

qma_session *qma_session_create(void) {
    return new (std::nothrow) qma_session();
}

void qma_session_destroy(qma_session *session) { delete session; }

const char *qma_last_error(const qma_session *session) {
    return session == nullptr ? "null session" : session->error.c_str();
}

int qma_set(qma_session *session, const char *key, const char *value) {
    return guarded(session, [&]() -> int {
        require(key != nullptr && value != nullptr, ErrorCode::config,
                "qma_set: key and value must be non-null");
        const auto it = known_keys().find(key);
        require(it != known_keys().end(), ErrorCode::config,
                std::string("unknown configuration key '") + key + "'");
        const std::string text = value;
        char *end = nullptr;
        switch (it->second) {
            case KeyKind::text:
                break;
            case KeyKind::integer:
                (void)std::strtoll(text.c_str(), &end, 10);
                require(!text.empty() && end && *end == '\0',
                        ErrorCode::config,
                        std::string("key '") + key +
                            "' needs an integer value");
                break;
            case KeyKind::unsigned64:
                (void)std::strtoull(text.c_str(), &end, 10);
                require(!text.empty() && end && *end == '\0' &&
                            text.find('-') == std::string::npos,
                        ErrorCode::config,
                        std::string("key '") + key +
                            "' needs an unsigned integer value");
                break;
            case KeyKind::real:
                (void)std::strtod(text.c_str(), &end);
                require(!text.empty() && end && *end == '\0',
                        ErrorCode::config,
                        std::string("key '") + key +
                            "' needs a numeric value");
                break;
            case KeyKind::mutation:
                (void)mutation_from_string(text);
                break;
        }
        session->raw[key] = text;
        return QMA_OK;
    });
}

int qma_verify(qma_session *session, const char *suite) {
    return guarded(session, [&]() -> int {
        require(suite != nullptr, ErrorCode::config,
                "qma_verify: suite must be non-null");
        const std::string chart_name = session->text("chart", "flat");
        const double chart_param = session->real("chart_param", 1.0);
        const int points = static_cast<int>(session->integer("points", 20));
        const std::uint64_t seed = session->unsigned64("seed", 0);
        const Mutation mutation =
            mutation_from_string(session->text("mutate", "none"));
        const int threads = static_cast<int>(session->integer("threads", 1));
        require(threads >= 1, ErrorCode::config,
                "threads must be at least 1");

        const KahlerPotentialChart chart =
            KahlerPotentialChart::named(chart_name, chart_param);
        const SuiteResult result =
            run_suite(suite, chart, points, seed, mutation, threads);

        const std::string digest = config_digest(
            {{"op", "verify"},
             {"suite", suite},
             {"chart", chart_name},
             {"chart_param", fmt_double(chart_param)},
             {"points", std::to_string(points)},
             {"seed", std::to_string(seed)},
             {"mutate", mutation_name(mutation)}});
        session->report = json_text(suite_report_json(result, digest));
        session->csv.clear();
        return result.pass ? QMA_OK : QMA_ERR_RESIDUAL;
    });
}

int qma_solve(qma_session *session) {
    return guarded(session,
                   [&]() -> int { return run_solve_common(session, false); });
}

int qma_path(qma_session *session) {
    return guarded(session,
                   [&]() -> int { return run_solve_common(session, true); });
}

const char *qma_report_json(const qma_session *session) {
    return session == nullptr ? "" : session->report.c_str();
}

const char *qma_trace_csv(const qma_session *session) {
    return session == nullptr ? "" : session->csv.c_str();
}

int qma_save_snapshot(qma_session *session, const char *path) {
    return guarded(session, [&]() -> int {
        require(path != nullptr, ErrorCode::config,
                "qma_save_snapshot: path must be non-null");
        require(session->result.has_value(), ErrorCode::config,
                "qma_save_snapshot: nothing has been solved yet");
        write_scalar_snapshot(path, session->result->state.phi);
        return QMA_OK;
    });
}

double qma_b(const qma_session *session) {
    return (session && session->result) ? session->result->state.b : 0.0;
}

double qma_final_residual(const qma_session *session) {
    if (!session || !session->result) return 0.0;
    const std::vector<double> &hist =
        session->result->state.residual_history;
    return hist.empty() ? 0.0 : hist.back();
}

int qma_stage_count(const qma_session *session) {
    return (session && session->result)
               ? static_cast<int>(session->result->report.stages.size())
               : 0;
}

}  // extern "C"
