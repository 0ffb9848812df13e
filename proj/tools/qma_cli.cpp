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
 * @file qma_cli.cpp
 * @brief Command-line front end; talks to the core only through the C API.
 *
 * Exit codes mirror the API status codes: 0 success, 1 configuration,
 * 2 residual failure, 3 stage failure, 4 runtime failure.
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <qma/qma.h>

namespace {

struct SessionDeleter {
    void operator()(qma_session *s) const { qma_session_destroy(s); }
};
using Session = std::unique_ptr<qma_session, SessionDeleter>;

/** Print the session's error message and forward its status code. */
int report_failure(const qma_session *s, int rc) {
    std::cerr << "error: " << qma_last_error(s) << "\n";
    return rc;
}

int set_or_fail(qma_session *s, const std::string &key,
                const std::string &value) {
    const int rc = qma_set(s, key.c_str(), value.c_str());
    return rc == QMA_OK ? QMA_OK : report_failure(s, rc);
}

std::string trim(const std::string &text) {
    const std::size_t a = text.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = text.find_last_not_of(" \t\r\n");
    return text.substr(a, b - a + 1);
}

/** Apply a plain key=value configuration file ('#' starts a comment). */
int apply_config_file(qma_session *s, const std::string &path) {
    std::ifstream in(path);
    if (!in.good()) {
        std::cerr << "error: cannot open config file " << path << "\n";
        return QMA_ERR_CONFIG;
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line.substr(0, line.find('#')));
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: " << path << ":" << lineno
                      << ": expected key=value\n";
            return QMA_ERR_CONFIG;
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (const int rc = qma_set(s, key.c_str(), value.c_str());
            rc != QMA_OK) {
            std::cerr << "error: " << path << ":" << lineno << ": "
                      << qma_last_error(s) << "\n";
            return rc;
        }
    }
    return QMA_OK;
}

/** Honor the QMA_THREADS environment variable when present. */
int apply_env_threads(qma_session *s) {
    const char *env = std::getenv("QMA_THREADS");
    if (env == nullptr || *env == '\0') return QMA_OK;
    return set_or_fail(s, "threads", env);
}

int write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out.good()) {
        std::cerr << "error: cannot write " << path.string() << "\n";
        return QMA_ERR_RUNTIME;
    }
    return QMA_OK;
}

/** Options shared by every subcommand. */
struct CommonOpts {
    std::string config_file;
    std::vector<std::string> overrides;  // raw key=value pairs
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App *cmd, CommonOpts &common) {
    cmd->add_option("--config", common.config_file,
                    "key=value configuration file (unknown keys rejected)");
    cmd->add_option("--set", common.overrides,
                    "extra configuration override, key=value (repeatable)");
    cmd->add_option("--seed", common.seed, "RNG seed (decimal, 64-bit)");
}

int apply_common(qma_session *s, const CommonOpts &common) {
    if (!common.config_file.empty())
        if (const int rc = apply_config_file(s, common.config_file);
            rc != QMA_OK)
            return rc;
    if (const int rc = apply_env_threads(s); rc != QMA_OK) return rc;
    for (const std::string &pair : common.overrides) {
        const std::size_t eq = pair.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << pair
                      << "'\n";
            return QMA_ERR_CONFIG;
        }
        if (const int rc = set_or_fail(s, trim(pair.substr(0, eq)),
                                       trim(pair.substr(eq + 1)));
            rc != QMA_OK)
            return rc;
    }
    if (common.seed)
        if (const int rc =
                set_or_fail(s, "seed", std::to_string(*common.seed));
            rc != QMA_OK)
            return rc;
    return QMA_OK;
}

/** Emit report/trace/snapshot artifacts after a solve or path run. */
int write_artifacts(qma_session *s, const std::string &out_dir,
                    bool with_trace, bool have_state) {
    if (out_dir.empty()) return QMA_OK;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create " << out_dir << ": "
                  << ec.message() << "\n";
        return QMA_ERR_RUNTIME;
    }
    const std::filesystem::path dir(out_dir);
    if (const int rc = write_text(dir / "report.json", qma_report_json(s));
        rc != QMA_OK)
        return rc;
    if (with_trace)
        if (const int rc = write_text(dir / "trace.csv", qma_trace_csv(s));
            rc != QMA_OK)
            return rc;
    if (have_state) {
        const std::string snap = (dir / "phi.snap").string();
        if (const int rc = qma_save_snapshot(s, snap.c_str()); rc != QMA_OK)
            return report_failure(s, rc);
    }
    return QMA_OK;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"numerical laboratory for the quaternionic Monge-Ampere "
                 "equation on the flat torus and model charts"};
    app.require_subcommand(1);

    // ----- verify ---------------------------------------------------------
    CLI::App *verify = app.add_subcommand(
        "verify", "run a verification suite and print its JSON report");
    CommonOpts vcommon;
    std::string suite;
    std::optional<std::string> chart, mutate;
    std::optional<double> chart_param;
    std::optional<int> points;
    std::string verify_out;
    verify->add_option("--suite", suite, "suite name")->required();
    verify->add_option("--chart", chart, "chart name (flat, flat4, eh)");
    verify->add_option("--chart-param", chart_param, "chart scale parameter");
    verify->add_option("--points", points, "sample points / trials");
    verify->add_option("--mutate", mutate,
                       "negative control: sign-flip or de-hyperhermitianize");
    verify->add_option("--out", verify_out, "also write the JSON report here");
    add_common(verify, vcommon);

    // ----- solve ----------------------------------------------------------
    CLI::App *solve = app.add_subcommand(
        "solve", "solve the continuity path and print its JSON report");
    CommonOpts scommon;
    std::optional<int> solve_grid, solve_n, solve_steps;
    std::optional<std::string> solve_f;
    std::string solve_out;
    solve->add_option("--grid", solve_grid, "grid points per axis (even)");
    solve->add_option("--n", solve_n, "quaternionic dimension");
    solve->add_option("--f", solve_f,
                      "density: zero, manufactured, random:AMP, or FILE.snap");
    solve->add_option("--steps", solve_steps, "continuity stages");
    solve->add_option("--out", solve_out,
                      "directory for report.json and phi.snap");
    add_common(solve, scommon);

    // ----- path -----------------------------------------------------------
    CLI::App *path = app.add_subcommand(
        "path", "solve the path and monitor the trace test function");
    CommonOpts pcommon;
    std::optional<int> path_grid, path_n, path_steps, compare_grid;
    std::optional<std::string> path_f;
    std::string path_out;
    bool monitor = false;
    path->add_option("--grid", path_grid, "grid points per axis (even)");
    path->add_option("--n", path_n, "quaternionic dimension");
    path->add_option("--f", path_f,
                     "density: zero, manufactured, random:AMP, or FILE.snap");
    path->add_option("--steps", path_steps, "continuity stages");
    path->add_flag("--monitor", monitor, "write the CSV trace of the monitor");
    path->add_option("--compare-grid", compare_grid,
                     "coarse N for a refined-pair comparison");
    path->add_option("--out", path_out,
                     "directory for report.json, trace.csv, phi.snap");
    add_common(path, pcommon);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : QMA_ERR_CONFIG;
    }

    Session session(qma_session_create());
    if (!session) {
        std::cerr << "error: cannot allocate a session\n";
        return QMA_ERR_RUNTIME;
    }
    qma_session *s = session.get();

    if (verify->parsed()) {
        if (const int rc = apply_common(s, vcommon); rc != QMA_OK) return rc;
        if (chart)
            if (const int rc = set_or_fail(s, "chart", *chart); rc != QMA_OK)
                return rc;
        if (chart_param)
            if (const int rc = set_or_fail(s, "chart_param",
                                           std::to_string(*chart_param));
                rc != QMA_OK)
                return rc;
        if (points)
            if (const int rc =
                    set_or_fail(s, "points", std::to_string(*points));
                rc != QMA_OK)
                return rc;
        if (mutate)
            if (const int rc = set_or_fail(s, "mutate", *mutate);
                rc != QMA_OK)
                return rc;
        const int rc = qma_verify(s, suite.c_str());
        if (rc != QMA_OK && rc != QMA_ERR_RESIDUAL)
            return report_failure(s, rc);
        std::cout << qma_report_json(s);
        if (!verify_out.empty())
            if (const int wrc = write_text(verify_out, qma_report_json(s));
                wrc != QMA_OK)
                return wrc;
        return rc;
    }

    const bool is_path = path->parsed();
    const CommonOpts &common = is_path ? pcommon : scommon;
    if (const int rc = apply_common(s, common); rc != QMA_OK) return rc;

    const auto seti = [&](const char *key, const std::optional<int> &v) {
        return v ? set_or_fail(s, key, std::to_string(*v)) : QMA_OK;
    };
    if (const int rc = seti("grid_N", is_path ? path_grid : solve_grid);
        rc != QMA_OK)
        return rc;
    if (const int rc = seti("grid_n", is_path ? path_n : solve_n);
        rc != QMA_OK)
        return rc;
    if (const int rc = seti("steps", is_path ? path_steps : solve_steps);
        rc != QMA_OK)
        return rc;
    if (const int rc = seti("compare_grid",
                            is_path ? compare_grid : std::nullopt);
        rc != QMA_OK)
        return rc;
    const std::optional<std::string> &f = is_path ? path_f : solve_f;
    if (f)
        if (const int rc = set_or_fail(s, "f", *f); rc != QMA_OK) return rc;

    const int rc = is_path ? qma_path(s) : qma_solve(s);
    if (rc == QMA_ERR_CONFIG || rc == QMA_ERR_RUNTIME)
        return report_failure(s, rc);
    if (rc == QMA_ERR_STAGE)
        std::cerr << "error: " << qma_last_error(s) << "\n"
                  << "note: the last good state is kept\n";
    std::cout << qma_report_json(s);

    const std::string &out_dir = is_path ? path_out : solve_out;
    const bool have_state = rc == QMA_OK || rc == QMA_ERR_STAGE;
    if (const int wrc =
            write_artifacts(s, out_dir, is_path && monitor, have_state);
        wrc != QMA_OK)
        return wrc;
    return rc;
}
