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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../src/solver.hpp"

using namespace qma;

namespace {

ScalarField zero_field(const GridPtr &grid) {
    return ScalarField(grid, std::vector<double>(grid->total(), 0.0));
}

SolverState zero_state(const GridPtr &grid) {
    SolverState st;
    st.phi = zero_field(grid);
    return st;
}

/** Half-trace of the complex Hessian, the flat-metric linearization. */
ScalarField half_hessian_trace(const ScalarField &u) {
    const int m = u.grid()->m();
    std::vector<double> acc(u.grid()->total(), 0.0);
    for (int c = 0; c < m; ++c) {
        const CplxField d = spectral_derivative(u, {c, m + c});
        for (std::size_t pt = 0; pt < acc.size(); ++pt)
            acc[pt] += 0.5 * d.v[pt].real();
    }
    return ScalarField(u.grid(), std::move(acc));
}

double max_diff(const ScalarField &a, const ScalarField &b) {
    double s = 0.0;
    for (std::size_t pt = 0; pt < a.size(); ++pt)
        s = std::max(s, std::abs(a[pt] - b[pt]));
    return s;
}

ScalarField sup_aligned(const ScalarField &f) {
    double mx = -1e300;
    for (std::size_t pt = 0; pt < f.size(); ++pt) mx = std::max(mx, f[pt]);
    ScalarField out = f;
    out.add_constant(-mx);
    return out;
}

double closed_form_defect(const ScalarField &F, double t, double b) {
    ScalarField e = F;
    std::vector<double> &ev = e.mutable_values();
    for (double &v : ev) v = std::exp(t * v);
    return std::exp(b) * e.mean() - 1.0;
}

}  // namespace

TEST_CASE("configuration invariants are enforced") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    SolverConfig bad = cfg;
    bad.path = {0.0, 0.5, 0.4, 1.0};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.path = {0.0, 0.5};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.newton_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.backtrack_factor = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);

    const std::vector<double> u = SolverConfig::uniform_path(4);
    REQUIRE(u.size() == 5);
    CHECK(u.front() == 0.0);
    CHECK(u.back() == 1.0);
    CHECK(u[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("linearized operator: flat example, constants, grid mismatch") {
    const GridPtr grid = TorusGrid::make(1, 8);
    const int m = grid->m();
    const JTensor J = flat_J(m);
    const MetricField g_id =
        MetricField::constant(grid, Mat::Identity(m, m));

    Rng rng(3);
    const ScalarField u = random_band_limited(grid, 2, 0.7, rng);

    const ScalarField Lu = linearized_operator(g_id, J, u);
    const ScalarField oracle = half_hessian_trace(u);
    CHECK(max_diff(Lu, oracle) <= 1e-11);

    ScalarField c(grid, std::vector<double>(grid->total(), 3.7));
    CHECK(linearized_operator(g_id, J, c).max_abs() <= 1e-12);

    // non-positive metric is rejected
    const MetricField g_bad =
        MetricField::constant(grid, -Mat::Identity(m, m));
    CHECK_THROWS_AS(linearized_operator(g_bad, J, u), Error);
}

TEST_CASE("linearized operator is the Frechet derivative of the residual") {
    const GridPtr grid = TorusGrid::make(1, 8);
    const int m = grid->m();
    const JTensor J = flat_J(m);
    const MetricField g_id =
        MetricField::constant(grid, Mat::Identity(m, m));
    const ScalarField F0 = zero_field(grid);

    Rng rng(11);
    const ScalarField phi0 = random_band_limited(grid, 1, 0.02, rng);
    const ScalarField u = random_band_limited(grid, 2, 0.2, rng);
    const MetricField g_phi = omega_phi(g_id, J, phi0);
    REQUIRE(g_phi.min_eig() > 0.5);

    const ScalarField Lu = linearized_operator(g_phi, J, u);

    auto fd_error = [&](double h) {
        ScalarField plus = phi0;
        ScalarField minus = phi0;
        std::vector<double> &pv = plus.mutable_values();
        std::vector<double> &mv = minus.mutable_values();
        for (std::size_t pt = 0; pt < pv.size(); ++pt) {
            pv[pt] += h * u[pt];
            mv[pt] -= h * u[pt];
        }
        const ScalarField rp = residual_11(g_id, J, plus, F0, 0.0);
        const ScalarField rm = residual_11(g_id, J, minus, F0, 0.0);
        double err = 0.0;
        for (std::size_t pt = 0; pt < pv.size(); ++pt)
            err = std::max(err,
                           std::abs((rp[pt] - rm[pt]) / (2.0 * h) - Lu[pt]));
        return err;
    };

    const double e1 = fd_error(1e-4);
    const double e2 = fd_error(5e-5);
    CHECK(e1 <= 1e-5);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.9);  // central differences: O(h^2)
}

TEST_CASE("zero and constant densities are solved exactly") {
    const GridPtr grid = TorusGrid::make(1, 8);
    SolverConfig cfg;
    cfg.N = 8;

    StageRecord rec;
    const SolverState out =
        solve_stage(zero_state(grid), zero_field(grid), 1.0, cfg, rec);
    CHECK(rec.converged);
    CHECK(rec.newton_iters == 0);
    CHECK(out.phi.max_abs() <= 1e-14);
    CHECK(std::abs(out.b) <= 1e-15);

    ScalarField Fc(grid, std::vector<double>(grid->total(), 0.37));
    const SolveResult res = solve_qma(Fc, cfg);
    REQUIRE(res.report.converged);
    CHECK(res.state.phi.max_abs() <= 1e-14);
    CHECK(std::abs(res.state.b + 0.37) <= 1e-14);
    for (const StageRecord &sr : res.report.stages) {
        CHECK(sr.converged);
        CHECK(sr.newton_iters == 0);
    }
}

TEST_CASE("manufactured density is recovered along the continuity path") {
    const GridPtr grid = TorusGrid::make(1, 8);
    const int m = grid->m();
    const JTensor J = flat_J(m);
    const MetricField g_id =
        MetricField::constant(grid, Mat::Identity(m, m));

    SolverConfig cfg;
    cfg.N = 8;
    cfg.newton_tol = 1e-12;

    const ScalarField F = manufactured_density(grid);
    const SolveResult res = solve_qma(F, cfg);
    REQUIRE(res.report.converged);

    const ScalarField target = sup_aligned(manufactured_potential(grid));
    CHECK(max_diff(res.state.phi, target) <= 1e-9);
    CHECK(std::abs(res.state.b) <= 1e-10);

    // residual history monotone non-increasing within each stage
    for (const StageRecord &sr : res.report.stages) {
        REQUIRE(sr.converged);
        for (std::size_t k = 1; k < sr.residuals.size(); ++k)
            CHECK(sr.residuals[k] <= sr.residuals[k - 1]);
        for (double me : sr.min_eigs) CHECK(me > cfg.eps_pos);
    }

    // compatibility constant closed form (volume conservation)
    CHECK(std::abs(closed_form_defect(F, 1.0, res.state.b)) <= 1e-9);

    // conservation and formulation equivalence at the solution
    CHECK(std::abs(volume_check(g_id, J, res.state.phi)) <= 1e-10);
    const ScalarField r11 = residual_11(g_id, J, res.state.phi, F, res.state.b);
    const FormField Om =
        FormField::constant(grid, omega_from_gJ(HermitianMetric{g_id.at(0)},
                                                J).comp);
    const ScalarField r20 = residual_20(Om, J, res.state.phi, F, res.state.b);
    CHECK(max_diff(r11, r20) <= 1e-10);
}

TEST_CASE("random density converges and the solution is schedule-independent") {
    const GridPtr grid = TorusGrid::make(1, 8);
    SolverConfig cfg;
    cfg.N = 8;
    cfg.newton_tol = 1e-11;

    Rng rng(12);
    const ScalarField F = random_band_limited(grid, 2, 0.3, rng);

    const SolveResult a = solve_qma(F, cfg);
    REQUIRE(a.report.converged);
    CHECK(a.report.stages.back().final_residual <= 1e-11);

    SolverConfig other = cfg;
    other.backtrack_factor = 0.7;
    other.sufficient_decrease = 0.3;
    other.path = SolverConfig::uniform_path(3);
    const SolveResult b = solve_qma(F, other);
    REQUIRE(b.report.converged);

    CHECK(max_diff(a.state.phi, b.state.phi) <= 1e-8);
    CHECK(std::abs(a.state.b - b.state.b) <= 1e-9);

    const int m = grid->m();
    const MetricField g_id =
        MetricField::constant(grid, Mat::Identity(m, m));
    CHECK(std::abs(volume_check(g_id, flat_J(m), a.state.phi)) <= 1e-10);
}

TEST_CASE("stage failures carry diagnostics and preserve the last good state") {
    const GridPtr grid = TorusGrid::make(1, 8);

    // entry guard: a positivity floor above the flat spectrum exits at once
    SolverConfig strict;
    strict.N = 8;
    strict.eps_pos = 2.0;
    StageRecord rec;
    CHECK_THROWS_WITH_AS(solve_stage(zero_state(grid),
                                     manufactured_density(grid), 1.0, strict,
                                     rec),
                         doctest::Contains("positivity cone exit"), Error);

    // an unreachable tolerance exhausts halving and reports the failure
    SolverConfig starved;
    starved.N = 8;
    starved.max_newton = 1;
    starved.newton_tol = 1e-15;
    const SolveResult res = solve_qma(manufactured_density(grid), starved);
    CHECK_FALSE(res.report.converged);
    CHECK_FALSE(res.report.message.empty());
    CHECK(res.state.t < 1.0);
    REQUIRE_FALSE(res.report.stages.empty());
    bool saw_failure = false;
    for (const StageRecord &sr : res.report.stages)
        if (!sr.converged && !sr.message.empty()) saw_failure = true;
    CHECK(saw_failure);

    // configuration mismatches are rejected up front
    SolverConfig wrong;
    wrong.N = 16;
    CHECK_THROWS_AS(solve_qma(manufactured_density(grid), wrong), Error);
}
