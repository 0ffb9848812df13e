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

#include "../src/bundle.hpp"
#include "../src/hypalg.hpp"
#include "../src/monitor.hpp"

using namespace qma;

namespace {

Vec eh_point() {
    Vec z0(2);
    z0 << cplx(1.0, 0.0), cplx(0.0, 0.0);
    return z0;
}

Vec flat_point() {
    Vec z0(2);
    z0 << cplx(0.3, -0.2), cplx(0.1, 0.4);
    return z0;
}

ScalarField zero_field(const GridPtr &grid) {
    return ScalarField(grid, std::vector<double>(grid->total(), 0.0));
}

}  // namespace

TEST_CASE("random jets: reality, Hermitian mirror, center certificates") {
    Rng rng(5);
    const KahlerPotentialChart eh = KahlerPotentialChart::ale(1.0);
    const NormalChart nc = normal_chart_at(eh, eh_point());
    const JetSpacePtr space = JetSpace::get(2);

    // A real-function jet equals its own conjugate jet and evaluates real.
    const Jet4 phi = random_real_jet(space, 4, 0.15, rng);
    const Jet4 dphi = phi - phi.conjugate();
    CHECK(dphi.max_abs_coeff() == 0.0);
    Vec dz(2);
    dz << cplx(0.05, -0.02), cplx(-0.03, 0.04);
    CHECK(std::abs(std::imag(phi.eval(dz))) < 1e-15);

    const PointJetBundle b = make_bundle_at(nc, rng);
    CHECK(b.min_eig_g > 0.05);
    CHECK(b.min_eig_g_phi > 0.05);

    // Hermitian-function mirror of the metric jets, coefficient-exact.
    for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
            const Jet4 d = b.g.at(r, s) - b.g.at(s, r).conjugate();
            CHECK(d.max_abs_coeff() == 0.0);
        }

    // Centers are Hermitian and twist-invariant for the chart's structure.
    CHECK((b.g_phi0 - b.g_phi0.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    const JTensor J0{nc.J.values()};
    CHECK(is_hyperhermitian(HermitianMetric{b.g0}, J0) < 1e-12);
    CHECK(is_hyperhermitian(HermitianMetric{b.g_phi0}, J0) < 1e-12);
}

TEST_CASE("twisted Laplacian: constants, cosine oracle, linearity, errors") {
    const GridPtr grid = TorusGrid::make(1, 8);
    const Mat id = Mat::Identity(2, 2);
    const MetricField flat = MetricField::constant(grid, id);

    CHECK(chern_laplacian(flat, ScalarField(grid, std::vector<double>(
                                                      grid->total(), 3.7)))
              .max_abs() < 1e-14);

    // f = cos(2 pi x1) on the identity metric: the contraction reduces to
    // f_{1 1bar} = -pi^2 cos(2 pi x1).
    std::vector<double> fv(grid->total()), expect(grid->total());
    for (std::size_t pt = 0; pt < fv.size(); ++pt) {
        const double x1 = grid->coord(pt, 0);
        fv[pt] = std::cos(2.0 * kPi * x1);
        expect[pt] = -kPi * kPi * std::cos(2.0 * kPi * x1);
    }
    const ScalarField lap = chern_laplacian(flat, ScalarField(grid, fv));
    double worst = 0.0;
    for (std::size_t pt = 0; pt < fv.size(); ++pt)
        worst = std::max(worst, std::abs(lap[pt] - expect[pt]));
    CHECK(worst < 1e-11);

    // Linearity on a genuinely curved twisted metric.
    Rng rng(7);
    const JTensor J = flat_J(2);
    const ScalarField phi = random_band_limited(grid, 1, 0.03, rng);
    const MetricField g_phi = omega_phi(flat, J, phi);
    const ScalarField f = random_band_limited(grid, 2, 1.0, rng);
    const ScalarField h = random_band_limited(grid, 2, 1.0, rng);
    const double alpha = 0.7, beta = -1.3;
    std::vector<double> comb(grid->total());
    for (std::size_t pt = 0; pt < comb.size(); ++pt)
        comb[pt] = alpha * f[pt] + beta * h[pt];
    const ScalarField left = chern_laplacian(g_phi, ScalarField(grid, comb));
    const ScalarField lf = chern_laplacian(g_phi, f);
    const ScalarField lh = chern_laplacian(g_phi, h);
    worst = 0.0;
    for (std::size_t pt = 0; pt < comb.size(); ++pt)
        worst = std::max(worst,
                         std::abs(left[pt] - alpha * lf[pt] - beta * lh[pt]));
    CHECK(worst < 1e-13);

    // Jet flavor: identity contraction of |z1|^2 gives exactly 1.
    const JetSpacePtr space = JetSpace::get(2);
    const Jet4 mono =
        Jet4::variable(space, space->var_z(0)) *
        Jet4::variable(space, space->var_zb(0));
    CHECK(std::abs(chern_laplacian_at(id, mono) - cplx(1.0)) < 1e-15);

    // Losing positivity is a config error.
    Mat bad = id;
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(chern_laplacian(MetricField::constant(grid, bad),
                                    ScalarField(grid, fv)),
                    Error);
}

TEST_CASE("trace-Laplacian expansion identity and its negative controls") {
    Rng rng(8);

    // Flat chart: every correction term vanishes identically.
    const KahlerPotentialChart flat = KahlerPotentialChart::flat(2);
    const NormalChart ncf = normal_chart_at(flat, flat_point());
    for (int k = 0; k < 10; ++k) {
        const DeltaReport d = delta_tr_check(make_bundle_at(ncf, rng));
        CHECK(d.residual < 1e-12);
    }

    // Curved background: the cancellation needs the symmetry lemmas.
    const KahlerPotentialChart eh = KahlerPotentialChart::ale(1.0);
    const NormalChart nce = normal_chart_at(eh, eh_point());
    for (int k = 0; k < 20; ++k) {
        const PointJetBundle b = make_bundle_at(nce, rng);
        const DeltaReport d = delta_tr_check(b);
        CHECK(d.residual < 1e-6);
        CHECK(d.residual < 1e-12);  // measured headroom on this chart
        const DeltaReport dm = delta_tr_check(b, true);
        CHECK(dm.residual > 1e-2);
    }

    // A second base point of the curved chart.
    Vec z1(2);
    z1 << cplx(0.9, 0.4), cplx(-0.2, 0.3);
    const NormalChart nc1 = normal_chart_at(eh, z1);
    for (int k = 0; k < 5; ++k)
        CHECK(delta_tr_check(make_bundle_at(nc1, rng)).residual < 1e-6);

    // Polluting a background first derivative breaks the precondition.
    PointJetBundle broken = make_bundle_at(nce, rng);
    broken.nc.g.at(0, 0).raw(1) = cplx(0.5, 0.0);
    CHECK_THROWS_WITH_AS(delta_tr_check(broken),
                         doctest::Contains("normal chart"), Error);
}

TEST_CASE("curvature and structure summands vanish; controls bite") {
    Rng rng(8);
    const KahlerPotentialChart flat = KahlerPotentialChart::flat(2);
    const NormalChart ncf = normal_chart_at(flat, flat_point());
    const EqnsReport ef = eqns_term(make_bundle_at(ncf, rng));
    CHECK(ef.first < 1e-15);
    CHECK(ef.second < 1e-15);
    CHECK(ef.sum < 1e-15);

    const KahlerPotentialChart eh = KahlerPotentialChart::ale(1.0);
    const NormalChart nce = normal_chart_at(eh, eh_point());
    for (int k = 0; k < 20; ++k) {
        const PointJetBundle b = make_bundle_at(nce, rng);
        const EqnsReport e = eqns_term(b);
        CHECK(e.first < 1e-7);
        CHECK(e.second < 1e-7);
        CHECK(e.sum < 1e-7);
        const EqnsReport ec = eqns_term(b, true);
        CHECK(ec.first > 1e-3);
    }
}

TEST_CASE("fourth-derivative cancellation: potential independence, "
          "non-negative quadratic term") {
    Rng rng(9);
    const KahlerPotentialChart flat = KahlerPotentialChart::flat(2);
    const NormalChart ncf = normal_chart_at(flat, flat_point());
    const PointJetBundle bf = make_bundle_at(ncf, rng);
    CHECK(phi4_cancellation_check(bf, 10, rng) < 1e-9);
    CHECK(phi4_quadratic(bf) > -1e-12);

    const KahlerPotentialChart eh = KahlerPotentialChart::ale(1.0);
    const NormalChart nce = normal_chart_at(eh, eh_point());
    for (int k = 0; k < 5; ++k) {
        const PointJetBundle b = make_bundle_at(nce, rng);
        CHECK(phi4_cancellation_check(b, 10, rng) < 1e-6);
        CHECK(phi4_quadratic(b) > -1e-12);
    }
}

TEST_CASE("trace monitor: zero-density path gives the exact constants") {
    SolverConfig cfg;
    cfg.n = 1;
    cfg.N = 8;
    const GridPtr grid = TorusGrid::make(cfg.n, cfg.N);
    const ScalarField F = zero_field(grid);
    const SolveResult res = solve_qma(F, cfg);
    REQUIRE(res.report.converged);

    const EstimateReport rep = estimate_trace(res.stage_states, F);
    CHECK(rep.excluded == 0);
    CHECK(rep.a_prime == 1.0);
    CHECK(std::abs(rep.c_emp - 2.0) < 1e-12);       // tr of the identity
    CHECK(std::abs(rep.a_constant - 3.0) < 1e-12);  // A = C/A' + 1
    for (const EstimateRow &row : rep.rows) {
        CHECK(std::abs(row.sup_q - 2.0) < 1e-12);
        CHECK(row.phi_inf < 1e-14);
        CHECK(row.bridge_min > -1e-10);
        CHECK(std::abs(row.laplacian_at_argmax) < 1e-8);
    }
}

TEST_CASE("trace monitor: manufactured path rows, bridge, maximum principle") {
    SolverConfig cfg;
    cfg.n = 1;
    cfg.N = 8;
    cfg.newton_tol = 1e-12;
    const GridPtr grid = TorusGrid::make(cfg.n, cfg.N);
    const ScalarField F = manufactured_density(grid);
    const SolveResult res = solve_qma(F, cfg);
    REQUIRE(res.report.converged);
    REQUIRE(res.stage_states.size() == res.report.stages.size());

    const EstimateReport rep = estimate_trace(res.stage_states, F);
    CHECK(rep.excluded == 0);
    REQUIRE(rep.rows.size() == res.stage_states.size());
    // Fixed point: A = C_emp/A' + 1 exactly at the reported constants.
    CHECK(std::abs(rep.a_constant - (rep.c_emp / rep.a_prime + 1.0)) < 1e-10);
    CHECK(rep.a_constant > 2.0);

    double prev_t = 0.0;
    for (const EstimateRow &row : rep.rows) {
        CHECK(row.t > prev_t);
        prev_t = row.t;
        CHECK(row.phi_inf < 0.15);
        // Mean of the trace is the background dimension: the correction
        // is a derivative field with exact zero mean.
        CHECK(std::abs(row.tr_mean - 2.0) < 1e-12);
        CHECK(row.tr_max >= row.tr_mean);
        // Mixed-trace inequality with the true determinant ratio holds
        // pointwise (identity at this dimension).
        CHECK(row.bridge_min > -1e-10);
        // Discrete maximum principle at the argmax of Q.
        CHECK(row.laplacian_at_argmax <= 1e-8);
        CHECK(row.sup_q <= row.tr_max + rep.a_constant * row.phi_inf + 1e-12);
        CHECK(row.sup_q >= row.tr_max - rep.a_constant * row.phi_inf - 1e-12);
    }
    // The final state solves the equation exactly in the live subspace;
    // there the volume-factor variant agrees with the true ratio.
    CHECK(rep.rows.back().bridge_eq_min > -1e-10);

    // Override pins A without re-solving the fixed point.
    const EstimateReport forced = estimate_trace(res.stage_states, F, 5.0);
    CHECK(forced.a_constant == 5.0);
    CHECK(forced.c_emp <= rep.c_emp + 1e-12);
}

TEST_CASE("trace monitor: exclusions and config errors") {
    SolverConfig cfg;
    cfg.n = 1;
    cfg.N = 8;
    const GridPtr grid = TorusGrid::make(cfg.n, cfg.N);
    const ScalarField F = zero_field(grid);
    const SolveResult res = solve_qma(F, cfg);

    // A state far outside the positivity cone is excluded, not fatal.
    std::vector<double> huge(grid->total());
    for (std::size_t pt = 0; pt < huge.size(); ++pt)
        huge[pt] = std::cos(2.0 * kPi * grid->coord(pt, 0));
    SolverState bad;
    bad.phi = ScalarField(grid, huge);
    bad.t = 0.5;
    std::vector<SolverState> states = res.stage_states;
    states.push_back(bad);
    const EstimateReport rep = estimate_trace(states, F);
    CHECK(rep.excluded == 1);
    CHECK(rep.rows.size() == res.stage_states.size());

    CHECK_THROWS_AS(estimate_trace({}, F), Error);
    const GridPtr other = TorusGrid::make(1, 4);
    CHECK_THROWS_AS(estimate_trace(res.stage_states, zero_field(other)),
                    Error);
    CHECK_THROWS_AS(estimate_trace({bad}, F), Error);  // nothing usable
}
