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

#include "suites.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <mutex>
#include <thread>

#include "bundle.hpp"
#include "curvature.hpp"
#include "fields.hpp"
#include "hypalg.hpp"
#include "monitor.hpp"

namespace qma {

namespace {

constexpr int kBundlesPerPoint = 50;   // delta / eqns sweep density
constexpr int kMetricsPerPoint = 20;   // fund / fund2 random pairings
constexpr int kFramePairs = 50;        // pair-invariance samples

/** Per-sample generator: deterministic in (seed, sample index) only. */
Rng sample_rng(std::uint64_t seed, int index) {
    return Rng(seed ^
               (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(index + 1)));
}

std::string point_label(const Vec &z) {
    std::string out = "(";
    char buf[64];
    for (int r = 0; r < z.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%s%.6f%+.6fi",
                      r == 0 ? "" : "; ", z(r).real(), z(r).imag());
        out += buf;
    }
    return out + ")";
}

std::string trial_label(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trial %d", k);
    return buf;
}

Mat random_hermitian(int m, Rng &rng, double scale = 1.0) {
    Mat B(m, m);
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) B(r, s) = rng.complex_uniform(scale);
    return 0.5 * (B + B.adjoint());
}

double min_eig_of(const Mat &A) {
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.compute(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/** Twist-invariant random pairing; `positive` redraws to a uniform floor. */
Mat invariant_pairing(const Mat &base, const JTensor &J, bool positive,
                      Rng &rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        const Mat g =
            base + j_average(random_hermitian(static_cast<int>(base.rows()),
                                              rng, 0.4),
                             J)
                       .comp;
        if (positive ? (min_eig_of(g) > 0.05)
                     : (std::abs(g.determinant()) > 1e-2))
            return g;
    }
    throw Error(ErrorCode::runtime, "pairing redraw failed");
}

void check_mutation(const std::string &suite, Mutation mu) {
    if (mu == Mutation::none) return;
    const bool ok =
        (suite == "delta" && mu == Mutation::sign_flip) ||
        (suite == "eqns" && mu == Mutation::de_hyperhermitianize) ||
        (suite == "fund" && mu == Mutation::de_hyperhermitianize);
    require(ok, ErrorCode::config,
            "suite '" + suite + "' does not define mutation '" +
                mutation_name(mu) + "'");
}

using SampleFn = std::function<SuitePoint(int)>;

/** Evaluate samples 0..count-1, optionally on a worker pool; the result
 *  order and values are independent of the pool size. */
std::vector<SuitePoint> sweep(int count, int threads, const SampleFn &fn) {
    std::vector<SuitePoint> out(static_cast<std::size_t>(count));
    const int workers = std::clamp(threads, 1, count);
    if (workers == 1) {
        for (int k = 0; k < count; ++k)
            out[static_cast<std::size_t>(k)] = fn(k);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= count) return;
            try {
                out[static_cast<std::size_t>(k)] = fn(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread &t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace

Mutation mutation_from_string(const std::string &text) {
    if (text.empty() || text == "none") return Mutation::none;
    if (text == "sign-flip") return Mutation::sign_flip;
    if (text == "de-hyperhermitianize") return Mutation::de_hyperhermitianize;
    throw Error(ErrorCode::config, "unknown mutation '" + text + "'");
}

std::string mutation_name(Mutation mu) {
    switch (mu) {
        case Mutation::none: return "none";
        case Mutation::sign_flip: return "sign-flip";
        case Mutation::de_hyperhermitianize: return "de-hyperhermitianize";
    }
    return "none";
}

const std::vector<std::string> &suite_names() {
    static const std::vector<std::string> names = {
        "quaternionic", "bijection", "pre",   "fund",  "fund2",
        "frame",        "delta",     "eqns",  "fform", "equiv"};
    return names;
}

double suite_threshold(const std::string &suite, const std::string &chart) {
    const bool flat_chart = chart == "flat" || chart == "flat4";
    struct Row {
        const char *name;
        double flat;
        double curved;
    };
    static const Row table[] = {
        {"quaternionic", 1e-10, 1e-10},
        {"bijection", 1e-10, 1e-10},
        {"pre", 1e-12, 1e-6},
        {"fund", 1e-7, 1e-7},
        {"fund2", 1e-7, 1e-7},
        {"frame", 1e-8, 1e-8},
        {"delta", 1e-12, 1e-6},
        {"eqns", 1e-7, 1e-7},
        {"fform", 1e-11, 1e-11},
        {"equiv", 1e-10, 1e-10},
    };
    for (const Row &row : table)
        if (suite == row.name) return flat_chart ? row.flat : row.curved;
    throw Error(ErrorCode::config, "unknown suite '" + suite + "'");
}

SuiteResult run_suite(const std::string &suite,
                      const KahlerPotentialChart &chart, int points,
                      std::uint64_t seed, Mutation mutation, int threads) {
    require(points > 0, ErrorCode::config, "points must be positive");
    check_mutation(suite, mutation);

    SuiteResult result;
    result.suite = suite;
    result.chart = chart.name();
    result.chart_param = chart.param();
    result.points = points;
    result.seed = seed;
    result.mutation = mutation;
    result.threshold = suite_threshold(suite, chart.name());

    SampleFn fn;

    if (suite == "quaternionic") {
        fn = [&](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const QuaternionicDiagnostic q =
                check_quaternionic(chart.structure_at(z0));
            return {point_label(z0),
                    {{"jj", q.jj}, {"anti", q.anti}, {"kk", q.kk}}};
        };
    } else if (suite == "bijection") {
        fn = [&](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const JTensor J = chart.structure_at(z0);
            const Mat base = chart.metric_jet(z0).values();
            const Mat g = invariant_pairing(base, J, true, rng);
            const QForm20 Omega = omega_from_gJ(HermitianMetric{g}, J);
            const Mat back = g_from_omegaJ(Omega, J).comp;
            const double roundtrip = (back - g).cwiseAbs().maxCoeff();
            const double qreal = q_real_residual(Omega, J);
            const double positivity =
                std::abs(q_positive_check(Omega, J) - min_eig_of(g));
            return {point_label(z0),
                    {{"roundtrip", roundtrip},
                     {"q_real", qreal},
                     {"positivity", positivity}}};
        };
    } else if (suite == "pre") {
        fn = [&](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const PreResiduals r = verify_prop_pre(chart, z0);
            return {point_label(z0),
                    {{"pre1", r.pre1},
                     {"pre2", r.pre2},
                     {"pre3", r.pre3},
                     {"pre4", r.pre4}}};
        };
    } else if (suite == "fund") {
        const bool mutate = mutation == Mutation::de_hyperhermitianize;
        fn = [&, mutate](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const JTensor J = chart.structure_at(z0);
            double fund1 = 0.0, hk = 0.0;
            for (int d = 0; d < kMetricsPerPoint; ++d) {
                Mat g_pt;
                if (mutate) {
                    // Non-invariant Hermitian pairing on purpose.
                    g_pt = random_hermitian(chart.dim(), rng) +
                           2.0 * Mat::Identity(chart.dim(), chart.dim());
                } else {
                    g_pt = invariant_pairing(
                        Mat::Zero(chart.dim(), chart.dim()), J, false, rng);
                }
                const FundResiduals f =
                    verify_lemma_fund(chart, z0, g_pt, !mutate);
                fund1 = std::max(fund1, f.fund1);
                hk = std::max(hk, f.hk_trace);
            }
            return {point_label(z0), {{"fund1", fund1}, {"hk_trace", hk}}};
        };
    } else if (suite == "fund2") {
        fn = [&](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const JTensor J = chart.structure_at(z0);
            const Mat base = chart.metric_jet(z0).values();
            Fund2Residuals worst{};
            for (int d = 0; d < kMetricsPerPoint; ++d) {
                const Mat g_pt = invariant_pairing(base, J, true, rng);
                const Fund2Residuals f = verify_lemma_fund2(chart, z0, g_pt);
                worst.eq1 = std::max(worst.eq1, f.eq1);
                worst.eq2 = std::max(worst.eq2, f.eq2);
                worst.eq3 = std::max(worst.eq3, f.eq3);
                worst.eq4 = std::max(worst.eq4, f.eq4);
                worst.conj_pair = std::max(worst.conj_pair, f.conj_pair);
            }
            return {point_label(z0),
                    {{"eq1", worst.eq1},
                     {"eq2", worst.eq2},
                     {"eq3", worst.eq3},
                     {"eq4", worst.eq4},
                     {"conj_pair", worst.conj_pair}}};
        };
    } else if (suite == "frame") {
        fn = [&](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const MetricJets mj = metric_jets(chart, z0);
            const CurvatureTensor R = curvature_at(mj.g, mj.g_up);
            const HermitianMetric g{mj.g.values()};
            const JTensor J = chart.structure_at(z0);
            const JAdaptedFrame frame = j_adapted_frame(g, J);
            const double complete = frame_completeness_residual(frame, g);
            const FrameTraceReport rep =
                frame_trace_check(R, frame, g, J, rng, kFramePairs);
            return {point_label(z0),
                    {{"completeness", complete},
                     {"trace", rep.trace_residual},
                     {"pair", rep.pair_residual}}};
        };
    } else if (suite == "delta") {
        const bool flip = mutation == Mutation::sign_flip;
        fn = [&, flip](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const NormalChart nc = normal_chart_at(chart, z0);
            double worst = 0.0;
            for (int d = 0; d < kBundlesPerPoint; ++d)
                worst = std::max(
                    worst,
                    delta_tr_check(make_bundle_at(nc, rng), flip).residual);
            return {point_label(z0), {{"delta", worst}}};
        };
    } else if (suite == "eqns") {
        const bool dehyp = mutation == Mutation::de_hyperhermitianize;
        fn = [&, dehyp](int k) -> SuitePoint {
            Rng rng = sample_rng(seed, k);
            const Vec z0 = chart.sample_point(rng);
            const NormalChart nc = normal_chart_at(chart, z0);
            double first = 0.0, second = 0.0, sum = 0.0;
            for (int d = 0; d < kBundlesPerPoint; ++d) {
                const EqnsReport e =
                    eqns_term(make_bundle_at(nc, rng), dehyp);
                first = std::max(first, e.first);
                second = std::max(second, e.second);
                sum = std::max(sum, e.sum);
            }
            return {point_label(z0),
                    {{"first", first}, {"second", second}, {"sum", sum}}};
        };
    } else if (suite == "fform" || suite == "equiv") {
        require(chart.name() == "flat" && chart.dim() == 2, ErrorCode::config,
                "suite '" + suite + "' runs on the flat torus (chart flat)");
        const GridPtr grid = TorusGrid::make(1, 16);
        const int m = grid->m();
        const JTensor J = flat_J(m);
        const Mat id = Mat::Identity(m, m);
        const MetricField g0 = MetricField::constant(grid, id);
        const Mat Omega0 = omega_from_gJ(HermitianMetric{id}, J).comp;
        const cplx pf0 = pfaffian(Omega0);
        const double det0 = id.determinant().real();

        if (suite == "fform") {
            fn = [&, grid, J, g0, Omega0](int k) -> SuitePoint {
                Rng rng = sample_rng(seed, k);
                const ScalarField phi =
                    random_band_limited(grid, 2, 0.2, rng);
                const MetricField via_metric = omega_phi(g0, J, phi);
                const FormField corr = dd_J(phi, J);
                double worst = 0.0;
                for (std::size_t pt = 0; pt < grid->total(); ++pt) {
                    const Mat via_form =
                        g_from_omegaJ(QForm20{Omega0 + corr.at(pt)}, J).comp;
                    worst = std::max(worst, (via_form - via_metric.at(pt))
                                                .cwiseAbs()
                                                .maxCoeff());
                }
                return {trial_label(k), {{"route_gap", worst}}};
            };
        } else {
            fn = [&, grid, J, g0, Omega0, pf0, det0](int k) -> SuitePoint {
                Rng rng = sample_rng(seed, k);
                ScalarField phi = random_band_limited(grid, 1, 0.08, rng);
                int attempt = 0;
                while (omega_phi(g0, J, phi).min_eig() <= 0.05) {
                    require(++attempt < 100, ErrorCode::runtime,
                            "positive potential redraw failed");
                    phi = random_band_limited(grid, 1, 0.08, rng);
                }
                const ScalarField F = random_band_limited(grid, 1, 0.3, rng);
                const double b = rng.uniform(-0.2, 0.2);
                const ScalarField r11 = residual_11(g0, J, phi, F, b);
                const ScalarField r20 = residual_20(
                    FormField::constant(grid, Omega0), J, phi, F, b);
                const MetricField g_phi = omega_phi(g0, J, phi);
                const FormField corr = dd_J(phi, J);
                double gap = 0.0, pf_det = 0.0;
                for (std::size_t pt = 0; pt < grid->total(); ++pt) {
                    gap = std::max(gap, std::abs(r11[pt] - r20[pt]));
                    const cplx pf = pfaffian(Mat(Omega0 + corr.at(pt)));
                    const cplx ratio2 = (pf / pf0) * (pf / pf0);
                    const double det =
                        g_phi.at(pt).determinant().real() / det0;
                    pf_det = std::max(pf_det, std::abs(ratio2 - det));
                }
                return {trial_label(k),
                        {{"formulation_gap", gap}, {"pf_vs_det", pf_det}}};
            };
        }
    } else {
        throw Error(ErrorCode::config, "unknown suite '" + suite + "'");
    }

    result.samples = sweep(points, threads, fn);
    for (const SuitePoint &sp : result.samples)
        for (const auto &[name, value] : sp.residuals)
            result.max_rel_residual = std::max(result.max_rel_residual, value);
    result.pass = result.max_rel_residual <= result.threshold;
    return result;
}

}  // namespace qma
