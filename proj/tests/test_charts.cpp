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
#include <complex>

#include "charts.hpp"
#include "hypalg.hpp"

using namespace qma;

namespace {

/**
 * @brief Closed forms for the unit-determinant ALE chart, written directly
 *        from the radial potential K(u) = s + a^2 log u - a^2 log(a^2 + s)
 *        with u = |z|^2 and s = sqrt(u^2 + a^4).
 *
 * Independent oracle: no jets, just scalar arithmetic.
 */
struct EhClosed {
    double a2, a4, u, s;
    double k1, k2, k3;  // dK/du, d2K/du2, d3K/du3
    Vec z;

    EhClosed(const Vec &z0, double a) : z(z0) {
        a2 = a * a;
        a4 = a2 * a2;
        u = z0.squaredNorm();
        s = std::sqrt(u * u + a4);
        k1 = s / u;
        k2 = -a4 / (s * u * u);
        k3 = a4 * (1.0 / (s * s * s * u) + 2.0 / (s * u * u * u));
    }

    double potential() const {
        return s + a2 * (std::log(u) - std::log(a2 + s));
    }

    Mat metric() const {
        Mat G(2, 2);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                G(r, c) = k1 * (r == c ? 1.0 : 0.0) + k2 * z(c) * std::conj(z(r));
        return G;
    }

    /** d_{z^k} of the metric component (r, s). */
    cplx dmetric(int r, int c, int k) const {
        cplx out = k2 * std::conj(z(k)) * (r == c ? 1.0 : 0.0);
        out += k3 * std::conj(z(k)) * z(c) * std::conj(z(r));
        if (k == c) out += k2 * std::conj(z(r));
        return out;
    }
};

double fd_order(double err_h, double err_h2) {
    return std::log2(err_h / err_h2);
}

}  // namespace

TEST_CASE("closed-form oracle self-check: radial derivatives by differencing") {
    // Guard the oracle itself: k2 and k3 must be u-derivatives of k1.
    const double a = 1.3;
    Vec z(2);
    z << cplx(0.7, 0.2), cplx(-0.3, 0.5);
    // Rescale the whole vector so u moves by +-h at a fixed direction.
    const double h = 1e-5;
    const double u = z.squaredNorm();
    const EhClosed mid(z, a);
    const EhClosed up(z * std::sqrt((u + h) / u), a);
    const EhClosed dn(z * std::sqrt((u - h) / u), a);
    CHECK(std::abs((up.potential() - dn.potential()) / (2 * h) - mid.k1) <=
          1e-7);
    CHECK(std::abs((up.k1 - dn.k1) / (2 * h) - mid.k2) <= 1e-7);
    CHECK(std::abs((up.k2 - dn.k2) / (2 * h) - mid.k3) <= 1e-6);
}

TEST_CASE("flat chart: constant identity metric and block structure") {
    for (int m : {2, 4}) {
        const KahlerPotentialChart chart = KahlerPotentialChart::flat(m);
        CHECK(chart.dim() == m);
        Rng rng(31);
        const Vec z0 = chart.sample_point(rng);
        CHECK(chart.in_domain(z0));

        const Jet4 pot = chart.potential_jet(z0);
        CHECK(std::abs(pot.value() - z0.squaredNorm()) <= 1e-13);

        const JetMat g = chart.metric_jet(z0);
        const JetMat gu = chart.metric_up_jet(z0);
        const JetSpacePtr sp = pot.space();
        double err = 0.0;
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) {
                Jet4 want = Jet4::constant(sp, r == c ? 1.0 : 0.0);
                err = std::max(err, (g.at(r, c) - want).max_abs_coeff());
                err = std::max(err, (gu.at(r, c) - want).max_abs_coeff());
            }
        CHECK(err <= 1e-14);

        const Mat J0 = chart.structure_jet(z0).values();
        CHECK((J0 - flat_J(m).comp).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(KahlerPotentialChart::named("bogus"), Error);
}

TEST_CASE("ale chart matches the closed-form metric and its derivatives") {
    for (double a : {1.0, 0.8}) {
        const KahlerPotentialChart chart = KahlerPotentialChart::ale(a);
        CHECK(chart.dim() == 2);
        CHECK_FALSE(chart.in_domain(Vec::Zero(2)));
        Rng rng(101);
        for (int rep = 0; rep < 5; ++rep) {
            const Vec z0 = chart.sample_point(rng);
            const EhClosed oracle(z0, a);
            const Jet4 pot = chart.potential_jet(z0);
            const JetSpacePtr sp = pot.space();

            CHECK(std::abs(pot.value() - oracle.potential()) <= 1e-12);
            for (int r = 0; r < 2; ++r)
                CHECK(std::abs(pot.partial({sp->var_z(r)}) -
                               oracle.k1 * std::conj(z0(r))) <= 1e-12);

            const JetMat g = chart.metric_jet(z0);
            const Mat G0 = g.values();
            CHECK((G0 - oracle.metric()).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK(std::abs(G0.determinant() - 1.0) <= 1e-12);

            double derr = 0.0;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    for (int k = 0; k < 2; ++k)
                        derr = std::max(
                            derr,
                            std::abs(g.at(r, c).derivative(sp->var_z(k)).value() -
                                     oracle.dmetric(r, c, k)));
            CHECK(derr <= 1e-11);

            // Unit determinant as a jet: log det g vanishes through order 2,
            // which exercises potential coefficients up to degree 4.
            const Jet4 logdet = jet_log(g.det());
            CHECK(logdet.max_abs_coeff() <= 1e-11);

            // Raised components invert the transpose.
            const Mat U = chart.metric_up_jet(z0).values();
            CHECK((U * G0.transpose() - Mat::Identity(2, 2))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("ale structure: anticommuting, metric-invariant, unit-compatible") {
    const KahlerPotentialChart chart = KahlerPotentialChart::ale(1.0);
    Rng rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const Vec z0 = chart.sample_point(rng);
        const JTensor J = chart.structure_at(z0);
        const HermitianMetric g{chart.metric_jet(z0).values()};

        const QuaternionicDiagnostic q = check_quaternionic(J);
        CHECK(q.jj <= 1e-12);
        CHECK(q.anti <= 1e-12);
        CHECK(q.kk <= 1e-10);
        CHECK(is_hyperhermitian(g, J) <= 1e-12);

        const Mat Jjet0 = chart.structure_jet(z0).values();
        CHECK((Jjet0 - J.comp).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("jet expansions reproduce off-center values at fourth order") {
    const KahlerPotentialChart chart = KahlerPotentialChart::ale(1.1);
    Rng rng(12);
    const Vec z0 = chart.sample_point(rng);
    const Jet4 pot = chart.potential_jet(z0);
    const JetMat g = chart.metric_jet(z0);

    Vec dir(2);
    dir << cplx(0.6, -0.3), cplx(0.2, 0.7);
    dir /= std::sqrt(dir.squaredNorm());

    const auto pot_err = [&](double h) {
        const Vec dz = h * dir;
        return std::abs(pot.eval(dz) - chart.potential_jet(z0 + dz).value());
    };
    const auto g_err = [&](double h) {
        const Vec dz = h * dir;
        const Mat Gh = chart.metric_jet(z0 + dz).values();
        double e = 0.0;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                e = std::max(e, std::abs(g.at(r, c).eval(dz) - Gh(r, c)));
        return e;
    };

    // Potential jets are valid to order 4: error O(h^5).
    const double p1 = pot_err(0.1), p2 = pot_err(0.05);
    CHECK(p1 <= 1e-4);
    CHECK(fd_order(p1, p2) >= 4.0);

    // Metric jets are valid to order 2: error O(h^3).
    const double m1 = g_err(0.1), m2 = g_err(0.05);
    CHECK(m1 <= 1e-2);
    CHECK(fd_order(m1, m2) >= 2.5);
}

TEST_CASE("normal chart: center values, vanishing first metric derivatives") {
    Rng rng(23);
    for (const char *name : {"flat", "eh"}) {
        const KahlerPotentialChart chart = KahlerPotentialChart::named(name);
        const int m = chart.dim();
        const Vec z0 = chart.sample_point(rng);
        const NormalChart nc = normal_chart_at(chart, z0);
        const JetSpacePtr sp = nc.pot.space();

        const Mat G0 = chart.metric_jet(z0).values();
        CHECK((nc.g.values() - G0).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(std::abs(nc.pot.value() - chart.potential_jet(z0).value()) <=
              1e-12);
        CHECK((nc.J.values() - chart.structure_at(z0).comp)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);

        double derr = 0.0;
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c)
                for (int v = 0; v < 2 * m; ++v)
                    derr = std::max(
                        derr, std::abs(nc.g.at(r, c).derivative(v).value()));
        CHECK(derr <= 1e-12);

        if (std::string(name) == "flat") {
            // Flat chart: normal coordinates are the chart itself.
            CHECK(nc.Gamma0.max_abs() == 0.0);
            for (int r = 0; r < m; ++r) {
                Jet4 want = Jet4::variable(sp, sp->var_z(r));
                CHECK((nc.chi[r] - want).max_abs_coeff() == 0.0);
            }
        }
    }
}

TEST_CASE("normal chart: point maps and jet inverse agree") {
    const KahlerPotentialChart chart = KahlerPotentialChart::ale(1.0);
    Rng rng(29);
    const Vec z0 = chart.sample_point(rng);
    const NormalChart nc = normal_chart_at(chart, z0);

    for (int rep = 0; rep < 10; ++rep) {
        Vec w(2);
        for (int r = 0; r < 2; ++r) w(r) = rng.complex_uniform(0.08);
        const Vec dz = nc.invert_point(w);
        CHECK((nc.forward_point(dz) - w).cwiseAbs().maxCoeff() <= 1e-12);

        // chi jets evaluate to the pointwise inverse, error O(|w|^5).
        for (int r = 0; r < 2; ++r)
            CHECK(std::abs(nc.chi[r].eval(w) - dz(r)) <= 1e-5);
    }
    for (int rep = 0; rep < 5; ++rep) {
        Vec dz(2);
        for (int r = 0; r < 2; ++r) dz(r) = rng.complex_uniform(0.1);
        CHECK((nc.invert_point(nc.forward_point(dz)) - dz)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
    }
}

TEST_CASE("normal chart: transported potential matches pullback values") {
    const KahlerPotentialChart chart = KahlerPotentialChart::ale(0.9);
    Rng rng(41);
    const Vec z0 = chart.sample_point(rng);
    const NormalChart nc = normal_chart_at(chart, z0);

    Vec dir(2);
    dir << cplx(-0.4, 0.5), cplx(0.8, 0.1);
    dir /= std::sqrt(dir.squaredNorm());
    const auto err = [&](double h) {
        const Vec w = h * dir;
        const Vec z = z0 + nc.invert_point(w);
        return std::abs(nc.pot.eval(w) - chart.potential_jet(z).value());
    };
    const double e1 = err(0.08), e2 = err(0.04);
    CHECK(e1 <= 1e-4);
    CHECK(fd_order(e1, e2) >= 4.0);

    // Transported raised metric inverts the transported metric as jets.
    const JetSpacePtr sp = nc.pot.space();
    JetMat prod(2, 2);
    const JetMat gt = nc.g.transpose();
    double ierr = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            Jet4 sum = nc.g_up.at(r, 0) * gt.at(0, c);
            sum += nc.g_up.at(r, 1) * gt.at(1, c);
            Jet4 want = Jet4::constant(sp, r == c ? 1.0 : 0.0);
            ierr = std::max(ierr, (sum - want).max_abs_coeff());
        }
    CHECK(ierr <= 1e-11);
}
