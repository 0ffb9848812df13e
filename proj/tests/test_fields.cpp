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
#include <cstdio>

#include "fields.hpp"
#include "snapshot.hpp"

using namespace qma;

namespace {

ScalarField from_function(const GridPtr &grid,
                          double (*fn)(const TorusGrid &, std::size_t)) {
    std::vector<double> v(grid->total());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(*grid, i);
    return ScalarField(grid, std::move(v));
}

double cos_x1(const TorusGrid &g, std::size_t i) {
    return std::cos(2.0 * kPi * g.coord(i, 0));
}

double cos_x1_sin_x4(const TorusGrid &g, std::size_t i) {
    return std::cos(2.0 * kPi * g.coord(i, 0)) *
           std::sin(2.0 * kPi * g.coord(i, 3));
}

}  // namespace

TEST_CASE("grid bookkeeping and spectral round trip") {
    CHECK_THROWS_AS(TorusGrid::make(1, 7), Error);
    CHECK_THROWS_AS(TorusGrid::make(1, 2), Error);
    CHECK_THROWS_AS(TorusGrid::make(3, 8), Error);

    const GridPtr grid = TorusGrid::make(1, 8);
    CHECK(grid->m() == 2);
    CHECK(grid->axes() == 4);
    CHECK(grid->total() == 4096);
    CHECK(grid->wavenumber(3) == 3);
    CHECK(grid->wavenumber(4) == 0);  // Nyquist zeroed
    CHECK(grid->wavenumber(5) == -3);

    std::vector<int> idx{1, 2, 3, 4};
    const std::size_t flat = grid->flat_index(idx);
    for (int a = 0; a < 4; ++a) CHECK(grid->axis_index(flat, a) == idx[a]);
    CHECK(grid->flat_index({-7, 10, 3, 12}) == flat);

    Rng rng(9);
    const ScalarField f = random_band_limited(grid, 2, 1.0, rng);
    CHECK(f.max_abs() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.mean()) <= 1e-13);
    CHECK(f.roundtrip_residual() <= 1e-12 * (1.0 + f.max_abs()));
}

TEST_CASE("spectral derivatives against analytic differentiation") {
    const GridPtr grid = TorusGrid::make(1, 16);

    // Constant: every derivative vanishes.
    const ScalarField c(grid, std::vector<double>(grid->total(), 2.5));
    CHECK(spectral_derivative(c, {0}).max_abs() <= 1e-13);
    CHECK(spectral_derivative(c, {1, 2}).max_abs() <= 1e-13);

    // f = cos(2 pi x1): d_{z^1} f = -pi sin(2 pi x1).
    const ScalarField f = from_function(grid, cos_x1);
    const CplxField d = spectral_derivative(f, {0});
    for (std::size_t i = 0; i < grid->total(); ++i) {
        const double want = -kPi * std::sin(2.0 * kPi * grid->coord(i, 0));
        CHECK(std::abs(d.v[i] - want) <= 1e-12);
    }

    // Product mode: f = cos(2 pi x1) sin(2 pi x4);
    // f_{1 2bar} = -i pi^2 sin(2 pi x1) cos(2 pi x4).
    const ScalarField g = from_function(grid, cos_x1_sin_x4);
    const CplxField mixed = spectral_derivative(g, {0, 3});
    for (std::size_t i = 0; i < grid->total(); ++i) {
        const cplx want = cplx(0.0, -1.0) * kPi * kPi *
                          std::sin(2.0 * kPi * grid->coord(i, 0)) *
                          std::cos(2.0 * kPi * grid->coord(i, 3));
        CHECK(std::abs(mixed.v[i] - want) <= 1e-11);
    }

    // Mixed-partial symmetry on a random band-limited field.
    Rng rng(6);
    const ScalarField h = random_band_limited(grid, 3, 1.0, rng);
    const CplxField d12 = spectral_derivative(h, {0, 3});
    const CplxField d21 = spectral_derivative(h, {3, 0});
    double sym = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i)
        sym = std::max(sym, std::abs(d12.v[i] - d21.v[i]));
    CHECK(sym <= 1e-12);
}

TEST_CASE("complex Hessian: Hermitian, matches the hand example") {
    const GridPtr grid = TorusGrid::make(1, 16);
    const double eps = 0.1;
    ScalarField phi = from_function(grid, cos_x1);
    phi.scale(eps);

    const MatrixField H = complex_hessian(phi);
    CHECK(H.hermiticity_residual() == 0.0);
    for (std::size_t i = 0; i < grid->total(); ++i) {
        const double want =
            -eps * kPi * kPi * std::cos(2.0 * kPi * grid->coord(i, 0));
        CHECK(std::abs(H.entry(i, 0, 0) - want) <= 1e-12);
        CHECK(std::abs(H.entry(i, 0, 1)) <= 1e-12);
        CHECK(std::abs(H.entry(i, 1, 1)) <= 1e-12);
    }
}

TEST_CASE("dd_J: antisymmetric, q-real, hand magnitude under pinned forms") {
    const GridPtr grid = TorusGrid::make(1, 16);
    const JTensor J = flat_J(2);

    const ScalarField zero(grid);
    CHECK(dd_J(zero, J).max_abs() == 0.0);

    const double eps = 0.1;
    ScalarField phi = from_function(grid, cos_x1);
    phi.scale(eps);
    const FormField form = dd_J(phi, J);
    CHECK(form.antisymmetry_residual() <= 1e-14);
    for (std::size_t i = 0; i < grid->total(); ++i) {
        // With Omega_{12} = 1 for (Id, flat J), the correction entry is
        // half the Hessian value: -(eps/2) pi^2 cos(2 pi x1).
        const double want =
            -0.5 * eps * kPi * kPi * std::cos(2.0 * kPi * grid->coord(i, 0));
        CHECK(std::abs(form.entry(i, 0, 1) - want) <= 1e-12);
        CHECK(std::abs(form.entry(i, 1, 0) + want) <= 1e-12);
    }

    // q-real pointwise for random band-limited potentials (seed 6).
    Rng rng(6);
    const ScalarField h = random_band_limited(grid, 2, 0.3, rng);
    const FormField fh = dd_J(h, J);
    double qr = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i)
        qr = std::max(qr, q_real_residual(QForm20{fh.at(i)}, J));
    CHECK(qr <= 1e-11);
}

TEST_CASE("potential-to-metric map and the fform consistency anchor") {
    const GridPtr grid = TorusGrid::make(1, 16);
    const JTensor J = flat_J(2);
    const MetricField g = MetricField::constant(grid, Mat::Identity(2, 2));

    const ScalarField zero(grid);
    const MetricField g0 = omega_phi(g, J, zero);
    double same = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i)
        same = std::max(same,
                        (g0.at(i) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff());
    CHECK(same == 0.0);

    const double eps = 0.1;
    ScalarField phi = from_function(grid, cos_x1);
    phi.scale(eps);
    const MetricField gphi = omega_phi(g, J, phi);
    CHECK(gphi.hermiticity_residual() <= 1e-13);
    for (std::size_t i = 0; i < grid->total(); ++i) {
        const double corr =
            -0.5 * eps * kPi * kPi * std::cos(2.0 * kPi * grid->coord(i, 0));
        CHECK(std::abs(gphi.entry(i, 0, 0) - (1.0 + corr)) <= 1e-12);
        CHECK(std::abs(gphi.entry(i, 1, 1) - (1.0 + corr)) <= 1e-12);
        CHECK(std::abs(gphi.entry(i, 0, 1)) <= 1e-13);
    }

    // Anchor: the (1,1) route equals the (2,0) route pointwise, and the
    // correction stays invariant under the structure twist.
    Rng rng(14);
    const ScalarField h = random_band_limited(grid, 2, 0.01, rng);
    const MetricField gh = omega_phi(g, J, h);
    const FormField corr20 = dd_J(h, J);
    const QForm20 Om0 = omega_from_gJ(HermitianMetric{Mat::Identity(2, 2)}, J);
    double gap = 0.0, inv = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i) {
        const Mat from20 =
            g_from_omegaJ(QForm20{Mat(Om0.comp + corr20.at(i))}, J).comp;
        gap = std::max(gap, (gh.at(i) - from20).cwiseAbs().maxCoeff());
        inv = std::max(inv, is_hyperhermitian(
                                HermitianMetric{Mat(gh.at(i) -
                                                    Mat::Identity(2, 2))},
                                J));
    }
    CHECK(gap <= 1e-11);
    CHECK(inv <= 1e-11);
}

TEST_CASE("residual forms agree and bridge Pfaffian to determinant") {
    const GridPtr grid = TorusGrid::make(1, 8);
    const JTensor J = flat_J(2);
    const Mat Id = Mat::Identity(2, 2);
    const MetricField g = MetricField::constant(grid, Id);
    const QForm20 Om0 = omega_from_gJ(HermitianMetric{Id}, J);
    const FormField Om = FormField::constant(grid, Om0.comp);

    const ScalarField zero(grid);
    CHECK(residual_11(g, J, zero, zero, 0.0).max_abs() <= 1e-14);
    CHECK(residual_20(Om, J, zero, zero, 0.0).max_abs() <= 1e-14);

    Rng rng(21);
    const ScalarField phi = random_band_limited(grid, 2, 0.004, rng);
    const MetricField gphi = omega_phi(g, J, phi);
    REQUIRE(gphi.min_eig() > 0.05);

    const ScalarField r11 = residual_11(g, J, phi, zero, 0.0);
    const ScalarField r20 = residual_20(Om, J, phi, zero, 0.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i)
        gap = std::max(gap, std::abs(r11[i] - r20[i]));
    CHECK(gap <= 1e-10);

    // (Pf ratio)^2 = det ratio, pointwise relative.
    const FormField corr = dd_J(phi, J);
    double bridge = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i) {
        const cplx pf = pfaffian(Mat(Om0.comp + corr.at(i))) /
                        pfaffian(Om0.comp);
        const double det = gphi.at(i).determinant().real() /
                           Id.determinant().real();
        bridge = std::max(bridge, std::abs(pf * pf - det) / (1.0 + det));
    }
    CHECK(bridge <= 1e-10);

    // Leaving the positive cone raises a stage error.
    ScalarField big = from_function(grid, cos_x1);
    big.scale(0.5);
    CHECK_THROWS_WITH_AS(residual_11(g, J, big, zero, 0.0),
                         doctest::Contains("q-positive"), Error);
    CHECK_THROWS_AS(residual_20(Om, J, big, zero, 0.0), Error);
}

TEST_CASE("integration and volume conservation") {
    const GridPtr grid = TorusGrid::make(1, 16);
    const JTensor J = flat_J(2);
    const MetricField g = MetricField::constant(grid, Mat::Identity(2, 2));

    const ScalarField zero(grid);
    CHECK(integrate(zero) == 0.0);
    CHECK(volume_check(g, J, zero) == 0.0);

    ScalarField phi = from_function(grid, cos_x1);
    phi.scale(0.1);
    CHECK(std::abs(integrate(phi)) <= 1e-13);
    CHECK(std::abs(volume_check(g, J, phi)) <= 1e-11);

    Rng rng(33);
    const ScalarField h = random_band_limited(grid, 2, 0.004, rng);
    REQUIRE(omega_phi(g, J, h).min_eig() > 0.0);
    CHECK(std::abs(volume_check(g, J, h)) <= 1e-10);
}

TEST_CASE("pointwise algebra extends to quaternionic dimension two") {
    const GridPtr grid = TorusGrid::make(2, 4);
    const JTensor J = flat_J(4);
    const Mat Id = Mat::Identity(4, 4);
    const MetricField g = MetricField::constant(grid, Id);
    Rng rng(44);
    const ScalarField phi = random_band_limited(grid, 1, 0.01, rng);

    const MetricField gphi = omega_phi(g, J, phi);
    CHECK(gphi.hermiticity_residual() <= 1e-13);
    REQUIRE(gphi.min_eig() > 0.1);

    const QForm20 Om0 = omega_from_gJ(HermitianMetric{Id}, J);
    const FormField corr = dd_J(phi, J);
    double gap = 0.0, qr = 0.0, bridge = 0.0;
    for (std::size_t i = 0; i < grid->total(); i += 7) {
        const Mat from20 =
            g_from_omegaJ(QForm20{Mat(Om0.comp + corr.at(i))}, J).comp;
        gap = std::max(gap, (gphi.at(i) - from20).cwiseAbs().maxCoeff());
        qr = std::max(qr, q_real_residual(QForm20{corr.at(i)}, J));
        const cplx pf = pfaffian(Mat(Om0.comp + corr.at(i))) /
                        pfaffian(Om0.comp);
        const double det = gphi.at(i).determinant().real();
        bridge = std::max(bridge, std::abs(pf * pf - det) / (1.0 + det));
    }
    CHECK(gap <= 1e-11);
    CHECK(qr <= 1e-11);
    CHECK(bridge <= 1e-10);
}

TEST_CASE("snapshot files round-trip and reject corruption") {
    const GridPtr grid = TorusGrid::make(1, 8);
    Rng rng(55);
    const ScalarField f = random_band_limited(grid, 2, 0.7, rng);

    const std::string path = "test_field.snap";
    write_scalar_snapshot(path, f);
    const ScalarField back = read_scalar_snapshot(path);
    CHECK(back.grid()->n() == 1);
    CHECK(back.grid()->N() == 8);
    double err = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i)
        err = std::max(err, std::abs(back[i] - f[i]));
    CHECK(err == 0.0);

    // Corrupt the magic and expect a configuration error.
    {
        std::FILE *fp = std::fopen(path.c_str(), "r+b");
        REQUIRE(fp != nullptr);
        std::fputc('X', fp);
        std::fclose(fp);
    }
    CHECK_THROWS_AS(read_scalar_snapshot(path), Error);
    std::remove(path.c_str());
}
