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

#include "fields.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

namespace qma {

namespace {

/**
 * Cached FFTW plans keyed by (axes, N, sign).  Plans are created in-place
 * on a scratch buffer with FFTW_UNALIGNED so they can be re-executed on
 * any array; the planner itself is not thread-safe and is serialized.
 */
class PlanCache {
  public:
    static fftw_plan get(const TorusGrid &grid, int sign) {
        static PlanCache cache;
        const std::tuple<int, int, int> key{grid.axes(), grid.N(), sign};
        std::lock_guard<std::mutex> lock(cache.mu_);
        auto it = cache.plans_.find(key);
        if (it != cache.plans_.end()) return it->second;
        std::vector<cplx> scratch(grid.total());
        std::vector<int> dims(grid.axes(), grid.N());
        fftw_complex *buf = reinterpret_cast<fftw_complex *>(scratch.data());
        fftw_plan plan =
            fftw_plan_dft(grid.axes(), dims.data(), buf, buf, sign,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        require(plan != nullptr, ErrorCode::runtime, "transform plan failed");
        cache.plans_.emplace(key, plan);
        return plan;
    }

  private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute(const TorusGrid &grid, std::vector<cplx> &data, int sign) {
    require(data.size() == grid.total(), ErrorCode::config,
            "transform: size mismatch");
    fftw_complex *buf = reinterpret_cast<fftw_complex *>(data.data());
    fftw_execute_dft(PlanCache::get(grid, sign), buf, buf);
}

void check_same_grid(const GridPtr &a, const GridPtr &b, const char *what) {
    require(a && b && a->same(*b), ErrorCode::config,
            std::string(what) + ": fields live on different grids");
}

/** Multiplier of d_{z^c} (hol = true) or d_{zbar^c} at wavevector kappa. */
cplx deriv_multiplier(const int *kappa, int c, bool hol) {
    const double kx = kappa[2 * c];
    const double ky = kappa[2 * c + 1];
    return hol ? cplx(kPi * ky, kPi * kx) : cplx(-kPi * ky, kPi * kx);
}

}  // namespace

// ---------------------------------------------------------------------------
// TorusGrid
// ---------------------------------------------------------------------------

TorusGrid::TorusGrid(int n, int N) : n_(n), N_(N) {
    total_ = 1;
    for (int a = 0; a < axes(); ++a) total_ *= static_cast<std::size_t>(N_);
    stride_.assign(axes(), 1);
    for (int a = axes() - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * N_;
}

GridPtr TorusGrid::make(int n, int N) {
    require(n == 1 || n == 2, ErrorCode::config,
            "grid: quaternionic dimension must be 1 or 2");
    require(N >= 4 && N % 2 == 0, ErrorCode::config,
            "grid: N must be even and at least 4");
    return std::make_shared<const TorusGrid>(n, N);
}

std::size_t TorusGrid::flat_index(const std::vector<int> &idx) const {
    require(static_cast<int>(idx.size()) == axes(), ErrorCode::config,
            "grid: index rank mismatch");
    std::size_t flat = 0;
    for (int a = 0; a < axes(); ++a) {
        int i = idx[a] % N_;
        if (i < 0) i += N_;
        flat += stride_[a] * static_cast<std::size_t>(i);
    }
    return flat;
}

void dft_forward(const TorusGrid &grid, std::vector<cplx> &data) {
    execute(grid, data, FFTW_FORWARD);
}

void dft_inverse(const TorusGrid &grid, std::vector<cplx> &data) {
    execute(grid, data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(grid.total());
    for (cplx &x : data) x *= scale;
}

// ---------------------------------------------------------------------------
// ScalarField
// ---------------------------------------------------------------------------

ScalarField::ScalarField(GridPtr grid)
    : grid_(std::move(grid)), v_(grid_->total(), 0.0) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), v_(std::move(values)) {
    require(v_.size() == grid_->total(), ErrorCode::config,
            "scalar field: value count mismatch");
}

const std::vector<cplx> &ScalarField::spectrum() const {
    if (!hat_valid_) {
        hat_.assign(v_.begin(), v_.end());
        dft_forward(*grid_, hat_);
        hat_valid_ = true;
    }
    return hat_;
}

double ScalarField::mean() const {
    double sum = 0.0;
    for (double x : v_) sum += x;
    return sum / static_cast<double>(v_.size());
}

double ScalarField::max_abs() const {
    double mx = 0.0;
    for (double x : v_) mx = std::max(mx, std::abs(x));
    return mx;
}

void ScalarField::add_constant(double c) {
    for (double &x : mutable_values()) x += c;
}

void ScalarField::scale(double s) {
    for (double &x : mutable_values()) x *= s;
}

double ScalarField::roundtrip_residual() const {
    std::vector<cplx> tmp(spectrum());
    dft_inverse(*grid_, tmp);
    double err = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i)
        err = std::max(err, std::abs(tmp[i] - v_[i]));
    return err;
}

// ---------------------------------------------------------------------------
// CplxField / MatrixField
// ---------------------------------------------------------------------------

double CplxField::max_abs() const {
    double mx = 0.0;
    for (const cplx &x : v) mx = std::max(mx, std::abs(x));
    return mx;
}

double CplxField::max_imag() const {
    double mx = 0.0;
    for (const cplx &x : v) mx = std::max(mx, std::abs(x.imag()));
    return mx;
}

ScalarField CplxField::real_part() const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return ScalarField(grid, std::move(out));
}

MatrixField::MatrixField(GridPtr grid, int m)
    : grid_(std::move(grid)),
      m_(m),
      v_(grid_->total() * static_cast<std::size_t>(m) * m, 0.0) {}

MatrixField MatrixField::constant(const GridPtr &grid, const Mat &value) {
    MatrixField out(grid, static_cast<int>(value.rows()));
    for (std::size_t pt = 0; pt < grid->total(); ++pt) out.set(pt, value);
    return out;
}

Mat MatrixField::at(std::size_t pt) const {
    Mat out(m_, m_);
    for (int r = 0; r < m_; ++r)
        for (int c = 0; c < m_; ++c) out(r, c) = entry(pt, r, c);
    return out;
}

void MatrixField::set(std::size_t pt, const Mat &value) {
    for (int r = 0; r < m_; ++r)
        for (int c = 0; c < m_; ++c) entry_ref(pt, r, c) = value(r, c);
}

double MatrixField::hermiticity_residual() const {
    double mx = 0.0;
    for (std::size_t pt = 0; pt < grid_->total(); ++pt)
        for (int r = 0; r < m_; ++r)
            for (int c = 0; c < m_; ++c)
                mx = std::max(mx, std::abs(entry(pt, r, c) -
                                           std::conj(entry(pt, c, r))));
    return mx;
}

double MatrixField::antisymmetry_residual() const {
    double mx = 0.0;
    for (std::size_t pt = 0; pt < grid_->total(); ++pt)
        for (int r = 0; r < m_; ++r)
            for (int c = 0; c < m_; ++c)
                mx = std::max(mx,
                              std::abs(entry(pt, r, c) + entry(pt, c, r)));
    return mx;
}

double MatrixField::min_eig() const {
    double mn = std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Mat> es;
    for (std::size_t pt = 0; pt < grid_->total(); ++pt) {
        const Mat H = at(pt);
        es.compute(Mat(0.5 * (H + H.adjoint())), Eigen::EigenvaluesOnly);
        mn = std::min(mn, es.eigenvalues().minCoeff());
    }
    return mn;
}

double MatrixField::max_abs() const {
    double mx = 0.0;
    for (const cplx &x : v_) mx = std::max(mx, std::abs(x));
    return mx;
}

// ---------------------------------------------------------------------------
// Spectral calculus
// ---------------------------------------------------------------------------

CplxField spectral_derivative(const ScalarField &f,
                              const std::vector<int> &pattern) {
    const GridPtr &grid = f.grid();
    require(grid != nullptr, ErrorCode::config, "derivative: empty field");
    const int m = grid->m();
    require(pattern.size() <= 4, ErrorCode::config,
            "derivative: total order exceeds 4");
    for (int p : pattern)
        require(p >= 0 && p < 2 * m, ErrorCode::config,
                "derivative: bad index pattern");

    std::vector<cplx> hat(f.spectrum());
    const int axes = grid->axes();
    std::vector<int> kappa(axes);
    for (std::size_t k = 0; k < hat.size(); ++k) {
        if (hat[k] == cplx(0.0)) continue;
        for (int a = 0; a < axes; ++a)
            kappa[a] = grid->wavenumber(grid->axis_index(k, a));
        cplx mult = 1.0;
        for (int p : pattern)
            mult *= deriv_multiplier(kappa.data(), p % m, p < m);
        hat[k] *= mult;
    }
    dft_inverse(*grid, hat);
    return CplxField{grid, std::move(hat)};
}

MatrixField complex_hessian(const ScalarField &f) {
    const GridPtr &grid = f.grid();
    const int m = grid->m();
    MatrixField H(grid, m);
    for (int r = 0; r < m; ++r)
        for (int s = r; s < m; ++s) {
            const CplxField d = spectral_derivative(f, {r, m + s});
            for (std::size_t pt = 0; pt < grid->total(); ++pt) {
                H.entry_ref(pt, r, s) = d.v[pt];
                if (s != r) H.entry_ref(pt, s, r) = std::conj(d.v[pt]);
            }
        }
    return H;
}

FormField dd_J(const ScalarField &f, const JTensor &J) {
    const GridPtr &grid = f.grid();
    require(J.dim() == grid->m(), ErrorCode::config, "dd_J: dimension mismatch");
    const MatrixField H = complex_hessian(f);
    const int m = grid->m();
    FormField out(grid, m);
    const Mat Jc = J.comp;
    const Mat Jt = J.comp.transpose();
    for (std::size_t pt = 0; pt < grid->total(); ++pt) {
        const Mat Hp = H.at(pt);
        out.set(pt, 0.5 * (Jc * Hp.conjugate() - Hp * Jt));
    }
    return out;
}

MetricField omega_phi(const MetricField &g, const JTensor &J,
                      const ScalarField &phi) {
    check_same_grid(g.grid(), phi.grid(), "omega_phi");
    const int m = g.m();
    require(J.dim() == m, ErrorCode::config, "omega_phi: dimension mismatch");
    const MatrixField H = complex_hessian(phi);
    MetricField out(g.grid(), m);
    for (std::size_t pt = 0; pt < g.grid()->total(); ++pt) {
        const Mat Hp = H.at(pt);
        out.set(pt, g.at(pt) + 0.5 * (Hp + sigma_twist(Hp, J.comp)));
    }
    return out;
}

ScalarField residual_11(const MetricField &g, const JTensor &J,
                        const ScalarField &phi, const ScalarField &F,
                        double b) {
    check_same_grid(g.grid(), phi.grid(), "residual_11");
    check_same_grid(phi.grid(), F.grid(), "residual_11");
    const MetricField gphi = omega_phi(g, J, phi);
    const GridPtr &grid = g.grid();
    std::vector<double> out(grid->total());
    Eigen::SelfAdjointEigenSolver<Mat> es;
    for (std::size_t pt = 0; pt < grid->total(); ++pt) {
        const Mat gp = gphi.at(pt);
        es.compute(Mat(0.5 * (gp + gp.adjoint())), Eigen::EigenvaluesOnly);
        require(es.eigenvalues().minCoeff() > 0.0, ErrorCode::stage,
                "left the q-positive cone");
        const double d0 = g.at(pt).determinant().real();
        const double d1 = gp.determinant().real();
        out[pt] = 0.5 * std::log(d1 / d0) - F[pt] - b;
    }
    return ScalarField(grid, std::move(out));
}

ScalarField residual_20(const FormField &Omega, const JTensor &J,
                        const ScalarField &phi, const ScalarField &F,
                        double b) {
    check_same_grid(Omega.grid(), phi.grid(), "residual_20");
    check_same_grid(phi.grid(), F.grid(), "residual_20");
    const FormField corr = dd_J(phi, J);
    const GridPtr &grid = phi.grid();
    std::vector<double> out(grid->total());
    for (std::size_t pt = 0; pt < grid->total(); ++pt) {
        const Mat om_pt = Omega.at(pt) + corr.at(pt);
        require(q_positive_check(QForm20{om_pt}, J) > 0.0, ErrorCode::stage,
                "left the q-positive cone");
        const cplx pf0 = pfaffian(Omega.at(pt));
        const cplx pf1 = pfaffian(om_pt);
        require(std::abs(pf0) > 0.0, ErrorCode::config,
                "residual_20: degenerate background form");
        const cplx ratio = pf1 / pf0;
        require(std::abs(ratio.imag()) <= 1e-8 * (1.0 + std::abs(ratio)) &&
                    ratio.real() > 0.0,
                ErrorCode::stage, "left the q-positive cone");
        out[pt] = std::log(ratio.real()) - F[pt] - b;
    }
    return ScalarField(grid, std::move(out));
}

double integrate(const ScalarField &f) { return f.mean(); }

double volume_check(const MetricField &g, const JTensor &J,
                    const ScalarField &phi) {
    const GridPtr &grid = g.grid();
    const FormField corr = dd_J(phi, J);
    double acc = 0.0;
    for (std::size_t pt = 0; pt < grid->total(); ++pt) {
        const cplx pf0 = pfaffian(omega_from_gJ(HermitianMetric{g.at(pt)},
                                                J).comp);
        const cplx pf1 = pfaffian(
            Mat(omega_from_gJ(HermitianMetric{g.at(pt)}, J).comp +
                corr.at(pt)));
        acc += (pf1 - pf0).real();
    }
    return acc / static_cast<double>(grid->total());
}

ScalarField random_band_limited(const GridPtr &grid, int band, double amplitude,
                                Rng &rng) {
    require(band >= 1 && 2 * band < grid->N(), ErrorCode::config,
            "random field: band must fit below Nyquist");
    const int axes = grid->axes();
    std::vector<cplx> hat(grid->total(), 0.0);
    std::vector<int> kappa(axes), neg(axes);
    for (std::size_t k = 0; k < hat.size(); ++k) {
        bool in_band = true, canonical = false, zero = true;
        for (int a = 0; a < axes && in_band; ++a) {
            kappa[a] = grid->wavenumber(grid->axis_index(k, a));
            if (std::abs(kappa[a]) > band) in_band = false;
            if (zero && kappa[a] != 0) {
                zero = false;
                canonical = kappa[a] > 0;  // representative of the +- pair
            }
        }
        if (!in_band || zero || !canonical) continue;
        const cplx c = rng.complex_uniform(1.0);
        for (int a = 0; a < axes; ++a) neg[a] = -kappa[a];
        hat[k] = c;
        hat[grid->flat_index(neg)] = std::conj(c);
    }
    const double renorm = static_cast<double>(grid->total());
    for (cplx &x : hat) x *= renorm;
    dft_inverse(*grid, hat);
    std::vector<double> vals(grid->total());
    double mx = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        vals[i] = hat[i].real();
        mx = std::max(mx, std::abs(vals[i]));
    }
    require(mx > 0.0, ErrorCode::runtime, "random field: degenerate draw");
    const double s = amplitude / mx;
    for (double &x : vals) x *= s;
    return ScalarField(grid, std::move(vals));
}

}  // namespace qma
