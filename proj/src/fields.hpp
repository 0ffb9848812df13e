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
 * @file fields.hpp
 * @brief Grid calculus on the flat torus with quaternionic structure:
 *        spectral derivatives, the (2,0) correction form, the
 *        potential-to-metric map, and both residual forms of the
 *        Monge-Ampère-type equation.
 *
 * The torus has 4n real axes of period 1; complex coordinates pair the
 * axes as z^k = x^{2k-1} + i x^{2k} (1-based), so with 0-based axes
 * z^c = x^{2c} + i x^{2c+1}.  All derivatives go through Fourier
 * multipliers: d_{z^c} = (d_x - i d_y)/2 acts on the mode with integer
 * wavevector kappa as (pi i kappa_{2c} + pi kappa_{2c+1}); the Nyquist
 * wavenumber is zeroed.
 */

#ifndef QMALAB_FIELDS_HPP
#define QMALAB_FIELDS_HPP

#include <memory>
#include <vector>

#include "hypalg.hpp"

namespace qma {

class TorusGrid;
using GridPtr = std::shared_ptr<const TorusGrid>;

/** Uniform grid on the 4n-torus, N points per axis, period 1. */
class TorusGrid {
  public:
    /** Validated construction: n in {1, 2}, N even, N >= 4. */
    static GridPtr make(int n, int N);

    int n() const { return n_; }
    int N() const { return N_; }
    int m() const { return 2 * n_; }       ///< complex dimension
    int axes() const { return 4 * n_; }    ///< real dimension
    std::size_t total() const { return total_; }

    /** Coordinate x^axis in [0, 1) of a flat point index (axis 0 slowest). */
    double coord(std::size_t flat, int axis) const {
        return static_cast<double>(axis_index(flat, axis)) / N_;
    }

    int axis_index(std::size_t flat, int axis) const {
        return static_cast<int>((flat / stride_[axis]) % N_);
    }

    /** Flat index from per-axis indices (wrapped mod N). */
    std::size_t flat_index(const std::vector<int> &idx) const;

    /** Centered integer wavenumber of a spectral axis index; Nyquist -> 0. */
    int wavenumber(int idx) const {
        if (idx * 2 < N_) return idx;
        if (idx * 2 == N_) return 0;
        return idx - N_;
    }

    bool same(const TorusGrid &o) const { return n_ == o.n_ && N_ == o.N_; }

    TorusGrid(int n, int N);  // public for make_shared; use make()

  private:
    int n_, N_;
    std::size_t total_;
    std::vector<std::size_t> stride_;
};

/** In-place unnormalized forward DFT over all torus axes. */
void dft_forward(const TorusGrid &grid, std::vector<cplx> &data);

/** In-place inverse DFT, normalized by the point count. */
void dft_inverse(const TorusGrid &grid, std::vector<cplx> &data);

/** Real scalar function on the grid with a cached spectrum. */
class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid);
    ScalarField(GridPtr grid, std::vector<double> values);

    const GridPtr &grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }

    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double> &values() const { return v_; }
    /** Mutable access; invalidates the cached spectrum. */
    std::vector<double> &mutable_values() {
        hat_valid_ = false;
        return v_;
    }

    /** Cached forward transform of the values (unnormalized). */
    const std::vector<cplx> &spectrum() const;

    double mean() const;
    double max_abs() const;
    void add_constant(double c);
    void scale(double s);

    /** Transform -> inverse-transform round-trip error (invariant check). */
    double roundtrip_residual() const;

  private:
    GridPtr grid_;
    std::vector<double> v_;
    mutable std::vector<cplx> hat_;
    mutable bool hat_valid_ = false;
};

/** Complex scalar samples on the grid (derivative outputs). */
struct CplxField {
    GridPtr grid;
    std::vector<cplx> v;

    double max_abs() const;
    double max_imag() const;
    ScalarField real_part() const;
};

/** m x m complex matrix per grid point (metrics and (2,0)-forms). */
class MatrixField {
  public:
    MatrixField() = default;
    MatrixField(GridPtr grid, int m);
    static MatrixField constant(const GridPtr &grid, const Mat &value);

    const GridPtr &grid() const { return grid_; }
    int m() const { return m_; }

    Mat at(std::size_t pt) const;
    void set(std::size_t pt, const Mat &value);
    cplx entry(std::size_t pt, int r, int c) const {
        return v_[(pt * m_ + r) * m_ + c];
    }
    cplx &entry_ref(std::size_t pt, int r, int c) {
        return v_[(pt * m_ + r) * m_ + c];
    }

    double hermiticity_residual() const;
    double antisymmetry_residual() const;
    /** Min over points of the smallest eigenvalue of the Hermitian part. */
    double min_eig() const;
    double max_abs() const;

  private:
    GridPtr grid_;
    int m_ = 0;
    std::vector<cplx> v_;
};

using MetricField = MatrixField;  ///< Hermitian per-point semantics
using FormField = MatrixField;    ///< antisymmetric per-point semantics

/**
 * @brief Mixed spectral derivative of a real field.
 *
 * Pattern entries index complex derivatives: c in [0, m) applies
 * d_{z^c}, c in [m, 2m) applies d_{zbar^{c-m}}.  Total order <= 4.
 */
CplxField spectral_derivative(const ScalarField &f,
                              const std::vector<int> &pattern);

/** Hessian field H(r, s) = f_{r sbar}; exactly Hermitian by mirroring. */
MatrixField complex_hessian(const ScalarField &f);

/**
 * @brief The (2,0) correction form of a real potential for constant J:
 *        (dd_J f) = (J conj(H) - H J^T) / 2 with H the complex Hessian.
 *
 * Antisymmetric pointwise; q-real for real f.
 */
FormField dd_J(const ScalarField &f, const JTensor &J);

/**
 * @brief Potential-to-metric map: g_phi = g + (H + sigma_J(H)) / 2.
 *
 * Agrees identically with the (2,0) route g_from_omegaJ(Omega + dd_J f)
 * — the module's convention anchor.
 */
MetricField omega_phi(const MetricField &g, const JTensor &J,
                      const ScalarField &phi);

/**
 * @brief Log-density residual in the (1,1) formulation:
 *        (1/2) log(det g_phi / det g) - F - b.
 *
 * Errors with "left the q-positive cone" when g_phi loses positivity.
 */
ScalarField residual_11(const MetricField &g, const JTensor &J,
                        const ScalarField &phi, const ScalarField &F, double b);

/**
 * @brief Log-density residual in the (2,0) formulation:
 *        log(Pf(Omega + dd_J phi) / Pf(Omega)) - F - b.
 */
ScalarField residual_20(const FormField &Omega, const JTensor &J,
                        const ScalarField &phi, const ScalarField &F, double b);

/** Exact spectral mean of f over the unit-volume torus. */
double integrate(const ScalarField &f);

/**
 * @brief Conserved-volume defect: mean Pf(Omega + dd_J phi) - mean Pf(Omega).
 *
 * The (2,0) correction is a curl of the twisted gradient, so the top
 * power of the corrected form integrates to the background value; this
 * is the flat-torus conservation law (0 up to rounding).  The naive
 * determinant-route integral is NOT conserved (the (1,1) form fails to
 * be closed), which is why the check runs through the Pfaffian.
 */
double volume_check(const MetricField &g, const JTensor &J,
                    const ScalarField &phi);

/**
 * @brief Random real band-limited field, |kappa|_inf <= band, zero mean,
 *        scaled to the requested sup-norm.  Deterministic in the seed.
 */
ScalarField random_band_limited(const GridPtr &grid, int band, double amplitude,
                                Rng &rng);

}  // namespace qma

#endif  // QMALAB_FIELDS_HPP
