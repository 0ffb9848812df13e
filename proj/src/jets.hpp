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
 * @file jets.hpp
 * @brief Truncated Taylor expansions (4-jets) in m holomorphic variables
 *        and their conjugates, with exact coefficient arithmetic.
 *
 * A jet stores the Taylor coefficients of a real-analytic function of
 * (z^1..z^m, zbar^1..zbar^m) around a base point, up to total degree 4.
 * Variables are indexed 0..m-1 for the holomorphic displacements and
 * m..2m-1 for their conjugates.  Each jet carries a "valid order": the
 * largest total degree whose coefficients are exact.  Arithmetic tracks
 * the valid order pessimistically so truncation error can never be
 * mistaken for data.
 */

#ifndef QMALAB_JETS_HPP
#define QMALAB_JETS_HPP

#include <array>
#include <initializer_list>
#include <memory>
#include <vector>

#include "common.hpp"

namespace qma {

/** Shared index tables for jets with a fixed number of variables. */
class JetSpace {
  public:
    static constexpr int kOrder = 4;
    static constexpr int kMaxVars = 8;
    using Exponents = std::array<std::uint8_t, kMaxVars>;

    /** Cached space for complex dimension m (1 <= m <= 4). */
    static std::shared_ptr<const JetSpace> get(int m);

    int m() const { return m_; }
    int nvars() const { return 2 * m_; }
    int count() const { return static_cast<int>(exps_.size()); }

    int var_z(int r) const { return r; }
    int var_zb(int r) const { return m_ + r; }

    const Exponents &exponents(int idx) const { return exps_[idx]; }
    int degree(int idx) const { return degs_[idx]; }

    /** Index of an exponent tuple, or -1 when the total degree exceeds 4. */
    int index_of(const Exponents &e) const;

    /** Index of the product monomial; degrees must sum to at most 4. */
    int product_index(int i, int j) const {
        return key_to_index_[keys_[i] + keys_[j]];
    }

    /** Index of the conjugate monomial (z <-> zbar exponent swap). */
    int conj_index(int idx) const { return conj_[idx]; }

    /** Half-open index range [first, last) of monomials of total degree d. */
    std::pair<int, int> degree_range(int d) const {
        return {deg_start_[d], deg_start_[d + 1]};
    }

    explicit JetSpace(int m);  // public for make_shared; use get()

  private:
    int m_;
    std::vector<Exponents> exps_;
    std::vector<int> degs_;
    std::vector<std::uint32_t> keys_;
    std::vector<int> key_to_index_;
    std::vector<int> conj_;
    std::array<int, kOrder + 2> deg_start_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

/**
 * @brief 4-jet of a scalar function with valid-order tracking.
 *
 * Coefficients are plain Taylor coefficients: the stored value for the
 * multi-index alpha is (partial^alpha f)(0) / alpha!.
 */
class Jet4 {
  public:
    Jet4() = default;

    static Jet4 constant(const JetSpacePtr &space, cplx v);

    /** Jet of the displacement coordinate `var` itself (zero at center). */
    static Jet4 variable(const JetSpacePtr &space, int var);

    bool empty() const { return !space_; }
    const JetSpacePtr &space() const { return space_; }
    int valid_order() const { return valid_; }

    cplx value() const { return c_[0]; }
    cplx coefficient(int idx) const { return c_[idx]; }
    cplx &raw(int idx) { return c_[idx]; }

    /** Mixed partial derivative value at the center, e.g. {var_z(0), var_zb(1)}. */
    cplx partial(std::initializer_list<int> vars) const;
    cplx partial(const std::vector<int> &vars) const;

    /**
     * @brief Evaluate the truncated polynomial at an m-dim displacement.
     *
     * Conjugate variables receive the conjugated displacement, so this is
     * the Taylor polynomial of a real-analytic function evaluated off
     * center (truncation error O(|dz|^{valid+1})).
     */
    cplx eval(const Vec &dz) const;

    /** Jet of the first derivative in one variable (valid order drops by 1). */
    Jet4 derivative(int var) const;

    /** Complex conjugate jet: conjugated coefficients, z <-> zbar swap. */
    Jet4 conjugate() const;

    /** Copy with the valid order lowered to new_valid. */
    Jet4 truncated(int new_valid) const;

    double max_abs_coeff() const;

    Jet4 operator-() const;
    Jet4 &operator+=(const Jet4 &o);
    Jet4 &operator-=(const Jet4 &o);
    Jet4 &operator+=(cplx v);
    Jet4 &operator-=(cplx v);
    Jet4 &operator*=(cplx v);

    friend Jet4 operator+(Jet4 a, const Jet4 &b) { return a += b; }
    friend Jet4 operator-(Jet4 a, const Jet4 &b) { return a -= b; }
    friend Jet4 operator+(Jet4 a, cplx v) { return a += v; }
    friend Jet4 operator-(Jet4 a, cplx v) { return a -= v; }
    friend Jet4 operator*(Jet4 a, cplx v) { return a *= v; }
    friend Jet4 operator*(cplx v, Jet4 a) { return a *= v; }
    friend Jet4 operator*(const Jet4 &a, const Jet4 &b);

  private:
    Jet4(JetSpacePtr space, int valid);

    JetSpacePtr space_;
    std::vector<cplx> c_;
    int valid_ = -1;
};

/** Evaluate the polynomial sum f_k u^k for a nilpotent jet u (u(0) = 0). */
Jet4 jet_series(const std::array<cplx, JetSpace::kOrder + 1> &f, const Jet4 &u);

Jet4 jet_recip(const Jet4 &a);           ///< 1/a, requires a(0) != 0
Jet4 jet_div(const Jet4 &a, const Jet4 &b);
Jet4 jet_sqrt(const Jet4 &a);            ///< principal branch, a(0) != 0
Jet4 jet_log(const Jet4 &a);             ///< principal branch, a(0) != 0
Jet4 jet_exp(const Jet4 &a);

/**
 * @brief Multivariate substitution f(args), the chart-composition primitive.
 *
 * `args` supplies one jet per variable of f's space (2 m_f entries), each
 * living in a common target space and vanishing at the target center.
 * The result's valid order is the minimum of f's and the arguments'.
 */
Jet4 substitute(const Jet4 &f, const std::vector<Jet4> &args);

/** Dense matrix with jet entries; the workhorse for metric/frame algebra. */
struct JetMat {
    int rows = 0;
    int cols = 0;
    std::vector<Jet4> a;

    JetMat() = default;
    JetMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

    static JetMat identity(const JetSpacePtr &space, int n);

    Jet4 &at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    const Jet4 &at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * cols + c];
    }

    JetMat operator*(const JetMat &o) const;
    JetMat operator+(const JetMat &o) const;
    JetMat operator-(const JetMat &o) const;

    JetMat conjugate() const;   ///< entrywise conjugate jets (no transpose)
    JetMat transpose() const;

    /** Gauss-Jordan inverse with pivoting on center values. */
    JetMat inverse() const;

    /** Determinant by cofactor expansion (intended for rows <= 4). */
    Jet4 det() const;

    /** Matrix of center values. */
    Mat values() const;
};

}  // namespace qma

#endif  // QMALAB_JETS_HPP
