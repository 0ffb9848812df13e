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
 * @file hypalg.hpp
 * @brief Pointwise linear algebra for hypercomplex Hermitian geometry.
 *
 * Conventions used throughout the library, in a local holomorphic frame
 * of complex dimension m = 2n:
 *
 *   - A complex structure J anticommuting with the ambient one is stored
 *     through its mixed components J(r,s) = J_r^{sbar}, i.e. J maps the
 *     holomorphic frame vector e_r to J(r,s) ebar_s.  Its action on
 *     antiholomorphic vectors is the conjugate block.
 *   - A Hermitian metric g is stored as G(r,s) = g_{r sbar}; Hermiticity
 *     means G = G^dagger and positivity refers to its eigenvalues.
 *   - The associated (2,0)-form is Omega(r,s) = omega_J(e_r, e_s), an
 *     antisymmetric matrix, with Omega = J G^T and G = Omega J^dagger.
 *   - Raised indices use inv_upper(G) = (G^T)^{-1}, whose (i,j) entry is
 *     g^{i jbar} in the contraction g^{i jbar} g_{k jbar} = delta_{ik}.
 */

#ifndef QMALAB_HYPALG_HPP
#define QMALAB_HYPALG_HPP

#include "common.hpp"

namespace qma {

/** Mixed components J(r,s) = J_r^{sbar} of an anticommuting complex structure. */
struct JTensor {
    Mat comp;

    int dim() const { return static_cast<int>(comp.rows()); }
};

/** Hermitian metric components G(r,s) = g_{r sbar}. */
struct HermitianMetric {
    Mat comp;

    int dim() const { return static_cast<int>(comp.rows()); }
};

/** Antisymmetric (2,0)-form components Omega(r,s). */
struct QForm20 {
    Mat comp;

    int dim() const { return static_cast<int>(comp.rows()); }
};

/** The standard block structure J(2k-1 -> 2kbar) on C^{2n}. */
JTensor flat_J(int m);

/** Matrix of raised components [g^{i jbar}] = (G^T)^{-1}. */
Mat inv_upper(const Mat &G);

/** Residuals of the quaternionic relations for the triple (I, J, K = IJ). */
struct QuaternionicDiagnostic {
    double jj;       ///< max-norm of J∘J + Id (complexified components)
    double anti;     ///< max-norm of IJ + JI as real-linear endomorphisms
    double kk;       ///< max-norm of K∘K + Id
    double max_residual;
};

/**
 * @brief Check that J generates a quaternionic triple with the ambient I.
 *
 * I acts as multiplication by the imaginary unit in the frame; J is the
 * candidate anticommuting structure; K = I∘J.  All three relations are
 * evaluated on the realified tangent space.  Odd complex dimension is a
 * structural error: no such J exists.
 */
QuaternionicDiagnostic check_quaternionic(const JTensor &J);

/** The twist sigma_J(H) = J conj(H) J^dagger, Hermitian whenever H is. */
Mat sigma_twist(const Mat &H, const Mat &J);

/**
 * @brief Max-norm deviation of g from invariance under the J-twist.
 *
 * Returns max |g - sigma_J(g)|; zero (to rounding) iff g is compatible
 * with the whole 2-sphere of complex structures generated by I and J.
 */
double is_hyperhermitian(const HermitianMetric &g, const JTensor &J);

/** Projection H -> (H + sigma_J(H)) / 2 onto the J-invariant Hermitian cone. */
HermitianMetric j_average(const Mat &H, const JTensor &J);

/** The (2,0)-form of a compatible pair: Omega = J G^T. */
QForm20 omega_from_gJ(const HermitianMetric &g, const JTensor &J);

/**
 * @brief Recover the Hermitian metric G = Omega J^dagger from the form.
 *
 * Throws ErrorCode::residual ("not a metric form") when the recovered
 * matrix is not Hermitian to a loose tolerance, i.e. the input was not a
 * q-real form compatible with J.
 */
HermitianMetric g_from_omegaJ(const QForm20 &Omega, const JTensor &J);

/** Deviation of Omega from q-reality: max |conj(J) Omega conj(J)^T - conj(Omega)|. */
double q_real_residual(const QForm20 &Omega, const JTensor &J);

/**
 * @brief Smallest eigenvalue of the metric recovered from the form.
 *
 * The form is q-positive exactly when this is positive.
 */
double q_positive_check(const QForm20 &Omega, const JTensor &J);

/**
 * @brief Pfaffian of an even-dimensional antisymmetric matrix.
 *
 * Parlett–Reid tridiagonalization with greedy pivoting; O(m^3) flops and
 * numerically stable.  Odd dimension returns zero; a non-antisymmetric
 * input is a config error.
 */
cplx pfaffian(const Mat &M);

/** Scalar trace pairing tr_A B = A^{i jbar} B_{i jbar} (real part). */
double trace_pair(const HermitianMetric &A, const Mat &B);

/**
 * @brief Residual of the mixed-trace determinant inequality.
 *
 * For Hermitian positive g_hat, g_phi of dimension 2n, returns
 *
 *   (tr_{g_phi} g_hat)^{2n-1} det(g_phi) / ((2n-1)! det(g_hat))
 *      - tr_{g_hat} g_phi,
 *
 * which is non-negative in exact arithmetic and identically zero for 2x2
 * inputs.
 */
double trace_inequality_residual(const HermitianMetric &ghat,
                                 const HermitianMetric &gphi);

}  // namespace qma

#endif  // QMALAB_HYPALG_HPP
