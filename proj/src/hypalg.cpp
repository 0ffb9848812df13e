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

#include "hypalg.hpp"

#include <cmath>

namespace qma {

namespace {

double max_abs(const Mat &M) {
    return M.cwiseAbs().maxCoeff();
}

void require_square(const Mat &M, const char *what) {
    require(M.rows() == M.cols() && M.rows() > 0, ErrorCode::config,
            std::string(what) + ": expected a non-empty square matrix");
}

/**
 * @brief Realification (a; b) of the anti-linear action V -> conj(J^T V).
 *
 * A real tangent vector is identified with its holomorphic components
 * V = a + i b; the structure J sends V to conj(J^T V).  Splitting
 * J = P + i Q over the reals gives the 2m x 2m block matrix below.
 */
Eigen::MatrixXd realify_J(const Mat &J) {
    const int m = static_cast<int>(J.rows());
    Eigen::MatrixXd P = J.real();
    Eigen::MatrixXd Q = J.imag();
    Eigen::MatrixXd R(2 * m, 2 * m);
    R.topLeftCorner(m, m) = P.transpose();
    R.topRightCorner(m, m) = -Q.transpose();
    R.bottomLeftCorner(m, m) = -Q.transpose();
    R.bottomRightCorner(m, m) = -P.transpose();
    return R;
}

/** Realification of multiplication by the imaginary unit, (a; b) -> (-b; a). */
Eigen::MatrixXd realify_I(int m) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    R.topRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
    R.bottomLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
    return R;
}

}  // namespace

JTensor flat_J(int m) {
    require(m > 0 && m % 2 == 0, ErrorCode::config,
            "flat_J: complex dimension must be a positive even number");
    Mat J = Mat::Zero(m, m);
    for (int k = 0; k < m; k += 2) {
        J(k, k + 1) = 1.0;
        J(k + 1, k) = -1.0;
    }
    return JTensor{J};
}

Mat inv_upper(const Mat &G) {
    require_square(G, "inv_upper");
    Eigen::FullPivLU<Mat> lu(G.transpose());
    require(lu.isInvertible(), ErrorCode::config, "inv_upper: singular metric");
    return lu.inverse();
}

QuaternionicDiagnostic check_quaternionic(const JTensor &J) {
    require_square(J.comp, "check_quaternionic");
    const int m = J.dim();
    require(m % 2 == 0, ErrorCode::config,
            "check_quaternionic: odd complex dimension admits no anticommuting "
            "complex structure");
    const Mat id = Mat::Identity(m, m);
    const double jj = max_abs(J.comp * J.comp.conjugate() + id);

    const Eigen::MatrixXd RI = realify_I(m);
    const Eigen::MatrixXd RJ = realify_J(J.comp);
    const Eigen::MatrixXd rid = Eigen::MatrixXd::Identity(2 * m, 2 * m);
    const double anti = (RI * RJ + RJ * RI).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd RK = RI * RJ;
    const double kk = (RK * RK + rid).cwiseAbs().maxCoeff();

    QuaternionicDiagnostic d{jj, anti, kk, 0.0};
    d.max_residual = std::max(jj, std::max(anti, kk));
    return d;
}

Mat sigma_twist(const Mat &H, const Mat &J) {
    require_square(H, "sigma_twist");
    require(H.rows() == J.rows() && J.rows() == J.cols(), ErrorCode::config,
            "sigma_twist: dimension mismatch between H and J");
    return J * H.conjugate() * J.adjoint();
}

double is_hyperhermitian(const HermitianMetric &g, const JTensor &J) {
    return max_abs(g.comp - sigma_twist(g.comp, J.comp));
}

HermitianMetric j_average(const Mat &H, const JTensor &J) {
    return HermitianMetric{0.5 * (H + sigma_twist(H, J.comp))};
}

QForm20 omega_from_gJ(const HermitianMetric &g, const JTensor &J) {
    require(g.dim() == J.dim(), ErrorCode::config,
            "omega_from_gJ: dimension mismatch between g and J");
    require_square(g.comp, "omega_from_gJ");
    return QForm20{J.comp * g.comp.conjugate()};
}

HermitianMetric g_from_omegaJ(const QForm20 &Omega, const JTensor &J) {
    require(Omega.dim() == J.dim(), ErrorCode::config,
            "g_from_omegaJ: dimension mismatch between Omega and J");
    require_square(Omega.comp, "g_from_omegaJ");
    Mat G = Omega.comp * J.comp.adjoint();
    const double herm = max_abs(G - G.adjoint());
    require(herm <= 1e-8 * (1.0 + max_abs(G)), ErrorCode::residual,
            "g_from_omegaJ: not a metric form (recovered matrix is not "
            "Hermitian; input is not q-real for this J)");
    return HermitianMetric{G};
}

double q_real_residual(const QForm20 &Omega, const JTensor &J) {
    require(Omega.dim() == J.dim(), ErrorCode::config,
            "q_real_residual: dimension mismatch between Omega and J");
    const Mat Jc = J.comp.conjugate();
    return max_abs(Jc * Omega.comp * Jc.transpose() - Omega.comp.conjugate());
}

double q_positive_check(const QForm20 &Omega, const JTensor &J) {
    require(Omega.dim() == J.dim(), ErrorCode::config,
            "q_positive_check: dimension mismatch between Omega and J");
    Mat G = Omega.comp * J.comp.adjoint();
    Mat H = 0.5 * (G + G.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

cplx pfaffian(const Mat &M_in) {
    require_square(M_in, "pfaffian");
    const int n = static_cast<int>(M_in.rows());
    require(max_abs(M_in + M_in.transpose()) <= 1e-10 * (1.0 + max_abs(M_in)),
            ErrorCode::config, "pfaffian: input is not antisymmetric");
    if (n % 2 == 1) return 0.0;

    Mat M = M_in;
    cplx result = 1.0;
    for (int k = 0; k + 1 < n; k += 2) {
        // Greedy pivot: move the largest entry of column k below the
        // diagonal into position (k+1, k) by a symmetric row/column swap.
        int kp = k + 1;
        double best = std::abs(M(k + 1, k));
        for (int i = k + 2; i < n; ++i) {
            if (std::abs(M(i, k)) > best) {
                best = std::abs(M(i, k));
                kp = i;
            }
        }
        if (kp != k + 1) {
            M.row(k + 1).swap(M.row(kp));
            M.col(k + 1).swap(M.col(kp));
            result = -result;
        }
        const cplx pivot = M(k + 1, k);
        if (pivot == cplx(0.0)) return 0.0;
        result *= M(k, k + 1);
        if (k + 2 < n) {
            // Rank-2 update of the trailing block: eliminate column k below
            // the pivot by congruence, which leaves the Pfaffian invariant.
            for (int i = k + 2; i < n; ++i) {
                const cplx tau_i = M(i, k) / pivot;
                for (int j = k + 2; j < n; ++j) {
                    const cplx tau_j = M(j, k) / pivot;
                    M(i, j) += tau_i * M(j, k + 1) - tau_j * M(i, k + 1);
                }
            }
        }
    }
    return result;
}

double trace_pair(const HermitianMetric &A, const Mat &B) {
    require(A.comp.rows() == B.rows() && A.comp.cols() == B.cols(),
            ErrorCode::config, "trace_pair: dimension mismatch");
    const Mat Up = inv_upper(A.comp);
    return (Up.array() * B.array()).sum().real();
}

double trace_inequality_residual(const HermitianMetric &ghat,
                                 const HermitianMetric &gphi) {
    require(ghat.dim() == gphi.dim(), ErrorCode::config,
            "trace_inequality_residual: dimension mismatch");
    const int m = ghat.dim();
    require(m % 2 == 0, ErrorCode::config,
            "trace_inequality_residual: dimension must be even");
    const double lhs = trace_pair(ghat, gphi.comp);
    const double rev = trace_pair(gphi, ghat.comp);
    double factorial = 1.0;
    for (int i = 2; i <= m - 1; ++i) factorial *= i;
    const double det_ratio =
        (gphi.comp.determinant() / ghat.comp.determinant()).real();
    const double rhs = std::pow(rev, m - 1) * det_ratio / factorial;
    return rhs - lhs;
}

}  // namespace qma
