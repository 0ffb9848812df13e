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
 * @file curvature.hpp
 * @brief Christoffel symbols, Kähler curvature, and the pointwise identity
 *        checks that feed the verification suites.
 *
 * Index conventions (holomorphic chart, Kähler metric g):
 *
 *   Gamma^i_{kl} = g^{i jbar} g_{l jbar, k}                (symmetric in k,l)
 *   R_{a bbar i}{}^{k} = - d_{zbar^b} Gamma^k_{ai}
 *   Rhat_{a bbar i jbar} = g_{k jbar} R_{a bbar i}{}^{k}
 *
 * The conjugate-type components follow by reality:
 *   R_{jbar k lbar}{}^{ibar} = conj(R_{j kbar l}{}^{i}).
 */

#ifndef QMALAB_CURVATURE_HPP
#define QMALAB_CURVATURE_HPP

#include "charts.hpp"
#include "hypalg.hpp"
#include "jets.hpp"

namespace qma {

/** Christoffel symbols: point values and valid-1 jets. */
struct ChristoffelSymbols {
    int m = 0;
    CTensor3 comp;            ///< Gamma^i_{kl} at the center
    std::vector<Jet4> jets;   ///< jets of Gamma^i_{kl}, valid order 1

    const Jet4 &jet(int i, int k, int l) const {
        return jets[(static_cast<std::size_t>(i) * m + k) * m + l];
    }
    Jet4 &jet(int i, int k, int l) {
        return jets[(static_cast<std::size_t>(i) * m + k) * m + l];
    }
};

/** Compute Christoffel symbols from metric jets (valid order >= 2). */
ChristoffelSymbols christoffel(const JetMat &g, const JetMat &g_up);

/** Kähler curvature at the center of a metric-jet expansion. */
struct CurvatureTensor {
    int m = 0;
    CTensor4 mixed;      ///< R_{a bbar i}{}^{k}, indices (a, b, i, k)
    CTensor4 lowered;    ///< Rhat_{a bbar i jbar}, indices (a, b, i, j)
    double sym_block;    ///< max |Rhat_{abij} - Rhat_{ibaj}| (a <-> i swap)
    double sym_conj;     ///< max |conj(Rhat_{abij}) - Rhat_{baji}|
    double ricci_max;    ///< max |sum_k R_{a bbar k}{}^{k}|
};

CurvatureTensor curvature_at(const JetMat &g, const JetMat &g_up);

/** Residuals of the four pointwise structure-transport identities. */
struct PreResiduals {
    double pre1;  ///< dJ = Gamma * J in the raw chart
    double pre2;  ///< first derivatives of transported J vanish at center
    double pre3;  ///< antilinear involution constraint on second derivatives
    double pre4;  ///< curvature expressed through second derivatives of J
};

PreResiduals verify_prop_pre(const KahlerPotentialChart &chart, const Vec &z0);

/** Residuals of the two trace identities against a twist-invariant pairing. */
struct FundResiduals {
    double fund1;     ///< curvature contracted with an invariant inverse pairing
    double hk_trace;  ///< mixed trace of the connection derivative
};

/**
 * @brief Check the curvature-trace identities at a point.
 *
 * g_point must be Hermitian and invertible; with enforce_invariance it
 * must also be invariant under the twist by the chart's structure at z0
 * (positivity is NOT required, the identities hold for indefinite
 * invariant pairings as well).  Passing enforce_invariance = false lets
 * negative controls feed non-invariant tensors on purpose.
 */
FundResiduals verify_lemma_fund(const KahlerPotentialChart &chart, const Vec &z0,
                                const Mat &g_point,
                                bool enforce_invariance = true);

/** Residuals of the paired second-order identities in normal coordinates. */
struct Fund2Residuals {
    double eq1;
    double eq2;
    double eq3;
    double eq4;
    double conj_pair;  ///< | eq2-tensor - conj-transpose(eq1-tensor) | etc.
};

Fund2Residuals verify_lemma_fund2(const KahlerPotentialChart &chart,
                                  const Vec &z0, const Mat &g_point,
                                  bool enforce_invariance = true);

/** An orthonormal frame of (1,0)-vectors closed under Z -> J Zbar. */
struct JAdaptedFrame {
    std::vector<Vec> Z;  ///< 2n vectors; Z[2k+1] is the structure partner of Z[2k]
};

/**
 * @brief Gram-Schmidt frame adapted to (g, J).
 *
 * Z_{2k} is obtained by projecting a pivoted basis vector against the
 * frame built so far; Z_{2k+1} = J conj(Z_{2k}) is automatically unit and
 * orthogonal.  Requires g positive and J-invariant.
 */
JAdaptedFrame j_adapted_frame(const HermitianMetric &g, const JTensor &J);

/** Max deviation of sum_j Z_j^k conj(Z_j^m) from the raised metric g^{k mbar}. */
double frame_completeness_residual(const JAdaptedFrame &frame,
                                   const HermitianMetric &g);

struct FrameTraceReport {
    double trace_residual;  ///< frame trace of conjugate-type curvature
    double pair_residual;   ///< max over sampled pairs of |R(JX,JY) - R(X,Y)|
};

/**
 * @brief Frame-trace and J-pair-invariance checks of the curvature.
 *
 * The frame trace contracts the conjugate-type curvature with the frame
 * completeness sum; pair invariance compares the curvature operator on
 * `pairs` random realified vector pairs (X, Y) against (JX, JY).
 */
FrameTraceReport frame_trace_check(const CurvatureTensor &R,
                                   const JAdaptedFrame &frame,
                                   const HermitianMetric &g, const JTensor &J,
                                   Rng &rng, int pairs);

}  // namespace qma

#endif  // QMALAB_CURVATURE_HPP
