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

#include "curvature.hpp"

#include <cmath>

namespace qma {

namespace {

double rel(double raw, double scale) { return raw / (1.0 + scale); }

/** D2J(r,s,k,l) = d_{w^k} d_{wbar^l} J'(r,s) at the normal-chart center. */
CTensor4 second_structure_derivs(const NormalChart &nc) {
    const JetSpacePtr sp = nc.J.at(0, 0).space();
    CTensor4 D2J(nc.m);
    for (int r = 0; r < nc.m; ++r)
        for (int s = 0; s < nc.m; ++s)
            for (int k = 0; k < nc.m; ++k)
                for (int l = 0; l < nc.m; ++l)
                    D2J(r, s, k, l) =
                        nc.J.at(r, s).partial({sp->var_z(k), sp->var_zb(l)});
    return D2J;
}

void check_pairing_tensor(const Mat &g_point, const KahlerPotentialChart &chart,
                          const Vec &z0, bool enforce_invariance,
                          const char *what) {
    require(g_point.rows() == chart.dim() && g_point.cols() == chart.dim(),
            ErrorCode::config, std::string(what) + ": dimension mismatch");
    const double scale = g_point.cwiseAbs().maxCoeff();
    require((g_point - g_point.adjoint()).cwiseAbs().maxCoeff() <=
                1e-8 * (1.0 + scale),
            ErrorCode::config, std::string(what) + ": pairing not Hermitian");
    if (enforce_invariance) {
        const JTensor J = chart.structure_at(z0);
        require(is_hyperhermitian(HermitianMetric{g_point}, J) <=
                    1e-6 * (1.0 + scale),
                ErrorCode::config,
                std::string(what) +
                    ": pairing not invariant under the structure twist");
    }
}

}  // namespace

ChristoffelSymbols christoffel(const JetMat &g, const JetMat &g_up) {
    require(g.rows == g.cols && g.rows > 0 && g_up.rows == g.rows &&
                g_up.cols == g.cols,
            ErrorCode::config, "christoffel: malformed metric jets");
    const int m = g.rows;
    const JetSpacePtr sp = g.at(0, 0).space();
    ChristoffelSymbols cs;
    cs.m = m;
    cs.comp = CTensor3(m);
    cs.jets.resize(static_cast<std::size_t>(m) * m * m);
    for (int k = 0; k < m; ++k) {
        // dg(l,j) = d_{z^k} g_{l jbar} as a jet, reused across i.
        JetMat dg(m, m);
        for (int l = 0; l < m; ++l)
            for (int j = 0; j < m; ++j)
                dg.at(l, j) = g.at(l, j).derivative(sp->var_z(k));
        for (int i = 0; i < m; ++i) {
            for (int l = 0; l < m; ++l) {
                Jet4 sum = g_up.at(i, 0) * dg.at(l, 0);
                for (int j = 1; j < m; ++j) sum += g_up.at(i, j) * dg.at(l, j);
                cs.jet(i, k, l) = sum;
                cs.comp(i, k, l) = sum.value();
            }
        }
    }
    return cs;
}

CurvatureTensor curvature_at(const JetMat &g, const JetMat &g_up) {
    const ChristoffelSymbols cs = christoffel(g, g_up);
    const int m = cs.m;
    const JetSpacePtr sp = g.at(0, 0).space();
    CurvatureTensor R;
    R.m = m;
    R.mixed = CTensor4(m);
    R.lowered = CTensor4(m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < m; ++k)
                    R.mixed(a, b, i, k) =
                        -cs.jet(k, a, i).derivative(sp->var_zb(b)).value();
    const Mat g0 = g.values();
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    cplx sum = 0.0;
                    for (int k = 0; k < m; ++k)
                        sum += g0(k, j) * R.mixed(a, b, i, k);
                    R.lowered(a, b, i, j) = sum;
                }
    R.sym_block = 0.0;
    R.sym_conj = 0.0;
    R.ricci_max = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            cplx ric = 0.0;
            for (int k = 0; k < m; ++k) ric += R.mixed(a, b, k, k);
            R.ricci_max = std::max(R.ricci_max, std::abs(ric));
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    R.sym_block = std::max(
                        R.sym_block,
                        std::abs(R.lowered(a, b, i, j) - R.lowered(i, b, a, j)));
                    R.sym_conj = std::max(
                        R.sym_conj,
                        std::abs(std::conj(R.lowered(a, b, i, j)) -
                                 R.lowered(b, a, j, i)));
                }
        }
    return R;
}

PreResiduals verify_prop_pre(const KahlerPotentialChart &chart, const Vec &z0) {
    const int m = chart.dim();
    const JetSpacePtr sp = JetSpace::get(m);

    // Raw chart: dJ = Gamma * J, plus the (r,k) symmetry of dJ.
    const MetricJets mj = metric_jets(chart, z0);
    const ChristoffelSymbols gam = christoffel(mj.g, mj.g_up);
    const JetMat Jraw = chart.structure_jet(z0);
    const Mat J0 = Jraw.values();
    CTensor3 dJ(m);
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s)
            for (int k = 0; k < m; ++k)
                dJ(r, s, k) = Jraw.at(r, s).derivative(sp->var_z(k)).value();
    double pre1 = 0.0, scale1 = 0.0;
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s)
            for (int k = 0; k < m; ++k) {
                scale1 = std::max(scale1, std::abs(dJ(r, s, k)));
                pre1 = std::max(pre1, std::abs(dJ(r, s, k) - dJ(k, s, r)));
                cplx rhs = 0.0;
                for (int a = 0; a < m; ++a) rhs += J0(a, s) * gam.comp(a, k, r);
                pre1 = std::max(pre1, std::abs(dJ(r, s, k) - rhs));
            }

    // Normal chart: transported structure is second order at the center.
    const NormalChart nc = normal_chart_at(chart, z0);
    double pre2 = 0.0;
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s)
            for (int v = 0; v < 2 * m; ++v)
                pre2 = std::max(
                    pre2, std::abs(nc.J.at(r, s).derivative(v).value()));

    const CTensor4 D2J = second_structure_derivs(nc);
    const double d2j_scale = D2J.max_abs();

    // pre3: the transported structure stays an antilinear involution to
    // second order: sum_s conj(D2J(j,s,l,k)) J0(s,i) + conj(J0(j,s)) D2J(s,i,k,l) = 0.
    double pre3 = 0.0;
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l)
                for (int i = 0; i < m; ++i) {
                    cplx sum = 0.0;
                    for (int s = 0; s < m; ++s)
                        sum += std::conj(D2J(j, s, l, k)) * J0(s, i) +
                               std::conj(J0(j, s)) * D2J(s, i, k, l);
                    pre3 = std::max(pre3, std::abs(sum));
                }

    // pre4: conjugate-type curvature from second derivatives of J':
    // conj(R'_{j kbar l}{}^{i}) = sum_a J0(a,i) conj(D2J(l,a,j,k)).
    const CurvatureTensor Rp = curvature_at(nc.g, nc.g_up);
    double pre4 = 0.0, rscale = 0.0;
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l)
                for (int i = 0; i < m; ++i) {
                    rscale = std::max(rscale, std::abs(Rp.mixed(j, k, l, i)));
                    cplx rhs = 0.0;
                    for (int a = 0; a < m; ++a)
                        rhs += J0(a, i) * std::conj(D2J(l, a, j, k));
                    pre4 = std::max(
                        pre4, std::abs(std::conj(Rp.mixed(j, k, l, i)) - rhs));
                }

    PreResiduals out;
    out.pre1 = rel(pre1, scale1);
    out.pre2 = rel(pre2, d2j_scale);
    out.pre3 = rel(pre3, d2j_scale);
    out.pre4 = rel(pre4, rscale + d2j_scale);
    return out;
}

FundResiduals verify_lemma_fund(const KahlerPotentialChart &chart, const Vec &z0,
                                const Mat &g_point, bool enforce_invariance) {
    check_pairing_tensor(g_point, chart, z0, enforce_invariance,
                         "verify_lemma_fund");
    const int m = chart.dim();
    const MetricJets mj = metric_jets(chart, z0);
    const CurvatureTensor R = curvature_at(mj.g, mj.g_up);
    const Mat T = inv_upper(g_point);
    const Mat g0 = mj.g.values();
    const double scale = (1.0 + T.cwiseAbs().maxCoeff()) *
                         (1.0 + R.mixed.max_abs());

    // fund1(q,a) = sum_{ij} T(i,j) conj(Rmix(j,i,q,a))
    double fund1 = 0.0;
    for (int q = 0; q < m; ++q)
        for (int a = 0; a < m; ++a) {
            cplx sum = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    sum += T(i, j) * std::conj(R.mixed(j, i, q, a));
            fund1 = std::max(fund1, std::abs(sum));
        }

    // hk_trace(s,r) = sum_{ijk} T(i,j) g0(i,k) conj(Rmix(s,r,j,k))
    double hk = 0.0;
    for (int s = 0; s < m; ++s)
        for (int r = 0; r < m; ++r) {
            cplx sum = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int k = 0; k < m; ++k)
                        sum += T(i, j) * g0(i, k) * std::conj(R.mixed(s, r, j, k));
            hk = std::max(hk, std::abs(sum));
        }

    return FundResiduals{fund1 / scale, hk / scale};
}

Fund2Residuals verify_lemma_fund2(const KahlerPotentialChart &chart,
                                  const Vec &z0, const Mat &g_point,
                                  bool enforce_invariance) {
    check_pairing_tensor(g_point, chart, z0, enforce_invariance,
                         "verify_lemma_fund2");
    const int m = chart.dim();
    const NormalChart nc = normal_chart_at(chart, z0);
    const CTensor4 D2J = second_structure_derivs(nc);
    const Mat J0 = nc.J.values();
    const Mat U0p = inv_upper(nc.g.values());
    const Mat Ug = inv_upper(g_point);
    const double scale = (1.0 + Ug.cwiseAbs().maxCoeff()) *
                         (1.0 + U0p.cwiseAbs().maxCoeff()) *
                         (1.0 + D2J.max_abs());

    Mat E1 = Mat::Zero(m, m), E2 = Mat::Zero(m, m);
    Mat E3 = Mat::Zero(m, m), E4 = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int r = 0; r < m; ++r)
                        for (int s = 0; s < m; ++s) {
                            const cplx w = Ug(i, j) * U0p(r, s);
                            E1(a, b) += w * D2J(r, a, i, j) * std::conj(J0(s, b));
                            E2(a, b) += w * J0(r, a) * std::conj(D2J(s, b, j, i));
                            // E3/E4 use the same raw loops with (i,j) in the
                            // structure slots; note the (b,a) target order.
                            E3(b, a) += w * J0(i, b) * std::conj(D2J(j, a, s, r));
                            E4(b, a) += w * D2J(i, b, r, s) * std::conj(J0(j, a));
                        }

    Fund2Residuals out;
    out.eq1 = E1.cwiseAbs().maxCoeff() / scale;
    out.eq2 = E2.cwiseAbs().maxCoeff() / scale;
    out.eq3 = E3.cwiseAbs().maxCoeff() / scale;
    out.eq4 = E4.cwiseAbs().maxCoeff() / scale;

    // Conjugation pairing with a deterministic non-invariant Hermitian
    // tracer (the invariant case is 0 = conj(0)): E2n(a,b) = conj(E1n(b,a)).
    Mat Tn = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) Tn(i, i) = 1.0 + i;
    Tn(0, 1) = 0.2;
    Tn(1, 0) = 0.2;
    const Mat Tnu = inv_upper(Tn);
    Mat E1n = Mat::Zero(m, m), E2n = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int r = 0; r < m; ++r)
                        for (int s = 0; s < m; ++s) {
                            const cplx w = Tnu(i, j) * U0p(r, s);
                            E1n(a, b) += w * D2J(r, a, i, j) * std::conj(J0(s, b));
                            E2n(a, b) += w * J0(r, a) * std::conj(D2J(s, b, j, i));
                        }
    double pair = 0.0, pair_scale = E1n.cwiseAbs().maxCoeff();
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            pair = std::max(pair,
                            std::abs(E2n(a, b) - std::conj(E1n(b, a))));
    out.conj_pair = pair / (1.0 + pair_scale);
    return out;
}

// ---------------------------------------------------------------------------
// J-adapted frames
// ---------------------------------------------------------------------------

namespace {

cplx metric_ip(const Vec &X, const Vec &Y, const Mat &G) {
    cplx sum = 0.0;
    for (int r = 0; r < G.rows(); ++r)
        for (int s = 0; s < G.cols(); ++s)
            sum += X(r) * std::conj(Y(s)) * G(r, s);
    return sum;
}

/** (1,0)-part of J applied to the conjugate of Z: conj(J^T Z). */
Vec structure_partner(const Vec &Z, const Mat &J) {
    return (J.transpose() * Z).conjugate();
}

}  // namespace

JAdaptedFrame j_adapted_frame(const HermitianMetric &g, const JTensor &J) {
    const int m = g.dim();
    require(m == J.dim() && m % 2 == 0, ErrorCode::config,
            "j_adapted_frame: even matching dimensions required");
    require(is_hyperhermitian(g, J) <= 1e-8 * (1.0 + g.comp.cwiseAbs().maxCoeff()),
            ErrorCode::config,
            "j_adapted_frame: metric is not invariant under the structure");
    Eigen::SelfAdjointEigenSolver<Mat> es(
        Mat(0.5 * (g.comp + g.comp.adjoint())), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() > 0.0, ErrorCode::config,
            "j_adapted_frame: metric must be positive");

    JAdaptedFrame frame;
    for (int pairi = 0; pairi < m / 2; ++pairi) {
        // Pivot: the standard basis vector with the largest norm after
        // projecting out the frame built so far.
        Vec best;
        double best_norm = -1.0;
        for (int p = 0; p < m; ++p) {
            Vec v = Vec::Zero(m);
            v(p) = 1.0;
            for (const Vec &Z : frame.Z) v -= metric_ip(v, Z, g.comp) * Z;
            const double nrm = std::real(metric_ip(v, v, g.comp));
            if (nrm > best_norm) {
                best_norm = nrm;
                best = v;
            }
        }
        require(best_norm > 1e-12, ErrorCode::config,
                "j_adapted_frame: degenerate projection");
        Vec Z = best / std::sqrt(best_norm);
        frame.Z.push_back(Z);
        // The partner J conj(Z) is unit and orthogonal automatically; the
        // projection against it above enforced the symplectic pairing.
        frame.Z.push_back(structure_partner(Z, J.comp));
    }
    return frame;
}

double frame_completeness_residual(const JAdaptedFrame &frame,
                                   const HermitianMetric &g) {
    const int m = g.dim();
    require(static_cast<int>(frame.Z.size()) == m, ErrorCode::config,
            "frame_completeness_residual: frame size mismatch");
    Mat M = Mat::Zero(m, m);
    for (const Vec &Z : frame.Z) M += Z * Z.adjoint();
    const Mat Up = inv_upper(g.comp);
    return (M - Up).cwiseAbs().maxCoeff() / (1.0 + Up.cwiseAbs().maxCoeff());
}

FrameTraceReport frame_trace_check(const CurvatureTensor &R,
                                   const JAdaptedFrame &frame,
                                   const HermitianMetric &g, const JTensor &J,
                                   Rng &rng, int pairs) {
    const int m = R.m;
    require(g.dim() == m && J.dim() == m, ErrorCode::config,
            "frame_trace_check: dimension mismatch");
    const double rmax = R.mixed.max_abs();

    // Frame trace of the conjugate-type curvature: with the completeness
    // sum M(k,m') = sum_j Z_j^k conj(Z_j^{m'}), the invariant contraction
    // E(l,i) = sum M(k,m') conj(Rmix(m',k,l,i)) vanishes for an invariant g.
    Mat M = Mat::Zero(m, m);
    for (const Vec &Z : frame.Z) M += Z * Z.adjoint();
    double trace_res = 0.0;
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i) {
            cplx sum = 0.0;
            for (int k = 0; k < m; ++k)
                for (int mm = 0; mm < m; ++mm)
                    sum += M(k, mm) * std::conj(R.mixed(mm, k, l, i));
            trace_res = std::max(trace_res, std::abs(sum));
        }
    trace_res /= (1.0 + rmax) * (1.0 + M.cwiseAbs().maxCoeff());

    // Pair invariance R(JX, JY) = R(X, Y) on realified random vectors.
    double pair_res = 0.0;
    for (int p = 0; p < pairs; ++p) {
        Vec V(m), W(m);
        for (int r = 0; r < m; ++r) {
            V(r) = rng.complex_uniform(1.0);
            W(r) = rng.complex_uniform(1.0);
        }
        const Vec UV = structure_partner(V, J.comp);
        const Vec UW = structure_partner(W, J.comp);
        double diff = 0.0, scale = 0.0;
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                cplx t1 = 0.0, t2 = 0.0;
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b) {
                        const cplx c1 = V(a) * std::conj(W(b)) -
                                        W(a) * std::conj(V(b));
                        const cplx c2 = UV(a) * std::conj(UW(b)) -
                                        UW(a) * std::conj(UV(b));
                        t1 += c1 * R.mixed(a, b, i, k);
                        t2 += c2 * R.mixed(a, b, i, k);
                    }
                diff = std::max(diff, std::abs(t2 - t1));
                scale = std::max(scale, std::abs(t1));
            }
        pair_res = std::max(pair_res, diff / (1.0 + scale));
    }
    return FrameTraceReport{trace_res, pair_res};
}

}  // namespace qma
