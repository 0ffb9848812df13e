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

#include "bundle.hpp"

#include "hypalg.hpp"

namespace qma {

namespace {

double min_eig_of(const Mat &A) {
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.compute(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/** Jets of the complex Hessian entries phi_{r sbar}, valid order 2. */
JetMat hessian_jets(const JetSpacePtr &space, int m, const Jet4 &phi) {
    JetMat H(m, m);
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s)
            H.at(r, s) =
                phi.derivative(space->var_z(r)).derivative(space->var_zb(s));
    return H;
}

}  // namespace

Jet4 random_real_jet(const JetSpacePtr &space, int max_degree, double scale,
                     Rng &rng) {
    Jet4 f = Jet4::constant(space, 0.0);
    for (int idx = 0; idx < space->count(); ++idx) {
        const int d = space->degree(idx);
        if (d == 0 || d > max_degree) continue;
        const int ci = space->conj_index(idx);
        if (ci == idx)
            f.raw(idx) = rng.uniform(-scale, scale);
        else if (ci < idx)
            f.raw(idx) = std::conj(f.coefficient(ci));
        else
            f.raw(idx) = rng.complex_uniform(scale);
    }
    return f;
}

JetMat random_metric_jets(const NormalChart &nc, double scale, Rng &rng) {
    const int m = nc.m;
    const JetSpacePtr space = JetSpace::get(m);

    // Twist-invariant Hermitian center value: background plus an averaged
    // random Hermitian perturbation (re-symmetrized against rounding).
    Mat B(m, m);
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) B(r, s) = rng.complex_uniform(scale);
    const JTensor J0{nc.J.values()};
    Mat g0 = nc.g.values() +
             j_average(Mat(0.5 * (B + B.adjoint())), J0).comp;
    g0 = 0.5 * (g0 + g0.adjoint());

    JetMat g(m, m);
    for (int r = 0; r < m; ++r) {
        for (int s = r; s < m; ++s) {
            Jet4 e = (r == s)
                         ? random_real_jet(space, 2, scale, rng)
                         : Jet4::constant(space, 0.0);
            if (r != s)
                for (int idx = 0; idx < space->count(); ++idx) {
                    const int d = space->degree(idx);
                    if (d >= 1 && d <= 2) e.raw(idx) = rng.complex_uniform(scale);
                }
            e.raw(0) = g0(r, s);
            g.at(r, s) = e;
            // Hermitian function: g(s,r) is the conjugate function of
            // g(r,s); jet conjugation handles the z <-> zbar swap.
            if (r != s) g.at(s, r) = e.conjugate();
        }
    }
    return g;
}

JetMat assemble_g_phi(const NormalChart &nc, const JetMat &g, const Jet4 &phi) {
    const int m = nc.m;
    const JetSpacePtr space = JetSpace::get(m);
    const JetMat H = hessian_jets(space, m, phi);

    // sigma_J(H)(r,s) = sum_{a,b} J(r,a) conj-jet(J(s,b)) H(b,a), with the
    // chart's structure jets in place of the constant matrix.
    JetMat g_phi(m, m);
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) {
            Jet4 sigma = Jet4::constant(space, 0.0);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    sigma += nc.J.at(r, a) * nc.J.at(s, b).conjugate() *
                             H.at(b, a);
            g_phi.at(r, s) = g.at(r, s) + (H.at(r, s) + sigma) * cplx(0.5);
        }
    return g_phi;
}

PointJetBundle make_bundle_with(const NormalChart &nc, const JetMat &g,
                                const Jet4 &phi) {
    PointJetBundle b;
    b.m = nc.m;
    b.nc = nc;
    b.g = g;
    b.phi = phi;
    b.g_phi = assemble_g_phi(nc, g, phi);
    b.g0 = g.values();
    b.g_phi0 = b.g_phi.values();
    b.g_phi_up0 = inv_upper(b.g_phi0);
    b.ghat_up0 = nc.g_up.values();
    b.min_eig_g = min_eig_of(b.g0);
    b.min_eig_g_phi = min_eig_of(b.g_phi0);
    return b;
}

PointJetBundle make_bundle_at(const NormalChart &nc, Rng &rng) {
    const JetSpacePtr space = JetSpace::get(nc.m);
    const int max_draws = 100;
    for (int attempt = 0; attempt < max_draws; ++attempt) {
        const JetMat g = random_metric_jets(nc, 0.3, rng);
        const Jet4 phi = random_real_jet(space, 4, 0.15, rng);
        PointJetBundle b = make_bundle_with(nc, g, phi);
        if (b.min_eig_g > 0.05 && b.min_eig_g_phi > 0.05) return b;
    }
    throw Error(ErrorCode::runtime,
                "bundle generator failed to reach a positive draw");
}

PointJetBundle make_bundle(const KahlerPotentialChart &chart, const Vec &z0,
                           Rng &rng) {
    return make_bundle_at(normal_chart_at(chart, z0), rng);
}

}  // namespace qma
