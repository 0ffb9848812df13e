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

#include "charts.hpp"

#include <cmath>

#include "curvature.hpp"

namespace qma {

namespace {

/** Constant 2x2 holomorphic symplectic form used by the ALE chart. */
Mat flat_omega2() {
    Mat Om = Mat::Zero(2, 2);
    Om(0, 1) = 1.0;
    Om(1, 0) = -1.0;
    return Om;
}

}  // namespace

KahlerPotentialChart KahlerPotentialChart::flat(int m) {
    require(m >= 1 && m <= 4, ErrorCode::config,
            "flat chart: dimension must be between 1 and 4");
    return KahlerPotentialChart(m, "flat", 0.0);
}

KahlerPotentialChart KahlerPotentialChart::ale(double a) {
    require(a > 0.0, ErrorCode::config, "ale chart: parameter must be positive");
    return KahlerPotentialChart(2, "eh", a);
}

KahlerPotentialChart KahlerPotentialChart::named(const std::string &name,
                                                 double a) {
    if (name == "flat") return flat(2);
    if (name == "flat4") return flat(4);
    if (name == "eh") return ale(a);
    throw Error(ErrorCode::config, "unknown chart '" + name + "'");
}

bool KahlerPotentialChart::in_domain(const Vec &z0) const {
    if (z0.size() != m_) return false;
    if (name_ == "flat") return true;
    return z0.squaredNorm() >= 1e-8;
}

Jet4 KahlerPotentialChart::potential_jet(const Vec &z0) const {
    require(z0.size() == m_, ErrorCode::config,
            "potential_jet: point dimension mismatch");
    require(in_domain(z0), ErrorCode::config,
            "potential_jet: point outside the chart domain");
    const JetSpacePtr space = JetSpace::get(m_);
    // u = sum_r z^r zbar^r as a jet in the displacement variables.
    Jet4 u = Jet4::constant(space, 0.0);
    for (int r = 0; r < m_; ++r) {
        Jet4 zr = Jet4::variable(space, space->var_z(r)) + z0(r);
        Jet4 zbr = Jet4::variable(space, space->var_zb(r)) + std::conj(z0(r));
        u += zr * zbr;
    }
    if (name_ == "flat") return u;

    const double a2 = a_ * a_;
    const double a4 = a2 * a2;
    Jet4 s = jet_sqrt(u * u + a4);
    return s + (jet_log(u) - jet_log(s + a2)) * cplx(a2);
}

JetMat KahlerPotentialChart::metric_jet(const Vec &z0) const {
    const Jet4 pot = potential_jet(z0);
    const JetSpacePtr space = pot.space();
    JetMat g(m_, m_);
    for (int r = 0; r < m_; ++r) {
        const Jet4 dr = pot.derivative(space->var_z(r));
        for (int s = 0; s < m_; ++s)
            g.at(r, s) = dr.derivative(space->var_zb(s));
    }
    return g;
}

JetMat KahlerPotentialChart::metric_up_jet(const Vec &z0) const {
    return metric_jet(z0).transpose().inverse();
}

JetMat KahlerPotentialChart::structure_jet(const Vec &z0) const {
    const JetSpacePtr space = JetSpace::get(m_);
    if (name_ == "flat") {
        const Mat J0 = flat_J(m_).comp;
        JetMat J(m_, m_);
        for (int r = 0; r < m_; ++r)
            for (int s = 0; s < m_; ++s)
                J.at(r, s) = Jet4::constant(space, J0(r, s));
        return J;
    }
    // The structure of the ALE chart is recovered from the constant
    // holomorphic symplectic form: J = Omega_flat (g^T)^{-1}.
    const JetMat g_up = metric_up_jet(z0);
    const Mat Om = flat_omega2();
    JetMat J(m_, m_);
    for (int r = 0; r < m_; ++r) {
        for (int s = 0; s < m_; ++s) {
            Jet4 sum = Jet4::constant(space, 0.0);
            for (int a = 0; a < m_; ++a) {
                if (Om(r, a) == cplx(0.0)) continue;
                sum += g_up.at(a, s) * Om(r, a);
            }
            J.at(r, s) = sum;
        }
    }
    return J;
}

JTensor KahlerPotentialChart::structure_at(const Vec &z0) const {
    return JTensor{structure_jet(z0).values()};
}

Vec KahlerPotentialChart::sample_point(Rng &rng) const {
    Vec z(m_);
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (int r = 0; r < m_; ++r) z(r) = rng.complex_uniform(0.9);
        const double nrm = z.norm();
        if (name_ == "flat") return z;
        if (nrm >= 0.35 && nrm <= 1.6) return z;
    }
    throw Error(ErrorCode::runtime, "sample_point: no admissible point drawn");
}

MetricJets metric_jets(const KahlerPotentialChart &chart, const Vec &z0) {
    MetricJets mj;
    mj.pot = chart.potential_jet(z0);
    const JetSpacePtr space = mj.pot.space();
    const int m = chart.dim();
    mj.g = JetMat(m, m);
    for (int r = 0; r < m; ++r) {
        const Jet4 dr = mj.pot.derivative(space->var_z(r));
        for (int s = 0; s < m; ++s)
            mj.g.at(r, s) = dr.derivative(space->var_zb(s));
    }
    mj.g_up = mj.g.transpose().inverse();
    return mj;
}

// ---------------------------------------------------------------------------
// Normal coordinates
// ---------------------------------------------------------------------------

Vec NormalChart::forward_point(const Vec &dz) const {
    require(dz.size() == m, ErrorCode::config,
            "forward_point: displacement dimension mismatch");
    Vec w = dz;
    for (int i = 0; i < m; ++i) {
        cplx q = 0.0;
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) q += Gamma0(i, k, l) * dz(k) * dz(l);
        w(i) += 0.5 * q;
    }
    return w;
}

Vec NormalChart::invert_point(const Vec &w) const {
    require(w.size() == m, ErrorCode::config,
            "invert_point: displacement dimension mismatch");
    Vec z = w;
    const double tol = newton_tol * (1.0 + w.cwiseAbs().maxCoeff());
    for (int iter = 0; iter < 50; ++iter) {
        const Vec r = forward_point(z) - w;
        if (r.cwiseAbs().maxCoeff() <= tol) return z;
        Mat DF = Mat::Identity(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int l = 0; l < m; ++l) DF(i, j) += Gamma0(i, j, l) * z(l);
        z -= DF.partialPivLu().solve(r);
    }
    throw Error(ErrorCode::stage,
                "invert_point: Newton iteration did not reach tolerance in 50 "
                "steps");
}

NormalChart normal_chart_at(const KahlerPotentialChart &chart, const Vec &z0) {
    NormalChart nc;
    nc.m = chart.dim();
    nc.z0 = z0;
    const int m = nc.m;
    const JetSpacePtr space = JetSpace::get(m);

    MetricJets raw = metric_jets(chart, z0);
    ChristoffelSymbols gam = christoffel(raw.g, raw.g_up);
    nc.Gamma0 = gam.comp;

    double gamma_max = 0.0;
    for (const cplx &v : nc.Gamma0.v) gamma_max = std::max(gamma_max, std::abs(v));

    if (gamma_max == 0.0) {
        // Already geodesic at z0 (flat chart): the coordinate change is the
        // identity and every transported jet coincides with the raw one.
        nc.chi.resize(m);
        for (int i = 0; i < m; ++i) nc.chi[i] = Jet4::variable(space, i);
        nc.pot = raw.pot;
        nc.g = raw.g;
        nc.g_up = raw.g_up;
        nc.J = chart.structure_jet(z0);
        return nc;
    }

    // Newton iteration in the jet ring for the inverse coordinate change
    // z(w): solve z + (1/2) Gamma0 z z - w = 0.  Quadratic convergence
    // reaches full 4-jet accuracy in three steps; the residual jet is
    // checked against the declared tolerance.
    std::vector<Jet4> chi(m);
    for (int i = 0; i < m; ++i) chi[i] = Jet4::variable(space, i);
    for (int iter = 0; iter < 3; ++iter) {
        std::vector<Jet4> R(m);
        JetMat JF(m, m);
        for (int i = 0; i < m; ++i) {
            Jet4 q = Jet4::constant(space, 0.0);
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    const cplx c = nc.Gamma0(i, k, l);
                    if (c != cplx(0.0)) q += (chi[k] * chi[l]) * c;
                }
            R[i] = chi[i] + q * cplx(0.5) - Jet4::variable(space, i);
            for (int j = 0; j < m; ++j) {
                Jet4 e = Jet4::constant(space, i == j ? 1.0 : 0.0);
                for (int l = 0; l < m; ++l) {
                    const cplx c = nc.Gamma0(i, j, l);
                    if (c != cplx(0.0)) e += chi[l] * c;
                }
                JF.at(i, j) = e;
            }
        }
        JetMat JFinv = JF.inverse();
        for (int i = 0; i < m; ++i) {
            Jet4 corr = JFinv.at(i, 0) * R[0];
            for (int j = 1; j < m; ++j) corr += JFinv.at(i, j) * R[j];
            chi[i] -= corr;
        }
    }
    double chi_scale = 0.0, res_max = 0.0;
    for (int i = 0; i < m; ++i) chi_scale = std::max(chi_scale, chi[i].max_abs_coeff());
    for (int i = 0; i < m; ++i) {
        Jet4 q = Jet4::constant(space, 0.0);
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) {
                const cplx c = nc.Gamma0(i, k, l);
                if (c != cplx(0.0)) q += (chi[k] * chi[l]) * c;
            }
        Jet4 res = chi[i] + q * cplx(0.5) - Jet4::variable(space, i);
        res_max = std::max(res_max, res.max_abs_coeff());
    }
    require(res_max <= nc.newton_tol * (1.0 + chi_scale) * 10.0, ErrorCode::stage,
            "normal_chart_at: jet inversion residual above tolerance");
    nc.chi = chi;

    // Substitution arguments: z^r -> chi_r(w), zbar^r -> conj(chi_r).
    std::vector<Jet4> args(2 * m);
    for (int r = 0; r < m; ++r) {
        args[r] = chi[r];
        args[m + r] = chi[r].conjugate();
    }

    nc.pot = substitute(raw.pot, args);
    nc.g = JetMat(m, m);
    for (int r = 0; r < m; ++r) {
        const Jet4 dr = nc.pot.derivative(space->var_z(r));
        for (int s = 0; s < m; ++s)
            nc.g.at(r, s) = dr.derivative(space->var_zb(s));
    }
    nc.g_up = nc.g.transpose().inverse();

    // Transport of the structure: J'(a,b) = sum_{r,s} (dz^r/dw^a) J(r,s)
    // conj(dw^b/dz^s), all as jets composed through chi.
    JetMat Jraw = chart.structure_jet(z0);
    JetMat Jw(m, m);
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) Jw.at(r, s) = substitute(Jraw.at(r, s), args);

    JetMat Fwd(m, m);
    JetMat Mb(m, m);
    for (int i = 0; i < m; ++i) {
        for (int a = 0; a < m; ++a) {
            Jet4 f = Jet4::constant(space, i == a ? 1.0 : 0.0);
            Jet4 b = Jet4::constant(space, i == a ? 1.0 : 0.0);
            for (int l = 0; l < m; ++l) {
                const cplx c = nc.Gamma0(i, a, l);
                if (c != cplx(0.0)) {
                    f += chi[l] * c;
                    b += chi[l].conjugate() * std::conj(c);
                }
            }
            Fwd.at(i, a) = f;
            Mb.at(i, a) = b;
        }
    }
    JetMat Jac = Fwd.inverse();

    nc.J = JetMat(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            Jet4 sum = Jet4::constant(space, 0.0);
            for (int r = 0; r < m; ++r)
                for (int s = 0; s < m; ++s)
                    sum += Jac.at(r, a) * Jw.at(r, s) * Mb.at(b, s);
            nc.J.at(a, b) = sum.truncated(2);
        }
    }
    return nc;
}

JetMat transport_J(const KahlerPotentialChart &chart, const Vec &z0) {
    return normal_chart_at(chart, z0).J;
}

}  // namespace qma
