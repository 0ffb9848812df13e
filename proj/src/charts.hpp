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
 * @file charts.hpp
 * @brief Kähler potential charts, their metric jets, and geodesic normal
 *        coordinates with tensor transport.
 *
 * Two charts are built in:
 *
 *   - "flat": the standard potential |z|^2 on C^m, metric identity,
 *     constant anticommuting structure.
 *   - "eh": the ALE chart on (a neighborhood in) the cotangent space of
 *     the 2-sphere with potential
 *         K(u) = s + a^2 log u - a^2 log(a^2 + s),
 *         u = |z^1|^2 + |z^2|^2,  s = sqrt(u^2 + a^4),
 *     whose metric has unit determinant and vanishing Ricci curvature;
 *     the anticommuting structure is recovered from the constant
 *     holomorphic symplectic form via J = Omega_flat (g^T)^{-1}.
 */

#ifndef QMALAB_CHARTS_HPP
#define QMALAB_CHARTS_HPP

#include <string>

#include "hypalg.hpp"
#include "jets.hpp"

namespace qma {

/** A chart presented through 4-jets of its Kähler potential. */
class KahlerPotentialChart {
  public:
    static KahlerPotentialChart flat(int m);
    static KahlerPotentialChart ale(double a);  ///< m = 2, parameter a > 0

    /** Parse "flat" / "flat4" / "eh" into a chart instance. */
    static KahlerPotentialChart named(const std::string &name, double a = 1.0);

    int dim() const { return m_; }
    const std::string &name() const { return name_; }
    double param() const { return a_; }

    /** True when the 4-jet of the potential is well defined at z0. */
    bool in_domain(const Vec &z0) const;

    /** 4-jet of the potential in displacement variables around z0. */
    Jet4 potential_jet(const Vec &z0) const;

    /** 2-jets of the metric components g(r,s) = g_{r sbar} around z0. */
    JetMat metric_jet(const Vec &z0) const;

    /** 2-jets of the raised components [g^{i jbar}] = (G^T)^{-1}. */
    JetMat metric_up_jet(const Vec &z0) const;

    /** 2-jets of the anticommuting structure components J(r,s). */
    JetMat structure_jet(const Vec &z0) const;

    /** Point values of the structure at z0. */
    JTensor structure_at(const Vec &z0) const;

    /** Draw a point from the chart's preferred sampling region. */
    Vec sample_point(Rng &rng) const;

  private:
    KahlerPotentialChart(int m, std::string name, double a)
        : m_(m), name_(std::move(name)), a_(a) {}

    int m_;
    std::string name_;
    double a_;
};

/** Bundle of potential/metric jets at one point. */
struct MetricJets {
    Jet4 pot;      ///< valid order 4
    JetMat g;      ///< valid order 2
    JetMat g_up;   ///< valid order 2
};

MetricJets metric_jets(const KahlerPotentialChart &chart, const Vec &z0);

/**
 * @brief Geodesic normal coordinates w centered at z0.
 *
 * The coordinate change is the holomorphic quadratic map
 *   w^i = (z - z0)^i + (1/2) Gamma^i_{kl}(z0) (z - z0)^k (z - z0)^l.
 * Its inverse is represented both as 4-jets (chi) computed by Newton
 * iteration in the jet ring, and as a pointwise Newton evaluator with a
 * declared tolerance.  All transported quantities are jets at w = 0.
 */
struct NormalChart {
    int m = 0;
    Vec z0;
    CTensor3 Gamma0;            ///< Gamma^i_{kl} at z0
    std::vector<Jet4> chi;      ///< z-displacement jets in w, valid 4
    Jet4 pot;                   ///< transported potential, valid 4
    JetMat g;                   ///< transported metric jets, valid 2
    JetMat g_up;                ///< raised components, valid 2
    JetMat J;                   ///< transported structure jets, valid 2
    double newton_tol = 1e-13;  ///< declared tolerance of the point inverter

    /** Forward map: w-displacement of a z-displacement. */
    Vec forward_point(const Vec &dz) const;

    /** Newton inversion: z-displacement for a w-displacement (<= 50 steps). */
    Vec invert_point(const Vec &w) const;
};

NormalChart normal_chart_at(const KahlerPotentialChart &chart, const Vec &z0);

/** Transported 2-jets of the structure components in normal coordinates. */
JetMat transport_J(const KahlerPotentialChart &chart, const Vec &z0);

}  // namespace qma

#endif  // QMALAB_CHARTS_HPP
