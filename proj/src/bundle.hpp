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
 * @file bundle.hpp
 * @brief Random point-jet bundles: all the Taylor data the expansion
 *        identity checks consume at a single base point.
 *
 * A bundle packages, in normal coordinates at a chart point,
 *
 *   - the background jets (metric, raised metric, structure) of the chart,
 *   - a random Hermitian 2-jet metric perturbation g whose value at the
 *     center is invariant under the structure twist,
 *   - a random real 4-jet potential phi,
 *   - the assembled jets g_phi = g + (H_phi + sigma_J H_phi) / 2,
 *
 * together with the frozen center values and positivity certificates the
 * identity checks need.  Generators redraw until both g and g_phi are
 * uniformly positive at the center, so logarithms and inverses exist.
 */

#ifndef QMALAB_BUNDLE_HPP
#define QMALAB_BUNDLE_HPP

#include "charts.hpp"
#include "common.hpp"
#include "jets.hpp"

namespace qma {

/** Taylor data at one base point for the expansion identity checks. */
struct PointJetBundle {
    int m = 0;            ///< complex dimension (even)
    NormalChart nc;       ///< background jets in normal coordinates
    JetMat g;             ///< Hermitian metric 2-jets, twist-invariant at 0
    Jet4 phi;             ///< real potential 4-jet
    JetMat g_phi;         ///< g + (H_phi + sigma_J H_phi) / 2, valid 2

    Mat g0;               ///< g at the center
    Mat g_phi0;           ///< g_phi at the center
    Mat g_phi_up0;        ///< raised components of g_phi0
    Mat ghat_up0;         ///< raised components of the background metric at 0
    double min_eig_g = 0.0;      ///< smallest eigenvalue of g0
    double min_eig_g_phi = 0.0;  ///< smallest eigenvalue of g_phi0
};

/**
 * @brief Random jet of a real-valued function, degrees 1..max_degree.
 *
 * Reality of the function forces the coefficient of a monomial to be the
 * conjugate of the coefficient of its z <-> zbar swap; self-paired
 * monomials get real draws.  The constant term is left at zero.
 */
Jet4 random_real_jet(const JetSpacePtr &space, int max_degree, double scale,
                     Rng &rng);

/**
 * @brief Random Hermitian-function 2-jets for the metric perturbation.
 *
 * The value at the center is the background value plus `scale` times a
 * random Hermitian matrix averaged against the structure twist, so the
 * center stays twist-invariant.  Higher coefficients are free apart from
 * the Hermitian-function mirror g(s,r) = conj g(r,s) (jet conjugation
 * swaps z and zbar), with real-function jets on the diagonal.
 */
JetMat random_metric_jets(const NormalChart &nc, double scale, Rng &rng);

/** Assemble g_phi jets: g + (H_phi + sigma_J H_phi) / 2 with nc's J jets. */
JetMat assemble_g_phi(const NormalChart &nc, const JetMat &g, const Jet4 &phi);

/** Build a bundle from existing pieces; fills center values and eigenvalues. */
PointJetBundle make_bundle_with(const NormalChart &nc, const JetMat &g,
                                const Jet4 &phi);

/**
 * @brief Draw a random bundle on an existing normal chart.
 *
 * Redraws (up to a fixed cap) until min-eig of both g and g_phi at the
 * center exceed 0.05; throws ErrorCode::runtime if that fails.
 */
PointJetBundle make_bundle_at(const NormalChart &nc, Rng &rng);

/** Convenience: normal chart at z0, then make_bundle_at. */
PointJetBundle make_bundle(const KahlerPotentialChart &chart, const Vec &z0,
                           Rng &rng);

}  // namespace qma

#endif  // QMALAB_BUNDLE_HPP
