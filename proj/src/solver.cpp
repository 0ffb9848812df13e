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

#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

namespace qma {
namespace {

double dot(const std::vector<double> &a, const std::vector<double> &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm2(const std::vector<double> &a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const std::vector<double> &x, std::vector<double> &y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double sup(const std::vector<double> &a) {
    double s = -std::numeric_limits<double>::infinity();
    for (double v : a) s = std::max(s, v);
    return s;
}

double sup_abs(const std::vector<double> &a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

double pairwise_sum(const double *a, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

/** Log-depth summation keeps the b update at rounding accuracy. */
double pairwise_mean(const std::vector<double> &a) {
    return pairwise_sum(a.data(), a.size()) / static_cast<double>(a.size());
}

/**
 * Per-grid spectral helpers for the Galerkin formulation: the mask of
 * dead modes (every axis index at 0 or Nyquist, where the first-order
 * multipliers of real data vanish) and the inverse of the flat-metric
 * linearization -pi^2 |kappa|^2 / 2 used as preconditioner.
 */
struct GalerkinWorkspace {
    GridPtr grid;
    std::vector<char> dead;
    std::vector<double> inv_l0;

    explicit GalerkinWorkspace(const GridPtr &g) : grid(g) {
        const std::size_t total = grid->total();
        dead.assign(total, 0);
        inv_l0.assign(total, 0.0);
        for (std::size_t pt = 0; pt < total; ++pt) {
            double k2 = 0.0;
            for (int axis = 0; axis < grid->axes(); ++axis) {
                const double k = grid->wavenumber(grid->axis_index(pt, axis));
                k2 += k * k;
            }
            if (k2 == 0.0) {
                dead[pt] = 1;
            } else {
                inv_l0[pt] = 1.0 / (-0.5 * kPi * kPi * k2);
            }
        }
    }

    /** Remove dead-mode (and thereby mean) content in place. */
    void project_live(std::vector<double> &v) const {
        std::vector<cplx> buf(v.begin(), v.end());
        dft_forward(*grid, buf);
        for (std::size_t pt = 0; pt < buf.size(); ++pt)
            if (dead[pt]) buf[pt] = 0.0;
        dft_inverse(*grid, buf);
        for (std::size_t pt = 0; pt < v.size(); ++pt) v[pt] = buf[pt].real();
    }

    /** Apply the inverse flat-metric linearization (zero on dead modes). */
    std::vector<double> precondition(const std::vector<double> &v) const {
        std::vector<cplx> buf(v.begin(), v.end());
        dft_forward(*grid, buf);
        for (std::size_t pt = 0; pt < buf.size(); ++pt) buf[pt] *= inv_l0[pt];
        dft_inverse(*grid, buf);
        std::vector<double> out(v.size());
        for (std::size_t pt = 0; pt < v.size(); ++pt) out[pt] = buf[pt].real();
        return out;
    }
};

/** Pointwise (1/2) log det g_phi - tF; caller guarantees positivity. */
std::vector<double> log_density(const MetricField &g_phi,
                                const ScalarField &tF) {
    std::vector<double> out(tF.size());
    for (std::size_t pt = 0; pt < out.size(); ++pt) {
        const double d = g_phi.at(pt).determinant().real();
        out[pt] = 0.5 * std::log(d) - tF[pt];
    }
    return out;
}

/**
 * Right-preconditioned BiCGStab on live-mode grid functions.  Returns
 * the iteration count; restarts on rho/omega breakdown and throws a
 * stage error when the cap is reached without the relative tolerance.
 */
template <typename OpA, typename OpM>
int bicgstab(const OpA &apply, const OpM &precond,
             const std::vector<double> &rhs, std::vector<double> &x,
             double tol, int max_iter) {
    const std::size_t n = rhs.size();
    x.assign(n, 0.0);
    const double rhs_norm = nrm2(rhs);
    if (rhs_norm == 0.0) return 0;
    const double target = tol * rhs_norm;

    std::vector<double> r = rhs;
    std::vector<double> rhat = r;
    std::vector<double> p(n, 0.0), v(n, 0.0);
    double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
    int iters = 0, restarts = 0;

    auto restart = [&]() {
        std::vector<double> ax = apply(x);
        r = rhs;
        axpy(-1.0, ax, r);
        rhat = r;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        rho_prev = alpha = omega = 1.0;
    };

    while (iters < max_iter) {
        ++iters;
        const double rho = dot(rhat, r);
        if (std::abs(rho) <= 1e-24 * nrm2(rhat) * nrm2(r)) {
            if (nrm2(r) <= target) return iters;
            require(++restarts <= 8, ErrorCode::stage,
                    "linear solver breakdown (rho)");
            restart();
            continue;
        }
        const double beta = (rho / rho_prev) * (alpha / omega);
        for (std::size_t i = 0; i < n; ++i)
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        const std::vector<double> phat = precond(p);
        v = apply(phat);
        const double denom = dot(rhat, v);
        if (std::abs(denom) <= 1e-28 * rhs_norm * rhs_norm) {
            if (nrm2(r) <= target) return iters;
            require(++restarts <= 8, ErrorCode::stage,
                    "linear solver breakdown (alpha)");
            restart();
            continue;
        }
        alpha = rho / denom;
        std::vector<double> s = r;
        axpy(-alpha, v, s);
        if (nrm2(s) <= target) {
            axpy(alpha, phat, x);
            return iters;
        }
        const std::vector<double> shat = precond(s);
        const std::vector<double> t = apply(shat);
        const double tt = dot(t, t);
        if (tt == 0.0) {
            axpy(alpha, phat, x);
            require(++restarts <= 8, ErrorCode::stage,
                    "linear solver breakdown (omega)");
            restart();
            continue;
        }
        omega = dot(t, s) / tt;
        axpy(alpha, phat, x);
        axpy(omega, shat, x);
        r = s;
        axpy(-omega, t, r);
        if (nrm2(r) <= target) return iters;
        if (std::abs(omega) <= 1e-28) {
            require(++restarts <= 8, ErrorCode::stage,
                    "linear solver breakdown (omega small)");
            restart();
            continue;
        }
        rho_prev = rho;
    }
    std::ostringstream msg;
    msg << "linear solver stalled after " << max_iter
        << " iterations (relative residual " << nrm2(r) / rhs_norm << ")";
    throw Error(ErrorCode::stage, msg.str());
}

}  // namespace

void SolverConfig::validate() const {
    require(n == 1 || n == 2, ErrorCode::config,
            "solver grid dimension n must be 1 or 2");
    require(N >= 4 && N % 2 == 0, ErrorCode::config,
            "solver grid resolution N must be even and >= 4");
    require(path.size() >= 2, ErrorCode::config,
            "continuity path needs at least t = 0 and t = 1");
    require(path.front() == 0.0 && path.back() == 1.0, ErrorCode::config,
            "continuity path must run from 0 to 1");
    for (std::size_t k = 1; k < path.size(); ++k)
        require(path[k] > path[k - 1], ErrorCode::config,
                "continuity path values must increase strictly");
    require(newton_tol > 0 && linear_tol > 0, ErrorCode::config,
            "solver tolerances must be positive");
    require(max_newton >= 1 && linear_max_iter >= 1, ErrorCode::config,
            "solver iteration caps must be at least 1");
    require(backtrack_factor > 0 && backtrack_factor < 1, ErrorCode::config,
            "backtrack factor must lie in (0, 1)");
    require(sufficient_decrease > 0 && sufficient_decrease < 1,
            ErrorCode::config, "sufficient decrease must lie in (0, 1)");
    require(min_step > 0 && min_step < 1, ErrorCode::config,
            "minimal damping step must lie in (0, 1)");
    require(eps_pos > 0, ErrorCode::config,
            "positivity floor must be positive");
}

std::vector<double> SolverConfig::uniform_path(int stages) {
    require(stages >= 1, ErrorCode::config, "path needs at least one stage");
    std::vector<double> t(stages + 1);
    for (int k = 0; k <= stages; ++k)
        t[k] = static_cast<double>(k) / stages;
    return t;
}

MatrixField raise_metric(const MetricField &g) {
    MatrixField up(g.grid(), g.m());
    for (std::size_t pt = 0; pt < g.grid()->total(); ++pt)
        up.set(pt, inv_upper(g.at(pt)));
    return up;
}

ScalarField linearized_apply(const MatrixField &g_up, const JTensor &J,
                             const ScalarField &u) {
    const GridPtr &grid = u.grid();
    require(g_up.grid()->same(*grid), ErrorCode::config,
            "linearized operator: metric and argument grids differ");
    const int m = g_up.m();
    const Mat Jm = J.comp;
    const MatrixField H = complex_hessian(u);
    std::vector<double> out(grid->total());
    for (std::size_t pt = 0; pt < out.size(); ++pt) {
        const Mat Hp = H.at(pt);
        const Mat K = Hp + Jm * Hp.conjugate() * Jm.adjoint();
        cplx acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) acc += g_up.entry(pt, i, j) * K(i, j);
        out[pt] = 0.25 * acc.real();
    }
    return ScalarField(grid, std::move(out));
}

ScalarField linearized_operator(const MetricField &g_phi, const JTensor &J,
                                const ScalarField &u) {
    require(g_phi.min_eig() > 0.0, ErrorCode::stage,
            "linearized operator needs a positive metric");
    return linearized_apply(raise_metric(g_phi), J, u);
}

SolverState solve_stage(const SolverState &start, const ScalarField &F,
                        double t, const SolverConfig &config,
                        StageRecord &record) {
    config.validate();
    const GridPtr &grid = F.grid();
    require(grid->n() == config.n && grid->N() == config.N, ErrorCode::config,
            "density grid does not match the solver configuration");
    require(start.phi.grid() && start.phi.grid()->same(*grid),
            ErrorCode::config, "state grid does not match the density grid");

    record = StageRecord{};
    record.t = t;

    const int m = grid->m();
    const JTensor J = flat_J(m);
    const MetricField g_bg = MetricField::constant(grid, Mat::Identity(m, m));
    const GalerkinWorkspace ws(grid);

    ScalarField tF = F;
    tF.scale(t);

    SolverState state = start;
    state.t = t;

    auto stage_fail = [&](const std::string &why) -> Error {
        std::ostringstream msg;
        msg << why << " [t = " << t << ", newton = " << record.newton_iters
            << ", residual = " << record.final_residual << "]";
        record.message = msg.str();
        return Error(ErrorCode::stage, record.message);
    };

    for (int iter = 0; iter <= config.max_newton; ++iter) {
        const MetricField g_phi = omega_phi(g_bg, J, state.phi);
        const double me = g_phi.min_eig();
        if (me <= config.eps_pos) throw stage_fail("positivity cone exit");

        std::vector<double> raw = log_density(g_phi, tF);
        const double b = pairwise_mean(raw);
        std::vector<double> r0 = raw;
        ws.project_live(r0);
        const double res = sup_abs(r0);

        record.residuals.push_back(res);
        record.b_history.push_back(b);
        record.min_eigs.push_back(me);
        record.final_residual = res;
        record.final_b = b;
        record.min_eig = me;
        state.residual_history.push_back(res);
        state.min_eig_history.push_back(me);

        if (res <= config.newton_tol) {
            state.b = b;
            record.converged = true;
            return state;
        }
        if (iter == config.max_newton)
            throw stage_fail("Newton iteration cap reached");

        const MatrixField g_up = raise_metric(g_phi);
        auto apply = [&](const std::vector<double> &uv) {
            ScalarField u(grid, uv);
            ScalarField Lu = linearized_apply(g_up, J, u);
            std::vector<double> lv = Lu.values();
            ws.project_live(lv);
            return lv;
        };
        auto precond = [&](const std::vector<double> &rv) {
            return ws.precondition(rv);
        };
        std::vector<double> rhs(r0.size());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -r0[i];
        std::vector<double> update;
        record.linear_iters += bicgstab(apply, precond, rhs, update,
                                        config.linear_tol,
                                        config.linear_max_iter);

        double alpha = 1.0;
        while (true) {
            std::vector<double> trial_v = state.phi.values();
            axpy(alpha, update, trial_v);
            ScalarField trial(grid, std::move(trial_v));
            const MetricField g_trial = omega_phi(g_bg, J, trial);
            if (g_trial.min_eig() > config.eps_pos) {
                std::vector<double> raw_t = log_density(g_trial, tF);
                ws.project_live(raw_t);
                const double res_t = sup_abs(raw_t);
                if (res_t <= (1.0 - config.sufficient_decrease * alpha) * res) {
                    trial.add_constant(-trial.mean());
                    state.phi = std::move(trial);
                    break;
                }
            }
            alpha *= config.backtrack_factor;
            if (alpha < config.min_step)
                throw stage_fail("positivity cone exit");
        }
        record.newton_iters = iter + 1;
    }
    throw stage_fail("Newton iteration cap reached");  // unreachable
}

SolveResult solve_qma(const ScalarField &F, const SolverConfig &config) {
    config.validate();
    const GridPtr &grid = F.grid();
    require(grid && grid->n() == config.n && grid->N() == config.N,
            ErrorCode::config,
            "density grid does not match the solver configuration");

    SolveResult result;
    SolverState good;
    good.phi = ScalarField(grid,
                           std::vector<double>(grid->total(), 0.0));

    std::deque<double> targets(config.path.begin() + 1, config.path.end());
    const int max_attempts = 64;
    int attempts = 0;

    while (!targets.empty()) {
        const double t = targets.front();
        if (++attempts > max_attempts) {
            result.report.message = "continuity path abandoned: too many stages";
            break;
        }
        StageRecord record;
        try {
            SolverState next = solve_stage(good, F, t, config, record);
            result.report.stages.push_back(record);
            good = std::move(next);
            result.stage_states.push_back(good);
            targets.pop_front();
        } catch (const Error &e) {
            if (e.code() != ErrorCode::stage) throw;
            result.report.stages.push_back(record);
            const double gap = t - good.t;
            if (gap <= 1e-3) {
                std::ostringstream msg;
                msg << "stage at t = " << t
                    << " failed with no room to halve: " << e.what();
                result.report.message = msg.str();
                break;
            }
            targets.push_front(good.t + 0.5 * gap);
        }
    }

    result.report.converged = targets.empty();
    if (!result.report.converged && result.report.message.empty())
        result.report.message = "continuity path abandoned";

    // Output gauge: sup phi = 0.  A constant shift is invisible to
    // g_phi, hence to the equation and to b.
    good.phi.add_constant(-sup(good.phi.values()));
    result.state = std::move(good);
    return result;
}

ScalarField manufactured_potential(const GridPtr &grid) {
    std::vector<double> v(grid->total());
    for (std::size_t pt = 0; pt < v.size(); ++pt) {
        const double x1 = grid->coord(pt, 0);
        const double x3 = grid->coord(pt, 2);
        const double x4 = grid->coord(pt, 3);
        v[pt] = 0.05 * (std::cos(2.0 * kPi * x1) +
                        std::sin(2.0 * kPi * x3) * std::cos(2.0 * kPi * x4));
    }
    return ScalarField(grid, std::move(v));
}

ScalarField manufactured_density(const GridPtr &grid) {
    const int m = grid->m();
    const JTensor J = flat_J(m);
    const MetricField g_bg = MetricField::constant(grid, Mat::Identity(m, m));
    const MetricField g_phi = omega_phi(g_bg, J, manufactured_potential(grid));
    require(g_phi.min_eig() > 0.0, ErrorCode::runtime,
            "manufactured potential left the positive cone");
    std::vector<double> v(grid->total());
    for (std::size_t pt = 0; pt < v.size(); ++pt)
        v[pt] = 0.5 * std::log(g_phi.at(pt).determinant().real());
    return ScalarField(grid, std::move(v));
}

}  // namespace qma
