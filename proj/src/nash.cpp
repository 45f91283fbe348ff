#include "snwave/nash.hpp"

#include <cmath>
#include <sstream>

namespace snwave::nash {

namespace {

using wavesolver::flux_trace_on;
using wavesolver::solve_backward_adjoint;
using wavesolver::solve_forward;

double sigma2_inner(const DiscreteSpaces& spaces, const TimeSignal& a, const TimeSignal& b) {
    const auto& w = spaces.sigma2_weights();
    double s = 0.0;
    for (int n = 0; n <= spaces.nt(); ++n) s += w[static_cast<std::size_t>(n)] * a[n] * b[n];
    return s;
}

double sigma2_norm(const DiscreteSpaces& spaces, const TimeSignal& a) {
    return std::sqrt(sigma2_inner(spaces, a, a));
}

// sigma w - flux_trace(backward(alpha * forward(w2-only bc)))|Sigma2: the
// linear part of the follower gradient.  Two wave solves per apply.
TimeSignal normal_apply(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                        const TimeSignal& w) {
    const auto w2 = spaces.restrict_to(w, SigmaSupport::Sigma2);
    const auto v = solve_forward(cfg, grid, w2, nullptr);
    const auto src = tracking_source(cfg, grid, v, nullptr);
    const std::vector<double> zero(static_cast<std::size_t>(grid.ny) + 1, 0.0);
    const auto p = solve_backward_adjoint(cfg, grid, &src, zero, zero);
    const auto tr = flux_trace_on(spaces, p, SigmaSupport::Sigma2);
    TimeSignal out = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
    for (int n = 0; n <= grid.nt; ++n) out[n] = cfg.sigma * w2[n] - tr[n];
    return spaces.restrict_to(out, SigmaSupport::Sigma2);
}

}  // namespace

TimeSignal compose_boundary(const DiscreteSpaces& spaces, const TimeSignal& w1,
                            const TimeSignal& w2) {
    const auto a = spaces.restrict_to(w1, SigmaSupport::Sigma1);
    const auto b = spaces.restrict_to(w2, SigmaSupport::Sigma2);
    TimeSignal bc = TimeSignal::zeros(spaces.nt(), SigmaSupport::SigmaStar);
    for (int n = 0; n <= spaces.nt(); ++n) bc[n] = a[n] + b[n];
    return bc;
}

double eval_J(const DiscreteSpaces& spaces, const TimeSignal& w1) {
    const auto w = spaces.restrict_to(w1, SigmaSupport::Sigma1);
    const auto& ws = spaces.sigma1_weights();
    double s = 0.0;
    for (int n = 0; n <= spaces.nt(); ++n)
        s += ws[static_cast<std::size_t>(n)] * w[n] * w[n];
    return 0.5 * s;
}

SpaceTimeField tracking_source(const ProblemConfig& cfg, const Grid& grid,
                               const SpaceTimeField& v, const SpaceTimeField* v2) {
    SpaceTimeField src = SpaceTimeField::zeros(grid);
    const double dt = cfg.dt(grid);
    for (int n = 0; n <= grid.nt; ++n) {
        const double a = 1.0 + cfg.k * n * dt;
        for (int j = 0; j <= grid.ny; ++j) {
            const double d = v.at(n, j) - (v2 ? v2->at(n, j) : 0.0);
            src.at(n, j) = a * d;
        }
    }
    return src;
}

double eval_J2(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
               const TimeSignal& w1, const TimeSignal& w2, const SpaceTimeField* v2) {
    const auto bc = compose_boundary(spaces, w1, w2);
    const auto v = solve_forward(cfg, grid, bc, nullptr);
    const double dt = cfg.dt(grid);
    const auto& wy = spaces.l2_weights();
    const auto& wt = spaces.time_weights();
    double track = 0.0;
    for (int n = 0; n <= grid.nt; ++n) {
        const double a = 1.0 + cfg.k * n * dt;
        double row = 0.0;
        for (int j = 0; j <= grid.ny; ++j) {
            const double d = v.at(n, j) - (v2 ? v2->at(n, j) : 0.0);
            row += wy[static_cast<std::size_t>(j)] * d * d;
        }
        track += wt[static_cast<std::size_t>(n)] * a * row;
    }
    const auto w2m = spaces.restrict_to(w2, SigmaSupport::Sigma2);
    double pen = sigma2_inner(spaces, w2m, w2m);
    return 0.5 * track + 0.5 * cfg.sigma * pen;
}

TimeSignal grad_J2_w2(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                      const TimeSignal& w1, const TimeSignal& w2, const SpaceTimeField* v2) {
    const auto bc = compose_boundary(spaces, w1, w2);
    const auto v = solve_forward(cfg, grid, bc, nullptr);
    const auto src = tracking_source(cfg, grid, v, v2);
    const std::vector<double> zero(static_cast<std::size_t>(grid.ny) + 1, 0.0);
    const auto p = solve_backward_adjoint(cfg, grid, &src, zero, zero);
    const auto tr = flux_trace_on(spaces, p, SigmaSupport::Sigma2);
    const auto w2m = spaces.restrict_to(w2, SigmaSupport::Sigma2);
    TimeSignal g = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
    for (int n = 0; n <= grid.nt; ++n) g[n] = cfg.sigma * w2m[n] - tr[n];
    return spaces.restrict_to(g, SigmaSupport::Sigma2);
}

Sigma2CgResult solve_sigma2_normal(const ProblemConfig& cfg, const Grid& grid,
                                   const DiscreteSpaces& spaces, const TimeSignal& rhs,
                                   double tol, int max_iter) {
    Sigma2CgResult res;
    res.x = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
    TimeSignal r = spaces.restrict_to(rhs, SigmaSupport::Sigma2);
    const double r0 = sigma2_norm(spaces, r);
    res.history.push_back(r0);
    if (r0 == 0.0) return res;

    TimeSignal p = r;
    double rz = r0 * r0;
    for (int it = 0; it < max_iter; ++it) {
        const auto Ap = normal_apply(cfg, grid, spaces, p);
        const double pAp = sigma2_inner(spaces, p, Ap);
        if (!(pAp > 0.0)) throw SolverError("sigma2 CG: operator lost positivity");
        const double a = rz / pAp;
        for (int n = 0; n <= grid.nt; ++n) {
            res.x[n] += a * p[n];
            r[n] -= a * Ap[n];
        }
        const double rn = sigma2_norm(spaces, r);
        res.history.push_back(rn);
        ++res.iterations;
        if (rn <= tol * r0) return res;
        const double rz_new = rn * rn;
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int n = 0; n <= grid.nt; ++n) p[n] = r[n] + beta * p[n];
    }
    std::ostringstream msg;
    msg << "sigma2 CG: max_iter exceeded, last relative gradient norm "
        << res.history.back() / r0;
    throw SolverError(msg.str());
}

NashSolution solve_follower(const FollowerProblem& problem) {
    const auto& cfg = problem.config;
    const auto& grid = problem.grid;
    cfg.validate();
    cfg.ensure_stable(grid);
    if (!(problem.tol > 0.0)) throw std::invalid_argument("solve_follower: tol must be > 0");
    if (!problem.w1.all_finite()) throw std::invalid_argument("solve_follower: non-finite w1");
    const DiscreteSpaces spaces(cfg, grid);
    const SpaceTimeField* v2 =
        problem.v2_target.values.empty() ? nullptr : &problem.v2_target;

    // Right-hand side: minus the gradient at w2 = 0.
    auto g0 = grad_J2_w2(cfg, grid, spaces, problem.w1, TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2),
                         v2);
    TimeSignal rhs = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
    for (int n = 0; n <= grid.nt; ++n) rhs[n] = -g0[n];

    auto cg = solve_sigma2_normal(cfg, grid, spaces, rhs, problem.tol, problem.max_iter);

    // Closure: regenerate the pair so that the returned objects satisfy the
    // coupling exactly -- w2 is the trace of p over sigma and v is the state
    // of w1 + w2.
    const auto bc_cg = compose_boundary(spaces, problem.w1, cg.x);
    const auto v_cg = solve_forward(cfg, grid, bc_cg, nullptr);
    const auto src_cg = tracking_source(cfg, grid, v_cg, v2);
    const std::vector<double> zero(static_cast<std::size_t>(grid.ny) + 1, 0.0);
    auto p = solve_backward_adjoint(cfg, grid, &src_cg, zero, zero);

    NashSolution sol;
    const auto tr = flux_trace_on(spaces, p, SigmaSupport::Sigma2);
    sol.w2 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
    for (int n = 0; n <= grid.nt; ++n) sol.w2[n] = tr[n] / cfg.sigma;
    sol.w2 = spaces.restrict_to(sol.w2, SigmaSupport::Sigma2);
    sol.v = solve_forward(cfg, grid, compose_boundary(spaces, problem.w1, sol.w2), nullptr);
    sol.p = std::move(p);
    sol.iterations = cg.iterations;
    sol.cg_history = std::move(cg.history);

    const auto g_final = grad_J2_w2(cfg, grid, spaces, problem.w1, sol.w2, v2);
    sol.grad_norm = sigma2_norm(spaces, g_final);
    return sol;
}

std::pair<SpaceTimeField, SpaceTimeField>
solve_optimality_system(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                        const TimeSignal& w1, const SpaceTimeField* v2, double tol,
                        int max_iter) {
    (void)spaces;
    FollowerProblem fp;
    fp.w1 = w1;
    if (v2) fp.v2_target = *v2;
    fp.config = cfg;
    fp.grid = grid;
    fp.tol = tol;
    fp.max_iter = max_iter;
    auto sol = solve_follower(fp);
    return {std::move(sol.v), std::move(sol.p)};
}

NashSolution picard_optimality_system(const ProblemConfig& cfg, const Grid& grid,
                                      const DiscreteSpaces& spaces, const TimeSignal& w1,
                                      const SpaceTimeField* v2, double omega, double tol,
                                      int max_sweeps) {
    const std::vector<double> zero(static_cast<std::size_t>(grid.ny) + 1, 0.0);
    TimeSignal w2 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
    double prev_delta = -1.0;
    double contraction = 0.0;
    bool halved = false;

    NashSolution sol;
    for (int s = 0; s < max_sweeps; ++s) {
        const auto bc = compose_boundary(spaces, w1, w2);
        auto v = solve_forward(cfg, grid, bc, nullptr);
        const auto src = tracking_source(cfg, grid, v, v2);
        auto p = solve_backward_adjoint(cfg, grid, &src, zero, zero);
        const auto tr = flux_trace_on(spaces, p, SigmaSupport::Sigma2);
        TimeSignal w2_new = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
        for (int n = 0; n <= grid.nt; ++n) w2_new[n] = tr[n] / cfg.sigma;

        TimeSignal diff = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
        for (int n = 0; n <= grid.nt; ++n) diff[n] = w2_new[n] - w2[n];
        const double delta = sigma2_norm(spaces, diff);
        if (prev_delta > 0.0) {
            contraction = delta / prev_delta;
            if (contraction > 0.9 && !halved) {
                omega *= 0.5;
                halved = true;
            }
        }
        prev_delta = delta;

        for (int n = 0; n <= grid.nt; ++n) w2[n] = (1.0 - omega) * w2[n] + omega * w2_new[n];
        sol.cg_history.push_back(delta);
        sol.iterations = s + 1;

        const double scale = std::max(1.0, sigma2_norm(spaces, w2));
        if (delta <= tol * scale) {
            sol.w2 = w2;
            sol.v = std::move(v);
            sol.p = std::move(p);
            const auto g = grad_J2_w2(cfg, grid, spaces, w1, w2, v2);
            sol.grad_norm = sigma2_norm(spaces, g);
            return sol;
        }
    }
    std::ostringstream msg;
    msg << "picard optimality system: no convergence in " << max_sweeps
        << " sweeps, contraction estimate " << contraction
        << " (larger sigma contracts faster; the CG follower route is unconditional)";
    throw SolverError(msg.str());
}

}  // namespace snwave::nash
