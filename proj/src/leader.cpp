#include "snwave/leader.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "snwave/rng.hpp"
#include "snwave/wavesolver.hpp"

namespace snwave::leader {

namespace {

using wavesolver::flux_trace_on;
using wavesolver::solve_backward_adjoint_shifted;
using wavesolver::solve_forward;
using wavesolver::terminal_pair;

double dv_inner(const DiscreteSpaces& sp, const DualVariable& a, const DualVariable& b) {
    return sp.h01_inner(a.f0, b.f0) + sp.l2_inner(a.f1, b.f1);
}

double dv_norm(const DiscreteSpaces& sp, const DualVariable& a) {
    return std::sqrt(dv_inner(sp, a, a));
}

void dv_axpy(DualVariable& y, double a, const DualVariable& x) {
    for (std::size_t i = 0; i < y.f0.size(); ++i) y.f0[i] += a * x.f0[i];
    for (std::size_t i = 0; i < y.f1.size(); ++i) y.f1[i] += a * x.f1[i];
}

double sigma1_inner(const DiscreteSpaces& sp, const TimeSignal& a, const TimeSignal& b) {
    double s = 0.0;
    for (int n = 0; n <= sp.nt(); ++n)
        s += sp.sigma1_weights()[static_cast<std::size_t>(n)] * a[n] * b[n];
    return s;
}

// Riesz-lift a controllability image into the dual space geometry.
DualVariable riesz(const DiscreteSpaces& sp, const APair& ap) {
    DualVariable out;
    out.f0 = sp.green_op(ap.hm1);
    out.f1 = ap.l2;
    return out;
}

DualVariable lambda_apply(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& sp,
                          const DualVariable& f, const LeaderOptions& opts) {
    const auto as = apply_Astar(cfg, grid, sp, f, opts);
    const auto ap = apply_A(cfg, grid, sp, as.w_trace, opts);
    return riesz(sp, ap);
}

struct ResidualSplit {
    double l2, hm1, combined;
};
ResidualSplit split_norms(const DiscreteSpaces& sp, const DualVariable& r) {
    ResidualSplit s{};
    s.l2 = sp.l2_norm(r.f1);
    s.hm1 = sp.h01_norm(r.f0);
    s.combined = std::sqrt(s.l2 * s.l2 + s.hm1 * s.hm1);
    return s;
}

}  // namespace

BasePair solve_base_pair(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                         const SpaceTimeField* v2, const LeaderOptions& opts) {
    nash::FollowerProblem fp;
    fp.config = cfg;
    fp.grid = grid;
    fp.w1 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma1);
    if (v2) fp.v2_target = *v2;
    fp.tol = opts.follower_tol;
    fp.max_iter = opts.follower_max_iter;
    auto sol = nash::solve_follower(fp);
    BasePair bp;
    bp.terminal = terminal_pair(cfg, grid, sol.v);
    bp.v0_field = std::move(sol.v);
    bp.p0_field = std::move(sol.p);
    (void)spaces;
    return bp;
}

APair apply_A(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
              const TimeSignal& w1, const LeaderOptions& opts) {
    nash::FollowerProblem fp;
    fp.config = cfg;
    fp.grid = grid;
    fp.w1 = spaces.restrict_to(w1, SigmaSupport::Sigma1);
    fp.tol = opts.follower_tol;
    fp.max_iter = opts.follower_max_iter;
    const auto sol = nash::solve_follower(fp);
    const auto tp = terminal_pair(cfg, grid, sol.v);
    APair out;
    out.hm1.resize(tp.position.size());
    out.l2.resize(tp.position.size());
    for (std::size_t j = 0; j < tp.position.size(); ++j) {
        out.hm1[j] = tp.velocity[j] + cfg.delta * tp.position[j];
        out.l2[j] = -tp.position[j];
    }
    return out;
}

AstarResult apply_Astar(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                        const DualVariable& f, const LeaderOptions& opts) {
    if (f.f0.size() != static_cast<std::size_t>(grid.ny) + 1 ||
        f.f1.size() != static_cast<std::size_t>(grid.ny) + 1)
        throw std::invalid_argument("apply_Astar: dual variable size mismatch");
    if (std::abs(f.f0.front()) > 0.0 || std::abs(f.f0.back()) > 0.0)
        throw std::invalid_argument("apply_Astar: f0 must vanish at the endpoints");

    auto phi_sweep = [&](const SpaceTimeField* psi) {
        SpaceTimeField src = SpaceTimeField::zeros(grid);
        if (psi) {
            const double dt = cfg.dt(grid);
            for (int n = 0; n <= grid.nt; ++n) {
                const double a = 1.0 + cfg.k * n * dt;
                for (int j = 0; j <= grid.ny; ++j) src.at(n, j) = a * psi->at(n, j);
            }
        }
        return solve_backward_adjoint_shifted(cfg, grid, &src, f.f0, f.f1, cfg.delta);
    };

    AstarResult res;
    if (opts.astar_method == AstarMethod::NormalCg) {
        // trace fixed point (sigma I + N) xi = trace(phi with terminal data only)
        const auto phi0 = phi_sweep(nullptr);
        auto tr0 = flux_trace_on(spaces, phi0, SigmaSupport::Sigma2);
        auto cg = nash::solve_sigma2_normal(cfg, grid, spaces, tr0, opts.astar_tol,
                                            opts.astar_max_iter);
        TimeSignal xi = spaces.restrict_to(cg.x, SigmaSupport::Sigma2);
        res.psi = solve_forward(cfg, grid, xi, nullptr);
        res.phi = phi_sweep(&res.psi);
        res.iterations = cg.iterations;
    } else {
        // Picard: psi^0 = 0, alternate phi- and psi-solves with relaxation.
        TimeSignal xi = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
        double omega = opts.picard_omega;
        bool halved = false;
        double prev_delta = -1.0;
        SpaceTimeField psi = SpaceTimeField::zeros(grid);
        bool have_psi = false;
        int it = 0;
        for (;; ++it) {
            if (it >= opts.astar_max_iter) {
                std::ostringstream msg;
                msg << "apply_Astar: Picard coupling did not converge in " << opts.astar_max_iter
                    << " sweeps (contraction estimate " << res.contraction
                    << "); a larger sigma contracts faster, or use the Krylov fallback on the "
                       "trace fixed-point equation (AstarMethod::NormalCg)";
                throw SolverError(msg.str());
            }
            const auto phi = phi_sweep(have_psi ? &psi : nullptr);
            const auto tr = flux_trace_on(spaces, phi, SigmaSupport::Sigma2);
            TimeSignal xi_new = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
            for (int n = 0; n <= grid.nt; ++n) xi_new[n] = tr[n] / cfg.sigma;

            double delta2 = 0.0, scale2 = 0.0;
            for (int n = 0; n <= grid.nt; ++n) {
                const double w = spaces.sigma2_weights()[static_cast<std::size_t>(n)];
                delta2 += w * (xi_new[n] - xi[n]) * (xi_new[n] - xi[n]);
                scale2 += w * xi_new[n] * xi_new[n];
            }
            const double delta = std::sqrt(delta2);
            if (prev_delta > 0.0) {
                res.contraction = delta / prev_delta;
                if (res.contraction > 0.9 && !halved) {
                    omega *= 0.5;
                    halved = true;
                }
            }
            prev_delta = delta;
            for (int n = 0; n <= grid.nt; ++n) xi[n] = (1.0 - omega) * xi[n] + omega * xi_new[n];

            if (delta <= opts.astar_tol * std::max(1.0, std::sqrt(scale2))) {
                res.phi = phi;
                res.iterations = it + 1;
                break;
            }
            psi = solve_forward(cfg, grid, spaces.restrict_to(xi, SigmaSupport::Sigma2), nullptr);
            have_psi = true;
        }
        res.psi = solve_forward(cfg, grid, spaces.restrict_to(xi, SigmaSupport::Sigma2), nullptr);
    }

    // A* f = -(1/alpha^2) phi_y restricted to Sigma_1
    const auto tr1 = flux_trace_on(spaces, res.phi, SigmaSupport::Sigma1);
    res.w_trace = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma1);
    for (int n = 0; n <= grid.nt; ++n) res.w_trace[n] = -tr1[n];
    res.w_trace = spaces.restrict_to(res.w_trace, SigmaSupport::Sigma1);
    return res;
}

double eval_Theta(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                  const DualVariable& f, const TargetSpec& target, const TerminalPair& base_terminal,
                  const LeaderOptions& opts, const std::vector<double>* leader_gT) {
    if (cfg.delta > 0.0 && leader_gT == nullptr)
        throw std::invalid_argument(
            "eval_Theta: delta > 0 couples the dual to the primal iterate; pass the current "
            "leader's g(T)");
    const auto as = apply_Astar(cfg, grid, spaces, f, opts);
    const double quad = 0.5 * sigma1_inner(spaces, as.w_trace, as.w_trace);

    double lin = 0.0;
    for (int j = 0; j <= grid.ny; ++j) {
        const double wy = spaces.l2_weights()[static_cast<std::size_t>(j)];
        lin += wy * (target.v0_target[static_cast<std::size_t>(j)] -
                     base_terminal.position[static_cast<std::size_t>(j)]) *
               f.f1[static_cast<std::size_t>(j)];
        double shift = target.v1_target[static_cast<std::size_t>(j)] -
                       base_terminal.velocity[static_cast<std::size_t>(j)];
        if (leader_gT) shift += cfg.delta * (*leader_gT)[static_cast<std::size_t>(j)];
        lin -= wy * shift * f.f0[static_cast<std::size_t>(j)];
    }
    const double balls = target.rho1 * spaces.h01_norm(f.f0) + target.rho0 * spaces.l2_norm(f.f1);
    return quad + lin + balls;
}

namespace {

using LambdaFn = std::function<DualVariable(const DualVariable&)>;

struct CrOutcome {
    DualVariable f;
    int iterations = 0;
    bool converged = false;
};

// Conjugate residual iteration on Lambda f = b in the dual inner product;
// minimizes the combined terminal residual over the Krylov space, so the
// recorded history never increases.
CrOutcome conjugate_residual(const DiscreteSpaces& spaces, const LambdaFn& lam,
                             const DualVariable& b, double tol, int max_iter,
                             MinimizeResult* hist) {
    CrOutcome out;
    out.f = DualVariable::zeros(spaces.ny());
    DualVariable r = b;
    auto push = [&](const DualVariable& res) {
        const auto sn = split_norms(spaces, res);
        if (hist) {
            hist->hist_l2.push_back(sn.l2);
            hist->hist_hm1.push_back(sn.hm1);
            hist->hist_combined.push_back(sn.combined);
        }
        return sn.combined;
    };
    const double r0 = push(r);
    if (r0 == 0.0) {
        out.converged = true;
        return out;
    }
    DualVariable p = r;
    DualVariable Ar = lam(r);
    DualVariable Ap = Ar;
    double rAr = dv_inner(spaces, r, Ar);
    for (int it = 0; it < max_iter; ++it) {
        const double ApAp = dv_inner(spaces, Ap, Ap);
        if (!(ApAp > 0.0)) break;  // residual in the numerical null space
        const double alpha = rAr / ApAp;
        dv_axpy(out.f, alpha, p);
        dv_axpy(r, -alpha, Ap);
        const double rn = push(r);
        out.iterations = it + 1;
        if (rn <= tol * r0) {
            out.converged = true;
            return out;
        }
        Ar = lam(r);
        const double rAr_new = dv_inner(spaces, r, Ar);
        const double beta = rAr_new / rAr;
        rAr = rAr_new;
        for (std::size_t i = 0; i < p.f0.size(); ++i) p.f0[i] = r.f0[i] + beta * p.f0[i];
        for (std::size_t i = 0; i < p.f1.size(); ++i) p.f1[i] = r.f1[i] + beta * p.f1[i];
        for (std::size_t i = 0; i < Ap.f0.size(); ++i) Ap.f0[i] = Ar.f0[i] + beta * Ap.f0[i];
        for (std::size_t i = 0; i < Ap.f1.size(); ++i) Ap.f1[i] = Ar.f1[i] + beta * Ap.f1[i];
    }
    return out;
}

// Dense image of Lambda on the dual dof (f0 interior, f1 all nodes); worth
// the assembly cost whenever more applies follow than the dimension.
class AssembledLambda {
  public:
    AssembledLambda(const DiscreteSpaces& spaces, const LambdaFn& lam, int J)
        : spaces_(spaces), J_(J), m0_(J - 1), m_(2 * J), a_(static_cast<std::size_t>(m_) * m_) {
        std::vector<double> col(static_cast<std::size_t>(m_));
        for (int c = 0; c < m_; ++c) {
            DualVariable e = DualVariable::zeros(J);
            unpack_basis(c, e);
            pack(lam(e), col);
            for (int r = 0; r < m_; ++r) at(r, c) = col[static_cast<std::size_t>(r)];
        }
        // Self-adjointness of the operator lives in the H01 x L2 inner
        // product, not in these packed coordinates; the raw column image is
        // kept as assembled.
    }

    DualVariable operator()(const DualVariable& f) const {
        std::vector<double> x(static_cast<std::size_t>(m_)), y(static_cast<std::size_t>(m_), 0.0);
        pack(f, x);
        for (int r = 0; r < m_; ++r) {
            double s = 0.0;
            const double* row = a_.data() + static_cast<std::size_t>(r) * m_;
            for (int c = 0; c < m_; ++c) s += row[c] * x[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(r)] = s;
        }
        DualVariable out = DualVariable::zeros(J_);
        for (int j = 1; j < J_; ++j) out.f0[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(j - 1)];
        for (int j = 0; j <= J_; ++j) out.f1[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(m0_ + j)];
        return out;
    }

  private:
    double& at(int r, int c) { return a_[static_cast<std::size_t>(r) * m_ + c]; }
    double at(int r, int c) const { return a_[static_cast<std::size_t>(r) * m_ + c]; }

    void pack(const DualVariable& f, std::vector<double>& x) const {
        for (int j = 1; j < J_; ++j) x[static_cast<std::size_t>(j - 1)] = f.f0[static_cast<std::size_t>(j)];
        for (int j = 0; j <= J_; ++j) x[static_cast<std::size_t>(m0_ + j)] = f.f1[static_cast<std::size_t>(j)];
    }
    void unpack_basis(int c, DualVariable& e) const {
        if (c < m0_)
            e.f0[static_cast<std::size_t>(c + 1)] = 1.0;
        else
            e.f1[static_cast<std::size_t>(c - m0_)] = 1.0;
    }

    const DiscreteSpaces& spaces_;
    int J_, m0_, m_;
    std::vector<double> a_;
};

}  // namespace

MinimizeResult minimize_Theta(const ProblemConfig& cfg, const Grid& grid,
                              const DiscreteSpaces& spaces, const TargetSpec& target,
                              const TerminalPair& base_terminal, ThetaMode mode,
                              const LeaderOptions& opts) {
    const int J = grid.ny;
    if (static_cast<int>(target.v0_target.size()) != J + 1 ||
        static_cast<int>(target.v1_target.size()) != J + 1)
        throw std::invalid_argument("minimize_Theta: target size mismatch");
    if (mode == ThetaMode::Cg && (target.rho0 != 0.0 || target.rho1 != 0.0))
        throw std::invalid_argument("minimize_Theta: cg mode requires rho0 = rho1 = 0");

    // b = Riesz { G(v1 - v0'(T)), -(v0 - v0(T)) }
    std::vector<double> d1(static_cast<std::size_t>(J) + 1);
    DualVariable b = DualVariable::zeros(J);
    for (int j = 0; j <= J; ++j) {
        d1[static_cast<std::size_t>(j)] = target.v1_target[static_cast<std::size_t>(j)] -
                                          base_terminal.velocity[static_cast<std::size_t>(j)];
        b.f1[static_cast<std::size_t>(j)] = -(target.v0_target[static_cast<std::size_t>(j)] -
                                              base_terminal.position[static_cast<std::size_t>(j)]);
    }
    b.f0 = spaces.green_op(d1);

    MinimizeResult res;
    res.f = DualVariable::zeros(J);
    const LambdaFn lam_free = [&](const DualVariable& f) {
        return lambda_apply(cfg, grid, spaces, f, opts);
    };

    if (mode == ThetaMode::Cg) {
        auto cr = conjugate_residual(spaces, lam_free, b, opts.tol, opts.max_iter, &res);
        res.f = std::move(cr.f);
        res.iterations = cr.iterations;
        res.converged = cr.converged;
        if (!res.converged && !opts.allow_plateau) {
            std::ostringstream msg;
            msg << "minimize_Theta(cg): max_iter exceeded, relative residual "
                << res.hist_combined.back() / res.hist_combined.front();
            throw SolverError(msg.str());
        }
        return res;
    }

    // rho > 0: proximal gradient with the exact block shrinkage prox, FISTA
    // extrapolation with gradient restart, a power-iteration step size, and
    // a warm start from the smooth normal system at the ball scale.  The
    // dual space is low-dimensional, so the operator image is assembled once
    // and the iteration itself costs dense matrix-vector products.
    LambdaFn lam = lam_free;
    std::unique_ptr<AssembledLambda> assembled;
    if (opts.dense_prox_operator && 2 * J <= opts.dense_dim_limit) {
        assembled = std::make_unique<AssembledLambda>(spaces, lam_free, J);
        lam = [&ref = *assembled](const DualVariable& f) { return ref(f); };
    }

    Rng rng(12345);
    DualVariable z = DualVariable::zeros(J);
    for (int j = 1; j < J; ++j) z.f0[static_cast<std::size_t>(j)] = rng.uniform_sym();
    for (int j = 0; j <= J; ++j) z.f1[static_cast<std::size_t>(j)] = rng.uniform_sym();
    {
        const double zn = dv_norm(spaces, z);
        for (auto& v : z.f0) v /= zn;
        for (auto& v : z.f1) v /= zn;
    }
    double lam_max = 0.0;
    for (int it = 0; it < opts.power_iters; ++it) {
        auto y = lam(z);
        const double nn = dv_norm(spaces, y);
        if (nn == 0.0) break;
        lam_max = nn;  // ||Lambda z|| with ||z|| = 1
        for (auto& v : y.f0) v /= nn;
        for (auto& v : y.f1) v /= nn;
        z = y;
    }
    const double tau = 0.9 / std::max(lam_max, 1e-30);
    res.step = tau;

    const double ball_scale = std::sqrt(target.rho0 * target.rho0 + target.rho1 * target.rho1);
    if (opts.warm_start && ball_scale > 0.0) {
        const double warm_tol = 0.5 * ball_scale / std::max(split_norms(spaces, b).combined, 1e-300);
        if (warm_tol < 1.0) {
            auto cr = conjugate_residual(spaces, lam, b, warm_tol, opts.max_iter, nullptr);
            res.f = std::move(cr.f);
        }
    }

    auto prox_step = [&](const DualVariable& at, const DualVariable& grad_at) {
        DualVariable znew = at;
        dv_axpy(znew, -tau, grad_at);
        const double n0 = spaces.h01_norm(znew.f0);
        const double n1 = spaces.l2_norm(znew.f1);
        const double s0 = n0 > 0.0 ? std::max(0.0, 1.0 - tau * target.rho1 / n0) : 0.0;
        const double s1 = n1 > 0.0 ? std::max(0.0, 1.0 - tau * target.rho0 / n1) : 0.0;
        for (auto& v : znew.f0) v *= s0;
        for (auto& v : znew.f1) v *= s1;
        return znew;
    };
    auto smooth_grad = [&](const DualVariable& at) {
        auto g = lam(at);
        dv_axpy(g, -1.0, b);
        return g;
    };

    const double bscale = std::max(dv_norm(spaces, b), 1e-300);
    DualVariable y = res.f;
    DualVariable f_prev = res.f;
    double t_acc = 1.0;
    for (int it = 0; it < opts.prox_max_iter; ++it) {
        const auto gy = smooth_grad(y);
        {
            DualVariable r = gy;
            for (auto& v : r.f0) v = -v;
            for (auto& v : r.f1) v = -v;
            const auto sn = split_norms(spaces, r);
            res.hist_l2.push_back(sn.l2);
            res.hist_hm1.push_back(sn.hm1);
            res.hist_combined.push_back(sn.combined);
        }
        DualVariable f_new = prox_step(y, gy);
        res.iterations = it + 1;

        // gradient-based restart: drop momentum when it points uphill
        DualVariable step = f_new;
        dv_axpy(step, -1.0, res.f);
        DualVariable ydiff = y;
        dv_axpy(ydiff, -1.0, f_new);
        if (dv_inner(spaces, ydiff, step) > 0.0) {
            t_acc = 1.0;
            y = res.f;
            const auto g2 = smooth_grad(y);
            f_new = prox_step(y, g2);
            step = f_new;
            dv_axpy(step, -1.0, res.f);
        }

        const double fp_res = dv_norm(spaces, step) / (tau * bscale);
        f_prev = res.f;
        res.f = f_new;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
        y = res.f;
        DualVariable mom = res.f;
        dv_axpy(mom, -1.0, f_prev);
        dv_axpy(y, (t_acc - 1.0) / t_next, mom);
        t_acc = t_next;

        if (fp_res <= opts.tol) {
            // confirm with the true fixed-point residual at the iterate
            const auto gf = smooth_grad(res.f);
            auto fixed = prox_step(res.f, gf);
            dv_axpy(fixed, -1.0, res.f);
            if (dv_norm(spaces, fixed) / (tau * bscale) <= opts.tol) {
                res.converged = true;
                return res;
            }
        }
    }
    if (!opts.allow_plateau) {
        std::ostringstream msg;
        msg << "minimize_Theta(prox): max_iter exceeded after " << res.iterations << " iterations";
        throw SolverError(msg.str());
    }
    return res;
}
TimeSignal recover_leader(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                          const DualVariable& f_star, const LeaderOptions& opts) {
    return apply_Astar(cfg, grid, spaces, f_star, opts).w_trace;
}

double check_variational_inequality(const ProblemConfig& cfg, const Grid& grid,
                                    const DiscreteSpaces& spaces, const DualVariable& f_star,
                                    const TargetSpec& target, const TerminalPair& achieved,
                                    int n_samples, const LeaderOptions& opts) {
    (void)cfg;
    const int J = grid.ny;
    std::vector<double> rv(static_cast<std::size_t>(J) + 1), rp(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        rv[static_cast<std::size_t>(j)] = achieved.velocity[static_cast<std::size_t>(j)] -
                                          target.v1_target[static_cast<std::size_t>(j)];
        rp[static_cast<std::size_t>(j)] = achieved.position[static_cast<std::size_t>(j)] -
                                          target.v0_target[static_cast<std::size_t>(j)];
    }
    const double nf0 = spaces.h01_norm(f_star.f0);
    const double nf1 = spaces.l2_norm(f_star.f1);

    // Problem magnitude: target norms, ball radii, and the achieved residual.
    const double problem_scale = spaces.l2_norm(target.v0_target) +
                                 spaces.hm1_norm(target.v1_target) + target.rho0 + target.rho1 +
                                 spaces.l2_norm(rp) + spaces.hm1_norm(rv) + 1e-300;

    Rng rng(opts.vi_seed);
    const double ref = std::max({1.0, nf0, nf1});
    auto lhs_of = [&](const DualVariable& fh) {
        DualVariable d = fh;
        dv_axpy(d, -1.0, f_star);
        const double t1 = spaces.duality_pair(rv, d.f0);
        const double t2 = spaces.l2_inner(rp, d.f1);
        const double t3 = target.rho1 * (spaces.h01_norm(fh.f0) - nf0);
        const double t4 = target.rho0 * (spaces.l2_norm(fh.f1) - nf1);
        const double pert = spaces.h01_norm(d.f0) + spaces.l2_norm(d.f1) + 1e-300;
        return (t1 - t2 + t3 + t4) / (problem_scale * pert);
    };

    double worst = 0.0;
    // fhat = 0, f*, 2 f*
    DualVariable zero = DualVariable::zeros(J);
    worst = std::min(worst, lhs_of(zero));
    worst = std::min(worst, lhs_of(f_star));
    DualVariable twice = f_star;
    dv_axpy(twice, 1.0, f_star);
    worst = std::min(worst, lhs_of(twice));

    constexpr double kPi = 3.14159265358979323846;
    for (int s = 0; s < n_samples; ++s) {
        DualVariable fh = DualVariable::zeros(J);
        for (int m = 1; m <= 6; ++m) {
            const double c = rng.uniform_sym() * ref / m;
            for (int j = 1; j < J; ++j)
                fh.f0[static_cast<std::size_t>(j)] += c * std::sin(m * kPi * j / double(J));
        }
        for (int j = 0; j <= J; ++j) fh.f1[static_cast<std::size_t>(j)] = rng.uniform_sym() * ref;
        worst = std::min(worst, lhs_of(fh));
    }
    return worst;
}

DualityReport duality_report(const DiscreteSpaces& spaces, const TimeSignal& w1_star,
                             double theta_value, const TargetSpec& target, double residual_l2,
                             double residual_hm1, double tol_scale) {
    DualityReport rep;
    rep.primal = nash::eval_J(spaces, w1_star);
    rep.dual = -theta_value;
    const double scale = std::max({1.0, std::abs(rep.primal), std::abs(rep.dual)});
    const double slack = tol_scale * scale;
    rep.feasible = (residual_l2 <= target.rho0 + std::max(slack, 1e-6)) &&
                   (residual_hm1 <= target.rho1 + std::max(slack, 1e-6));
    rep.gap = rep.primal - rep.dual;
    rep.gap_rel = rep.gap / std::max(std::abs(rep.primal), 1e-300);
    rep.weak_duality_ok = rep.primal >= rep.dual - 10.0 * tol_scale * scale;
    return rep;
}

LeaderSolution solve_leader(const ProblemConfig& cfg, const Grid& grid,
                            const DiscreteSpaces& spaces, const SpaceTimeField* v2,
                            const TargetSpec& target, const LeaderOptions& opts, int vi_samples) {
    const auto base = solve_base_pair(cfg, grid, spaces, v2, opts);
    const ThetaMode mode =
        (target.rho0 == 0.0 && target.rho1 == 0.0) ? ThetaMode::Cg : ThetaMode::Prox;
    auto min_res = minimize_Theta(cfg, grid, spaces, target, base.terminal, mode, opts);

    LeaderSolution sol;
    sol.f_star = min_res.f;
    sol.converged = min_res.converged;
    sol.iterations = min_res.iterations;
    sol.hist_l2 = std::move(min_res.hist_l2);
    sol.hist_hm1 = std::move(min_res.hist_hm1);
    sol.hist_combined = std::move(min_res.hist_combined);

    sol.w1_star = recover_leader(cfg, grid, spaces, sol.f_star, opts);
    sol.theta_value = eval_Theta(cfg, grid, spaces, sol.f_star, target, base.terminal, opts);

    // closed loop: Nash state under the recovered leader
    const auto [v, p] = nash::solve_optimality_system(cfg, grid, spaces, sol.w1_star, v2,
                                                      opts.follower_tol, opts.follower_max_iter);
    sol.achieved = terminal_pair(cfg, grid, v);

    std::vector<double> dpos(static_cast<std::size_t>(grid.ny) + 1),
        dvel(static_cast<std::size_t>(grid.ny) + 1);
    for (int j = 0; j <= grid.ny; ++j) {
        dpos[static_cast<std::size_t>(j)] = sol.achieved.position[static_cast<std::size_t>(j)] -
                                            target.v0_target[static_cast<std::size_t>(j)];
        dvel[static_cast<std::size_t>(j)] = sol.achieved.velocity[static_cast<std::size_t>(j)] -
                                            target.v1_target[static_cast<std::size_t>(j)];
    }
    sol.residual_l2 = spaces.l2_norm(dpos);
    sol.residual_hm1 = spaces.hm1_norm(dvel);

    const auto rep = duality_report(spaces, sol.w1_star, sol.theta_value, target, sol.residual_l2,
                                    sol.residual_hm1);
    sol.primal_value = rep.primal;
    sol.dual_value = rep.dual;
    sol.gap = rep.gap;
    sol.feasible = rep.feasible;

    sol.vi_worst = check_variational_inequality(cfg, grid, spaces, sol.f_star, target,
                                                sol.achieved, vi_samples, opts);
    return sol;
}

}  // namespace snwave::leader
