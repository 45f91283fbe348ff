#include "snwave/validation.hpp"

#include <cmath>

#include "snwave/domain.hpp"
#include "snwave/leader.hpp"
#include "snwave/nash.hpp"
#include "snwave/oracle.hpp"
#include "snwave/rng.hpp"
#include "snwave/spaces.hpp"
#include "snwave/wavesolver.hpp"

namespace snwave::validation {

namespace {

constexpr double kPi = 3.14159265358979323846;

SpaceTimeField random_field(const Grid& g, Rng& rng) {
    SpaceTimeField f = SpaceTimeField::zeros(g);
    for (double& v : f.values) v = rng.uniform_sym();
    return f;
}

double wq_inner(const DiscreteSpaces& sp, const SpaceTimeField& a, const SpaceTimeField& b) {
    double s = 0.0;
    for (int n = 0; n <= sp.nt(); ++n)
        for (int j = 0; j <= sp.ny(); ++j)
            s += sp.time_weights()[static_cast<std::size_t>(n)] *
                 sp.l2_weights()[static_cast<std::size_t>(j)] * a.at(n, j) * b.at(n, j);
    return s;
}

}  // namespace

std::vector<CheckResult> run_suite(std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto add = [&](const std::string& name, double measured, double threshold) {
        out.push_back({name, measured <= threshold, measured, threshold});
    };
    Rng rng(seed);

    // --- coefficient identities -------------------------------------------
    {
        double worst = 0.0;
        for (double k : {0.0, 0.3, 0.6, 0.99})
            for (int j = 0; j <= 16; ++j)
                for (double t : {0.0, 0.4, 2.1}) {
                    const double y = j / 16.0;
                    worst = std::max(worst, std::abs(domain::beta(y, t, k) * domain::alpha(t, k) +
                                                     k * k * y * y - 1.0));
                }
        add("coefficient_identity", worst, 1e-14);
    }
    {
        double worst = std::abs(domain::beta(0.77, 1.3, 0.0) - 1.0);
        worst = std::max(worst, std::abs(domain::gamma(0.77, 0.0)));
        worst = std::max(worst, std::abs(domain::alpha(1.3, 0.0) - 1.0));
        worst = std::max(worst, std::abs(domain::min_control_time(1e-8) - 2.0) / 1e-6 * 1e-14);
        add("cylindrical_limit", worst, 1e-14);
    }
    {
        double worst = 0.0;
        for (double k : {0.1, 0.3, 0.5, 0.9}) {
            const long double kl = k;
            const long double x = 2.0L * kl * (1.0L + kl) / (1.0L - kl);
            const double oracle = static_cast<double>(std::expm1l(x) / kl);
            worst = std::max(worst, std::abs(domain::min_control_time(k) - oracle) / oracle);
        }
        add("min_control_time_oracle", worst, 1e-12);
    }
    {
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const double y = 0.999 * rng.uniform01();
            const double t = 2.0 * rng.uniform01();
            const auto [x, tm] = domain::map_to_moving(y, t, 0.4);
            const auto [yr, tr] = domain::map_to_cylinder(x, tm, 0.4);
            worst = std::max({worst, std::abs(yr - y), std::abs(tr - t)});
        }
        add("map_roundtrip", worst, 1e-14);
    }

    // --- discrete spaces ----------------------------------------------------
    ProblemConfig scfg;
    scfg.k = 0.3;
    scfg.T = 1.0;
    {
        const int ny = 128;
        Grid grid{ny, nt_for_cfl(scfg, ny), 0.5};
        DiscreteSpaces sp(scfg, grid);
        std::vector<double> f(ny + 1), u(ny + 1), h(ny + 1);
        for (int j = 0; j <= ny; ++j) {
            const double y = j / double(ny);
            f[j] = std::sin(kPi * y);
            u[j] = std::cos(2.7 * y) + 0.3 * y;
            h[j] = y * (1.0 - y) * std::sin(3.0 * y);
        }
        h.front() = h.back() = 0.0;
        const auto lap = sp.h01_apply(f);
        const auto back = sp.green_op(lap);
        double worst = 0.0;
        for (int j = 0; j <= ny; ++j) worst = std::max(worst, std::abs(back[j] - f[j]));
        add("green_inverse_pair", worst, 1e-12);

        const double a = sp.duality_pair(u, h);
        const double b = sp.duality_pair_riesz(u, h);
        add("riesz_consistency", std::abs(a - b) / std::max(1.0, std::abs(a)), 1e-12);

        add("l2_norm_sine", std::abs(sp.l2_norm(f) - std::sqrt(0.5)), 4.0 / (ny * double(ny)));
        add("norm_eigen_identity",
            std::abs(sp.hm1_norm(f) * sp.h01_norm(f) - sp.l2_norm(f) * sp.l2_norm(f)),
            8.0 / (ny * double(ny)));
    }

    // --- wave solver ----------------------------------------------------------
    {
        const int ny = 64;
        ProblemConfig cfg0;
        cfg0.k = 0.0;
        cfg0.T = 1.0;
        Grid grid{ny, nt_for_cfl(cfg0, ny), 0.5};
        std::vector<double> v0(ny + 1), v1(ny + 1, 0.0);
        for (int j = 0; j <= ny; ++j) v0[j] = std::sin(kPi * j / double(ny));
        const auto V = wavesolver::solve_forward(cfg0, grid, TimeSignal::zeros(grid.nt), nullptr,
                                                 v0, v1);
        double worst = 0.0;
        for (int j = 0; j <= ny; ++j)
            worst = std::max(worst, std::abs(V.at(grid.nt, j) + std::sin(kPi * j / double(ny))));
        add("standing_wave", worst, 2e-3);
    }
    {
        ProblemConfig cfg;
        cfg.k = 0.35;
        cfg.T = 0.8;
        Grid grid{16, nt_for_cfl(cfg, 16), 0.5};
        DiscreteSpaces sp(cfg, grid);
        const std::vector<double> zero(grid.ny + 1, 0.0);
        double worst = 0.0;
        for (int rep = 0; rep < 3; ++rep) {
            const auto src = random_field(grid, rng);
            const auto w = random_field(grid, rng);
            const auto F =
                wavesolver::solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), &src, zero, zero);
            const auto P = wavesolver::solve_backward_adjoint(cfg, grid, &w, zero, zero);
            const double lhs = wq_inner(sp, F, w);
            const double rhs = wq_inner(sp, src, P);
            worst = std::max(worst,
                             std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)}));
        }
        add("adjoint_dot_test", worst, 1e-12);

        // superposition
        const auto f1 = random_field(grid, rng);
        const auto f2 = random_field(grid, rng);
        SpaceTimeField fs = SpaceTimeField::zeros(grid);
        for (std::size_t i = 0; i < fs.values.size(); ++i)
            fs.values[i] = 0.3 * f1.values[i] - 1.7 * f2.values[i];
        const auto Va =
            wavesolver::solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), &f1, zero, zero);
        const auto Vb =
            wavesolver::solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), &f2, zero, zero);
        const auto Vs =
            wavesolver::solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), &fs, zero, zero);
        double sworst = 0.0, sscale = 0.0;
        for (std::size_t i = 0; i < Vs.values.size(); ++i) {
            sworst = std::max(sworst,
                              std::abs(Vs.values[i] - 0.3 * Va.values[i] + 1.7 * Vb.values[i]));
            sscale = std::max(sscale, std::abs(Vs.values[i]));
        }
        add("superposition", sworst / std::max(1.0, sscale), 1e-13);
    }

    // --- follower ---------------------------------------------------------------
    {
        ProblemConfig cfg;
        cfg.k = 0.3;
        cfg.T = 1.0;
        cfg.sigma = 1.0;
        Grid grid{8, 24, 0.5};
        DiscreteSpaces sp(cfg, grid);
        TimeSignal w1 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma1);
        for (int n = 0; n <= grid.nt; ++n) w1[n] = rng.uniform_sym();
        SpaceTimeField v2 = SpaceTimeField::zeros(grid);
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j) v2.at(n, j) = std::sin(kPi * j * grid.dy());

        // gradient vs central differences
        TimeSignal w2 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
        for (int n = 0; n <= grid.nt; ++n) w2[n] = rng.uniform_sym();
        const auto g = nash::grad_J2_w2(cfg, grid, sp, w1, w2, &v2);
        TimeSignal th = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma2);
        for (int n = 0; n <= grid.nt; ++n) th[n] = rng.uniform_sym();
        const double h = 1e-5;
        TimeSignal wp = w2, wm = w2;
        for (int n = 0; n <= grid.nt; ++n) {
            wp[n] += h * th[n];
            wm[n] -= h * th[n];
        }
        const double fd = (nash::eval_J2(cfg, grid, sp, w1, wp, &v2) -
                           nash::eval_J2(cfg, grid, sp, w1, wm, &v2)) /
                          (2.0 * h);
        double gd = 0.0;
        for (int n = 0; n <= grid.nt; ++n)
            gd += sp.sigma2_weights()[static_cast<std::size_t>(n)] * g[n] * th[n];
        add("gradient_fd", std::abs(fd - gd) / std::max(1.0, std::abs(fd)), 1e-6);

        // dense oracle agreement and first-order condition
        nash::FollowerProblem fp;
        fp.config = cfg;
        fp.grid = grid;
        fp.w1 = w1;
        fp.v2_target = v2;
        fp.tol = 1e-12;
        const auto sol = nash::solve_follower(fp);
        oracle::DenseSystem sys(cfg, grid);
        const auto w2d = oracle::dense_follower(sys, sp, w1, &v2);
        double dn = 0.0, ds = 0.0;
        for (int n = 0; n <= grid.nt; ++n) {
            const double wn = sp.sigma2_weights()[static_cast<std::size_t>(n)];
            dn += wn * (sol.w2[n] - w2d[n]) * (sol.w2[n] - w2d[n]);
            ds += wn * w2d[n] * w2d[n];
        }
        add("follower_dense_agreement", std::sqrt(dn / std::max(ds, 1e-30)), 1e-8);

        const auto tr = wavesolver::flux_trace_on(sp, sol.p, SigmaSupport::Sigma2);
        double res = 0.0, scale = 0.0;
        for (int n = 0; n <= grid.nt; ++n) {
            res = std::max(res, std::abs(cfg.sigma * sol.w2[n] - tr[n]));
            scale = std::max(scale, std::abs(tr[n]));
        }
        add("follower_formula_residual", res / std::max(1.0, scale), 1e-9);

        // Nash inequality with 20 perturbations
        const double jstar = nash::eval_J2(cfg, grid, sp, w1, sol.w2, &v2);
        double worst_gain = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            TimeSignal pert = sol.w2;
            for (int n = 0; n <= grid.nt; ++n) pert[n] += 0.1 * rng.uniform_sym();
            pert = sp.restrict_to(pert, SigmaSupport::Sigma2);
            worst_gain =
                std::max(worst_gain, jstar - nash::eval_J2(cfg, grid, sp, w1, pert, &v2));
        }
        add("nash_inequality", worst_gain, 1e-14);
    }

    // --- leader identities --------------------------------------------------
    {
        ProblemConfig cfg;
        cfg.k = 0.3;
        cfg.T = 2.0;
        cfg.sigma = 10.0;
        Grid grid{12, nt_for_cfl(cfg, 12), 0.5};
        DiscreteSpaces sp(cfg, grid);
        leader::LeaderOptions opts;
        opts.astar_tol = 1e-12;
        opts.follower_tol = 1e-12;

        double worst_adj = 0.0, worst_green = 0.0;
        for (int rep = 0; rep < 3; ++rep) {
            TimeSignal w1 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma1);
            for (int n = 0; n <= grid.nt; ++n) w1[n] = rng.uniform_sym();
            DualVariable f = DualVariable::zeros(grid.ny);
            for (int m = 1; m <= 4; ++m) {
                const double c = rng.uniform_sym() / m;
                for (int j = 1; j < grid.ny; ++j)
                    f.f0[j] += c * std::sin(m * kPi * j / double(grid.ny));
            }
            for (int j = 0; j <= grid.ny; ++j) f.f1[j] = rng.uniform_sym();

            const auto Aw = leader::apply_A(cfg, grid, sp, w1, opts);
            const auto Asf = leader::apply_Astar(cfg, grid, sp, f, opts);
            const double lhs = sp.duality_pair(Aw.hm1, f.f0) + sp.l2_inner(Aw.l2, f.f1);
            double rhs = 0.0;
            for (int n = 0; n <= grid.nt; ++n)
                rhs += sp.sigma1_weights()[static_cast<std::size_t>(n)] * Asf.w_trace[n] * w1[n];
            worst_adj = std::max(worst_adj, std::abs(lhs - rhs) /
                                                std::max({1.0, std::abs(lhs), std::abs(rhs)}));

            nash::FollowerProblem fp;
            fp.config = cfg;
            fp.grid = grid;
            fp.w1 = w1;
            fp.tol = 1e-12;
            const auto gq = nash::solve_follower(fp);
            double gl = 0.0;
            const double dt = cfg.dt(grid);
            for (int n = 0; n <= grid.nt; ++n) {
                const double a = 1.0 + cfg.k * n * dt;
                for (int j = 0; j <= grid.ny; ++j)
                    gl += sp.time_weights()[static_cast<std::size_t>(n)] *
                          sp.l2_weights()[static_cast<std::size_t>(j)] * a * gq.v.at(n, j) *
                          Asf.psi.at(n, j);
            }
            const auto tq = wavesolver::flux_trace_on(sp, gq.p, SigmaSupport::Sigma2);
            const auto tphi = wavesolver::flux_trace_on(sp, Asf.phi, SigmaSupport::Sigma2);
            double gr = 0.0;
            for (int n = 0; n <= grid.nt; ++n)
                gr += sp.sigma2_weights()[static_cast<std::size_t>(n)] * tq[n] * tphi[n];
            gr *= -1.0 / cfg.sigma;
            worst_green = std::max(
                worst_green, std::abs(gl - gr) / std::max({1.0, std::abs(gl), std::abs(gr)}));
        }
        add("adjoint_identity", worst_adj, 1e-8);
        add("green_identity", worst_green, 1e-8);
    }

    // --- picard cross-route and weak duality ---------------------------------
    {
        ProblemConfig cfg;
        cfg.k = 0.2;
        cfg.T = 1.0;
        cfg.sigma = 10.0;
        Grid grid{16, nt_for_cfl(cfg, 16), 0.5};
        DiscreteSpaces sp(cfg, grid);
        TimeSignal w1 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma1);
        for (int n = 0; n <= grid.nt; ++n)
            w1[n] = std::sin(kPi * n * cfg.dt(grid) / cfg.T);
        SpaceTimeField v2 = SpaceTimeField::zeros(grid);
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j) v2.at(n, j) = std::sin(kPi * j * grid.dy());

        const auto [vc, pc] = nash::solve_optimality_system(cfg, grid, sp, w1, &v2, 1e-11);
        const auto pic = nash::picard_optimality_system(cfg, grid, sp, w1, &v2, 1.0, 1e-10, 200);
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < vc.values.size(); ++i) {
            worst = std::max(worst, std::abs(vc.values[i] - pic.v.values[i]));
            scale = std::max(scale, std::abs(vc.values[i]));
        }
        add("picard_vs_cg", worst / std::max(1.0, scale), 1e-7);
    }
    {
        // dense KKT duality gap on a controllable tiny grid
        ProblemConfig cfg;
        cfg.k = 0.3;
        cfg.T = 7.0;
        cfg.sigma = 10.0;
        Grid grid{8, nt_for_cfl(cfg, 8), 0.5};
        DiscreteSpaces sp(cfg, grid);
        TimeSignal wbar = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma1);
        for (int n = 0; n <= grid.nt; ++n)
            wbar[n] = std::sin(kPi * n * cfg.dt(grid) / cfg.T);
        const auto [vb, pb] = nash::solve_optimality_system(cfg, grid, sp, wbar, nullptr, 1e-12);
        const auto tp = wavesolver::terminal_pair(cfg, grid, vb);
        oracle::DenseSystem sys(cfg, grid);
        const auto kkt =
            oracle::dense_leader_kkt(sys, sp, tp.position, tp.velocity, 0.0, 0.0, nullptr);
        add("dense_kkt_gap", std::abs(kkt.primal - kkt.dual) / std::max(1.0, kkt.primal), 1e-6);
    }

    return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace snwave::validation
