#include "snwave/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "snwave/wavesolver.hpp"

namespace snwave::oracle {

std::vector<double> DenseMatrix::apply(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols) throw std::invalid_argument("DenseMatrix::apply size");
    std::vector<double> y(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        const double* row = a.data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) s += row[c] * x[static_cast<std::size_t>(c)];
        y[static_cast<std::size_t>(r)] = s;
    }
    return y;
}

std::vector<double> DenseMatrix::apply_transpose(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != rows)
        throw std::invalid_argument("DenseMatrix::apply_transpose size");
    std::vector<double> y(static_cast<std::size_t>(cols), 0.0);
    for (int r = 0; r < rows; ++r) {
        const double xr = x[static_cast<std::size_t>(r)];
        if (xr == 0.0) continue;
        const double* row = a.data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) y[static_cast<std::size_t>(c)] += row[c] * xr;
    }
    return y;
}

DenseLu::DenseLu(DenseMatrix A) : lu_(std::move(A)) {
    const int n = lu_.rows;
    if (lu_.cols != n) throw std::invalid_argument("DenseLu: matrix not square");
    double scale = 0.0;
    for (double v : lu_.a) scale = std::max(scale, std::abs(v));
    piv_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) piv_[static_cast<std::size_t>(i)] = i;
    for (int c = 0; c < n; ++c) {
        int best = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(lu_.at(r, c)) > std::abs(lu_.at(best, c))) best = r;
        if (std::abs(lu_.at(best, c)) <= 1e-14 * std::max(scale, 1e-300))
            throw SolverError("dense_solve: numerically singular system");
        if (best != c) {
            for (int cc = 0; cc < n; ++cc) std::swap(lu_.at(best, cc), lu_.at(c, cc));
            std::swap(piv_[static_cast<std::size_t>(best)], piv_[static_cast<std::size_t>(c)]);
        }
        const double inv = 1.0 / lu_.at(c, c);
        for (int r = c + 1; r < n; ++r) {
            const double m = lu_.at(r, c) * inv;
            lu_.at(r, c) = m;
            if (m == 0.0) continue;
            for (int cc = c + 1; cc < n; ++cc) lu_.at(r, cc) -= m * lu_.at(c, cc);
        }
    }
}

std::vector<double> DenseLu::solve(std::vector<double> b) const {
    const int n = lu_.rows;
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("DenseLu::solve: size");
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(piv_[static_cast<std::size_t>(i)])];
    for (int r = 1; r < n; ++r) {
        double sgn = x[static_cast<std::size_t>(r)];
        for (int c = 0; c < r; ++c) sgn -= lu_.at(r, c) * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = sgn;
    }
    for (int r = n - 1; r >= 0; --r) {
        double sgn = x[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c) sgn -= lu_.at(r, c) * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = sgn / lu_.at(r, r);
    }
    return x;
}

std::vector<double> dense_solve(DenseMatrix A, std::vector<double> b) {
    return DenseLu(std::move(A)).solve(std::move(b));
}

DenseSystem::DenseSystem(const ProblemConfig& cfg, const Grid& grid) : cfg_(cfg), grid_(grid) {
    cfg_.ensure_stable(grid_);
    if (grid.ny * grid.nt > 5000)
        throw std::invalid_argument("DenseSystem: grid too large for dense assembly (ny*nt <= 5000)");
    const int J = grid.ny, N = grid.nt;
    field_ = (N + 1) * (J + 1);
    nbc_ = N + 1;
    nsp_ = J + 1;
    inputs_ = nbc_ + field_ + 2 * nsp_;
    dt_ = cfg.dt(grid);
    wy_.assign(static_cast<std::size_t>(J) + 1, grid.dy());
    wy_.front() *= 0.5;
    wy_.back() *= 0.5;
    wt_.assign(static_cast<std::size_t>(N) + 1, dt_);
    wt_.front() *= 0.5;
    wt_.back() *= 0.5;

    S_ = DenseMatrix(field_, inputs_);
    std::vector<double> zero(static_cast<std::size_t>(J) + 1, 0.0);

    // column = solve_forward(unit impulse); same code path as the solver.
    for (int c = 0; c < inputs_; ++c) {
        TimeSignal bc = TimeSignal::zeros(N);
        SpaceTimeField src = SpaceTimeField::zeros(grid);
        std::vector<double> v0 = zero, v1 = zero;
        if (c < nbc_) {
            bc[c] = 1.0;
        } else if (c < nbc_ + field_) {
            src.values[static_cast<std::size_t>(c - nbc_)] = 1.0;
        } else if (c < nbc_ + field_ + nsp_) {
            v0[static_cast<std::size_t>(c - nbc_ - field_)] = 1.0;
        } else {
            v1[static_cast<std::size_t>(c - nbc_ - field_ - nsp_)] = 1.0;
        }
        const auto V = wavesolver::solve_forward(cfg_, grid_, bc, &src, v0, v1);
        for (int r = 0; r < field_; ++r) S_.at(r, c) = V.values[static_cast<std::size_t>(r)];
    }
}

std::vector<double> DenseSystem::apply_forward(const std::vector<double>& stacked) const {
    return S_.apply(stacked);
}

std::vector<double> DenseSystem::apply_forward_bc(const TimeSignal& bc) const {
    if (bc.nt() != grid_.nt) throw std::invalid_argument("apply_forward_bc: length mismatch");
    std::vector<double> out(static_cast<std::size_t>(field_), 0.0);
    for (int n = 0; n < nbc_; ++n) {
        const double w = bc[n];
        if (w == 0.0) continue;
        for (int r = 0; r < field_; ++r) out[static_cast<std::size_t>(r)] += S_.at(r, n) * w;
    }
    return out;
}

std::vector<double> DenseSystem::seed_vector(const std::vector<double>& source_field,
                                             const std::vector<double>& pT,
                                             const std::vector<double>& pT_prime,
                                             double delta) const {
    const int J = grid_.ny, N = grid_.nt;
    std::vector<double> seed(static_cast<std::size_t>(field_), 0.0);
    auto idx = [J](int n, int j) { return static_cast<std::size_t>(n) * (J + 1) + j; };
    if (!source_field.empty()) {
        if (static_cast<int>(source_field.size()) != field_)
            throw std::invalid_argument("seed_vector: source size");
        for (int n = 0; n <= N; ++n)
            for (int j = 0; j <= J; ++j) seed[idx(n, j)] = wq(n, j) * source_field[idx(n, j)];
    }
    if (!pT.empty()) {
        for (int j = 0; j <= J; ++j) {
            const double wyj = wy_[static_cast<std::size_t>(j)];
            seed[idx(N, j)] += wyj * ((1.5 / dt_ + delta) * pT[static_cast<std::size_t>(j)] -
                                      pT_prime[static_cast<std::size_t>(j)]);
            seed[idx(N - 1, j)] -= wyj * (2.0 / dt_) * pT[static_cast<std::size_t>(j)];
            seed[idx(N - 2, j)] += wyj * (0.5 / dt_) * pT[static_cast<std::size_t>(j)];
        }
    }
    return seed;
}

DenseSystem::Backward DenseSystem::apply_backward(const std::vector<double>& source_field,
                                                  const std::vector<double>& pT,
                                                  const std::vector<double>& pT_prime,
                                                  double delta) const {
    const auto seed = seed_vector(source_field, pT, pT_prime, delta);
    const auto all_bars = S_.apply_transpose(seed);
    Backward out;
    out.trace_raw.assign(all_bars.begin(), all_bars.begin() + nbc_);
    out.p.assign(static_cast<std::size_t>(field_), 0.0);
    const int J = grid_.ny, N = grid_.nt;
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j <= J; ++j) {
            const std::size_t fi = static_cast<std::size_t>(n) * (J + 1) + j;
            out.p[fi] = all_bars[static_cast<std::size_t>(source_offset()) + fi] / wq(n, j);
        }
    return out;
}

namespace {

std::vector<int> support_nodes(const std::vector<double>& w) {
    std::vector<int> nodes;
    for (int n = 0; n < static_cast<int>(w.size()); ++n)
        if (w[static_cast<std::size_t>(n)] > 0.0) nodes.push_back(n);
    return nodes;
}

}  // namespace

DenseFollower::DenseFollower(const DenseSystem& sys, const DiscreteSpaces& spaces)
    : sys_(sys), spaces_(spaces), nodes_(support_nodes(spaces.sigma2_weights())) {
    const auto& cfg = sys.config();
    const auto& grid = sys.grid();
    const int J = grid.ny, N = grid.nt;
    const int m = static_cast<int>(nodes_.size());
    const auto& S = sys.forward_matrix();

    DenseMatrix H(m, m);
    for (int i = 0; i < m; ++i) {
        for (int l = i; l < m; ++l) {
            double acc = 0.0;
            for (int n = 0; n <= N; ++n) {
                const double wa = sys.alpha_at(n);
                for (int j = 0; j <= J; ++j) {
                    const int r = n * (J + 1) + j;
                    acc += sys.wq(n, j) * wa * S.at(r, nodes_[static_cast<std::size_t>(i)]) *
                           S.at(r, nodes_[static_cast<std::size_t>(l)]);
                }
            }
            H.at(i, l) = acc;
            H.at(l, i) = acc;
        }
        H.at(i, i) += cfg.sigma *
                      spaces.sigma2_weights()[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(i)])];
    }
    lu_ = std::make_unique<DenseLu>(std::move(H));
}

TimeSignal DenseFollower::solve(const TimeSignal& w1, const SpaceTimeField* v2) const {
    const auto& grid = sys_.grid();
    const int J = grid.ny, N = grid.nt;
    const int m = static_cast<int>(nodes_.size());
    const auto& S = sys_.forward_matrix();

    // v_aff: forward image of the masked leader alone (bc block only).
    const auto w1m = spaces_.restrict_to(w1, SigmaSupport::Sigma1);
    std::vector<double> v_aff(static_cast<std::size_t>(sys_.field_size()), 0.0);
    for (int n = 0; n <= N; ++n) {
        const double wn = w1m[n];
        if (wn == 0.0) continue;
        for (int r = 0; r < sys_.field_size(); ++r)
            v_aff[static_cast<std::size_t>(r)] += S.at(r, n) * wn;
    }

    std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int n = 0; n <= N; ++n) {
            const double wa = sys_.alpha_at(n);
            for (int j = 0; j <= J; ++j) {
                const int r = n * (J + 1) + j;
                const double target = v2 ? v2->values[static_cast<std::size_t>(r)] : 0.0;
                acc += sys_.wq(n, j) * wa * S.at(r, nodes_[static_cast<std::size_t>(i)]) *
                       (target - v_aff[static_cast<std::size_t>(r)]);
            }
        }
        rhs[static_cast<std::size_t>(i)] = acc;
    }
    const auto w2v = lu_->solve(std::move(rhs));
    TimeSignal w2 = TimeSignal::zeros(N, SigmaSupport::Sigma2);
    for (int i = 0; i < m; ++i) w2[nodes_[static_cast<std::size_t>(i)]] = w2v[static_cast<std::size_t>(i)];
    return w2;
}

TimeSignal dense_follower(const DenseSystem& sys, const DiscreteSpaces& spaces,
                          const TimeSignal& w1, const SpaceTimeField* v2) {
    return DenseFollower(sys, spaces).solve(w1, v2);
}

DenseLeaderOperator assemble_leader_operator(const DenseSystem& sys,
                                             const DiscreteSpaces& spaces) {
    const auto& cfg = sys.config();
    const auto& grid = sys.grid();
    const int J = grid.ny, N = grid.nt;
    DenseLeaderOperator op;
    op.sigma1_nodes = support_nodes(spaces.sigma1_weights());
    const int m1 = static_cast<int>(op.sigma1_nodes.size());
    op.A_hm1 = DenseMatrix(J + 1, m1);
    op.A_l2 = DenseMatrix(J + 1, m1);

    const double dt = cfg.dt(grid);
    const DenseFollower follower(sys, spaces);
    for (int c = 0; c < m1; ++c) {
        TimeSignal e = TimeSignal::zeros(N, SigmaSupport::Sigma1);
        e[op.sigma1_nodes[static_cast<std::size_t>(c)]] = 1.0;
        // coupled (g, q) system = follower with zero target
        const auto w2 = follower.solve(e, nullptr);
        const auto em = spaces.restrict_to(e, SigmaSupport::Sigma1);
        TimeSignal bc = TimeSignal::zeros(N);
        for (int n = 0; n <= N; ++n) bc[n] = em[n] + w2[n];
        const auto g = sys.apply_forward_bc(bc);
        auto gat = [&](int n, int j) { return g[static_cast<std::size_t>(n * (J + 1) + j)]; };
        for (int j = 0; j <= J; ++j) {
            const double gT = gat(N, j);
            const double gTp = (3.0 * gat(N, j) - 4.0 * gat(N - 1, j) + gat(N - 2, j)) / (2.0 * dt);
            op.A_hm1.at(j, c) = gTp + cfg.delta * gT;
            op.A_l2.at(j, c) = -gT;
        }
    }
    return op;
}

std::vector<double> dense_apply_Astar(const DenseLeaderOperator& op, const DiscreteSpaces& spaces,
                                      const std::vector<double>& f0,
                                      const std::vector<double>& f1) {
    const int J = spaces.ny();
    std::vector<double> wf0(static_cast<std::size_t>(J) + 1), wf1(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        wf0[static_cast<std::size_t>(j)] = spaces.l2_weights()[static_cast<std::size_t>(j)] * f0[static_cast<std::size_t>(j)];
        wf1[static_cast<std::size_t>(j)] = spaces.l2_weights()[static_cast<std::size_t>(j)] * f1[static_cast<std::size_t>(j)];
    }
    const auto t0 = op.A_hm1.apply_transpose(wf0);
    const auto t1 = op.A_l2.apply_transpose(wf1);
    std::vector<double> out(t0.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int node = op.sigma1_nodes[i];
        out[i] = (t0[i] + t1[i]) / spaces.sigma1_weights()[static_cast<std::size_t>(node)];
    }
    return out;
}

namespace {

// Dense Lambda restricted to the observable dual dof: interior f0 nodes and
// f1 nodes j = 1..J.  The f1 component at the pinned endpoint y = 0 never
// reaches the boundary trace (zero row and column of Lambda); the
// minimum-norm dual solution keeps it at zero.
struct DenseDual {
    const DenseLeaderOperator& op;
    const DiscreteSpaces& spaces;
    int J;

    std::vector<double> lift_f0(const std::vector<double>& f0int) const {
        std::vector<double> f0(static_cast<std::size_t>(J) + 1, 0.0);
        for (int j = 1; j < J; ++j) f0[static_cast<std::size_t>(j)] = f0int[static_cast<std::size_t>(j - 1)];
        return f0;
    }
    std::vector<double> lift_f1(const std::vector<double>& f1red) const {
        std::vector<double> f1(static_cast<std::size_t>(J) + 1, 0.0);
        for (int j = 1; j <= J; ++j) f1[static_cast<std::size_t>(j)] = f1red[static_cast<std::size_t>(j - 1)];
        return f1;
    }

    // Lambda f = Riesz(A A* f): returns (f0-int block, reduced f1 block).
    std::pair<std::vector<double>, std::vector<double>>
    apply(const std::vector<double>& f0int, const std::vector<double>& f1red) const {
        const auto f0 = lift_f0(f0int);
        const auto f1 = lift_f1(f1red);
        const auto w = dense_apply_Astar(op, spaces, f0, f1);
        std::vector<double> a1(static_cast<std::size_t>(J) + 1, 0.0), a2(static_cast<std::size_t>(J) + 1, 0.0);
        for (std::size_t c = 0; c < w.size(); ++c) {
            for (int j = 0; j <= J; ++j) {
                a1[static_cast<std::size_t>(j)] += op.A_hm1.at(j, static_cast<int>(c)) * w[c];
                a2[static_cast<std::size_t>(j)] += op.A_l2.at(j, static_cast<int>(c)) * w[c];
            }
        }
        const auto g1 = spaces.green_op(a1);
        std::vector<double> out0(static_cast<std::size_t>(J - 1));
        for (int j = 1; j < J; ++j) out0[static_cast<std::size_t>(j - 1)] = g1[static_cast<std::size_t>(j)];
        std::vector<double> out1(static_cast<std::size_t>(J));
        for (int j = 1; j <= J; ++j) out1[static_cast<std::size_t>(j - 1)] = a2[static_cast<std::size_t>(j)];
        return {out0, out1};
    }
};

}  // namespace

DenseKktResult dense_leader_kkt(const DenseSystem& sys, const DiscreteSpaces& spaces,
                                const std::vector<double>& v0_target,
                                const std::vector<double>& v1_target, double rho0, double rho1,
                                const SpaceTimeField* v2) {
    const auto& cfg = sys.config();
    const auto& grid = sys.grid();
    const int J = grid.ny, N = grid.nt;

    // baseline terminal pair (w1 = 0)
    const auto w20 = dense_follower(sys, spaces, TimeSignal::zeros(N, SigmaSupport::Sigma1), v2);
    const auto vb = sys.apply_forward_bc(w20);
    const double dt = cfg.dt(grid);
    auto vat = [&](int n, int j) { return vb[static_cast<std::size_t>(n * (J + 1) + j)]; };
    std::vector<double> b_pos(static_cast<std::size_t>(J) + 1), b_vel(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        b_pos[static_cast<std::size_t>(j)] = vat(N, j);
        b_vel[static_cast<std::size_t>(j)] =
            (3.0 * vat(N, j) - 4.0 * vat(N - 1, j) + vat(N - 2, j)) / (2.0 * dt);
    }

    const auto op = assemble_leader_operator(sys, spaces);
    DenseDual dual{op, spaces, J};

    // b = Riesz {G(v1 - v0'(T)), -(v0 - v0(T))}
    std::vector<double> d1(static_cast<std::size_t>(J) + 1), d2(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        d1[static_cast<std::size_t>(j)] = v1_target[static_cast<std::size_t>(j)] - b_vel[static_cast<std::size_t>(j)];
        d2[static_cast<std::size_t>(j)] = -(v0_target[static_cast<std::size_t>(j)] - b_pos[static_cast<std::size_t>(j)]);
    }
    const auto g1 = spaces.green_op(d1);
    std::vector<double> b0(static_cast<std::size_t>(J - 1));
    for (int j = 1; j < J; ++j) b0[static_cast<std::size_t>(j - 1)] = g1[static_cast<std::size_t>(j)];
    std::vector<double> b1(static_cast<std::size_t>(J));
    for (int j = 1; j <= J; ++j) b1[static_cast<std::size_t>(j - 1)] = d2[static_cast<std::size_t>(j)];

    const int m0 = J - 1, m1v = J, mm = m0 + m1v;
    std::vector<double> f0int(static_cast<std::size_t>(m0), 0.0), f1(static_cast<std::size_t>(m1v), 0.0);

    if (rho0 == 0.0 && rho1 == 0.0) {
        // assemble dense Lambda and solve directly
        DenseMatrix L(mm, mm);
        std::vector<double> e0(static_cast<std::size_t>(m0), 0.0), e1(static_cast<std::size_t>(m1v), 0.0);
        for (int c = 0; c < mm; ++c) {
            std::fill(e0.begin(), e0.end(), 0.0);
            std::fill(e1.begin(), e1.end(), 0.0);
            if (c < m0)
                e0[static_cast<std::size_t>(c)] = 1.0;
            else
                e1[static_cast<std::size_t>(c - m0)] = 1.0;
            const auto [y0, y1] = dual.apply(e0, e1);
            for (int r = 0; r < m0; ++r) L.at(r, c) = y0[static_cast<std::size_t>(r)];
            for (int r = 0; r < m1v; ++r) L.at(m0 + r, c) = y1[static_cast<std::size_t>(r)];
        }
        std::vector<double> rhs(static_cast<std::size_t>(mm));
        for (int r = 0; r < m0; ++r) rhs[static_cast<std::size_t>(r)] = b0[static_cast<std::size_t>(r)];
        for (int r = 0; r < m1v; ++r) rhs[static_cast<std::size_t>(m0 + r)] = b1[static_cast<std::size_t>(r)];
        const auto x = dense_solve(L, rhs);
        for (int r = 0; r < m0; ++r) f0int[static_cast<std::size_t>(r)] = x[static_cast<std::size_t>(r)];
        for (int r = 0; r < m1v; ++r) f1[static_cast<std::size_t>(r)] = x[static_cast<std::size_t>(m0 + r)];
    } else {
        // dense proximal gradient to 1e-12 (fixed-point residual)
        auto h_norm0 = [&](const std::vector<double>& z0) {
            const auto z = dual.lift_f0(z0);
            return spaces.h01_norm(z);
        };
        auto h_norm1 = [&](const std::vector<double>& z1) {
            return spaces.l2_norm(dual.lift_f1(z1));
        };
        // power iteration for a step size
        std::vector<double> p0(static_cast<std::size_t>(m0), 1.0), p1(static_cast<std::size_t>(m1v), 1.0);
        double lam = 1.0;
        for (int it = 0; it < 60; ++it) {
            auto [y0, y1] = dual.apply(p0, p1);
            double nn = 0.0;
            {
                const auto z = dual.lift_f0(y0);
                nn = spaces.h01_inner(z, z) + spaces.l2_inner(y1, y1);
            }
            nn = std::sqrt(nn);
            if (nn == 0.0) break;
            lam = nn;
            for (auto& v : y0) v /= nn;
            for (auto& v : y1) v /= nn;
            p0 = y0;
            p1 = y1;
        }
        const double tau = 0.9 / std::max(lam, 1e-30);
        for (int it = 0; it < 200000; ++it) {
            auto [y0, y1] = dual.apply(f0int, f1);
            std::vector<double> z0(static_cast<std::size_t>(m0)), z1(static_cast<std::size_t>(m1v));
            for (int r = 0; r < m0; ++r)
                z0[static_cast<std::size_t>(r)] = f0int[static_cast<std::size_t>(r)] -
                                                  tau * (y0[static_cast<std::size_t>(r)] - b0[static_cast<std::size_t>(r)]);
            for (int r = 0; r < m1v; ++r)
                z1[static_cast<std::size_t>(r)] = f1[static_cast<std::size_t>(r)] -
                                                  tau * (y1[static_cast<std::size_t>(r)] - b1[static_cast<std::size_t>(r)]);
            const double n0 = h_norm0(z0), n1 = h_norm1(z1);
            const double s0 = n0 > 0.0 ? std::max(0.0, 1.0 - tau * rho1 / n0) : 0.0;
            const double s1 = n1 > 0.0 ? std::max(0.0, 1.0 - tau * rho0 / n1) : 0.0;
            double delta = 0.0;
            for (int r = 0; r < m0; ++r) {
                const double nv = s0 * z0[static_cast<std::size_t>(r)];
                delta = std::max(delta, std::abs(nv - f0int[static_cast<std::size_t>(r)]));
                f0int[static_cast<std::size_t>(r)] = nv;
            }
            for (int r = 0; r < m1v; ++r) {
                const double nv = s1 * z1[static_cast<std::size_t>(r)];
                delta = std::max(delta, std::abs(nv - f1[static_cast<std::size_t>(r)]));
                f1[static_cast<std::size_t>(r)] = nv;
            }
            if (delta <= 1e-12) break;
        }
    }

    DenseKktResult res;
    res.f.f0 = dual.lift_f0(f0int);
    res.f.f1 = dual.lift_f1(f1);
    const auto w = dense_apply_Astar(op, spaces, res.f.f0, res.f.f1);
    res.w1 = TimeSignal::zeros(N, SigmaSupport::Sigma1);
    for (std::size_t c = 0; c < w.size(); ++c) res.w1[op.sigma1_nodes[c]] = w[c];

    // primal and dual values
    double j1 = 0.0;
    for (int n = 0; n <= N; ++n)
        j1 += spaces.sigma1_weights()[static_cast<std::size_t>(n)] * res.w1[n] * res.w1[n];
    res.primal = 0.5 * j1;
    // Theta(f) = 1/2 ||A* f||^2 + (v0 - v0(T), f1) - <v1 - v0'(T), f0> + rho terms
    double q = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c)
        q += spaces.sigma1_weights()[static_cast<std::size_t>(op.sigma1_nodes[c])] * w[c] * w[c];
    double lin = 0.0;
    for (int j = 0; j <= J; ++j) {
        const double wy = spaces.l2_weights()[static_cast<std::size_t>(j)];
        lin += wy * (v0_target[static_cast<std::size_t>(j)] - b_pos[static_cast<std::size_t>(j)]) *
               res.f.f1[static_cast<std::size_t>(j)];
        lin -= wy * (v1_target[static_cast<std::size_t>(j)] - b_vel[static_cast<std::size_t>(j)]) *
               res.f.f0[static_cast<std::size_t>(j)];
    }
    const double theta = 0.5 * q + lin + rho1 * spaces.h01_norm(res.f.f0) + rho0 * spaces.l2_norm(res.f.f1);
    res.dual = -theta;
    return res;
}

}  // namespace snwave::oracle
