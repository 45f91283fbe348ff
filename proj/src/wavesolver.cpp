#include "snwave/wavesolver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace snwave::wavesolver {

namespace {

// Precomputed stencil data shared by the forward solve and its transpose.
//
// Interior update at node j, step centered at level n:
//   (V^{n+1} - 2V^n + V^{n-1})/dt^2 - (D_n V^n)_j
//     + (Gamma_n (V^{n+1}-V^{n-1}))_j / (2 dt) = f^n_j
// with
//   (D_n W)_j = [c_{j+1/2}(W_{j+1}-W_j) - c_{j-1/2}(W_j-W_{j-1})] / (alpha_n^2 dy^2)
//   (Gamma_n W)_j = gamma_j (W_{j+1}-W_{j-1}) / (2 dy alpha_n)
// so the new level solves the tridiagonal system
//   sub_n(j) V^{n+1}_{j-1} + V^{n+1}_j/dt^2 + sup_n(j) V^{n+1}_{j+1} = rhs_j,
//   sub_n(j) = -gamma_j/(4 dy dt alpha_n),  sup_n(j) = +gamma_j/(4 dy dt alpha_n).
struct Stencil {
    int J, N;
    double dy, dt, k;
    std::vector<double> alpha;   // alpha(t_n), n = 0..N
    std::vector<double> c_half;  // 1 - k^2 y_{j+1/2}^2, j = 0..J-1
    std::vector<double> gam;     // gamma(y_j) = -2 k y_j, j = 0..J
    std::vector<double> wy, wt;  // trapezoid weights

    Stencil(const ProblemConfig& cfg, const Grid& grid) {
        cfg.ensure_stable(grid);
        J = grid.ny;
        N = grid.nt;
        dy = grid.dy();
        dt = cfg.dt(grid);
        k = cfg.k;
        alpha.resize(static_cast<std::size_t>(N) + 1);
        for (int n = 0; n <= N; ++n) alpha[static_cast<std::size_t>(n)] = 1.0 + k * n * dt;
        c_half.resize(static_cast<std::size_t>(J));
        for (int j = 0; j < J; ++j) {
            const double yh = (j + 0.5) * dy;
            c_half[static_cast<std::size_t>(j)] = 1.0 - k * k * yh * yh;
        }
        gam.resize(static_cast<std::size_t>(J) + 1);
        for (int j = 0; j <= J; ++j) gam[static_cast<std::size_t>(j)] = -2.0 * k * j * dy;
        wy.assign(static_cast<std::size_t>(J) + 1, dy);
        wy.front() = 0.5 * dy;
        wy.back() = 0.5 * dy;
        wt.assign(static_cast<std::size_t>(N) + 1, dt);
        wt.front() = 0.5 * dt;
        wt.back() = 0.5 * dt;
    }

    double sup(int n, int j) const {
        return gam[static_cast<std::size_t>(j)] / (4.0 * dy * dt * alpha[static_cast<std::size_t>(n)]);
    }
    double sub(int n, int j) const { return -sup(n, j); }

    double wq(int n, int j) const {
        return wt[static_cast<std::size_t>(n)] * wy[static_cast<std::size_t>(j)];
    }

    // (D_n row)_j for interior j.
    double d_apply(int n, std::span<const double> row, int j) const {
        const double a = alpha[static_cast<std::size_t>(n)];
        const double cl = c_half[static_cast<std::size_t>(j - 1)];
        const double cr = c_half[static_cast<std::size_t>(j)];
        return (cr * (row[static_cast<std::size_t>(j + 1)] - row[static_cast<std::size_t>(j)]) -
                cl * (row[static_cast<std::size_t>(j)] - row[static_cast<std::size_t>(j - 1)])) /
               (a * a * dy * dy);
    }

    // (Gamma_n row)_j / 1  -- the first-difference part, without the 1/(2dt).
    double g_apply(int n, std::span<const double> row, int j) const {
        return gam[static_cast<std::size_t>(j)] *
               (row[static_cast<std::size_t>(j + 1)] - row[static_cast<std::size_t>(j - 1)]) /
               (2.0 * dy * alpha[static_cast<std::size_t>(n)]);
    }

    // Transpose accumulations: lam is an interior vector padded with zeros at
    // 0 and J; both stencils map it onto the full node range.
    void d_transpose_accumulate(int n, std::span<const double> lam, double scale,
                                std::span<double> out) const {
        const double a = alpha[static_cast<std::size_t>(n)];
        const double s = scale / (a * a * dy * dy);
        for (int i = 0; i <= J; ++i) {
            double acc = 0.0;
            if (i >= 1) {
                const double cl = c_half[static_cast<std::size_t>(i - 1)];
                acc += cl * lam[static_cast<std::size_t>(i - 1)] - cl * lam[static_cast<std::size_t>(i)];
            }
            if (i <= J - 1) {
                const double cr = c_half[static_cast<std::size_t>(i)];
                acc += cr * lam[static_cast<std::size_t>(i + 1)] - cr * lam[static_cast<std::size_t>(i)];
            }
            out[static_cast<std::size_t>(i)] += s * acc;
        }
    }

    void g_transpose_accumulate(int n, std::span<const double> lam, double scale,
                                std::span<double> out) const {
        const double s = scale / (2.0 * dy * alpha[static_cast<std::size_t>(n)]);
        for (int i = 0; i <= J; ++i) {
            double acc = 0.0;
            if (i >= 1) acc += gam[static_cast<std::size_t>(i - 1)] * lam[static_cast<std::size_t>(i - 1)];
            if (i <= J - 1) acc -= gam[static_cast<std::size_t>(i + 1)] * lam[static_cast<std::size_t>(i + 1)];
            out[static_cast<std::size_t>(i)] += s * acc;
        }
    }

    // Thomas solve of the interior step system; rhs indexed 1..J-1.
    // transpose = true solves with T_n^T instead.
    void step_solve(int n, std::span<double> rhs, std::span<double> x, bool transpose) const {
        const int m = J - 1;
        const double diag = 1.0 / (dt * dt);
        thread_local std::vector<double> cw, dw;
        cw.assign(static_cast<std::size_t>(m), 0.0);
        dw.assign(static_cast<std::size_t>(m), 0.0);
        auto lower = [&](int j) { return transpose ? sup(n, j - 1) : sub(n, j); };
        auto upper = [&](int j) { return transpose ? sub(n, j + 1) : sup(n, j); };
        double piv = diag;
        cw[0] = upper(1) / piv;
        dw[0] = rhs[1] / piv;
        for (int i = 2; i <= m; ++i) {
            piv = diag - lower(i) * cw[static_cast<std::size_t>(i - 2)];
            if (i < m) cw[static_cast<std::size_t>(i - 1)] = upper(i) / piv;
            dw[static_cast<std::size_t>(i - 1)] =
                (rhs[static_cast<std::size_t>(i)] - lower(i) * dw[static_cast<std::size_t>(i - 2)]) / piv;
        }
        x[static_cast<std::size_t>(m)] = dw[static_cast<std::size_t>(m - 1)];
        for (int i = m - 1; i >= 1; --i)
            x[static_cast<std::size_t>(i)] = dw[static_cast<std::size_t>(i - 1)] -
                                             cw[static_cast<std::size_t>(i - 1)] * x[static_cast<std::size_t>(i + 1)];
        x[0] = 0.0;
        x[static_cast<std::size_t>(J)] = 0.0;
    }
};

void check_grid_function(std::span<const double> f, int J, const char* who) {
    if (static_cast<int>(f.size()) != J + 1)
        throw std::invalid_argument(std::string(who) + ": grid-function size mismatch");
    for (double v : f)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

SpaceTimeField solve_forward(const ProblemConfig& cfg, const Grid& grid,
                             const TimeSignal& bc1, const SpaceTimeField* source,
                             std::span<const double> v0, std::span<const double> v1) {
    const Stencil st(cfg, grid);
    const int J = st.J, N = st.N;
    if (bc1.nt() != N) throw std::invalid_argument("solve_forward: bc1 length mismatch");
    if (!bc1.all_finite()) throw std::invalid_argument("solve_forward: non-finite bc1");
    check_grid_function(v0, J, "solve_forward/v0");
    check_grid_function(v1, J, "solve_forward/v1");
    if (source) {
        if (source->ny != J || source->nt != N)
            throw std::invalid_argument("solve_forward: source dimension mismatch");
        if (!source->all_finite()) throw std::invalid_argument("solve_forward: non-finite source");
    }
    auto src = [&](int n, int j) { return source ? source->at(n, j) : 0.0; };

    SpaceTimeField V = SpaceTimeField::zeros(grid);
    const double dt = st.dt;

    // level 0: row replacement at the boundary nodes
    for (int j = 1; j < J; ++j) V.at(0, j) = v0[static_cast<std::size_t>(j)];
    V.at(0, 0) = 0.0;
    V.at(0, J) = bc1[0];

    // level 1: Taylor start, V^1 = V^0 + dt v1 + dt^2/2 (f^0 + D_0 V^0 - G_0 v1)
    for (int j = 1; j < J; ++j)
        V.at(1, j) = V.at(0, j) + dt * v1[static_cast<std::size_t>(j)] +
                     0.5 * dt * dt * (src(0, j) + st.d_apply(0, V.row(0), j) - st.g_apply(0, v1, j));
    V.at(1, 0) = 0.0;
    V.at(1, J) = bc1[1];

    std::vector<double> rhs(static_cast<std::size_t>(J) + 1, 0.0);
    std::vector<double> x(static_cast<std::size_t>(J) + 1, 0.0);
    for (int n = 1; n < N; ++n) {
        const double inv_dt2 = 1.0 / (dt * dt);
        for (int j = 1; j < J; ++j)
            rhs[static_cast<std::size_t>(j)] = src(n, j) + 2.0 * inv_dt2 * V.at(n, j) +
                                               st.d_apply(n, V.row(n), j) - inv_dt2 * V.at(n - 1, j) +
                                               st.g_apply(n, V.row(n - 1), j) / (2.0 * dt);
        rhs[static_cast<std::size_t>(J - 1)] -= st.sup(n, J - 1) * bc1[n + 1];
        st.step_solve(n, rhs, x, /*transpose=*/false);
        for (int j = 1; j < J; ++j) V.at(n + 1, j) = x[static_cast<std::size_t>(j)];
        V.at(n + 1, 0) = 0.0;
        V.at(n + 1, J) = bc1[n + 1];
    }
    return V;
}

SpaceTimeField solve_forward(const ProblemConfig& cfg, const Grid& grid,
                             const TimeSignal& bc1, const SpaceTimeField* source) {
    const std::vector<double> zero(static_cast<std::size_t>(grid.ny) + 1, 0.0);
    return solve_forward(cfg, grid, bc1, source, zero, zero);
}

ReverseSweepResult reverse_sweep(const ProblemConfig& cfg, const Grid& grid,
                                 const SpaceTimeField& seed) {
    const Stencil st(cfg, grid);
    const int J = st.J, N = st.N;
    if (seed.ny != J || seed.nt != N)
        throw std::invalid_argument("reverse_sweep: seed dimension mismatch");
    const double dt = st.dt;

    SpaceTimeField Vb = seed;  // adjoint accumulators, consumed level by level
    Vb.adjoint_trace = nullptr;

    ReverseSweepResult out;
    out.p = SpaceTimeField::zeros(grid);
    out.trace_raw.assign(static_cast<std::size_t>(N) + 1, 0.0);
    out.v0_bar.assign(static_cast<std::size_t>(J) + 1, 0.0);
    out.v1_bar.assign(static_cast<std::size_t>(J) + 1, 0.0);

    std::vector<double> lam(static_cast<std::size_t>(J) + 1, 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(J) + 1, 0.0);
    const double inv_dt2 = 1.0 / (dt * dt);

    for (int n = N - 1; n >= 1; --n) {
        // adjoint of: V^{n+1} = ext(T_n^{-1} rhs), V^{n+1}_J = b_{n+1}
        out.trace_raw[static_cast<std::size_t>(n + 1)] += Vb.at(n + 1, J);
        for (int j = 1; j < J; ++j) rhs[static_cast<std::size_t>(j)] = Vb.at(n + 1, j);
        st.step_solve(n, rhs, lam, /*transpose=*/true);
        // adjoint of the moved boundary column in the rhs
        out.trace_raw[static_cast<std::size_t>(n + 1)] -=
            st.sup(n, J - 1) * lam[static_cast<std::size_t>(J - 1)];
        // source adjoint (interior slots of level n)
        for (int j = 1; j < J; ++j) out.p.at(n, j) = lam[static_cast<std::size_t>(j)] / st.wq(n, j);
        // rhs reads of V^n: 2/dt^2 I + D_n
        for (int j = 1; j < J; ++j) Vb.at(n, j) += 2.0 * inv_dt2 * lam[static_cast<std::size_t>(j)];
        st.d_transpose_accumulate(n, lam, 1.0, Vb.row(n));
        // rhs reads of V^{n-1}: -1/dt^2 I + Gamma_n/(2dt)
        for (int j = 1; j < J; ++j) Vb.at(n - 1, j) -= inv_dt2 * lam[static_cast<std::size_t>(j)];
        st.g_transpose_accumulate(n, lam, 1.0 / (2.0 * dt), Vb.row(n - 1));
    }

    // adjoint of the Taylor start
    out.trace_raw[1] += Vb.at(1, J);
    std::vector<double> mu(static_cast<std::size_t>(J) + 1, 0.0);
    for (int j = 1; j < J; ++j) mu[static_cast<std::size_t>(j)] = Vb.at(1, j);
    for (int j = 1; j < J; ++j) out.p.at(0, j) = 0.5 * dt * dt * mu[static_cast<std::size_t>(j)] / st.wq(0, j);
    for (int j = 1; j < J; ++j) Vb.at(0, j) += mu[static_cast<std::size_t>(j)];
    st.d_transpose_accumulate(0, mu, 0.5 * dt * dt, Vb.row(0));
    for (int j = 1; j < J; ++j) out.v1_bar[static_cast<std::size_t>(j)] += dt * mu[static_cast<std::size_t>(j)];
    st.g_transpose_accumulate(0, mu, -0.5 * dt * dt, out.v1_bar);

    // adjoint of the initial row replacement
    out.trace_raw[0] += Vb.at(0, J);
    for (int j = 1; j < J; ++j) out.v0_bar[static_cast<std::size_t>(j)] += Vb.at(0, j);

    return out;
}

namespace {

SpaceTimeField backward_impl(const ProblemConfig& cfg, const Grid& grid,
                             const SpaceTimeField* source, std::span<const double> pT,
                             std::span<const double> pT_prime, double delta) {
    const Stencil st(cfg, grid);
    const int J = st.J, N = st.N;
    check_grid_function(pT, J, "solve_backward_adjoint/pT");
    check_grid_function(pT_prime, J, "solve_backward_adjoint/pT_prime");
    if (source) {
        if (source->ny != J || source->nt != N)
            throw std::invalid_argument("solve_backward_adjoint: source dimension mismatch");
        if (!source->all_finite())
            throw std::invalid_argument("solve_backward_adjoint: non-finite source");
    }
    const double dt = st.dt;

    SpaceTimeField seed = SpaceTimeField::zeros(grid);
    if (source)
        for (int n = 0; n <= N; ++n)
            for (int j = 0; j <= J; ++j) seed.at(n, j) = st.wq(n, j) * source->at(n, j);
    // Transpose of the terminal extraction: position pairs against -pT_prime,
    // the one-sided velocity stencil (plus delta * position) against pT.
    for (int j = 0; j <= J; ++j) {
        const double wy = st.wy[static_cast<std::size_t>(j)];
        seed.at(N, j) += wy * ((1.5 / dt + delta) * pT[static_cast<std::size_t>(j)] -
                               pT_prime[static_cast<std::size_t>(j)]);
        seed.at(N - 1, j) -= wy * (2.0 / dt) * pT[static_cast<std::size_t>(j)];
        seed.at(N - 2, j) += wy * (0.5 / dt) * pT[static_cast<std::size_t>(j)];
    }

    auto sweep = reverse_sweep(cfg, grid, seed);
    auto trace = std::make_shared<AdjointTraceData>();
    trace->raw = std::move(sweep.trace_raw);
    sweep.p.adjoint_trace = std::move(trace);
    return std::move(sweep.p);
}

}  // namespace

SpaceTimeField solve_backward_adjoint(const ProblemConfig& cfg, const Grid& grid,
                                      const SpaceTimeField* source, std::span<const double> pT,
                                      std::span<const double> pT_prime) {
    return backward_impl(cfg, grid, source, pT, pT_prime, 0.0);
}

SpaceTimeField solve_backward_adjoint_shifted(const ProblemConfig& cfg, const Grid& grid,
                                              const SpaceTimeField* source,
                                              std::span<const double> pT,
                                              std::span<const double> pT_prime, double delta) {
    return backward_impl(cfg, grid, source, pT, pT_prime, delta);
}

TimeSignal flux_trace(const ProblemConfig& cfg, const Grid& grid, const SpaceTimeField& field,
                      TraceWeight weight) {
    if (!field.adjoint_trace)
        throw std::invalid_argument(
            "flux_trace: field was not produced by solve_backward_adjoint "
            "(boundary row at y=1 is not an adjoint row)");
    const Stencil st(cfg, grid);
    if (static_cast<int>(field.adjoint_trace->raw.size()) != st.N + 1)
        throw std::invalid_argument("flux_trace: trace length mismatch");
    TimeSignal out = TimeSignal::zeros(st.N, SigmaSupport::SigmaStar);
    for (int n = 0; n <= st.N; ++n) {
        double v = -field.adjoint_trace->raw[static_cast<std::size_t>(n)] /
                   st.wt[static_cast<std::size_t>(n)];
        if (weight == TraceWeight::InvAlpha4) {
            const double a = st.alpha[static_cast<std::size_t>(n)];
            v /= a * a;
        }
        out[n] = v;
    }
    return out;
}

TimeSignal flux_trace_diagnostic(const ProblemConfig& cfg, const Grid& grid,
                                 const SpaceTimeField& field, TraceWeight weight) {
    const Stencil st(cfg, grid);
    if (field.ny != st.J || field.nt != st.N)
        throw std::invalid_argument("flux_trace_diagnostic: field dimension mismatch");
    for (int n = 0; n <= st.N; ++n)
        if (field.at(n, st.J) != 0.0)
            throw std::invalid_argument("flux_trace_diagnostic: nonzero boundary row at y=1");
    TimeSignal out = TimeSignal::zeros(st.N, SigmaSupport::SigmaStar);
    const double conormal = 1.0 - cfg.k * cfg.k;  // beta * alpha at y = 1
    for (int n = 0; n <= st.N; ++n) {
        const double a = st.alpha[static_cast<std::size_t>(n)];
        const double py = (3.0 * field.at(n, st.J) - 4.0 * field.at(n, st.J - 1) +
                           field.at(n, st.J - 2)) /
                          (2.0 * st.dy);
        double v = conormal / (a * a) * py;
        if (weight == TraceWeight::InvAlpha4) v /= a * a;
        out[n] = v;
    }
    return out;
}

TimeSignal flux_trace_on(const DiscreteSpaces& spaces, const SpaceTimeField& field,
                         SigmaSupport piece) {
    if (!field.adjoint_trace)
        throw std::invalid_argument("flux_trace_on: field carries no adjoint trace");
    const int N = spaces.nt();
    if (static_cast<int>(field.adjoint_trace->raw.size()) != N + 1)
        throw std::invalid_argument("flux_trace_on: trace length mismatch");
    const std::vector<double>* w = nullptr;
    switch (piece) {
        case SigmaSupport::Sigma1: w = &spaces.sigma1_weights(); break;
        case SigmaSupport::Sigma2: w = &spaces.sigma2_weights(); break;
        case SigmaSupport::SigmaStar: w = &spaces.time_weights(); break;
    }
    TimeSignal out = TimeSignal::zeros(N, piece);
    for (int n = 0; n <= N; ++n) {
        const double wn = (*w)[static_cast<std::size_t>(n)];
        if (wn > 0.0) out[n] = -field.adjoint_trace->raw[static_cast<std::size_t>(n)] / wn;
    }
    return out;
}

TerminalPair terminal_pair(const ProblemConfig& cfg, const Grid& grid,
                           const SpaceTimeField& field) {
    if (grid.nt < 2) throw std::invalid_argument("terminal_pair: needs nt >= 2");
    if (field.ny != grid.ny || field.nt != grid.nt)
        throw std::invalid_argument("terminal_pair: field dimension mismatch");
    const double dt = cfg.dt(grid);
    const int J = grid.ny, N = grid.nt;
    TerminalPair tp;
    tp.position.assign(field.row(N).begin(), field.row(N).end());
    tp.velocity.resize(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j)
        tp.velocity[static_cast<std::size_t>(j)] =
            (3.0 * field.at(N, j) - 4.0 * field.at(N - 1, j) + field.at(N - 2, j)) / (2.0 * dt);
    return tp;
}

}  // namespace snwave::wavesolver
