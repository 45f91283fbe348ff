#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "snwave/domain.hpp"
#include "snwave/rng.hpp"
#include "snwave/spaces.hpp"
#include "snwave/wavesolver.hpp"

using namespace snwave;
using namespace snwave::wavesolver;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Manufactured solution v*(y,t) = sin(pi y) cos(w t) with the matching source
// of v'' - [(beta/alpha) v_y]_y + (gamma/alpha) v'_y.  Zero boundary values,
// initial data (sin(pi y), 0).
struct TrigMms {
    double k, w = 2.0;
    double value(double y, double t) const { return std::sin(kPi * y) * std::cos(w * t); }
    double source(double y, double t) const {
        const double a = 1.0 + k * t;
        const double s = std::sin(kPi * y), c = std::cos(kPi * y);
        const double vtt = -w * w * s * std::cos(w * t);
        const double div_term =
            (-2.0 * k * k * y * kPi * c - (1.0 - k * k * y * y) * kPi * kPi * s) *
            std::cos(w * t) / (a * a);
        const double mixed = (-2.0 * k * y / a) * (-w * kPi * c * std::sin(w * t));
        return vtt - div_term + mixed;
    }
};

// Polynomial solution v*(y,t) = t^2 y (1-y): zero boundary and initial data,
// pure source drive.
struct PolyMms {
    double k;
    double value(double y, double t) const { return t * t * y * (1.0 - y); }
    double source(double y, double t) const {
        const double a = 1.0 + k * t;
        const double vtt = 2.0 * y * (1.0 - y);
        const double vy = t * t * (1.0 - 2.0 * y);
        const double vyy = -2.0 * t * t;
        const double div_term = (-2.0 * k * k * y / (a * a)) * vy + ((1.0 - k * k * y * y) / (a * a)) * vyy;
        const double vty = 2.0 * t * (1.0 - 2.0 * y);
        const double mixed = (-2.0 * k * y / a) * vty;
        return vtt - div_term + mixed;
    }
};

template <class Mms>
double mms_final_error(const Mms& mms, double k, double T, int ny) {
    ProblemConfig cfg;
    cfg.k = k;
    cfg.T = T;
    Grid grid{ny, nt_for_cfl(cfg, ny), 0.5};
    const double dt = cfg.dt(grid);
    const double dy = grid.dy();

    SpaceTimeField src = SpaceTimeField::zeros(grid);
    for (int n = 0; n <= grid.nt; ++n)
        for (int j = 0; j <= grid.ny; ++j) src.at(n, j) = mms.source(j * dy, n * dt);
    std::vector<double> v0(ny + 1), v1(ny + 1);
    for (int j = 0; j <= ny; ++j) {
        v0[j] = mms.value(j * dy, 0.0);
        const double h = 1e-6;
        v1[j] = (mms.value(j * dy, h) - mms.value(j * dy, -h)) / (2.0 * h);
    }
    TimeSignal bc = TimeSignal::zeros(grid.nt);
    for (int n = 0; n <= grid.nt; ++n) bc[n] = mms.value(1.0, n * dt);

    const auto V = solve_forward(cfg, grid, bc, &src, v0, v1);
    double err2 = 0.0;
    for (int j = 0; j <= ny; ++j) {
        const double w = (j == 0 || j == ny) ? 0.5 * dy : dy;
        const double d = V.at(grid.nt, j) - mms.value(j * dy, cfg.T);
        err2 += w * d * d;
    }
    return std::sqrt(err2);
}

SpaceTimeField random_field(const Grid& g, Rng& rng) {
    SpaceTimeField f = SpaceTimeField::zeros(g);
    for (double& v : f.values) v = rng.uniform_sym();
    return f;
}

double wq_inner(const DiscreteSpaces& sp, const SpaceTimeField& a, const SpaceTimeField& b) {
    double s = 0.0;
    for (int n = 0; n <= sp.nt(); ++n)
        for (int j = 0; j <= sp.ny(); ++j)
            s += sp.time_weights()[n] * sp.l2_weights()[j] * a.at(n, j) * b.at(n, j);
    return s;
}

}  // namespace

TEST_CASE("standing wave at k ~ 0") {
    ProblemConfig cfg;
    cfg.k = 0.0;
    cfg.T = 1.0;
    const int ny = 128;
    Grid grid{ny, nt_for_cfl(cfg, ny), 0.5};
    std::vector<double> v0(ny + 1), v1(ny + 1, 0.0);
    for (int j = 0; j <= ny; ++j) v0[j] = std::sin(kPi * j / double(ny));
    const auto V = solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), nullptr, v0, v1);
    // v(y,t) = cos(pi t) sin(pi y); at T = 1 the row is -sin(pi y).
    double worst = 0.0;
    for (int j = 0; j <= ny; ++j)
        worst = std::max(worst, std::abs(V.at(grid.nt, j) + std::sin(kPi * j / double(ny))));
    CHECK(worst < 2e-4);

    // terminal_pair: velocity of cos(pi t) at t=1 is zero.
    const auto tp = terminal_pair(cfg, grid, V);
    double vworst = 0.0;
    for (int j = 0; j <= ny; ++j) vworst = std::max(vworst, std::abs(tp.velocity[j]));
    CHECK(vworst < 2e-3);
}

TEST_CASE("zero data gives the zero field") {
    ProblemConfig cfg;
    cfg.k = 0.4;
    cfg.T = 1.0;
    Grid grid{16, nt_for_cfl(cfg, 16), 0.5};
    const auto V = solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), nullptr);
    for (double v : V.values) CHECK(v == 0.0);
    const std::vector<double> zero(grid.ny + 1, 0.0);
    const auto P = solve_backward_adjoint(cfg, grid, nullptr, zero, zero);
    for (double v : P.values) CHECK(v == 0.0);
    const auto tr = flux_trace(cfg, grid, P, TraceWeight::InvAlphaSq);
    const auto tr4 = flux_trace(cfg, grid, P, TraceWeight::InvAlpha4);
    for (int n = 0; n <= grid.nt; ++n) {
        CHECK(tr[n] == 0.0);
        CHECK(tr4[n] == 0.0);
    }
}

TEST_CASE("forward solver converges at second order on manufactured solutions") {
    for (double k : {0.0, 0.3, 0.6}) {
        std::vector<double> errs;
        for (int ny : {32, 64, 128}) {
            TrigMms mms{k};
            errs.push_back(mms_final_error(mms, k, 1.0, ny));
        }
        const double o1 = std::log2(errs[0] / errs[1]);
        const double o2 = std::log2(errs[1] / errs[2]);
        INFO("k=" << k << " errors " << errs[0] << " " << errs[1] << " " << errs[2]);
        CHECK(o1 > 1.9);
        CHECK(o2 > 1.9);
    }
}

TEST_CASE("hand-derived MMS sources agree with a finite-difference oracle") {
    // Independent check of the closed-form sources: apply high-order central
    // differences to v* and assemble the operator directly.
    const double h = 1e-5;
    auto fd_source = [&](auto&& mms, double k, double y, double t) {
        auto v = [&](double yy, double tt) { return mms.value(yy, tt); };
        const double a = 1.0 + k * t;
        const double vtt = (v(y, t + h) - 2.0 * v(y, t) + v(y, t - h)) / (h * h);
        auto beta_over_alpha = [&](double yy) { return (1.0 - k * k * yy * yy) / (a * a); };
        auto vy = [&](double yy, double tt) { return (v(yy + h, tt) - v(yy - h, tt)) / (2.0 * h); };
        const double div_term =
            (beta_over_alpha(y + h) * vy(y + h, t) - beta_over_alpha(y - h) * vy(y - h, t)) /
            (2.0 * h);
        const double vty = (vy(y, t + h) - vy(y, t - h)) / (2.0 * h);
        const double mixed = (-2.0 * k * y / a) * vty;
        return vtt - div_term + mixed;
    };
    for (double k : {0.3, 0.6}) {
        TrigMms trig{k};
        PolyMms poly{k};
        for (double y : {0.2, 0.5, 0.8}) {
            for (double t : {0.3, 0.9}) {
                // 1e-6 absorbs the oracle's own truncation/roundoff balance
                CHECK(std::abs(trig.source(y, t) - fd_source(trig, k, y, t)) < 1e-6);
                CHECK(std::abs(poly.source(y, t) - fd_source(poly, k, y, t)) < 1e-6);
            }
        }
    }
}

TEST_CASE("polynomial MMS is reproduced with zero data") {
    PolyMms mms{0.3};
    const double e64 = mms_final_error(mms, 0.3, 1.0, 64);
    const double e128 = mms_final_error(mms, 0.3, 1.0, 128);
    CHECK(e64 < 2e-4);
    CHECK(std::log2(e64 / e128) > 1.9);
}

TEST_CASE("solve_forward is affine: superposition to roundoff") {
    ProblemConfig cfg;
    cfg.k = 0.5;
    cfg.T = 1.0;
    Grid grid{24, nt_for_cfl(cfg, 24), 0.5};
    Rng rng(7);
    TimeSignal b1 = TimeSignal::zeros(grid.nt), b2 = TimeSignal::zeros(grid.nt);
    for (int n = 0; n <= grid.nt; ++n) {
        b1[n] = rng.uniform_sym();
        b2[n] = rng.uniform_sym();
    }
    auto f1 = random_field(grid, rng);
    auto f2 = random_field(grid, rng);
    std::vector<double> v0a(grid.ny + 1), v1a(grid.ny + 1), v0b(grid.ny + 1), v1b(grid.ny + 1);
    for (int j = 0; j <= grid.ny; ++j) {
        v0a[j] = rng.uniform_sym();
        v1a[j] = rng.uniform_sym();
        v0b[j] = rng.uniform_sym();
        v1b[j] = rng.uniform_sym();
    }
    const double c1 = 0.7, c2 = -1.3;

    TimeSignal bsum = TimeSignal::zeros(grid.nt);
    for (int n = 0; n <= grid.nt; ++n) bsum[n] = c1 * b1[n] + c2 * b2[n];
    SpaceTimeField fsum = SpaceTimeField::zeros(grid);
    for (std::size_t i = 0; i < fsum.values.size(); ++i)
        fsum.values[i] = c1 * f1.values[i] + c2 * f2.values[i];
    std::vector<double> v0s(grid.ny + 1), v1s(grid.ny + 1);
    for (int j = 0; j <= grid.ny; ++j) {
        v0s[j] = c1 * v0a[j] + c2 * v0b[j];
        v1s[j] = c1 * v1a[j] + c2 * v1b[j];
    }

    const auto Va = solve_forward(cfg, grid, b1, &f1, v0a, v1a);
    const auto Vb = solve_forward(cfg, grid, b2, &f2, v0b, v1b);
    const auto Vs = solve_forward(cfg, grid, bsum, &fsum, v0s, v1s);
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < Vs.values.size(); ++i) {
        scale = std::max(scale, std::abs(Vs.values[i]));
        worst = std::max(worst, std::abs(Vs.values[i] - c1 * Va.values[i] - c2 * Vb.values[i]));
    }
    CHECK(worst <= 1e-13 * std::max(1.0, scale));
}

TEST_CASE("k = 0 energy drift stays below 1% over (0,4)") {
    ProblemConfig cfg;
    cfg.k = 0.0;
    cfg.T = 4.0;
    const int ny = 128;
    Grid grid{ny, nt_for_cfl(cfg, ny), 0.5};
    std::vector<double> v0(ny + 1), v1(ny + 1, 0.0);
    for (int j = 0; j <= ny; ++j) v0[j] = std::sin(kPi * j / double(ny));
    const auto V = solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), nullptr, v0, v1);
    const double dt = cfg.dt(grid), dy = grid.dy();
    auto energy = [&](int n) {
        double kin = 0.0, pot = 0.0;
        for (int j = 0; j <= ny; ++j) {
            const double w = (j == 0 || j == ny) ? 0.5 * dy : dy;
            const double vt = (V.at(n + 1, j) - V.at(n - 1, j)) / (2.0 * dt);
            kin += 0.5 * w * vt * vt;
        }
        for (int j = 0; j < ny; ++j) {
            const double d = (V.at(n, j + 1) - V.at(n, j)) / dy;
            pot += 0.5 * dy * d * d;
        }
        return kin + pot;
    };
    const double e0 = energy(1);
    double emin = e0, emax = e0;
    for (int n = 2; n < grid.nt; ++n) {
        const double e = energy(n);
        emin = std::min(emin, e);
        emax = std::max(emax, e);
    }
    CHECK((emax - emin) / e0 < 0.01);
}

TEST_CASE("dot-product test: backward solve is the exact transpose") {
    Rng rng(42);
    for (double k : {0.0, 0.3, 0.6}) {
        ProblemConfig cfg;
        cfg.k = k;
        cfg.T = 1.0;
        Grid grid{16, nt_for_cfl(cfg, 16), 0.5};
        DiscreteSpaces sp(cfg, grid);
        const std::vector<double> zero(grid.ny + 1, 0.0);
        for (int rep = 0; rep < 5; ++rep) {
            const auto src = random_field(grid, rng);
            const auto w = random_field(grid, rng);
            const auto F = solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), &src, zero, zero);
            const auto P = solve_backward_adjoint(cfg, grid, &w, zero, zero);
            const double lhs = wq_inner(sp, F, w);
            const double rhs = wq_inner(sp, src, P);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
        }
    }
}

TEST_CASE("full-input reverse sweep adjoint identity") {
    // <F(b,f,v0,v1), W> = b.b_bar + f.f_bar + v0.v0_bar + v1.v1_bar with the
    // Euclidean pairing; every input slot of the transpose is exercised.
    Rng rng(11);
    ProblemConfig cfg;
    cfg.k = 0.45;
    cfg.T = 0.9;
    Grid grid{12, nt_for_cfl(cfg, 12), 0.5};
    DiscreteSpaces sp(cfg, grid);
    for (int rep = 0; rep < 4; ++rep) {
        TimeSignal b = TimeSignal::zeros(grid.nt);
        for (int n = 0; n <= grid.nt; ++n) b[n] = rng.uniform_sym();
        const auto f = random_field(grid, rng);
        std::vector<double> v0(grid.ny + 1), v1(grid.ny + 1);
        for (int j = 0; j <= grid.ny; ++j) {
            v0[j] = rng.uniform_sym();
            v1[j] = rng.uniform_sym();
        }
        const auto seed = random_field(grid, rng);

        const auto F = solve_forward(cfg, grid, b, &f, v0, v1);
        double lhs = 0.0;
        for (std::size_t i = 0; i < F.values.size(); ++i) lhs += F.values[i] * seed.values[i];

        const auto sw = reverse_sweep(cfg, grid, seed);
        double rhs = 0.0;
        for (int n = 0; n <= grid.nt; ++n) rhs += b[n] * sw.trace_raw[n];
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j)
                rhs += f.at(n, j) * sw.p.at(n, j) * sp.time_weights()[n] * sp.l2_weights()[j];
        for (int j = 0; j <= grid.ny; ++j) rhs += v0[j] * sw.v0_bar[j] + v1[j] * sw.v1_bar[j];
        CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("terminal data pairing: <x'(T),pT> - <x(T),pT'>") {
    // Backward solve with terminal data and zero source pairs against any
    // forward solution of the homogeneous-data problem through the terminal
    // extraction stencil, exactly.
    Rng rng(3);
    ProblemConfig cfg;
    cfg.k = 0.35;
    cfg.T = 1.1;
    Grid grid{14, nt_for_cfl(cfg, 14), 0.5};
    DiscreteSpaces sp(cfg, grid);
    const std::vector<double> zero(grid.ny + 1, 0.0);
    for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> pT(grid.ny + 1), pTp(grid.ny + 1);
        for (int j = 0; j <= grid.ny; ++j) {
            pT[j] = rng.uniform_sym();
            pTp[j] = rng.uniform_sym();
        }
        const auto h = random_field(grid, rng);
        const auto x = solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), &h, zero, zero);
        const auto tp = terminal_pair(cfg, grid, x);
        double lhs = 0.0;
        for (int j = 0; j <= grid.ny; ++j)
            lhs += sp.l2_weights()[j] * (tp.velocity[j] * pT[j] - tp.position[j] * pTp[j]);

        const auto phi = solve_backward_adjoint(cfg, grid, nullptr, pT, pTp);
        const double rhs = wq_inner(sp, h, phi);
        CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("flux trace: adjoint-consistent vs one-sided diagnostic") {
    // Smooth adjoint data; the two traces must converge to each other at
    // second order under refinement.  Measured away from the starting row
    // (whose mixed term reads the v1 input, not a field level) and the last
    // rows (where the transpose enforces the terminal conditions weakly):
    // the pointwise reading of the exact trace differs there by design while
    // every integral identity stays exact.
    std::vector<double> diffs;
    for (int ny : {16, 32, 64}) {
        ProblemConfig cfg;
        cfg.k = 0.3;
        cfg.T = 1.0;
        Grid grid{ny, nt_for_cfl(cfg, ny), 0.5};
        SpaceTimeField src = SpaceTimeField::zeros(grid);
        const double dt = cfg.dt(grid), dy = grid.dy();
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j)
                src.at(n, j) = std::sin(kPi * j * dy) * std::exp(-n * dt);
        const std::vector<double> zero(grid.ny + 1, 0.0);
        const auto p = solve_backward_adjoint(cfg, grid, &src, zero, zero);
        const auto tr = flux_trace(cfg, grid, p, TraceWeight::InvAlphaSq);
        const auto diag = flux_trace_diagnostic(cfg, grid, p, TraceWeight::InvAlphaSq);
        double worst = 0.0, scale = 0.0;
        for (int n = 2; n <= grid.nt - 4; ++n) {
            worst = std::max(worst, std::abs(tr[n] - diag[n]));
            scale = std::max(scale, std::abs(tr[n]));
        }
        diffs.push_back(worst / scale);
    }
    INFO("relative trace diffs " << diffs[0] << " " << diffs[1] << " " << diffs[2]);
    CHECK(std::log2(diffs[0] / diffs[1]) > 1.9);
    CHECK(std::log2(diffs[1] / diffs[2]) > 1.9);
    CHECK(diffs[2] < 5e-3);
}

TEST_CASE("field utilities and error paths") {
    ProblemConfig cfg;
    cfg.k = 0.3;
    cfg.T = 1.0;
    Grid grid{8, nt_for_cfl(cfg, 8), 0.5};
    const std::vector<double> zero(grid.ny + 1, 0.0);

    SUBCASE("terminal pair of a linear-in-time field is exact") {
        SpaceTimeField f = SpaceTimeField::zeros(grid);
        const double dt = cfg.dt(grid);
        std::vector<double> v1(grid.ny + 1);
        for (int j = 0; j <= grid.ny; ++j) v1[j] = std::cos(0.7 * j);
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j) f.at(n, j) = n * dt * v1[j];
        const auto tp = terminal_pair(cfg, grid, f);
        for (int j = 0; j <= grid.ny; ++j) {
            CHECK(tp.position[j] == doctest::Approx(cfg.T * v1[j]).epsilon(1e-14));
            CHECK(tp.velocity[j] == doctest::Approx(v1[j]).epsilon(1e-12));
        }
    }

    SUBCASE("CFL violation throws") {
        Grid bad{8, 8, 0.5};
        CHECK_THROWS_AS(solve_forward(cfg, bad, TimeSignal::zeros(8), nullptr, zero, zero),
                        std::invalid_argument);
    }

    SUBCASE("non-finite input throws") {
        TimeSignal bc = TimeSignal::zeros(grid.nt);
        bc[2] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(solve_forward(cfg, grid, bc, nullptr, zero, zero), std::invalid_argument);
    }

    SUBCASE("flux_trace requires an adjoint-produced field") {
        const auto V = solve_forward(cfg, grid, TimeSignal::zeros(grid.nt), nullptr, zero, zero);
        CHECK_THROWS_AS(flux_trace(cfg, grid, V, TraceWeight::InvAlphaSq), std::invalid_argument);
    }
}
