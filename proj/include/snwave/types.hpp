#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace snwave {

/// Iterative solver failed to meet its tolerance; the message carries the
/// last residual or contraction estimate.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Space-time mesh for the unit cylinder Q = (0,1) x (0,T).
/// Nodes y_j = j*dy (j = 0..ny, dy = 1/ny) and t_n = n*dt (n = 0..nt, dt = T/nt).
struct Grid {
    int ny = 0;          ///< number of spatial cells
    int nt = 0;          ///< number of time steps
    double cfl = 0.5;    ///< Courant safety factor in (0,1]

    double dy() const { return 1.0 / static_cast<double>(ny); }

    void validate() const {
        if (ny < 4 || nt < 4)
            throw std::invalid_argument("Grid: ny and nt must both be >= 4");
        if (!(cfl > 0.0) || cfl > 1.0)
            throw std::invalid_argument("Grid: cfl must lie in (0,1]");
    }
};

/// Which piece of the controlled boundary {y=1} x (0,T) a signal lives on.
enum class SigmaSupport { Sigma1, Sigma2, SigmaStar };

/// A boundary control or boundary trace sampled at the time nodes of a grid.
/// Samples outside the declared support are kept at zero.
struct TimeSignal {
    std::vector<double> samples;
    SigmaSupport support = SigmaSupport::SigmaStar;

    static TimeSignal zeros(int nt, SigmaSupport sup = SigmaSupport::SigmaStar) {
        TimeSignal s;
        s.samples.assign(static_cast<std::size_t>(nt) + 1, 0.0);
        s.support = sup;
        return s;
    }

    int nt() const { return static_cast<int>(samples.size()) - 1; }
    double& operator[](int n) { return samples[static_cast<std::size_t>(n)]; }
    double operator[](int n) const { return samples[static_cast<std::size_t>(n)]; }

    bool all_finite() const {
        for (double v : samples)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Exact boundary-trace data attached to fields produced by the adjoint
/// (backward) solver.  `raw[n]` is the un-Riesz'd linear functional of the
/// boundary-injection transpose at time node n; flux_trace() turns it into
/// the quadrature-weighted trace signal.
struct AdjointTraceData {
    std::vector<double> raw;
};

/// A scalar function on the space-time grid, row-major by time level.
struct SpaceTimeField {
    int ny = 0;
    int nt = 0;
    std::vector<double> values;
    std::shared_ptr<const AdjointTraceData> adjoint_trace;  ///< set by backward solves

    static SpaceTimeField zeros(const Grid& g) {
        SpaceTimeField f;
        f.ny = g.ny;
        f.nt = g.nt;
        f.values.assign(static_cast<std::size_t>(g.nt + 1) * (g.ny + 1), 0.0);
        return f;
    }

    double& at(int n, int j) { return values[static_cast<std::size_t>(n) * (ny + 1) + j]; }
    double at(int n, int j) const { return values[static_cast<std::size_t>(n) * (ny + 1) + j]; }

    std::span<double> row(int n) {
        return {values.data() + static_cast<std::size_t>(n) * (ny + 1),
                static_cast<std::size_t>(ny + 1)};
    }
    std::span<const double> row(int n) const {
        return {values.data() + static_cast<std::size_t>(n) * (ny + 1),
                static_cast<std::size_t>(ny + 1)};
    }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Terminal state of a space-time field: the last row (L2 role) and the
/// second-order one-sided discrete time derivative at t = T (H^-1 role).
struct TerminalPair {
    std::vector<double> position;
    std::vector<double> velocity;
};

/// The pair (f0, f1) in H_0^1 x L2 driving the leader's dual problem.
struct DualVariable {
    std::vector<double> f0;  ///< vanishes at both endpoints
    std::vector<double> f1;

    static DualVariable zeros(int ny) {
        DualVariable d;
        d.f0.assign(static_cast<std::size_t>(ny) + 1, 0.0);
        d.f1.assign(static_cast<std::size_t>(ny) + 1, 0.0);
        return d;
    }
};

}  // namespace snwave
