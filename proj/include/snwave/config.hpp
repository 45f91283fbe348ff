#pragma once

#include <stdexcept>

#include "snwave/types.hpp"

namespace snwave {

/// Geometry of the control split on the moving-endpoint boundary.
///
/// Overlap: both controls act on the whole boundary piece {y=1} x (0,T) and
/// the imposed Dirichlet value is their sum.  TimePartition: w1 acts on
/// (0, t_split), w2 on (t_split, T); the split instant is snapped to the
/// nearest time node and that node carries half quadrature weight on each
/// side.
struct ControlSplit {
    enum class Mode { Overlap, TimePartition };
    Mode mode = Mode::Overlap;
    double t_split = 0.0;  ///< only for TimePartition, 0 < t_split < T
};

/// Physical and optimization parameters of one problem instance.
///
/// k = 0 (frozen domain, the cylindrical limit) is accepted by the solvers;
/// the controllability-time bound itself is only defined for k > 0.
struct ProblemConfig {
    double k = 0.3;      ///< endpoint speed, 0 <= k < 1
    double T = 2.0;      ///< final time
    double sigma = 10.0; ///< follower penalty, > 0
    double delta = 0.0;  ///< observation shift in the terminal velocity slot
    double rho0 = 0.0;   ///< L2 ball radius
    double rho1 = 0.0;   ///< H^-1 ball radius
    ControlSplit split;

    void validate() const {
        if (!(k >= 0.0) || !(k < 1.0))
            throw std::invalid_argument("ProblemConfig: requires 0 <= k < 1");
        if (!(T > 0.0)) throw std::invalid_argument("ProblemConfig: requires T > 0");
        if (!(sigma > 0.0)) throw std::invalid_argument("ProblemConfig: requires sigma > 0");
        if (rho0 < 0.0 || rho1 < 0.0)
            throw std::invalid_argument("ProblemConfig: ball radii must be >= 0");
        if (delta < 0.0) throw std::invalid_argument("ProblemConfig: requires delta >= 0");
        if (split.mode == ControlSplit::Mode::TimePartition &&
            !(split.t_split > 0.0 && split.t_split < T))
            throw std::invalid_argument("ProblemConfig: t_split must lie in (0,T)");
    }

    double dt(const Grid& g) const { return T / static_cast<double>(g.nt); }

    /// Characteristic speeds of the transformed operator are bounded by 1+k,
    /// so explicit stability needs dt <= cfl * dy / (1+k).
    bool cfl_ok(const Grid& g) const { return dt(g) <= g.cfl * g.dy() / (1.0 + k) + 1e-15; }

    void ensure_stable(const Grid& g) const {
        g.validate();
        if (!cfl_ok(g))
            throw std::invalid_argument("CFL violation: need dt <= cfl*dy/(1+k)");
    }
};

/// Smallest nt satisfying the CFL bound for this config at the given ny.
inline int nt_for_cfl(const ProblemConfig& cfg, int ny, double cfl = 0.5) {
    const double dy = 1.0 / static_cast<double>(ny);
    const double dt_max = cfl * dy / (1.0 + cfg.k);
    int nt = static_cast<int>(std::ceil(cfg.T / dt_max));
    return nt < 4 ? 4 : nt;
}

}  // namespace snwave
