#pragma once

#include <utility>
#include <vector>

#include "snwave/config.hpp"
#include "snwave/spaces.hpp"
#include "snwave/types.hpp"
#include "snwave/wavesolver.hpp"

namespace snwave::nash {

/// Follower problem: minimize J2(w1, .) over controls on Sigma_2 for a fixed
/// leader w1 and tracking target v2.
struct FollowerProblem {
    TimeSignal w1;             ///< leader control, supported on Sigma_1
    SpaceTimeField v2_target;  ///< tracking target in L2(Q); empty means zero
    ProblemConfig config;
    Grid grid;
    double tol = 1e-10;  ///< CG stop: gradient norm relative to its initial value
    int max_iter = 500;
};

/// Nash equilibrium for a fixed leader.  The returned triple satisfies the
/// boundary coupling exactly: w2 is the Sigma_2 trace of p scaled by 1/sigma,
/// and v is the forward solve of w1 + w2.  grad_norm is measured a posteriori
/// at the returned control.
struct NashSolution {
    TimeSignal w2;
    SpaceTimeField v;
    SpaceTimeField p;
    double grad_norm = 0.0;
    int iterations = 0;
    std::vector<double> cg_history;  ///< gradient norm per CG iteration
};

/// Dirichlet value at y=1 implied by the split: the (masked) sum w1 + w2.
TimeSignal compose_boundary(const DiscreteSpaces& spaces, const TimeSignal& w1,
                            const TimeSignal& w2);

/// Leader cost J(w1) = 1/2 integral_{Sigma_1} w1^2.
double eval_J(const DiscreteSpaces& spaces, const TimeSignal& w1);

/// Follower cost J2 = 1/2 iint alpha (v - v2)^2 + sigma/2 integral_{Sigma_2} w2^2
/// with v the forward state under the split's boundary composition.
double eval_J2(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
               const TimeSignal& w1, const TimeSignal& w2, const SpaceTimeField* v2);

/// Exact gradient of the discrete eval_J2 with respect to w2, represented in
/// the Sigma_2 quadrature: sigma w2 - flux_trace(p)|_{Sigma_2} with
/// p = solve_backward_adjoint(alpha (v - v2), 0, 0).
TimeSignal grad_J2_w2(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                      const TimeSignal& w1, const TimeSignal& w2, const SpaceTimeField* v2);

/// Pointwise alpha(t) * (v - v2), the adjoint source of the tracking term.
SpaceTimeField tracking_source(const ProblemConfig& cfg, const Grid& grid,
                               const SpaceTimeField& v, const SpaceTimeField* v2);

/// Conjugate gradient on the reduced normal operator (sigma I + K* M K) in
/// the Sigma_2 inner product.  Unique minimizer of the strictly convex J2.
NashSolution solve_follower(const FollowerProblem& problem);

/// The coupled forward/adjoint pair of the follower optimality system.
/// Implemented by solve_follower plus assembly.
std::pair<SpaceTimeField, SpaceTimeField>
solve_optimality_system(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                        const TimeSignal& w1, const SpaceTimeField* v2, double tol = 1e-10,
                        int max_iter = 500);

/// Fixed-point cross-check of the coupling: alternates state and adjoint
/// solves with relaxation omega.  Contracts only for sigma large enough;
/// kept as an independent second route.
NashSolution picard_optimality_system(const ProblemConfig& cfg, const Grid& grid,
                                      const DiscreteSpaces& spaces, const TimeSignal& w1,
                                      const SpaceTimeField* v2, double omega = 1.0,
                                      double tol = 1e-10, int max_sweeps = 200);

/// Shared building block: CG solve of (sigma I + N) x = rhs on Sigma_2, where
/// N w = -trace(backward(alpha * forward(w on Sigma_2))).  Also used by the
/// leader's adjoint coupling.
struct Sigma2CgResult {
    TimeSignal x;
    int iterations = 0;
    std::vector<double> history;
};
Sigma2CgResult solve_sigma2_normal(const ProblemConfig& cfg, const Grid& grid,
                                   const DiscreteSpaces& spaces, const TimeSignal& rhs,
                                   double tol, int max_iter);

}  // namespace snwave::nash
