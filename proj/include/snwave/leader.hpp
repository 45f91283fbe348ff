#pragma once

#include <utility>
#include <vector>

#include "snwave/config.hpp"
#include "snwave/nash.hpp"
#include "snwave/spaces.hpp"
#include "snwave/types.hpp"

namespace snwave::leader {

/// Terminal targets of the leader problem and the ball radii of the
/// approximate-controllability constraint.
struct TargetSpec {
    std::vector<double> v0_target;  ///< L2 role
    std::vector<double> v1_target;  ///< H^-1 role
    double rho0 = 0.0;
    double rho1 = 0.0;
};

/// How the coupled adjoint pair behind A* is resolved.  Picard follows the
/// alternate-solve iteration (contracts for sigma large enough); NormalCg
/// solves the same trace fixed point through the unconditionally convergent
/// normal equations and is the documented fallback for small sigma.
enum class AstarMethod { Picard, NormalCg };

struct LeaderOptions {
    double follower_tol = 1e-11;
    int follower_max_iter = 2000;
    AstarMethod astar_method = AstarMethod::Picard;
    double astar_tol = 1e-11;
    int astar_max_iter = 400;
    double picard_omega = 1.0;
    double tol = 1e-6;        ///< minimize_Theta relative residual target
    int max_iter = 200;       ///< CR iterations (rho = 0)
    int prox_max_iter = 5000; ///< proximal-gradient iterations (rho > 0)
    bool warm_start = true;   ///< seed the prox iteration from a CR run at the ball scale
    bool dense_prox_operator = true;  ///< assemble Lambda once when the dual space is small
    int dense_dim_limit = 600;        ///< largest dual dimension assembled densely
    bool allow_plateau = false;  ///< return the best iterate instead of throwing
    int power_iters = 25;
    std::uint64_t vi_seed = 2026;
};

/// Leaderless baseline: the Nash optimality system with w1 = 0.
struct BasePair {
    SpaceTimeField v0_field;
    SpaceTimeField p0_field;
    TerminalPair terminal;
};
BasePair solve_base_pair(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                         const SpaceTimeField* v2, const LeaderOptions& opts = {});

/// Image of the controllability operator: {g'(T) + delta g(T), -g(T)} of the
/// coupled (g, q) system driven by w1 with zero target and zero initial data.
struct APair {
    std::vector<double> hm1;  ///< H^-1 role
    std::vector<double> l2;   ///< L2 role
};
APair apply_A(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
              const TimeSignal& w1, const LeaderOptions& opts = {});

/// The adjoint trace -(1/alpha^2) phi_y on Sigma_1 of the coupled (phi, psi)
/// pair with terminal data f.  Exact discrete adjoint of apply_A up to the
/// coupling tolerance.
struct AstarResult {
    TimeSignal w_trace;  ///< A* f, supported on Sigma_1
    SpaceTimeField phi;
    SpaceTimeField psi;
    int iterations = 0;
    double contraction = 0.0;
};
AstarResult apply_Astar(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                        const DualVariable& f, const LeaderOptions& opts = {});

/// Dual functional: 1/2 ||A* f||^2_{Sigma_1} + (v0 - v0_base(T), f1)
/// - <v1 - v0_base'(T), f0> + rho1 ||f0||_{H01} + rho0 ||f1||_{L2}.
/// With delta > 0 the shifted-observation term needs the g(T) of a current
/// leader iterate, passed as leader_gT.
double eval_Theta(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                  const DualVariable& f, const TargetSpec& target, const TerminalPair& base_terminal,
                  const LeaderOptions& opts = {}, const std::vector<double>* leader_gT = nullptr);

enum class ThetaMode { Cg, Prox };

struct MinimizeResult {
    DualVariable f;
    int iterations = 0;
    bool converged = false;
    std::vector<double> hist_l2;        ///< L2 terminal residual per iteration
    std::vector<double> hist_hm1;       ///< H^-1 terminal residual per iteration
    std::vector<double> hist_combined;  ///< sqrt(l2^2 + hm1^2), the CR residual
    double step = 0.0;                  ///< prox step size (rho > 0)
};

/// rho = 0: conjugate-residual Krylov iteration on the normal system
/// Lambda f = b in the H01 x L2 inner product; the minimized quantity is the
/// combined terminal residual, so the history is monotone by construction.
/// rho > 0: proximal gradient with the exact block norm-shrinkage prox and a
/// power-iteration step size.
MinimizeResult minimize_Theta(const ProblemConfig& cfg, const Grid& grid,
                              const DiscreteSpaces& spaces, const TargetSpec& target,
                              const TerminalPair& base_terminal, ThetaMode mode,
                              const LeaderOptions& opts = {});

/// Optimal leader from the converged dual variable: w1 = A* f.
TimeSignal recover_leader(const ProblemConfig& cfg, const Grid& grid, const DiscreteSpaces& spaces,
                          const DualVariable& f_star, const LeaderOptions& opts = {});

/// Left-hand side of the dual variational inequality at samples fhat
/// (includes fhat = 0, fhat = f*, fhat = 2 f*); returns the worst value
/// relative to each sample's own term scale (>= ~ -tol at a converged dual
/// solution).
double check_variational_inequality(const ProblemConfig& cfg, const Grid& grid,
                                    const DiscreteSpaces& spaces, const DualVariable& f_star,
                                    const TargetSpec& target, const TerminalPair& achieved,
                                    int n_samples, const LeaderOptions& opts = {});

struct DualityReport {
    double primal = 0.0;   ///< J(w1*), meaningful when feasible
    double dual = 0.0;     ///< -Theta(f*)
    double gap = 0.0;      ///< primal - dual
    double gap_rel = 0.0;
    bool feasible = false;
    bool weak_duality_ok = false;
};
DualityReport duality_report(const DiscreteSpaces& spaces, const TimeSignal& w1_star,
                             double theta_value, const TargetSpec& target, double residual_l2,
                             double residual_hm1, double tol_scale = 1e-8);

/// Full leader pipeline: baseline, dual minimization, leader recovery, the
/// closed-loop optimality system, residuals, duality and the variational
/// inequality check.
struct LeaderSolution {
    DualVariable f_star;
    TimeSignal w1_star;
    double theta_value = 0.0;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;
    double residual_l2 = 0.0;
    double residual_hm1 = 0.0;
    int iterations = 0;
    bool converged = false;
    bool feasible = false;
    double vi_worst = 0.0;
    TerminalPair achieved;
    std::vector<double> hist_l2, hist_hm1, hist_combined;
};
LeaderSolution solve_leader(const ProblemConfig& cfg, const Grid& grid,
                            const DiscreteSpaces& spaces, const SpaceTimeField* v2,
                            const TargetSpec& target, const LeaderOptions& opts = {},
                            int vi_samples = 100);

}  // namespace snwave::leader
