#pragma once

#include <span>
#include <vector>

#include "snwave/config.hpp"
#include "snwave/spaces.hpp"
#include "snwave/types.hpp"

namespace snwave::wavesolver {

/// Scaling applied to the discrete boundary trace: the roles (1/alpha^2) p_y
/// and (1/alpha^4) p_y of the optimality formulas.
enum class TraceWeight { InvAlphaSq, InvAlpha4 };

/// Solves v'' - [(beta/alpha) v_y]_y + (gamma/alpha) v'_y = source on the
/// cylinder with v(0,t) = 0, v(1,t) = bc1(t), v(.,0) = v0, v'(.,0) = v1.
///
/// Central second differences in time; the divergence term uses the
/// conservative half-node stencil; the mixed term couples the new level
/// through a tridiagonal solve (I/dt^2 + Gamma_n/(2dt)).  The first step is
/// the second-order Taylor start.
///
/// `source` may be null (homogeneous equation).
SpaceTimeField solve_forward(const ProblemConfig& cfg, const Grid& grid,
                             const TimeSignal& bc1, const SpaceTimeField* source,
                             std::span<const double> v0, std::span<const double> v1);

/// Convenience overload: zero initial data.
SpaceTimeField solve_forward(const ProblemConfig& cfg, const Grid& grid,
                             const TimeSignal& bc1, const SpaceTimeField* source = nullptr);

/// Solves the exact discrete transpose of the forward time-stepping map,
/// run backward from terminal data (pT, pT_prime), with the given source and
/// homogeneous Dirichlet rows at both ends.  The returned field carries the
/// exact boundary-trace data consumed by flux_trace().
///
/// Terminal data enters through the transpose of the one-sided terminal
/// extraction stencil, so pairings against forward solutions reproduce
/// <x'(T), pT> - <x(T), pT_prime> exactly.
SpaceTimeField solve_backward_adjoint(const ProblemConfig& cfg, const Grid& grid,
                                      const SpaceTimeField* source,
                                      std::span<const double> pT,
                                      std::span<const double> pT_prime);

/// Backward solve with an additional delta * pT contribution in the terminal
/// velocity slot (transpose of the shifted observation g'(T) + delta g(T)).
SpaceTimeField solve_backward_adjoint_shifted(const ProblemConfig& cfg, const Grid& grid,
                                              const SpaceTimeField* source,
                                              std::span<const double> pT,
                                              std::span<const double> pT_prime,
                                              double delta);

/// Adjoint-consistent discrete trace at y = 1 of a backward-solver field,
/// Riesz-represented against the trapezoidal time quadrature.  Defined as the
/// exact transpose of the Dirichlet boundary-injection of solve_forward, so
/// the discrete Euler-Lagrange identities hold to machine precision.
/// InvAlpha4 divides the InvAlphaSq trace by alpha(t)^2 once more.
TimeSignal flux_trace(const ProblemConfig& cfg, const Grid& grid,
                      const SpaceTimeField& field, TraceWeight weight);

/// One-sided finite-difference trace diagnostic.  Approximates the conormal
/// derivative (1 - k^2 y^2)/alpha^2 * p_y at y = 1 and must agree with
/// flux_trace at second order on smooth data.  Requires a zero boundary row.
TimeSignal flux_trace_diagnostic(const ProblemConfig& cfg, const Grid& grid,
                                 const SpaceTimeField& field, TraceWeight weight);

/// flux_trace restricted to one boundary piece and Riesz-represented in that
/// piece's own quadrature (the weights differ from the full trapezoid rule at
/// a TimePartition split node).  This is the restriction used by the
/// optimality formulas; under Overlap it equals flux_trace masked to the
/// piece.
TimeSignal flux_trace_on(const DiscreteSpaces& spaces, const SpaceTimeField& field,
                         SigmaSupport piece);

/// Last row of the field plus the second-order one-sided discrete time
/// derivative (3V^N - 4V^{N-1} + V^{N-2}) / (2 dt).
TerminalPair terminal_pair(const ProblemConfig& cfg, const Grid& grid,
                           const SpaceTimeField& field);

/// All input adjoints of one reverse sweep.  bc_bar, source_bar, v0_bar and
/// v1_bar are the exact transposes of the corresponding forward inputs
/// against the Euclidean seed; solve_backward_adjoint wraps this with the
/// space-time quadrature scaling.
struct ReverseSweepResult {
    SpaceTimeField p;               ///< quadrature-rescaled source adjoint
    std::vector<double> trace_raw;  ///< exact boundary-injection transpose
    std::vector<double> v0_bar;
    std::vector<double> v1_bar;
};

/// Reverse sweep against an arbitrary Euclidean seed field.  Test hook and
/// building block of the adjoint machinery.
ReverseSweepResult reverse_sweep(const ProblemConfig& cfg, const Grid& grid,
                                 const SpaceTimeField& seed);

}  // namespace snwave::wavesolver
