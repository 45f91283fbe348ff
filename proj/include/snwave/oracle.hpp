#pragma once

#include <memory>
#include <vector>

#include "snwave/config.hpp"
#include "snwave/spaces.hpp"
#include "snwave/types.hpp"

namespace snwave::oracle {

/// Small dense row-major matrix.
struct DenseMatrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    std::vector<double> apply(const std::vector<double>& x) const;
    std::vector<double> apply_transpose(const std::vector<double>& x) const;
};

/// LU factorization with partial pivoting; throws SolverError on a
/// numerically singular system, nothing is regularized silently.
class DenseLu {
  public:
    explicit DenseLu(DenseMatrix A);
    std::vector<double> solve(std::vector<double> b) const;
    int size() const { return lu_.rows; }

  private:
    DenseMatrix lu_;
    std::vector<int> piv_;
};

/// One-shot solve of A x = b.
std::vector<double> dense_solve(DenseMatrix A, std::vector<double> b);

/// Dense image of the forward solve map, assembled column by column from
/// unit impulses pushed through the real solver.  Certifies the iterative
/// algorithms against brute force while sharing the discretization.
///
/// Input stacking: [bc (nt+1) | source ((nt+1)(ny+1)) | v0 (ny+1) | v1 (ny+1)].
class DenseSystem {
  public:
    DenseSystem(const ProblemConfig& cfg, const Grid& grid);

    int field_size() const { return field_; }
    int input_size() const { return inputs_; }
    int bc_offset() const { return 0; }
    int source_offset() const { return nbc_; }
    int v0_offset() const { return nbc_ + field_; }
    int v1_offset() const { return nbc_ + field_ + nsp_; }

    const DenseMatrix& forward_matrix() const { return S_; }

    /// Forward apply on stacked inputs.
    std::vector<double> apply_forward(const std::vector<double>& stacked) const;

    /// Forward apply of a boundary signal alone (bc block columns only).
    std::vector<double> apply_forward_bc(const TimeSignal& bc) const;

    struct Backward {
        std::vector<double> p;          ///< quadrature-rescaled source adjoint field
        std::vector<double> trace_raw;  ///< boundary-injection transpose
    };
    /// Dense transpose solve: the literal S^T against the seeded weights.
    Backward apply_backward(const std::vector<double>& source_field,
                            const std::vector<double>& pT, const std::vector<double>& pT_prime,
                            double delta = 0.0) const;

    std::vector<double> seed_vector(const std::vector<double>& source_field,
                                    const std::vector<double>& pT,
                                    const std::vector<double>& pT_prime, double delta) const;

    double wq(int n, int j) const { return wt_[static_cast<std::size_t>(n)] * wy_[static_cast<std::size_t>(j)]; }
    double alpha_at(int n) const { return 1.0 + cfg_.k * n * dt_; }
    const ProblemConfig& config() const { return cfg_; }
    const Grid& grid() const { return grid_; }

  private:
    ProblemConfig cfg_;
    Grid grid_;
    int field_, inputs_, nbc_, nsp_;
    double dt_;
    std::vector<double> wy_, wt_;
    DenseMatrix S_;
};

/// Dense follower machinery with the reduced Hessian assembled and factored
/// once; solves per-leader right-hand sides afterwards.
class DenseFollower {
  public:
    DenseFollower(const DenseSystem& sys, const DiscreteSpaces& spaces);
    TimeSignal solve(const TimeSignal& w1, const SpaceTimeField* v2) const;
    const std::vector<int>& sigma2_nodes() const { return nodes_; }

  private:
    const DenseSystem& sys_;
    const DiscreteSpaces& spaces_;
    std::vector<int> nodes_;
    std::unique_ptr<DenseLu> lu_;
};

/// Direct dense solve of the follower's normal equations.
TimeSignal dense_follower(const DenseSystem& sys, const DiscreteSpaces& spaces,
                          const TimeSignal& w1, const SpaceTimeField* v2);

/// Dense controllability operator: columns are terminal pairs of the coupled
/// (g, q) system per unit leader impulse on Sigma_1.
struct DenseLeaderOperator {
    std::vector<int> sigma1_nodes;     ///< stacked w1 dof
    DenseMatrix A_hm1;                 ///< rows: grid nodes, H^-1 slot g'(T)+delta g(T)
    DenseMatrix A_l2;                  ///< rows: grid nodes, L2 slot -g(T)
};
DenseLeaderOperator assemble_leader_operator(const DenseSystem& sys,
                                             const DiscreteSpaces& spaces);

/// A* f on Sigma_1 by pure matrix algebra on the assembled blocks: an
/// independent route from the iterative Picard coupling.
std::vector<double> dense_apply_Astar(const DenseLeaderOperator& op,
                                      const DiscreteSpaces& spaces,
                                      const std::vector<double>& f0,
                                      const std::vector<double>& f1);

struct DenseKktResult {
    TimeSignal w1;
    DualVariable f;
    double primal = 0.0;
    double dual = 0.0;
};

/// Direct dense solve of the leader problem on a tiny grid: for rho = 0 the
/// normal system Lambda f = b; for rho > 0 a dense proximal iteration run to
/// 1e-12.  Targets are measured relative to the baseline terminal pair.
DenseKktResult dense_leader_kkt(const DenseSystem& sys, const DiscreteSpaces& spaces,
                                const std::vector<double>& v0_target,
                                const std::vector<double>& v1_target, double rho0, double rho1,
                                const SpaceTimeField* v2);

}  // namespace snwave::oracle
