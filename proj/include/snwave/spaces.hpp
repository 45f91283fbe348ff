#pragma once

#include <span>
#include <vector>

#include "snwave/config.hpp"
#include "snwave/types.hpp"

namespace snwave {

enum class NormKind { L2, H01, Hm1 };

/// Discrete realizations of L2(0,1), H_0^1(0,1) and H^-1(0,1) on the spatial
/// grid, trapezoidal quadrature in space and time, and the quadrature weights
/// of the boundary pieces Sigma_1 / Sigma_2 implied by the control split.
///
/// H_0^1 is the first-difference quadratic form, H^-1 its exact dual through
/// the inverse 3-point Dirichlet Laplacian (the Green operator), so the Riesz
/// identity <u,h>_{L2 pairing} = (green_op(u), h)_{H01} holds to roundoff.
class DiscreteSpaces {
  public:
    DiscreteSpaces(const ProblemConfig& cfg, const Grid& grid);

    int ny() const { return ny_; }
    int nt() const { return nt_; }
    double dy() const { return dy_; }
    double dt() const { return dt_; }

    /// Trapezoidal weights for L2(0,1); boundary nodes carry dy/2.
    const std::vector<double>& l2_weights() const { return wy_; }
    /// Trapezoidal weights for integrals over (0,T).
    const std::vector<double>& time_weights() const { return wt_; }
    /// Quadrature weights of Sigma_1 (zero off its support).
    const std::vector<double>& sigma1_weights() const { return ws1_; }
    /// Quadrature weights of Sigma_2 (zero off its support).
    const std::vector<double>& sigma2_weights() const { return ws2_; }
    /// Time node where a TimePartition split sits; nt for Overlap (unused).
    int split_node() const { return split_node_; }

    bool on_sigma1(int n) const { return ws1_[static_cast<std::size_t>(n)] > 0.0; }
    bool on_sigma2(int n) const { return ws2_[static_cast<std::size_t>(n)] > 0.0; }

    double l2_inner(std::span<const double> a, std::span<const double> b) const;
    double h01_inner(std::span<const double> a, std::span<const double> b) const;

    double l2_norm(std::span<const double> f) const;
    double h01_norm(std::span<const double> f) const;
    double hm1_norm(std::span<const double> f) const;
    double norm(std::span<const double> f, NormKind which) const;

    /// Inverse discrete Dirichlet Laplacian: solves K z = W_y u with z = 0 at
    /// both endpoints.  Maps the H^-1 role onto its H_0^1 Riesz representative.
    std::vector<double> green_op(std::span<const double> u) const;

    /// Strong discrete Dirichlet Laplacian (negative second difference);
    /// inverse of green_op on functions vanishing at the endpoints.
    std::vector<double> h01_apply(std::span<const double> f) const;

    /// Duality pairing <u, h> between the H^-1 role and H_0^1, evaluated as
    /// the plain L2 pairing u^T W_y h.
    double duality_pair(std::span<const double> u, std::span<const double> h) const;
    /// The same pairing through the Riesz route (green_op(u), h)_{H01}.
    double duality_pair_riesz(std::span<const double> u, std::span<const double> h) const;

    double integrate_sigma1(const TimeSignal& s) const;
    double integrate_sigma2(const TimeSignal& s) const;

    /// Zeroes samples outside the support piece and tags the signal.
    TimeSignal restrict_to(const TimeSignal& s, SigmaSupport sup) const;

  private:
    void check_size(std::size_t n, const char* who) const;

    int ny_, nt_;
    double dy_, dt_;
    int split_node_;
    std::vector<double> wy_, wt_, ws1_, ws2_;
};

}  // namespace snwave
