#pragma once

#include <span>
#include <utility>
#include <vector>

#include "snwave/config.hpp"
#include "snwave/types.hpp"

namespace snwave::domain {

/// Position of the moving endpoint at time t.
inline double alpha(double t, double k) { return 1.0 + k * t; }

/// Principal coefficient of the transformed operator, (1 - k^2 y^2) / alpha.
/// Strictly positive on [0,1] for 0 < k < 1.
inline double beta(double y, double t, double k) {
    return (1.0 - k * k * y * y) / alpha(t, k);
}

/// Convection coefficient of the mixed space-time term.
inline double gamma(double y, double k) { return -2.0 * k * y; }

/// Lower bound on the control horizon for approximate controllability,
/// (e^{2k(1+k)/(1-k)} - 1) / k.  Tends to 2 as k -> 0+.
double min_control_time(double k);

/// True when the configured horizon exceeds the controllability bound.
inline bool check_time_horizon(const ProblemConfig& cfg) {
    return cfg.T > min_control_time(cfg.k);
}

/// Moving-domain point (x,t) -> cylinder point (y,t), y = x / alpha(t).
std::pair<double, double> map_to_cylinder(double x, double t, double k);

/// Cylinder point (y,t) -> moving-domain point (x,t), x = y * alpha(t).
std::pair<double, double> map_to_moving(double y, double t, double k);

/// Transformed initial data: v0 = u0 and v1(y) = u1(y) + k*y*u0'(y).
/// The derivative is taken with second-order centered differences
/// (one-sided at the endpoints).  For k = 0 the data comes back unchanged.
std::pair<std::vector<double>, std::vector<double>>
transform_initial_data(std::span<const double> u0, std::span<const double> u1, double k);

}  // namespace snwave::domain
