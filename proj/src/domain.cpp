#include "snwave/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace snwave::domain {

double min_control_time(double k) {
    if (!(k > 0.0) || !(k < 1.0))
        throw std::invalid_argument("min_control_time: requires 0 < k < 1");
    const double x = 2.0 * k * (1.0 + k) / (1.0 - k);
    // expm1 keeps the k -> 0 limit (= 2) accurate.
    return std::expm1(x) / k;
}

std::pair<double, double> map_to_cylinder(double x, double t, double k) {
    if (t < 0.0) throw std::invalid_argument("map_to_cylinder: t must be >= 0");
    const double a = alpha(t, k);
    if (x < -1e-14 || x > a * (1.0 + 1e-14))
        throw std::invalid_argument("map_to_cylinder: x outside [0, alpha(t)]");
    return {x / a, t};
}

std::pair<double, double> map_to_moving(double y, double t, double k) {
    if (t < 0.0) throw std::invalid_argument("map_to_moving: t must be >= 0");
    if (y < -1e-14 || y > 1.0 + 1e-14)
        throw std::invalid_argument("map_to_moving: y outside [0, 1]");
    return {y * alpha(t, k), t};
}

std::pair<std::vector<double>, std::vector<double>>
transform_initial_data(std::span<const double> u0, std::span<const double> u1, double k) {
    if (u0.size() != u1.size() || u0.size() < 3)
        throw std::invalid_argument("transform_initial_data: size mismatch");
    const int n = static_cast<int>(u0.size()) - 1;
    const double dy = 1.0 / static_cast<double>(n);

    std::vector<double> v0(u0.begin(), u0.end());
    std::vector<double> v1(u1.begin(), u1.end());
    for (int j = 0; j <= n; ++j) {
        double du;
        if (j == 0)
            du = (-3.0 * u0[0] + 4.0 * u0[1] - u0[2]) / (2.0 * dy);
        else if (j == n)
            du = (3.0 * u0[n] - 4.0 * u0[n - 1] + u0[n - 2]) / (2.0 * dy);
        else
            du = (u0[j + 1] - u0[j - 1]) / (2.0 * dy);
        v1[static_cast<std::size_t>(j)] += k * (j * dy) * du;
    }
    return {std::move(v0), std::move(v1)};
}

}  // namespace snwave::domain
