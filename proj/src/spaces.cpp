#include "snwave/spaces.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace snwave {

namespace {

// Thomas solve of the interior system K z = rhs, K = tridiag(-1, 2, -1)/dy.
// rhs has ny+1 entries; only 1..ny-1 are read.  z vanishes at the endpoints.
std::vector<double> dirichlet_poisson_solve(int ny, double dy, std::span<const double> rhs) {
    const int m = ny - 1;
    std::vector<double> c(static_cast<std::size_t>(m), 0.0);
    std::vector<double> d(static_cast<std::size_t>(m), 0.0);
    const double diag = 2.0 / dy;
    const double off = -1.0 / dy;
    double piv = diag;
    c[0] = off / piv;
    d[0] = rhs[1] / piv;
    for (int i = 1; i < m; ++i) {
        piv = diag - off * c[static_cast<std::size_t>(i - 1)];
        if (i < m - 1) c[static_cast<std::size_t>(i)] = off / piv;
        d[static_cast<std::size_t>(i)] =
            (rhs[static_cast<std::size_t>(i + 1)] - off * d[static_cast<std::size_t>(i - 1)]) / piv;
    }
    std::vector<double> z(static_cast<std::size_t>(ny) + 1, 0.0);
    z[static_cast<std::size_t>(m)] = d[static_cast<std::size_t>(m - 1)];
    for (int i = m - 2; i >= 0; --i)
        z[static_cast<std::size_t>(i + 1)] =
            d[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i + 2)];
    return z;
}

}  // namespace

DiscreteSpaces::DiscreteSpaces(const ProblemConfig& cfg, const Grid& grid) {
    cfg.validate();
    grid.validate();
    ny_ = grid.ny;
    nt_ = grid.nt;
    dy_ = grid.dy();
    dt_ = cfg.dt(grid);

    wy_.assign(static_cast<std::size_t>(ny_) + 1, dy_);
    wy_.front() = 0.5 * dy_;
    wy_.back() = 0.5 * dy_;

    wt_.assign(static_cast<std::size_t>(nt_) + 1, dt_);
    wt_.front() = 0.5 * dt_;
    wt_.back() = 0.5 * dt_;

    if (cfg.split.mode == ControlSplit::Mode::Overlap) {
        split_node_ = nt_;
        ws1_ = wt_;
        ws2_ = wt_;
    } else {
        split_node_ = static_cast<int>(std::lround(cfg.split.t_split / dt_));
        if (split_node_ < 1) split_node_ = 1;
        if (split_node_ > nt_ - 1) split_node_ = nt_ - 1;
        ws1_.assign(static_cast<std::size_t>(nt_) + 1, 0.0);
        ws2_.assign(static_cast<std::size_t>(nt_) + 1, 0.0);
        for (int n = 0; n <= split_node_; ++n)
            ws1_[static_cast<std::size_t>(n)] =
                (n == 0 || n == split_node_) ? 0.5 * dt_ : dt_;
        for (int n = split_node_; n <= nt_; ++n)
            ws2_[static_cast<std::size_t>(n)] =
                (n == split_node_ || n == nt_) ? 0.5 * dt_ : dt_;
    }
}

void DiscreteSpaces::check_size(std::size_t n, const char* who) const {
    if (n != static_cast<std::size_t>(ny_) + 1)
        throw std::invalid_argument(std::string(who) + ": grid-function size mismatch");
}

double DiscreteSpaces::l2_inner(std::span<const double> a, std::span<const double> b) const {
    check_size(a.size(), "l2_inner");
    check_size(b.size(), "l2_inner");
    double s = 0.0;
    for (int j = 0; j <= ny_; ++j)
        s += wy_[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(j)];
    return s;
}

double DiscreteSpaces::h01_inner(std::span<const double> a, std::span<const double> b) const {
    check_size(a.size(), "h01_inner");
    check_size(b.size(), "h01_inner");
    double s = 0.0;
    for (int j = 0; j < ny_; ++j) {
        const double da = a[static_cast<std::size_t>(j + 1)] - a[static_cast<std::size_t>(j)];
        const double db = b[static_cast<std::size_t>(j + 1)] - b[static_cast<std::size_t>(j)];
        s += da * db / dy_;
    }
    return s;
}

double DiscreteSpaces::l2_norm(std::span<const double> f) const {
    return std::sqrt(l2_inner(f, f));
}

double DiscreteSpaces::h01_norm(std::span<const double> f) const {
    return std::sqrt(h01_inner(f, f));
}

double DiscreteSpaces::hm1_norm(std::span<const double> f) const {
    check_size(f.size(), "hm1_norm");
    const auto z = green_op(f);
    double s = duality_pair(f, z);
    return std::sqrt(s > 0.0 ? s : 0.0);
}

double DiscreteSpaces::norm(std::span<const double> f, NormKind which) const {
    switch (which) {
        case NormKind::L2: return l2_norm(f);
        case NormKind::H01: return h01_norm(f);
        case NormKind::Hm1: return hm1_norm(f);
    }
    throw std::logic_error("norm: bad kind");
}

std::vector<double> DiscreteSpaces::green_op(std::span<const double> u) const {
    check_size(u.size(), "green_op");
    std::vector<double> rhs(static_cast<std::size_t>(ny_) + 1, 0.0);
    for (int j = 1; j < ny_; ++j)
        rhs[static_cast<std::size_t>(j)] = wy_[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
    return dirichlet_poisson_solve(ny_, dy_, rhs);
}

std::vector<double> DiscreteSpaces::h01_apply(std::span<const double> f) const {
    check_size(f.size(), "h01_apply");
    std::vector<double> out(static_cast<std::size_t>(ny_) + 1, 0.0);
    for (int j = 1; j < ny_; ++j)
        out[static_cast<std::size_t>(j)] =
            (-f[static_cast<std::size_t>(j - 1)] + 2.0 * f[static_cast<std::size_t>(j)] -
             f[static_cast<std::size_t>(j + 1)]) /
            (dy_ * dy_);
    return out;
}

double DiscreteSpaces::duality_pair(std::span<const double> u, std::span<const double> h) const {
    return l2_inner(u, h);
}

double DiscreteSpaces::duality_pair_riesz(std::span<const double> u,
                                          std::span<const double> h) const {
    const auto z = green_op(u);
    return h01_inner(z, h);
}

double DiscreteSpaces::integrate_sigma1(const TimeSignal& s) const {
    double acc = 0.0;
    for (int n = 0; n <= nt_; ++n)
        acc += ws1_[static_cast<std::size_t>(n)] * s[n];
    return acc;
}

double DiscreteSpaces::integrate_sigma2(const TimeSignal& s) const {
    double acc = 0.0;
    for (int n = 0; n <= nt_; ++n)
        acc += ws2_[static_cast<std::size_t>(n)] * s[n];
    return acc;
}

TimeSignal DiscreteSpaces::restrict_to(const TimeSignal& s, SigmaSupport sup) const {
    TimeSignal out = s;
    out.support = sup;
    if (sup == SigmaSupport::SigmaStar) return out;
    const auto& w = (sup == SigmaSupport::Sigma1) ? ws1_ : ws2_;
    for (int n = 0; n <= nt_; ++n)
        if (w[static_cast<std::size_t>(n)] == 0.0) out[n] = 0.0;
    return out;
}

}  // namespace snwave
