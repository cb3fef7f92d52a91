#include "ym/geometry.hpp"

#include <algorithm>

namespace ym {

GridDomain GridDomain::box(std::vector<double> lo_, std::vector<double> hi_,
                           std::vector<int> res_) {
    if (lo_.size() != hi_.size() || lo_.size() != res_.size() || lo_.empty() ||
        lo_.size() > static_cast<size_t>(kMaxDim))
        throw std::invalid_argument("GridDomain::box: inconsistent axis specs");
    GridDomain g;
    g.kind = DomainKind::omega;
    g.dim = static_cast<int>(lo_.size());
    for (int i = 0; i < g.dim; ++i) {
        if (!(lo_[static_cast<size_t>(i)] < hi_[static_cast<size_t>(i)])) throw std::invalid_argument("GridDomain::box: empty axis");
        if (res_[static_cast<size_t>(i)] < 2) throw std::invalid_argument("GridDomain::box: resolution must be >= 2");
        g.lo[static_cast<size_t>(i)] = lo_[static_cast<size_t>(i)];
        g.hi[static_cast<size_t>(i)] = hi_[static_cast<size_t>(i)];
        g.res[static_cast<size_t>(i)] = res_[static_cast<size_t>(i)];
    }
    return g;
}

GridDomain GridDomain::unit_torus(int d, int n) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("unit_torus: bad dimension");
    if (n < 2) throw std::invalid_argument("unit_torus: resolution must be >= 2");
    GridDomain g;
    g.kind = DomainKind::torus;
    g.dim = d;
    for (int i = 0; i < d; ++i) {
        g.lo[static_cast<size_t>(i)] = 0.0;
        g.hi[static_cast<size_t>(i)] = 1.0;
        g.res[static_cast<size_t>(i)] = n;
    }
    return g;
}

int GridDomain::axis_index(int ax, double x) const {
    const auto a = static_cast<size_t>(ax);
    double t;
    if (kind == DomainKind::torus) {
        t = frac01(x);
    } else {
        t = (x - lo[a]) / (hi[a] - lo[a]);
    }
    int i = static_cast<int>(std::floor(t * res[a]));
    // boundary points belong to the lower-index cell
    if (i > 0 && t * res[a] == static_cast<double>(i)) --i;
    return std::clamp(i, 0, res[a] - 1);
}

int64_t GridDomain::cell_index(const Pt& p) const {
    std::array<int, kMaxDim> m{0, 0, 0};
    for (int i = 0; i < dim; ++i) m[static_cast<size_t>(i)] = axis_index(i, p[i]);
    return flatten(m);
}

std::array<int, kMaxDim> GridDomain::cell_multi(int64_t idx) const {
    std::array<int, kMaxDim> m{0, 0, 0};
    for (int i = dim - 1; i >= 0; --i) {
        m[static_cast<size_t>(i)] = static_cast<int>(idx % res[static_cast<size_t>(i)]);
        idx /= res[static_cast<size_t>(i)];
    }
    return m;
}

int64_t GridDomain::flatten(const std::array<int, kMaxDim>& m) const {
    int64_t idx = 0;
    for (int i = 0; i < dim; ++i) idx = idx * res[static_cast<size_t>(i)] + m[static_cast<size_t>(i)];
    return idx;
}

Pt GridDomain::cell_center(int64_t idx) const {
    auto m = cell_multi(idx);
    Pt p;
    p.dim = dim;
    for (int i = 0; i < dim; ++i)
        p[i] = lo[static_cast<size_t>(i)] + (m[static_cast<size_t>(i)] + 0.5) * width(i);
    return p;
}

void GridDomain::cell_bounds(int64_t idx, Pt& clo, Pt& chi) const {
    auto m = cell_multi(idx);
    clo.dim = chi.dim = dim;
    for (int i = 0; i < dim; ++i) {
        clo[i] = lo[static_cast<size_t>(i)] + m[static_cast<size_t>(i)] * width(i);
        chi[i] = clo[i] + width(i);
    }
}

bool GridDomain::contains(const Pt& p, double tol) const {
    if (kind == DomainKind::torus) return true;
    for (int i = 0; i < dim; ++i)
        if (p[i] < lo[static_cast<size_t>(i)] - tol || p[i] > hi[static_cast<size_t>(i)] + tol) return false;
    return true;
}

bool GridDomain::same_layout(const GridDomain& o) const {
    if (kind != o.kind || dim != o.dim) return false;
    for (int i = 0; i < dim; ++i) {
        const auto a = static_cast<size_t>(i);
        if (lo[a] != o.lo[a] || hi[a] != o.hi[a] || res[a] != o.res[a]) return false;
    }
    return true;
}

BallGrid BallGrid::make(int value_dim, int rings, int dirs) {
    if (value_dim < 1 || value_dim > 2)
        throw std::invalid_argument("BallGrid: value_dim must be 1 or 2");
    if (rings < 2) throw std::invalid_argument("BallGrid: need at least 2 rings");
    BallGrid b;
    b.value_dim = value_dim;
    b.rings = rings;
    b.dirs = (value_dim == 1) ? 2 : (dirs > 0 ? dirs : 16);
    return b;
}

int BallGrid::dir_index(const Pt& z) const {
    if (value_dim == 1) return z[0] >= 0.0 ? 1 : 0;
    double ang = std::atan2(z[1], z[0]);  // (-pi, pi]
    double t = frac01(ang / (2.0 * M_PI));
    int i = static_cast<int>(t * dirs);
    return std::clamp(i, 0, dirs - 1);
}

Pt BallGrid::dir_center(int d) const {
    if (value_dim == 1) return Pt(d == 1 ? 1.0 : -1.0);
    double ang = 2.0 * M_PI * (d + 0.5) / dirs;
    return Pt(std::cos(ang), std::sin(ang));
}

int BallGrid::ring_index(double r) const {
    int i = static_cast<int>(std::floor(r * rings));
    return std::clamp(i, 0, rings - 1);
}

int BallGrid::interior_index(const Pt& zhat) const {
    double r = norm(zhat);
    int ring = ring_index(r);
    int d = (r == 0.0) ? 0 : dir_index(zhat);
    return ring * dirs + d;
}

}  // namespace ym
