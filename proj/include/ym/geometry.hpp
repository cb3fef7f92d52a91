#ifndef YM_GEOMETRY_HPP
#define YM_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ym {

// Points and small vectors live in at most 3 dimensions (desk scale).
constexpr int kMaxDim = 3;

struct Pt {
    std::array<double, kMaxDim> v{0.0, 0.0, 0.0};
    int dim = 1;

    Pt() = default;
    explicit Pt(double x) : v{x, 0.0, 0.0}, dim(1) {}
    Pt(double x, double y) : v{x, y, 0.0}, dim(2) {}
    Pt(double x, double y, double z) : v{x, y, z}, dim(3) {}

    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

inline Pt operator+(Pt a, const Pt& b) {
    for (int i = 0; i < a.dim; ++i) a[i] += b[i];
    return a;
}
inline Pt operator-(Pt a, const Pt& b) {
    for (int i = 0; i < a.dim; ++i) a[i] -= b[i];
    return a;
}
inline Pt operator*(double s, Pt a) {
    for (int i = 0; i < a.dim; ++i) a[i] *= s;
    return a;
}
inline double dot(const Pt& a, const Pt& b) {
    double s = 0;
    for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
    return s;
}
inline double norm(const Pt& a) { return std::sqrt(dot(a, a)); }

inline Pt normalized(Pt a) {
    double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
    return (1.0 / n) * a;
}

// Fractional part per axis, mapping into [0,1).
inline double frac01(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f -= 1.0;  // guard against roundoff at integers
    return f;
}

// Distance on the flat torus [0,1) per axis.
inline double torus_dist(double a, double b) {
    double d = std::fabs(frac01(a) - frac01(b));
    return std::min(d, 1.0 - d);
}
inline double torus_dist(const Pt& a, const Pt& b) {
    double s = 0;
    for (int i = 0; i < a.dim; ++i) {
        double d = torus_dist(a[i], b[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

enum class DomainKind { omega, torus };

// Axis-aligned rectangular grid over a box (omega) or the unit torus.
// Torus axes are periodic on [0,1); index arithmetic wraps.
struct GridDomain {
    DomainKind kind = DomainKind::omega;
    int dim = 1;
    std::array<double, kMaxDim> lo{0.0, 0.0, 0.0};
    std::array<double, kMaxDim> hi{1.0, 1.0, 1.0};
    std::array<int, kMaxDim> res{2, 2, 2};

    static GridDomain box(std::vector<double> lo_, std::vector<double> hi_,
                          std::vector<int> res_);
    static GridDomain unit_torus(int d, int n);
    static GridDomain interval(double a, double b, int n) {
        return box({a}, {b}, {n});
    }

    double width(int ax) const { return (hi[static_cast<size_t>(ax)] - lo[static_cast<size_t>(ax)]) / res[static_cast<size_t>(ax)]; }
    double cell_volume() const {
        double v = 1;
        for (int i = 0; i < dim; ++i) v *= width(i);
        return v;
    }
    double volume() const {
        double v = 1;
        for (int i = 0; i < dim; ++i) v *= hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)];
        return v;
    }
    int64_t cell_count() const {
        int64_t n = 1;
        for (int i = 0; i < dim; ++i) n *= res[static_cast<size_t>(i)];
        return n;
    }

    // Rasterization rule: a point on a cell boundary belongs to the
    // lower-index cell; torus axes wrap first.
    int axis_index(int ax, double x) const;
    int64_t cell_index(const Pt& p) const;
    std::array<int, kMaxDim> cell_multi(int64_t idx) const;
    int64_t flatten(const std::array<int, kMaxDim>& m) const;
    Pt cell_center(int64_t idx) const;
    // Per-axis cell bounds.
    void cell_bounds(int64_t idx, Pt& clo, Pt& chi) const;
    bool contains(const Pt& p, double tol = 0.0) const;

    bool same_layout(const GridDomain& o) const;
};

// Discretization of the closed unit ball of E = R^N (N = 1 or 2) by
// radial rings times a direction mesh. Rings are [r_s, r_{s+1}) with
// r_s = s/rings; the boundary sphere r = 1 is a distinguished layer kept
// apart from all interior rings.
struct BallGrid {
    int value_dim = 1;  // N
    int rings = 24;     // interior radial rings
    int dirs = 2;       // 2 for N=1 (signs), angular count for N=2

    static BallGrid make(int value_dim, int rings, int dirs = 0);

    // Inner radius of the outermost ring; deposits at or beyond this
    // radius are treated as boundary mass by the estimator.
    double snap_radius() const { return static_cast<double>(rings - 1) / rings; }

    int interior_cells() const { return rings * dirs; }
    int boundary_cells() const { return dirs; }

    int dir_index(const Pt& z) const;  // direction bin of a nonzero vector
    Pt dir_center(int d) const;        // unit vector representative
    int ring_index(double r) const;    // r in [0,1)
    // interior cell id = ring*dirs + dir; boundary cell id = dir
    int interior_index(const Pt& zhat) const;
    int boundary_index(const Pt& dir) const { return dir_index(dir); }
};

// Affine change of variables x -> (x - shift)/scale, optionally reduced
// mod 1 per axis (torus target).
struct AffineMap {
    Pt shift;
    double scale = 1.0;
    bool mod_torus = false;

    Pt apply(const Pt& x) const {
        Pt y = (1.0 / scale) * (x - shift);
        if (mod_torus)
            for (int i = 0; i < y.dim; ++i) y[i] = frac01(y[i]);
        return y;
    }
};

}  // namespace ym

#endif
