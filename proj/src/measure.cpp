#include "ym/measure.hpp"

#include <algorithm>
#include <cmath>

namespace ym {

double ScalarMeasure::density_mass() const {
    double cv = domain.cell_volume();
    double s = 0;
    for (double d : density) s += d;
    return s * cv;
}

double ScalarMeasure::atom_mass() const {
    double s = 0;
    for (const auto& a : atoms) s += a.mass;
    return s;
}

double ScalarMeasure::total_mass() const { return density_mass() + atom_mass(); }

void ScalarMeasure::validate() const {
    if (density.size() != static_cast<size_t>(domain.cell_count()))
        throw std::invalid_argument("ScalarMeasure: density size mismatch");
    for (double d : density)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw std::invalid_argument("ScalarMeasure: negative or non-finite density");
    for (const auto& a : atoms) {
        if (!(a.mass >= 0.0) || !std::isfinite(a.mass))
            throw std::invalid_argument("ScalarMeasure: bad atom mass");
        if (!domain.contains(a.location, 1e-12))
            throw std::invalid_argument("ScalarMeasure: atom outside domain closure");
    }
}

double VectorMeasure::total_variation() const {
    double cv = domain.cell_volume();
    double s = 0;
    int64_t n = domain.cell_count();
    for (int64_t c = 0; c < n; ++c) s += norm(ac_at(c));
    s *= cv;
    for (const auto& a : singular) s += a.mass;
    return s;
}

void VectorMeasure::validate() const {
    if (ac_density.size() != static_cast<size_t>(domain.cell_count()) * static_cast<size_t>(value_dim))
        throw std::invalid_argument("VectorMeasure: density size mismatch");
    for (const auto& a : singular) {
        if (!(a.mass >= 0.0) || !std::isfinite(a.mass))
            throw std::invalid_argument("VectorMeasure: bad singular mass");
        if (a.mass == 0.0 && norm(a.direction) != 0.0)
            throw std::invalid_argument(
                "VectorMeasure: zero-mass singular entry with nonzero direction");
        if (a.mass > 0.0 && std::fabs(norm(a.direction) - 1.0) > 1e-9)
            throw std::invalid_argument("VectorMeasure: polar direction not unit");
        if (!domain.contains(a.location, 1e-12))
            throw std::invalid_argument("VectorMeasure: atom outside domain closure");
    }
}

void FiberDist::normalize() {
    if (uniform) return;
    double s = total();
    if (s <= 0.0) throw std::invalid_argument("FiberDist: cannot normalize zero mass");
    for (auto& a : atoms) a.w /= s;
}

void ProbabilityField::validate() const {
    for (const auto& [cell, dist] : table) {
        if (cell < 0 || cell >= base.cell_count())
            throw std::invalid_argument("ProbabilityField: cell out of range");
        if (!dist.uniform && std::fabs(dist.total() - 1.0) > 1e-12)
            throw std::invalid_argument("ProbabilityField: fiber mass != 1");
    }
}

LebesgueParts lebesgue_decompose(const VectorMeasure& m) {
    m.validate();
    LebesgueParts out;
    out.ac = m;
    out.ac.singular.clear();
    out.sing = VectorMeasure::zero(m.domain, m.value_dim);
    out.sing.singular = m.singular;

    int64_t n = m.domain.cell_count();
    out.polar.cell_direction.resize(static_cast<size_t>(n));
    for (int64_t c = 0; c < n; ++c) {
        Pt z = m.ac_at(c);
        double r = norm(z);
        Pt d;
        d.dim = m.value_dim;
        if (r > 0) d = (1.0 / r) * z;
        out.polar.cell_direction[static_cast<size_t>(c)] = d;
    }
    for (const auto& a : m.singular) out.polar.atom_direction.push_back(a.direction);
    return out;
}

namespace {

// Overlap of the image of source cell [slo,shi] under the affine map with
// the target cell [tlo,thi], per axis, as a fraction of the source extent.
double axis_overlap(double slo, double shi, double tlo, double thi, bool wrap) {
    if (!wrap) {
        double l = std::max(slo, tlo), h = std::min(shi, thi);
        return std::max(0.0, h - l) / (shi - slo);
    }
    // wrapped interval on the unit torus: reduce start to [0,1)
    double len = shi - slo;
    if (len >= 1.0) return thi - tlo;  // covers everything uniformly
    double a = frac01(slo);
    double covered = 0.0;
    for (int k = -1; k <= 1; ++k) {
        double l = std::max(a + k, tlo), h = std::min(a + k + len, thi);
        covered += std::max(0.0, h - l);
    }
    return covered / len;
}

template <typename Measure, typename CellCopy>
void push_density(const Measure& src, const AffineMap& map, const GridDomain& image,
                  double js, Measure& out, CellCopy copy_scaled) {
    int64_t n = src.domain.cell_count();
    const int dim = src.domain.dim;
    for (int64_t c = 0; c < n; ++c) {
        Pt slo, shi;
        src.domain.cell_bounds(c, slo, shi);
        // image of the source cell: affine without torus reduction (the
        // overlap computation wraps intervals itself)
        Pt ilo = (1.0 / map.scale) * (slo - map.shift);
        Pt ihi = (1.0 / map.scale) * (shi - map.shift);
        for (int i = 0; i < dim; ++i)
            if (ilo[i] > ihi[i]) std::swap(ilo[i], ihi[i]);
        // target cells possibly overlapped
        std::array<int, kMaxDim> a{0, 0, 0}, b{0, 0, 0};
        for (int i = 0; i < dim; ++i) {
            if (image.kind == DomainKind::torus) {
                a[static_cast<size_t>(i)] = 0;
                b[static_cast<size_t>(i)] = image.res[static_cast<size_t>(i)] - 1;
            } else {
                a[static_cast<size_t>(i)] = image.axis_index(i, ilo[i]);
                b[static_cast<size_t>(i)] = image.axis_index(i, ihi[i]);
            }
        }
        std::array<int, kMaxDim> it = a;
        while (true) {
            double fraction = 1.0;
            for (int i = 0; i < dim; ++i) {
                Pt tlo, thi;
                // target cell bounds along axis i
                double w = image.width(i);
                double tl = image.lo[static_cast<size_t>(i)] + it[static_cast<size_t>(i)] * w;
                fraction *= axis_overlap(ilo[i], ihi[i], tl, tl + w,
                                         image.kind == DomainKind::torus);
                if (fraction == 0.0) break;
            }
            if (fraction > 0.0) {
                int64_t tc = image.flatten(it);
                copy_scaled(c, tc, fraction, js, out);
            }
            int ax = dim - 1;
            while (ax >= 0) {
                if (++it[static_cast<size_t>(ax)] <= b[static_cast<size_t>(ax)]) break;
                it[static_cast<size_t>(ax)] = a[static_cast<size_t>(ax)];
                --ax;
            }
            if (ax < 0) break;
        }
    }
}

}  // namespace

ScalarMeasure push_forward(const ScalarMeasure& m, const AffineMap& map,
                           const GridDomain& image, double post_scale) {
    if (map.scale <= 0.0) throw std::invalid_argument("push_forward: scale must be > 0");
    m.validate();
    ScalarMeasure out = ScalarMeasure::zero(image);
    double src_cv = m.domain.cell_volume();
    double dst_cv = image.cell_volume();
    push_density(m, map, image, post_scale, out,
                 [&](int64_t c, int64_t tc, double fraction, double ps, ScalarMeasure& o) {
                     double mass = m.density[static_cast<size_t>(c)] * src_cv * fraction;
                     o.density[static_cast<size_t>(tc)] += ps * mass / dst_cv;
                 });
    for (const auto& a : m.atoms)
        out.atoms.push_back({map.apply(a.location), post_scale * a.mass});
    return out;
}

VectorMeasure push_forward(const VectorMeasure& m, const AffineMap& map,
                           const GridDomain& image, double post_scale) {
    if (map.scale <= 0.0) throw std::invalid_argument("push_forward: scale must be > 0");
    m.validate();
    VectorMeasure out = VectorMeasure::zero(image, m.value_dim);
    double src_cv = m.domain.cell_volume();
    double dst_cv = image.cell_volume();
    push_density(m, map, image, post_scale, out,
                 [&](int64_t c, int64_t tc, double fraction, double ps, VectorMeasure& o) {
                     Pt z = m.ac_at(c);
                     for (int j = 0; j < m.value_dim; ++j)
                         o.ac_density[static_cast<size_t>(tc) * static_cast<size_t>(m.value_dim) + static_cast<size_t>(j)] +=
                             ps * z[j] * src_cv * fraction / dst_cv;
                 });
    for (const auto& a : m.singular)
        out.singular.push_back({map.apply(a.location), a.direction, post_scale * a.mass});
    return out;
}

ProductMeasure ProductMeasure::zero(const GridDomain& a, const GridDomain& b) {
    ProductMeasure m;
    m.first = a;
    m.second = b;
    m.density.assign(static_cast<size_t>(a.cell_count() * b.cell_count()), 0.0);
    return m;
}

double ProductMeasure::total_mass() const {
    double cv = first.cell_volume() * second.cell_volume();
    double s = 0;
    for (double d : density) s += d;
    s *= cv;
    for (const auto& a : atoms) s += a.mass;
    return s;
}

Disintegration disintegrate(const ProductMeasure& joint) {
    for (double d : joint.density)
        if (!(d >= 0.0)) throw std::invalid_argument("disintegrate: joint must be nonnegative");
    Disintegration out;
    out.marginal = ScalarMeasure::zero(joint.first);
    out.fibers.base = joint.first;
    out.fibers.fiber = joint.second;

    int64_t n1 = joint.first.cell_count(), n2 = joint.second.cell_count();
    double cv2 = joint.second.cell_volume();
    for (int64_t i = 0; i < n1; ++i) {
        double mass = 0;
        for (int64_t j = 0; j < n2; ++j) mass += joint.density[static_cast<size_t>(joint.joint_index(i, j))];
        mass *= cv2;  // marginal density at cell i
        out.marginal.density[static_cast<size_t>(i)] = mass;
    }
    // atoms: split location into factors
    const int d1 = joint.first.dim;
    for (const auto& a : joint.atoms) {
        Pt x;
        x.dim = d1;
        for (int i = 0; i < d1; ++i) x[i] = a.location[i];
        out.marginal.atoms.push_back({x, a.mass});
    }

    double cv1 = joint.first.cell_volume();
    for (int64_t i = 0; i < n1; ++i) {
        double mass = out.marginal.density[static_cast<size_t>(i)] * cv1;
        FiberDist dist;
        if (mass <= 0.0) continue;  // unconstrained sentinel via fallback
        for (int64_t j = 0; j < n2; ++j) {
            double w = joint.density[static_cast<size_t>(joint.joint_index(i, j))] * cv1 * cv2;
            if (w > 0.0) dist.atoms.push_back({joint.second.cell_center(j), w / mass});
        }
        out.fibers.table[i] = std::move(dist);
    }
    // fiber at atom locations: deterministic by input order, appended after
    // cell table under the atom's base cell when it has no density there
    for (const auto& a : joint.atoms) {
        Pt x;
        x.dim = d1;
        Pt y;
        y.dim = joint.second.dim;
        for (int i = 0; i < d1; ++i) x[i] = a.location[i];
        for (int i = 0; i < joint.second.dim; ++i) y[i] = a.location[d1 + i];
        int64_t cell = joint.first.cell_index(x);
        FiberDist dist;
        dist.atoms.push_back({y, 1.0});
        out.fibers.table[cell] = std::move(dist);
    }
    return out;
}

ProductMeasure reconstruct(const Disintegration& d) {
    ProductMeasure out = ProductMeasure::zero(d.marginal.domain, d.fibers.fiber);
    int64_t n1 = out.first.cell_count();
    double cv1 = out.first.cell_volume();
    double cv2 = out.second.cell_volume();
    for (int64_t i = 0; i < n1; ++i) {
        double mass = d.marginal.density[static_cast<size_t>(i)] * cv1;
        if (mass <= 0.0) continue;
        const FiberDist& dist = d.fibers.at(i);
        if (dist.uniform) {
            int64_t n2 = out.second.cell_count();
            for (int64_t j = 0; j < n2; ++j)
                out.density[static_cast<size_t>(out.joint_index(i, j))] += mass / static_cast<double>(n2) / (cv1 * cv2);
        } else {
            for (const auto& a : dist.atoms) {
                int64_t j = out.second.cell_index(a.point);
                out.density[static_cast<size_t>(out.joint_index(i, j))] += mass * a.w / (cv1 * cv2);
            }
        }
    }
    for (const auto& a : d.marginal.atoms) {
        const FiberDist& dist = d.fibers.at(d.marginal.domain.cell_index(a.location));
        if (!dist.uniform && dist.atoms.size() == 1) {
            Pt joint_loc;
            joint_loc.dim = out.first.dim + out.second.dim;
            for (int i = 0; i < out.first.dim; ++i) joint_loc[i] = a.location[i];
            for (int i = 0; i < out.second.dim; ++i)
                joint_loc[out.first.dim + i] = dist.atoms[0].point[i];
            out.atoms.push_back({joint_loc, a.mass});
        }
    }
    return out;
}

double tv_distance(const ScalarMeasure& a, const ScalarMeasure& b) {
    if (!a.domain.same_layout(b.domain))
        throw std::invalid_argument("tv_distance: grid layouts differ");
    int64_t n = a.domain.cell_count();
    std::vector<double> ma(static_cast<size_t>(n), 0.0), mb(static_cast<size_t>(n), 0.0);
    double cv = a.domain.cell_volume();
    for (int64_t c = 0; c < n; ++c) {
        ma[static_cast<size_t>(c)] = a.density[static_cast<size_t>(c)] * cv;
        mb[static_cast<size_t>(c)] = b.density[static_cast<size_t>(c)] * cv;
    }
    for (const auto& at : a.atoms) ma[static_cast<size_t>(a.domain.cell_index(at.location))] += at.mass;
    for (const auto& at : b.atoms) mb[static_cast<size_t>(b.domain.cell_index(at.location))] += at.mass;
    double s = 0;
    for (int64_t c = 0; c < n; ++c) s += std::fabs(ma[static_cast<size_t>(c)] - mb[static_cast<size_t>(c)]);
    return 0.5 * s;
}

double tv_distance(const FiberDist& a, const FiberDist& b, const GridDomain& fiber) {
    int64_t n = fiber.cell_count();
    std::vector<double> ma(static_cast<size_t>(n), 0.0), mb(static_cast<size_t>(n), 0.0);
    auto fill = [&](const FiberDist& d, std::vector<double>& m) {
        if (d.uniform) {
            for (auto& v : m) v += 1.0 / static_cast<double>(n);
        } else {
            for (const auto& at : d.atoms) m[static_cast<size_t>(fiber.cell_index(at.point))] += at.w;
        }
    };
    fill(a, ma);
    fill(b, mb);
    double s = 0;
    for (int64_t c = 0; c < n; ++c) s += std::fabs(ma[static_cast<size_t>(c)] - mb[static_cast<size_t>(c)]);
    return 0.5 * s;
}

}  // namespace ym
