#ifndef YM_MEASURE_HPP
#define YM_MEASURE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ym/geometry.hpp"

namespace ym {

struct Atom {
    Pt location;
    double mass = 0.0;  // >= 0
};

// Atom of a vector measure: unit polar direction times nonnegative mass.
struct SingAtom {
    Pt location;
    Pt direction;  // in E, |direction| = 1
    double mass = 0.0;
};

// Nonnegative measure on a grid: absolutely continuous density per cell
// (mass per unit volume) plus a finite list of atoms.
struct ScalarMeasure {
    GridDomain domain;
    std::vector<double> density;  // size = cell_count, row-major
    std::vector<Atom> atoms;

    static ScalarMeasure zero(const GridDomain& g) {
        ScalarMeasure m;
        m.domain = g;
        m.density.assign(static_cast<size_t>(g.cell_count()), 0.0);
        return m;
    }
    double total_mass() const;
    double density_mass() const;
    double atom_mass() const;
    void validate() const;
};

// E-valued measure: per-cell density vector (value_dim entries per cell)
// plus singular atoms with unit polar directions.
struct VectorMeasure {
    GridDomain domain;
    int value_dim = 1;
    std::vector<double> ac_density;  // cell-major, value_dim per cell
    std::vector<SingAtom> singular;

    static VectorMeasure zero(const GridDomain& g, int value_dim) {
        VectorMeasure m;
        m.domain = g;
        m.value_dim = value_dim;
        m.ac_density.assign(static_cast<size_t>(g.cell_count()) * static_cast<size_t>(value_dim), 0.0);
        return m;
    }
    Pt ac_at(int64_t cell) const {
        Pt z;
        z.dim = value_dim;
        for (int j = 0; j < value_dim; ++j) z[j] = ac_density[static_cast<size_t>(cell) * static_cast<size_t>(value_dim) + static_cast<size_t>(j)];
        return z;
    }
    void set_ac(int64_t cell, const Pt& z) {
        for (int j = 0; j < value_dim; ++j) ac_density[static_cast<size_t>(cell) * static_cast<size_t>(value_dim) + static_cast<size_t>(j)] = z[j];
    }
    double total_variation() const;
    void validate() const;
};

struct WAtom {
    Pt point;
    double w = 0.0;
};

// Discrete distribution on a fiber domain: weighted atoms, or the exact
// uniform distribution. `unconstrained` marks the conventional filler used
// where the base measure puts no mass.
struct FiberDist {
    std::vector<WAtom> atoms;
    bool uniform = false;
    bool unconstrained = false;

    double total() const {
        if (uniform) return 1.0;
        double s = 0;
        for (const auto& a : atoms) s += a.w;
        return s;
    }
    void normalize();
};

// Weak-* measurable map base cell -> probability on the fiber, stored as a
// sparse table. Cells not present carry `fallback` (uniform, flagged
// unconstrained, by convention).
struct ProbabilityField {
    GridDomain base;
    GridDomain fiber;
    std::map<int64_t, FiberDist> table;

    const FiberDist& at(int64_t cell) const {
        static const FiberDist unconstrained_uniform{{}, true, true};
        auto it = table.find(cell);
        return it == table.end() ? unconstrained_uniform : it->second;
    }
    void validate() const;
};

// --- Operations ------------------------------------------------------

struct PolarField {
    // unit direction of the density part per cell (zero vector where the
    // density vanishes), plus the atom directions in input order
    std::vector<Pt> cell_direction;
    std::vector<Pt> atom_direction;
};

struct LebesgueParts {
    VectorMeasure ac;    // no atoms
    VectorMeasure sing;  // zero density
    PolarField polar;
};

// Radon-Nikodym-Lebesgue split plus polar directions. Rejects malformed
// singular entries (zero mass with nonzero direction).
LebesgueParts lebesgue_decompose(const VectorMeasure& m);

// Push-forward under an affine map onto a caller-supplied image grid:
// output(U) = input(preimage of U). Density mass is re-binned
// conservatively by cell overlap; atoms map exactly. `post_scale`
// multiplies every output mass (blow-up normalizations r^-d, c_r).
ScalarMeasure push_forward(const ScalarMeasure& m, const AffineMap& map,
                           const GridDomain& image, double post_scale = 1.0);
VectorMeasure push_forward(const VectorMeasure& m, const AffineMap& map,
                           const GridDomain& image, double post_scale = 1.0);

// Joint nonnegative measure on a product grid E x F.
struct ProductMeasure {
    GridDomain first;   // E
    GridDomain second;  // F
    // density over first x second (first-major), mass per unit product volume
    std::vector<double> density;
    std::vector<Atom> atoms;  // atom location = (first coords, second coords)

    static ProductMeasure zero(const GridDomain& a, const GridDomain& b);
    int64_t joint_index(int64_t ci, int64_t cj) const { return ci * second.cell_count() + cj; }
    double total_mass() const;
};

struct Disintegration {
    ScalarMeasure marginal;   // on first factor
    ProbabilityField fibers;  // base = first factor, fiber = second factor
};

// Disintegrate a joint measure into its first-factor marginal and fiber
// probabilities; base cells with zero marginal mass get the flagged
// uniform sentinel.
Disintegration disintegrate(const ProductMeasure& joint);

// Reconstruct marginal (x) fibers as a joint measure; inverse of
// disintegrate on cells.
ProductMeasure reconstruct(const Disintegration& d);

// Total-variation distance between two measures on the same grid layout,
// with atoms binned into cells.
double tv_distance(const ScalarMeasure& a, const ScalarMeasure& b);

// TV distance between fiber distributions binned onto a common fiber grid.
double tv_distance(const FiberDist& a, const FiberDist& b, const GridDomain& fiber);

}  // namespace ym

#endif
