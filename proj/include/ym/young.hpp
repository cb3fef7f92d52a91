#ifndef YM_YOUNG_HPP
#define YM_YOUNG_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "ym/integrand.hpp"
#include "ym/measure.hpp"

namespace ym {

// nu_inf mass attached to one concentration site: unit direction x weight.
struct DirAtom {
    Pt dir;
    double w = 0.0;
};

// One rho atom: micro-scale location xi, weight, and the direction
// distribution nu_inf_{x,xi} riding on it.
struct RhoAtom {
    Pt xi;
    double w = 0.0;
    std::vector<DirAtom> dirs;
};

// rho_x together with its nu_inf fibers. `uniform` encodes the exact
// Lebesgue measure on Z (then `uniform_dirs` is the xi-homogeneous
// direction distribution); `unconstrained` marks the conventional filler
// at sites carrying no lambda mass.
struct RhoDist {
    bool uniform = false;
    bool unconstrained = false;
    std::vector<RhoAtom> atoms;
    std::vector<DirAtom> uniform_dirs;

    double total() const {
        if (uniform) return 1.0;
        double s = 0;
        for (const auto& a : atoms) s += a.w;
        return s;
    }
};

// The concentration third of the four-tuple: lambda on cl Omega plus the
// (rho, nu_inf) tree at every lambda site (grid cells for the absolutely
// continuous part, exact atoms for lambda^s).
struct ConcentrationPart {
    ScalarMeasure lambda;
    std::map<int64_t, RhoDist> rho_cell;  // keyed by lambda grid cell
    std::vector<RhoDist> rho_atom;        // parallel to lambda.atoms

    const RhoDist& rho_at_cell(int64_t c) const {
        static const RhoDist filler{true, true, {}, {}};
        auto it = rho_cell.find(c);
        return it == rho_cell.end() ? filler : it->second;
    }
};

// Discrete two-scale* Young measure (nu, lambda, rho, nu_inf) on
// cl Omega x Z with values in E = R^value_dim. nu is stored per
// (x-cell, xi-cell) as exact weighted atoms in E; absent cells mean
// delta_0.
struct TwoScaleYoungMeasure {
    GridDomain omega;
    GridDomain torus;
    BallGrid ball;
    int value_dim = 1;

    std::map<int64_t, FiberDist> nu;  // key = x_cell * n_xi + xi_cell
    ConcentrationPart conc;

    int64_t nu_key(int64_t x_cell, int64_t xi_cell) const {
        return x_cell * torus.cell_count() + xi_cell;
    }
    const FiberDist& nu_at(int64_t x_cell, int64_t xi_cell) const {
        static const FiberDist delta0{{{Pt(), 1.0}}, false, false};
        auto it = nu.find(nu_key(x_cell, xi_cell));
        return it == nu.end() ? delta0 : it->second;
    }

    // int_Omega int_Z <|.|, nu_{x,xi}> + lambda(cl Omega); finite by (iii)
    double mass_bound() const;
    void validate() const;
};

// Positive measure on cl(Omega x Z x closed unit ball of E), stored in
// S-pulled-back form: an interior entry (x, xi, z, w) represents mass
// w (1+|z|) at zhat = z/(1+|z|); a boundary entry (x, xi, dir, w)
// represents mass w on the boundary shell. Layers keep the x-structure
// declared: 0 interior, 1 boundary from density, 2 boundary from an atom.
struct CompactifiedMeasure {
    GridDomain omega;
    GridDomain torus;
    BallGrid ball;
    int value_dim = 1;

    struct Entry {
        Pt x, xi, z;  // z in E (interior) or unit direction (boundary)
        double w = 0.0;
        int layer = 0;
    };
    std::vector<Entry> entries;

    double total_mass() const;  // mass as a measure on the compactified product
    void validate() const;
};

// Default representation tolerance: grid quadrature dominates.
double default_tau_rep(const CompactifiedMeasure& mu);

// Bilinear pairing <<f, ym>> by grid quadrature. Throws when f lacks a
// recession on charged boundary directions.
double pairing(const Integrand& f, const TwoScaleYoungMeasure& ym);

// <Tf, mu> for a compactified measure.
double pair_compactified(const Integrand& f, const CompactifiedMeasure& mu);

// S* ym: satisfies pair_compactified(f, result) == pairing(f, ym).
CompactifiedMeasure compactify(const TwoScaleYoungMeasure& ym);

// Max over the separating (phi, g) family of the representation-identity
// deviation, normalized by sup|phi| sup|g|.
double verify_representation_identity(const CompactifiedMeasure& mu,
                                      const std::vector<SeparatingPair>& family);
double verify_representation_identity(const CompactifiedMeasure& mu);

// Inverse of compactify. Rejects measures violating the representation
// identity beyond tau_rep (not in S*[Y^2]).
TwoScaleYoungMeasure decompose_compactified(const CompactifiedMeasure& mu,
                                            double tau_rep = -1.0);

// Elementary Young measure of a vector measure:
// (delta_{mu_ac}, |mu_s|, Lebesgue_Z, delta_{polar}).
TwoScaleYoungMeasure embed_measure(const VectorMeasure& m, int torus_res = 32,
                                   int ball_rings = 24);

// Component-wise distances between two Young measures on the same grids.
struct YmDiff {
    double nu_tv_mean = 0.0;    // mean over (x,xi) cells of fiber TV (ball bins)
    double nu_tv_max = 0.0;
    double nu_mean_l1 = 0.0;    // mean over cells of |<id,nu_a> - <id,nu_b>|
    double lambda_tv = 0.0;     // TV distance of lambda (cells + atoms binned)
    double lambda_mass_rel = 0.0;
    double atom_loc_cells = 1e300;  // worst b-atom -> nearest a-atom, in cell units
    double atom_mass_rel = 1e300;   // at that matching
    double rho_tv_max = 0.0;    // max over b's lambda sites of rho TV (Z bins)
    double nuinf_tv_max = 0.0;  // same for direction distributions (sphere bins)
};
YmDiff ym_distance(const TwoScaleYoungMeasure& a, const TwoScaleYoungMeasure& b);

// TV-binned distance of direction distributions on the sphere mesh.
double dir_tv(const std::vector<DirAtom>& a, const std::vector<DirAtom>& b,
              const BallGrid& ball);

}  // namespace ym

#endif
