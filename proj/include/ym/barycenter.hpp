#ifndef YM_BARYCENTER_HPP
#define YM_BARYCENTER_HPP

#include "ym/young.hpp"

namespace ym {

// Partition of cl Omega into regular cells and singular points; the
// singular set carries no Lebesgue mass and the regular one no lambda^s.
struct RegSingPartition {
    std::vector<int64_t> regular_cells;  // all grid cells
    std::vector<Pt> singular_points;     // lambda atom locations
};

RegSingPartition reg_sing_partition(const TwoScaleYoungMeasure& ym);

// f-barycenter [f, ym] on cl Omega. For scalar f the result has
// value_dim 1 (densities may be signed); identity gives the E-valued
// barycenter [ym].
VectorMeasure barycenter(const TwoScaleYoungMeasure& ym, const Integrand& f);
VectorMeasure barycenter_id(const TwoScaleYoungMeasure& ym);

// Second-scale f-barycenter x -> [[f, ym]]_x, a measure on Z per lambda
// site: density over Z cells plus atoms from the rho atoms.
struct SecondScaleBarycenter {
    GridDomain omega, torus;
    int value_dim = 1;
    std::map<int64_t, VectorMeasure> at_cell;  // regular x cells
    std::vector<VectorMeasure> at_atom;        // per lambda atom (singular x)
};

SecondScaleBarycenter second_scale_barycenter(const TwoScaleYoungMeasure& ym,
                                              const Integrand& f);
SecondScaleBarycenter second_scale_barycenter_id(const TwoScaleYoungMeasure& ym);

}  // namespace ym

#endif
