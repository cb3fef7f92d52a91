#ifndef YM_LOCALIZATION_HPP
#define YM_LOCALIZATION_HPP

#include "ym/estimation.hpp"

namespace ym {

enum class BlowupScaling { regular, singular };

// Blow-up target: the centered unit cube Q = [-1/2, 1/2]^d.
GridDomain blowup_cube(int dim, int res);

struct BlowupSpec {
    Pt x0;
    std::vector<double> radii;  // decreasing (r_1 = 1 when admissible)
    BlowupScaling scaling = BlowupScaling::regular;
    void validate(const GridDomain& omega) const;
};

// Admissible dyadic radii at x0: largest k with Q_k(x0) inside Omega, then
// halvings.
std::vector<double> default_radii(const GridDomain& omega, const Pt& x0, int count = 4);

// Mass of the cube Q_r(x0) = x0 + r[-1/2,1/2]^d.
double mass_in_cube(const ScalarMeasure& m, const Pt& x0, double r);
double variation_in_cube(const VectorMeasure& m, const Pt& x0, double r);

// T^{(x0,r)}_# m restricted to Q, with the chosen normalization:
// regular multiplies by r^-d, singular by 1/|m^s|(Q_r(x0)).
VectorMeasure blow_up(const VectorMeasure& m, const Pt& x0, double r,
                      BlowupScaling scaling, int out_res = 32);
ScalarMeasure blow_up(const ScalarMeasure& m, const Pt& x0, double r, double post_scale,
                      int out_res = 32);

// Push-forward under xi -> xi - xi0 on the torus (an automorphism).
ScalarMeasure torus_translate(const ScalarMeasure& p, const Pt& xi0);
FiberDist torus_translate(const FiberDist& d, const Pt& xi0);
RhoDist torus_translate(const RhoDist& r, const Pt& xi0);

struct TangentMeasures {
    std::vector<ScalarMeasure> blowups;  // probability-normalized, on Q
    int converged_at = -1;               // index where the pairing vector stabilized
};

// Probability tangent measures: normalized blow-ups along the radii,
// paired against a fixed macro test set until stabilized within tau_tan.
TangentMeasures tangent_measures(const ScalarMeasure& m, const Pt& x0,
                                 const std::vector<double>& radii, double tau_tan = 1e-3,
                                 int out_res = 32);

struct TangentOptions {
    std::vector<double> radii;       // empty: default_radii
    double diag_ratio = 0.1;         // eps/r threshold for the diagonal
    int diag_count = 3;              // smallest eps averaged per radius
    double tau_tan = 1e-3;
    double lebesgue_tol = 0.10;      // regular-point ratio check
    double singular_ratio_tol = 0.05;
    bool reestimate = true;          // verify by re-estimating from blow-ups
    EstimateOptions est;             // grids for the re-estimation
};

struct TangentResult {
    TwoScaleYoungMeasure tangent;  // on Q
    double xi0 = 0.0;              // limit of frac(x0/eps) along the schedule
    std::vector<std::string> warnings;
    bool reestimated = false;
    YmDiff reestimate_diff;
};

// Tangent two-scale* Young measure at x0 (regular or singular mode),
// assembled from the components of ym and verified against a re-estimate
// from the blown-up generating sequence.
TangentResult tangent_young(const TwoScaleYoungMeasure& ym, const SequenceSpec& spec_seq,
                            const Pt& x0, BlowupScaling mode,
                            const TangentOptions& opt = {});

}  // namespace ym

#endif
