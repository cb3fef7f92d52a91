#ifndef YM_INTEGRAND_HPP
#define YM_INTEGRAND_HPP

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ym/geometry.hpp"

namespace ym {

// Linear-growth integrand f(x, xi, z) on Omega x Z x E together with the
// structure the toolkit needs: growth constant, optional analytic
// recession (positively 1-homogeneous in z), convexity/tensor flags.
struct Integrand {
    std::string name;
    int value_dim = 1;  // dimension of E

    std::function<double(const Pt& x, const Pt& xi, const Pt& z)> eval;
    // analytic strong recession, defined for all z via 1-homogeneity;
    // empty when unknown (numeric fallback) or nonexistent
    std::function<double(const Pt& x, const Pt& xi, const Pt& z)> recession_fn;

    double growth_constant = -1.0;  // M with |f| <= M(1+|z|); <0 = not linear growth

    struct Flags {
        bool in_E2 = false;
        bool in_R2 = false;  // strong recession exists
        bool convex_in_z = false;
        bool one_homogeneous_in_z = false;
        bool tensor = false;
    } flags;

    // tensor factors, set when flags.tensor (f = phi (x) g (x) h)
    std::function<double(const Pt&)> phi, g, h;
    std::function<double(const Pt&)> h_inf;  // recession of h, 1-homogeneous

    double operator()(const Pt& x, const Pt& xi, const Pt& z) const { return eval(x, xi, z); }

    bool has_linear_growth() const { return growth_constant > 0.0; }
    void validate_samples(const GridDomain& omega, int samples = 64, uint64_t seed = 7) const;
};

enum class RecessionMode { strong, upper, lower };

struct RecessionResult {
    double value = 0.0;
    bool exists = true;     // false: strong limit does not exist
    bool finite = true;     // false: super-linear growth (value = +-inf)
};

struct RecessionOptions {
    // t-grid 10^1..10^6 and stencil radius of one grid cell around (x, xi)
    int t_decades_lo = 1;
    int t_decades_hi = 6;
    double stencil_x = 0.0;  // 0 disables the x-perturbation stencil
    double stencil_xi = 0.0;
    double tol = 1e-6;  // tau_rec, relative
};

// Numerical recession function: limit of f(x',xi',tz)/t over the t-grid
// with (x',xi') on a 3^d stencil. Uses the analytic recession when the
// integrand carries one.
RecessionResult recession(const Integrand& f, RecessionMode mode, const Pt& x,
                          const Pt& xi, const Pt& z_dir,
                          const RecessionOptions& opt = {});

// Convenience: strong recession value at (x, xi, z), throwing when it does
// not exist. z need not be unit (1-homogeneous extension).
double recession_value(const Integrand& f, const Pt& x, const Pt& xi, const Pt& z,
                       const RecessionOptions& opt = {});

// The compactifying transform (Tf)(x,xi,zhat) = (1-|zhat|) f(x,xi,zhat/(1-|zhat|))
// extended to |zhat| = 1 by the recession value, and its inverse S.
struct TransformedIntegrand {
    const Integrand* f = nullptr;
    double boundary_band = 1.0 - 1e-12;  // |zhat| >= band evaluates the recession

    double eval(const Pt& x, const Pt& xi, const Pt& zhat) const;
};

enum class TransformDir { T, S };

TransformedIntegrand transform(const Integrand& f, TransformDir dir = TransformDir::T);

// (S g)(x,xi,z) for a function given on the closed ball.
double apply_S(const std::function<double(const Pt&, const Pt&, const Pt&)>& g,
               const Pt& x, const Pt& xi, const Pt& z);

// --- Registry ----------------------------------------------------------
//
// Built-in integrands addressable by name:
//   "one", "abs", "sqrt1pz2", "aniso_quad:<amp>" (a(xi) z^2 with
//   a = 2 + amp*sin(2 pi xi_1)), "tensor:<phi>:<g>:<h>" with
//   phi in {one, bump, poly}, g in {one, cos1, sin1, cos2},
//   h in {one, abs, sqrt1pz2, pospart, hinge1, hinge2}.
Integrand make_integrand(const std::string& name, int value_dim = 1);

// Names of the full registry used by golden/acceptance sweeps.
std::vector<std::string> registry_names();

// Separating family of nonnegative tensor integrands phi_m x g_m x h_m:
// B-spline bumps on Omega, nonnegative low-order torus modes, Lipschitz
// h's. Count is rounded to a full triple product.
std::vector<Integrand> separating_family(const GridDomain& omega, int value_dim,
                                         int count = 125);

// The (phi, g) pairs of the family, for the representation identity.
struct SeparatingPair {
    std::function<double(const Pt&)> phi, g;
    double phi_sup = 1.0, g_sup = 1.0;
};
std::vector<SeparatingPair> separating_pairs(const GridDomain& omega, int count = 25);

}  // namespace ym

#endif
