#ifndef YM_OPERATORS_HPP
#define YM_OPERATORS_HPP

#include <string>
#include <vector>

#include "ym/barycenter.hpp"
#include "ym/measure.hpp"

namespace ym {

// Small dense row-major matrix (Lin(E;F) slots are at most 3x3 here).
struct SmallMatrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    SmallMatrix() = default;
    SmallMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r * c), 0.0) {}
    double& at(int i, int j) { return a[static_cast<size_t>(i * cols + j)]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i * cols + j)]; }
};

// Homogeneous constant-coefficient operator A = sum_{|alpha|=k} A_alpha d^alpha.
struct DifferentialOperator {
    std::string name = "zero";
    int order = 1;   // k
    int d = 1;       // space dimension
    int dim_e = 1;   // E
    int dim_f = 1;   // F
    double sobolev_p = 1.1;  // in (1, d/(d-1)); recorded for the asymptotic norm
    bool is_zero = false;    // declared zero operator (unconstrained case)

    struct Coeff {
        std::array<int, kMaxDim> alpha{0, 0, 0};  // |alpha| = order
        SmallMatrix matrix;                       // dim_f x dim_e
    };
    std::vector<Coeff> coeffs;

    void validate() const;
};

// Literals: "zero", "ddx", "grad_scalar:d=2", "div:d=2", "curl:d=2".
DifferentialOperator parse_operator(const std::string& literal);

// Principal symbol with the real convention eta^alpha (no 2 pi i^k factor);
// k-homogeneous in eta.
SmallMatrix symbol(const DifferentialOperator& op, const Pt& eta);

struct WaveConeResult {
    bool inside = false;
    double distance = 0.0;  // min over unit eta of |A(eta) z| / |z|
    Pt eta_witness;
};

// Membership of z in the wave cone (union of symbol kernels over unit
// eta), by grid search with one Newton refinement of the best direction.
WaveConeResult wave_cone_test(const DifferentialOperator& op, const Pt& z,
                              double tau_rel = 1e-6);

// Orthonormal basis of span(Lambda_A) (union of kernels over the eta grid).
std::vector<Pt> wave_cone_span(const DifferentialOperator& op);

// Discrete-Fourier A-free projection of a field on the torus grid: zero
// mean, every nonzero frequency projected onto ker symbol(freq).
// Orthogonal and idempotent.
VectorMeasure project_A_free(const VectorMeasure& w, const DifferentialOperator& op);

// Fourier-weighted negative-norm surrogate of ||A w||_{W^{-k}}:
// sqrt(sum_freq |symbol(freq) c_freq|^2 / (1+|freq|^2)^k), coefficients in
// the mean normalization. Fields on Omega are Hann-windowed first.
double a_residual(const VectorMeasure& field, const DifferentialOperator& op);

// max over lambda sites of the residual of [[ym]]_x (atoms binned to cells)
double a_residual(const SecondScaleBarycenter& ssb, const DifferentialOperator& op);

struct StructureRow {
    Pt x;
    Pt xi;
    double polar_distance = 0.0;   // wave-cone distance of the polar direction
    double mass_outside_span = 0.0;  // nu_inf mass off span(Lambda_A)
};

struct StructureReport {
    double max_polar_distance = 0.0;
    double max_mass_outside_span = 0.0;
    std::vector<StructureRow> rows;
    bool passes(double tol) const {
        return max_polar_distance <= tol && max_mass_outside_span <= tol;
    }
};

// Rigidity checks at the purely singular part: (a) polar directions of the
// second-scale barycenter at singular sites lie in the wave cone; (b)
// nu_inf is supported in span(Lambda_A) on the sphere.
StructureReport structure_check(const TwoScaleYoungMeasure& ym,
                                const DifferentialOperator& op, double dir_tol = 1e-6);

}  // namespace ym

#endif
