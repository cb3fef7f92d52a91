#ifndef YM_ESTIMATION_HPP
#define YM_ESTIMATION_HPP

#include "ym/barycenter.hpp"
#include "ym/young.hpp"

namespace ym {

enum class SeqKind { spike, fakir, translated_spike, sine, custom, piecelist };

// Constant pieces partitioning Omega for the piecewise kinds (d = 1).
struct Piece {
    double lo = 0, hi = 0;
    double value = 0;
};

// Generator of an oscillating/concentrating sequence mu_eps on Omega.
//   spike:            u_eps(x) = eps^-alpha chi_(0, eps^alpha)
//   fakir:            u_{1/k}(x) = k sum_i (-1)^i chi_[i/k, i/k + 1/k^2], i <= k/2
//   translated_spike: u_eps(x) = eps^-2 chi_(a + b eps, a + b eps + eps^2)
//   sine:             u_eps(x) = sin(2 pi x / eps^alpha)
//   custom:           pointwise sampler u(x; eps), any d <= 2
//   piecelist:        caller-supplied constant pieces per eps (blow-ups)
struct SequenceSpec {
    SeqKind kind = SeqKind::spike;
    double alpha = 1.0;
    double a = 0.0, b = 0.0;
    std::vector<double> epsilons;  // strictly decreasing to 0
    GridDomain domain;             // Omega
    int value_dim = 1;
    std::function<Pt(const Pt&, double)> sampler;
    std::function<std::vector<Piece>(double)> piece_provider;
    std::string name;

    void validate() const;
    bool piecewise() const {
        return kind == SeqKind::spike || kind == SeqKind::fakir ||
               kind == SeqKind::translated_spike || kind == SeqKind::piecelist;
    }
};
std::vector<Piece> analytic_pieces(const SequenceSpec& spec, double eps);
double analytic_tv(const SequenceSpec& spec, double eps);

// Grid rasterization of mu_eps (mass-conserving for piecewise kinds,
// cell-center sampling for smooth kinds). Refuses spikes narrower than a
// grid cell.
VectorMeasure generate(const SequenceSpec& spec, double eps);

// I^eps_f(mu) = int f(x, x/eps, mu_ac) dx + int f_inf(x, x/eps, polar) d|mu_s|
double evaluate_I_eps(const Integrand& f, const VectorMeasure& m, double eps);

// Same functional evaluated from the analytic description of the sequence
// (sub-cell exact for piecewise kinds).
double evaluate_I_eps_analytic(const Integrand& f, const SequenceSpec& spec, double eps,
                               int fine_res = 4096);

struct EstimateOptions {
    int fine_res = 4096;  // sampling resolution per axis (smooth kinds)
    int win = 64;         // output Omega resolution per axis
    int zres = 64;        // torus resolution per axis
    int ball_rings = 24;
    int ball_dirs = 0;    // 0: default for value_dim
    int avg_count = 3;    // trailing empirical measures combined
    double boundary_threshold = 1e-4;  // of total mass, boundary bins
    int atom_window = 3;               // odd window width, cells
    double atom_factor = 20.0;         // promotion factor over the median
};

struct ConvergenceRow {
    double eps = 0;
    double rep_deviation = 0;
    double pairing_err = 0;  // max over probe integrands |<Tf,mu_eps> - I^eps_f|
};

struct EstimateResult {
    TwoScaleYoungMeasure ym;
    CompactifiedMeasure empirical;  // averaged + thresholded + atoms promoted
    std::vector<ConvergenceRow> log;
    double nu_leakage = 0.0;  // nu mass in the outermost interior ring
    double coverage_gap = 0.0;  // fraction of (window, Z-cell) bins left empty
    std::vector<double> frac_a_eps;  // frac(a/eps_k) per step (subsequence report)
};

// Empirical two-scale* Young measure of the sequence: deposits the
// compactified image of mu_eps on (x-window, Z-cell, ball-cell) bins,
// averages the trailing measures, thresholds boundary dust, promotes
// concentrated boundary mass to lambda atoms, and decomposes.
EstimateResult estimate_young_measure(const SequenceSpec& spec,
                                      const EstimateOptions& opt = {});

// Builds the single-eps empirical compactified measure (no averaging).
CompactifiedMeasure empirical_compactified(const SequenceSpec& spec, double eps,
                                           const EstimateOptions& opt = {});

// Boundary-mass window detector: relabels concentrated boundary-shell
// clusters as exact atoms (layer 2) at their mass centroid.
void promote_lambda_atoms(CompactifiedMeasure& mu, int window, double factor);

struct TwoScaleLimit {
    ScalarMeasure kappa;           // Lebesgue on Omega + lambda^s atoms
    SecondScaleBarycenter theta;   // x -> [[ym]]_x
};

TwoScaleLimit two_scale_limit(const SequenceSpec& spec, const EstimateOptions& opt = {});

}  // namespace ym

#endif
