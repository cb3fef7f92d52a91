#include "ym/localization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ym {

GridDomain blowup_cube(int dim, int res) {
    std::vector<double> lo(static_cast<size_t>(dim), -0.5), hi(static_cast<size_t>(dim), 0.5);
    std::vector<int> r(static_cast<size_t>(dim), res);
    return GridDomain::box(lo, hi, r);
}

namespace {

bool cube_inside(const GridDomain& omega, const Pt& x0, double r) {
    for (int i = 0; i < omega.dim; ++i)
        if (x0[i] - 0.5 * r < omega.lo[static_cast<size_t>(i)] - 1e-12 ||
            x0[i] + 0.5 * r > omega.hi[static_cast<size_t>(i)] + 1e-12)
            return false;
    return true;
}

double overlap_1d(double alo, double ahi, double blo, double bhi) {
    return std::max(0.0, std::min(ahi, bhi) - std::max(alo, blo));
}

bool atom_in_cube(const Pt& loc, const Pt& x0, double r, int dim) {
    for (int i = 0; i < dim; ++i)
        if (std::fabs(loc[i] - x0[i]) > 0.5 * r + 1e-15) return false;
    return true;
}

}  // namespace

void BlowupSpec::validate(const GridDomain& omega) const {
    if (radii.empty()) throw std::invalid_argument("BlowupSpec: no radii");
    for (size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] > radii[i + 1]))
            throw std::invalid_argument("BlowupSpec: radii must decrease");
    for (double r : radii)
        if (!cube_inside(omega, x0, r))
            throw std::invalid_argument("BlowupSpec: Q_r(x0) leaves the domain");
}

std::vector<double> default_radii(const GridDomain& omega, const Pt& x0, int count) {
    double rmax = 1e300;
    for (int i = 0; i < omega.dim; ++i)
        rmax = std::min(rmax, 2.0 * std::min(x0[i] - omega.lo[static_cast<size_t>(i)],
                                             omega.hi[static_cast<size_t>(i)] - x0[i]));
    double r = std::min(1.0, rmax);
    std::vector<double> radii;
    for (int j = 0; j < count; ++j) {
        radii.push_back(r);
        r *= 0.5;
    }
    return radii;
}

double mass_in_cube(const ScalarMeasure& m, const Pt& x0, double r) {
    double s = 0;
    int64_t n = m.domain.cell_count();
    for (int64_t c = 0; c < n; ++c) {
        if (m.density[static_cast<size_t>(c)] == 0.0) continue;
        Pt clo, chi;
        m.domain.cell_bounds(c, clo, chi);
        double frac = 1.0;
        for (int i = 0; i < m.domain.dim; ++i)
            frac *= overlap_1d(clo[i], chi[i], x0[i] - 0.5 * r, x0[i] + 0.5 * r) /
                    (chi[i] - clo[i]);
        s += m.density[static_cast<size_t>(c)] * m.domain.cell_volume() * frac;
    }
    for (const auto& a : m.atoms)
        if (atom_in_cube(a.location, x0, r, m.domain.dim)) s += a.mass;
    return s;
}

double variation_in_cube(const VectorMeasure& m, const Pt& x0, double r) {
    double s = 0;
    int64_t n = m.domain.cell_count();
    for (int64_t c = 0; c < n; ++c) {
        double nv = norm(m.ac_at(c));
        if (nv == 0.0) continue;
        Pt clo, chi;
        m.domain.cell_bounds(c, clo, chi);
        double frac = 1.0;
        for (int i = 0; i < m.domain.dim; ++i)
            frac *= overlap_1d(clo[i], chi[i], x0[i] - 0.5 * r, x0[i] + 0.5 * r) /
                    (chi[i] - clo[i]);
        s += nv * m.domain.cell_volume() * frac;
    }
    for (const auto& a : m.singular)
        if (atom_in_cube(a.location, x0, r, m.domain.dim)) s += a.mass;
    return s;
}

VectorMeasure blow_up(const VectorMeasure& m, const Pt& x0, double r,
                      BlowupScaling scaling, int out_res) {
    if (r <= 0.0) throw std::invalid_argument("blow_up: r must be > 0");
    if (!cube_inside(m.domain, x0, r))
        throw std::invalid_argument("blow_up: Q_r(x0) leaves the domain");
    double scale;
    if (scaling == BlowupScaling::regular) {
        scale = std::pow(r, -m.domain.dim);
    } else {
        double sm = 0;
        for (const auto& a : m.singular)
            if (atom_in_cube(a.location, x0, r, m.domain.dim)) sm += a.mass;
        if (sm <= 0.0) throw std::runtime_error("blow_up: no singular mass in Q_r(x0)");
        scale = 1.0 / sm;
    }
    AffineMap map;
    map.shift = x0;
    map.scale = r;
    VectorMeasure out = push_forward(m, map, blowup_cube(m.domain.dim, out_res), scale);
    std::vector<SingAtom> kept;  // restrict to cl Q
    for (const auto& a : out.singular)
        if (out.domain.contains(a.location, 1e-12)) kept.push_back(a);
    out.singular = std::move(kept);
    return out;
}

ScalarMeasure blow_up(const ScalarMeasure& m, const Pt& x0, double r, double post_scale,
                      int out_res) {
    if (r <= 0.0) throw std::invalid_argument("blow_up: r must be > 0");
    AffineMap map;
    map.shift = x0;
    map.scale = r;
    ScalarMeasure out = push_forward(m, map, blowup_cube(m.domain.dim, out_res), post_scale);
    std::vector<Atom> kept;
    for (const auto& a : out.atoms)
        if (out.domain.contains(a.location, 1e-12)) kept.push_back(a);
    out.atoms = std::move(kept);
    return out;
}

ScalarMeasure torus_translate(const ScalarMeasure& p, const Pt& xi0) {
    if (p.domain.kind != DomainKind::torus)
        throw std::invalid_argument("torus_translate: measure must live on the torus");
    AffineMap map;
    map.shift = xi0;
    map.scale = 1.0;
    map.mod_torus = true;
    return push_forward(p, map, p.domain);
}

FiberDist torus_translate(const FiberDist& d, const Pt& xi0) {
    FiberDist out = d;
    for (auto& a : out.atoms)
        for (int i = 0; i < a.point.dim; ++i) a.point[i] = frac01(a.point[i] - xi0[i]);
    return out;
}

RhoDist torus_translate(const RhoDist& r, const Pt& xi0) {
    RhoDist out = r;  // the uniform measure is translation invariant
    for (auto& a : out.atoms)
        for (int i = 0; i < a.xi.dim; ++i) a.xi[i] = frac01(a.xi[i] - xi0[i]);
    return out;
}

TangentMeasures tangent_measures(const ScalarMeasure& m, const Pt& x0,
                                 const std::vector<double>& radii, double tau_tan,
                                 int out_res) {
    TangentMeasures out;
    std::vector<std::function<double(const Pt&)>> tests;
    for (int j = 0; j < 10; ++j)
        tests.push_back([j](const Pt& y) {
            double s = 1.0;
            for (int i = 0; i < y.dim; ++i)
                s *= (j % 2 == 0) ? std::cos((j / 2 + 1) * M_PI * y[i])
                                  : (1.0 + y[i] * (j / 2 + 1) * 0.25);
            return s;
        });
    std::vector<double> prev;
    for (size_t jr = 0; jr < radii.size(); ++jr) {
        double mass = mass_in_cube(m, x0, radii[jr]);
        if (mass <= 0.0) throw std::runtime_error("tangent_measures: no tangent extracted");
        ScalarMeasure tau = blow_up(m, x0, radii[jr], 1.0 / mass, out_res);
        std::vector<double> vals;
        for (const auto& t : tests) {
            double v = 0;
            for (int64_t c = 0; c < tau.domain.cell_count(); ++c)
                v += t(tau.domain.cell_center(c)) * tau.density[static_cast<size_t>(c)] *
                     tau.domain.cell_volume();
            for (const auto& a : tau.atoms) v += t(a.location) * a.mass;
            vals.push_back(v);
        }
        if (!prev.empty() && out.converged_at < 0) {
            double gap = 0;
            for (size_t k = 0; k < vals.size(); ++k)
                gap = std::max(gap, std::fabs(vals[k] - prev[k]));
            if (gap <= tau_tan) out.converged_at = static_cast<int>(jr);
        }
        prev = vals;
        out.blowups.push_back(std::move(tau));
    }
    return out;
}

namespace {

// blow-up of the analytic generating sequence as a sequence on Q;
// density_factor multiplies u(x0 + r y) (1 regular, c_r r^d singular)
SequenceSpec blown_spec(const SequenceSpec& spec, const Pt& x0, double r,
                        double density_factor, const GridDomain& cube) {
    SequenceSpec out;
    out.domain = cube;
    out.value_dim = spec.value_dim;
    out.name = spec.name + "_blowup";
    if (spec.piecewise()) {
        out.kind = SeqKind::piecelist;
        double x00 = x0[0];
        SequenceSpec base = spec;
        out.piece_provider = [base, x00, r, density_factor](double delta) {
            double eps = delta * r;  // delta = eps / r
            std::vector<Piece> pieces;
            for (const auto& p : analytic_pieces(base, eps)) {
                double lo = std::max((p.lo - x00) / r, -0.5);
                double hi = std::min((p.hi - x00) / r, 0.5);
                if (hi <= lo) continue;
                pieces.push_back({lo, hi, p.value * density_factor});
            }
            return pieces;
        };
    } else {
        out.kind = SeqKind::custom;
        SequenceSpec base = spec;
        Pt x0c = x0;
        out.sampler = [base, x0c, r, density_factor](const Pt& y, double delta) {
            Pt x = x0c + r * y;
            double eps = delta * r;
            Pt u = base.kind == SeqKind::sine
                       ? Pt(std::sin(2.0 * M_PI * x[0] / std::pow(eps, base.alpha)))
                       : base.sampler(x, eps);
            return density_factor * u;
        };
    }
    return out;
}

}  // namespace

TangentResult tangent_young(const TwoScaleYoungMeasure& ym, const SequenceSpec& spec_seq,
                            const Pt& x0, BlowupScaling mode, const TangentOptions& opt) {
    TangentResult res;
    std::vector<double> radii = opt.radii.empty() ? default_radii(ym.omega, x0) : opt.radii;
    BlowupSpec bspec{x0, radii, mode};
    bspec.validate(ym.omega);

    // xi0 = limit of frac(x0/eps_i) along the declared schedule
    const auto& eps = spec_seq.epsilons;
    if (eps.size() < 2) throw std::invalid_argument("tangent_young: schedule too short");
    double f_last = frac01(x0[0] / eps.back());
    double f_prev = frac01(x0[0] / eps[eps.size() - 2]);
    if (torus_dist(f_last, f_prev) > 0.05)
        throw std::runtime_error(
            "tangent_young: frac(x0/eps) non-convergent; refine the subsequence");
    res.xi0 = f_last;
    Pt xi0(res.xi0);

    const GridDomain cube = blowup_cube(ym.omega.dim, opt.est.win);
    TwoScaleYoungMeasure tg;
    tg.omega = cube;
    tg.torus = ym.torus;
    tg.ball = ym.ball;
    tg.value_dim = ym.value_dim;
    tg.conc.lambda = ScalarMeasure::zero(cube);

    int64_t x0cell = ym.omega.cell_index(x0);
    int64_t nz = ym.torus.cell_count();
    double r_small = radii.back();

    if (mode == BlowupScaling::regular) {
        double lam_ac = ym.conc.lambda.density[static_cast<size_t>(x0cell)];
        double ratio =
            mass_in_cube(ym.conc.lambda, x0, r_small) / std::pow(r_small, ym.omega.dim);
        if (std::fabs(ratio - lam_ac) > opt.lebesgue_tol * (1.0 + std::fabs(lam_ac))) {
            std::ostringstream os;
            os << "regular-point check failed: lambda(Q_r)/r^d = " << ratio
               << " vs lambda_ac(x0) = " << lam_ac;
            res.warnings.push_back(os.str());
        }
        // D nu_{y,xi} = nu_{x0, xi + xi0}, homogeneous in y
        for (int64_t cy = 0; cy < cube.cell_count(); ++cy)
            for (int64_t cz = 0; cz < nz; ++cz) {
                Pt src = ym.torus.cell_center(cz) + xi0;
                for (int i = 0; i < src.dim; ++i) src[i] = frac01(src[i]);
                const FiberDist& d = ym.nu_at(x0cell, ym.torus.cell_index(src));
                if (d.atoms.size() == 1 && norm(d.atoms[0].point) == 0.0) continue;
                tg.nu[tg.nu_key(cy, cz)] = d;
            }
        if (lam_ac > 0.0) {
            RhoDist rho = torus_translate(ym.conc.rho_at_cell(x0cell), xi0);
            for (int64_t cy = 0; cy < cube.cell_count(); ++cy) {
                tg.conc.lambda.density[static_cast<size_t>(cy)] = lam_ac;
                tg.conc.rho_cell[cy] = rho;
            }
        }
    } else {
        // singular mode: nu = delta_0 and D lambda in Tan_1(lambda^s, x0)
        ScalarMeasure lam_s = ScalarMeasure::zero(ym.conc.lambda.domain);
        lam_s.atoms = ym.conc.lambda.atoms;
        double sing = mass_in_cube(lam_s, x0, r_small);
        if (sing <= 0.0) throw std::runtime_error("tangent_young: no singular mass at x0");
        double ac_part = mass_in_cube(ym.conc.lambda, x0, r_small) - sing;
        double osc_part = 0;
        double volx = ym.omega.cell_volume(), volz = ym.torus.cell_volume();
        for (int64_t cz = 0; cz < nz; ++cz) {
            const FiberDist& d = ym.nu_at(x0cell, cz);
            for (const auto& a : d.atoms) osc_part += a.w * norm(a.point) * volz * volx;
        }
        double ratio = (std::pow(r_small, ym.omega.dim) + ac_part + osc_part) / sing;
        if (ratio > opt.singular_ratio_tol) {
            std::ostringstream os;
            os << "singular-point check failed: density ratio " << ratio << " above "
               << opt.singular_ratio_tol;
            res.warnings.push_back(os.str());
        }
        size_t best = 0;
        double bestd = 1e300;
        for (size_t i = 0; i < ym.conc.lambda.atoms.size(); ++i) {
            double d = norm(ym.conc.lambda.atoms[i].location - x0);
            if (d < bestd) {
                bestd = d;
                best = i;
            }
        }
        if (bestd > 2.0 * ym.omega.width(0))
            res.warnings.push_back("nearest lambda atom is more than 2 cells from x0");
        ScalarMeasure dlam = blow_up(lam_s, x0, r_small, 1.0 / sing, opt.est.win);
        tg.conc.lambda.atoms = dlam.atoms;
        RhoDist rho = torus_translate(ym.conc.rho_atom[best], xi0);
        for (size_t i = 0; i < tg.conc.lambda.atoms.size(); ++i)
            tg.conc.rho_atom.push_back(rho);
    }
    res.tangent = std::move(tg);

    if (opt.reestimate) {
        // diagonal rule: the diag_count smallest eps with eps/r_small below
        // the ratio threshold
        std::vector<double> deltas;
        for (double e : eps)
            if (e / r_small < opt.diag_ratio) deltas.push_back(e / r_small);
        if (static_cast<int>(deltas.size()) > opt.diag_count)
            deltas.erase(deltas.begin(), deltas.end() - opt.diag_count);
        if (deltas.size() >= 2) {
            double density_factor = 1.0;
            if (mode == BlowupScaling::singular) {
                ScalarMeasure lam_s = ScalarMeasure::zero(ym.conc.lambda.domain);
                lam_s.atoms = ym.conc.lambda.atoms;
                double sing = mass_in_cube(lam_s, x0, r_small);
                density_factor = std::pow(r_small, ym.omega.dim) / sing;
            }
            SequenceSpec blown = blown_spec(spec_seq, x0, r_small, density_factor, cube);
            blown.epsilons = deltas;
            auto est = estimate_young_measure(blown, opt.est);
            res.reestimated = true;
            res.reestimate_diff = ym_distance(est.ym, res.tangent);
        }
    }
    return res;
}

}  // namespace ym
