#include "ym/young.hpp"

#include <algorithm>
#include <cmath>

namespace ym {

double TwoScaleYoungMeasure::mass_bound() const {
    double volx = omega.cell_volume(), volxi = torus.cell_volume();
    double s = 0;
    for (const auto& [k, d] : nu) {
        (void)k;
        for (const auto& a : d.atoms) s += a.w * norm(a.point);
    }
    // absent cells are delta_0 and contribute nothing
    s *= volx * volxi;
    return s + conc.lambda.total_mass();
}

void TwoScaleYoungMeasure::validate() const {
    conc.lambda.validate();
    for (const auto& [k, d] : nu) {
        if (k < 0 || k >= omega.cell_count() * torus.cell_count())
            throw std::invalid_argument("ym: nu key out of range");
        if (d.uniform) throw std::invalid_argument("ym: nu fibers must be atomic");
        if (std::fabs(d.total() - 1.0) > 1e-9)
            throw std::invalid_argument("ym: nu fiber is not a probability");
    }
    auto check_rho = [&](const RhoDist& r) {
        if (r.unconstrained) return;
        if (std::fabs(r.total() - 1.0) > 1e-9)
            throw std::invalid_argument("ym: rho is not a probability");
        auto check_dirs = [&](const std::vector<DirAtom>& dirs) {
            double s = 0;
            for (const auto& da : dirs) {
                if (std::fabs(norm(da.dir) - 1.0) > 1e-9)
                    throw std::invalid_argument("ym: nu_inf atom off the unit sphere");
                s += da.w;
            }
            if (std::fabs(s - 1.0) > 1e-9)
                throw std::invalid_argument("ym: nu_inf is not a probability");
        };
        if (r.uniform) {
            if (!r.uniform_dirs.empty()) check_dirs(r.uniform_dirs);
        } else {
            for (const auto& a : r.atoms) check_dirs(a.dirs);
        }
    };
    int64_t n = conc.lambda.domain.cell_count();
    for (int64_t c = 0; c < n; ++c)
        if (conc.lambda.density[static_cast<size_t>(c)] > 0.0) {
            const RhoDist& r = conc.rho_at_cell(c);
            if (r.unconstrained)
                throw std::invalid_argument("ym: lambda-charged cell without rho");
            check_rho(r);
        }
    if (conc.rho_atom.size() != conc.lambda.atoms.size())
        throw std::invalid_argument("ym: rho_atom size mismatch");
    for (const auto& r : conc.rho_atom) {
        if (r.unconstrained) throw std::invalid_argument("ym: lambda atom without rho");
        check_rho(r);
    }
}

double CompactifiedMeasure::total_mass() const {
    double s = 0;
    for (const auto& e : entries) s += (e.layer == 0) ? e.w * (1.0 + norm(e.z)) : e.w;
    return s;
}

void CompactifiedMeasure::validate() const {
    for (const auto& e : entries) {
        if (!(e.w >= 0.0) || !std::isfinite(e.w))
            throw std::invalid_argument("CompactifiedMeasure: negative or non-finite mass");
        if (e.layer != 0 && std::fabs(norm(e.z) - 1.0) > 1e-9)
            throw std::invalid_argument("CompactifiedMeasure: boundary entry off the sphere");
    }
}

double default_tau_rep(const CompactifiedMeasure& mu) {
    int min_res = mu.omega.res[0];
    for (int i = 0; i < mu.omega.dim; ++i) min_res = std::min(min_res, mu.omega.res[static_cast<size_t>(i)]);
    for (int i = 0; i < mu.torus.dim; ++i) min_res = std::min(min_res, mu.torus.res[static_cast<size_t>(i)]);
    return std::max(1e-8, 3.0 / min_res);
}

namespace {

double dir_term(const Integrand& f, const Pt& x, const Pt& xi,
                const std::vector<DirAtom>& dirs) {
    double s = 0;
    for (const auto& da : dirs) s += da.w * recession_value(f, x, xi, da.dir);
    return s;
}

double rho_term(const Integrand& f, const Pt& x, const RhoDist& r, const GridDomain& torus) {
    if (r.uniform || r.unconstrained) {
        double s = 0;
        if (r.uniform_dirs.empty()) return 0.0;
        int64_t n = torus.cell_count();
        double volxi = torus.cell_volume();
        for (int64_t c = 0; c < n; ++c)
            s += volxi * dir_term(f, x, torus.cell_center(c), r.uniform_dirs);
        return s;
    }
    double s = 0;
    for (const auto& a : r.atoms) s += a.w * dir_term(f, x, a.xi, a.dirs);
    return s;
}

}  // namespace

double pairing(const Integrand& f, const TwoScaleYoungMeasure& ym) {
    double volx = ym.omega.cell_volume(), volxi = ym.torus.cell_volume();
    int64_t nx = ym.omega.cell_count(), nz = ym.torus.cell_count();

    double osc = 0;
    for (int64_t cx = 0; cx < nx; ++cx) {
        Pt x = ym.omega.cell_center(cx);
        for (int64_t cz = 0; cz < nz; ++cz) {
            Pt xi = ym.torus.cell_center(cz);
            const FiberDist& d = ym.nu_at(cx, cz);
            double s = 0;
            for (const auto& a : d.atoms) s += a.w * f.eval(x, xi, a.point);
            osc += s;
        }
    }
    osc *= volx * volxi;

    double conc = 0;
    const auto& lam = ym.conc.lambda;
    for (int64_t cx = 0; cx < nx; ++cx) {
        double den = lam.density[static_cast<size_t>(cx)];
        if (den <= 0.0) continue;
        conc += den * volx *
                rho_term(f, ym.omega.cell_center(cx), ym.conc.rho_at_cell(cx), ym.torus);
    }
    for (size_t i = 0; i < lam.atoms.size(); ++i)
        conc += lam.atoms[i].mass *
                rho_term(f, lam.atoms[i].location, ym.conc.rho_atom[i], ym.torus);
    return osc + conc;
}

double pair_compactified(const Integrand& f, const CompactifiedMeasure& mu) {
    double s = 0;
    for (const auto& e : mu.entries)
        s += (e.layer == 0) ? e.w * f.eval(e.x, e.xi, e.z)
                            : e.w * recession_value(f, e.x, e.xi, e.z);
    return s;
}

CompactifiedMeasure compactify(const TwoScaleYoungMeasure& ym) {
    CompactifiedMeasure mu;
    mu.omega = ym.omega;
    mu.torus = ym.torus;
    mu.ball = ym.ball;
    mu.value_dim = ym.value_dim;
    double volx = ym.omega.cell_volume(), volxi = ym.torus.cell_volume();
    int64_t nx = ym.omega.cell_count(), nz = ym.torus.cell_count();

    for (int64_t cx = 0; cx < nx; ++cx) {
        Pt x = ym.omega.cell_center(cx);
        for (int64_t cz = 0; cz < nz; ++cz) {
            Pt xi = ym.torus.cell_center(cz);
            const FiberDist& d = ym.nu_at(cx, cz);
            for (const auto& a : d.atoms)
                mu.entries.push_back({x, xi, a.point, a.w * volx * volxi, 0});
        }
    }

    auto emit_conc = [&](const Pt& x, double lam_mass, const RhoDist& r, int layer) {
        if (lam_mass <= 0.0) return;
        if (r.uniform) {
            for (int64_t cz = 0; cz < nz; ++cz) {
                Pt xi = ym.torus.cell_center(cz);
                for (const auto& da : r.uniform_dirs)
                    mu.entries.push_back({x, xi, da.dir, lam_mass * volxi * da.w, layer});
            }
        } else {
            for (const auto& a : r.atoms)
                for (const auto& da : a.dirs)
                    mu.entries.push_back({x, a.xi, da.dir, lam_mass * a.w * da.w, layer});
        }
    };

    const auto& lam = ym.conc.lambda;
    for (int64_t cx = 0; cx < nx; ++cx) {
        double den = lam.density[static_cast<size_t>(cx)];
        if (den > 0.0)
            emit_conc(ym.omega.cell_center(cx), den * volx, ym.conc.rho_at_cell(cx), 1);
    }
    for (size_t i = 0; i < lam.atoms.size(); ++i)
        emit_conc(lam.atoms[i].location, lam.atoms[i].mass, ym.conc.rho_atom[i], 2);
    return mu;
}

double verify_representation_identity(const CompactifiedMeasure& mu,
                                      const std::vector<SeparatingPair>& family) {
    int64_t nx = mu.omega.cell_count(), nz = mu.torus.cell_count();
    double volx = mu.omega.cell_volume(), volxi = mu.torus.cell_volume();
    double worst = 0;
    for (const auto& pg : family) {
        double lhs = 0;
        for (const auto& e : mu.entries)
            if (e.layer == 0) lhs += e.w * pg.phi(e.x) * pg.g(e.xi);
        double qphi = 0, qg = 0;
        for (int64_t c = 0; c < nx; ++c) qphi += volx * pg.phi(mu.omega.cell_center(c));
        for (int64_t c = 0; c < nz; ++c) qg += volxi * pg.g(mu.torus.cell_center(c));
        double dev = std::fabs(lhs - qphi * qg) / (pg.phi_sup * pg.g_sup);
        worst = std::max(worst, dev);
    }
    return worst;
}

double verify_representation_identity(const CompactifiedMeasure& mu) {
    return verify_representation_identity(mu, separating_pairs(mu.omega, 25));
}

namespace {

// key -> (mass, mass-weighted sums) accumulator for grouping entries
struct Centroid {
    double w = 0;
    Pt sx, sxi, sz;
    void add(const CompactifiedMeasure::Entry& e) {
        if (w == 0) {
            sx.dim = e.x.dim;
            sxi.dim = e.xi.dim;
            sz.dim = e.z.dim;
        }
        w += e.w;
        sx = sx + e.w * e.x;
        sxi = sxi + e.w * e.xi;
        sz = sz + e.w * e.z;
    }
    Pt mx() const { return (1.0 / w) * sx; }
    Pt mxi() const { return (1.0 / w) * sxi; }
    Pt mz() const { return (1.0 / w) * sz; }
};

}  // namespace

TwoScaleYoungMeasure decompose_compactified(const CompactifiedMeasure& mu, double tau_rep) {
    mu.validate();
    double tau = tau_rep > 0 ? tau_rep : default_tau_rep(mu);
    double dev = verify_representation_identity(mu);
    if (dev > tau)
        throw std::runtime_error(
            "decompose_compactified: not in S*[Y^2], representation deviation " +
            std::to_string(dev) + " > " + std::to_string(tau));

    TwoScaleYoungMeasure ym;
    ym.omega = mu.omega;
    ym.torus = mu.torus;
    ym.ball = mu.ball;
    ym.value_dim = mu.value_dim;
    ym.conc.lambda = ScalarMeasure::zero(mu.omega);

    // --- oscillation part: group interior entries by (x-cell, xi-cell)
    std::map<int64_t, FiberDist> nu;
    std::map<int64_t, double> ucell;
    for (const auto& e : mu.entries) {
        if (e.layer != 0) continue;
        int64_t key = ym.nu_key(mu.omega.cell_index(e.x), mu.torus.cell_index(e.xi));
        nu[key].atoms.push_back({e.z, e.w});
        ucell[key] += e.w;
    }
    for (auto& [key, dist] : nu) {
        double u = ucell[key];
        if (u <= 0.0) continue;
        for (auto& a : dist.atoms) a.w /= u;
    }
    ym.nu = std::move(nu);

    // --- concentration part: group boundary entries per lambda site, then
    // by exact xi location (entries from one rho atom share it bit-exactly;
    // estimator entries are already merged per bin)
    auto loc_less = [](const Pt& a, const Pt& b) {
        for (int i = 0; i < a.dim; ++i) {
            if (a[i] < b[i]) return true;
            if (a[i] > b[i]) return false;
        }
        return false;
    };
    struct SiteAcc {
        double mass = 0;
        std::map<Pt, std::vector<std::pair<Pt, double>>, bool (*)(const Pt&, const Pt&)>
            xi_groups;
        SiteAcc(bool (*less)(const Pt&, const Pt&)) : xi_groups(less) {}
    };
    auto less_fn = +[](const Pt& a, const Pt& b) {
        for (int i = 0; i < a.dim; ++i) {
            if (a[i] < b[i]) return true;
            if (a[i] > b[i]) return false;
        }
        return false;
    };
    std::map<int64_t, SiteAcc> cell_sites;  // by x-cell (layer 1)
    std::map<Pt, SiteAcc, decltype(loc_less)> atom_sites(loc_less);

    for (const auto& e : mu.entries) {
        if (e.layer == 0) continue;
        SiteAcc* site;
        if (e.layer == 1) {
            site = &cell_sites.try_emplace(mu.omega.cell_index(e.x), less_fn).first->second;
        } else {
            site = &atom_sites.try_emplace(e.x, less_fn).first->second;
        }
        site->mass += e.w;
        site->xi_groups[e.xi].push_back({e.z, e.w});
    }

    auto build_rho = [&](const SiteAcc& site) {
        RhoDist r;
        for (const auto& [xi, dirs] : site.xi_groups) {
            RhoAtom ra;
            ra.xi = xi;
            double wsum = 0;
            for (const auto& [d, w] : dirs) {
                (void)d;
                wsum += w;
            }
            ra.w = wsum / site.mass;
            for (const auto& [d, w] : dirs) ra.dirs.push_back({d, w / wsum});
            r.atoms.push_back(std::move(ra));
        }
        return r;
    };

    double volx = mu.omega.cell_volume();
    for (const auto& [cx, site] : cell_sites) {
        ym.conc.lambda.density[static_cast<size_t>(cx)] = site.mass / volx;
        ym.conc.rho_cell[cx] = build_rho(site);
    }
    for (const auto& [loc, site] : atom_sites) {
        ym.conc.lambda.atoms.push_back({loc, site.mass});
        ym.conc.rho_atom.push_back(build_rho(site));
    }
    return ym;
}

TwoScaleYoungMeasure embed_measure(const VectorMeasure& m, int torus_res, int ball_rings) {
    m.validate();
    TwoScaleYoungMeasure ym;
    ym.omega = m.domain;
    ym.torus = GridDomain::unit_torus(m.domain.dim, torus_res);
    ym.ball = BallGrid::make(std::min(m.value_dim, 2), ball_rings);
    ym.value_dim = m.value_dim;
    ym.conc.lambda = ScalarMeasure::zero(m.domain);

    int64_t nx = m.domain.cell_count(), nz = ym.torus.cell_count();
    for (int64_t cx = 0; cx < nx; ++cx) {
        Pt z = m.ac_at(cx);
        if (norm(z) == 0.0) continue;  // delta_0 default
        for (int64_t cz = 0; cz < nz; ++cz) {
            FiberDist d;
            d.atoms.push_back({z, 1.0});
            ym.nu[ym.nu_key(cx, cz)] = d;
        }
    }
    for (const auto& a : m.singular) {
        ym.conc.lambda.atoms.push_back({a.location, a.mass});
        RhoDist r;
        r.uniform = true;
        r.uniform_dirs.push_back({a.direction, 1.0});
        ym.conc.rho_atom.push_back(std::move(r));
    }
    return ym;
}

double dir_tv(const std::vector<DirAtom>& a, const std::vector<DirAtom>& b,
              const BallGrid& ball) {
    std::vector<double> ma(static_cast<size_t>(ball.dirs), 0.0), mb(static_cast<size_t>(ball.dirs), 0.0);
    for (const auto& d : a) ma[static_cast<size_t>(ball.dir_index(d.dir))] += d.w;
    for (const auto& d : b) mb[static_cast<size_t>(ball.dir_index(d.dir))] += d.w;
    double s = 0;
    for (int i = 0; i < ball.dirs; ++i) s += std::fabs(ma[static_cast<size_t>(i)] - mb[static_cast<size_t>(i)]);
    return 0.5 * s;
}

namespace {

// bin a nu fiber onto ball cells (interior rings x dirs)
std::vector<double> bin_fiber(const FiberDist& d, const BallGrid& ball) {
    std::vector<double> bins(static_cast<size_t>(ball.interior_cells()), 0.0);
    for (const auto& a : d.atoms) {
        double zn = norm(a.point);
        Pt zhat = (1.0 / (1.0 + zn)) * a.point;
        bins[static_cast<size_t>(ball.interior_index(zhat))] += a.w;
    }
    return bins;
}

std::vector<DirAtom> site_dirs(const RhoDist& r) {
    std::vector<DirAtom> out;
    if (r.uniform) {
        for (const auto& d : r.uniform_dirs) out.push_back(d);
        return out;
    }
    for (const auto& a : r.atoms)
        for (const auto& d : a.dirs) out.push_back({d.dir, a.w * d.w});
    return out;
}

double rho_tv_on(const RhoDist& a, const RhoDist& b, const GridDomain& torus) {
    FiberDist fa, fb;
    fa.uniform = a.uniform;
    for (const auto& at : a.atoms) fa.atoms.push_back({at.xi, at.w});
    fb.uniform = b.uniform;
    for (const auto& at : b.atoms) fb.atoms.push_back({at.xi, at.w});
    return tv_distance(fa, fb, torus);
}

}  // namespace

YmDiff ym_distance(const TwoScaleYoungMeasure& a, const TwoScaleYoungMeasure& b) {
    if (!a.omega.same_layout(b.omega) || !a.torus.same_layout(b.torus))
        throw std::invalid_argument("ym_distance: grids differ");
    YmDiff out;

    int64_t nx = a.omega.cell_count(), nz = a.torus.cell_count();
    double acc = 0, acc_mean = 0;
    for (int64_t cx = 0; cx < nx; ++cx)
        for (int64_t cz = 0; cz < nz; ++cz) {
            const FiberDist& da = a.nu_at(cx, cz);
            const FiberDist& db = b.nu_at(cx, cz);
            auto ba = bin_fiber(da, a.ball);
            auto bb = bin_fiber(db, a.ball);
            double s = 0;
            for (size_t i = 0; i < ba.size(); ++i) s += std::fabs(ba[i] - bb[i]);
            double tv = 0.5 * s;
            acc += tv;
            out.nu_tv_max = std::max(out.nu_tv_max, tv);
            Pt ma, mb2;
            ma.dim = mb2.dim = a.value_dim;
            for (const auto& at : da.atoms) ma = ma + at.w * at.point;
            for (const auto& at : db.atoms) mb2 = mb2 + at.w * at.point;
            acc_mean += norm(ma - mb2);
        }
    out.nu_tv_mean = acc / static_cast<double>(nx * nz);
    out.nu_mean_l1 = acc_mean / static_cast<double>(nx * nz);

    out.lambda_tv = tv_distance(a.conc.lambda, b.conc.lambda);
    double mb = b.conc.lambda.total_mass();
    out.lambda_mass_rel =
        std::fabs(a.conc.lambda.total_mass() - mb) / std::max(mb, 1e-12);

    // atom alignment: every b atom must have a matching a atom
    double cellw = a.omega.width(0);
    out.atom_loc_cells = 0.0;
    out.atom_mass_rel = 0.0;
    for (const auto& bat : b.conc.lambda.atoms) {
        if (a.conc.lambda.atoms.empty()) {
            out.atom_loc_cells = 1e300;
            out.atom_mass_rel = 1e300;
            break;
        }
        double best = 1e300, best_mass = 0;
        for (const auto& aat : a.conc.lambda.atoms) {
            double d = norm(aat.location - bat.location);
            if (d < best) {
                best = d;
                best_mass = aat.mass;
            }
        }
        out.atom_loc_cells = std::max(out.atom_loc_cells, best / cellw);
        out.atom_mass_rel = std::max(
            out.atom_mass_rel, std::fabs(best_mass - bat.mass) / std::max(bat.mass, 1e-12));
    }

    // rho / nu_inf at b's charged sites
    double lam_total = std::max(b.conc.lambda.total_mass(), 1e-12);
    double volx = b.omega.cell_volume();
    for (int64_t cx = 0; cx < nx; ++cx) {
        double mass_b = b.conc.lambda.density[static_cast<size_t>(cx)] * volx;
        if (mass_b < 0.01 * lam_total) continue;
        const RhoDist& rb = b.conc.rho_at_cell(cx);
        const RhoDist& ra = a.conc.rho_at_cell(cx);
        out.rho_tv_max = std::max(out.rho_tv_max, rho_tv_on(ra, rb, a.torus));
        out.nuinf_tv_max =
            std::max(out.nuinf_tv_max, dir_tv(site_dirs(ra), site_dirs(rb), a.ball));
    }
    for (size_t i = 0; i < b.conc.lambda.atoms.size(); ++i) {
        const auto& bat = b.conc.lambda.atoms[i];
        if (bat.mass < 0.01 * lam_total) continue;
        // nearest a atom
        size_t jbest = 0;
        double best = 1e300;
        for (size_t j = 0; j < a.conc.lambda.atoms.size(); ++j) {
            double d = norm(a.conc.lambda.atoms[j].location - bat.location);
            if (d < best) {
                best = d;
                jbest = j;
            }
        }
        if (a.conc.lambda.atoms.empty()) {
            out.rho_tv_max = 1.0;
            out.nuinf_tv_max = 1.0;
            continue;
        }
        const RhoDist& ra = a.conc.rho_atom[jbest];
        const RhoDist& rb = b.conc.rho_atom[i];
        out.rho_tv_max = std::max(out.rho_tv_max, rho_tv_on(ra, rb, a.torus));
        out.nuinf_tv_max =
            std::max(out.nuinf_tv_max, dir_tv(site_dirs(ra), site_dirs(rb), a.ball));
    }
    return out;
}

}  // namespace ym
