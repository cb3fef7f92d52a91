#include "ym/barycenter.hpp"

#include <cmath>

namespace ym {

RegSingPartition reg_sing_partition(const TwoScaleYoungMeasure& ym) {
    RegSingPartition p;
    int64_t n = ym.omega.cell_count();
    p.regular_cells.reserve(static_cast<size_t>(n));
    for (int64_t c = 0; c < n; ++c) p.regular_cells.push_back(c);
    for (const auto& a : ym.conc.lambda.atoms) p.singular_points.push_back(a.location);
    return p;
}

namespace {

struct VecEval {
    int out_dim;
    std::function<Pt(const Pt&, const Pt&, const Pt&)> f;      // finite part
    std::function<Pt(const Pt&, const Pt&, const Pt&)> f_inf;  // recession on sphere
};

VecEval make_eval(const Integrand& f) {
    VecEval v;
    v.out_dim = 1;
    v.f = [&f](const Pt& x, const Pt& xi, const Pt& z) { return Pt(f.eval(x, xi, z)); };
    v.f_inf = [&f](const Pt& x, const Pt& xi, const Pt& d) {
        return Pt(recession_value(f, x, xi, d));
    };
    return v;
}

VecEval make_id(int value_dim) {
    VecEval v;
    v.out_dim = value_dim;
    v.f = [](const Pt&, const Pt&, const Pt& z) { return z; };
    v.f_inf = [](const Pt&, const Pt&, const Pt& d) { return d; };
    return v;
}

Pt fiber_mean(const VecEval& ev, const Pt& x, const Pt& xi, const FiberDist& d) {
    Pt s;
    s.dim = ev.out_dim;
    for (const auto& a : d.atoms) s = s + a.w * ev.f(x, xi, a.point);
    return s;
}

Pt dir_mean(const VecEval& ev, const Pt& x, const Pt& xi, const std::vector<DirAtom>& dirs) {
    Pt s;
    s.dim = ev.out_dim;
    for (const auto& da : dirs) s = s + da.w * ev.f_inf(x, xi, da.dir);
    return s;
}

// integral of <f_inf, nu_inf> against rho (a vector in the output space)
Pt rho_integral(const VecEval& ev, const Pt& x, const RhoDist& r, const GridDomain& torus) {
    Pt s;
    s.dim = ev.out_dim;
    if (r.uniform || r.unconstrained) {
        if (r.uniform_dirs.empty()) return s;
        int64_t n = torus.cell_count();
        double volxi = torus.cell_volume();
        for (int64_t c = 0; c < n; ++c)
            s = s + volxi * dir_mean(ev, x, torus.cell_center(c), r.uniform_dirs);
        return s;
    }
    for (const auto& a : r.atoms) s = s + a.w * dir_mean(ev, x, a.xi, a.dirs);
    return s;
}

VectorMeasure barycenter_impl(const TwoScaleYoungMeasure& ym, const VecEval& ev) {
    VectorMeasure out = VectorMeasure::zero(ym.omega, ev.out_dim);
    int64_t nx = ym.omega.cell_count(), nz = ym.torus.cell_count();
    double volxi = ym.torus.cell_volume();
    for (int64_t cx = 0; cx < nx; ++cx) {
        Pt x = ym.omega.cell_center(cx);
        Pt s;
        s.dim = ev.out_dim;
        for (int64_t cz = 0; cz < nz; ++cz)
            s = s + volxi * fiber_mean(ev, x, ym.torus.cell_center(cz), ym.nu_at(cx, cz));
        double lam = ym.conc.lambda.density[static_cast<size_t>(cx)];
        if (lam > 0.0)
            s = s + lam * rho_integral(ev, x, ym.conc.rho_at_cell(cx), ym.torus);
        out.set_ac(cx, s);
    }
    for (size_t i = 0; i < ym.conc.lambda.atoms.size(); ++i) {
        const auto& at = ym.conc.lambda.atoms[i];
        Pt v = rho_integral(ev, at.location, ym.conc.rho_atom[i], ym.torus);
        double m = norm(v);
        if (at.mass * m > 0.0)
            out.singular.push_back({at.location, (1.0 / m) * v, at.mass * m});
    }
    return out;
}

VectorMeasure zmeasure_at(const TwoScaleYoungMeasure& ym, const VecEval& ev, const Pt& x,
                          int64_t cx_or_neg, const RhoDist& rho, double lam_ac,
                          bool singular_site) {
    VectorMeasure out = VectorMeasure::zero(ym.torus, ev.out_dim);
    int64_t nz = ym.torus.cell_count();
    if (!singular_site) {
        for (int64_t cz = 0; cz < nz; ++cz) {
            Pt xi = ym.torus.cell_center(cz);
            Pt d = fiber_mean(ev, x, xi, ym.nu_at(cx_or_neg, cz));
            out.set_ac(cz, d);
        }
    }
    double factor = singular_site ? 1.0 : lam_ac;
    if (factor > 0.0 && !(rho.unconstrained && rho.uniform_dirs.empty())) {
        if (rho.uniform) {
            for (int64_t cz = 0; cz < nz; ++cz) {
                Pt xi = ym.torus.cell_center(cz);
                Pt d = out.ac_at(cz) + factor * dir_mean(ev, x, xi, rho.uniform_dirs);
                out.set_ac(cz, d);
            }
        } else {
            for (const auto& a : rho.atoms) {
                Pt v = factor * a.w * dir_mean(ev, x, a.xi, a.dirs);
                double m = norm(v);
                if (m > 0.0) out.singular.push_back({a.xi, (1.0 / m) * v, m});
            }
        }
    }
    return out;
}

SecondScaleBarycenter second_scale_impl(const TwoScaleYoungMeasure& ym, const VecEval& ev) {
    SecondScaleBarycenter out;
    out.omega = ym.omega;
    out.torus = ym.torus;
    out.value_dim = ev.out_dim;
    int64_t nx = ym.omega.cell_count();
    for (int64_t cx = 0; cx < nx; ++cx) {
        double lam = ym.conc.lambda.density[static_cast<size_t>(cx)];
        out.at_cell[cx] = zmeasure_at(ym, ev, ym.omega.cell_center(cx), cx,
                                      ym.conc.rho_at_cell(cx), lam, false);
    }
    for (size_t i = 0; i < ym.conc.lambda.atoms.size(); ++i)
        out.at_atom.push_back(zmeasure_at(ym, ev, ym.conc.lambda.atoms[i].location, -1,
                                          ym.conc.rho_atom[i], 0.0, true));
    return out;
}

}  // namespace

VectorMeasure barycenter(const TwoScaleYoungMeasure& ym, const Integrand& f) {
    return barycenter_impl(ym, make_eval(f));
}

VectorMeasure barycenter_id(const TwoScaleYoungMeasure& ym) {
    return barycenter_impl(ym, make_id(ym.value_dim));
}

SecondScaleBarycenter second_scale_barycenter(const TwoScaleYoungMeasure& ym,
                                              const Integrand& f) {
    return second_scale_impl(ym, make_eval(f));
}

SecondScaleBarycenter second_scale_barycenter_id(const TwoScaleYoungMeasure& ym) {
    return second_scale_impl(ym, make_id(ym.value_dim));
}

}  // namespace ym
