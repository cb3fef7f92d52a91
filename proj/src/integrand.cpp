#include "ym/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double tgrid_limit(const Integrand& f, const Pt& x, const Pt& xi, const Pt& z,
                   const RecessionOptions& opt, bool& finite, bool& stable) {
    finite = true;
    stable = true;
    double prev = 0.0, cur = 0.0;
    for (int k = opt.t_decades_lo; k <= opt.t_decades_hi; ++k) {
        double t = std::pow(10.0, k);
        prev = cur;
        cur = f.eval(x, xi, t * z) / t;
        if (!std::isfinite(cur)) {
            finite = false;
            return cur > 0 ? kInf : -kInf;
        }
        if (k > opt.t_decades_lo && std::fabs(cur) > 5.0 * std::fabs(prev) + 1.0) {
            // geometric growth of f(tz)/t: no linear-growth limit
            finite = false;
            return cur > 0 ? kInf : -kInf;
        }
    }
    // an O(1/t) tail moves v by ~c/t_prev between the last two decades;
    // only O(1) swings indicate a genuinely oscillating limit
    if (std::fabs(cur - prev) > 100.0 * opt.tol * (1.0 + std::fabs(cur))) stable = false;
    return cur;
}

}  // namespace

void Integrand::validate_samples(const GridDomain& omega, int samples, uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> uz(-10.0, 10.0);
    for (int s = 0; s < samples; ++s) {
        Pt x;
        x.dim = omega.dim;
        for (int i = 0; i < omega.dim; ++i)
            x[i] = omega.lo[static_cast<size_t>(i)] + u01(rng) * (omega.hi[static_cast<size_t>(i)] - omega.lo[static_cast<size_t>(i)]);
        Pt xi;
        xi.dim = omega.dim;
        for (int i = 0; i < omega.dim; ++i) xi[i] = u01(rng);
        Pt z;
        z.dim = value_dim;
        for (int i = 0; i < value_dim; ++i) z[i] = uz(rng);

        double v = eval(x, xi, z);
        if (has_linear_growth() && std::fabs(v) > growth_constant * (1.0 + norm(z)) + 1e-9)
            throw std::logic_error(name + ": linear-growth bound violated at a sample");
        if (flags.one_homogeneous_in_z) {
            for (double t : {0.5, 2.0, 7.0}) {
                double lhs = eval(x, xi, t * z);
                if (std::fabs(lhs - t * v) > 1e-9 * (1.0 + std::fabs(t * v)))
                    throw std::logic_error(name + ": 1-homogeneity violated at a sample");
            }
        }
        if (flags.convex_in_z) {
            Pt z2;
            z2.dim = value_dim;
            for (int i = 0; i < value_dim; ++i) z2[i] = uz(rng);
            double mid = eval(x, xi, 0.5 * (z + z2));
            if (mid > 0.5 * (v + eval(x, xi, z2)) + 1e-9)
                throw std::logic_error(name + ": midpoint convexity violated at a sample");
        }
    }
}

RecessionResult recession(const Integrand& f, RecessionMode mode, const Pt& x,
                          const Pt& xi, const Pt& z_dir, const RecessionOptions& opt) {
    RecessionResult r;
    double zn = norm(z_dir);
    if (zn == 0.0) {
        r.value = 0.0;
        return r;
    }
    if (f.recession_fn) {
        r.value = f.recession_fn(x, xi, z_dir);
        return r;
    }

    // stencil of perturbed (x', xi') around the base point
    std::vector<Pt> xs{x}, xis{xi};
    if (opt.stencil_x > 0.0) {
        for (int i = 0; i < x.dim; ++i)
            for (double s : {-1.0, 1.0}) {
                Pt p = x;
                p[i] += s * opt.stencil_x;
                xs.push_back(p);
            }
    }
    if (opt.stencil_xi > 0.0) {
        for (int i = 0; i < xi.dim; ++i)
            for (double s : {-1.0, 1.0}) {
                Pt p = xi;
                p[i] = frac01(p[i] + s * opt.stencil_xi);
                xis.push_back(p);
            }
    }

    double hi = -kInf, lo = kInf;
    bool any_unstable = false;
    for (const auto& xp : xs)
        for (const auto& xip : xis) {
            bool finite = true, stable = true;
            double v = tgrid_limit(f, xp, xip, z_dir, opt, finite, stable);
            if (!finite) {
                r.finite = false;
                r.exists = (mode != RecessionMode::strong);
                r.value = v;
                return r;
            }
            any_unstable = any_unstable || !stable;
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }

    double scale = 1.0 + std::max(std::fabs(hi), std::fabs(lo));
    // stencil values of a continuous integrand differ by O(radius); only a
    // genuine jump (or an unstable t-limit) disqualifies the strong mode
    double strong_tol = std::max(opt.tol, 2.0 * std::max(opt.stencil_x, opt.stencil_xi)) * scale;
    switch (mode) {
        case RecessionMode::upper:
            r.value = hi;
            break;
        case RecessionMode::lower:
            r.value = lo;
            break;
        case RecessionMode::strong:
            r.value = 0.5 * (hi + lo);
            if (hi - lo > strong_tol || any_unstable) r.exists = false;
            break;
    }
    return r;
}

double recession_value(const Integrand& f, const Pt& x, const Pt& xi, const Pt& z,
                       const RecessionOptions& opt) {
    double zn = norm(z);
    if (zn == 0.0) return 0.0;
    if (f.recession_fn) return f.recession_fn(x, xi, z);
    RecessionResult r = recession(f, RecessionMode::strong, x, xi, (1.0 / zn) * z, opt);
    if (!r.exists || !r.finite) {
        std::ostringstream os;
        os << f.name << ": not in E2 (no strong recession at x=" << x[0] << " xi=" << xi[0]
           << " dir=" << z[0] / zn << ")";
        throw std::runtime_error(os.str());
    }
    return zn * r.value;
}

double TransformedIntegrand::eval(const Pt& x, const Pt& xi, const Pt& zhat) const {
    double r = norm(zhat);
    if (r > 1.0 + 1e-12) throw std::invalid_argument("Tf: point outside closed unit ball");
    if (r >= boundary_band) {
        Pt dir = (r > 0) ? (1.0 / r) * zhat : zhat;
        return recession_value(*f, x, xi, dir);
    }
    double s = 1.0 - r;
    return s * f->eval(x, xi, (1.0 / s) * zhat);
}

TransformedIntegrand transform(const Integrand& f, TransformDir dir) {
    if (dir == TransformDir::S)
        throw std::invalid_argument("transform: use apply_S for the inverse direction");
    if (!f.has_linear_growth())
        throw std::invalid_argument(f.name + ": T requires linear growth");
    TransformedIntegrand t;
    t.f = &f;
    return t;
}

double apply_S(const std::function<double(const Pt&, const Pt&, const Pt&)>& g,
               const Pt& x, const Pt& xi, const Pt& z) {
    double s = 1.0 + norm(z);
    return s * g(x, xi, (1.0 / s) * z);
}

// --- Registry ----------------------------------------------------------

namespace {

Integrand base_scalar(const std::string& name, int value_dim) {
    Integrand f;
    f.name = name;
    f.value_dim = value_dim;
    if (name == "one") {
        f.eval = [](const Pt&, const Pt&, const Pt&) { return 1.0; };
        f.recession_fn = [](const Pt&, const Pt&, const Pt&) { return 0.0; };
        f.growth_constant = 1.0;
        f.flags = {true, true, true, false, false};
    } else if (name == "abs") {
        f.eval = [](const Pt&, const Pt&, const Pt& z) { return norm(z); };
        f.recession_fn = [](const Pt&, const Pt&, const Pt& z) { return norm(z); };
        f.growth_constant = 1.0;
        f.flags = {true, true, true, true, false};
    } else if (name == "sqrt1pz2") {
        f.eval = [](const Pt&, const Pt&, const Pt& z) {
            return std::sqrt(1.0 + dot(z, z));
        };
        f.recession_fn = [](const Pt&, const Pt&, const Pt& z) { return norm(z); };
        f.growth_constant = std::sqrt(2.0);
        f.flags = {true, true, true, false, false};
    } else if (name == "pospart") {
        // smoothed positive part of z.e1; odd at infinity
        f.eval = [](const Pt&, const Pt&, const Pt& z) {
            return 0.5 * (std::sqrt(1.0 + z[0] * z[0]) + z[0]);
        };
        f.recession_fn = [](const Pt&, const Pt&, const Pt& z) {
            return 0.5 * (std::fabs(z[0]) + z[0]);
        };
        f.growth_constant = 1.0;
        f.flags = {true, true, true, false, false};
    } else if (name.rfind("hinge", 0) == 0) {
        // smoothed nonnegative hinge at c.e1, recession |z|
        double c = std::stod(name.substr(5));
        f.eval = [c](const Pt&, const Pt&, const Pt& z) {
            double d2 = 0.0;
            for (int i = 0; i < z.dim; ++i) {
                double zi = z[i] - (i == 0 ? c : 0.0);
                d2 += zi * zi;
            }
            return std::sqrt(1.0 + d2) - 1.0;
        };
        f.recession_fn = [](const Pt&, const Pt&, const Pt& z) { return norm(z); };
        f.growth_constant = 1.0 + std::fabs(c);
        f.flags = {true, true, true, false, false};
    } else {
        throw std::invalid_argument("unknown integrand: " + name);
    }
    return f;
}

std::function<double(const Pt&)> phi_factor(const std::string& s) {
    if (s == "one") return [](const Pt&) { return 1.0; };
    if (s == "poly")
        return [](const Pt& x) {
            double v = 1.0;
            for (int i = 0; i < x.dim; ++i) v *= 1.0 + 0.5 * x[i];
            return v;
        };
    if (s == "bump")
        return [](const Pt& x) {
            double v = 1.0;
            for (int i = 0; i < x.dim; ++i) v *= std::exp(-8.0 * (x[i] - 0.5) * (x[i] - 0.5));
            return v;
        };
    throw std::invalid_argument("unknown phi factor: " + s);
}

std::function<double(const Pt&)> g_factor(const std::string& s) {
    if (s == "one") return [](const Pt&) { return 1.0; };
    if (s == "cos1") return [](const Pt& xi) { return 1.0 + std::cos(2.0 * M_PI * xi[0]); };
    if (s == "sin1") return [](const Pt& xi) { return 1.0 + std::sin(2.0 * M_PI * xi[0]); };
    if (s == "cos2") return [](const Pt& xi) { return 1.0 + std::cos(4.0 * M_PI * xi[0]); };
    throw std::invalid_argument("unknown g factor: " + s);
}

}  // namespace

Integrand make_integrand(const std::string& name, int value_dim) {
    if (name.rfind("aniso_quad", 0) == 0) {
        double amp = 1.0;
        auto pos = name.find(':');
        if (pos != std::string::npos) amp = std::stod(name.substr(pos + 1));
        Integrand f;
        f.name = name;
        f.value_dim = value_dim;
        f.eval = [amp](const Pt&, const Pt& xi, const Pt& z) {
            return (2.0 + amp * std::sin(2.0 * M_PI * xi[0])) * dot(z, z);
        };
        f.growth_constant = -1.0;  // quadratic growth: not in E^2
        f.flags.convex_in_z = true;
        return f;
    }
    if (name.rfind("tensor:", 0) == 0) {
        std::string rest = name.substr(7);
        auto p1 = rest.find(':');
        auto p2 = rest.find(':', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos)
            throw std::invalid_argument("tensor integrand needs tensor:<phi>:<g>:<h>");
        std::string phis = rest.substr(0, p1), gs = rest.substr(p1 + 1, p2 - p1 - 1),
                    hs = rest.substr(p2 + 1);
        Integrand hpart = base_scalar(hs, value_dim);
        Integrand f;
        f.name = name;
        f.value_dim = value_dim;
        f.phi = phi_factor(phis);
        f.g = g_factor(gs);
        auto heval = hpart.eval;
        auto hrec = hpart.recession_fn;
        f.h = [heval](const Pt& z) { return heval(Pt(), Pt(), z); };
        f.h_inf = [hrec](const Pt& z) { return hrec(Pt(), Pt(), z); };
        auto phi = f.phi;
        auto g = f.g;
        f.eval = [phi, g, heval](const Pt& x, const Pt& xi, const Pt& z) {
            return phi(x) * g(xi) * heval(Pt(), Pt(), z);
        };
        f.recession_fn = [phi, g, hrec](const Pt& x, const Pt& xi, const Pt& z) {
            return phi(x) * g(xi) * hrec(Pt(), Pt(), z);
        };
        f.growth_constant = 6.0 * hpart.growth_constant;  // sup|phi| sup|g| bound
        f.flags = hpart.flags;
        f.flags.tensor = true;
        f.flags.convex_in_z = false;  // products with phi,g need not stay convex
        return f;
    }
    return base_scalar(name, value_dim);
}

std::vector<std::string> registry_names() {
    return {"one",          "abs",
            "sqrt1pz2",     "pospart",
            "hinge1",       "hinge-1",
            "aniso_quad:1", "tensor:one:one:abs",
            "tensor:bump:cos1:sqrt1pz2", "tensor:poly:sin1:abs",
            "tensor:bump:one:one",       "tensor:one:cos2:hinge1",
            "tensor:poly:cos1:pospart"};
}

namespace {

// quadratic B-spline bump, support (-1.5, 1.5), C^1
double bspline2(double t) {
    t = std::fabs(t);
    if (t >= 1.5) return 0.0;
    if (t <= 0.5) return 0.75 - t * t;
    return 0.5 * (1.5 - t) * (1.5 - t);
}

}  // namespace

std::vector<SeparatingPair> separating_pairs(const GridDomain& omega, int count) {
    int per = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(count)))));
    std::vector<std::function<double(const Pt&)>> phis;
    std::vector<double> phi_sups;
    phis.push_back([](const Pt&) { return 1.0; });
    phi_sups.push_back(1.0);
    for (int m = 1; m < per; ++m) {
        double c = (m - 0.5) / (per - 1);  // bump centers across [0,1] reference
        double w = 1.2 / per;
        double L0 = omega.lo[0], L1 = omega.hi[0];
        phis.push_back([c, w, L0, L1](const Pt& x) {
            double t = (x[0] - L0) / (L1 - L0);
            return bspline2((t - c) / w);
        });
        phi_sups.push_back(0.75);
    }
    std::vector<std::function<double(const Pt&)>> gs;
    std::vector<double> g_sups;
    gs.push_back([](const Pt&) { return 1.0; });
    g_sups.push_back(1.0);
    for (int m = 1; m < per; ++m) {
        int k = (m + 1) / 2;
        bool use_cos = (m % 2 == 1);
        int ax = (omega.dim > 1 && m % 3 == 0) ? 1 : 0;
        gs.push_back([k, use_cos, ax](const Pt& xi) {
            double a = 2.0 * M_PI * k * xi[ax];
            return 1.0 + (use_cos ? std::cos(a) : std::sin(a));
        });
        g_sups.push_back(2.0);
    }
    std::vector<SeparatingPair> out;
    for (size_t i = 0; i < phis.size(); ++i)
        for (size_t j = 0; j < gs.size(); ++j)
            out.push_back({phis[i], gs[j], phi_sups[i], g_sups[j]});
    return out;
}

std::vector<Integrand> separating_family(const GridDomain& omega, int value_dim, int count) {
    int per = std::max(1, static_cast<int>(std::lround(std::cbrt(static_cast<double>(count)))));
    auto pairs = separating_pairs(omega, per * per);

    std::vector<std::string> h_names = {"one", "abs", "pospart", "hinge1", "hinge2"};
    std::vector<Integrand> hs;
    for (int m = 0; m < per; ++m)
        hs.push_back(base_scalar(h_names[static_cast<size_t>(m) % h_names.size()], value_dim));

    std::vector<Integrand> out;
    int idx = 0;
    for (const auto& pg : pairs) {
        for (const auto& h : hs) {
            Integrand f;
            f.name = "sep" + std::to_string(idx++);
            f.value_dim = value_dim;
            f.phi = pg.phi;
            f.g = pg.g;
            auto heval = h.eval;
            auto hrec = h.recession_fn;
            f.h = [heval](const Pt& z) { return heval(Pt(), Pt(), z); };
            f.h_inf = [hrec](const Pt& z) { return hrec(Pt(), Pt(), z); };
            auto phi = pg.phi;
            auto g = pg.g;
            f.eval = [phi, g, heval](const Pt& x, const Pt& xi, const Pt& z) {
                return phi(x) * g(xi) * heval(Pt(), Pt(), z);
            };
            f.recession_fn = [phi, g, hrec](const Pt& x, const Pt& xi, const Pt& z) {
                return phi(x) * g(xi) * hrec(Pt(), Pt(), z);
            };
            f.growth_constant = 4.0 * h.growth_constant;
            f.flags = h.flags;
            f.flags.tensor = true;
            out.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace ym
