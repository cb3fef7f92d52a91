#include "ym/estimation.hpp"

#include "ym/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

namespace ym {

int thread_cap() {
    const char* env = std::getenv("YM_THREADS");
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (!env) return hw;
    int v = std::atoi(env);
    return v > 0 ? std::min(v, hw) : 1;
}

void SequenceSpec::validate() const {
    if (epsilons.empty()) throw std::invalid_argument("SequenceSpec: empty schedule");
    for (size_t i = 0; i + 1 < epsilons.size(); ++i)
        if (!(epsilons[i] > epsilons[i + 1]))
            throw std::invalid_argument("SequenceSpec: schedule must strictly decrease");
    if (epsilons.back() <= 0.0) throw std::invalid_argument("SequenceSpec: eps must be > 0");
    if (piecewise() && domain.dim != 1)
        throw std::invalid_argument("SequenceSpec: piecewise kinds are 1-d");
    if (kind == SeqKind::custom && !sampler)
        throw std::invalid_argument("SequenceSpec: custom kind needs a sampler");
    if (kind == SeqKind::piecelist && !piece_provider)
        throw std::invalid_argument("SequenceSpec: piecelist kind needs a provider");
    // uniform total-variation bound along the schedule
    double sup_tv = 0;
    for (double e : epsilons) sup_tv = std::max(sup_tv, analytic_tv(*this, e));
    if (!std::isfinite(sup_tv))
        throw std::invalid_argument("SequenceSpec: unbounded total variation");
}

std::vector<Piece> analytic_pieces(const SequenceSpec& spec, double eps) {
    double L0 = spec.domain.lo[0], L1 = spec.domain.hi[0];
    std::vector<Piece> out;
    auto push_gap = [&](double from, double to) {
        if (to > from) out.push_back({from, to, 0.0});
    };
    switch (spec.kind) {
        case SeqKind::spike: {
            double w = std::pow(eps, spec.alpha);
            double h = std::pow(eps, -spec.alpha);
            double s0 = std::max(L0, 0.0), s1 = std::min(L1, w);
            push_gap(L0, s0);
            if (s1 > s0) out.push_back({s0, s1, h});
            push_gap(std::max(s1, L0), L1);
            break;
        }
        case SeqKind::fakir: {
            double k = std::round(1.0 / eps);
            double cursor = L0;
            int imax = static_cast<int>(k) / 2;
            for (int i = 0; i <= imax; ++i) {
                double lo = i / k, hi = i / k + 1.0 / (k * k);
                if (lo >= L1) break;
                hi = std::min(hi, L1);
                push_gap(cursor, lo);
                out.push_back({lo, hi, (i % 2 == 0 ? 1.0 : -1.0) * k});
                cursor = hi;
            }
            push_gap(cursor, L1);
            break;
        }
        case SeqKind::translated_spike: {
            double lo = spec.a + spec.b * eps, hi = lo + eps * eps;
            lo = std::max(lo, L0);
            hi = std::min(hi, L1);
            push_gap(L0, lo);
            if (hi > lo) out.push_back({lo, hi, 1.0 / (eps * eps)});
            push_gap(std::max(hi, L0), L1);
            break;
        }
        case SeqKind::piecelist:
            return spec.piece_provider(eps);
        default:
            throw std::invalid_argument("analytic_pieces: not a piecewise kind");
    }
    return out;
}

double analytic_tv(const SequenceSpec& spec, double eps) {
    if (spec.piecewise()) {
        double tv = 0;
        for (const auto& p : analytic_pieces(spec, eps)) tv += std::fabs(p.value) * (p.hi - p.lo);
        return tv;
    }
    // smooth kinds: bounded amplitude times the domain volume
    if (spec.kind == SeqKind::sine) return spec.domain.volume();
    double amp = 0;
    GridDomain probe = spec.domain;
    for (int i = 0; i < probe.dim; ++i) probe.res[static_cast<size_t>(i)] = 16;
    int64_t n = probe.cell_count();
    for (int64_t c = 0; c < n; ++c) amp = std::max(amp, norm(spec.sampler(probe.cell_center(c), eps)));
    return amp * spec.domain.volume();
}

namespace {

Pt smooth_value(const SequenceSpec& spec, const Pt& x, double eps) {
    if (spec.kind == SeqKind::sine) {
        double s = std::pow(eps, spec.alpha);
        Pt u;
        u.dim = 1;
        u[0] = std::sin(2.0 * M_PI * x[0] / s);
        return u;
    }
    return spec.sampler(x, eps);
}

// Exact push-forward of a constant piece [lo,hi] under x -> frac(x/eps),
// split across Z cells: sink(x_centroid, xi_centroid, length).
template <typename Sink>
void sweep_microcells(double lo, double hi, double eps, int zres, Sink&& sink) {
    auto emit_subperiod = [&](double xa, double xb) {
        // one period: frac is affine, image [frac(xa/eps), ...) without wrap
        double fa = frac01(xa / eps);
        double len = xb - xa;
        if (len <= 0) return;
        double fb = fa + len / eps;  // <= 1 + 1e-12 within one period
        int c0 = std::min(static_cast<int>(fa * zres), zres - 1);
        int c1 = std::min(static_cast<int>(fb * zres) + 1, zres);
        for (int c = c0; c < c1; ++c) {
            double g0 = std::max(fa, static_cast<double>(c) / zres);
            double g1 = std::min(fb, static_cast<double>(c + 1) / zres);
            if (g1 <= g0) continue;
            double mid = 0.5 * (g0 + g1);
            double xmid = xa + (mid - fa) * eps;
            sink(xmid, frac01(mid), (g1 - g0) * eps);
        }
    };
    double k0 = std::ceil(lo / eps - 1e-12);
    double first_full = k0 * eps;
    if (first_full >= hi) {  // piece inside one period
        emit_subperiod(lo, hi);
        return;
    }
    if (first_full > lo) emit_subperiod(lo, first_full);
    double n_full = std::floor((hi - first_full) / eps + 1e-12);
    if (n_full >= 1.0) {
        // run of n_full bijective periods: per Z cell, exact mass and centroid
        double run_len = n_full * eps;
        for (int c = 0; c < zres; ++c) {
            double c0 = static_cast<double>(c) / zres, c1 = static_cast<double>(c + 1) / zres;
            double mid = 0.5 * (c0 + c1);
            // mean over periods k = k0 .. k0+n-1 of eps*(k + mid)
            double xmid = first_full + eps * ((n_full - 1.0) / 2.0 + mid);
            sink(xmid, mid, (c1 - c0) * run_len);
        }
    }
    double tail = first_full + n_full * eps;
    if (tail < hi) emit_subperiod(tail, hi);
}

}  // namespace

VectorMeasure generate(const SequenceSpec& spec, double eps) {
    VectorMeasure m = VectorMeasure::zero(spec.domain, spec.value_dim);
    if (spec.piecewise()) {
        double h = spec.domain.width(0);
        double min_width = 1e300;
        for (const auto& p : analytic_pieces(spec, eps))
            if (p.value != 0.0) min_width = std::min(min_width, p.hi - p.lo);
        if (min_width < h)
            throw std::runtime_error("generate: resolution insufficient (spike width " +
                                     std::to_string(min_width) + " below cell width " +
                                     std::to_string(h) + ")");
        for (const auto& p : analytic_pieces(spec, eps)) {
            if (p.value == 0.0) continue;
            int ca = spec.domain.axis_index(0, p.lo), cb = spec.domain.axis_index(0, p.hi);
            for (int c = ca; c <= cb; ++c) {
                double clo = spec.domain.lo[0] + c * h, chi = clo + h;
                double ov = std::max(0.0, std::min(p.hi, chi) - std::max(p.lo, clo));
                if (ov > 0) m.ac_density[static_cast<size_t>(c)] += p.value * ov / h;
            }
        }
        return m;
    }
    int64_t n = spec.domain.cell_count();
    for (int64_t c = 0; c < n; ++c)
        m.set_ac(c, smooth_value(spec, spec.domain.cell_center(c), eps));
    return m;
}

double evaluate_I_eps(const Integrand& f, const VectorMeasure& m, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("evaluate_I_eps: eps must be > 0");
    double vol = m.domain.cell_volume();
    int64_t n = m.domain.cell_count();
    double s = 0;
    for (int64_t c = 0; c < n; ++c) {
        Pt x = m.domain.cell_center(c);
        Pt xi;
        xi.dim = m.domain.dim;
        for (int i = 0; i < m.domain.dim; ++i) xi[i] = frac01(x[i] / eps);
        s += vol * f.eval(x, xi, m.ac_at(c));
    }
    for (const auto& a : m.singular) {
        Pt xi;
        xi.dim = m.domain.dim;
        for (int i = 0; i < m.domain.dim; ++i) xi[i] = frac01(a.location[i] / eps);
        s += a.mass * recession_value(f, a.location, xi, a.direction);
    }
    return s;
}

double evaluate_I_eps_analytic(const Integrand& f, const SequenceSpec& spec, double eps,
                               int fine_res) {
    double s = 0;
    if (spec.piecewise()) {
        // sub-cell exact: micro-split each constant piece
        int zres = std::max(64, fine_res / 16);
        for (const auto& p : analytic_pieces(spec, eps)) {
            Pt u(p.value);
            sweep_microcells(p.lo, p.hi, eps, zres,
                             [&](double x, double xi, double len) {
                                 s += len * f.eval(Pt(x), Pt(xi), u);
                             });
        }
        return s;
    }
    GridDomain fine = spec.domain;
    for (int i = 0; i < fine.dim; ++i) fine.res[static_cast<size_t>(i)] = fine_res;
    double vol = fine.cell_volume();
    int64_t n = fine.cell_count();
    for (int64_t c = 0; c < n; ++c) {
        Pt x = fine.cell_center(c);
        Pt xi;
        xi.dim = fine.dim;
        for (int i = 0; i < fine.dim; ++i) xi[i] = frac01(x[i] / eps);
        s += vol * f.eval(x, xi, smooth_value(spec, x, eps));
    }
    return s;
}

namespace {

struct BinAcc {
    double w = 0;         // Lebesgue mass (interior) or lambda mass (boundary)
    Pt sx, sxi, sz;       // mass-weighted sums
    void add(const Pt& x, const Pt& xi, const Pt& z, double m) {
        if (w == 0) {
            sx.dim = x.dim;
            sxi.dim = xi.dim;
            sz.dim = z.dim;
        }
        w += m;
        sx = sx + m * x;
        sxi = sxi + m * xi;
        sz = sz + m * z;
    }
};

}  // namespace

CompactifiedMeasure empirical_compactified(const SequenceSpec& spec, double eps,
                                           const EstimateOptions& opt) {
    const int d = spec.domain.dim;
    CompactifiedMeasure mu;
    mu.omega = spec.domain;
    for (int i = 0; i < d; ++i) mu.omega.res[static_cast<size_t>(i)] = opt.win;
    mu.torus = GridDomain::unit_torus(d, opt.zres);
    mu.ball = BallGrid::make(std::min(spec.value_dim, 2), opt.ball_rings, opt.ball_dirs);
    mu.value_dim = spec.value_dim;

    const double snap = mu.ball.snap_radius();
    const int64_t nz = mu.torus.cell_count();
    const int nball = mu.ball.interior_cells() + mu.ball.boundary_cells();
    std::unordered_map<int64_t, BinAcc> interior, boundary;

    auto deposit = [&](const Pt& x, const Pt& xi, const Pt& u, double leb) {
        double un = norm(u);
        double rhat = un / (1.0 + un);
        int64_t cell = mu.omega.cell_index(x) * nz + mu.torus.cell_index(xi);
        if (rhat >= snap) {
            Pt dir = (1.0 / un) * u;
            int64_t key = cell * nball + mu.ball.interior_cells() + mu.ball.dir_index(dir);
            boundary[key].add(x, xi, dir, (1.0 + un) * leb);
        } else {
            Pt zhat = (1.0 / (1.0 + un)) * u;
            int64_t key = cell * nball + mu.ball.interior_index(zhat);
            interior[key].add(x, xi, u, leb);
        }
    };

    if (spec.piecewise()) {
        // split pieces at output-window boundaries, then push each segment
        // through x -> frac(x/eps) exactly
        double wwidth = mu.omega.width(0);
        for (const auto& p : analytic_pieces(spec, eps)) {
            Pt u(p.value);
            int wa = mu.omega.axis_index(0, p.lo), wb = mu.omega.axis_index(0, p.hi);
            for (int wcell = wa; wcell <= wb; ++wcell) {
                double wlo = mu.omega.lo[0] + wcell * wwidth;
                double a = std::max(p.lo, wlo), b = std::min(p.hi, wlo + wwidth);
                if (b <= a) continue;
                sweep_microcells(a, b, eps, opt.zres, [&](double x, double xi, double len) {
                    deposit(Pt(x), Pt(xi), u, len);
                });
            }
        }
    } else {
        GridDomain fine = spec.domain;
        for (int i = 0; i < d; ++i) fine.res[static_cast<size_t>(i)] = opt.fine_res;
        double vol = fine.cell_volume();
        int64_t n = fine.cell_count();
        // block-partitioned accumulation merged in block order: bit-exact
        // for any YM_THREADS
        const int nblocks = 64;
        std::vector<std::unordered_map<int64_t, BinAcc>> bint(nblocks), bbd(nblocks);
        parallel_blocks(n, nblocks, [&](int blk, int64_t lo, int64_t hi) {
            auto& bi = bint[static_cast<size_t>(blk)];
            auto& bb = bbd[static_cast<size_t>(blk)];
            for (int64_t c = lo; c < hi; ++c) {
                Pt x = fine.cell_center(c);
                Pt xi;
                xi.dim = d;
                for (int i = 0; i < d; ++i) xi[i] = frac01(x[i] / eps);
                Pt u = smooth_value(spec, x, eps);
                double un = norm(u);
                double rhat = un / (1.0 + un);
                int64_t cell = mu.omega.cell_index(x) * nz + mu.torus.cell_index(xi);
                if (rhat >= snap) {
                    Pt dir = (1.0 / un) * u;
                    int64_t key =
                        cell * nball + mu.ball.interior_cells() + mu.ball.dir_index(dir);
                    bb[key].add(x, xi, dir, (1.0 + un) * vol);
                } else {
                    int64_t key = cell * nball + mu.ball.interior_index((1.0 / (1.0 + un)) * u);
                    bi[key].add(x, xi, u, vol);
                }
            }
        });
        auto merge = [](std::vector<std::unordered_map<int64_t, BinAcc>>& blocks,
                        std::unordered_map<int64_t, BinAcc>& into) {
            for (auto& blk : blocks) {
                std::vector<int64_t> keys;
                keys.reserve(blk.size());
                for (const auto& [k, acc] : blk) {
                    (void)acc;
                    keys.push_back(k);
                }
                std::sort(keys.begin(), keys.end());
                for (int64_t k : keys) {
                    const BinAcc& a = blk[k];
                    BinAcc& g = into[k];
                    if (g.w == 0) {
                        g = a;
                    } else {
                        g.w += a.w;
                        g.sx = g.sx + a.sx;
                        g.sxi = g.sxi + a.sxi;
                        g.sz = g.sz + a.sz;
                    }
                }
                blk.clear();
            }
        };
        merge(bint, interior);
        merge(bbd, boundary);
    }

    // deterministic entry order: sorted bin keys
    auto flush = [&](std::unordered_map<int64_t, BinAcc>& bins, int layer, bool renorm_dir) {
        std::vector<int64_t> keys;
        keys.reserve(bins.size());
        for (const auto& [k, acc] : bins) {
            (void)acc;
            keys.push_back(k);
        }
        std::sort(keys.begin(), keys.end());
        for (int64_t k : keys) {
            const BinAcc& acc = bins[k];
            if (acc.w <= 0) continue;
            Pt z = (1.0 / acc.w) * acc.sz;
            if (renorm_dir) {
                double n0 = norm(z);
                if (n0 > 0) z = (1.0 / n0) * z;
            }
            mu.entries.push_back(
                {(1.0 / acc.w) * acc.sx, (1.0 / acc.w) * acc.sxi, z, acc.w, layer});
        }
    };
    flush(interior, 0, false);
    flush(boundary, 1, true);
    return mu;
}

void promote_lambda_atoms(CompactifiedMeasure& mu, int window, double factor) {
    int64_t nx = mu.omega.cell_count();
    std::vector<double> bmass(static_cast<size_t>(nx), 0.0);
    for (const auto& e : mu.entries)
        if (e.layer == 1) bmass[static_cast<size_t>(mu.omega.cell_index(e.x))] += e.w;

    // window sums over a (2r+1)^d neighborhood, clipped at the boundary
    int r = window / 2;
    std::vector<double> wsum(static_cast<size_t>(nx), 0.0);
    for (int64_t c = 0; c < nx; ++c) {
        auto m = mu.omega.cell_multi(c);
        std::array<int, kMaxDim> it{0, 0, 0};
        std::array<int, kMaxDim> a{0, 0, 0}, b{0, 0, 0};
        for (int i = 0; i < mu.omega.dim; ++i) {
            a[static_cast<size_t>(i)] = std::max(0, m[static_cast<size_t>(i)] - r);
            b[static_cast<size_t>(i)] = std::min(mu.omega.res[static_cast<size_t>(i)] - 1, m[static_cast<size_t>(i)] + r);
        }
        it = a;
        double s = 0;
        while (true) {
            s += bmass[static_cast<size_t>(mu.omega.flatten(it))];
            int ax = mu.omega.dim - 1;
            while (ax >= 0) {
                if (++it[static_cast<size_t>(ax)] <= b[static_cast<size_t>(ax)]) break;
                it[static_cast<size_t>(ax)] = a[static_cast<size_t>(ax)];
                --ax;
            }
            if (ax < 0) break;
        }
        wsum[static_cast<size_t>(c)] = s;
    }
    std::vector<double> sorted = wsum;
    std::sort(sorted.begin(), sorted.end());
    double median = 0.5 * (sorted[static_cast<size_t>(nx - 1) / 2] + sorted[static_cast<size_t>(nx) / 2]);

    std::vector<char> qualifies(static_cast<size_t>(nx), 0);
    for (int64_t c = 0; c < nx; ++c)
        if (wsum[static_cast<size_t>(c)] > factor * median && bmass[static_cast<size_t>(c)] > 0.0) qualifies[static_cast<size_t>(c)] = 1;
    bool any = false;
    for (char q : qualifies) any = any || q;
    if (!any) return;

    // connected clusters of qualifying cells (axis neighbors)
    std::vector<int> cluster(static_cast<size_t>(nx), -1);
    int nclusters = 0;
    std::vector<int64_t> stack;
    for (int64_t c = 0; c < nx; ++c) {
        if (!qualifies[static_cast<size_t>(c)] || cluster[static_cast<size_t>(c)] >= 0) continue;
        int id = nclusters++;
        stack.push_back(c);
        cluster[static_cast<size_t>(c)] = id;
        while (!stack.empty()) {
            int64_t cur = stack.back();
            stack.pop_back();
            auto m = mu.omega.cell_multi(cur);
            for (int i = 0; i < mu.omega.dim; ++i)
                for (int s : {-1, 1}) {
                    auto mm = m;
                    mm[static_cast<size_t>(i)] += s;
                    if (mm[static_cast<size_t>(i)] < 0 || mm[static_cast<size_t>(i)] >= mu.omega.res[static_cast<size_t>(i)]) continue;
                    int64_t nb = mu.omega.flatten(mm);
                    if (qualifies[static_cast<size_t>(nb)] && cluster[static_cast<size_t>(nb)] < 0) {
                        cluster[static_cast<size_t>(nb)] = id;
                        stack.push_back(nb);
                    }
                }
        }
    }

    // centroid per cluster, then relabel member entries as layer-2 atoms
    std::vector<double> cm(static_cast<size_t>(nclusters), 0.0);
    std::vector<Pt> cs(static_cast<size_t>(nclusters));
    for (const auto& e : mu.entries) {
        if (e.layer != 1) continue;
        int id = cluster[static_cast<size_t>(mu.omega.cell_index(e.x))];
        if (id < 0) continue;
        if (cm[static_cast<size_t>(id)] == 0.0) cs[static_cast<size_t>(id)].dim = e.x.dim;
        cm[static_cast<size_t>(id)] += e.w;
        cs[static_cast<size_t>(id)] = cs[static_cast<size_t>(id)] + e.w * e.x;
    }
    for (auto& e : mu.entries) {
        if (e.layer != 1) continue;
        int id = cluster[static_cast<size_t>(mu.omega.cell_index(e.x))];
        if (id < 0) continue;
        e.layer = 2;
        e.x = (1.0 / cm[static_cast<size_t>(id)]) * cs[static_cast<size_t>(id)];
    }
}

EstimateResult estimate_young_measure(const SequenceSpec& spec, const EstimateOptions& opt) {
    spec.validate();
    EstimateResult out;

    std::vector<CompactifiedMeasure> trail;
    auto probes = std::vector<std::string>{"one", "abs", "tensor:bump:cos1:sqrt1pz2",
                                           "tensor:poly:sin1:abs"};
    auto pairs = separating_pairs(
        [&] {
            GridDomain g = spec.domain;
            for (int i = 0; i < g.dim; ++i) g.res[static_cast<size_t>(i)] = opt.win;
            return g;
        }(),
        25);

    for (double eps : spec.epsilons) {
        CompactifiedMeasure mu = empirical_compactified(spec, eps, opt);
        ConvergenceRow row;
        row.eps = eps;
        row.rep_deviation = verify_representation_identity(mu, pairs);
        for (const auto& name : probes) {
            Integrand f = make_integrand(name, spec.value_dim);
            double lhs = pair_compactified(f, mu);
            double rhs = evaluate_I_eps_analytic(f, spec, eps, opt.fine_res);
            row.pairing_err = std::max(row.pairing_err, std::fabs(lhs - rhs));
        }
        out.log.push_back(row);
        out.frac_a_eps.push_back(frac01(spec.a / eps));
        trail.push_back(std::move(mu));
        if (static_cast<int>(trail.size()) > opt.avg_count) trail.erase(trail.begin());
    }

    // trailing average, geometric weights favoring the finest eps
    CompactifiedMeasure avg = trail.back();
    avg.entries.clear();
    double wsum = 0;
    for (size_t i = 0; i < trail.size(); ++i) wsum += std::pow(2.0, static_cast<double>(i));
    for (size_t i = 0; i < trail.size(); ++i) {
        double w = std::pow(2.0, static_cast<double>(i)) / wsum;
        for (auto e : trail[i].entries) {
            e.w *= w;
            avg.entries.push_back(e);
        }
    }

    // threshold boundary dust
    double total = avg.total_mass();
    std::vector<CompactifiedMeasure::Entry> kept;
    kept.reserve(avg.entries.size());
    for (const auto& e : avg.entries)
        if (e.layer == 0 || e.w >= opt.boundary_threshold * total) kept.push_back(e);
    avg.entries = std::move(kept);

    promote_lambda_atoms(avg, opt.atom_window, opt.atom_factor);

    try {
        out.ym = decompose_compactified(avg);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("estimate_young_measure: nonconvergence "
                                             "(subsequence issue): ") +
                                 e.what());
    }
    // leakage: nu mass parked in the outermost interior ring
    double leak = 0, tot = 0;
    for (const auto& [k, d] : out.ym.nu) {
        (void)k;
        for (const auto& a : d.atoms) {
            tot += a.w;
            double zn = norm(a.point);
            if (zn / (1.0 + zn) >= static_cast<double>(out.ym.ball.rings - 1) / out.ym.ball.rings)
                leak += a.w;
        }
    }
    out.nu_leakage = tot > 0 ? leak / tot : 0.0;
    int64_t nbase = out.ym.omega.cell_count() * out.ym.torus.cell_count();
    out.coverage_gap =
        1.0 - static_cast<double>(out.ym.nu.size()) / static_cast<double>(nbase);
    out.empirical = std::move(avg);
    return out;
}

TwoScaleLimit two_scale_limit(const SequenceSpec& spec, const EstimateOptions& opt) {
    EstimateResult est = estimate_young_measure(spec, opt);
    TwoScaleLimit lim;
    lim.kappa = ScalarMeasure::zero(est.ym.omega);
    for (auto& dens : lim.kappa.density) dens = 1.0;
    for (const auto& a : est.ym.conc.lambda.atoms) lim.kappa.atoms.push_back(a);
    lim.theta = second_scale_barycenter_id(est.ym);
    return lim;
}

}  // namespace ym
