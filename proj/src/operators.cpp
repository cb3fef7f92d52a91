#include "ym/operators.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "json.hpp"

namespace ym {

void DifferentialOperator::validate() const {
    if (order < 1) throw std::invalid_argument("operator: order must be >= 1");
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("operator: bad dimension");
    if (!is_zero && coeffs.empty())
        throw std::invalid_argument("operator: needs coefficients unless declared zero");
    for (const auto& c : coeffs) {
        int total = 0;
        for (int i = 0; i < d; ++i) total += c.alpha[static_cast<size_t>(i)];
        if (total != order)
            throw std::invalid_argument("operator: multi-index order mismatch (|alpha| != k)");
        if (c.matrix.rows != dim_f || c.matrix.cols != dim_e)
            throw std::invalid_argument("operator: coefficient matrix shape mismatch");
    }
}

DifferentialOperator parse_operator(const std::string& literal) {
    DifferentialOperator op;
    op.name = literal;
    if (literal == "zero") {
        op.is_zero = true;
        return op;
    }
    if (literal == "ddx") {
        op.order = 1;
        op.d = 1;
        op.dim_e = 1;
        op.dim_f = 1;
        DifferentialOperator::Coeff c;
        c.alpha = {1, 0, 0};
        c.matrix = SmallMatrix(1, 1);
        c.matrix.at(0, 0) = 1.0;
        op.coeffs.push_back(c);
        return op;
    }
    if (literal == "grad_scalar:d=2") {
        op.order = 1;
        op.d = 2;
        op.dim_e = 1;
        op.dim_f = 2;
        for (int i = 0; i < 2; ++i) {
            DifferentialOperator::Coeff c;
            c.alpha = {i == 0 ? 1 : 0, i == 1 ? 1 : 0, 0};
            c.matrix = SmallMatrix(2, 1);
            c.matrix.at(i, 0) = 1.0;
            op.coeffs.push_back(c);
        }
        return op;
    }
    if (literal == "div:d=2") {
        op.order = 1;
        op.d = 2;
        op.dim_e = 2;
        op.dim_f = 1;
        for (int i = 0; i < 2; ++i) {
            DifferentialOperator::Coeff c;
            c.alpha = {i == 0 ? 1 : 0, i == 1 ? 1 : 0, 0};
            c.matrix = SmallMatrix(1, 2);
            c.matrix.at(0, i) = 1.0;
            op.coeffs.push_back(c);
        }
        return op;
    }
    if (literal == "curl:d=2") {
        op.order = 1;
        op.d = 2;
        op.dim_e = 2;
        op.dim_f = 1;
        DifferentialOperator::Coeff c1;  // d1 v2
        c1.alpha = {1, 0, 0};
        c1.matrix = SmallMatrix(1, 2);
        c1.matrix.at(0, 1) = 1.0;
        DifferentialOperator::Coeff c2;  // -d2 v1
        c2.alpha = {0, 1, 0};
        c2.matrix = SmallMatrix(1, 2);
        c2.matrix.at(0, 0) = -1.0;
        op.coeffs.push_back(c1);
        op.coeffs.push_back(c2);
        return op;
    }
    if (literal.rfind("custom:", 0) == 0) {
        // custom:{"k":1,"d":2,"dim_e":2,"dim_f":1,
        //         "coeffs":[{"alpha":[1,0],"matrix":[[1,0]]}, ...]}
        auto j = nlohmann::json::parse(literal.substr(7));
        op.order = j.at("k").get<int>();
        op.d = j.at("d").get<int>();
        op.dim_e = j.at("dim_e").get<int>();
        op.dim_f = j.at("dim_f").get<int>();
        for (const auto& jc : j.at("coeffs")) {
            DifferentialOperator::Coeff c;
            auto alpha = jc.at("alpha");
            for (int i = 0; i < op.d; ++i) c.alpha[static_cast<size_t>(i)] = alpha[static_cast<size_t>(i)].get<int>();
            c.matrix = SmallMatrix(op.dim_f, op.dim_e);
            auto m = jc.at("matrix");
            for (int r = 0; r < op.dim_f; ++r)
                for (int cc = 0; cc < op.dim_e; ++cc)
                    c.matrix.at(r, cc) = m[static_cast<size_t>(r)][static_cast<size_t>(cc)].get<double>();
            op.coeffs.push_back(std::move(c));
        }
        op.validate();
        return op;
    }
    throw std::invalid_argument("unknown operator literal: " + literal);
}

SmallMatrix symbol(const DifferentialOperator& op, const Pt& eta) {
    SmallMatrix m(op.dim_f, op.dim_e);
    if (op.is_zero) return m;
    for (const auto& c : op.coeffs) {
        double mono = 1.0;
        for (int i = 0; i < op.d; ++i)
            for (int p = 0; p < c.alpha[static_cast<size_t>(i)]; ++p) mono *= eta[i];
        for (int i = 0; i < m.rows; ++i)
            for (int j = 0; j < m.cols; ++j) m.at(i, j) += mono * c.matrix.at(i, j);
    }
    return m;
}

namespace {

Eigen::MatrixXd to_eigen(const SmallMatrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) e(i, j) = m.at(i, j);
    return e;
}

double symbol_residual(const DifferentialOperator& op, const Pt& eta, const Pt& z) {
    SmallMatrix m = symbol(op, eta);
    double s = 0;
    for (int i = 0; i < m.rows; ++i) {
        double r = 0;
        for (int j = 0; j < m.cols; ++j) r += m.at(i, j) * z[j];
        s += r * r;
    }
    return s;
}

std::vector<Pt> unit_eta_grid(int d) {
    std::vector<Pt> out;
    if (d == 1) {
        out.push_back(Pt(1.0));
        out.push_back(Pt(-1.0));
    } else if (d == 2) {
        for (int i = 0; i < 720; ++i) {
            double a = 2.0 * M_PI * i / 720;
            out.push_back(Pt(std::cos(a), std::sin(a)));
        }
    } else {
        // Fibonacci sphere with the level-4 icosphere point count
        const int n = 2562;
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            double zc = 1.0 - 2.0 * (i + 0.5) / n;
            double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
            out.push_back(Pt(r * std::cos(ga * i), r * std::sin(ga * i), zc));
        }
    }
    return out;
}

// kernel basis of the symbol at eta
std::vector<Pt> kernel_basis(const DifferentialOperator& op, const Pt& eta,
                             double tol = 1e-9) {
    std::vector<Pt> out;
    if (op.is_zero) {
        for (int j = 0; j < op.dim_e; ++j) {
            Pt e;
            e.dim = op.dim_e;
            e[j] = 1.0;
            out.push_back(e);
        }
        return out;
    }
    Eigen::MatrixXd m = to_eigen(symbol(op, eta));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() > 0 ? sv(0) : 0.0;
    for (int j = 0; j < op.dim_e; ++j) {
        double s = j < sv.size() ? sv(j) : 0.0;
        if (s <= tol * std::max(smax, 1.0)) {
            Pt v;
            v.dim = op.dim_e;
            for (int i = 0; i < op.dim_e; ++i) v[i] = svd.matrixV()(i, j);
            out.push_back(v);
        }
    }
    return out;
}

}  // namespace

WaveConeResult wave_cone_test(const DifferentialOperator& op, const Pt& z, double tau_rel) {
    WaveConeResult res;
    double zn = norm(z);
    if (op.is_zero || zn == 0.0) {
        // 0 lies in every kernel closure; the zero operator has Lambda = E
        res.inside = true;
        res.eta_witness = Pt(1.0);
        return res;
    }
    Pt zu = (1.0 / zn) * z;
    double best = 1e300;
    Pt best_eta;
    for (const auto& eta : unit_eta_grid(op.d)) {
        double q = symbol_residual(op, eta, zu);
        if (q < best) {
            best = q;
            best_eta = eta;
        }
    }
    if (op.d == 2) {
        // one Newton step on the circle parameterization
        double th = std::atan2(best_eta[1], best_eta[0]);
        double h = 1e-4;
        auto q = [&](double t) {
            return symbol_residual(op, Pt(std::cos(t), std::sin(t)), zu);
        };
        double d1 = (q(th + h) - q(th - h)) / (2 * h);
        double d2 = (q(th + h) - 2 * q(th) + q(th - h)) / (h * h);
        if (d2 > 0) {
            double tn = th - d1 / d2;
            if (q(tn) < best) {
                best = q(tn);
                best_eta = Pt(std::cos(tn), std::sin(tn));
            }
        }
    }
    res.distance = std::sqrt(std::max(0.0, best));
    res.eta_witness = best_eta;
    res.inside = res.distance < tau_rel;
    return res;
}

std::vector<Pt> wave_cone_span(const DifferentialOperator& op) {
    std::vector<Pt> basis;
    auto add_vec = [&](const Pt& v) {
        Pt w = v;
        for (const auto& b : basis) w = w - dot(w, b) * b;
        double n = norm(w);
        if (n > 1e-9) basis.push_back((1.0 / n) * w);
    };
    for (const auto& eta : unit_eta_grid(op.d)) {
        for (const auto& v : kernel_basis(op, eta, 1e-9)) add_vec(v);
        if (static_cast<int>(basis.size()) == op.dim_e) break;
    }
    return basis;
}

namespace {

int int_freq(int i, int n) { return i <= n / 2 ? i : i - n; }

// Frequency label shared by a conjugate index pair. Indices u and n-u
// carry the same lattice exponential up to conjugation; labelling both by
// the lexicographically smaller member keeps the per-frequency kernel
// projection Hermitian-consistent at Nyquist coordinates.
Pt pair_freq(const std::array<int, kMaxDim>& mi, const GridDomain& g) {
    std::array<int, kMaxDim> partner{0, 0, 0};
    for (int i = 0; i < g.dim; ++i)
        partner[static_cast<size_t>(i)] =
            (g.res[static_cast<size_t>(i)] - mi[static_cast<size_t>(i)]) % g.res[static_cast<size_t>(i)];
    bool take_partner = false;
    for (int i = 0; i < g.dim; ++i) {
        if (partner[static_cast<size_t>(i)] < mi[static_cast<size_t>(i)]) {
            take_partner = true;
            break;
        }
        if (partner[static_cast<size_t>(i)] > mi[static_cast<size_t>(i)]) break;
    }
    const auto& rep = take_partner ? partner : mi;
    Pt k;
    k.dim = g.dim;
    for (int i = 0; i < g.dim; ++i)
        k[i] = int_freq(rep[static_cast<size_t>(i)], g.res[static_cast<size_t>(i)]);
    return k;
}

std::vector<std::complex<double>> fft_component(const VectorMeasure& w, int component) {
    const GridDomain& g = w.domain;
    int64_t n = g.cell_count();
    std::vector<std::complex<double>> data(static_cast<size_t>(n));
    for (int64_t c = 0; c < n; ++c)
        data[static_cast<size_t>(c)] = {
            w.ac_density[static_cast<size_t>(c) * static_cast<size_t>(w.value_dim) +
                         static_cast<size_t>(component)],
            0.0};
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan =
        g.dim == 1
            ? fftw_plan_dft_1d(g.res[0], ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE)
            : (g.dim == 2 ? fftw_plan_dft_2d(g.res[0], g.res[1], ptr, ptr, FFTW_FORWARD,
                                             FFTW_ESTIMATE)
                          : fftw_plan_dft_3d(g.res[0], g.res[1], g.res[2], ptr, ptr,
                                             FFTW_FORWARD, FFTW_ESTIMATE));
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    for (auto& v : data) v /= static_cast<double>(n);
    return data;
}

void ifft_into(std::vector<std::complex<double>>& data, const GridDomain& g) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan =
        g.dim == 1
            ? fftw_plan_dft_1d(g.res[0], ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE)
            : (g.dim == 2 ? fftw_plan_dft_2d(g.res[0], g.res[1], ptr, ptr, FFTW_BACKWARD,
                                             FFTW_ESTIMATE)
                          : fftw_plan_dft_3d(g.res[0], g.res[1], g.res[2], ptr, ptr,
                                             FFTW_BACKWARD, FFTW_ESTIMATE));
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

VectorMeasure windowed(const VectorMeasure& m) {
    // Hann window per axis before treating the box as periodic
    VectorMeasure out = m;
    int64_t n = m.domain.cell_count();
    for (int64_t c = 0; c < n; ++c) {
        auto mi = m.domain.cell_multi(c);
        double wgt = 1.0;
        for (int i = 0; i < m.domain.dim; ++i) {
            double t = (mi[static_cast<size_t>(i)] + 0.5) / m.domain.res[static_cast<size_t>(i)];
            double s = std::sin(M_PI * t);
            wgt *= s * s;
        }
        for (int j = 0; j < m.value_dim; ++j)
            out.ac_density[static_cast<size_t>(c) * static_cast<size_t>(m.value_dim) +
                           static_cast<size_t>(j)] *= wgt;
    }
    return out;
}

}  // namespace

VectorMeasure project_A_free(const VectorMeasure& w, const DifferentialOperator& op) {
    if (w.domain.kind != DomainKind::torus)
        throw std::invalid_argument("project_A_free: field must live on the torus");
    if (!op.is_zero && w.value_dim != op.dim_e)
        throw std::invalid_argument("project_A_free: value dimension mismatch");
    const GridDomain& g = w.domain;
    int64_t n = g.cell_count();
    int ne = w.value_dim;

    std::vector<std::vector<std::complex<double>>> hat;
    hat.reserve(static_cast<size_t>(ne));
    for (int j = 0; j < ne; ++j) hat.push_back(fft_component(w, j));

    for (int64_t c = 0; c < n; ++c) {
        auto mi = g.cell_multi(c);
        Pt k = pair_freq(mi, g);
        bool zero = true;
        for (int i = 0; i < g.dim; ++i) zero = zero && k[i] == 0.0;
        if (zero) {
            for (int j = 0; j < ne; ++j)
                hat[static_cast<size_t>(j)][static_cast<size_t>(c)] = 0.0;  // zero mean
            continue;
        }
        auto basis = kernel_basis(op, k);
        std::complex<double> proj[kMaxDim] = {0.0, 0.0, 0.0};
        for (const auto& b : basis) {
            std::complex<double> coef = 0.0;
            for (int j = 0; j < ne; ++j)
                coef += hat[static_cast<size_t>(j)][static_cast<size_t>(c)] * b[j];
            for (int j = 0; j < ne; ++j) proj[j] += coef * b[j];
        }
        for (int j = 0; j < ne; ++j)
            hat[static_cast<size_t>(j)][static_cast<size_t>(c)] = proj[j];
    }

    VectorMeasure out = VectorMeasure::zero(g, ne);
    for (int j = 0; j < ne; ++j) {
        ifft_into(hat[static_cast<size_t>(j)], g);
        for (int64_t c = 0; c < n; ++c)
            out.ac_density[static_cast<size_t>(c) * static_cast<size_t>(ne) +
                           static_cast<size_t>(j)] =
                hat[static_cast<size_t>(j)][static_cast<size_t>(c)].real();
    }
    return out;
}

double a_residual(const VectorMeasure& field, const DifferentialOperator& op) {
    if (op.is_zero) return 0.0;
    VectorMeasure w = field;
    if (w.domain.kind != DomainKind::torus) {
        w = windowed(field);
        GridDomain t = GridDomain::unit_torus(w.domain.dim, w.domain.res[0]);
        for (int i = 0; i < w.domain.dim; ++i)
            t.res[static_cast<size_t>(i)] = w.domain.res[static_cast<size_t>(i)];
        w.domain = t;
    }
    // atoms are binned into cells before the transform
    for (const auto& at : w.singular) {
        int64_t c = w.domain.cell_index(at.location);
        for (int j = 0; j < w.value_dim; ++j)
            w.ac_density[static_cast<size_t>(c) * static_cast<size_t>(w.value_dim) +
                         static_cast<size_t>(j)] +=
                at.mass * at.direction[j] / w.domain.cell_volume();
    }
    w.singular.clear();

    const GridDomain& g = w.domain;
    int64_t n = g.cell_count();
    std::vector<std::vector<std::complex<double>>> hat;
    for (int j = 0; j < w.value_dim; ++j) hat.push_back(fft_component(w, j));
    double s = 0;
    for (int64_t c = 0; c < n; ++c) {
        auto mi = g.cell_multi(c);
        Pt k = pair_freq(mi, g);
        double k2 = 0;
        for (int i = 0; i < g.dim; ++i) k2 += k[i] * k[i];
        SmallMatrix m = symbol(op, k);
        double weight = std::pow(1.0 + k2, -op.order);
        for (int i = 0; i < m.rows; ++i) {
            std::complex<double> r = 0.0;
            for (int j = 0; j < m.cols; ++j)
                r += m.at(i, j) * hat[static_cast<size_t>(j)][static_cast<size_t>(c)];
            s += std::norm(r) * weight;
        }
    }
    return std::sqrt(s);
}

double a_residual(const SecondScaleBarycenter& ssb, const DifferentialOperator& op) {
    double worst = 0;
    for (const auto& [cx, th] : ssb.at_cell) {
        (void)cx;
        worst = std::max(worst, a_residual(th, op));
    }
    for (const auto& th : ssb.at_atom) worst = std::max(worst, a_residual(th, op));
    return worst;
}

StructureReport structure_check(const TwoScaleYoungMeasure& ym,
                                const DifferentialOperator& op, double dir_tol) {
    if (!op.is_zero && op.dim_e != ym.value_dim)
        throw std::invalid_argument("structure_check: operator/measure dimension mismatch");
    StructureReport rep;
    auto span = wave_cone_span(op);
    auto dist_to_span = [&](const Pt& dir) {
        Pt w = dir;
        for (const auto& b : span) w = w - dot(w, b) * b;
        return norm(w);
    };
    const auto& lam = ym.conc.lambda;
    for (size_t i = 0; i < lam.atoms.size(); ++i) {
        const RhoDist& rho = ym.conc.rho_atom[i];
        auto scan = [&](const Pt& xi, const std::vector<DirAtom>& dirs) {
            StructureRow row;
            row.x = lam.atoms[i].location;
            row.xi = xi;
            Pt mean;  // polar direction of [[ym]]_x at this rho atom
            mean.dim = ym.value_dim;
            double outside = 0;
            for (const auto& da : dirs) {
                mean = mean + da.w * da.dir;
                if (dist_to_span(da.dir) > dir_tol) outside += da.w;
            }
            double mn = norm(mean);
            if (mn > 1e-12) {
                auto wc = wave_cone_test(op, (1.0 / mn) * mean, dir_tol);
                row.polar_distance = wc.inside ? 0.0 : wc.distance;
            }
            row.mass_outside_span = outside;
            rep.max_polar_distance = std::max(rep.max_polar_distance, row.polar_distance);
            rep.max_mass_outside_span =
                std::max(rep.max_mass_outside_span, row.mass_outside_span);
            rep.rows.push_back(std::move(row));
        };
        if (rho.uniform) {
            if (!rho.uniform_dirs.empty()) scan(Pt(), rho.uniform_dirs);
        } else {
            for (const auto& ra : rho.atoms) scan(ra.xi, ra.dirs);
        }
    }
    return rep;
}

}  // namespace ym
