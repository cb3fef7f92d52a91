#include "ym/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "ym/homogenization.hpp"
#include "ym/localization.hpp"

namespace ym {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

TomlValue parse_value(const std::string& raw, int lineno) {
    std::string s = trim(raw);
    if (s.empty()) throw std::runtime_error("toml: empty value at line " + std::to_string(lineno));
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw std::runtime_error("toml: unterminated string at line " + std::to_string(lineno));
        return {s.substr(1, s.size() - 2)};
    }
    if (s == "true") return {true};
    if (s == "false") return {false};
    if (s.front() == '[') {
        if (s.back() != ']')
            throw std::runtime_error("toml: unterminated array at line " + std::to_string(lineno));
        std::string inner = s.substr(1, s.size() - 2);
        std::vector<double> nums;
        std::vector<std::string> strs;
        bool is_str = false;
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            if (item.front() == '"') {
                is_str = true;
                strs.push_back(item.substr(1, item.size() - 2));
            } else {
                nums.push_back(std::stod(item));
            }
        }
        if (is_str) return {strs};
        return {nums};
    }
    try {
        size_t used = 0;
        double d = std::stod(s, &used);
        if (used == s.size()) return {d};
    } catch (...) {
    }
    throw std::runtime_error("toml: cannot parse value '" + s + "' at line " +
                             std::to_string(lineno));
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
    TomlTable out;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            // keep '#' inside quoted strings
            size_t q1 = line.find('"');
            size_t q2 = q1 == std::string::npos ? std::string::npos : line.find('"', q1 + 1);
            if (!(q1 != std::string::npos && q2 != std::string::npos && hash > q1 && hash < q2))
                line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("toml: bad section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("toml: expected key = value at line " +
                                     std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::runtime_error("toml: empty key at line " + std::to_string(lineno));
        std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full))
            throw std::runtime_error("toml: duplicate key '" + full + "'");
        out[full] = parse_value(line.substr(eq + 1), lineno);
    }
    return out;
}

TomlTable load_toml(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_toml(ss.str());
}

std::vector<double> parse_eps_schedule(const std::string& s) {
    // forms: "2^-k,k=4..12"  |  "1/k,k=2..512,*2"  |  "a/(n+xi),n=64..2048,*2"
    std::vector<double> eps;
    auto comma = s.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad eps schedule: " + s);
    std::string formula = trim(s.substr(0, comma));
    std::string range = trim(s.substr(comma + 1));
    double step_mul = 0.0;  // 0: +1 steps
    auto comma2 = range.find(',');
    if (comma2 != std::string::npos) {
        std::string stepspec = trim(range.substr(comma2 + 1));
        if (stepspec.size() > 1 && stepspec[0] == '*') step_mul = std::stod(stepspec.substr(1));
        range = trim(range.substr(0, comma2));
    }
    auto eqpos = range.find('=');
    auto dots = range.find("..");
    if (eqpos == std::string::npos || dots == std::string::npos)
        throw std::runtime_error("bad eps schedule range: " + s);
    double lo = std::stod(range.substr(eqpos + 1, dots - eqpos - 1));
    double hi = std::stod(range.substr(dots + 2));
    for (double k = lo; k <= hi + 1e-9; k = step_mul > 0 ? k * step_mul : k + 1) {
        if (formula == "2^-k") {
            eps.push_back(std::pow(2.0, -k));
        } else if (formula == "1/k") {
            eps.push_back(1.0 / k);
        } else {
            throw std::runtime_error("unknown eps formula: " + formula);
        }
    }
    return eps;
}

namespace {

struct KeyChecker {
    const TomlTable& t;
    std::set<std::string> seen;

    bool has(const std::string& k) {
        seen.insert(k);
        return t.count(k) > 0;
    }
    std::string str(const std::string& k, const std::string& dflt = "") {
        seen.insert(k);
        auto it = t.find(k);
        return it == t.end() ? dflt : it->second.as_string();
    }
    double num(const std::string& k, double dflt) {
        seen.insert(k);
        auto it = t.find(k);
        return it == t.end() ? dflt : it->second.as_number();
    }
    std::vector<double> nums(const std::string& k, std::vector<double> dflt = {}) {
        seen.insert(k);
        auto it = t.find(k);
        return it == t.end() ? dflt : it->second.as_numbers();
    }
    void finish() const {
        for (const auto& [k, v] : t) {
            (void)v;
            if (!seen.count(k))
                throw std::runtime_error("config: unknown key '" + k + "'");
        }
    }
};

SequenceSpec spec_from_config(KeyChecker& cfg, const std::string& prefix) {
    SequenceSpec spec;
    std::string kind = cfg.str(prefix + "spec", "spike");
    if (kind == "spike") spec.kind = SeqKind::spike;
    else if (kind == "fakir") spec.kind = SeqKind::fakir;
    else if (kind == "translated_spike") spec.kind = SeqKind::translated_spike;
    else if (kind == "sine") spec.kind = SeqKind::sine;
    else throw std::runtime_error("config: unknown sequence spec '" + kind + "'");
    spec.alpha = cfg.num(prefix + "alpha", 1.0);
    spec.a = cfg.num(prefix + "a", 0.0);
    spec.b = cfg.num(prefix + "b", 0.0);
    double lo = cfg.num(prefix + "omega_lo", 0.0), hi = cfg.num(prefix + "omega_hi", 1.0);
    spec.domain = GridDomain::interval(lo, hi, 64);
    if (cfg.has(prefix + "eps_list")) {
        spec.epsilons = cfg.nums(prefix + "eps_list");
    } else {
        spec.epsilons = parse_eps_schedule(cfg.str(prefix + "eps", "2^-k,k=4..12"));
    }
    spec.name = kind;
    return spec;
}

EstimateOptions est_options(KeyChecker& cfg, const std::string& prefix) {
    EstimateOptions opt;
    opt.fine_res = static_cast<int>(cfg.num(prefix + "grid", 4096));
    opt.win = static_cast<int>(cfg.num(prefix + "win", 64));
    opt.zres = static_cast<int>(cfg.num(prefix + "zres", 64));
    opt.ball_rings = static_cast<int>(cfg.num(prefix + "rings", 24));
    opt.avg_count = static_cast<int>(cfg.num(prefix + "avg", 3));
    return opt;
}

}  // namespace

RunResult run_experiment(const std::string& config_path) {
    RunResult res;
    TomlTable table;
    try {
        table = load_toml(config_path);
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.error = e.what();
        return res;
    }
    try {
        KeyChecker cfg{table, {}};
        std::string kind = cfg.str("experiment");
        uint64_t seed = static_cast<uint64_t>(cfg.num("seed", 1));
        std::string out_dir = cfg.str("out_dir", ".");
        std::filesystem::create_directories(out_dir);
        Summary summary;
        summary.experiment = kind;
        summary.seed = seed;

        if (kind == "estimate") {
            SequenceSpec spec = spec_from_config(cfg, "estimate.");
            EstimateOptions opt = est_options(cfg, "estimate.");
            std::string out = cfg.str("estimate.out", "ym.json");
            std::string log = cfg.str("estimate.log", "convergence.csv");
            double tau = cfg.num("estimate.tau_rep", -1.0);
            auto est = estimate_young_measure(spec, opt);
            save_json(out_dir + "/" + out, to_json(est.ym));
            res.artifacts.push_back(out_dir + "/" + out);
            std::vector<std::vector<double>> rows;
            for (const auto& r : est.log)
                rows.push_back({r.eps, r.rep_deviation, r.pairing_err});
            write_csv(out_dir + "/" + log, {"eps", "rep_deviation", "pairing_err"}, rows);
            res.artifacts.push_back(out_dir + "/" + log);
            double dev = verify_representation_identity(est.empirical);
            double tol = tau > 0 ? tau : default_tau_rep(est.empirical);
            summary.checks.push_back(
                {"representation_identity", dev <= tol, tol - dev, dev, tol});
            summary.checks.push_back({"nu_leakage", est.nu_leakage <= 0.05,
                                      0.05 - est.nu_leakage, est.nu_leakage, 0.05});
        } else if (kind == "localize") {
            SequenceSpec spec = spec_from_config(cfg, "localize.");
            EstimateOptions opt = est_options(cfg, "localize.");
            double at = cfg.num("localize.at", 0.5);
            std::string mode = cfg.str("localize.mode", "singular");
            std::string out = cfg.str("localize.out", "tangent.json");
            auto est = estimate_young_measure(spec, opt);
            TangentOptions topt;
            topt.radii = cfg.nums("localize.radii");
            topt.est = opt;
            auto tan = tangent_young(est.ym, spec, Pt(at),
                                     mode == "regular" ? BlowupScaling::regular
                                                       : BlowupScaling::singular,
                                     topt);
            json j = to_json(tan.tangent);
            j["xi0"] = tan.xi0;
            j["warnings"] = tan.warnings;
            if (tan.reestimated) j["reestimate_diff"] = to_json(tan.reestimate_diff);
            save_json(out_dir + "/" + out, j);
            res.artifacts.push_back(out_dir + "/" + out);
            summary.checks.push_back({"lebesgue_point_checks", tan.warnings.empty(),
                                      tan.warnings.empty() ? 1.0 : -1.0,
                                      static_cast<double>(tan.warnings.size()), 0.0});
            if (tan.reestimated) {
                double d = tan.reestimate_diff.rho_tv_max;
                summary.checks.push_back({"reestimate_rho_tv", d <= 0.02, 0.02 - d, d, 0.02});
            }
        } else if (kind == "homogenize") {
            Integrand f = make_integrand(cfg.str("homogenize.f", "aniso_quad:1"));
            auto op = parse_operator(cfg.str("homogenize.op", "zero"));
            double z = cfg.num("homogenize.z", 1.0);
            auto Rs = cfg.nums("homogenize.R", {1, 2, 4});
            int grid = static_cast<int>(cfg.num("homogenize.grid", 256));
            std::string out = cfg.str("homogenize.out", "hom.json");
            CellProblem p;
            p.integrand = f;
            p.op = op;
            p.z = Pt(z);
            p.grid = grid;
            std::vector<int> Ri;
            for (double r : Rs) Ri.push_back(static_cast<int>(r));
            SweepResult sweep = cell_minimize_sweep(p, Ri);
            CellSolution sol = cell_minimize(p);
            json j;
            j["value"] = sweep.value;
            j["R_sweep"] = sweep.per_R;
            j["iterations"] = sol.iterations;
            j["minimizer_linf"] = [&] {
                double m = 0;
                for (double v : sol.minimizer.ac_density) m = std::max(m, std::fabs(v));
                return m;
            }();
            save_json(out_dir + "/" + out, j);
            res.artifacts.push_back(out_dir + "/" + out);
            double flat = 0;
            for (double v : sweep.per_R) flat = std::max(flat, std::fabs(v - sweep.per_R[0]));
            summary.checks.push_back({"r_sweep_flat", flat <= 1e-6, 1e-6 - flat, flat, 1e-6});
        } else if (kind == "gamma") {
            Integrand f = make_integrand(cfg.str("gamma.f", "aniso_quad:1"));
            f.flags.convex_in_z = true;
            auto op = parse_operator(cfg.str("gamma.op", "zero"));
            double z0 = cfg.num("gamma.z0", 1.0);
            GammaOptions gopt;
            gopt.n_random = static_cast<int>(cfg.num("gamma.n_random", 20));
            gopt.seed = seed;
            gopt.tau = cfg.num("gamma.tau", 1e-3);
            GridDomain omega = GridDomain::interval(0, 1, 8);
            VectorMeasure target = VectorMeasure::zero(omega, f.value_dim);
            for (int64_t c = 0; c < omega.cell_count(); ++c) target.set_ac(c, Pt(z0));
            auto rep = gamma_liminf_demo(f, op, target, gopt);
            std::string out = cfg.str("gamma.out", "gamma.csv");
            std::vector<std::vector<double>> rows;
            for (size_t i = 0; i < rep.rows.size(); ++i)
                for (const auto& [eps, I_eps] : rep.rows[i].evals)
                    rows.push_back({static_cast<double>(i), eps, I_eps, rep.I_hom,
                                    rep.rows[i].margin});
            write_csv(out_dir + "/" + out, {"schedule", "eps", "I_eps", "I_hom", "margin"},
                      rows);
            res.artifacts.push_back(out_dir + "/" + out);
            summary.checks.push_back({"gamma_lower_bound", rep.lower_bound_holds,
                                      rep.worst_margin + gopt.tau, rep.worst_margin,
                                      gopt.tau});
            summary.checks.push_back({"recovery_attains", rep.recovery_attains,
                                      gopt.tau - rep.recovery_gap, rep.recovery_gap,
                                      gopt.tau});
        } else if (kind == "jensen") {
            Integrand h = make_integrand(cfg.str("jensen.f", "abs"));
            auto op = parse_operator(cfg.str("jensen.op", "zero"));
            std::string gen = cfg.str("jensen.gen", "fakir");
            double tau = cfg.num("jensen.tau", 1e-3);
            TwoScaleYoungMeasure ym;
            if (gen == "fakir") {
                SequenceSpec spec;
                spec.kind = SeqKind::fakir;
                spec.domain = GridDomain::interval(0, 1, 64);
                for (int k = 2; k <= 256; k *= 2) spec.epsilons.push_back(1.0 / k);
                ym = estimate_young_measure(spec).ym;
            } else if (gen == "constant") {
                GridDomain g = GridDomain::interval(0, 1, 16);
                VectorMeasure m = VectorMeasure::zero(g, 1);
                for (int64_t c = 0; c < g.cell_count(); ++c) m.set_ac(c, Pt(1.0));
                ym = embed_measure(m, 32);
            } else {
                throw std::runtime_error("config: unknown jensen generator '" + gen + "'");
            }
            auto rep = jensen_verify(ym, h, op);
            summary.checks.push_back({"jensen_margins", rep.passes(tau),
                                      rep.worst_margin + tau, rep.worst_margin, tau});
        } else if (kind == "structure") {
            SequenceSpec spec = spec_from_config(cfg, "structure.");
            EstimateOptions opt = est_options(cfg, "structure.");
            auto op = parse_operator(cfg.str("structure.op", "zero"));
            auto est = estimate_young_measure(spec, opt);
            auto ssb = second_scale_barycenter_id(est.ym);
            double resid = a_residual(ssb, op);
            auto srep = structure_check(est.ym, op, 1e-6);
            double tau = cfg.num("structure.tau", 1e-3);
            summary.checks.push_back({"a_residual", resid <= tau, tau - resid, resid, tau});
            summary.checks.push_back({"structure", srep.passes(tau),
                                      tau - std::max(srep.max_polar_distance,
                                                     srep.max_mass_outside_span),
                                      srep.max_polar_distance, tau});
        } else {
            throw std::runtime_error("config: unknown experiment '" + kind + "'");
        }
        cfg.finish();
        save_json(out_dir + "/summary.json", summary.to_json());
        res.artifacts.push_back(out_dir + "/summary.json");
        res.summary = summary;
        res.exit_code = summary.all_pass() ? 0 : 2;
        return res;
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.error = e.what();
        return res;
    }
}

}  // namespace ym
