// Command-line front end: estimation, pairing, localization, A-free checks,
// homogenization, Jensen and Gamma-liminf experiments, reports.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "ym/config.hpp"
#include "ym/homogenization.hpp"
#include "ym/barycenter.hpp"
#include "ym/localization.hpp"

using namespace ym;

namespace {

SequenceSpec cli_spec(const std::string& kind, double alpha, double a, double b,
                      const std::string& eps, double lo, double hi,
                      const std::vector<double>& eps_list) {
    SequenceSpec spec;
    if (kind == "spike") spec.kind = SeqKind::spike;
    else if (kind == "fakir") spec.kind = SeqKind::fakir;
    else if (kind == "translated_spike") spec.kind = SeqKind::translated_spike;
    else if (kind == "sine") spec.kind = SeqKind::sine;
    else throw std::runtime_error("unknown spec kind: " + kind);
    spec.alpha = alpha;
    spec.a = a;
    spec.b = b;
    spec.domain = GridDomain::interval(lo, hi, 64);
    spec.epsilons = eps_list.empty() ? parse_eps_schedule(eps) : eps_list;
    spec.name = kind;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-scale Young measure toolkit"};
    app.require_subcommand(1);

    // --- run a config file ------------------------------------------------
    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment config (TOML)");
    run->add_option("config", config_path, "config file")->required();

    // --- estimate ----------------------------------------------------------
    std::string e_spec = "spike", e_eps = "2^-k,k=4..12", e_out = "ym.json", e_log;
    double e_alpha = 2.0, e_a = 0.0, e_b = 0.0, e_lo = 0.0, e_hi = 1.0;
    int e_grid = 4096, e_win = 64, e_zres = 64;
    auto* est = app.add_subcommand("estimate", "estimate the two-scale* Young measure");
    est->add_option("--spec", e_spec, "spike|fakir|translated_spike|sine");
    est->add_option("--alpha", e_alpha);
    est->add_option("--a", e_a);
    est->add_option("--b", e_b);
    est->add_option("--eps", e_eps, "schedule, e.g. 2^-k,k=4..12 or 1/k,k=2..512,*2");
    std::vector<double> e_eps_list;
    est->add_option("--eps-list", e_eps_list, "explicit schedule")->delimiter(',');
    est->add_option("--grid", e_grid);
    est->add_option("--win", e_win);
    est->add_option("--zres", e_zres);
    est->add_option("--omega-lo", e_lo);
    est->add_option("--omega-hi", e_hi);
    est->add_option("--out", e_out);
    est->add_option("--log", e_log, "convergence CSV");

    // --- pair ---------------------------------------------------------------
    std::string p_ym, p_f = "abs";
    auto* pair_cmd = app.add_subcommand("pair", "pair an integrand with a stored ym");
    pair_cmd->add_option("--ym", p_ym)->required();
    pair_cmd->add_option("--f", p_f);

    // --- ym-diff -------------------------------------------------------------
    std::string d_a, d_b;
    auto* diff = app.add_subcommand("ym-diff", "component-wise distances of two ym files");
    diff->add_option("a", d_a)->required();
    diff->add_option("b", d_b)->required();

    // --- localize -------------------------------------------------------------
    std::string l_spec = "translated_spike", l_eps = "2^-k,k=4..10", l_mode = "singular",
                l_out = "tangent.json";
    double l_alpha = 2.0, l_a = 0.5, l_b = 0.0, l_at = 0.5;
    auto* loc = app.add_subcommand("localize", "tangent Young measure at a point");
    loc->add_option("--spec", l_spec);
    loc->add_option("--alpha", l_alpha);
    loc->add_option("--a", l_a);
    loc->add_option("--b", l_b);
    loc->add_option("--eps", l_eps);
    std::vector<double> l_eps_list;
    loc->add_option("--eps-list", l_eps_list, "explicit schedule (pins frac(a/eps))")
        ->delimiter(',');
    loc->add_option("--at", l_at)->required();
    loc->add_option("--mode", l_mode, "regular|singular");
    loc->add_option("--out", l_out);
    std::vector<double> l_radii;
    loc->add_option("--radii", l_radii, "blow-up radii (decreasing)")->delimiter(',');

    // --- barycenter -------------------------------------------------------------
    std::string b_ym, b_f = "identity", b_out = "barycenter.csv", b_out2 = "second_scale.csv";
    auto* bary = app.add_subcommand("barycenter", "f-barycenter tables of a stored ym");
    bary->add_option("--ym", b_ym)->required();
    bary->add_option("--f", b_f, "integrand name or 'identity'");
    bary->add_option("--out", b_out, "first-scale CSV (x, value...)");
    bary->add_option("--out2", b_out2, "second-scale CSV (x, xi, value...)");

    // --- check-afree -----------------------------------------------------------
    std::string c_ym, c_op = "zero";
    auto* chk = app.add_subcommand("check-afree", "residual + structure checks");
    chk->add_option("--ym", c_ym)->required();
    chk->add_option("--op", c_op);

    // --- homogenize --------------------------------------------------------------
    std::string h_f = "aniso_quad:1", h_op = "zero", h_out;
    double h_z = 1.0;
    std::vector<int> h_R = {1, 2, 4};
    int h_grid = 256;
    auto* hom = app.add_subcommand("homogenize", "cell minimization with an R sweep");
    hom->add_option("--f", h_f);
    hom->add_option("--op", h_op);
    hom->add_option("--z", h_z);
    hom->add_option("--R", h_R)->delimiter(',');
    hom->add_option("--grid", h_grid);
    hom->add_option("--out", h_out);

    // --- jensen ---------------------------------------------------------------
    std::string j_gen = "fakir", j_f = "abs", j_op = "zero";
    auto* jen = app.add_subcommand("jensen", "Jensen inequality margins");
    jen->add_option("--gen", j_gen, "fakir|constant");
    jen->add_option("--f", j_f);
    jen->add_option("--op", j_op);

    // --- gamma -----------------------------------------------------------------
    std::string g_config;
    auto* gam = app.add_subcommand("gamma", "Gamma-liminf experiment from a config");
    gam->add_option("--config", g_config)->required();

    // --- report ------------------------------------------------------------------
    std::string r_summary, r_dir = "report";
    auto* repc = app.add_subcommand("report", "render summary JSON into CSV + SVG");
    repc->add_option("--summary", r_summary)->required();
    repc->add_option("--out-dir", r_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            RunResult r = run_experiment(config_path);
            if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
            for (const auto& a : r.artifacts) std::cout << "wrote " << a << "\n";
            for (const auto& c : r.summary.checks)
                std::printf("%-28s %s  value=%.6g margin=%.3g\n", c.name.c_str(),
                            c.pass ? "PASS" : "FAIL", c.value, c.margin);
            return r.exit_code;
        }
        if (*est) {
            SequenceSpec spec = cli_spec(e_spec, e_alpha, e_a, e_b, e_eps, e_lo, e_hi, e_eps_list);
            EstimateOptions opt;
            opt.fine_res = e_grid;
            opt.win = e_win;
            opt.zres = e_zres;
            auto result = estimate_young_measure(spec, opt);
            save_json(e_out, to_json(result.ym));
            std::cout << "wrote " << e_out << "\n";
            if (!e_log.empty()) {
                std::vector<std::vector<double>> rows;
                for (const auto& r : result.log)
                    rows.push_back({r.eps, r.rep_deviation, r.pairing_err});
                write_csv(e_log, {"eps", "rep_deviation", "pairing_err"}, rows);
                std::cout << "wrote " << e_log << "\n";
            }
            for (size_t i = 0; i < result.frac_a_eps.size(); ++i)
                std::printf("eps=%.8g frac(a/eps)=%.8g rep_dev=%.3g\n", spec.epsilons[i],
                            result.frac_a_eps[i], result.log[i].rep_deviation);
            return 0;
        }
        if (*pair_cmd) {
            TwoScaleYoungMeasure ym = ym_from_json(load_json(p_ym));
            Integrand f = make_integrand(p_f, ym.value_dim);
            std::printf("%.12g\n", pairing(f, ym));
            return 0;
        }
        if (*diff) {
            YmDiff d = ym_distance(ym_from_json(load_json(d_a)), ym_from_json(load_json(d_b)));
            std::cout << to_json(d).dump(1) << "\n";
            return 0;
        }
        if (*loc) {
            SequenceSpec spec = cli_spec(l_spec, l_alpha, l_a, l_b, l_eps, 0.0, 1.0, l_eps_list);
            auto estres = estimate_young_measure(spec);
            TangentOptions topt;
            topt.radii = l_radii;
            auto tan = tangent_young(estres.ym, spec, Pt(l_at),
                                     l_mode == "regular" ? BlowupScaling::regular
                                                         : BlowupScaling::singular,
                                     topt);
            json j = to_json(tan.tangent);
            j["xi0"] = tan.xi0;
            j["warnings"] = tan.warnings;
            save_json(l_out, j);
            std::cout << "wrote " << l_out << " (xi0=" << tan.xi0 << ")\n";
            for (const auto& w : tan.warnings) std::cout << "warning: " << w << "\n";
            return 0;
        }
        if (*bary) {
            TwoScaleYoungMeasure ym = ym_from_json(load_json(b_ym));
            VectorMeasure bc;
            SecondScaleBarycenter ssb;
            if (b_f == "identity") {
                bc = barycenter_id(ym);
                ssb = second_scale_barycenter_id(ym);
            } else {
                Integrand f = make_integrand(b_f, ym.value_dim);
                bc = barycenter(ym, f);
                ssb = second_scale_barycenter(ym, f);
            }
            std::vector<std::string> hdr = {"x"};
            for (int j = 0; j < bc.value_dim; ++j) hdr.push_back("v" + std::to_string(j));
            std::vector<std::vector<double>> rows;
            for (int64_t c = 0; c < bc.domain.cell_count(); ++c) {
                std::vector<double> row = {bc.domain.cell_center(c)[0]};
                for (int j = 0; j < bc.value_dim; ++j) row.push_back(bc.ac_at(c)[j]);
                rows.push_back(row);
            }
            write_csv(b_out, hdr, rows);
            std::vector<std::string> hdr2 = {"x", "xi"};
            for (int j = 0; j < bc.value_dim; ++j) hdr2.push_back("v" + std::to_string(j));
            std::vector<std::vector<double>> rows2;
            for (const auto& [cx, th] : ssb.at_cell) {
                double x = ym.omega.cell_center(cx)[0];
                for (int64_t cz = 0; cz < th.domain.cell_count(); ++cz) {
                    std::vector<double> row = {x, th.domain.cell_center(cz)[0]};
                    for (int j = 0; j < th.value_dim; ++j) row.push_back(th.ac_at(cz)[j]);
                    rows2.push_back(row);
                }
            }
            write_csv(b_out2, hdr2, rows2);
            std::cout << "wrote " << b_out << " and " << b_out2 << "\n";
            return 0;
        }
        if (*chk) {
            TwoScaleYoungMeasure ym = ym_from_json(load_json(c_ym));
            auto op = parse_operator(c_op);
            auto ssb = second_scale_barycenter_id(ym);
            double resd = a_residual(ssb, op);
            auto srep = structure_check(ym, op, 1e-6);
            std::printf("a_residual=%.6g polar_distance=%.6g mass_outside_span=%.6g\n",
                        resd, srep.max_polar_distance, srep.max_mass_outside_span);
            return srep.passes(1e-3) && resd < 1e-3 ? 0 : 2;
        }
        if (*hom) {
            CellProblem p;
            p.integrand = make_integrand(h_f);
            p.op = parse_operator(h_op);
            p.z = Pt(h_z);
            p.grid = h_grid;
            SweepResult sweep = cell_minimize_sweep(p, h_R);
            CellSolution sol = cell_minimize(p);
            json j;
            j["value"] = sweep.value;
            j["R_sweep"] = sweep.per_R;
            j["iterations"] = sol.iterations;
            std::cout << j.dump(1) << "\n";
            if (!h_out.empty()) save_json(h_out, j);
            return 0;
        }
        if (*jen) {
            TwoScaleYoungMeasure ym;
            if (j_gen == "fakir") {
                SequenceSpec spec;
                spec.kind = SeqKind::fakir;
                spec.domain = GridDomain::interval(0, 1, 64);
                for (int k = 2; k <= 256; k *= 2) spec.epsilons.push_back(1.0 / k);
                ym = estimate_young_measure(spec).ym;
            } else {
                GridDomain g = GridDomain::interval(0, 1, 16);
                VectorMeasure m = VectorMeasure::zero(g, 1);
                for (int64_t c = 0; c < g.cell_count(); ++c) m.set_ac(c, Pt(1.0));
                ym = embed_measure(m, 32);
            }
            auto rep = jensen_verify(ym, make_integrand(j_f), parse_operator(j_op));
            std::printf("worst_margin=%.6g (%zu rows)\n", rep.worst_margin, rep.rows.size());
            for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
            return rep.passes(1e-3) ? 0 : 2;
        }
        if (*gam) {
            RunResult r = run_experiment(g_config);
            if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
            for (const auto& c : r.summary.checks)
                std::printf("%-24s %s value=%.6g\n", c.name.c_str(),
                            c.pass ? "PASS" : "FAIL", c.value);
            return r.exit_code;
        }
        if (*repc) {
            Summary s = Summary::from_json(load_json(r_summary));
            render_report(s, r_dir);
            std::cout << "wrote " << r_dir << "/{summary.json,checks.csv,margins.svg,values.svg}\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
