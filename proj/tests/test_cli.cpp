#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ym/config.hpp"
#include "ym/estimation.hpp"

using namespace ym;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

std::string write_tmp(const std::string& name, const std::string& text) {
    fs::create_directories("/tmp/ym_cli_test");
    std::string path = "/tmp/ym_cli_test/" + name;
    std::ofstream f(path);
    f << text;
    return path;
}

}  // namespace

TEST_CASE("toml subset: sections, types, comments, duplicate detection") {
    auto t = parse_toml(
        "# comment\n"
        "experiment = \"estimate\"\n"
        "seed = 7\n"
        "[estimate]\n"
        "alpha = 2.0    # trailing comment\n"
        "fast = true\n"
        "radii = [0.5, 0.25]\n"
        "names = [\"a\", \"b\"]\n");
    CHECK(t.at("experiment").as_string() == "estimate");
    CHECK(t.at("seed").as_number() == 7.0);
    CHECK(t.at("estimate.alpha").as_number() == 2.0);
    CHECK(t.at("estimate.fast").as_bool());
    CHECK(t.at("estimate.radii").as_numbers() == std::vector<double>{0.5, 0.25});
    CHECK_THROWS(parse_toml("a = 1\na = 2\n"));
    CHECK_THROWS(parse_toml("novalue\n"));
}

TEST_CASE("eps schedule parsing") {
    auto dyadic = parse_eps_schedule("2^-k,k=4..6");
    REQUIRE(dyadic.size() == 3);
    CHECK(dyadic[0] == doctest::Approx(1.0 / 16));
    CHECK(dyadic[2] == doctest::Approx(1.0 / 64));
    auto fakir = parse_eps_schedule("1/k,k=2..8,*2");
    REQUIRE(fakir.size() == 3);
    CHECK(fakir[1] == doctest::Approx(0.25));
    CHECK_THROWS(parse_eps_schedule("nonsense"));
}

TEST_CASE("run_experiment: minimal estimate config reproduces the deep-spike tuple") {
    std::string cfg = write_tmp("estimate.toml",
                                "experiment = \"estimate\"\n"
                                "seed = 3\n"
                                "out_dir = \"/tmp/ym_cli_test/run1\"\n"
                                "[estimate]\n"
                                "spec = \"spike\"\n"
                                "alpha = 2.0\n"
                                "eps = \"2^-k,k=4..12\"\n"
                                "grid = 4096\n"
                                "win = 64\n"
                                "zres = 64\n"
                                "out = \"ym.json\"\n"
                                "log = \"conv.csv\"\n");
    RunResult r = run_experiment(cfg);
    CHECK(r.error.empty());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists("/tmp/ym_cli_test/run1/ym.json"));
    CHECK(fs::exists("/tmp/ym_cli_test/run1/conv.csv"));
    CHECK(fs::exists("/tmp/ym_cli_test/run1/summary.json"));
    // golden four-tuple: a unit atom at 0 with rho = delta_0, nu_inf = delta_1
    auto ym = ym_from_json(load_json("/tmp/ym_cli_test/run1/ym.json"));
    REQUIRE(ym.conc.lambda.atoms.size() == 1);
    CHECK(std::fabs(ym.conc.lambda.atoms[0].location[0]) <= 2.0 / 64);
    CHECK(ym.conc.lambda.atoms[0].mass == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("config with an unknown key is a hard error naming the key") {
    std::string cfg = write_tmp("typo.toml",
                                "experiment = \"estimate\"\n"
                                "[estimate]\n"
                                "spec = \"spike\"\n"
                                "alpa = 2.0\n");
    RunResult r = run_experiment(cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.error.find("alpa") != std::string::npos);
}

TEST_CASE("determinism: same config and seed produce byte-identical artifacts") {
    auto make_cfg = [&](const std::string& dir) {
        return write_tmp("det_" + dir + ".toml",
                         "experiment = \"estimate\"\n"
                         "seed = 11\n"
                         "out_dir = \"/tmp/ym_cli_test/" + dir + "\"\n"
                         "[estimate]\n"
                         "spec = \"fakir\"\n"
                         "eps = \"1/k,k=2..128,*2\"\n"
                         "grid = 1024\n"
                         "win = 32\n"
                         "zres = 32\n"
                         "out = \"ym.json\"\n"
                         "log = \"conv.csv\"\n");
    };
    RunResult r1 = run_experiment(make_cfg("detA"));
    RunResult r2 = run_experiment(make_cfg("detB"));
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp("/tmp/ym_cli_test/detA/ym.json") == slurp("/tmp/ym_cli_test/detB/ym.json"));
    CHECK(slurp("/tmp/ym_cli_test/detA/conv.csv") == slurp("/tmp/ym_cli_test/detB/conv.csv"));
    CHECK(slurp("/tmp/ym_cli_test/detA/summary.json") ==
          slurp("/tmp/ym_cli_test/detB/summary.json"));
}

TEST_CASE("gamma config: harmonic case margins are nonnegative within tau") {
    std::string cfg = write_tmp("gamma.toml",
                                "experiment = \"gamma\"\n"
                                "seed = 5\n"
                                "out_dir = \"/tmp/ym_cli_test/gamma\"\n"
                                "[gamma]\n"
                                "f = \"aniso_quad:1\"\n"
                                "op = \"zero\"\n"
                                "z0 = 1.0\n"
                                "n_random = 4\n"
                                "out = \"gamma.csv\"\n");
    RunResult r = run_experiment(cfg);
    CHECK(r.error.empty());
    CHECK(r.exit_code == 0);
    // final margin column entries >= -1e-3
    std::string csv = slurp("/tmp/ym_cli_test/gamma/gamma.csv");
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
        auto pos = line.rfind(',');
        REQUIRE(pos != std::string::npos);
        CHECK(std::stod(line.substr(pos + 1)) >= -1e-3);
    }
}

TEST_CASE("report rendering: empty and populated summaries are valid and deterministic") {
    Summary empty;
    empty.experiment = "empty";
    render_report(empty, "/tmp/ym_cli_test/rep_empty");
    CHECK(fs::exists("/tmp/ym_cli_test/rep_empty/checks.csv"));
    CHECK(fs::exists("/tmp/ym_cli_test/rep_empty/margins.svg"));

    Summary s;
    s.experiment = "estimate";
    s.seed = 1;
    s.checks.push_back({"rep_dev_16", true, 0.01, 0.04, 0.05});
    s.checks.push_back({"rep_dev_32", true, 0.02, 0.02, 0.04});
    s.checks.push_back({"rep_dev_64", true, 0.03, 0.01, 0.04});
    render_report(s, "/tmp/ym_cli_test/rep1");
    render_report(s, "/tmp/ym_cli_test/rep2");
    CHECK(slurp("/tmp/ym_cli_test/rep1/values.svg") == slurp("/tmp/ym_cli_test/rep2/values.svg"));
    CHECK(slurp("/tmp/ym_cli_test/rep1/values.svg").find("monotone decreasing") !=
          std::string::npos);
    CHECK(slurp("/tmp/ym_cli_test/rep1/margins.svg").find("svg") != std::string::npos);
}

TEST_CASE("serialize roundtrip: ym json preserves pairings") {
    SequenceSpec spec;
    spec.kind = SeqKind::spike;
    spec.alpha = 0.5;
    spec.domain = GridDomain::interval(0, 1, 64);
    for (int k = 4; k <= 9; ++k) spec.epsilons.push_back(std::pow(2.0, -k));
    EstimateOptions opt;
    opt.fine_res = 1024;
    opt.win = 32;
    opt.zres = 32;
    auto est = estimate_young_measure(spec, opt);
    json j = to_json(est.ym);
    TwoScaleYoungMeasure back = ym_from_json(j);
    Integrand f = make_integrand("tensor:bump:cos1:sqrt1pz2");
    CHECK(pairing(f, back) == doctest::Approx(pairing(f, est.ym)).epsilon(1e-12));
    YmDiff d = ym_distance(back, est.ym);
    CHECK(d.lambda_tv < 1e-12);
    CHECK(d.rho_tv_max < 1e-12);
}

TEST_CASE("thread cap honors YM_THREADS") {
    setenv("YM_THREADS", "2", 1);
    CHECK(thread_cap() <= 2);
    CHECK(thread_cap() >= 1);
    unsetenv("YM_THREADS");
    CHECK(thread_cap() >= 1);
}

TEST_CASE("tolerance failure exits with code 2 and still writes the summary") {
    std::string cfg = write_tmp("fail.toml",
                                "experiment = \"estimate\"\n"
                                "out_dir = \"/tmp/ym_cli_test/fail\"\n"
                                "[estimate]\n"
                                "spec = \"spike\"\n"
                                "alpha = 2.0\n"
                                "eps = \"2^-k,k=4..8\"\n"
                                "grid = 1024\n"
                                "win = 32\n"
                                "zres = 32\n"
                                "tau_rep = 1e-12\n");  // unattainably tight
    RunResult r = run_experiment(cfg);
    CHECK(r.exit_code == 2);
    CHECK(fs::exists("/tmp/ym_cli_test/fail/summary.json"));
    Summary s = Summary::from_json(load_json("/tmp/ym_cli_test/fail/summary.json"));
    CHECK(!s.all_pass());
}

TEST_CASE("estimates are bit-identical under different YM_THREADS caps") {
    SequenceSpec spec;
    spec.kind = SeqKind::custom;
    spec.value_dim = 2;
    spec.domain = GridDomain::box({0, 0}, {1, 1}, {32, 32});
    spec.epsilons = {1.0 / 5};
    spec.sampler = [](const Pt& x, double eps) {
        return Pt(std::sin(2 * M_PI * x[0] / eps), std::cos(2 * M_PI * x[1] / eps));
    };
    EstimateOptions opt;
    opt.fine_res = 256;
    opt.win = 2;
    opt.zres = 32;
    opt.avg_count = 1;
    setenv("YM_THREADS", "1", 1);
    auto a = estimate_young_measure(spec, opt);
    setenv("YM_THREADS", "4", 1);
    auto b = estimate_young_measure(spec, opt);
    unsetenv("YM_THREADS");
    CHECK(to_json(a.ym).dump() == to_json(b.ym).dump());
}
