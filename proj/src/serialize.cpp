#include "ym/serialize.hpp"

#include <fstream>

namespace ym {

namespace {

json pt_to_json(const Pt& p) {
    json a = json::array();
    for (int i = 0; i < p.dim; ++i) a.push_back(p[i]);
    return a;
}

Pt pt_from_json(const json& j) {
    Pt p;
    p.dim = static_cast<int>(j.size());
    for (int i = 0; i < p.dim; ++i) p[i] = j[static_cast<size_t>(i)].get<double>();
    return p;
}

json rho_to_json(const RhoDist& r) {
    json j;
    j["uniform"] = r.uniform;
    j["unconstrained"] = r.unconstrained;
    json atoms = json::array();
    for (const auto& a : r.atoms) {
        json ja;
        ja["xi"] = pt_to_json(a.xi);
        ja["w"] = a.w;
        json dirs = json::array();
        for (const auto& d : a.dirs)
            dirs.push_back({{"dir", pt_to_json(d.dir)}, {"w", d.w}});
        ja["nu_inf"] = dirs;
        atoms.push_back(ja);
    }
    j["atoms"] = atoms;
    json udirs = json::array();
    for (const auto& d : r.uniform_dirs)
        udirs.push_back({{"dir", pt_to_json(d.dir)}, {"w", d.w}});
    j["uniform_nu_inf"] = udirs;
    return j;
}

RhoDist rho_from_json(const json& j) {
    RhoDist r;
    r.uniform = j.at("uniform").get<bool>();
    r.unconstrained = j.at("unconstrained").get<bool>();
    for (const auto& ja : j.at("atoms")) {
        RhoAtom a;
        a.xi = pt_from_json(ja.at("xi"));
        a.w = ja.at("w").get<double>();
        for (const auto& jd : ja.at("nu_inf"))
            a.dirs.push_back({pt_from_json(jd.at("dir")), jd.at("w").get<double>()});
        r.atoms.push_back(std::move(a));
    }
    for (const auto& jd : j.at("uniform_nu_inf"))
        r.uniform_dirs.push_back({pt_from_json(jd.at("dir")), jd.at("w").get<double>()});
    return r;
}

}  // namespace

json to_json(const GridDomain& g) {
    json j;
    j["kind"] = g.kind == DomainKind::torus ? "torus" : "omega";
    j["dim"] = g.dim;
    json lo = json::array(), hi = json::array(), res = json::array();
    for (int i = 0; i < g.dim; ++i) {
        lo.push_back(g.lo[static_cast<size_t>(i)]);
        hi.push_back(g.hi[static_cast<size_t>(i)]);
        res.push_back(g.res[static_cast<size_t>(i)]);
    }
    j["lo"] = lo;
    j["hi"] = hi;
    j["resolution"] = res;
    return j;
}

GridDomain grid_from_json(const json& j) {
    int dim = j.at("dim").get<int>();
    std::vector<double> lo, hi;
    std::vector<int> res;
    for (int i = 0; i < dim; ++i) {
        lo.push_back(j.at("lo")[static_cast<size_t>(i)].get<double>());
        hi.push_back(j.at("hi")[static_cast<size_t>(i)].get<double>());
        res.push_back(j.at("resolution")[static_cast<size_t>(i)].get<int>());
    }
    if (j.at("kind").get<std::string>() == "torus") {
        GridDomain g = GridDomain::unit_torus(dim, res[0]);
        for (int i = 0; i < dim; ++i) g.res[static_cast<size_t>(i)] = res[static_cast<size_t>(i)];
        return g;
    }
    return GridDomain::box(lo, hi, res);
}

json to_json(const BallGrid& b) {
    return {{"value_dim", b.value_dim}, {"rings", b.rings}, {"dirs", b.dirs}};
}

BallGrid ball_from_json(const json& j) {
    return BallGrid::make(j.at("value_dim").get<int>(), j.at("rings").get<int>(),
                          j.at("dirs").get<int>());
}

json to_json(const ScalarMeasure& m) {
    json j;
    j["domain"] = to_json(m.domain);
    j["density"] = m.density;  // row-major
    json atoms = json::array();
    for (const auto& a : m.atoms)
        atoms.push_back({{"location", pt_to_json(a.location)}, {"mass", a.mass}});
    j["atoms"] = atoms;
    return j;
}

ScalarMeasure scalar_from_json(const json& j) {
    ScalarMeasure m = ScalarMeasure::zero(grid_from_json(j.at("domain")));
    m.density = j.at("density").get<std::vector<double>>();
    for (const auto& ja : j.at("atoms"))
        m.atoms.push_back({pt_from_json(ja.at("location")), ja.at("mass").get<double>()});
    return m;
}

json to_json(const VectorMeasure& m) {
    json j;
    j["domain"] = to_json(m.domain);
    j["value_dim"] = m.value_dim;
    j["density"] = m.ac_density;  // row-major, value_dim per cell
    json atoms = json::array();
    for (const auto& a : m.singular)
        atoms.push_back({{"location", pt_to_json(a.location)},
                         {"direction", pt_to_json(a.direction)},
                         {"mass", a.mass}});
    j["atoms"] = atoms;
    return j;
}

VectorMeasure vector_from_json(const json& j) {
    VectorMeasure m =
        VectorMeasure::zero(grid_from_json(j.at("domain")), j.at("value_dim").get<int>());
    m.ac_density = j.at("density").get<std::vector<double>>();
    for (const auto& ja : j.at("atoms"))
        m.singular.push_back({pt_from_json(ja.at("location")),
                              pt_from_json(ja.at("direction")),
                              ja.at("mass").get<double>()});
    return m;
}

json to_json(const TwoScaleYoungMeasure& ym) {
    json j;
    j["omega"] = to_json(ym.omega);
    j["torus"] = to_json(ym.torus);
    j["ball"] = to_json(ym.ball);
    j["value_dim"] = ym.value_dim;
    json nu = json::array();
    for (const auto& [key, dist] : ym.nu) {
        json cell;
        cell["cell"] = key;
        json atoms = json::array();
        for (const auto& a : dist.atoms)
            atoms.push_back({{"z", pt_to_json(a.point)}, {"w", a.w}});
        cell["atoms"] = atoms;
        nu.push_back(cell);
    }
    j["nu"] = nu;
    j["lambda"] = to_json(ym.conc.lambda);
    json rho_cells = json::array();
    for (const auto& [cell, r] : ym.conc.rho_cell) {
        json jr = rho_to_json(r);
        jr["cell"] = cell;
        rho_cells.push_back(jr);
    }
    j["rho_cells"] = rho_cells;
    json rho_atoms = json::array();
    for (const auto& r : ym.conc.rho_atom) rho_atoms.push_back(rho_to_json(r));
    j["rho_atoms"] = rho_atoms;
    return j;
}

TwoScaleYoungMeasure ym_from_json(const json& j) {
    TwoScaleYoungMeasure ym;
    ym.omega = grid_from_json(j.at("omega"));
    ym.torus = grid_from_json(j.at("torus"));
    ym.ball = ball_from_json(j.at("ball"));
    ym.value_dim = j.at("value_dim").get<int>();
    for (const auto& cell : j.at("nu")) {
        FiberDist d;
        for (const auto& ja : cell.at("atoms"))
            d.atoms.push_back({pt_from_json(ja.at("z")), ja.at("w").get<double>()});
        ym.nu[cell.at("cell").get<int64_t>()] = std::move(d);
    }
    ym.conc.lambda = scalar_from_json(j.at("lambda"));
    for (const auto& jr : j.at("rho_cells"))
        ym.conc.rho_cell[jr.at("cell").get<int64_t>()] = rho_from_json(jr);
    for (const auto& jr : j.at("rho_atoms")) ym.conc.rho_atom.push_back(rho_from_json(jr));
    return ym;
}

json to_json(const YmDiff& d) {
    return {{"nu_tv_mean", d.nu_tv_mean},
            {"nu_tv_max", d.nu_tv_max},
            {"nu_mean_l1", d.nu_mean_l1},
            {"lambda_tv", d.lambda_tv},
            {"lambda_mass_rel", d.lambda_mass_rel},
            {"atom_loc_cells", d.atom_loc_cells},
            {"atom_mass_rel", d.atom_mass_rel},
            {"rho_tv_max", d.rho_tv_max},
            {"nuinf_tv_max", d.nuinf_tv_max}};
}

void save_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(1) << "\n";
}

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    json j;
    f >> j;
    return j;
}

}  // namespace ym
