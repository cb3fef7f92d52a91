#include "ym/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace ym {

json Summary::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["seed"] = seed;
    json cs = json::array();
    for (const auto& c : checks)
        cs.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"margin", c.margin},
                      {"value", c.value},
                      {"tolerance", c.tolerance}});
    j["checks"] = cs;
    j["all_pass"] = all_pass();
    return j;
}

Summary Summary::from_json(const json& j) {
    Summary s;
    s.experiment = j.at("experiment").get<std::string>();
    s.seed = j.at("seed").get<uint64_t>();
    for (const auto& jc : j.at("checks"))
        s.checks.push_back({jc.at("name").get<std::string>(), jc.at("pass").get<bool>(),
                            jc.at("margin").get<double>(), jc.at("value").get<double>(),
                            jc.at("tolerance").get<double>()});
    return s;
}

std::string csv_format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    for (size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << csv_format(row[i]);
        f << "\n";
    }
}

namespace {

struct Frame {
    double x0 = 60, y0 = 20, w = 440, h = 280;  // plot area inside 560x360
};

std::string svg_header(const std::string& title) {
    std::string s =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"360\" "
        "viewBox=\"0 0 560 360\">\n";
    s += "<rect width=\"560\" height=\"360\" fill=\"white\"/>\n";
    s += "<text x=\"280\" y=\"16\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"monospace\">" +
         title + "</text>\n";
    return s;
}

}  // namespace

std::string svg_loglog(const std::string& title, const std::vector<double>& x,
                       const std::vector<double>& y) {
    Frame fr;
    std::string s = svg_header(title);
    s += "<rect x=\"" + csv_format(fr.x0) + "\" y=\"" + csv_format(fr.y0) + "\" width=\"" +
         csv_format(fr.w) + "\" height=\"" + csv_format(fr.h) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    if (!x.empty()) {
        double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
        std::vector<double> lx(x.size()), ly(y.size());
        for (size_t i = 0; i < x.size(); ++i) {
            lx[i] = std::log10(std::max(x[i], 1e-300));
            ly[i] = std::log10(std::max(y[i], 1e-300));
            lx0 = std::min(lx0, lx[i]);
            lx1 = std::max(lx1, lx[i]);
            ly0 = std::min(ly0, ly[i]);
            ly1 = std::max(ly1, ly[i]);
        }
        if (lx1 - lx0 < 1e-12) lx1 = lx0 + 1;
        if (ly1 - ly0 < 1e-12) ly1 = ly0 + 1;
        std::string path = "M";
        bool monotone = true;
        for (size_t i = 0; i < lx.size(); ++i) {
            double px = fr.x0 + (lx[i] - lx0) / (lx1 - lx0) * fr.w;
            double py = fr.y0 + fr.h - (ly[i] - ly0) / (ly1 - ly0) * fr.h;
            path += (i ? " L" : "") + std::string(" ") + csv_format(px) + " " + csv_format(py);
            if (i > 0 && y[i] > y[i - 1]) monotone = false;
        }
        s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n";
        for (size_t i = 0; i < lx.size(); ++i) {
            double px = fr.x0 + (lx[i] - lx0) / (lx1 - lx0) * fr.w;
            double py = fr.y0 + fr.h - (ly[i] - ly0) / (ly1 - ly0) * fr.h;
            s += "<circle cx=\"" + csv_format(px) + "\" cy=\"" + csv_format(py) +
                 "\" r=\"2.5\" fill=\"steelblue\"/>\n";
        }
        s += "<text x=\"60\" y=\"340\" font-size=\"11\" font-family=\"monospace\">trend: ";
        s += monotone ? "monotone decreasing" : "not monotone";
        s += "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string svg_bars(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values) {
    Frame fr;
    std::string s = svg_header(title);
    double vmin = 0, vmax = 0;
    for (double v : values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (vmax - vmin < 1e-12) vmax = vmin + 1;
    auto ypix = [&](double v) { return fr.y0 + fr.h - (v - vmin) / (vmax - vmin) * fr.h; };
    // zero line
    s += "<line x1=\"" + csv_format(fr.x0) + "\" x2=\"" + csv_format(fr.x0 + fr.w) +
         "\" y1=\"" + csv_format(ypix(0)) + "\" y2=\"" + csv_format(ypix(0)) +
         "\" stroke=\"black\" stroke-dasharray=\"3 2\"/>\n";
    double bw = values.empty() ? fr.w : fr.w / static_cast<double>(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        double x = fr.x0 + bw * static_cast<double>(i) + bw * 0.15;
        double y_top = std::min(ypix(values[i]), ypix(0));
        double hgt = std::fabs(ypix(values[i]) - ypix(0));
        s += "<rect x=\"" + csv_format(x) + "\" y=\"" + csv_format(y_top) + "\" width=\"" +
             csv_format(bw * 0.7) + "\" height=\"" + csv_format(hgt) + "\" fill=\"" +
             (values[i] >= 0 ? "seagreen" : "firebrick") + "\"/>\n";
        if (i < labels.size())
            s += "<text x=\"" + csv_format(x + bw * 0.35) +
                 "\" y=\"350\" text-anchor=\"middle\" font-size=\"9\" "
                 "font-family=\"monospace\">" +
                 labels[i] + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

void render_report(const Summary& summary, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<std::string> labels;
    std::vector<double> margins;
    std::vector<std::vector<double>> rows;
    for (const auto& c : summary.checks) {
        labels.push_back(c.name.size() > 10 ? c.name.substr(0, 10) : c.name);
        margins.push_back(c.margin);
        rows.push_back({c.pass ? 1.0 : 0.0, c.value, c.margin, c.tolerance});
    }
    write_csv(out_dir + "/checks.csv", {"pass", "value", "margin", "tolerance"}, rows);
    {
        std::ofstream f(out_dir + "/margins.svg");
        f << svg_bars(summary.experiment + " margins", labels, margins);
    }
    // convergence-style plot when margins carry a decreasing sequence
    std::vector<double> xs, ys;
    for (size_t i = 0; i < summary.checks.size(); ++i) {
        xs.push_back(static_cast<double>(i + 1));
        ys.push_back(std::fabs(summary.checks[i].value) + 1e-300);
    }
    {
        std::ofstream f(out_dir + "/values.svg");
        f << svg_loglog(summary.experiment + " check values", xs, ys);
    }
    save_json(out_dir + "/summary.json", summary.to_json());
}

}  // namespace ym
