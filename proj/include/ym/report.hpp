#ifndef YM_REPORT_HPP
#define YM_REPORT_HPP

#include <string>
#include <vector>

#include "ym/serialize.hpp"

namespace ym {

// One verified check inside an experiment summary.
struct CheckResult {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // signed distance to the tolerance (>= 0 passes)
    double value = 0.0;
    double tolerance = 0.0;
};

struct Summary {
    std::string experiment;
    uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    json to_json() const;
    static Summary from_json(const json& j);
};

// Deterministic CSV: fixed %.12g formatting, no locale, '\n' endings.
std::string csv_format(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Static SVG plots (no timestamps, deterministic output).
std::string svg_loglog(const std::string& title, const std::vector<double>& x,
                       const std::vector<double>& y);
std::string svg_bars(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values);

// Renders a summary into an SVG/CSV bundle under out_dir.
void render_report(const Summary& summary, const std::string& out_dir);

}  // namespace ym

#endif
