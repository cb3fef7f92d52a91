#ifndef YM_CONFIG_HPP
#define YM_CONFIG_HPP

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ym/parallel.hpp"
#include "ym/report.hpp"

namespace ym {

// Minimal TOML subset: [section] headers, key = value with strings,
// numbers, booleans and flat arrays, # comments. Keys flatten to
// "section.key".
struct TomlValue {
    std::variant<std::string, double, bool, std::vector<double>,
                 std::vector<std::string>>
        v;

    const std::string& as_string() const { return std::get<std::string>(v); }
    double as_number() const { return std::get<double>(v); }
    bool as_bool() const { return std::get<bool>(v); }
    const std::vector<double>& as_numbers() const { return std::get<std::vector<double>>(v); }
};

using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);
TomlTable load_toml(const std::string& path);

// "2^-k,k=4..12" or "1/k,k=2..512,*2" or a plain array in the table.
std::vector<double> parse_eps_schedule(const std::string& s);

// Runs the experiment described by a config file. Writes the declared
// artifacts plus <out_dir>/summary.json. Unknown keys are hard errors.
// Exit code: 0 all checks pass, 1 config error, 2 tolerance failure.
struct RunResult {
    int exit_code = 0;
    Summary summary;
    std::vector<std::string> artifacts;
    std::string error;
};

RunResult run_experiment(const std::string& config_path);

}  // namespace ym

#endif
