#pragma once
// CSV-emitting front end. Preset sweeps, `[section] key = value` config files
// (flags win over file keys), extrema post-processing of emitted CSVs.
// Exit codes: 0 ok, 1 argument/config error, 2 numerical failure.

#include "qsl/boson.hpp"
#include "qsl/chain.hpp"
#include "qsl/core.hpp"

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsl {

inline constexpr const char* kVersion = "1.0.0";

enum class Model { boson, chain, chain_exact };
enum class BoundSel { mt, ml, both };

// argument/config-phase failure -> exit 1 (numerical failures surface as the
// std:: exceptions thrown by the model modules -> exit 2)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Model model = Model::boson;
    DriveParams drive{};
    ChainParams chain{};
    std::vector<double> tau_list;  // explicit tau values; wins over tau_max
    double tau_max = 0.0;          // else tau_j = j*tau_max/tau_steps, j = 1..tau_steps
    std::size_t tau_steps = 0;
    BoundSel bound = BoundSel::both;
    double dt = 0.0;       // observable grid step override; 0 = module default
    std::string out;       // output path; empty = stdout
    std::string preset = "custom";
    bool strict = false;        // compare: exit 2 when rel_err > rel_bound
    double rel_bound = 0.05;    // compare tolerance used with strict

    bool operator==(const RunConfig&) const = default;
};

// frozen preset configs: fig1 fig2 fig3 table1 compare (throws ConfigError)
RunConfig preset_config(const std::string& name);

// resolved tau values for a run (tau_list, else the tau_max/tau_steps ladder,
// else the single default tau = 100)
std::vector<double> resolve_taus(const RunConfig& cfg);

// `[section] key = value` text; a `preset` key is expanded first, remaining
// keys apply in file order; unknown keys/sections are ConfigErrors
void apply_config_text(RunConfig& cfg, const std::string& text);

// config file serialization; parsing the output reproduces cfg exactly
std::string dump_config(const RunConfig& cfg);

// re-validates the target module's parameter constraints (ConfigError)
void validate_config(const RunConfig& cfg);

unsigned env_threads();  // QSL_THREADS; 0 or unset/garbage = auto

// full CSV body for boson/chain/chain-exact runs (header, column row, one
// data row per tau; 9 significant digits; empty fields where a bound is
// undefined or deselected)
std::string run_csv(const RunConfig& cfg);

// perturbative-vs-exact comparison rows; worst_rel_err (may be nullptr)
// receives the largest finite rel_err, or +inf when validity disagrees
std::string compare_csv(const RunConfig& cfg, double* worst_rel_err);

// extrema/stationarity table computed from a previously emitted sweep CSV
std::string extrema_csv(const std::string& input_text, BoundSel bound,
                        const std::string& input_name);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsl
