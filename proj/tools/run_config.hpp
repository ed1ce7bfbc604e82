#pragma once

// Simulation run file (JSON, schema_version 1).
//
//   {
//     "schema_version": 1,
//     "mode":           {"n": 1, "ell": 1.0},
//     "control":        {"tau": 1.5, "alpha": 5.0},
//     "physical":       {"l": 10.0, "c": 1.118},                  optional
//     "discretization": {"dx": 0.05, "dt": 0.005, "t_final": 100.0,
//                        "snap_dt": false, "energy_weight": 0.5},   last two optional
//     "initial":        {"zeta0": 1.0, "zeta1": 0.0},              optional
//     "outputs":        {"directory": "out", "snapshot_times": [0, 50],
//                        "energy_stride": 10, "fit_window": [30, 100]}  all optional
//   }
//
// Without "physical" the run is dimensionless: unit wave speed on (0, ell).
// Times in "discretization", "outputs" and "initial.zeta1" use the run's own clock.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "delaystab/errors.hpp"
#include "delaystab/fdtd.hpp"
#include "delaystab/stability.hpp"

namespace delaystab::cli {

class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct PhysicalString {
    double l = 10.0;
    double c = 1.0;
};

struct RunConfig {
    ModeSpec mode;
    double tau = 0.0;
    double alpha = 0.0;  // 0 = uncontrolled
    std::optional<PhysicalString> physical;
    Discretization discretization;
    double zeta0 = 1.0;
    double zeta1 = 0.0;

    std::optional<std::string> directory;
    std::vector<double> snapshot_times;
    int energy_stride = 10;
    std::optional<std::pair<double, double>> fit_window;

    SimConfig sim_config() const;
};

/// Throws ConfigError on unknown keys, missing fields, wrong types or non-finite numbers.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig parse_run_config_text(const std::string& text);

}  // namespace delaystab::cli
