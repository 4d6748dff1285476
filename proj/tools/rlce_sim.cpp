// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// rlce-sim: experiment runner for LS / LMMSE / learned-denoising channel estimation.
//
//   rlce-sim mse-vs-snr --config cfg.json --seed 7 --out mse.csv
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure, 1 other errors.

#include "rlce/errors.hpp"
#include "rlce/harness.hpp"
#include "rlce/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::optional<double> snr_db;
    std::optional<double> rho;
    std::optional<std::size_t> frames;
    std::optional<std::size_t> state_dim;
    std::optional<std::size_t> trials;
    std::string gnuplot_path;
    bool print_config = false;
};

rlce::ExperimentConfig resolve(const Overrides& o) {
    rlce::ExperimentConfig cfg = o.config_path.empty() ? rlce::ExperimentConfig{} : rlce::config_from_file(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.snr_db) {
        cfg.snr_schedule = {{0, *o.snr_db}};
        cfg.snr_points = {*o.snr_db};
    }
    if (o.rho) cfg.correlation_rho = *o.rho;
    if (o.frames) cfg.num_frames = *o.frames;
    if (o.state_dim) {
        cfg.denoiser.state_dim = *o.state_dim;
        cfg.sweep_state_dims = {*o.state_dim};
    }
    if (o.trials) cfg.trials = *o.trials;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo link simulator for learned successive channel denoising"};
    app.require_subcommand(1);

    Overrides o;
    using Runner = std::function<std::vector<rlce::MetricRecord>(const rlce::ExperimentConfig&)>;
    const std::map<std::string, std::pair<std::string, Runner>> commands{
        {"learning-curve", {"MSE vs learning iterations on a fixed channel set", rlce::run_learning_curve}},
        {"mse-vs-frames", {"MSE per frame, i.i.d. or Gauss-Markov channels", rlce::run_mse_vs_frames}},
        {"snr-switch", {"MSE per frame under an SNR schedule, with stale LMMSE", rlce::run_snr_switch}},
        {"mse-vs-snr", {"Steady-state MSE at each SNR point", rlce::run_mse_vs_snr}},
        {"ber-vs-snr", {"Uncoded QPSK BER with zero forcing at each SNR point", rlce::run_ber_vs_snr}},
    };

    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--out", o.out_path, "CSV output path (stdout if omitted)");
        sub->add_option("--snr-db", o.snr_db, "single SNR for schedule and sweep");
        sub->add_option("--rho", o.rho, "Gauss-Markov correlation factor");
        sub->add_option("--frames", o.frames, "frames (or learning iterations)");
        sub->add_option("--state-dim", o.state_dim, "denoiser state dimension M");
        sub->add_option("--trials", o.trials, "independent trials");
        sub->add_option("--gnuplot", o.gnuplot_path, "also write a gnuplot script here");
        sub->add_flag("--print-config", o.print_config, "print the resolved config as JSON to stderr");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const rlce::ExperimentConfig cfg = resolve(o);
        if (o.print_config) std::cerr << rlce::config_to_json(cfg) << '\n';

        const auto records = commands.at(name).second(cfg);
        if (o.out_path.empty())
            rlce::write_csv(records, std::cout);
        else
            rlce::write_csv(records, std::filesystem::path(o.out_path));

        if (!o.gnuplot_path.empty()) {
            std::ofstream gp(o.gnuplot_path);
            rlce::write_gnuplot_script(name, o.out_path.empty() ? "results.csv" : o.out_path, gp);
        }
    } catch (const rlce::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const rlce::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
