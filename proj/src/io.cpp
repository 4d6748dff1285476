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

#include "rlce/io.hpp"

#include "rlce/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rlce {

using nlohmann::json;

namespace {

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
    T v{};
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw InputError("line " + std::to_string(line) + ": bad numeric field '" + std::string(field) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// ------------------------------------------------------------ JSON helpers

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read_field(const json& obj, const char* key, T& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
            if (!it->is_number_unsigned()) throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
        }
        dst = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("'") + key + "': " + e.what());
    }
}

DenoiserConfig denoiser_from_json(const json& j) {
    reject_unknown(j,
                   {"state_dim", "quant_step", "learning_rate", "discount", "epsilon", "max_actions_per_frame",
                    "threshold_floor_fraction", "pool_sigma0"},
                   "denoiser");
    DenoiserConfig d;
    read_field(j, "state_dim", d.state_dim);
    read_field(j, "quant_step", d.quant_step);
    read_field(j, "learning_rate", d.learning_rate);
    read_field(j, "discount", d.discount);
    read_field(j, "epsilon", d.epsilon);
    read_field(j, "max_actions_per_frame", d.max_actions_per_frame);
    read_field(j, "threshold_floor_fraction", d.threshold_floor_fraction);
    read_field(j, "pool_sigma0", d.pool_sigma0);
    return d;
}

template <typename T>
std::vector<T> read_list(const json& j, const char* key) {
    if (!j.is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
    std::vector<T> out;
    for (const auto& item : j) {
        if constexpr (std::is_same_v<T, double>) {
            if (!item.is_number()) throw ConfigError(std::string("'") + key + "' entries must be numbers");
        } else {
            if (!item.is_number_unsigned())
                throw ConfigError(std::string("'") + key + "' entries must be nonnegative integers");
        }
        out.push_back(item.get<T>());
    }
    return out;
}

} // namespace

// ------------------------------------------------------------ CSV

void write_csv(const std::vector<MetricRecord>& records, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.trial << ',' << r.frame << ',' << r.estimator << ',' << format_real(r.snr_db) << ','
            << format_real(r.mse) << ',' << (r.ber ? format_real(*r.ber) : std::string()) << ',' << r.actions_taken
            << ',' << format_real(r.c_tilde) << ',' << format_real(r.feedback_f) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing CSV output");
}

void write_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_csv(records, out);
}

std::vector<MetricRecord> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw InputError("missing or unexpected CSV header");
    std::vector<MetricRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 9) throw InputError("line " + std::to_string(line_no) + ": expected 9 fields");
        MetricRecord r;
        r.trial = parse_number<std::size_t>(fields[0], line_no);
        r.frame = parse_number<std::size_t>(fields[1], line_no);
        r.estimator = std::string(fields[2]);
        r.snr_db = parse_number<double>(fields[3], line_no);
        r.mse = parse_number<double>(fields[4], line_no);
        if (!fields[5].empty()) r.ber = parse_number<double>(fields[5], line_no);
        r.actions_taken = parse_number<std::size_t>(fields[6], line_no);
        r.c_tilde = parse_number<double>(fields[7], line_no);
        r.feedback_f = parse_number<double>(fields[8], line_no);
        records.push_back(std::move(r));
    }
    return records;
}

// ------------------------------------------------------------ config

ExperimentConfig config_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"n_t", "n_r", "num_subcarriers", "num_taps", "total_power", "data_symbols", "pdp_decay",
                    "snr_schedule", "snr_points", "correlation_rho", "num_frames", "train_frames", "eval_frames",
                    "estimators", "denoiser", "sweep_state_dims", "sweep_taps", "seed", "trials"},
                   "experiment config");

    ExperimentConfig c;
    read_field(j, "n_t", c.n_t);
    read_field(j, "n_r", c.n_r);
    read_field(j, "num_subcarriers", c.num_subcarriers);
    read_field(j, "num_taps", c.num_taps);
    read_field(j, "total_power", c.total_power);
    read_field(j, "data_symbols", c.data_symbols);
    if (auto it = j.find("pdp_decay"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) throw ConfigError("'pdp_decay' must be a number");
        c.pdp_decay = it->get<double>();
    }
    if (auto it = j.find("snr_schedule"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("'snr_schedule' must be an array");
        c.snr_schedule.clear();
        for (const auto& step : *it) {
            reject_unknown(step, {"frame", "snr_db"}, "snr_schedule entry");
            if (!step.contains("frame") || !step.contains("snr_db"))
                throw ConfigError("snr_schedule entries need 'frame' and 'snr_db'");
            SnrStep s;
            read_field(step, "frame", s.frame);
            read_field(step, "snr_db", s.snr_db);
            c.snr_schedule.push_back(s);
        }
    }
    if (auto it = j.find("snr_points"); it != j.end()) c.snr_points = read_list<double>(*it, "snr_points");
    read_field(j, "correlation_rho", c.correlation_rho);
    read_field(j, "num_frames", c.num_frames);
    read_field(j, "train_frames", c.train_frames);
    read_field(j, "eval_frames", c.eval_frames);
    if (auto it = j.find("estimators"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("'estimators' must be an array");
        c.estimators.clear();
        for (const auto& name : *it) {
            if (!name.is_string()) throw ConfigError("'estimators' entries must be strings");
            c.estimators.push_back(estimator_from_string(name.get<std::string>()));
        }
    }
    if (auto it = j.find("denoiser"); it != j.end()) c.denoiser = denoiser_from_json(*it);
    if (auto it = j.find("sweep_state_dims"); it != j.end())
        c.sweep_state_dims = read_list<std::size_t>(*it, "sweep_state_dims");
    if (auto it = j.find("sweep_taps"); it != j.end()) c.sweep_taps = read_list<std::size_t>(*it, "sweep_taps");
    read_field(j, "seed", c.seed);
    read_field(j, "trials", c.trials);

    c.validate();
    return c;
}

ExperimentConfig config_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["n_t"] = c.n_t;
    j["n_r"] = c.n_r;
    j["num_subcarriers"] = c.num_subcarriers;
    j["num_taps"] = c.num_taps;
    j["total_power"] = c.total_power;
    j["data_symbols"] = c.data_symbols;
    j["pdp_decay"] = c.pdp_decay ? json(*c.pdp_decay) : json(nullptr);
    j["snr_schedule"] = json::array();
    for (const auto& s : c.snr_schedule) j["snr_schedule"].push_back({{"frame", s.frame}, {"snr_db", s.snr_db}});
    j["snr_points"] = c.snr_points;
    j["correlation_rho"] = c.correlation_rho;
    j["num_frames"] = c.num_frames;
    j["train_frames"] = c.train_frames;
    j["eval_frames"] = c.eval_frames;
    j["estimators"] = json::array();
    for (auto e : c.estimators) j["estimators"].push_back(std::string(to_string(e)));
    j["denoiser"] = {{"state_dim", c.denoiser.state_dim},
                     {"quant_step", c.denoiser.quant_step},
                     {"learning_rate", c.denoiser.learning_rate},
                     {"discount", c.denoiser.discount},
                     {"epsilon", c.denoiser.epsilon},
                     {"max_actions_per_frame", c.denoiser.max_actions_per_frame},
                     {"threshold_floor_fraction", c.denoiser.threshold_floor_fraction},
                     {"pool_sigma0", c.denoiser.pool_sigma0}};
    j["sweep_state_dims"] = c.sweep_state_dims;
    j["sweep_taps"] = c.sweep_taps;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    return j.dump(2);
}

void write_gnuplot_script(std::string_view subcommand, const std::filesystem::path& csv_path, std::ostream& out) {
    const bool versus_snr = subcommand == "mse-vs-snr" || subcommand == "ber-vs-snr";
    const bool ber = subcommand == "ber-vs-snr";
    out << "# gnuplot script for " << subcommand << "\n"
        << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set logscale y\n"
        << "set grid\n"
        << "file = '" << csv_path.string() << "'\n";
    if (versus_snr) {
        out << "set xlabel 'SNR [dB]'\n"
            << "set ylabel '" << (ber ? "BER" : "MSE") << "'\n"
            << "# per-frame values; average with e.g. `stats` or an external tool before plotting curves\n"
            << "plot for [est in 'ls lmmse rl_denoiser perfect'] file using 4:(strcol(3) eq est ? $"
            << (ber ? 6 : 5) << " : 1/0) with points title est\n";
    } else {
        out << "set xlabel 'frame'\n"
            << "set ylabel 'MSE'\n"
            << "plot for [est in 'ls lmmse lmmse_stale rl_denoiser rl_m4_l8 rl_m8_l8'] file using 2:(strcol(3) eq est ? $5 : 1/0) "
               "with lines title est\n";
    }
}

} // namespace rlce
