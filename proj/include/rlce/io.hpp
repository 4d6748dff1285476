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

#pragma once

#include "rlce/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rlce {

inline constexpr std::string_view kCsvHeader = "trial,frame,estimator,snr_db,mse,ber,actions_taken,c_tilde,feedback_f";

/// One row per record in the given order. Reals use the shortest decimal
/// form that parses back to the same double; a missing BER is an empty field.
void write_csv(const std::vector<MetricRecord>& records, std::ostream& out);
void write_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path);

/// Inverse of write_csv. Throws InputError on malformed input.
std::vector<MetricRecord> read_csv(std::istream& in);

/// Parses a JSON experiment description. Absent keys keep their defaults;
/// unknown keys and type mismatches throw ConfigError.
ExperimentConfig config_from_json(std::string_view text);
ExperimentConfig config_from_file(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

/// gnuplot script plotting `csv_path` for the given subcommand.
void write_gnuplot_script(std::string_view subcommand, const std::filesystem::path& csv_path, std::ostream& out);

} // namespace rlce
