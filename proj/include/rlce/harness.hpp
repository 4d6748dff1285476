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

#include "rlce/channel.hpp"
#include "rlce/denoiser.hpp"
#include "rlce/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rlce {

enum class Estimator { ls, lmmse, lmmse_stale, rl_denoiser, perfect };

std::string_view to_string(Estimator e);
/// Throws ConfigError for unknown names.
Estimator estimator_from_string(std::string_view name);

struct SnrStep {
    std::size_t frame = 0;
    double snr_db = 0.0;

    bool operator==(const SnrStep&) const = default;
};

struct ExperimentConfig {
    std::size_t n_t = 4;
    std::size_t n_r = 4;
    std::size_t num_subcarriers = 32;
    std::size_t num_taps = 8;
    double total_power = 1.0;
    std::size_t data_symbols = 25;
    std::optional<double> pdp_decay; // taps; unset selects num_taps / 4

    std::vector<SnrStep> snr_schedule{{0, 6.0}};
    std::vector<double> snr_points{0.0, 3.0, 6.0, 9.0, 12.0};
    double correlation_rho = 0.0;

    std::size_t num_frames = 600;
    std::size_t train_frames = 500;
    std::size_t eval_frames = 200;

    std::vector<Estimator> estimators{Estimator::ls, Estimator::lmmse, Estimator::rl_denoiser};
    DenoiserConfig denoiser;

    // learning-curve sweep
    std::vector<std::size_t> sweep_state_dims{4, 8};
    std::vector<std::size_t> sweep_taps{8};

    std::uint64_t seed = 1;
    std::size_t trials = 1;

    double decay_for(std::size_t taps) const;
    /// Noise level in force at `frame` under the schedule.
    double snr_at(std::size_t frame) const;

    /// Throws ConfigError.
    void validate() const;
};

struct MetricRecord {
    std::size_t trial = 0;
    std::size_t frame = 0;
    std::string estimator;
    double snr_db = 0.0;
    double mse = 0.0;
    std::optional<double> ber;
    std::size_t actions_taken = 0;
    double c_tilde = 0.0;
    double feedback_f = 0.0;

    bool operator==(const MetricRecord&) const = default;
};

/// Mean squared error between estimates and the true frequency response,
/// averaged over all links and subcarriers.
double mse(const EstimateGrid& est, const ChannelRealization& truth);

/// Fixed channel set per (M, L) sweep point; fresh pilot noise every
/// iteration; one learner per sweep point. Tags are `rl_m<M>_l<L>` plus an
/// `ls_l<L>` reference. SNR is the first schedule entry.
std::vector<MetricRecord> run_learning_curve(const ExperimentConfig& config);

/// Frame-by-frame MSE of every configured estimator. rho = 0 redraws the
/// channel each frame, otherwise it evolves as a Gauss-Markov process. The SNR
/// follows the schedule.
std::vector<MetricRecord> run_mse_vs_frames(const ExperimentConfig& config);

/// run_mse_vs_frames with lmmse and lmmse_stale always included.
std::vector<MetricRecord> run_snr_switch(const ExperimentConfig& config);

/// For each SNR point a fresh learner trains for train_frames then runs
/// eval_frames more. Frame indices are global: point j covers frames
/// [j * T, (j + 1) * T) with T = train_frames + eval_frames.
std::vector<MetricRecord> run_mse_vs_snr(const ExperimentConfig& config);

/// Same frame layout as run_mse_vs_snr. Every frame also carries D QPSK data
/// vectors per subcarrier through the true channel; each estimator (plus a
/// perfect-CSI arm) equalizes them with zero forcing and reports its
/// uncoded bit error rate.
std::vector<MetricRecord> run_ber_vs_snr(const ExperimentConfig& config);

/// Bits carried per frame by run_ber_vs_snr.
std::size_t bits_per_frame(const ExperimentConfig& config);

/// Stable sort by (trial, frame, estimator).
void sort_records(std::vector<MetricRecord>& records);

} // namespace rlce
