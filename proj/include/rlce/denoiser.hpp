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

// Successive frequency-domain denoising of LS channel estimates.
//
// An estimate H(k) is unreliable when the magnitude of its discrete curvature
// H(k+1) - 2 H(k) + H(k-1) (circular in k) exceeds a working threshold. The
// threshold starts from an analytic bound on the expected curvature of an
// L-tap channel and is lowered by accumulated feedback on leftover noise
// power. Denoising one estimate moves it radially onto the circle of radius
// threshold/2 around the midpoint of its neighbours. The order in which
// estimates inside a window of M subcarriers are denoised is learned with
// tabular Q-learning over quantized windows.

#pragma once

#include "rlce/grid.hpp"
#include "rlce/random.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

namespace rlce {

struct DenoiserConfig {
    std::size_t state_dim = 8;      // M, subcarriers per state window
    double quant_step = 0.2;        // quantizer step for state keys
    double learning_rate = 0.3;     // alpha; 0 freezes the table
    double discount = 1.0;          // gamma
    double epsilon = 0.5;           // exploration probability
    std::size_t max_actions_per_frame = 0; // 0 selects 100 * K * N_t * N_r
    double threshold_floor_fraction = 0.1;
    // Average the per-frame first-tap power estimates over all frames seen
    // instead of using the current frame alone.
    bool pool_sigma0 = true;

    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

/// Quantized state window: real and imaginary lattice indices, interleaved.
struct StateKey {
    std::vector<std::int64_t> lattice;

    bool operator==(const StateKey&) const = default;
    auto operator<=>(const StateKey&) const = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& key) const noexcept;
};

/// Tabular action values. Unseen (state, action) pairs read as zero.
class QTable {
public:
    explicit QTable(std::size_t num_actions = 0) : num_actions_(num_actions) {}

    std::size_t num_actions() const { return num_actions_; }
    std::size_t num_states() const { return table_.size(); }

    double value(const StateKey& s, std::size_t a) const;
    void set(const StateKey& s, std::size_t a, double v);

    /// Highest value among `actions` (zero if empty).
    double max_value(const StateKey& s, std::span<const std::size_t> actions) const;

    /// Text checkpoint. One header line `rlce-qtable 1 <num_actions> <rows>`
    /// then one row per stored state: 2 * num_actions lattice integers followed
    /// by num_actions values in hexadecimal floating point. Rows are sorted by key.
    void save(std::ostream& out) const;
    static QTable load(std::istream& in);

    bool operator==(const QTable& other) const;

private:
    std::size_t num_actions_;
    std::unordered_map<StateKey, std::vector<double>, StateKeyHash> table_;
};

struct ThresholdState {
    double c_bar = 0.0;    // analytic bound at the estimated first-tap power
    double c_tilde = 0.0;  // working threshold
    double feedback = 0.0; // cumulative leftover-noise feedback F
    double sigma0_sum = 0.0;      // running sum of per-frame first-tap power estimates
    std::size_t sigma0_frames = 0;
};

/// Discrete curvature at k with circular neighbours.
cplx curvature(std::span<const cplx> link, std::size_t k);
cplx curvature(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t k);

/// Estimate of the first-tap power: mean over links of |mean over k of H(k)|^2.
double sigma0_hat(const EstimateGrid& est);

/// Upper bound on E|C(k)| for an L-tap channel with power P whose first tap
/// carries sigma0_sq. sigma0_sq above P is clamped to P; negative inputs throw.
double curvature_bound(std::size_t num_subcarriers, std::size_t num_taps, double total_power, double sigma0_sq);

/// c_bar - (2 pi / K)^2 F, floored at floor_fraction * c_bar.
double adjusted_threshold(const ThresholdState& state, std::size_t num_subcarriers, double floor_fraction);

/// Nearest lattice point, halves rounded up: delta * floor(x / delta + 1/2) per component.
cplx quantize(cplx x, double delta);
std::int64_t quantize_index(double x, double delta);

/// Key for the window est[i .. i+M-1]. Windows never wrap.
StateKey make_state(std::span<const cplx> link, std::size_t window_start, const DenoiserConfig& config);
StateKey make_state(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t window_start,
                    const DenoiserConfig& config);

/// Offsets a in [0, M) whose curvature magnitude strictly exceeds c_tilde.
std::vector<std::size_t> action_set(std::span<const cplx> link, std::size_t window_start, double c_tilde,
                                    const DenoiserConfig& config);
std::vector<std::size_t> action_set(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t window_start,
                                    double c_tilde, const DenoiserConfig& config);

/// Moves est[k] radially onto the circle of radius c_tilde/2 around the
/// midpoint of its circular neighbours, leaving |curvature(k)| == c_tilde.
void apply_action_in_place(std::span<cplx> link, std::size_t k, double c_tilde);
EstimateGrid apply_action(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t k, double c_tilde);

/// Drop in spread around the pre-action mean, averaged over subcarriers.
double reward(std::span<const cplx> before, std::span<const cplx> after);
double reward(const EstimateGrid& before, const EstimateGrid& after, std::size_t q, std::size_t p);

/// Epsilon-greedy; greedy ties go to the smallest action index.
std::size_t select_action(const QTable& qtable, const StateKey& s, std::span<const std::size_t> actions,
                          double epsilon, RandomStream& rng);

/// One-step Q-learning backup. An empty next_actions marks a terminal state.
void q_update(QTable& qtable, const StateKey& s, std::size_t a, double r, const StateKey& s_next,
              std::span<const std::size_t> next_actions, const DenoiserConfig& config);

struct FrameReport {
    std::size_t actions_taken = 0;
    bool capped = false;         // safety cap ended the frame early
    bool bound_clamped = false;  // sigma0 estimate exceeded P
    double sigma0_sq = 0.0;      // first-tap power used for the bound
    double c_bar = 0.0;
    double c_tilde = 0.0;
    double delta_feedback = 0.0;
};

/// Denoises one frame of LS estimates in place, learning into `qtable` and
/// advancing the threshold feedback. Only the tap count and channel power are
/// used as prior knowledge.
FrameReport denoise_frame(EstimateGrid& est, QTable& qtable, ThresholdState& threshold, const DenoiserConfig& config,
                          std::size_t num_taps, double total_power, RandomStream& rng);

/// Persistent learner: one Q-table and one threshold trajectory across frames.
class SuccessiveDenoiser {
public:
    SuccessiveDenoiser(DenoiserConfig config, std::size_t num_taps, double total_power);

    FrameReport denoise(EstimateGrid& est, RandomStream& rng);

    const DenoiserConfig& config() const { return config_; }
    const QTable& qtable() const { return qtable_; }
    QTable& qtable() { return qtable_; }
    const ThresholdState& threshold() const { return threshold_; }

private:
    DenoiserConfig config_;
    std::size_t num_taps_;
    double total_power_;
    QTable qtable_;
    ThresholdState threshold_;
};

} // namespace rlce
