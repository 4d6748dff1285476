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

#include "rlce/harness.hpp"

#include "rlce/errors.hpp"
#include "rlce/link.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <tuple>

namespace rlce {

namespace {

// Per-trial random stream ids; see derive_seed().
enum Stream : std::uint64_t { channel_stream = 0, pilot_stream = 1, noise_stream = 2, learner_stream = 3, data_stream = 4 };

MetricRecord make_record(std::size_t trial, std::size_t frame, std::string tag, double snr_db, double mse_value = 0.0) {
    MetricRecord rec;
    rec.trial = trial;
    rec.frame = frame;
    rec.estimator = std::move(tag);
    rec.snr_db = snr_db;
    rec.mse = mse_value;
    return rec;
}

bool contains(const std::vector<Estimator>& list, Estimator e) {
    return std::find(list.begin(), list.end(), e) != list.end();
}

/// LMMSE filters keyed by noise variance; rebuilding a K x K solve every
/// frame would dominate the run time.
class FilterCache {
public:
    explicit FilterCache(CMatrix correlation) : correlation_(std::move(correlation)) {}

    const LmmseFilter& get(double noise_variance) {
        auto it = filters_.find(noise_variance);
        if (it == filters_.end())
            it = filters_.emplace(noise_variance, LmmseFilter(correlation_, NoiseSpec{noise_variance})).first;
        return it->second;
    }

private:
    CMatrix correlation_;
    std::map<double, LmmseFilter> filters_;
};

/// One trial: its random streams, its channel trajectory and its learner.
class TrialSimulator {
public:
    TrialSimulator(const ExperimentConfig& config, std::size_t trial)
        : config_(config),
          trial_(trial),
          pdp_(make_exponential_pdp(config.num_taps, config.total_power, config.decay_for(config.num_taps))),
          filters_(channel_correlation(pdp_, config.num_subcarriers)),
          channel_rng_(derive_seed(config.seed, trial, channel_stream)),
          pilot_rng_(derive_seed(config.seed, trial, pilot_stream)),
          noise_rng_(derive_seed(config.seed, trial, noise_stream)),
          learner_rng_(derive_seed(config.seed, trial, learner_stream)),
          data_rng_(derive_seed(config.seed, trial, data_stream)) {
        reset_learner();
    }

    void reset_learner() {
        learner_ = std::make_unique<SuccessiveDenoiser>(config_.denoiser, config_.num_taps, config_.total_power);
    }

    /// Draws a fresh channel, or evolves the previous one when correlated.
    const ChannelRealization& advance_channel() {
        if (channel_ && config_.correlation_rho > 0.0)
            channel_ = evolve_channel(*channel_, pdp_, config_.correlation_rho, channel_rng_);
        else
            channel_ = draw_channel(pdp_, config_.n_r, config_.n_t, config_.num_subcarriers, channel_rng_);
        return *channel_;
    }

    /// Runs the pilot phase for the current channel and appends one record per
    /// configured estimator. Returns the per-estimator estimates for data use.
    std::map<Estimator, EstimateGrid> estimate(std::size_t frame, double snr_db, double stale_snr_db,
                                               std::vector<MetricRecord>& out) {
        const ChannelRealization& ch = *channel_;
        const NoiseSpec noise = NoiseSpec::from_snr_db(snr_db, config_.total_power);
        const PilotPlan pilots = generate_pilots(config_.n_t, config_.num_subcarriers, pilot_rng_);
        const EstimateGrid ls = ls_estimate(transmit_pilots(ch, pilots, noise, noise_rng_), pilots);

        std::map<Estimator, EstimateGrid> estimates;
        for (Estimator e : config_.estimators) {
            MetricRecord rec = make_record(trial_, frame, std::string(to_string(e)), snr_db);
            EstimateGrid est;
            switch (e) {
            case Estimator::ls:
                est = ls;
                break;
            case Estimator::lmmse:
                est = filters_.get(noise.variance).apply(ls);
                break;
            case Estimator::lmmse_stale:
                est = filters_.get(NoiseSpec::from_snr_db(stale_snr_db, config_.total_power).variance).apply(ls);
                break;
            case Estimator::rl_denoiser: {
                est = ls;
                const FrameReport report = learner_->denoise(est, learner_rng_);
                rec.actions_taken = report.actions_taken;
                rec.c_tilde = report.c_tilde;
                rec.feedback_f = learner_->threshold().feedback;
                break;
            }
            case Estimator::perfect:
                est = ch.freq;
                break;
            }
            rec.mse = mse(est, ch);
            out.push_back(std::move(rec));
            estimates.emplace(e, std::move(est));
        }
        return estimates;
    }

    /// Sends D QPSK vectors per subcarrier through the current channel and
    /// returns the bit error count for each estimate.
    std::map<Estimator, std::size_t> data_phase(double snr_db, const std::map<Estimator, EstimateGrid>& estimates) {
        const ChannelRealization& ch = *channel_;
        const std::size_t K = config_.num_subcarriers, nt = config_.n_t, nr = config_.n_r;
        const NoiseSpec noise = NoiseSpec::from_snr_db(snr_db, config_.total_power);

        std::map<Estimator, std::size_t> errors;
        for (const auto& [e, est] : estimates) errors[e] = 0;

        std::vector<std::uint8_t> bits(2 * nt);
        CMatrix h_true(nr, nt), h_est(nr, nt);
        std::vector<CMatrix> equalizers(estimates.size());
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t q = 0; q < nr; ++q)
                for (std::size_t p = 0; p < nt; ++p) h_true(q, p) = ch.freq(q, p, k);
            std::size_t idx = 0;
            for (const auto& [e, est] : estimates) {
                for (std::size_t q = 0; q < nr; ++q)
                    for (std::size_t p = 0; p < nt; ++p) h_est(q, p) = est(q, p, k);
                equalizers[idx++] = zf_matrix(h_est);
            }
            for (std::size_t d = 0; d < config_.data_symbols; ++d) {
                for (auto& b : bits) b = data_rng_.bit() ? 1 : 0;
                const auto symbols = qpsk_modulate(bits);
                CVector x(nt), y(nr);
                for (std::size_t p = 0; p < nt; ++p) x(static_cast<long>(p)) = symbols[p];
                y = h_true * x;
                for (std::size_t q = 0; q < nr; ++q) y(static_cast<long>(q)) += noise_rng_.complex_gaussian(noise.variance);

                idx = 0;
                for (auto& [e, count] : errors) {
                    const CVector x_hat = equalizers[idx++] * y;
                    const auto decided = qpsk_demodulate(std::span<const cplx>(x_hat.data(), nt));
                    for (std::size_t i = 0; i < bits.size(); ++i) count += decided[i] != bits[i];
                }
            }
        }
        return errors;
    }

    SuccessiveDenoiser& learner() { return *learner_; }

private:
    const ExperimentConfig& config_;
    std::size_t trial_;
    PdpProfile pdp_;
    FilterCache filters_;
    RandomStream channel_rng_, pilot_rng_, noise_rng_, learner_rng_, data_rng_;
    std::optional<ChannelRealization> channel_;
    std::unique_ptr<SuccessiveDenoiser> learner_;
};

void finish(std::vector<MetricRecord>& records) { sort_records(records); }

std::vector<MetricRecord> run_frames(const ExperimentConfig& config) {
    config.validate();
    std::vector<MetricRecord> records;
    const double stale_snr = config.snr_schedule.front().snr_db;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
        TrialSimulator sim(config, trial);
        for (std::size_t frame = 0; frame < config.num_frames; ++frame) {
            sim.advance_channel();
            sim.estimate(frame, config.snr_at(frame), stale_snr, records);
        }
    }
    finish(records);
    return records;
}

std::vector<MetricRecord> run_snr_sweep(const ExperimentConfig& config, bool with_data) {
    config.validate();
    const std::size_t per_point = config.train_frames + config.eval_frames;
    const std::size_t bits = bits_per_frame(config);
    std::vector<MetricRecord> records;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
        TrialSimulator sim(config, trial);
        for (std::size_t j = 0; j < config.snr_points.size(); ++j) {
            const double snr = config.snr_points[j];
            sim.reset_learner();
            for (std::size_t f = 0; f < per_point; ++f) {
                const std::size_t frame = j * per_point + f;
                sim.advance_channel();
                const std::size_t first = records.size();
                auto estimates = sim.estimate(frame, snr, snr, records);
                if (!with_data) continue;
                const auto errors = sim.data_phase(snr, estimates);
                for (std::size_t r = first; r < records.size(); ++r) {
                    const Estimator e = estimator_from_string(records[r].estimator);
                    records[r].ber = static_cast<double>(errors.at(e)) / static_cast<double>(bits);
                }
            }
        }
    }
    finish(records);
    return records;
}

} // namespace

std::string_view to_string(Estimator e) {
    switch (e) {
    case Estimator::ls: return "ls";
    case Estimator::lmmse: return "lmmse";
    case Estimator::lmmse_stale: return "lmmse_stale";
    case Estimator::rl_denoiser: return "rl_denoiser";
    case Estimator::perfect: return "perfect";
    }
    return "unknown";
}

Estimator estimator_from_string(std::string_view name) {
    for (Estimator e : {Estimator::ls, Estimator::lmmse, Estimator::lmmse_stale, Estimator::rl_denoiser,
                        Estimator::perfect})
        if (to_string(e) == name) return e;
    throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

double ExperimentConfig::decay_for(std::size_t taps) const {
    return pdp_decay ? *pdp_decay : static_cast<double>(taps) / 4.0;
}

double ExperimentConfig::snr_at(std::size_t frame) const {
    double snr = snr_schedule.front().snr_db;
    for (const auto& step : snr_schedule)
        if (step.frame <= frame) snr = step.snr_db;
    return snr;
}

void ExperimentConfig::validate() const {
    if (n_t == 0 || n_r == 0) throw ConfigError("antenna counts must be positive");
    if (n_t < n_r) throw ConfigError("zero forcing needs n_t >= n_r");
    if (num_taps == 0) throw ConfigError("num_taps must be positive");
    if (num_subcarriers < num_taps) throw ConfigError("num_subcarriers must be at least num_taps");
    if (!(total_power > 0.0)) throw ConfigError("total_power must be positive");
    if (data_symbols == 0) throw ConfigError("data_symbols must be positive");
    if (pdp_decay && !(*pdp_decay > 0.0)) throw ConfigError("pdp_decay must be positive");
    if (snr_schedule.empty() || snr_schedule.front().frame != 0)
        throw ConfigError("snr_schedule must start at frame 0");
    for (std::size_t i = 1; i < snr_schedule.size(); ++i)
        if (snr_schedule[i].frame <= snr_schedule[i - 1].frame)
            throw ConfigError("snr_schedule must be strictly increasing in frame");
    if (snr_points.empty()) throw ConfigError("snr_points must not be empty");
    if (!(correlation_rho >= 0.0 && correlation_rho <= 1.0)) throw ConfigError("correlation_rho must lie in [0, 1]");
    if (num_frames == 0) throw ConfigError("num_frames must be positive");
    if (train_frames + eval_frames == 0) throw ConfigError("train_frames + eval_frames must be positive");
    if (estimators.empty()) throw ConfigError("at least one estimator is required");
    for (std::size_t i = 0; i < estimators.size(); ++i)
        for (std::size_t j = i + 1; j < estimators.size(); ++j)
            if (estimators[i] == estimators[j]) throw ConfigError("duplicate estimator in list");
    if (trials == 0) throw ConfigError("trials must be positive");
    denoiser.validate();
    if (denoiser.state_dim > num_subcarriers) throw ConfigError("state_dim exceeds num_subcarriers");
    if (sweep_state_dims.empty() || sweep_taps.empty()) throw ConfigError("learning-curve sweep lists must not be empty");
    for (auto m : sweep_state_dims)
        if (m < 3 || m > num_subcarriers) throw ConfigError("sweep state_dim out of range");
    for (auto l : sweep_taps)
        if (l == 0 || l > num_subcarriers) throw ConfigError("sweep tap count out of range");
}

double mse(const EstimateGrid& est, const ChannelRealization& truth) {
    if (!est.same_shape(truth.freq)) throw InputError("estimate and channel dimensions differ");
    if (est.size() == 0) return 0.0;
    double acc = 0.0;
    auto a = est.flat();
    auto b = truth.freq.flat();
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

std::vector<MetricRecord> run_learning_curve(const ExperimentConfig& config) {
    config.validate();
    std::vector<MetricRecord> records;
    const double snr = config.snr_schedule.front().snr_db;
    const NoiseSpec noise = NoiseSpec::from_snr_db(snr, config.total_power);

    for (std::size_t trial = 0; trial < config.trials; ++trial) {
        for (std::size_t taps : config.sweep_taps) {
            const PdpProfile pdp = make_exponential_pdp(taps, config.total_power, config.decay_for(taps));
            // the same channel set and noise sequence for every state dimension
            RandomStream channel_rng(derive_seed(config.seed, trial, channel_stream + 16 * taps));
            const ChannelRealization ch = draw_channel(pdp, config.n_r, config.n_t, config.num_subcarriers, channel_rng);

            for (std::size_t m_index = 0; m_index < config.sweep_state_dims.size(); ++m_index) {
                DenoiserConfig dcfg = config.denoiser;
                dcfg.state_dim = config.sweep_state_dims[m_index];
                SuccessiveDenoiser learner(dcfg, taps, config.total_power);
                RandomStream pilot_rng(derive_seed(config.seed, trial, pilot_stream + 16 * taps));
                RandomStream noise_rng(derive_seed(config.seed, trial, noise_stream + 16 * taps));
                RandomStream learner_rng(derive_seed(config.seed, trial, learner_stream + 16 * taps));
                const std::string tag = "rl_m" + std::to_string(dcfg.state_dim) + "_l" + std::to_string(taps);
                const std::string ls_tag = "ls_l" + std::to_string(taps);

                for (std::size_t it = 0; it < config.num_frames; ++it) {
                    const PilotPlan pilots = generate_pilots(config.n_t, config.num_subcarriers, pilot_rng);
                    EstimateGrid est = ls_estimate(transmit_pilots(ch, pilots, noise, noise_rng), pilots);
                    if (m_index == 0) records.push_back(make_record(trial, it, ls_tag, snr, mse(est, ch)));
                    const FrameReport report = learner.denoise(est, learner_rng);
                    MetricRecord rec = make_record(trial, it, tag, snr, mse(est, ch));
                    rec.actions_taken = report.actions_taken;
                    rec.c_tilde = report.c_tilde;
                    rec.feedback_f = learner.threshold().feedback;
                    records.push_back(std::move(rec));
                }
            }
        }
    }
    finish(records);
    return records;
}

std::vector<MetricRecord> run_mse_vs_frames(const ExperimentConfig& config) { return run_frames(config); }

std::vector<MetricRecord> run_snr_switch(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    for (Estimator e : {Estimator::lmmse, Estimator::lmmse_stale})
        if (!contains(cfg.estimators, e)) cfg.estimators.push_back(e);
    return run_frames(cfg);
}

std::vector<MetricRecord> run_mse_vs_snr(const ExperimentConfig& config) { return run_snr_sweep(config, false); }

std::vector<MetricRecord> run_ber_vs_snr(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    if (!contains(cfg.estimators, Estimator::perfect)) cfg.estimators.push_back(Estimator::perfect);
    return run_snr_sweep(cfg, true);
}

std::size_t bits_per_frame(const ExperimentConfig& config) {
    return 2 * config.data_symbols * config.num_subcarriers * config.n_t;
}

void sort_records(std::vector<MetricRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
        return std::tie(a.trial, a.frame, a.estimator) < std::tie(b.trial, b.frame, b.estimator);
    });
}

} // namespace rlce
