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

#include "rlce/denoiser.hpp"

#include "rlce/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace rlce {

namespace {

// Relative slack on the reliability test. A point placed exactly on the
// threshold circle can evaluate a few ulps above it after rounding; without
// slack it would be selected again forever.
constexpr double kBoundarySlack = 1e-12;

bool unreliable(double curvature_magnitude, double c_tilde) {
    return curvature_magnitude > c_tilde + kBoundarySlack * (1.0 + c_tilde);
}

bool any_unreliable(std::span<const cplx> link, double c_tilde) {
    for (std::size_t k = 0; k < link.size(); ++k)
        if (unreliable(std::abs(curvature(link, k)), c_tilde)) return true;
    return false;
}

cplx neighbour_midpoint(std::span<const cplx> link, std::size_t k) {
    const std::size_t K = link.size();
    const cplx prev = link[(k + K - 1) % K];
    const cplx next = link[(k + 1) % K];
    return 0.5 * (prev + next);
}

cplx mean_of(std::span<const cplx> link) {
    cplx acc{};
    for (const auto& v : link) acc += v;
    return acc / static_cast<double>(link.size());
}

void check_link(const EstimateGrid& est, std::size_t q, std::size_t p) {
    if (q >= est.n_r() || p >= est.n_t()) throw InputError("antenna index out of range");
}

std::string format_hex(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

double parse_hex(const std::string& token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto res = std::from_chars(first, last, v, std::chars_format::hex);
    if (res.ec != std::errc{} || res.ptr != last) throw InputError("malformed Q-table value '" + token + "'");
    return v;
}

} // namespace

void DenoiserConfig::validate() const {
    if (state_dim < 3) throw ConfigError("state_dim must be at least 3");
    if (!(quant_step > 0.0)) throw ConfigError("quant_step must be positive");
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must lie in [0, 1]");
    if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in [0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (!(threshold_floor_fraction > 0.0 && threshold_floor_fraction < 1.0))
        throw ConfigError("threshold_floor_fraction must lie in (0, 1)");
}

std::size_t StateKeyHash::operator()(const StateKey& key) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto v : key.lattice) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------- QTable

double QTable::value(const StateKey& s, std::size_t a) const {
    if (a >= num_actions_) throw InputError("action index out of range");
    auto it = table_.find(s);
    return it == table_.end() ? 0.0 : it->second[a];
}

void QTable::set(const StateKey& s, std::size_t a, double v) {
    if (a >= num_actions_) throw InputError("action index out of range");
    if (!std::isfinite(v)) throw NumericalError("non-finite Q value");
    auto [it, inserted] = table_.try_emplace(s, num_actions_, 0.0);
    it->second[a] = v;
}

double QTable::max_value(const StateKey& s, std::span<const std::size_t> actions) const {
    if (actions.empty()) return 0.0;
    auto it = table_.find(s);
    double best = -std::numeric_limits<double>::infinity();
    for (auto a : actions) {
        if (a >= num_actions_) throw InputError("action index out of range");
        best = std::max(best, it == table_.end() ? 0.0 : it->second[a]);
    }
    return best;
}

void QTable::save(std::ostream& out) const {
    std::map<StateKey, const std::vector<double>*> sorted;
    for (const auto& [key, values] : table_) sorted.emplace(key, &values);

    out << "rlce-qtable 1 " << num_actions_ << ' ' << sorted.size() << '\n';
    for (const auto& [key, values] : sorted) {
        for (auto v : key.lattice) out << v << ' ';
        for (std::size_t a = 0; a < values->size(); ++a) out << (a ? " " : "") << format_hex((*values)[a]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed to write Q-table");
}

QTable QTable::load(std::istream& in) {
    std::string magic;
    int version = 0;
    std::size_t num_actions = 0, rows = 0;
    if (!(in >> magic >> version >> num_actions >> rows) || magic != "rlce-qtable" || version != 1)
        throw InputError("not an rlce Q-table checkpoint");

    QTable table(num_actions);
    const std::size_t key_len = 2 * num_actions;
    for (std::size_t r = 0; r < rows; ++r) {
        StateKey key;
        key.lattice.resize(key_len);
        for (auto& v : key.lattice)
            if (!(in >> v)) throw InputError("truncated Q-table key at row " + std::to_string(r));
        std::vector<double> values(num_actions);
        for (auto& v : values) {
            std::string token;
            if (!(in >> token)) throw InputError("truncated Q-table values at row " + std::to_string(r));
            v = parse_hex(token);
            if (!std::isfinite(v)) throw InputError("non-finite Q value in checkpoint");
        }
        table.table_.insert_or_assign(std::move(key), std::move(values));
    }
    return table;
}

bool QTable::operator==(const QTable& other) const {
    if (num_actions_ != other.num_actions_) return false;
    // unseen entries read as zero, so an explicit all-zero row equals a missing one
    auto covered = [](const QTable& a, const QTable& b) {
        for (const auto& [key, values] : a.table_)
            for (std::size_t i = 0; i < values.size(); ++i)
                if (values[i] != b.value(key, i)) return false;
        return true;
    };
    return covered(*this, other) && covered(other, *this);
}

// ---------------------------------------------------------------- curvature and threshold

cplx curvature(std::span<const cplx> link, std::size_t k) {
    const std::size_t K = link.size();
    if (k >= K) throw InputError("subcarrier index out of range");
    return link[(k + 1) % K] - 2.0 * link[k] + link[(k + K - 1) % K];
}

cplx curvature(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t k) {
    check_link(est, q, p);
    return curvature(est.link(q, p), k);
}

double sigma0_hat(const EstimateGrid& est) {
    const std::size_t links = est.n_r() * est.n_t();
    if (links == 0 || est.len() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t q = 0; q < est.n_r(); ++q)
        for (std::size_t p = 0; p < est.n_t(); ++p) acc += std::norm(mean_of(est.link(q, p)));
    return acc / static_cast<double>(links);
}

double curvature_bound(std::size_t num_subcarriers, std::size_t num_taps, double total_power, double sigma0_sq) {
    if (num_subcarriers == 0 || num_taps == 0) throw ConfigError("curvature bound needs K >= 1 and L >= 1");
    if (total_power < 0.0 || sigma0_sq < 0.0) throw ConfigError("curvature bound inputs must be nonnegative");
    const double residual = total_power - std::min(sigma0_sq, total_power);

    double l4 = 0.0;
    for (std::size_t l = 1; l < num_taps; ++l) {
        const auto x = static_cast<double>(l);
        l4 += x * x * x * x;
    }
    const double xi = std::sqrt(2.0 * std::log(4.0)); // maximal inequality for 2 Gaussians, unit variance
    const double w = 2.0 * std::numbers::pi / static_cast<double>(num_subcarriers);
    return w * w * xi * std::sqrt(residual * l4);
}

double adjusted_threshold(const ThresholdState& state, std::size_t num_subcarriers, double floor_fraction) {
    const double w = 2.0 * std::numbers::pi / static_cast<double>(num_subcarriers);
    const double raw = state.c_bar - w * w * state.feedback;
    return std::max(raw, floor_fraction * state.c_bar);
}

// ---------------------------------------------------------------- MDP pieces

std::int64_t quantize_index(double x, double delta) {
    return static_cast<std::int64_t>(std::floor(x / delta + 0.5));
}

cplx quantize(cplx x, double delta) {
    return {delta * static_cast<double>(quantize_index(x.real(), delta)),
            delta * static_cast<double>(quantize_index(x.imag(), delta))};
}

StateKey make_state(std::span<const cplx> link, std::size_t window_start, const DenoiserConfig& config) {
    const std::size_t M = config.state_dim;
    if (M > link.size() || window_start > link.size() - M)
        throw InputError("state window start " + std::to_string(window_start) + " out of range");
    StateKey key;
    key.lattice.reserve(2 * M);
    for (std::size_t m = 0; m < M; ++m) {
        const cplx v = link[window_start + m];
        key.lattice.push_back(quantize_index(v.real(), config.quant_step));
        key.lattice.push_back(quantize_index(v.imag(), config.quant_step));
    }
    return key;
}

StateKey make_state(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t window_start,
                    const DenoiserConfig& config) {
    check_link(est, q, p);
    return make_state(est.link(q, p), window_start, config);
}

std::vector<std::size_t> action_set(std::span<const cplx> link, std::size_t window_start, double c_tilde,
                                    const DenoiserConfig& config) {
    const std::size_t M = config.state_dim;
    if (M > link.size() || window_start > link.size() - M)
        throw InputError("state window start " + std::to_string(window_start) + " out of range");
    std::vector<std::size_t> actions;
    for (std::size_t a = 0; a < M; ++a)
        if (unreliable(std::abs(curvature(link, window_start + a)), c_tilde)) actions.push_back(a);
    return actions;
}

std::vector<std::size_t> action_set(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t window_start,
                                    double c_tilde, const DenoiserConfig& config) {
    check_link(est, q, p);
    return action_set(est.link(q, p), window_start, c_tilde, config);
}

void apply_action_in_place(std::span<cplx> link, std::size_t k, double c_tilde) {
    if (k >= link.size()) throw InputError("subcarrier index out of range");
    const cplx z = neighbour_midpoint(link, k);
    const cplx offset = link[k] - z;
    const double dist = std::abs(offset);
    if (dist == 0.0) throw NumericalError("estimate coincides with its neighbour midpoint; no update direction");
    link[k] = z + (0.5 * c_tilde / dist) * offset;
}

EstimateGrid apply_action(const EstimateGrid& est, std::size_t q, std::size_t p, std::size_t k, double c_tilde) {
    check_link(est, q, p);
    EstimateGrid out = est;
    apply_action_in_place(out.link(q, p), k, c_tilde);
    return out;
}

double reward(std::span<const cplx> before, std::span<const cplx> after) {
    if (before.size() != after.size() || before.empty()) throw InputError("reward needs two equal, non-empty links");
    const cplx h0 = mean_of(before);
    double acc = 0.0;
    for (std::size_t k = 0; k < before.size(); ++k) acc += std::norm(before[k] - h0) - std::norm(after[k] - h0);
    return acc / static_cast<double>(before.size());
}

double reward(const EstimateGrid& before, const EstimateGrid& after, std::size_t q, std::size_t p) {
    if (!before.same_shape(after)) throw InputError("reward needs grids of equal shape");
    check_link(before, q, p);
    return reward(before.link(q, p), after.link(q, p));
}

std::size_t select_action(const QTable& qtable, const StateKey& s, std::span<const std::size_t> actions,
                          double epsilon, RandomStream& rng) {
    if (actions.empty()) throw InputError("cannot select from an empty action set");
    if (rng.uniform() < epsilon) return actions[rng.uniform_index(0, actions.size() - 1)];

    std::size_t best = actions.front();
    double best_value = qtable.value(s, best);
    for (auto a : actions.subspan(1)) {
        const double v = qtable.value(s, a);
        if (v > best_value || (v == best_value && a < best)) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

void q_update(QTable& qtable, const StateKey& s, std::size_t a, double r, const StateKey& s_next,
              std::span<const std::size_t> next_actions, const DenoiserConfig& config) {
    const double current = qtable.value(s, a);
    const double future = next_actions.empty() ? 0.0 : qtable.max_value(s_next, next_actions);
    const double updated = current + config.learning_rate * (r + config.discount * future - current);
    if (updated != current) qtable.set(s, a, updated);
}

// ---------------------------------------------------------------- frame loop

FrameReport denoise_frame(EstimateGrid& est, QTable& qtable, ThresholdState& threshold, const DenoiserConfig& config,
                          std::size_t num_taps, double total_power, RandomStream& rng) {
    config.validate();
    const std::size_t K = est.len();
    const std::size_t M = config.state_dim;
    if (K < M) throw ConfigError("state_dim exceeds the number of subcarriers");
    if (qtable.num_actions() != M) throw ConfigError("Q-table action count does not match state_dim");
    if (!(total_power > 0.0)) throw ConfigError("total channel power must be positive");

    const std::size_t links = est.n_r() * est.n_t();
    const std::size_t cap = config.max_actions_per_frame ? config.max_actions_per_frame : 100 * K * links;

    FrameReport report;
    const double frame_sigma0 = sigma0_hat(est);
    threshold.sigma0_sum += frame_sigma0;
    ++threshold.sigma0_frames;
    report.sigma0_sq =
        config.pool_sigma0 ? threshold.sigma0_sum / static_cast<double>(threshold.sigma0_frames) : frame_sigma0;
    report.bound_clamped = report.sigma0_sq > total_power;
    threshold.c_bar = curvature_bound(K, num_taps, total_power, std::min(report.sigma0_sq, total_power));
    threshold.c_tilde = adjusted_threshold(threshold, K, config.threshold_floor_fraction);
    const double c_tilde = threshold.c_tilde;

    for (std::size_t q = 0; q < est.n_r(); ++q) {
        for (std::size_t p = 0; p < est.n_t(); ++p) {
            auto link = est.link(q, p);
            while (report.actions_taken < cap && any_unreliable(link, c_tilde)) {
                const std::size_t start = rng.uniform_index(0, K - M);
                StateKey state = make_state(link, start, config);
                auto actions = action_set(link, start, c_tilde, config);
                while (!actions.empty() && report.actions_taken < cap) {
                    const std::size_t a = select_action(qtable, state, actions, config.epsilon, rng);
                    const std::size_t k = start + a;
                    const cplx h0 = mean_of(link);
                    const cplx before = link[k];
                    apply_action_in_place(link, k, c_tilde);
                    // only entry k moved, so the reward sum collapses to one term
                    const double r = (std::norm(before - h0) - std::norm(link[k] - h0)) / static_cast<double>(K);

                    StateKey next_state = make_state(link, start, config);
                    auto next_actions = action_set(link, start, c_tilde, config);
                    q_update(qtable, state, a, r, next_state, next_actions, config);
                    state = std::move(next_state);
                    actions = std::move(next_actions);
                    ++report.actions_taken;
                }
            }
            if (report.actions_taken >= cap && any_unreliable(link, c_tilde)) report.capped = true;
        }
    }

    double power = 0.0;
    for (const auto& v : est.flat()) power += std::norm(v);
    report.delta_feedback = power / static_cast<double>(est.size()) - total_power;
    threshold.feedback += report.delta_feedback;

    report.c_bar = threshold.c_bar;
    report.c_tilde = c_tilde;
    return report;
}

SuccessiveDenoiser::SuccessiveDenoiser(DenoiserConfig config, std::size_t num_taps, double total_power)
    : config_(config), num_taps_(num_taps), total_power_(total_power), qtable_(config.state_dim) {
    config_.validate();
    if (num_taps_ == 0) throw ConfigError("tap count must be positive");
    if (!(total_power_ > 0.0)) throw ConfigError("total channel power must be positive");
}

FrameReport SuccessiveDenoiser::denoise(EstimateGrid& est, RandomStream& rng) {
    return denoise_frame(est, qtable_, threshold_, config_, num_taps_, total_power_, rng);
}

} // namespace rlce
