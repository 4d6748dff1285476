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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Optional arguments restrict the run to the
// listed criterion numbers, e.g. `acceptance 1 4 5`.

#include "rlce/channel.hpp"
#include "rlce/denoiser.hpp"
#include "rlce/errors.hpp"
#include "rlce/harness.hpp"
#include "rlce/io.hpp"
#include "rlce/link.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rlce;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

double db(double ratio) { return 10.0 * std::log10(ratio); }

double grid_mse(const ComplexGrid& a, const ComplexGrid& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a.flat()[i] - b.flat()[i]);
    return acc / static_cast<double>(a.size());
}

/// Mean MSE of `tag` over records with frame in [lo, hi).
double mean_mse(const std::vector<MetricRecord>& rs, const std::string& tag, std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& r : rs)
        if (r.estimator == tag && r.frame >= lo && r.frame < hi) {
            acc += r.mse;
            ++n;
        }
    return n ? acc / static_cast<double>(n) : std::nan("");
}

/// Per-frame MSE of `tag` in one trial, indexed by frame.
std::vector<double> trace(const std::vector<MetricRecord>& rs, const std::string& tag, std::size_t trial) {
    std::vector<double> out;
    for (const auto& r : rs)
        if (r.estimator == tag && r.trial == trial) out.push_back(r.mse);
    return out;
}

std::vector<double> moving_average(const std::vector<double>& v, std::size_t w) {
    std::vector<double> out;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc += v[i];
        if (i >= w) acc -= v[i - w];
        if (i + 1 >= w) out.push_back(acc / static_cast<double>(w));
    }
    return out; // out[j] averages frames j .. j + w - 1
}

constexpr std::size_t kWindow = 50;

// ---------------------------------------------------------------- 1

Outcome ls_calibration() {
    const auto pdp = make_exponential_pdp(8, 1.0, 2.0);
    RandomStream rng(derive_seed(2024, 0, 0));
    const auto plan = generate_pilots(4, 32, rng);
    Outcome out{true, ""};
    for (double snr : {0.0, 6.0, 12.0}) {
        const NoiseSpec noise = NoiseSpec::from_snr_db(snr);
        double acc = 0.0;
        const int frames = 10000;
        for (int f = 0; f < frames; ++f) {
            const auto ch = draw_channel(pdp, 4, 4, 32, rng);
            acc += mse(ls_estimate(transmit_pilots(ch, plan, noise, rng), plan), ch);
        }
        const double rel = acc / frames / noise.variance - 1.0;
        out.pass = out.pass && std::abs(rel) <= 0.03;
        out.detail += fmt(snr, 3) + " dB rel.err " + fmt(rel, 3) + "; ";
    }
    out.detail += "tolerance 3%";
    return out;
}

// ---------------------------------------------------------------- 2

Outcome lmmse_optimality() {
    const auto pdp = make_exponential_pdp(8, 1.0, 2.0);
    const CMatrix R = channel_correlation(pdp, 32);
    RandomStream rng(derive_seed(2024, 0, 1));
    const auto plan = generate_pilots(4, 32, rng);
    Outcome out{true, ""};
    for (double snr : {0.0, 3.0, 6.0, 9.0, 12.0}) {
        const NoiseSpec noise = NoiseSpec::from_snr_db(snr);
        const LmmseFilter filter(R, noise);
        double ls = 0.0, lm = 0.0;
        for (int f = 0; f < 2000; ++f) {
            const auto ch = draw_channel(pdp, 4, 4, 32, rng);
            const auto est = ls_estimate(transmit_pilots(ch, plan, noise, rng), plan);
            ls += mse(est, ch);
            lm += mse(filter.apply(est), ch);
        }
        out.pass = out.pass && lm <= ls;
        out.detail += fmt(snr, 3) + " dB " + fmt(lm / 2000) + " vs " + fmt(ls / 2000) + "; ";
    }
    // K = L makes R nonsingular
    const LmmseFilter identity(channel_correlation(pdp, 8), NoiseSpec{0.0});
    const double dev = (identity.matrix() - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff();
    out.pass = out.pass && dev <= 1e-9;
    out.detail += "noise-free filter max|W - I| " + fmt(dev, 3);
    return out;
}

// ---------------------------------------------------------------- 3

Outcome curvature_bound_holds() {
    const auto pdp = make_exponential_pdp(8, 1.0, 2.0);
    const double bound = curvature_bound(32, 8, 1.0, pdp.first_tap_power());
    RandomStream rng(derive_seed(2024, 0, 2));
    std::vector<double> mean(32, 0.0);
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
        const auto ch = draw_channel(pdp, 1, 1, 32, rng);
        for (std::size_t k = 0; k < 32; ++k) mean[k] += std::abs(true_curvature(ch, 0, 0, k)) / draws;
    }
    const double worst = *std::max_element(mean.begin(), mean.end());
    return {worst <= bound, "max_k E|C(k)| " + fmt(worst) + " <= bound " + fmt(bound)};
}

// ---------------------------------------------------------------- 4

Outcome geometric_contract() {
    const auto start = std::chrono::steady_clock::now();
    RandomStream rng(derive_seed(2024, 0, 3));
    double worst_boundary = 0.0, worst_identity = 0.0;
    std::size_t actions = 0;
    for (int t = 0; t < 2000; ++t) {
        EstimateGrid g(2, 2, 32);
        for (auto& v : g.flat()) v = rng.complex_gaussian(0.5);
        const double c_tilde = 0.01 + rng.uniform();
        for (int step = 0; step < 8; ++step) {
            const std::size_t q = rng.uniform_index(0, 1), p = rng.uniform_index(0, 1), k = rng.uniform_index(0, 31);
            if (std::abs(curvature(g, q, p, k)) <= c_tilde) continue;
            g = apply_action(g, q, p, k, c_tilde);
            ++actions;
            worst_boundary = std::max(worst_boundary, std::abs(std::abs(curvature(g, q, p, k)) - c_tilde));
        }
        for (std::size_t q = 0; q < 2; ++q)
            for (std::size_t p = 0; p < 2; ++p)
                for (std::size_t k = 0; k < 32; ++k) {
                    const cplx z = 0.5 * (g(q, p, (k + 31) % 32) + g(q, p, (k + 1) % 32));
                    worst_identity =
                        std::max(worst_identity, std::abs(std::abs(curvature(g, q, p, k)) - 2.0 * std::abs(g(q, p, k) - z)));
                }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = worst_boundary <= 1e-9 && worst_identity <= 1e-12 && seconds < 1.0;
    return {pass, std::to_string(actions) + " actions; max boundary err " + fmt(worst_boundary, 3) +
                      ", max identity err " + fmt(worst_identity, 3) + ", " + fmt(seconds, 3) + " s"};
}

// ---------------------------------------------------------------- 5

Outcome q_learning_oracle() {
    // Deterministic MDP with discount 0.9:
    //   A --a0 (r=1)--> B     A --a1 (r=2)--> end
    //   B --a0 (r=0)--> A     B --a1 (r=0.5)--> end
    // Optimal values: Q(A,0) = 1 + 0.9 * 0.9 * Q(A,0) = 100/19, Q(B,0) = 90/19,
    // Q(A,1) = 2, Q(B,1) = 0.5.
    DenoiserConfig cfg;
    cfg.state_dim = 3;
    cfg.learning_rate = 0.3;
    cfg.discount = 0.9;
    const StateKey A{{0, 0, 0, 0, 0, 0}}, B{{1, 0, 0, 0, 0, 0}};
    const std::vector<std::size_t> both{0, 1}, none{};
    QTable qt(3);
    for (int sweep = 0; sweep < 10000; ++sweep) {
        q_update(qt, A, 0, 1.0, B, both, cfg);
        q_update(qt, A, 1, 2.0, A, none, cfg);
        q_update(qt, B, 0, 0.0, A, both, cfg);
        q_update(qt, B, 1, 0.5, B, none, cfg);
    }
    const double err = std::max({std::abs(qt.value(A, 0) - 100.0 / 19.0), std::abs(qt.value(A, 1) - 2.0),
                                 std::abs(qt.value(B, 0) - 90.0 / 19.0), std::abs(qt.value(B, 1) - 0.5)});
    return {err <= 1e-6, "max |Q - Q*| " + fmt(err, 3) + " after 10^4 sweeps"};
}

// ---------------------------------------------------------------- 6

Outcome denoising_gain() {
    ExperimentConfig cfg;
    cfg.trials = 20;
    cfg.seed = 6;
    const auto rs = run_mse_vs_snr(cfg);
    const std::size_t T = cfg.train_frames + cfg.eval_frames;
    bool ordered = true;
    double gain6 = 0.0;
    std::string detail;
    for (std::size_t j = 0; j < cfg.snr_points.size(); ++j) {
        const std::size_t lo = j * T + cfg.train_frames, hi = (j + 1) * T;
        const double ls = mean_mse(rs, "ls", lo, hi), lm = mean_mse(rs, "lmmse", lo, hi),
                     rl = mean_mse(rs, "rl_denoiser", lo, hi);
        ordered = ordered && lm <= rl && rl <= ls;
        if (cfg.snr_points[j] == 6.0) gain6 = ls / rl;
        detail += fmt(cfg.snr_points[j], 3) + " dB " + fmt(lm) + "/" + fmt(rl) + "/" + fmt(ls) + "; ";
    }
    return {ordered && gain6 >= 2.0, "lmmse/rl/ls " + detail + "gain at 6 dB " + fmt(db(gain6), 3) + " dB (floor 3 dB)"};
}

// ---------------------------------------------------------------- 7

Outcome learning_trend() {
    ExperimentConfig cfg;
    cfg.trials = 20;
    cfg.seed = 7;
    cfg.num_frames = 600;
    const auto rs = run_learning_curve(cfg);
    std::map<std::string, std::vector<double>> avg;
    for (const std::string tag : {"rl_m4_l8", "rl_m8_l8"}) {
        std::vector<double> sum(cfg.num_frames, 0.0);
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const auto v = trace(rs, tag, t);
            for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i] / static_cast<double>(cfg.trials);
        }
        avg[tag] = moving_average(sum, kWindow);
    }
    const auto& m4 = avg["rl_m4_l8"];
    const auto& m8 = avg["rl_m8_l8"];
    const bool pass = m4.back() < m4.front() && m8.back() < m8.front() && m8.back() <= m4.back();
    return {pass, "trial-averaged MA50, iteration 50 -> end: M=4 " + fmt(m4.front()) + " -> " + fmt(m4.back()) +
                      ", M=8 " + fmt(m8.front()) + " -> " + fmt(m8.back())};
}

// ---------------------------------------------------------------- 8

/// First frame whose trailing 50-frame RL average drops below the midpoint of
/// the trial's mean LS and LMMSE MSE; num_frames when it never does.
std::vector<std::size_t> crossing_frames(const std::vector<MetricRecord>& rs, const ExperimentConfig& cfg) {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto ls = trace(rs, "ls", t), lm = trace(rs, "lmmse", t), rl = trace(rs, "rl_denoiser", t);
        double mid = 0.0;
        for (std::size_t i = 0; i < ls.size(); ++i) mid += 0.5 * (ls[i] + lm[i]) / static_cast<double>(ls.size());
        const auto ma = moving_average(rl, kWindow);
        std::size_t hit = cfg.num_frames;
        for (std::size_t j = 0; j < ma.size(); ++j)
            if (ma[j] < mid) {
                hit = j + kWindow - 1;
                break;
            }
        out.push_back(hit);
    }
    return out;
}

Outcome correlation_speedup() {
    ExperimentConfig cfg;
    cfg.trials = 20;
    cfg.seed = 8;
    cfg.num_frames = 500;
    const auto iid = crossing_frames(run_mse_vs_frames(cfg), cfg);
    cfg.correlation_rho = 0.99;
    const auto cor = crossing_frames(run_mse_vs_frames(cfg), cfg);
    std::size_t earlier = 0;
    std::string pairs;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        earlier += cor[t] < iid[t];
        pairs += std::to_string(cor[t]) + "/" + std::to_string(iid[t]) + " ";
    }
    return {2 * earlier > cfg.trials, "correlated earlier in " + std::to_string(earlier) + " of " +
                                          std::to_string(cfg.trials) + " trials (rho=0.99/iid crossing frames: " +
                                          pairs + ")"};
}

// ---------------------------------------------------------------- 9

Outcome snr_switch_robustness() {
    ExperimentConfig cfg;
    cfg.trials = 20;
    cfg.seed = 9;
    cfg.num_frames = 600;
    cfg.snr_schedule = {{0, 0.0}, {200, 6.0}, {400, 12.0}};
    const auto rs = run_snr_switch(cfg);
    const double stale = mean_mse(rs, "lmmse_stale", 450, 600), oracle = mean_mse(rs, "lmmse", 450, 600),
                 rl = mean_mse(rs, "rl_denoiser", 450, 600), ls = mean_mse(rs, "ls", 450, 600);
    const bool beats_stale = stale > rl;
    const bool near_oracle = db(rl / oracle) <= 3.0;
    return {beats_stale && near_oracle, "frames 450-600: stale " + fmt(stale) + ", rl " + fmt(rl) + ", oracle " +
                                            fmt(oracle) + ", ls " + fmt(ls) + "; rl above oracle by " +
                                            fmt(db(rl / oracle), 3) + " dB (limit 3 dB)"};
}

// ---------------------------------------------------------------- 10

Outcome ber_ordering() {
    ExperimentConfig cfg;
    cfg.trials = 4;
    cfg.seed = 10;
    cfg.snr_points = {10.0};
    const auto rs = run_ber_vs_snr(cfg);
    const double bits = static_cast<double>(bits_per_frame(cfg));
    std::map<std::string, std::pair<double, double>> tally; // errors, bits
    for (const auto& r : rs)
        if (r.frame >= cfg.train_frames) {
            tally[r.estimator].first += *r.ber * bits;
            tally[r.estimator].second += bits;
        }
    const std::vector<std::string> order{"perfect", "lmmse", "rl_denoiser", "ls"};
    bool pass = true;
    std::string detail = "bits per arm " + fmt(tally["ls"].second, 7) + "; ";
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto [e1, n1] = tally[order[i]];
        const auto [e2, n2] = tally[order[i + 1]];
        const double p1 = e1 / n1, p2 = e2 / n2, pooled = (e1 + e2) / (n1 + n2);
        const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
        const double z = se > 0.0 ? (p1 - p2) / se : 0.0;
        // holds if ordered, or if the reversal is not significant at 95%
        const bool ok = p1 <= p2 || z < 1.96;
        pass = pass && ok && n1 >= 1e6;
        detail += order[i] + " " + fmt(p1) + " <= " + order[i + 1] + " " + fmt(p2) + " (z " + fmt(z, 3) + "); ";
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 11

Outcome determinism() {
    ExperimentConfig cfg;
    cfg.n_t = cfg.n_r = 2;
    cfg.num_subcarriers = 16;
    cfg.num_taps = 4;
    cfg.num_frames = 40;
    cfg.train_frames = 20;
    cfg.eval_frames = 10;
    cfg.snr_points = {3.0, 9.0};
    cfg.snr_schedule = {{0, 0.0}, {20, 12.0}};
    cfg.correlation_rho = 0.9;
    cfg.data_symbols = 4;
    cfg.trials = 2;
    cfg.seed = 11;
    const std::vector<std::pair<std::string, std::function<std::vector<MetricRecord>(const ExperimentConfig&)>>> runs{
        {"learning-curve", run_learning_curve},
        {"mse-vs-frames", run_mse_vs_frames},
        {"snr-switch", run_snr_switch},
        {"mse-vs-snr", run_mse_vs_snr},
        {"ber-vs-snr", run_ber_vs_snr}};
    bool pass = true;
    std::string detail;
    for (const auto& [name, run] : runs) {
        std::ostringstream a, b;
        write_csv(run(cfg), a);
        write_csv(run(cfg), b);
        const bool same = a.str() == b.str();
        pass = pass && same;
        detail += name + (same ? " identical" : " DIFFERS") + " (" + std::to_string(a.str().size()) + " bytes); ";
    }
    return {pass, detail};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"LS calibration", ls_calibration},
        {"LMMSE optimality", lmmse_optimality},
        {"curvature bound holds empirically", curvature_bound_holds},
        {"geometric update contract", geometric_contract},
        {"Q-learning micro-oracle", q_learning_oracle},
        {"denoising gain and MSE ordering", denoising_gain},
        {"learning trend", learning_trend},
        {"correlation speedup", correlation_speedup},
        {"SNR-switch robustness", snr_switch_robustness},
        {"BER ordering", ber_ordering},
        {"determinism", determinism},
    };

    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const std::size_t id = i + 1;
        if (!selected.empty() && !selected.contains(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail
                  << " [" << fmt(secs, 3) << " s]" << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
