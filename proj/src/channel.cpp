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

#include "rlce/channel.hpp"

#include "rlce/errors.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace rlce {

namespace {

cplx twiddle(std::size_t l, std::size_t k, std::size_t num_subcarriers) {
    // reduce l*k mod K first so the phase argument stays small
    const auto r = static_cast<double>((l * k) % num_subcarriers);
    const double phase = -2.0 * std::numbers::pi * r / static_cast<double>(num_subcarriers);
    return std::polar(1.0, phase);
}

void fill_frequency_response(ChannelRealization& ch) {
    const std::size_t K = ch.freq.len();
    const std::size_t L = ch.taps.len();
    for (std::size_t q = 0; q < ch.n_r(); ++q) {
        for (std::size_t p = 0; p < ch.n_t(); ++p) {
            auto taps = ch.taps.link(q, p);
            auto freq = ch.freq.link(q, p);
            for (std::size_t k = 0; k < K; ++k) {
                cplx acc{};
                for (std::size_t l = 0; l < L; ++l) acc += taps[l] * twiddle(l, k, K);
                freq[k] = acc;
            }
        }
    }
}

} // namespace

double PdpProfile::total_power() const {
    return std::accumulate(tap_variances.begin(), tap_variances.end(), 0.0);
}

PdpProfile make_exponential_pdp(std::size_t num_taps, double total_power, double decay_constant) {
    if (num_taps == 0) throw ConfigError("power delay profile needs at least one tap");
    if (!(total_power > 0.0)) throw ConfigError("total channel power must be positive");
    if (!(decay_constant > 0.0)) throw ConfigError("pdp decay constant must be positive");

    PdpProfile pdp;
    pdp.tap_variances.resize(num_taps);
    double norm = 0.0;
    for (std::size_t l = 0; l < num_taps; ++l) {
        pdp.tap_variances[l] = std::exp(-static_cast<double>(l) / decay_constant);
        norm += pdp.tap_variances[l];
    }
    for (auto& v : pdp.tap_variances) v *= total_power / norm;
    return pdp;
}

ChannelRealization channel_from_taps(ComplexGrid taps, std::size_t num_subcarriers) {
    if (num_subcarriers < taps.len())
        throw ConfigError("number of subcarriers (" + std::to_string(num_subcarriers) +
                          ") must be at least the number of taps (" + std::to_string(taps.len()) + ")");
    ChannelRealization ch;
    ch.freq = ComplexGrid(taps.n_r(), taps.n_t(), num_subcarriers);
    ch.taps = std::move(taps);
    fill_frequency_response(ch);
    return ch;
}

ChannelRealization draw_channel(const PdpProfile& pdp, std::size_t n_r, std::size_t n_t,
                                std::size_t num_subcarriers, RandomStream& rng) {
    const std::size_t L = pdp.num_taps();
    if (num_subcarriers < L) throw ConfigError("number of subcarriers must be at least the number of taps");
    ComplexGrid taps(n_r, n_t, L);
    for (std::size_t q = 0; q < n_r; ++q)
        for (std::size_t p = 0; p < n_t; ++p)
            for (std::size_t l = 0; l < L; ++l) taps(q, p, l) = rng.complex_gaussian(pdp.tap_variances[l]);
    return channel_from_taps(std::move(taps), num_subcarriers);
}

ChannelRealization evolve_channel(const ChannelRealization& prev, const PdpProfile& pdp, double rho,
                                  RandomStream& rng) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("correlation factor must lie in [0, 1]");
    if (prev.num_taps() != pdp.num_taps()) throw ConfigError("previous channel and pdp disagree on tap count");

    const double innovation_scale = std::sqrt(1.0 - rho * rho);
    ComplexGrid taps = prev.taps;
    for (std::size_t q = 0; q < taps.n_r(); ++q)
        for (std::size_t p = 0; p < taps.n_t(); ++p)
            for (std::size_t l = 0; l < taps.len(); ++l) {
                // the innovation is always drawn so that the stream position does not depend on rho
                const cplx w = rng.complex_gaussian(pdp.tap_variances[l]);
                taps(q, p, l) = rho * taps(q, p, l) + innovation_scale * w;
            }
    return channel_from_taps(std::move(taps), prev.num_subcarriers());
}

cplx true_curvature(const ChannelRealization& channel, std::size_t q, std::size_t p, std::size_t k) {
    const std::size_t K = channel.num_subcarriers();
    if (q >= channel.n_r() || p >= channel.n_t() || k >= K) throw InputError("curvature index out of range");
    const double base = 2.0 * std::numbers::pi / static_cast<double>(K);
    auto taps = channel.taps.link(q, p);
    cplx acc{};
    for (std::size_t l = 1; l < taps.size(); ++l) {
        const double w = base * static_cast<double>(l);
        acc -= w * w * taps[l] * twiddle(l, k, K);
    }
    return acc;
}

} // namespace rlce
