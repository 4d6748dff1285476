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

#include "rlce/grid.hpp"
#include "rlce/random.hpp"

#include <cstddef>
#include <vector>

namespace rlce {

/// Power delay profile: variance of each time-domain tap.
struct PdpProfile {
    std::vector<double> tap_variances;

    std::size_t num_taps() const { return tap_variances.size(); }
    double total_power() const;
    double first_tap_power() const { return tap_variances.empty() ? 0.0 : tap_variances.front(); }
};

/// One block-fading MIMO channel: taps [q][p][l] and their DFT [q][p][k].
struct ChannelRealization {
    ComplexGrid taps;
    ComplexGrid freq;

    std::size_t n_r() const { return taps.n_r(); }
    std::size_t n_t() const { return taps.n_t(); }
    std::size_t num_taps() const { return taps.len(); }
    std::size_t num_subcarriers() const { return freq.len(); }
};

/// sigma_l^2 proportional to exp(-l / decay_constant), scaled to sum to total_power.
PdpProfile make_exponential_pdp(std::size_t num_taps, double total_power, double decay_constant);

/// Builds a realization from explicit taps, computing the K-point frequency response.
ChannelRealization channel_from_taps(ComplexGrid taps, std::size_t num_subcarriers);

/// Independent CN(0, sigma_l^2) taps for every (q, p, l).
ChannelRealization draw_channel(const PdpProfile& pdp, std::size_t n_r, std::size_t n_t,
                                std::size_t num_subcarriers, RandomStream& rng);

/// First-order Gauss-Markov step: rho * prev + sqrt(1 - rho^2) * innovation.
ChannelRealization evolve_channel(const ChannelRealization& prev, const PdpProfile& pdp, double rho,
                                  RandomStream& rng);

/// Second derivative of the frequency response with respect to k, evaluated
/// analytically from the taps.
cplx true_curvature(const ChannelRealization& channel, std::size_t q, std::size_t p, std::size_t k);

} // namespace rlce
