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
#include "rlce/grid.hpp"
#include "rlce/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace rlce {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Unit-modulus pilot symbols, one row of K per transmit antenna.
struct PilotPlan {
    std::size_t n_t = 0;
    std::size_t num_subcarriers = 0;
    std::vector<cplx> symbols; // [p * K + k]

    const cplx& at(std::size_t p, std::size_t k) const { return symbols[p * num_subcarriers + k]; }
    cplx& at(std::size_t p, std::size_t k) { return symbols[p * num_subcarriers + k]; }
};

/// Additive white noise level. SNR is 10*log10(P / variance) for unit-power symbols.
struct NoiseSpec {
    double variance = 0.0;

    static NoiseSpec from_snr_db(double snr_db, double channel_power = 1.0);
};

PilotPlan generate_pilots(std::size_t n_t, std::size_t num_subcarriers, RandomStream& rng);

/// Each transmit antenna sends its pilot row in its own slot, so the receiver
/// observes every (q, p) link separately: received[q][p][k] = H_qp(k) x_p[k] + w.
ComplexGrid transmit_pilots(const ChannelRealization& channel, const PilotPlan& pilots, const NoiseSpec& noise,
                            RandomStream& rng);

EstimateGrid ls_estimate(const ComplexGrid& received, const PilotPlan& pilots);

/// Analytic frequency correlation R[k][k'] = sum_l sigma_l^2 exp(-j 2 pi l (k - k') / K).
CMatrix channel_correlation(const PdpProfile& pdp, std::size_t num_subcarriers);

/// Precomputed Wiener filter W = R (R + sigma_w^2 I)^-1, obtained from a
/// Hermitian positive-definite solve. Construction throws NumericalError when
/// the loaded matrix is singular (reciprocal condition below 1e-12).
class LmmseFilter {
public:
    LmmseFilter(const CMatrix& correlation, const NoiseSpec& noise);

    EstimateGrid apply(const EstimateGrid& ls) const;
    const CMatrix& matrix() const { return filter_; }
    double noise_variance() const { return noise_variance_; }

private:
    CMatrix filter_;
    double noise_variance_;
};

EstimateGrid lmmse_estimate(const EstimateGrid& ls, const CMatrix& correlation, const NoiseSpec& noise);

/// Zero-forcing matrix G = H^H (H H^H)^-1, for equalizing many symbols with
/// one channel estimate. Throws NumericalError if H H^H is singular.
CMatrix zf_matrix(const CMatrix& h_est);

/// Zero-forcing: H^H (H H^H)^-1 y.
CVector zf_equalize(const CMatrix& h_est, const CVector& y);

/// Gray-mapped QPSK, bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
std::vector<cplx> qpsk_modulate(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> qpsk_demodulate(std::span<const cplx> symbols);

} // namespace rlce
