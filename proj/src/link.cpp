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

#include "rlce/link.hpp"

#include "rlce/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rlce {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

} // namespace

NoiseSpec NoiseSpec::from_snr_db(double snr_db, double channel_power) {
    return NoiseSpec{channel_power * std::pow(10.0, -snr_db / 10.0)};
}

PilotPlan generate_pilots(std::size_t n_t, std::size_t num_subcarriers, RandomStream& rng) {
    PilotPlan plan{n_t, num_subcarriers, std::vector<cplx>(n_t * num_subcarriers)};
    for (auto& s : plan.symbols) {
        const double re = rng.bit() ? -kInvSqrt2 : kInvSqrt2;
        const double im = rng.bit() ? -kInvSqrt2 : kInvSqrt2;
        s = {re, im};
    }
    return plan;
}

ComplexGrid transmit_pilots(const ChannelRealization& channel, const PilotPlan& pilots, const NoiseSpec& noise,
                            RandomStream& rng) {
    const std::size_t K = channel.num_subcarriers();
    if (pilots.n_t != channel.n_t() || pilots.num_subcarriers != K)
        throw InputError("pilot plan does not match channel dimensions");
    if (noise.variance < 0.0) throw ConfigError("noise variance must be nonnegative");

    ComplexGrid received(channel.n_r(), channel.n_t(), K);
    for (std::size_t q = 0; q < channel.n_r(); ++q)
        for (std::size_t p = 0; p < channel.n_t(); ++p)
            for (std::size_t k = 0; k < K; ++k) {
                cplx y = channel.freq(q, p, k) * pilots.at(p, k);
                if (noise.variance > 0.0) y += rng.complex_gaussian(noise.variance);
                received(q, p, k) = y;
            }
    return received;
}

EstimateGrid ls_estimate(const ComplexGrid& received, const PilotPlan& pilots) {
    if (pilots.n_t != received.n_t() || pilots.num_subcarriers != received.len())
        throw InputError("pilot plan does not match received grid");
    EstimateGrid est(received.n_r(), received.n_t(), received.len());
    for (std::size_t q = 0; q < received.n_r(); ++q)
        for (std::size_t p = 0; p < received.n_t(); ++p)
            for (std::size_t k = 0; k < received.len(); ++k) {
                const cplx x = pilots.at(p, k);
                if (x == cplx{}) throw NumericalError("zero pilot symbol on subcarrier " + std::to_string(k));
                est(q, p, k) = received(q, p, k) / x;
            }
    return est;
}

CMatrix channel_correlation(const PdpProfile& pdp, std::size_t num_subcarriers) {
    if (num_subcarriers < pdp.num_taps()) throw ConfigError("number of subcarriers must be at least the number of taps");
    const auto K = static_cast<long>(num_subcarriers);
    // Toeplitz: one row of lags, then fill
    std::vector<cplx> by_lag(2 * num_subcarriers - 1);
    for (long d = -(K - 1); d <= K - 1; ++d) {
        cplx acc{};
        for (std::size_t l = 0; l < pdp.num_taps(); ++l) {
            const long r = ((static_cast<long>(l) * d) % K + K) % K;
            acc += pdp.tap_variances[l] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(r) / K);
        }
        by_lag[static_cast<std::size_t>(d + K - 1)] = acc;
    }
    CMatrix R(K, K);
    for (long k = 0; k < K; ++k)
        for (long kp = 0; kp < K; ++kp) R(k, kp) = by_lag[static_cast<std::size_t>(k - kp + K - 1)];
    return R;
}

LmmseFilter::LmmseFilter(const CMatrix& correlation, const NoiseSpec& noise) : noise_variance_(noise.variance) {
    if (correlation.rows() != correlation.cols()) throw InputError("correlation matrix must be square");
    if (noise.variance < 0.0) throw ConfigError("noise variance must be nonnegative");
    CMatrix loaded = correlation;
    loaded.diagonal().array() += noise.variance;

    Eigen::LLT<CMatrix> llt(loaded);
    if (llt.info() != Eigen::Success || llt.rcond() < kMinReciprocalCondition)
        throw NumericalError("LMMSE loading matrix R + sigma_w^2 I is singular");

    // A Hermitian: W = R A^-1  <=>  W^H = A^-1 R
    filter_ = llt.solve(correlation).adjoint();
}

EstimateGrid LmmseFilter::apply(const EstimateGrid& ls) const {
    const auto K = static_cast<std::size_t>(filter_.rows());
    if (ls.len() != K) throw InputError("estimate grid does not match filter size");
    EstimateGrid out(ls.n_r(), ls.n_t(), K);
    for (std::size_t q = 0; q < ls.n_r(); ++q)
        for (std::size_t p = 0; p < ls.n_t(); ++p) {
            auto src = ls.link(q, p);
            auto dst = out.link(q, p);
            Eigen::Map<const CVector> in(src.data(), static_cast<long>(K));
            Eigen::Map<CVector> res(dst.data(), static_cast<long>(K));
            res.noalias() = filter_ * in;
        }
    return out;
}

EstimateGrid lmmse_estimate(const EstimateGrid& ls, const CMatrix& correlation, const NoiseSpec& noise) {
    return LmmseFilter(correlation, noise).apply(ls);
}

namespace {

Eigen::LLT<CMatrix> zf_gram_factor(const CMatrix& h_est) {
    if (h_est.rows() > h_est.cols()) throw InputError("ZF requires at least as many transmit as receive antennas");
    Eigen::LLT<CMatrix> llt(h_est * h_est.adjoint());
    if (llt.info() != Eigen::Success || llt.rcond() < kMinReciprocalCondition)
        throw NumericalError("ZF: H H^H is singular");
    return llt;
}

} // namespace

CMatrix zf_matrix(const CMatrix& h_est) {
    const auto llt = zf_gram_factor(h_est);
    // (H H^H) Hermitian: G^H = (H H^H)^-1 H
    return llt.solve(h_est).adjoint();
}

CVector zf_equalize(const CMatrix& h_est, const CVector& y) {
    if (h_est.rows() != y.size()) throw InputError("ZF: channel rows must match receive vector length");
    const auto llt = zf_gram_factor(h_est);
    return h_est.adjoint() * llt.solve(y);
}

std::vector<cplx> qpsk_modulate(std::span<const std::uint8_t> bits) {
    if (bits.size() % 2 != 0) throw InputError("QPSK modulation needs an even number of bits");
    std::vector<cplx> out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double re = bits[2 * i] ? -kInvSqrt2 : kInvSqrt2;
        const double im = bits[2 * i + 1] ? -kInvSqrt2 : kInvSqrt2;
        out[i] = {re, im};
    }
    return out;
}

std::vector<std::uint8_t> qpsk_demodulate(std::span<const cplx> symbols) {
    std::vector<std::uint8_t> bits(2 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        bits[2 * i] = symbols[i].real() < 0.0 ? 1 : 0;
        bits[2 * i + 1] = symbols[i].imag() < 0.0 ? 1 : 0;
    }
    return bits;
}

} // namespace rlce
