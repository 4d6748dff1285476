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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rlce {

using cplx = std::complex<double>;

/// Dense complex tensor indexed [q][p][k] (receive antenna, transmit antenna,
/// subcarrier or tap). The innermost index is contiguous so a single link
/// can be viewed as a span.
class ComplexGrid {
public:
    ComplexGrid() = default;
    ComplexGrid(std::size_t n_r, std::size_t n_t, std::size_t len, cplx fill = {})
        : n_r_(n_r), n_t_(n_t), len_(len), data_(n_r * n_t * len, fill) {}

    std::size_t n_r() const { return n_r_; }
    std::size_t n_t() const { return n_t_; }
    std::size_t len() const { return len_; }
    std::size_t size() const { return data_.size(); }

    cplx& operator()(std::size_t q, std::size_t p, std::size_t k) {
        return data_[(q * n_t_ + p) * len_ + k];
    }
    const cplx& operator()(std::size_t q, std::size_t p, std::size_t k) const {
        return data_[(q * n_t_ + p) * len_ + k];
    }

    std::span<cplx> link(std::size_t q, std::size_t p) {
        return {data_.data() + (q * n_t_ + p) * len_, len_};
    }
    std::span<const cplx> link(std::size_t q, std::size_t p) const {
        return {data_.data() + (q * n_t_ + p) * len_, len_};
    }

    std::span<cplx> flat() { return data_; }
    std::span<const cplx> flat() const { return data_; }

    bool same_shape(const ComplexGrid& other) const {
        return n_r_ == other.n_r_ && n_t_ == other.n_t_ && len_ == other.len_;
    }

    bool operator==(const ComplexGrid&) const = default;

private:
    std::size_t n_r_ = 0;
    std::size_t n_t_ = 0;
    std::size_t len_ = 0;
    std::vector<cplx> data_;
};

/// Per-(q,p,k) channel estimates; the object the denoiser mutates.
using EstimateGrid = ComplexGrid;

} // namespace rlce
