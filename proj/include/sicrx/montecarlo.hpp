// SPDX-License-Identifier: Apache-2.0
//
// sicrx - overloaded multi-LNB satellite receiver simulator
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

#ifndef SICRX_MONTECARLO_HPP
#define SICRX_MONTECARLO_HPP

#include "sicrx/beamforming.hpp"
#include "sicrx/detection.hpp"
#include "sicrx/random.hpp"
#include "sicrx/scenario.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sicrx
{
    // T received vectors and the symbols that produced them.
    struct SymbolFrame
    {
        std::vector<std::size_t> tx_indices; // constellation index, [t * N_s + j]
        CMat tx_symbols;                     // N_s x T
        CMat rx;                             // M x T

        std::size_t length() const { return rx.cols(); }
        std::size_t tx_index(std::size_t j, std::size_t t) const { return tx_indices[t * tx_symbols.rows() + j]; }
    };

    // For every t: N_s uniform symbol draws (all satellites transmit), then M complex
    // normals for the noise, then r = A s + n.
    SymbolFrame generate_frame(const ArrayResponse &a, const NoiseModel &noise, const Constellation &constellation,
                               std::size_t length, Rng &rng);

    struct BerRecord
    {
        DetectorId detector = DetectorId::sic_hy_ml;
        std::optional<std::size_t> signal_index; // desired position; empty for the average
        double snr_db = 0;
        std::uint64_t bit_errors = 0;
        std::uint64_t bits_total = 0;
        std::uint64_t seed = 0;

        double ber() const { return bits_total ? static_cast<double>(bit_errors) / static_cast<double>(bits_total) : 0.0; }
        std::string signal_label() const; // "s1".."sM" or "avg"
    };

    struct RunOptions
    {
        std::size_t chunk_size = 4096;     // trials per RNG stream
        unsigned threads = 0;              // 0 = hardware concurrency
        bool interference_free = false;    // zero interferer columns after fixing sigma^2
        std::uint64_t min_bit_errors = 0;  // early stop once reached (0 = run every trial)
        CarParams car;
    };

    // Everything the receiver and the channel need at one SNR point.
    struct LinkSetup
    {
        ArrayResponse array; // as transmitted (interferers silenced when requested)
        NoiseModel noise;
        CovarianceSet cov;
        Constellation constellation;
    };

    // sigma^2 always comes from the full array, so silencing interferers keeps the
    // noise level of the loaded setup.
    LinkSetup prepare_link(const ScenarioConfig &cfg, double snr_db, bool interference_free = false);

    // Per-signal error counts for one chunk; merged by plain addition.
    struct ErrorTally
    {
        std::vector<std::uint64_t> bit_errors;
        std::uint64_t trials = 0;
    };

    // Runs `detector` over a frame and returns per-desired-signal bit errors.
    ErrorTally count_errors(const Detector &detector, const ArrayResponse &a, const SymbolFrame &frame,
                            const Constellation &constellation);

    // Per-desired-signal records followed by the "avg" aggregate. Chunk c of
    // options.chunk_size trials draws from Rng::for_stream(seed, c), so the result does
    // not depend on options.threads. Throws std::invalid_argument for trials == 0.
    std::vector<BerRecord> run_point(const ScenarioConfig &cfg, DetectorId detector, double snr_db,
                                     std::uint64_t trials, std::uint64_t seed, const RunOptions &options = {});

    using RecordSink = std::function<void(const BerRecord &)>;

    // SNR-major sweep: for every SNR point, every detector in order.
    std::vector<BerRecord> run_sweep(const ScenarioConfig &cfg, std::span<const DetectorId> detectors,
                                     std::span<const double> snr_grid_db, std::uint64_t trials, std::uint64_t seed,
                                     const RunOptions &options = {}, const RecordSink &sink = {});

    // Worker count from SICRX_THREADS (unset or 0 = auto).
    unsigned threads_from_environment();

} // namespace sicrx

#endif
