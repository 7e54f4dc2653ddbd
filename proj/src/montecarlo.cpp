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

#include "sicrx/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sicrx
{
    SymbolFrame generate_frame(const ArrayResponse &a, const NoiseModel &noise, const Constellation &constellation,
                               std::size_t length, Rng &rng)
    {
        if (length == 0)
            throw std::invalid_argument("generate_frame: frame length must be at least 1");
        const std::size_t ns = a.satellites();
        const std::size_t m = a.lnbs();
        const auto alphabet = static_cast<unsigned>(constellation.size());

        SymbolFrame frame;
        frame.tx_indices.resize(ns * length);
        frame.tx_symbols = CMat(ns, length);
        frame.rx = CMat(m, length);

        std::array<cplx, kMaxLnbs> n{};
        for (std::size_t t = 0; t < length; ++t)
        {
            auto s = frame.tx_symbols.col(t);
            for (std::size_t j = 0; j < ns; ++j)
            {
                const unsigned idx = rng.uniform_index(alphabet);
                frame.tx_indices[t * ns + j] = idx;
                s[j] = constellation.point(idx);
            }
            sample_noise(noise, rng, std::span<cplx>(n.data(), m));

            auto r = frame.rx.col(t);
            for (std::size_t i = 0; i < m; ++i)
                r[i] = n[i];
            for (std::size_t j = 0; j < ns; ++j)
            {
                const auto col = a.column(j);
                for (std::size_t i = 0; i < m; ++i)
                    r[i] += col[i] * s[j];
            }
        }
        return frame;
    }

    std::string BerRecord::signal_label() const
    {
        return signal_index ? "s" + std::to_string(*signal_index + 1) : std::string("avg");
    }

    LinkSetup prepare_link(const ScenarioConfig &cfg, double snr_db, bool interference_free)
    {
        ArrayResponse full = build_array_response(cfg);
        const double sigma_sq = noise_power(full, snr_db, cfg.symbol_energy);
        LinkSetup link{interference_free ? full.with_interferers_silenced() : std::move(full),
                       make_noise_model(cfg.noise_corr, sigma_sq), {}, Constellation::qpsk(cfg.symbol_energy)};
        link.cov = build_covariances(link.array, link.noise, cfg.symbol_energy);
        return link;
    }

    ErrorTally count_errors(const Detector &detector, const ArrayResponse &a, const SymbolFrame &frame,
                            const Constellation &constellation)
    {
        const std::size_t md = a.desired.size();
        ErrorTally tally{std::vector<std::uint64_t>(md, 0), frame.length()};
        std::array<std::size_t, kMaxLnbs> decided{};
        const std::span<std::size_t> out(decided.data(), md);
        for (std::size_t t = 0; t < frame.length(); ++t)
        {
            detector.detect(frame.rx.col(t), out);
            for (std::size_t k = 0; k < md; ++k)
            {
                const unsigned diff = constellation.label(decided[k]) ^ constellation.label(frame.tx_index(a.desired[k], t));
                tally.bit_errors[k] += static_cast<std::uint64_t>(std::popcount(diff));
            }
        }
        return tally;
    }

    namespace
    {
        unsigned resolve_threads(unsigned requested)
        {
            if (requested != 0)
                return requested;
            return std::max(1U, std::thread::hardware_concurrency());
        }

        // Evaluates chunks [first, last) with up to `threads` workers; slot c - first gets chunk c.
        void run_chunks(const LinkSetup &link, const Detector &detector, std::uint64_t trials, std::uint64_t seed,
                        const RunOptions &options, std::size_t first, std::size_t last, std::vector<ErrorTally> &out)
        {
            const std::size_t count = last - first;
            out.assign(count, {});
            std::atomic<std::size_t> next{0};
            std::exception_ptr failure;
            std::mutex failure_mutex;

            auto worker = [&]()
            {
                try
                {
                    for (std::size_t slot = next++; slot < count; slot = next++)
                    {
                        const std::size_t chunk = first + slot;
                        const std::uint64_t begin = static_cast<std::uint64_t>(chunk) * options.chunk_size;
                        const auto len = static_cast<std::size_t>(std::min<std::uint64_t>(options.chunk_size, trials - begin));
                        Rng rng = Rng::for_stream(seed, chunk);
                        const SymbolFrame frame = generate_frame(link.array, link.noise, link.constellation, len, rng);
                        out[slot] = count_errors(detector, link.array, frame, link.constellation);
                    }
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = count;
                }
            };

            const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(options.threads), count));
            if (workers <= 1)
                worker();
            else
            {
                std::vector<std::jthread> pool;
                for (unsigned w = 0; w < workers; ++w)
                    pool.emplace_back(worker);
            }
            if (failure)
                std::rethrow_exception(failure);
        }

        std::vector<BerRecord> run_prepared(const LinkSetup &link, const Detector &detector, double snr_db,
                                            std::uint64_t trials, std::uint64_t seed, const RunOptions &options)
        {
            if (trials == 0)
                throw std::invalid_argument("run_point: trials must be at least 1");
            if (options.chunk_size == 0)
                throw std::invalid_argument("run_point: chunk size must be at least 1");

            const std::size_t chunks = static_cast<std::size_t>((trials + options.chunk_size - 1) / options.chunk_size);
            const std::size_t md = link.array.desired.size();
            ErrorTally total{std::vector<std::uint64_t>(md, 0), 0};

            // Waves only matter for early stopping: the cut is made at the first chunk (in
            // index order) where the running error count reaches the target, so the
            // outcome is independent of the wave width.
            const std::size_t wave = options.min_bit_errors == 0
                                         ? chunks
                                         : std::max<std::size_t>(1, resolve_threads(options.threads));
            std::vector<ErrorTally> results;
            bool stop = false;
            for (std::size_t first = 0; first < chunks && !stop; first += wave)
            {
                const std::size_t last = std::min(chunks, first + wave);
                run_chunks(link, detector, trials, seed, options, first, last, results);
                for (const auto &r : results)
                {
                    std::uint64_t errors = 0;
                    for (std::size_t k = 0; k < md; ++k)
                    {
                        total.bit_errors[k] += r.bit_errors[k];
                        errors += total.bit_errors[k];
                    }
                    total.trials += r.trials;
                    if (options.min_bit_errors != 0 && errors >= options.min_bit_errors)
                    {
                        stop = true;
                        break;
                    }
                }
            }

            const std::uint64_t bits_per_signal = total.trials * link.constellation.bits_per_symbol();
            std::vector<BerRecord> records;
            BerRecord avg{detector.id(), std::nullopt, snr_db, 0, 0, seed};
            for (std::size_t k = 0; k < md; ++k)
            {
                records.push_back({detector.id(), k, snr_db, total.bit_errors[k], bits_per_signal, seed});
                avg.bit_errors += total.bit_errors[k];
                avg.bits_total += bits_per_signal;
            }
            records.push_back(avg);
            return records;
        }
    } // namespace

    std::vector<BerRecord> run_point(const ScenarioConfig &cfg, DetectorId detector, double snr_db,
                                     std::uint64_t trials, std::uint64_t seed, const RunOptions &options)
    {
        if (trials == 0)
            throw std::invalid_argument("run_point: trials must be at least 1");
        const LinkSetup link = prepare_link(cfg, snr_db, options.interference_free);
        const auto det = make_detector(detector, link.array, link.cov, link.constellation, options.car);
        return run_prepared(link, *det, snr_db, trials, seed, options);
    }

    std::vector<BerRecord> run_sweep(const ScenarioConfig &cfg, std::span<const DetectorId> detectors,
                                     std::span<const double> snr_grid_db, std::uint64_t trials, std::uint64_t seed,
                                     const RunOptions &options, const RecordSink &sink)
    {
        std::vector<BerRecord> all;
        for (double snr_db : snr_grid_db)
        {
            const LinkSetup link = prepare_link(cfg, snr_db, options.interference_free);
            for (DetectorId id : detectors)
            {
                const auto det = make_detector(id, link.array, link.cov, link.constellation, options.car);
                for (auto &rec : run_prepared(link, *det, snr_db, trials, seed, options))
                {
                    if (sink)
                        sink(rec);
                    all.push_back(std::move(rec));
                }
            }
        }
        return all;
    }

    unsigned threads_from_environment()
    {
        const char *value = std::getenv("SICRX_THREADS");
        if (value == nullptr || *value == '\0')
            return 0;
        const std::string_view text(value);
        unsigned parsed = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw std::invalid_argument("SICRX_THREADS: expected a non-negative integer, got '" + std::string(text) + "'");
        return parsed;
    }

} // namespace sicrx
