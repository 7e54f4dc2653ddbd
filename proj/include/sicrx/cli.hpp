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

#ifndef SICRX_CLI_HPP
#define SICRX_CLI_HPP

#include "sicrx/beamforming.hpp"
#include "sicrx/detection.hpp"
#include "sicrx/montecarlo.hpp"
#include "sicrx/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sicrx
{
    // Scenario file: one `key = value` per line, `#` starts a comment, lists are
    // separated by commas or blanks and continue on the next line after a trailing
    // comma. Keys:
    //   satellites.angles_deg   required
    //   dish.diameter_m         0.35
    //   dish.freq_ghz           11.7
    //   lnb.count               number of feeds when no boresights are given (3)
    //   lnb.boresights_deg      aimed at the desired satellites
    //   lnb.phases_deg          zeros
    //   noise.K                 row-major M x M; measured 3-LNB matrix for M = 3, else I
    //   mod.scheme              qpsk
    //   mod.symbol_energy       1
    // Unknown or repeated keys and invariant violations throw std::invalid_argument
    // naming the key; the result is always overloaded (N_s > M).
    ScenarioConfig parse_config_text(std::string_view text);
    // Throws std::runtime_error when the file cannot be read.
    ScenarioConfig parse_config(const std::string &path);

    // 64-bit FNV-1a, used to tag output files with the config they came from.
    std::uint64_t fnv1a(std::string_view bytes);

    // Inclusive start:step:stop grid. A single number is a one-point grid.
    struct RangeSpec
    {
        double start = 0;
        double step = 1;
        double stop = 0;

        std::vector<double> values() const; // start + k step up to stop, rounded to 1e-9
    };

    // Throws std::invalid_argument unless start <= stop and step > 0.
    RangeSpec parse_range(std::string_view text, std::string_view flag);

    enum class RunMode
    {
        ber_sweep,
        pattern_scan,
        car_scan
    };

    std::string_view to_string(RunMode mode);
    RunMode parse_run_mode(std::string_view text);

    struct RunSpec
    {
        std::string config_path;
        std::vector<DetectorId> detectors = all_detectors();
        RangeSpec snr_db{14, 1, 14};
        std::uint64_t trials = 10000;
        std::uint64_t seed = 1;
        std::string output_path = "-";         // "-" writes to stdout
        RunMode mode = RunMode::ber_sweep;
        RangeSpec theta_deg{-8, 0.05, 8};      // scan modes
        std::optional<std::size_t> signal;     // car-scan target, 1-based desired position
        bool interference_free = false;
        unsigned threads = 0;                  // 0 = auto
    };

    // Throws std::invalid_argument naming the flag at fault.
    void validate(const RunSpec &spec);

    // "# sicrx <mode> seed=<seed> config_fnv1a=<hex>"
    std::string provenance_line(const RunSpec &spec, std::uint64_t config_hash);

    // Numbers with 9 significant digits.
    std::string format_number(double x);

    inline constexpr std::string_view kBerCsvHeader = "snr_db,detector,signal,bit_errors,bits,ber";
    inline constexpr std::string_view kPatternCsvHeader = "theta_deg,beam_id,gain_db";
    inline constexpr std::string_view kCarCsvHeader = "theta_deg,objective";

    std::string format_ber_row(const BerRecord &rec);

    // Reads a ber-sweep CSV. Comment lines are skipped except that `seed=` in one
    // is applied to the records. Throws std::invalid_argument on a malformed line.
    std::vector<BerRecord> read_ber_csv(std::istream &in);

    struct PatternRow
    {
        double theta_deg = 0;
        std::string beam_id;
        double gain_db = 0;
    };

    inline constexpr double kGainFloorDb = -100.0;

    // Gain |w^H a(theta)| in dB (floored at kGainFloorDb) for the beams
    //   lnbN   single feed N
    //   mrc-sN full-covariance MRC for desired signal N at snr_db
    //   ar-sN  AR steering toward desired signal N
    //   car-sN CAR steering of the hybrid SIC receiver (every signal but the main one)
    // Every beam but lnbN has unit response toward its steering direction.
    std::vector<PatternRow> pattern_scan(const ScenarioConfig &cfg, double snr_db, std::span<const double> theta_deg,
                                         const CarParams &car = {});

    struct CarScanRow
    {
        double theta_deg = 0;
        double objective = 0;
    };

    // CAR objective vs steering angle for desired signal `position` (0-based), against
    // the interferer the hybrid SIC receiver pairs it with. Throws std::invalid_argument
    // for the main signal or when no interferer remains.
    std::vector<CarScanRow> car_scan(const ScenarioConfig &cfg, std::size_t position, std::span<const double> theta_deg);

    // Executes a RunSpec and writes the CSV. Returns 0 on success; errors propagate.
    int run(const RunSpec &spec);

    // Full command-line entry point: parses flags, runs, reports errors on stderr.
    int main_entry(int argc, char **argv);

} // namespace sicrx

#endif
