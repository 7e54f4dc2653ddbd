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

#include "sicrx/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sicrx
{
    namespace
    {
        std::string_view trim(std::string_view s)
        {
            const auto first = s.find_first_not_of(" \t\r\n");
            if (first == std::string_view::npos)
                return {};
            const auto last = s.find_last_not_of(" \t\r\n");
            return s.substr(first, last - first + 1);
        }

        [[noreturn]] void key_error(std::string_view key, const std::string &what)
        {
            throw std::invalid_argument(std::string(key) + ": " + what);
        }

        bool parse_double(std::string_view text, double &out)
        {
            text = trim(text);
            if (text.empty())
                return false;
            if (text.front() == '+')
                text.remove_prefix(1);
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
            return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
        }

        template <typename T>
        bool parse_unsigned(std::string_view text, T &out)
        {
            text = trim(text);
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
            return !text.empty() && ec == std::errc() && ptr == text.data() + text.size();
        }

        std::vector<double> parse_list(std::string_view key, std::string_view value)
        {
            std::vector<double> out;
            std::size_t pos = 0;
            while (true)
            {
                const auto comma = value.find(',', pos);
                const auto field = value.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
                if (trim(field).empty())
                    key_error(key, "empty list entry");
                std::istringstream words{std::string(field)};
                std::string token;
                while (words >> token)
                {
                    double x = 0;
                    if (!parse_double(token, x))
                        key_error(key, "invalid number '" + token + "'");
                    out.push_back(x);
                }
                if (comma == std::string_view::npos)
                    break;
                pos = comma + 1;
            }
            return out;
        }

        double parse_scalar(std::string_view key, std::string_view value)
        {
            double x = 0;
            if (!parse_double(value, x))
                key_error(key, "invalid number '" + std::string(trim(value)) + "'");
            return x;
        }

        std::string hex64(std::uint64_t x)
        {
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
            return buf;
        }

        const std::vector<std::string_view> &known_keys()
        {
            static const std::vector<std::string_view> keys = {
                "satellites.angles_deg", "dish.diameter_m", "dish.freq_ghz", "lnb.count", "lnb.boresights_deg",
                "lnb.phases_deg", "noise.K", "mod.scheme", "mod.symbol_energy"};
            return keys;
        }
    } // namespace

    ScenarioConfig parse_config_text(std::string_view text)
    {
        std::map<std::string, std::string, std::less<>> entries;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size())
        {
            const auto eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
            ++line_no;

            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty())
                continue;

            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key(trim(line.substr(0, eq)));
            std::string value(trim(line.substr(eq + 1)));
            // A trailing comma continues the list on the next line.
            while (!value.empty() && value.back() == ',' && pos <= text.size())
            {
                const auto next_eol = text.find('\n', pos);
                std::string_view next = text.substr(pos, next_eol == std::string_view::npos ? std::string_view::npos : next_eol - pos);
                pos = next_eol == std::string_view::npos ? text.size() + 1 : next_eol + 1;
                ++line_no;
                if (const auto hash = next.find('#'); hash != std::string_view::npos)
                    next = next.substr(0, hash);
                value += ' ';
                value += trim(next);
            }
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": missing key");
            if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
                key_error(key, "unknown key (line " + std::to_string(line_no) + ")");
            if (value.empty())
                key_error(key, "missing value");
            if (!entries.emplace(key, value).second)
                key_error(key, "duplicate key (line " + std::to_string(line_no) + ")");
        }

        auto find = [&](std::string_view key) -> const std::string *
        {
            const auto it = entries.find(key);
            return it == entries.end() ? nullptr : &it->second;
        };

        ScenarioConfig cfg;
        const std::string *angles = find("satellites.angles_deg");
        if (!angles)
            key_error("satellites.angles_deg", "required key is missing");
        cfg.satellite_angles_deg = parse_list("satellites.angles_deg", *angles);

        if (const auto *v = find("dish.diameter_m"))
            cfg.dish_diameter_m = parse_scalar("dish.diameter_m", *v);
        if (const auto *v = find("dish.freq_ghz"))
            cfg.carrier_freq_ghz = parse_scalar("dish.freq_ghz", *v);
        if (const auto *v = find("mod.symbol_energy"))
            cfg.symbol_energy = parse_scalar("mod.symbol_energy", *v);
        if (const auto *v = find("mod.scheme"))
        {
            std::string scheme(trim(*v));
            std::transform(scheme.begin(), scheme.end(), scheme.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (scheme != "qpsk")
                key_error("mod.scheme", "unsupported scheme '" + std::string(trim(*v)) + "' (only qpsk)");
        }

        std::optional<std::size_t> count;
        if (const auto *v = find("lnb.count"))
        {
            std::size_t n = 0;
            if (!parse_unsigned(*v, n) || n == 0)
                key_error("lnb.count", "expected a positive integer");
            if (n > kMaxLnbs)
                key_error("lnb.count", "at most " + std::to_string(kMaxLnbs) + " LNBs are supported");
            count = n;
        }

        if (const auto *v = find("lnb.boresights_deg"))
        {
            cfg.lnb_boresights_deg = parse_list("lnb.boresights_deg", *v);
            if (count && *count != cfg.lnb_boresights_deg.size())
                key_error("lnb.count", "disagrees with the number of lnb.boresights_deg entries");
        }
        else
        {
            const std::size_t m = count.value_or(3);
            if (m >= cfg.satellite_angles_deg.size())
                key_error("satellites.angles_deg", "not overloaded (N_s = " + std::to_string(cfg.satellite_angles_deg.size()) +
                                                       " must exceed M = " + std::to_string(m) + ")");
            cfg.lnb_boresights_deg = default_boresights(cfg.satellite_angles_deg, m);
        }
        const std::size_t m = cfg.lnb_boresights_deg.size();

        if (const auto *v = find("lnb.phases_deg"))
            cfg.element_phases_deg = parse_list("lnb.phases_deg", *v);
        else
            cfg.element_phases_deg.assign(m, 0.0);

        if (const auto *v = find("noise.K"))
        {
            const auto values = parse_list("noise.K", *v);
            if (values.size() != m * m)
                key_error("noise.K", "expected " + std::to_string(m * m) + " row-major entries for M = " +
                                         std::to_string(m) + ", got " + std::to_string(values.size()));
            cfg.noise_corr = CMat(m, m);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < m; ++c)
                    cfg.noise_corr(r, c) = values[r * m + c];
        }
        else
            cfg.noise_corr = m == 3 ? reference_noise_correlation() : CMat::identity(m);

        validate(cfg, true);
        return cfg;
    }

    ScenarioConfig parse_config(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_config_text(buf.str());
    }

    std::uint64_t fnv1a(std::string_view bytes)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : bytes)
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::vector<double> RangeSpec::values() const
    {
        std::vector<double> out;
        const double slack = 1e-9 * step;
        for (std::size_t k = 0;; ++k)
        {
            double x = start + static_cast<double>(k) * step;
            if (x > stop + slack)
                break;
            // drop accumulated rounding so that grids print as typed (0, not 4.4e-16)
            x = std::round(x * 1e9) / 1e9;
            out.push_back(x);
        }
        return out;
    }

    RangeSpec parse_range(std::string_view text, std::string_view flag)
    {
        const std::string f(flag);
        std::vector<std::string_view> parts;
        std::size_t pos = 0;
        while (true)
        {
            const auto c = text.find(':', pos);
            parts.push_back(text.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
            if (c == std::string_view::npos)
                break;
            pos = c + 1;
        }
        RangeSpec r;
        if (parts.size() == 1)
        {
            if (!parse_double(parts[0], r.start))
                throw std::invalid_argument(f + ": invalid number '" + std::string(text) + "'");
            r.stop = r.start;
            r.step = 1;
        }
        else if (parts.size() == 3)
        {
            if (!parse_double(parts[0], r.start) || !parse_double(parts[1], r.step) || !parse_double(parts[2], r.stop))
                throw std::invalid_argument(f + ": expected START:STEP:STOP, got '" + std::string(text) + "'");
        }
        else
            throw std::invalid_argument(f + ": expected START:STEP:STOP, got '" + std::string(text) + "'");
        if (!(r.step > 0))
            throw std::invalid_argument(f + ": step must be positive");
        if (!(r.start <= r.stop))
            throw std::invalid_argument(f + ": start must not exceed stop");
        if ((r.stop - r.start) / r.step > 1e7)
            throw std::invalid_argument(f + ": grid has too many points");
        return r;
    }

    std::string_view to_string(RunMode mode)
    {
        switch (mode)
        {
        case RunMode::ber_sweep:
            return "ber-sweep";
        case RunMode::pattern_scan:
            return "pattern-scan";
        case RunMode::car_scan:
            return "car-scan";
        }
        return "?";
    }

    RunMode parse_run_mode(std::string_view text)
    {
        for (RunMode m : {RunMode::ber_sweep, RunMode::pattern_scan, RunMode::car_scan})
            if (to_string(m) == text)
                return m;
        throw std::invalid_argument("--mode: unknown mode '" + std::string(text) + "'");
    }

    void validate(const RunSpec &spec)
    {
        if (spec.config_path.empty())
            throw std::invalid_argument("--config: a scenario file is required");
        if (spec.mode == RunMode::ber_sweep && spec.detectors.empty())
            throw std::invalid_argument("--detectors: at least one detector is required");
        if (spec.trials < 1)
            throw std::invalid_argument("--trials: must be at least 1");
        if (!(spec.snr_db.step > 0) || !(spec.snr_db.start <= spec.snr_db.stop))
            throw std::invalid_argument("--snr: requires start <= stop and step > 0");
        if (!(spec.theta_deg.step > 0) || !(spec.theta_deg.start <= spec.theta_deg.stop))
            throw std::invalid_argument("--theta: requires start <= stop and step > 0");
        if (spec.signal && *spec.signal == 0)
            throw std::invalid_argument("--signal: positions start at 1");
        if (spec.output_path.empty())
            throw std::invalid_argument("--out: output path is empty");
    }

    std::string provenance_line(const RunSpec &spec, std::uint64_t config_hash)
    {
        return "# sicrx " + std::string(to_string(spec.mode)) + " seed=" + std::to_string(spec.seed) +
               " config_fnv1a=" + hex64(config_hash);
    }

    std::string format_number(double x)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", x);
        return buf;
    }

    std::string format_ber_row(const BerRecord &rec)
    {
        return format_number(rec.snr_db) + "," + std::string(to_string(rec.detector)) + "," + rec.signal_label() + "," +
               std::to_string(rec.bit_errors) + "," + std::to_string(rec.bits_total) + "," + format_number(rec.ber());
    }

    std::vector<BerRecord> read_ber_csv(std::istream &in)
    {
        std::vector<BerRecord> out;
        std::uint64_t seed = 0;
        bool header = false;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            const std::string_view l = trim(line);
            if (l.empty())
                continue;
            if (l.front() == '#')
            {
                if (const auto p = l.find("seed="); p != std::string_view::npos)
                {
                    auto rest = l.substr(p + 5);
                    rest = rest.substr(0, rest.find(' '));
                    if (!parse_unsigned(rest, seed))
                        throw std::invalid_argument("ber csv line " + std::to_string(line_no) + ": bad seed");
                }
                continue;
            }
            if (!header)
            {
                if (l != kBerCsvHeader)
                    throw std::invalid_argument("ber csv line " + std::to_string(line_no) + ": expected header '" +
                                                std::string(kBerCsvHeader) + "'");
                header = true;
                continue;
            }

            std::vector<std::string_view> f;
            std::size_t pos = 0;
            while (true)
            {
                const auto c = l.find(',', pos);
                f.push_back(l.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
                if (c == std::string_view::npos)
                    break;
                pos = c + 1;
            }
            const std::string where = "ber csv line " + std::to_string(line_no);
            if (f.size() != 6)
                throw std::invalid_argument(where + ": expected 6 fields");

            BerRecord rec;
            rec.seed = seed;
            if (!parse_double(f[0], rec.snr_db))
                throw std::invalid_argument(where + ": bad snr_db");
            rec.detector = parse_detector_id(f[1]);
            if (f[2] == "avg")
                rec.signal_index.reset();
            else
            {
                std::size_t s = 0;
                if (f[2].size() < 2 || f[2].front() != 's' || !parse_unsigned(f[2].substr(1), s) || s == 0)
                    throw std::invalid_argument(where + ": bad signal '" + std::string(f[2]) + "'");
                rec.signal_index = s - 1;
            }
            if (!parse_unsigned(f[3], rec.bit_errors) || !parse_unsigned(f[4], rec.bits_total))
                throw std::invalid_argument(where + ": bad counts");
            out.push_back(rec);
        }
        if (!header)
            throw std::invalid_argument("ber csv: missing header");
        return out;
    }

    namespace
    {
        double gain_db(std::span<const cplx> w, std::span<const cplx> a)
        {
            const double g = std::abs(dot(w, a));
            return g > 0 ? std::max(kGainFloorDb, 20.0 * std::log10(g)) : kGainFloorDb;
        }
    } // namespace

    std::vector<PatternRow> pattern_scan(const ScenarioConfig &cfg, double snr_db, std::span<const double> theta_deg,
                                         const CarParams &car)
    {
        const LinkSetup link = prepare_link(cfg, snr_db);
        const ArrayResponse &a = link.array;
        const std::size_t m = a.lnbs();
        const std::size_t md = a.desired.size();

        std::vector<std::pair<std::string, CVec>> beams;
        for (std::size_t i = 0; i < m; ++i)
        {
            CVec e(m, cplx(0.0));
            e[i] = 1.0;
            beams.emplace_back("lnb" + std::to_string(i + 1), std::move(e));
        }
        const CMat bank = mrc_weight_bank(a, link.cov);
        for (std::size_t k = 0; k < md; ++k)
        {
            const auto w = bank.col(k);
            beams.emplace_back("mrc-s" + std::to_string(k + 1), CVec(w.begin(), w.end()));
        }
        for (std::size_t k = 0; k < md; ++k)
            beams.emplace_back("ar-s" + std::to_string(k + 1), ar_weights(a, a.desired[k]).w);

        const SicPlan plan = plan_sic_hy_ml(a, link.cov, link.constellation, car);
        std::vector<std::pair<std::size_t, CVec>> car_beams;
        for (const auto &st : plan.stages())
            if (st.kind == BeamKind::car)
                car_beams.emplace_back(st.position, st.weights);
        std::sort(car_beams.begin(), car_beams.end(), [](const auto &x, const auto &y) { return x.first < y.first; });
        for (auto &[pos, w] : car_beams)
            beams.emplace_back("car-s" + std::to_string(pos + 1), std::move(w));

        std::vector<PatternRow> rows;
        rows.reserve(beams.size() * theta_deg.size());
        CVec steer(m);
        for (const auto &[id, w] : beams)
            for (double theta : theta_deg)
            {
                a.steering.response(theta, steer);
                rows.push_back({theta, id, gain_db(w, steer)});
            }
        return rows;
    }

    std::vector<CarScanRow> car_scan(const ScenarioConfig &cfg, std::size_t position, std::span<const double> theta_deg)
    {
        const ArrayResponse a = build_array_response(cfg);
        const std::size_t md = a.desired.size();
        if (position >= md)
            throw std::invalid_argument("--signal: desired signal " + std::to_string(position + 1) + " does not exist (M = " +
                                        std::to_string(md) + ")");
        if (position == a.main_position())
            throw std::invalid_argument("--signal: s" + std::to_string(position + 1) +
                                        " is the main signal, which is detected with MRC");

        const auto order = detection_order(md, a.main_position());
        std::vector<std::size_t> detected;
        for (std::size_t p : order)
        {
            if (p == position)
                break;
            detected.push_back(a.desired[p]);
        }
        const std::size_t target = a.desired[position];
        const auto interferer = closest_interferer(a, target, detected);
        if (!interferer)
            throw std::invalid_argument("--signal: no interferer remains for s" + std::to_string(position + 1));

        std::vector<CarScanRow> rows;
        rows.reserve(theta_deg.size());
        CVec steer(a.lnbs());
        for (double theta : theta_deg)
        {
            a.steering.response(theta, steer);
            rows.push_back({theta, car_objective(steer, a.column(target), a.column(*interferer))});
        }
        return rows;
    }

    namespace
    {
        std::string read_file(const std::string &path)
        {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw std::runtime_error("cannot open config file '" + path + "'");
            std::ostringstream buf;
            buf << in.rdbuf();
            return buf.str();
        }

        void run_to(const RunSpec &spec, const ScenarioConfig &cfg, std::uint64_t hash, std::ostream &out)
        {
            out << provenance_line(spec, hash) << '\n';
            switch (spec.mode)
            {
            case RunMode::ber_sweep:
            {
                out << kBerCsvHeader << '\n';
                RunOptions opt;
                opt.threads = spec.threads;
                opt.interference_free = spec.interference_free;
                const auto snr = spec.snr_db.values();
                run_sweep(cfg, spec.detectors, snr, spec.trials, spec.seed, opt,
                          [&](const BerRecord &rec) { out << format_ber_row(rec) << '\n' << std::flush; });
                break;
            }
            case RunMode::pattern_scan:
            {
                out << kPatternCsvHeader << '\n';
                const auto theta = spec.theta_deg.values();
                for (const auto &row : pattern_scan(cfg, spec.snr_db.start, theta))
                    out << format_number(row.theta_deg) << ',' << row.beam_id << ',' << format_number(row.gain_db) << '\n';
                break;
            }
            case RunMode::car_scan:
            {
                out << kCarCsvHeader << '\n';
                const ArrayResponse a = build_array_response(cfg);
                std::size_t position = 0;
                if (spec.signal)
                    position = *spec.signal - 1;
                else
                    position = detection_order(a.desired.size(), a.main_position()).at(1);
                const auto theta = spec.theta_deg.values();
                for (const auto &row : car_scan(cfg, position, theta))
                    out << format_number(row.theta_deg) << ',' << format_number(row.objective) << '\n';
                break;
            }
            }
        }
    } // namespace

    int run(const RunSpec &spec)
    {
        validate(spec);
        const std::string text = read_file(spec.config_path);
        const ScenarioConfig cfg = parse_config_text(text);
        const std::uint64_t hash = fnv1a(text);

        if (spec.output_path == "-")
        {
            run_to(spec, cfg, hash, std::cout);
            std::cout.flush();
            if (!std::cout)
                throw std::runtime_error("failed writing to stdout");
            return 0;
        }
        std::ofstream out(spec.output_path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open output file '" + spec.output_path + "'");
        run_to(spec, cfg, hash, out);
        out.close();
        if (!out)
            throw std::runtime_error("failed writing output file '" + spec.output_path + "'");
        return 0;
    }

    int main_entry(int argc, char **argv)
    {
        CLI::App app{"sicrx: SIC receiver simulator for overloaded multi-LNB satellite reception"};
        app.option_defaults()->always_capture_default();

        RunSpec spec;
        std::string mode = "ber-sweep";
        std::string detectors = "all";
        std::string snr = "14";
        std::string theta = "-8:0.05:8";
        std::size_t signal = 0;

        app.add_option("--config", spec.config_path, "Scenario file (key = value)")->required();
        app.add_option("--mode", mode, "ber-sweep | pattern-scan | car-scan");
        app.add_option("--detectors", detectors,
                       "Comma-separated ids: sic-hy-ml, sic-mrc-ml, sic-dml, jml, mrc-jml, mmse, or all");
        app.add_option("--snr", snr, "SNR grid in dB, START:STEP:STOP or a single value");
        app.add_option("--trials", spec.trials, "Symbol vectors per detector and SNR point");
        app.add_option("--seed", spec.seed, "Base seed");
        app.add_option("--out", spec.output_path, "Output CSV, - for stdout");
        app.add_option("--theta", theta, "Scan grid in degrees for pattern-scan and car-scan");
        app.add_option("--signal", signal, "car-scan target, 1-based desired signal (default: first CAR stage)");
        app.add_flag("--interference-free", spec.interference_free, "Silence interferers after fixing the noise power");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::ParseError &e)
        {
            return app.exit(e);
        }

        try
        {
            spec.mode = parse_run_mode(mode);
            spec.snr_db = parse_range(snr, "--snr");
            spec.theta_deg = parse_range(theta, "--theta");
            if (signal != 0)
                spec.signal = signal;
            spec.detectors.clear();
            if (detectors == "all")
                spec.detectors = all_detectors();
            else
            {
                std::stringstream ss(detectors);
                std::string id;
                while (std::getline(ss, id, ','))
                {
                    const auto t = trim(id);
                    if (t.empty())
                        throw std::invalid_argument("--detectors: empty entry");
                    try
                    {
                        spec.detectors.push_back(parse_detector_id(t));
                    }
                    catch (const std::invalid_argument &e)
                    {
                        throw std::invalid_argument(std::string("--detectors: ") + e.what());
                    }
                }
            }
            spec.threads = threads_from_environment();
            return run(spec);
        }
        catch (const std::exception &e)
        {
            std::cerr << "sicrx: error: " << e.what() << '\n';
            return 1;
        }
    }

} // namespace sicrx
