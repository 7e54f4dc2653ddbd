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

#include "sicrx/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sicrx
{
    namespace
    {
        constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

        [[noreturn]] void fail(const std::string &key, const std::string &what)
        {
            throw std::invalid_argument(key + ": " + what);
        }
    } // namespace

    void validate(const ScenarioConfig &cfg, bool require_overloaded)
    {
        const std::size_t ns = cfg.satellite_count();
        const std::size_t m = cfg.lnb_count();

        if (ns == 0)
            fail("satellites.angles_deg", "at least one satellite is required");
        if (m == 0)
            fail("lnb.boresights_deg", "at least one LNB is required");
        if (m > kMaxLnbs)
            fail("lnb.boresights_deg", "at most " + std::to_string(kMaxLnbs) + " LNBs are supported");
        if (require_overloaded && ns <= m)
            fail("satellites.angles_deg", "not overloaded (N_s = " + std::to_string(ns) +
                                              " must exceed M = " + std::to_string(m) + ")");
        if (ns < m)
            fail("satellites.angles_deg", "fewer satellites than LNBs");

        for (double a : cfg.satellite_angles_deg)
            if (!std::isfinite(a))
                fail("satellites.angles_deg", "non-finite angle");
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = i + 1; j < ns; ++j)
                if (cfg.satellite_angles_deg[i] == cfg.satellite_angles_deg[j])
                    fail("satellites.angles_deg", "angles must be pairwise distinct");
        for (double b : cfg.lnb_boresights_deg)
            if (!std::isfinite(b))
                fail("lnb.boresights_deg", "non-finite boresight");

        if (!(cfg.dish_diameter_m > 0.0) || !std::isfinite(cfg.dish_diameter_m))
            fail("dish.diameter_m", "must be positive");
        if (!(cfg.carrier_freq_ghz > 0.0) || !std::isfinite(cfg.carrier_freq_ghz))
            fail("dish.freq_ghz", "must be positive");
        if (!(cfg.symbol_energy > 0.0) || !std::isfinite(cfg.symbol_energy))
            fail("mod.symbol_energy", "must be positive");

        if (!cfg.element_phases_deg.empty() && cfg.element_phases_deg.size() != m)
            fail("lnb.phases_deg", "expected " + std::to_string(m) + " values");

        const CMat &k = cfg.noise_corr;
        if (k.rows() != m || k.cols() != m)
            fail("noise.K", "expected a " + std::to_string(m) + "x" + std::to_string(m) + " matrix");
        for (std::size_t r = 0; r < m; ++r)
        {
            if (std::abs(k(r, r) - 1.0) > 1e-12)
                fail("noise.K", "diagonal entries must be 1");
            for (std::size_t c = 0; c < m; ++c)
            {
                if (k(r, c).imag() != 0.0)
                    fail("noise.K", "entries must be real");
                if (std::abs(k(r, c) - k(c, r)) > 1e-12)
                    fail("noise.K", "matrix must be symmetric");
            }
        }
        try
        {
            (void)cholesky_lower(k);
        }
        catch (const std::domain_error &)
        {
            fail("noise.K", "matrix must be positive definite");
        }
    }

    CMat reference_noise_correlation()
    {
        return CMat{{1.0, 0.1, 0.05},
                    {0.1, 1.0, 0.1},
                    {0.05, 0.1, 1.0}};
    }

    ScenarioConfig reference_scenario()
    {
        ScenarioConfig cfg;
        cfg.satellite_angles_deg = {-2.8, 0.0, 3.0, -5.9, 5.7};
        cfg.lnb_boresights_deg = default_boresights(cfg.satellite_angles_deg, 3);
        cfg.dish_diameter_m = 0.35;
        cfg.carrier_freq_ghz = 11.7;
        cfg.noise_corr = reference_noise_correlation();
        cfg.symbol_energy = 1.0;
        cfg.element_phases_deg = {0.0, 0.0, 0.0};
        return cfg;
    }

    std::vector<std::size_t> select_desired(std::span<const double> satellite_angles_deg, std::size_t m)
    {
        if (m > satellite_angles_deg.size())
            throw std::invalid_argument("select_desired: more desired signals than satellites");
        std::vector<std::size_t> idx(satellite_angles_deg.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j)
                         { return std::abs(satellite_angles_deg[i]) < std::abs(satellite_angles_deg[j]); });
        idx.resize(m);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j)
                         { return satellite_angles_deg[i] < satellite_angles_deg[j]; });
        return idx;
    }

    std::vector<double> default_boresights(std::span<const double> satellite_angles_deg, std::size_t m)
    {
        std::vector<double> out;
        for (std::size_t j : select_desired(satellite_angles_deg, m))
            out.push_back(satellite_angles_deg[j]);
        return out;
    }

    double pattern_gain(double boresight_deg, double theta_deg, double dish_diameter_m, double carrier_freq_ghz)
    {
        const double wavelength = kSpeedOfLight / (carrier_freq_ghz * 1e9);
        const double u = std::numbers::pi * (dish_diameter_m / wavelength) * std::sin(deg2rad(theta_deg - boresight_deg));
        const double au = std::abs(u);
        // 2 J1(u) / u = 1 - u^2/8 + O(u^4)
        const double gain = au < 1e-6 ? 1.0 - u * u / 8.0 : std::abs(2.0 * std::cyl_bessel_j(1.0, au) / au);
        static const double floor_amplitude = std::pow(10.0, kPatternFloorDb / 20.0);
        return gain < floor_amplitude ? 0.0 : std::min(gain, 1.0);
    }

    SteeringModel::SteeringModel(const ScenarioConfig &cfg)
        : boresights_deg_(cfg.lnb_boresights_deg),
          dish_diameter_m_(cfg.dish_diameter_m),
          carrier_freq_ghz_(cfg.carrier_freq_ghz)
    {
        phasors_.resize(boresights_deg_.size(), cplx(1.0, 0.0));
        if (!cfg.element_phases_deg.empty())
            for (std::size_t i = 0; i < phasors_.size(); ++i)
                phasors_[i] = std::polar(1.0, deg2rad(cfg.element_phases_deg[i]));
    }

    void SteeringModel::response(double theta_deg, std::span<cplx> out) const
    {
        if (out.size() != boresights_deg_.size())
            throw std::invalid_argument("SteeringModel::response: output length mismatch");
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = pattern_gain(boresights_deg_[i], theta_deg, dish_diameter_m_, carrier_freq_ghz_) * phasors_[i];
    }

    CVec SteeringModel::response(double theta_deg) const
    {
        CVec out(boresights_deg_.size());
        response(theta_deg, out);
        return out;
    }

    std::size_t ArrayResponse::main_position() const
    {
        std::size_t best = 0;
        for (std::size_t k = 1; k < desired.size(); ++k)
            if (std::abs(angles_deg[desired[k]]) < std::abs(angles_deg[desired[best]]))
                best = k;
        return best;
    }

    CMat ArrayResponse::desired_block() const
    {
        CMat out(lnbs(), desired.size());
        for (std::size_t k = 0; k < desired.size(); ++k)
            std::copy(a.col(desired[k]).begin(), a.col(desired[k]).end(), out.col(k).begin());
        return out;
    }

    ArrayResponse ArrayResponse::with_interferers_silenced() const
    {
        ArrayResponse out = *this;
        for (std::size_t j : interferers)
            std::fill(out.a.col(j).begin(), out.a.col(j).end(), cplx(0.0));
        return out;
    }

    ArrayResponse build_array_response(const ScenarioConfig &cfg)
    {
        validate(cfg, false);
        const std::size_t m = cfg.lnb_count();
        const std::size_t ns = cfg.satellite_count();

        ArrayResponse out;
        out.steering = SteeringModel(cfg);
        out.angles_deg = cfg.satellite_angles_deg;
        out.a = CMat(m, ns);
        for (std::size_t j = 0; j < ns; ++j)
        {
            out.steering.response(cfg.satellite_angles_deg[j], out.a.col(j));
            if (norm_sq(out.a.col(j)) == 0.0)
                throw std::invalid_argument("satellites.angles_deg: satellite " + std::to_string(j + 1) +
                                            " is outside every LNB pattern");
        }

        out.desired = select_desired(cfg.satellite_angles_deg, m);
        for (std::size_t j = 0; j < ns; ++j)
            if (std::find(out.desired.begin(), out.desired.end(), j) == out.desired.end())
                out.interferers.push_back(j);
        std::stable_sort(out.interferers.begin(), out.interferers.end(), [&](std::size_t i, std::size_t j)
                         { return cfg.satellite_angles_deg[i] < cfg.satellite_angles_deg[j]; });
        return out;
    }

    double noise_power(const ArrayResponse &a, double snr_db, double symbol_energy)
    {
        const double snr = std::pow(10.0, snr_db / 10.0);
        return symbol_energy * frobenius_norm_sq(a.a) / (snr * static_cast<double>(a.lnbs()));
    }

    NoiseModel make_noise_model(const CMat &corr, double sigma_sq)
    {
        if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq))
            throw std::invalid_argument("make_noise_model: noise power must be finite and non-negative");
        if (corr.rows() > kMaxLnbs)
            throw std::invalid_argument("make_noise_model: too many LNBs");
        return NoiseModel{sigma_sq, corr, cholesky_lower(corr)};
    }

    void sample_noise(const NoiseModel &model, Rng &rng, std::span<cplx> out)
    {
        const std::size_t m = model.lnbs();
        if (out.size() != m)
            throw std::invalid_argument("sample_noise: output length mismatch");
        std::array<cplx, kMaxLnbs> z{};
        for (std::size_t i = 0; i < m; ++i)
            z[i] = rng.complex_normal();
        const double amplitude = std::sqrt(model.sigma_sq);
        for (std::size_t r = 0; r < m; ++r)
        {
            cplx acc = 0.0;
            for (std::size_t c = 0; c <= r; ++c)
                acc += model.corr_chol(r, c) * z[c];
            out[r] = amplitude * acc;
        }
    }

    CVec sample_noise(const NoiseModel &model, Rng &rng)
    {
        CVec out(model.lnbs());
        sample_noise(model, rng, out);
        return out;
    }

} // namespace sicrx
