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

#ifndef SICRX_SCENARIO_HPP
#define SICRX_SCENARIO_HPP

#include "sicrx/numerics.hpp"
#include "sicrx/random.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sicrx
{
    inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
    inline constexpr double kPatternFloorDb = -30.0;      // amplitude gains below this are clamped to 0
    inline constexpr std::size_t kMaxLnbs = 8;

    // Physical setup: GEO satellite positions, dish and LNB feeds, noise correlation.
    struct ScenarioConfig
    {
        std::vector<double> satellite_angles_deg; // N_s GEO angles
        std::vector<double> lnb_boresights_deg;   // M feed boresights
        double dish_diameter_m = 0.35;
        double carrier_freq_ghz = 11.7;
        CMat noise_corr;                          // M x M real correlation matrix K
        double symbol_energy = 1.0;
        std::vector<double> element_phases_deg;   // M per-feed phase offsets, default zeros

        std::size_t lnb_count() const { return lnb_boresights_deg.size(); }
        std::size_t satellite_count() const { return satellite_angles_deg.size(); }
    };

    // Validates every ScenarioConfig invariant; messages name the config key at fault.
    // The overload condition N_s > M is only required when `require_overloaded` is set,
    // so that square (interferer-free) setups remain constructible for analysis.
    // Throws std::invalid_argument.
    void validate(const ScenarioConfig &cfg, bool require_overloaded = true);

    // Correlation matrix measured for the three-LNB 35 cm dish.
    CMat reference_noise_correlation();

    // Five satellites at -2.8, 0, 3, -5.9, 5.7 deg; three LNBs on a 35 cm dish.
    ScenarioConfig reference_scenario();

    // The M satellites closest to theta = 0 (ties toward lower index), returned in
    // ascending angle order.
    std::vector<std::size_t> select_desired(std::span<const double> satellite_angles_deg, std::size_t m);

    // Feed boresights aimed at the desired satellites.
    std::vector<double> default_boresights(std::span<const double> satellite_angles_deg, std::size_t m);

    // Amplitude gain of a uniformly illuminated circular aperture, |2 J1(u) / u| with
    // u = pi (D / lambda) sin(theta - boresight). Unity on boresight, even about it,
    // and clamped to 0 where it falls below kPatternFloorDb.
    double pattern_gain(double boresight_deg, double theta_deg, double dish_diameter_m, double carrier_freq_ghz);

    // a(theta): complex gain of every feed toward direction theta.
    class SteeringModel
    {
    public:
        SteeringModel() = default;
        explicit SteeringModel(const ScenarioConfig &cfg);

        std::size_t lnbs() const { return boresights_deg_.size(); }
        void response(double theta_deg, std::span<cplx> out) const;
        CVec response(double theta_deg) const;

    private:
        std::vector<double> boresights_deg_;
        std::vector<cplx> phasors_;
        double dish_diameter_m_ = 0.0;
        double carrier_freq_ghz_ = 0.0;
    };

    // A = [a_1 ... a_Ns] with its desired / interferer partition.
    struct ArrayResponse
    {
        CMat a;                                  // M x N_s
        std::vector<double> angles_deg;          // satellite angle per column
        std::vector<std::size_t> desired;        // M columns, ascending angle
        std::vector<std::size_t> interferers;    // N_s - M columns, ascending angle
        SteeringModel steering;

        std::size_t lnbs() const { return a.rows(); }
        std::size_t satellites() const { return a.cols(); }
        std::span<const cplx> column(std::size_t j) const { return a.col(j); }

        // Position within `desired` of the main desired signal (closest to theta = 0).
        std::size_t main_position() const;

        // M x M block A_d.
        CMat desired_block() const;

        // Same setup with every interferer column set to zero.
        ArrayResponse with_interferers_silenced() const;
    };

    // Throws std::invalid_argument on config invariant violations (N_s >= M required).
    ArrayResponse build_array_response(const ScenarioConfig &cfg);

    // sigma^2 = E_s ||A||_F^2 / (10^(snr_db / 10) M)
    double noise_power(const ArrayResponse &a, double snr_db, double symbol_energy);

    // Correlated Gaussian noise with covariance sigma^2 K.
    struct NoiseModel
    {
        double sigma_sq = 0.0;
        CMat corr;      // K
        CMat corr_chol; // L, L L^H = K

        std::size_t lnbs() const { return corr.rows(); }
    };

    NoiseModel make_noise_model(const CMat &corr, double sigma_sq);

    // n = sqrt(sigma^2) L z, z circular standard normal. Draws exactly M complex normals.
    void sample_noise(const NoiseModel &model, Rng &rng, std::span<cplx> out);
    CVec sample_noise(const NoiseModel &model, Rng &rng);

} // namespace sicrx

#endif
