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

#ifndef SICRX_BEAMFORMING_HPP
#define SICRX_BEAMFORMING_HPP

#include "sicrx/numerics.hpp"
#include "sicrx/scenario.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sicrx
{
    enum class BeamKind
    {
        mrc,
        ar,
        car
    };

    std::string_view to_string(BeamKind kind);

    struct BeamWeights
    {
        CVec w;
        BeamKind kind = BeamKind::ar;
        std::size_t target = 0;      // satellite column
        double steer_angle_deg = 0;  // AR / CAR steering direction
        double sinr = 0;             // MRC only: dominant generalized eigenvalue
    };

    // Model covariance of r = A s + n for uncorrelated unit-rate symbols.
    struct CovarianceSet
    {
        CMat total;                    // R = sum_m R_m + R_n
        std::vector<CMat> per_signal;  // R_m = E_s a_m a_m^H, one per satellite column
        CMat noise;                    // R_n = sigma^2 K
        CMat steering;                 // A, kept for phase normalization
        double symbol_energy = 1.0;
    };

    CovarianceSet build_covariances(const ArrayResponse &a, const NoiseModel &noise, double symbol_energy);

    // Max-SINR weights for satellite column m against every signal not listed in
    // `cancelled`. Solves the generalized problem R_m w = l (R' - R_m) w, with
    // R' = R - sum_{c in cancelled} R_c, via R' - R_m = L L^H and the Hermitian
    // matrix L^-1 R_m L^-H. The returned w satisfies w^H a_m = 1.
    // Throws std::domain_error when R' - R_m is singular.
    BeamWeights mrc_weights(const CovarianceSet &cov, std::size_t m, std::span<const std::size_t> cancelled = {});

    // w = a_n / ||a_n||^2. Throws std::invalid_argument for a zero column.
    BeamWeights ar_weights(const ArrayResponse &a, std::size_t n);

    // w^H R_m w / w^H (R' - R_m) w with the same R' convention as mrc_weights.
    double sinr(const CovarianceSet &cov, std::size_t m, std::span<const cplx> w, std::span<const std::size_t> cancelled = {});

    using SteeringFn = std::function<CVec(double)>;

    struct CarParams
    {
        double margin_deg = 0.5;      // search range padding around [target, main]
        double grid_step_deg = 0.01;
    };

    struct CarSearch
    {
        double lo_deg = 0;
        double hi_deg = 0;
        double step_deg = 0.01;
    };

    struct CarResult
    {
        BeamWeights weights;
        double objective = 0;     // at the chosen angle
        double ar_objective = 0;  // at the target's own angle
        bool separable = true;    // false when every grid point has objective <= 0
        std::optional<std::size_t> interferer;
    };

    // |w^H a_target| - |w^H a_interferer| for w = steer / ||steer||^2.
    // Returns -inf for an all-zero steering vector.
    double car_objective(std::span<const cplx> steer, std::span<const cplx> target, std::span<const cplx> interferer);

    // Grid anchored on target_angle_deg: target + k step for every k that keeps the
    // point inside [lo, hi], so the target is on the grid whenever it lies in range.
    std::vector<double> car_grid(double target_angle_deg, const CarSearch &search);

    // Exhaustive grid search of car_objective; ties go to the angle nearest the target.
    // Throws std::invalid_argument for an empty interval or non-positive step.
    CarResult car_weights(const SteeringFn &steering, std::span<const cplx> target_response, double target_angle_deg,
                          std::span<const cplx> interferer_response, const CarSearch &search, std::size_t target_index);

    // Not-yet-detected satellite with the smallest angular distance to `target`
    // (ties toward the lower column). Empty when no other satellite remains.
    std::optional<std::size_t> closest_interferer(const ArrayResponse &a, std::size_t target,
                                                  std::span<const std::size_t> detected);

    // [min, max] of {target angle, main angle} widened by params.margin_deg.
    CarSearch car_search_range(const ArrayResponse &a, std::size_t target, const CarParams &params);

    // CAR weights for `target` after the columns in `detected` have been cancelled.
    // Falls back to plain AR steering when no other satellite remains.
    CarResult car_weights(const ArrayResponse &a, std::size_t target, std::span<const std::size_t> detected,
                          const CarParams &params = {});

} // namespace sicrx

#endif
