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

#include "sicrx/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sicrx
{
    std::string_view to_string(BeamKind kind)
    {
        switch (kind)
        {
        case BeamKind::mrc:
            return "mrc";
        case BeamKind::ar:
            return "ar";
        case BeamKind::car:
            return "car";
        }
        return "?";
    }

    CovarianceSet build_covariances(const ArrayResponse &a, const NoiseModel &noise, double symbol_energy)
    {
        if (noise.lnbs() != a.lnbs())
            throw std::invalid_argument("build_covariances: noise model and array size differ");
        CovarianceSet cov;
        cov.noise = noise.sigma_sq * noise.corr;
        cov.total = cov.noise;
        cov.steering = a.a;
        cov.symbol_energy = symbol_energy;
        cov.per_signal.reserve(a.satellites());
        for (std::size_t j = 0; j < a.satellites(); ++j)
        {
            cov.per_signal.push_back(outer(a.column(j), symbol_energy));
            cov.total += cov.per_signal.back();
        }
        return cov;
    }

    namespace
    {
        CMat active_covariance(const CovarianceSet &cov, std::span<const std::size_t> cancelled)
        {
            CMat r = cov.total;
            for (std::size_t c : cancelled)
                r -= cov.per_signal.at(c);
            return r;
        }

        double quad_form(const CMat &x, std::span<const cplx> w)
        {
            return dot(w, x * w).real();
        }
    } // namespace

    BeamWeights mrc_weights(const CovarianceSet &cov, std::size_t m, std::span<const std::size_t> cancelled)
    {
        if (m >= cov.per_signal.size())
            throw std::out_of_range("mrc_weights: signal index out of range");
        if (std::find(cancelled.begin(), cancelled.end(), m) != cancelled.end())
            throw std::invalid_argument("mrc_weights: target signal is already cancelled");

        const CMat &rm = cov.per_signal[m];
        const CMat others = active_covariance(cov, cancelled) - rm;

        CMat l;
        try
        {
            l = cholesky_lower(others);
        }
        catch (const std::domain_error &)
        {
            throw std::domain_error("mrc_weights: interference-plus-noise covariance is singular");
        }
        const CMat linv = inverse_lower(l);
        CMat whitened = linv * rm * linv.adjoint();
        // Restore exact Hermitian symmetry lost to rounding.
        whitened = 0.5 * (whitened + whitened.adjoint());

        const auto dominant = hermitian_dominant_eigvec(whitened);
        CVec w = linv.adjoint() * dominant.vector;

        const cplx response = dot(w, cov.steering.col(m));
        if (std::abs(response) == 0.0)
            throw std::domain_error("mrc_weights: target has no response");
        const cplx fix = 1.0 / std::conj(response);
        for (auto &x : w)
            x *= fix;

        BeamWeights out;
        out.w = std::move(w);
        out.kind = BeamKind::mrc;
        out.target = m;
        out.sinr = dominant.value;
        return out;
    }

    double sinr(const CovarianceSet &cov, std::size_t m, std::span<const cplx> w, std::span<const std::size_t> cancelled)
    {
        const CMat &rm = cov.per_signal.at(m);
        const CMat others = active_covariance(cov, cancelled) - rm;
        return quad_form(rm, w) / quad_form(others, w);
    }

    BeamWeights ar_weights(const ArrayResponse &a, std::size_t n)
    {
        if (n >= a.satellites())
            throw std::out_of_range("ar_weights: signal index out of range");
        const auto col = a.column(n);
        const double energy = norm_sq(col);
        if (energy == 0.0)
            throw std::invalid_argument("ar_weights: zero array response column");
        BeamWeights out;
        out.w.assign(col.begin(), col.end());
        for (auto &x : out.w)
            x /= energy;
        out.kind = BeamKind::ar;
        out.target = n;
        out.steer_angle_deg = a.angles_deg.at(n);
        return out;
    }

    double car_objective(std::span<const cplx> steer, std::span<const cplx> target, std::span<const cplx> interferer)
    {
        const double energy = norm_sq(steer);
        if (energy == 0.0)
            return -std::numeric_limits<double>::infinity();
        return (std::abs(dot(steer, target)) - std::abs(dot(steer, interferer))) / energy;
    }

    std::vector<double> car_grid(double target_angle_deg, const CarSearch &search)
    {
        if (!(search.step_deg > 0.0) || !std::isfinite(search.step_deg))
            throw std::invalid_argument("car_grid: grid step must be positive");
        if (!(search.lo_deg <= search.hi_deg))
            throw std::invalid_argument("car_grid: empty search interval");
        const double slack = 1e-9;
        const auto k_lo = static_cast<long long>(std::ceil((search.lo_deg - target_angle_deg) / search.step_deg - slack));
        const auto k_hi = static_cast<long long>(std::floor((search.hi_deg - target_angle_deg) / search.step_deg + slack));
        std::vector<double> grid;
        grid.reserve(static_cast<std::size_t>(std::max(0LL, k_hi - k_lo + 1)));
        for (long long k = k_lo; k <= k_hi; ++k)
            grid.push_back(target_angle_deg + static_cast<double>(k) * search.step_deg);
        return grid;
    }

    CarResult car_weights(const SteeringFn &steering, std::span<const cplx> target_response, double target_angle_deg,
                          std::span<const cplx> interferer_response, const CarSearch &search, std::size_t target_index)
    {
        const auto grid = car_grid(target_angle_deg, search);
        if (grid.empty())
            throw std::invalid_argument("car_weights: search grid is empty");

        double best_obj = -std::numeric_limits<double>::infinity();
        double best_theta = target_angle_deg;
        CVec best_steer;
        bool found = false;
        for (double theta : grid)
        {
            CVec steer = steering(theta);
            const double obj = car_objective(steer, target_response, interferer_response);
            if (!std::isfinite(obj))
                continue;
            const bool better = !found || obj > best_obj ||
                                (obj == best_obj && std::abs(theta - target_angle_deg) < std::abs(best_theta - target_angle_deg));
            if (better)
            {
                found = true;
                best_obj = obj;
                best_theta = theta;
                best_steer = std::move(steer);
            }
        }
        if (!found)
            throw std::invalid_argument("car_weights: steering response vanishes over the whole search range");

        CarResult out;
        const double energy = norm_sq(best_steer);
        out.weights.w = best_steer;
        for (auto &x : out.weights.w)
            x /= energy;
        out.weights.kind = BeamKind::car;
        out.weights.target = target_index;
        out.weights.steer_angle_deg = best_theta;
        out.objective = best_obj;
        out.ar_objective = car_objective(steering(target_angle_deg), target_response, interferer_response);
        out.separable = best_obj > 0.0;
        return out;
    }

    std::optional<std::size_t> closest_interferer(const ArrayResponse &a, std::size_t target,
                                                  std::span<const std::size_t> detected)
    {
        std::optional<std::size_t> best;
        double best_gap = std::numeric_limits<double>::infinity();
        const double theta = a.angles_deg.at(target);
        for (std::size_t j = 0; j < a.satellites(); ++j)
        {
            if (j == target || std::find(detected.begin(), detected.end(), j) != detected.end())
                continue;
            const double gap = std::abs(a.angles_deg[j] - theta);
            if (gap < best_gap)
            {
                best_gap = gap;
                best = j;
            }
        }
        return best;
    }

    CarSearch car_search_range(const ArrayResponse &a, std::size_t target, const CarParams &params)
    {
        const double theta_t = a.angles_deg.at(target);
        const double theta_main = a.angles_deg.at(a.desired.at(a.main_position()));
        return CarSearch{std::min(theta_t, theta_main) - params.margin_deg,
                         std::max(theta_t, theta_main) + params.margin_deg,
                         params.grid_step_deg};
    }

    CarResult car_weights(const ArrayResponse &a, std::size_t target, std::span<const std::size_t> detected,
                          const CarParams &params)
    {
        const auto interferer = closest_interferer(a, target, detected);
        if (!interferer)
        {
            CarResult out;
            out.weights = ar_weights(a, target);
            out.weights.kind = BeamKind::car;
            out.objective = out.ar_objective = 1.0;
            return out;
        }
        const SteeringModel &model = a.steering;
        const SteeringFn steer = [&model](double theta)
        { return model.response(theta); };
        auto out = car_weights(steer, a.column(target), a.angles_deg.at(target), a.column(*interferer),
                               car_search_range(a, target, params), target);
        out.interferer = interferer;
        return out;
    }

} // namespace sicrx
