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

#include "sicrx/detection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sicrx
{
    Constellation Constellation::qpsk(double symbol_energy)
    {
        if (!(symbol_energy > 0.0))
            throw std::invalid_argument("Constellation::qpsk: symbol energy must be positive");
        const double a = std::sqrt(symbol_energy / 2.0);
        Constellation c;
        c.points_ = {{a, a}, {-a, a}, {-a, -a}, {a, -a}};
        c.labels_ = {0b00, 0b10, 0b11, 0b01};
        c.bits_per_symbol_ = 2;
        c.energy_ = symbol_energy;
        return c;
    }

    std::string_view to_string(DetectorId id)
    {
        switch (id)
        {
        case DetectorId::sic_hy_ml:
            return "sic-hy-ml";
        case DetectorId::sic_mrc_ml:
            return "sic-mrc-ml";
        case DetectorId::sic_dml:
            return "sic-dml";
        case DetectorId::jml:
            return "jml";
        case DetectorId::mrc_jml:
            return "mrc-jml";
        case DetectorId::mmse:
            return "mmse";
        }
        return "?";
    }

    std::vector<DetectorId> all_detectors()
    {
        return {DetectorId::sic_hy_ml, DetectorId::sic_mrc_ml, DetectorId::sic_dml,
                DetectorId::jml, DetectorId::mrc_jml, DetectorId::mmse};
    }

    DetectorId parse_detector_id(std::string_view text)
    {
        for (auto id : all_detectors())
            if (to_string(id) == text)
                return id;
        throw std::invalid_argument("unknown detector id '" + std::string(text) + "'");
    }

    std::vector<std::vector<unsigned char>> DetectionResult::bits(unsigned bits_per_symbol) const
    {
        std::vector<std::vector<unsigned char>> out;
        out.reserve(labels.size());
        for (unsigned label : labels)
        {
            std::vector<unsigned char> row(bits_per_symbol);
            for (unsigned b = 0; b < bits_per_symbol; ++b)
                row[b] = static_cast<unsigned char>((label >> (bits_per_symbol - 1 - b)) & 1U);
            out.push_back(std::move(row));
        }
        return out;
    }

    DetectionResult make_result(DetectorId id, std::span<const std::size_t> indices, const Constellation &constellation)
    {
        DetectionResult out;
        out.detector = id;
        out.symbol_indices.assign(indices.begin(), indices.end());
        for (std::size_t i : indices)
        {
            out.decisions.push_back(constellation.point(i));
            out.labels.push_back(constellation.label(i));
        }
        return out;
    }

    namespace
    {
        std::size_t nearest(cplx p, std::span<const cplx> candidates)
        {
            std::size_t best = 0;
            double best_d = std::norm(p - candidates[0]);
            for (std::size_t i = 1; i < candidates.size(); ++i)
            {
                const double d = std::norm(p - candidates[i]);
                if (d < best_d)
                {
                    best_d = d;
                    best = i;
                }
            }
            return best;
        }
    } // namespace

    std::size_t slicer_ml_index(cplx p, cplx coeff, const Constellation &constellation)
    {
        if (coeff == 0.0)
            throw std::invalid_argument("slicer_ml: channel coefficient is zero");
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < constellation.size(); ++i)
        {
            const double d = std::norm(p - coeff * constellation.point(i));
            if (d < best_d)
            {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    cplx slicer_ml(cplx p, cplx coeff, const Constellation &constellation)
    {
        return constellation.point(slicer_ml_index(p, coeff, constellation));
    }

    // ---------------------------------------------------------------- SIC

    SicPlan::SicPlan(DetectorId id, std::vector<SicStage> stages, const Constellation &constellation)
        : id_(id), stages_(std::move(stages)), points_(constellation.points().begin(), constellation.points().end())
    {
        if (stages_.empty() || stages_.size() > kMaxLnbs)
            throw std::invalid_argument("SicPlan: stage count out of range");
        for (const auto &s : stages_)
        {
            if (s.coeff == 0.0)
                throw std::invalid_argument("SicPlan: beamformer has no response toward signal " +
                                            std::to_string(s.column + 1));
            for (const auto &pt : points_)
                scaled_points_.push_back(s.coeff * pt);
        }
    }

    void SicPlan::detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices) const
    {
        detect(r, symbol_indices, {});
    }

    void SicPlan::detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices, std::span<cplx> residual) const
    {
        const std::size_t m = r.size();
        if (m > kMaxLnbs || symbol_indices.size() != stages_.size())
            throw std::invalid_argument("SicPlan::detect: size mismatch");
        std::array<cplx, kMaxLnbs> rr{};
        std::copy(r.begin(), r.end(), rr.begin());
        const std::size_t q = points_.size();

        for (std::size_t k = 0; k < stages_.size(); ++k)
        {
            const SicStage &stage = stages_[k];
            cplx p = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                p += std::conj(stage.weights[i]) * rr[i];
            const std::size_t idx = nearest(p, std::span<const cplx>(scaled_points_).subspan(k * q, q));
            symbol_indices[stage.position] = idx;
            const cplx s = points_[idx];
            for (std::size_t i = 0; i < m; ++i)
                rr[i] -= stage.response[i] * s;
        }
        if (!residual.empty())
        {
            if (residual.size() != m)
                throw std::invalid_argument("SicPlan::detect: residual size mismatch");
            std::copy(rr.begin(), rr.begin() + static_cast<std::ptrdiff_t>(m), residual.begin());
        }
    }

    std::vector<std::size_t> detection_order(std::size_t m, std::size_t main_position)
    {
        if (main_position >= m)
            throw std::out_of_range("detection_order: main position out of range");
        std::vector<std::size_t> order{main_position};
        for (std::size_t n = 0; n < m; ++n)
            if (n != main_position)
                order.push_back(n);
        return order;
    }

    namespace
    {
        SicStage make_stage(const ArrayResponse &a, std::size_t position, const BeamWeights &w)
        {
            SicStage s;
            s.position = position;
            s.column = a.desired.at(position);
            s.kind = w.kind;
            s.steer_angle_deg = w.steer_angle_deg;
            s.weights = w.w;
            const auto col = a.column(s.column);
            s.response.assign(col.begin(), col.end());
            s.coeff = dot(s.weights, s.response);
            return s;
        }
    } // namespace

    SicPlan plan_sic_hy_ml(const ArrayResponse &a, const CovarianceSet &cov, const Constellation &constellation,
                           const CarParams &car)
    {
        const auto order = detection_order(a.desired.size(), a.main_position());
        std::vector<SicStage> stages;
        std::vector<std::size_t> detected;
        for (std::size_t k = 0; k < order.size(); ++k)
        {
            const std::size_t col = a.desired[order[k]];
            if (k == 0)
                stages.push_back(make_stage(a, order[k], mrc_weights(cov, col)));
            else
                stages.push_back(make_stage(a, order[k], car_weights(a, col, detected, car).weights));
            detected.push_back(col);
        }
        return SicPlan(DetectorId::sic_hy_ml, std::move(stages), constellation);
    }

    SicPlan plan_sic_mrc_ml(const ArrayResponse &a, const CovarianceSet &cov, const Constellation &constellation)
    {
        const auto order = detection_order(a.desired.size(), a.main_position());
        std::vector<SicStage> stages;
        std::vector<std::size_t> detected;
        for (std::size_t position : order)
        {
            const std::size_t col = a.desired[position];
            stages.push_back(make_stage(a, position, mrc_weights(cov, col, detected)));
            detected.push_back(col);
        }
        return SicPlan(DetectorId::sic_mrc_ml, std::move(stages), constellation);
    }

    SicPlan plan_sic_dml(const ArrayResponse &a, const Constellation &constellation)
    {
        const auto order = detection_order(a.desired.size(), a.main_position());
        std::vector<SicStage> stages;
        for (std::size_t position : order)
        {
            const std::size_t col = a.desired[position];
            std::size_t best = 0;
            for (std::size_t i = 1; i < a.lnbs(); ++i)
                if (std::abs(a.a(i, col)) > std::abs(a.a(best, col)))
                    best = i;
            BeamWeights w;
            w.w.assign(a.lnbs(), cplx(0.0));
            w.w[best] = 1.0;
            w.kind = BeamKind::ar;
            w.target = col;
            w.steer_angle_deg = a.angles_deg[col];
            stages.push_back(make_stage(a, position, w));
        }
        return SicPlan(DetectorId::sic_dml, std::move(stages), constellation);
    }

    namespace
    {
        DetectionResult run(const Detector &d, std::span<const cplx> r, const Constellation &constellation)
        {
            std::vector<std::size_t> idx(d.signals());
            d.detect(r, idx);
            return make_result(d.id(), idx, constellation);
        }
    } // namespace

    DetectionResult sic_hy_ml(std::span<const cplx> r, const ArrayResponse &a, const CovarianceSet &cov,
                              const Constellation &constellation, const CarParams &car)
    {
        return run(plan_sic_hy_ml(a, cov, constellation, car), r, constellation);
    }

    DetectionResult sic_mrc_ml(std::span<const cplx> r, const ArrayResponse &a, const CovarianceSet &cov,
                               const Constellation &constellation)
    {
        return run(plan_sic_mrc_ml(a, cov, constellation), r, constellation);
    }

    DetectionResult sic_dml(std::span<const cplx> r, const ArrayResponse &a, const Constellation &constellation)
    {
        return run(plan_sic_dml(a, constellation), r, constellation);
    }

    // ---------------------------------------------------------------- JML

    JointMlDetector::JointMlDetector(DetectorId id, const CMat &weight_bank, const CMat &desired_response,
                                     const Constellation &constellation, std::size_t max_hypotheses)
        : id_(id), m_(desired_response.cols()), alphabet_(constellation.size())
    {
        if (weight_bank.rows() != desired_response.rows() || weight_bank.cols() != m_ || !desired_response.is_square())
            throw std::invalid_argument("JointMlDetector: weight bank and desired response must both be M x M");
        if (m_ > kMaxLnbs)
            throw std::invalid_argument("JointMlDetector: too many desired signals");
        std::size_t hypotheses = 1;
        for (std::size_t k = 0; k < m_; ++k)
        {
            hypotheses *= alphabet_;
            if (hypotheses > max_hypotheses)
                throw std::invalid_argument("JointMlDetector: hypothesis space exceeds cap of " +
                                            std::to_string(max_hypotheses));
        }

        weights_adjoint_ = weight_bank.adjoint();
        const CMat g = weights_adjoint_ * desired_response;
        table_.assign(hypotheses * m_, cplx(0.0));
        CVec s(m_);
        for (std::size_t h = 0; h < hypotheses; ++h)
        {
            std::size_t code = h;
            for (std::size_t k = 0; k < m_; ++k)
            {
                s[k] = constellation.point(code % alphabet_);
                code /= alphabet_;
            }
            const CVec y = g * s;
            std::copy(y.begin(), y.end(), table_.begin() + static_cast<std::ptrdiff_t>(h * m_));
        }
    }

    void JointMlDetector::search(std::span<const cplx> p, std::span<std::size_t> symbol_indices) const
    {
        if (p.size() != m_ || symbol_indices.size() != m_)
            throw std::invalid_argument("JointMlDetector::search: size mismatch");
        const std::size_t hypotheses = table_.size() / m_;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < hypotheses; ++h)
        {
            const cplx *y = table_.data() + h * m_;
            double d = 0.0;
            for (std::size_t k = 0; k < m_; ++k)
                d += std::norm(p[k] - y[k]);
            if (d < best_d)
            {
                best_d = d;
                best = h;
            }
        }
        for (std::size_t k = 0; k < m_; ++k)
        {
            symbol_indices[k] = best % alphabet_;
            best /= alphabet_;
        }
    }

    void JointMlDetector::detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices) const
    {
        if (r.size() != weights_adjoint_.cols())
            throw std::invalid_argument("JointMlDetector::detect: size mismatch");
        std::array<cplx, kMaxLnbs> p{};
        for (std::size_t k = 0; k < m_; ++k)
            for (std::size_t i = 0; i < r.size(); ++i)
                p[k] += weights_adjoint_(k, i) * r[i];
        search(std::span<const cplx>(p.data(), m_), symbol_indices);
    }

    DetectionResult jml_detect(std::span<const cplx> p, const CMat &weight_bank, const CMat &desired_response,
                               const Constellation &constellation, std::size_t max_hypotheses)
    {
        const JointMlDetector det(DetectorId::jml, weight_bank, desired_response, constellation, max_hypotheses);
        std::vector<std::size_t> idx(det.signals());
        det.search(p, idx);
        return make_result(DetectorId::jml, idx, constellation);
    }

    // ---------------------------------------------------------------- MMSE

    MmseDetector::MmseDetector(const ArrayResponse &a, const CovarianceSet &cov, const Constellation &constellation)
        : points_(constellation.points().begin(), constellation.points().end())
    {
        filter_ = cov.symbol_energy * (a.desired_block().adjoint() * inverse(cov.total));
    }

    CVec MmseDetector::soft_estimate(std::span<const cplx> r) const
    {
        return filter_ * r;
    }

    void MmseDetector::detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices) const
    {
        if (r.size() != filter_.cols() || symbol_indices.size() != filter_.rows())
            throw std::invalid_argument("MmseDetector::detect: size mismatch");
        for (std::size_t k = 0; k < filter_.rows(); ++k)
        {
            cplx soft = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i)
                soft += filter_(k, i) * r[i];
            symbol_indices[k] = nearest(soft, points_);
        }
    }

    DetectionResult mmse_detect(std::span<const cplx> r, const CovarianceSet &cov, const ArrayResponse &a,
                                const Constellation &constellation)
    {
        return run(MmseDetector(a, cov, constellation), r, constellation);
    }

    // ---------------------------------------------------------------- factory

    CMat mrc_weight_bank(const ArrayResponse &a, const CovarianceSet &cov)
    {
        std::vector<CVec> cols;
        for (std::size_t col : a.desired)
            cols.push_back(mrc_weights(cov, col).w);
        return CMat::from_columns(cols);
    }

    std::unique_ptr<Detector> make_detector(DetectorId id, const ArrayResponse &a, const CovarianceSet &cov,
                                            const Constellation &constellation, const CarParams &car)
    {
        switch (id)
        {
        case DetectorId::sic_hy_ml:
            return std::make_unique<SicPlan>(plan_sic_hy_ml(a, cov, constellation, car));
        case DetectorId::sic_mrc_ml:
            return std::make_unique<SicPlan>(plan_sic_mrc_ml(a, cov, constellation));
        case DetectorId::sic_dml:
            return std::make_unique<SicPlan>(plan_sic_dml(a, constellation));
        case DetectorId::jml:
            return std::make_unique<JointMlDetector>(DetectorId::jml, CMat::identity(a.lnbs()), a.desired_block(),
                                                     constellation);
        case DetectorId::mrc_jml:
            return std::make_unique<JointMlDetector>(DetectorId::mrc_jml, mrc_weight_bank(a, cov), a.desired_block(),
                                                     constellation);
        case DetectorId::mmse:
            return std::make_unique<MmseDetector>(a, cov, constellation);
        }
        throw std::invalid_argument("make_detector: unknown detector");
    }

} // namespace sicrx
