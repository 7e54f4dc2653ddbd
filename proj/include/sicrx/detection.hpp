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

#ifndef SICRX_DETECTION_HPP
#define SICRX_DETECTION_HPP

#include "sicrx/beamforming.hpp"
#include "sicrx/numerics.hpp"
#include "sicrx/scenario.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace sicrx
{
    // Symbol alphabet with Gray bit labels.
    class Constellation
    {
    public:
        // {(+-1 +-i) / sqrt(2)} sqrt(E_s). Label bit 1 is set for a negative in-phase
        // part, bit 0 for a negative quadrature part.
        static Constellation qpsk(double symbol_energy = 1.0);

        std::size_t size() const { return points_.size(); }
        unsigned bits_per_symbol() const { return bits_per_symbol_; }
        double energy() const { return energy_; }
        std::span<const cplx> points() const { return points_; }
        std::span<const unsigned> labels() const { return labels_; }
        cplx point(std::size_t i) const { return points_[i]; }
        unsigned label(std::size_t i) const { return labels_[i]; }

    private:
        std::vector<cplx> points_;
        std::vector<unsigned> labels_;
        unsigned bits_per_symbol_ = 0;
        double energy_ = 0;
    };

    enum class DetectorId
    {
        sic_hy_ml,
        sic_mrc_ml,
        sic_dml,
        jml,
        mrc_jml,
        mmse
    };

    std::string_view to_string(DetectorId id);
    // Throws std::invalid_argument for an unknown id.
    DetectorId parse_detector_id(std::string_view text);
    std::vector<DetectorId> all_detectors();

    struct DetectionResult
    {
        std::vector<std::size_t> symbol_indices; // aligned with ArrayResponse::desired
        std::vector<cplx> decisions;
        std::vector<unsigned> labels;            // Gray label per decision
        DetectorId detector = DetectorId::sic_hy_ml;

        // One row of bits_per_symbol bits (MSB first) per decision.
        std::vector<std::vector<unsigned char>> bits(unsigned bits_per_symbol) const;
    };

    DetectionResult make_result(DetectorId id, std::span<const std::size_t> indices, const Constellation &constellation);

    // argmin_s |p - coeff s|^2, ties to the lowest index. Throws for coeff == 0.
    std::size_t slicer_ml_index(cplx p, cplx coeff, const Constellation &constellation);
    cplx slicer_ml(cplx p, cplx coeff, const Constellation &constellation);

    // Common interface of the per-sample detectors used by the Monte-Carlo engine.
    // Implementations are immutable after construction and safe to share across threads.
    class Detector
    {
    public:
        virtual ~Detector() = default;
        virtual DetectorId id() const = 0;
        virtual std::size_t signals() const = 0;
        // One constellation index per desired signal, in ArrayResponse::desired order.
        virtual void detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices) const = 0;
    };

    // One decision-directed cancellation step: p = w^H r', slice against w^H a, r' -= a s.
    struct SicStage
    {
        std::size_t position = 0; // index into ArrayResponse::desired
        std::size_t column = 0;   // satellite column
        BeamKind kind = BeamKind::mrc;
        double steer_angle_deg = 0;
        CVec weights;
        CVec response;            // a_column, subtracted after the decision
        cplx coeff;               // w^H a_column
    };

    // Fixed-order successive interference cancellation. Weights depend only on the
    // scenario, so they are computed once and reused for every received vector.
    class SicPlan final : public Detector
    {
    public:
        SicPlan(DetectorId id, std::vector<SicStage> stages, const Constellation &constellation);

        DetectorId id() const override { return id_; }
        std::size_t signals() const override { return stages_.size(); }
        void detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices) const override;

        // Also returns the received vector left after every cancellation.
        void detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices, std::span<cplx> residual) const;

        std::span<const SicStage> stages() const { return stages_; }

    private:
        DetectorId id_;
        std::vector<SicStage> stages_;
        std::vector<cplx> scaled_points_; // coeff_k * point_i, stage-major
        std::vector<cplx> points_;
    };

    // Main desired position first, then the remaining positions in ascending order.
    std::vector<std::size_t> detection_order(std::size_t m, std::size_t main_position);

    // MRC for the main signal, CAR for every later one.
    SicPlan plan_sic_hy_ml(const ArrayResponse &a, const CovarianceSet &cov, const Constellation &constellation,
                           const CarParams &car = {});
    // MRC at every step against the covariance of the signals not yet cancelled.
    SicPlan plan_sic_mrc_ml(const ArrayResponse &a, const CovarianceSet &cov, const Constellation &constellation);
    // No combining: each step uses the single LNB with the largest gain toward the target.
    SicPlan plan_sic_dml(const ArrayResponse &a, const Constellation &constellation);

    DetectionResult sic_hy_ml(std::span<const cplx> r, const ArrayResponse &a, const CovarianceSet &cov,
                              const Constellation &constellation, const CarParams &car = {});
    DetectionResult sic_mrc_ml(std::span<const cplx> r, const ArrayResponse &a, const CovarianceSet &cov,
                               const Constellation &constellation);
    DetectionResult sic_dml(std::span<const cplx> r, const ArrayResponse &a, const Constellation &constellation);

    inline constexpr std::size_t kDefaultMaxHypotheses = std::size_t{1} << 16;

    // Exhaustive joint ML over every desired-symbol hypothesis:
    // argmin_s ||p - W^H A_d s||^2 with p = W^H r.
    class JointMlDetector final : public Detector
    {
    public:
        // W and A_d are M x M. Throws std::invalid_argument when |alphabet|^M exceeds
        // max_hypotheses or the shapes disagree.
        JointMlDetector(DetectorId id, const CMat &weight_bank, const CMat &desired_response,
                        const Constellation &constellation, std::size_t max_hypotheses = kDefaultMaxHypotheses);

        DetectorId id() const override { return id_; }
        std::size_t signals() const override { return m_; }
        void detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices) const override;

        // Hypothesis search on an already beamformed p.
        void search(std::span<const cplx> p, std::span<std::size_t> symbol_indices) const;

    private:
        DetectorId id_;
        std::size_t m_ = 0;
        std::size_t alphabet_ = 0;
        CMat weights_adjoint_;       // W^H
        std::vector<cplx> table_;    // W^H A_d s_h, hypothesis-major
    };

    DetectionResult jml_detect(std::span<const cplx> p, const CMat &weight_bank, const CMat &desired_response,
                               const Constellation &constellation, std::size_t max_hypotheses = kDefaultMaxHypotheses);

    // Linear MMSE estimate E_s A_d^H R^-1 r sliced per component. The beamformer
    // cancels out of the estimate, so none is taken.
    class MmseDetector final : public Detector
    {
    public:
        MmseDetector(const ArrayResponse &a, const CovarianceSet &cov, const Constellation &constellation);

        DetectorId id() const override { return DetectorId::mmse; }
        std::size_t signals() const override { return filter_.rows(); }
        void detect(std::span<const cplx> r, std::span<std::size_t> symbol_indices) const override;

        CVec soft_estimate(std::span<const cplx> r) const;
        const CMat &filter() const { return filter_; }

    private:
        CMat filter_;
        std::vector<cplx> points_;
    };

    // Throws std::domain_error for singular R.
    DetectionResult mmse_detect(std::span<const cplx> r, const CovarianceSet &cov, const ArrayResponse &a,
                                const Constellation &constellation);

    // Weight bank [w_1 ... w_M] of full-covariance MRC beamformers, one per desired signal.
    CMat mrc_weight_bank(const ArrayResponse &a, const CovarianceSet &cov);

    std::unique_ptr<Detector> make_detector(DetectorId id, const ArrayResponse &a, const CovarianceSet &cov,
                                            const Constellation &constellation, const CarParams &car = {});

} // namespace sicrx

#endif
