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

#include "oracles.hpp"
#include "sicrx/detection.hpp"
#include "sicrx/montecarlo.hpp"

#include <doctest.h>

#include <bit>
#include <type_traits>

using namespace sicrx;

// The MMSE detector takes no beamformer at all: its output cannot depend on one.
static_assert(std::is_constructible_v<MmseDetector, const ArrayResponse &, const CovarianceSet &, const Constellation &>);
static_assert(!std::is_constructible_v<MmseDetector, const ArrayResponse &, const CovarianceSet &, const Constellation &,
                                       const CMat &>);

namespace
{
    std::vector<std::size_t> detect_all(const Detector &d, std::span<const cplx> r)
    {
        std::vector<std::size_t> idx(d.signals());
        d.detect(r, idx);
        return idx;
    }
} // namespace

TEST_CASE("QPSK constellation and Gray labels")
{
    const Constellation c = Constellation::qpsk(2.0);
    REQUIRE(c.size() == 4);
    CHECK(c.bits_per_symbol() == 2);
    for (std::size_t i = 0; i < 4; ++i)
    {
        CHECK(std::abs(c.point(i) - oracle::qpsk_point(i, 2.0)) < 1e-15);
        CHECK(std::norm(c.point(i)) == doctest::Approx(2.0));
        // bit 1 <=> negative real part, bit 0 <=> negative imaginary part
        CHECK(((c.label(i) >> 1) & 1U) == (c.point(i).real() < 0 ? 1U : 0U));
        CHECK((c.label(i) & 1U) == (c.point(i).imag() < 0 ? 1U : 0U));
    }
    // neighbours differ in one bit
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::popcount(c.label(i) ^ c.label((i + 1) % 4)) == 1);
    CHECK_THROWS_AS(Constellation::qpsk(0.0), std::invalid_argument);

    const std::vector<std::size_t> idx{2, 3};
    const DetectionResult res = make_result(DetectorId::mmse, idx, c);
    const auto bits = res.bits(2);
    CHECK(bits[0] == std::vector<unsigned char>{1, 1});
    CHECK(bits[1] == std::vector<unsigned char>{0, 1});
}

TEST_CASE("detector ids round-trip")
{
    for (DetectorId id : all_detectors())
        CHECK(parse_detector_id(to_string(id)) == id);
    CHECK(all_detectors().size() == 6);
    CHECK_THROWS_WITH_AS(parse_detector_id("zf"), "unknown detector id 'zf'", std::invalid_argument);
}

TEST_CASE("ML slicer matches brute force")
{
    const Constellation c = Constellation::qpsk();
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 20000; ++k)
    {
        const cplx p(nd(gen), nd(gen));
        const cplx coeff(nd(gen), nd(gen));
        CHECK(slicer_ml_index(p, coeff, c) == oracle::slice_brute(p, coeff));
    }
    CHECK_THROWS_AS(slicer_ml_index(1.0, 0.0, c), std::invalid_argument);
}

TEST_CASE("detection order starts with the main signal")
{
    CHECK(detection_order(3, 1) == std::vector<std::size_t>{1, 0, 2});
    CHECK(detection_order(4, 0) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK_THROWS_AS(detection_order(2, 2), std::out_of_range);
}

TEST_CASE("SIC plans on the reference scenario")
{
    const LinkSetup link = prepare_link(reference_scenario(), 14.0);
    const SicPlan hy = plan_sic_hy_ml(link.array, link.cov, link.constellation);
    const SicPlan mrc = plan_sic_mrc_ml(link.array, link.cov, link.constellation);
    const SicPlan dml = plan_sic_dml(link.array, link.constellation);

    REQUIRE(hy.stages().size() == 3);
    CHECK(hy.stages()[0].kind == BeamKind::mrc);
    CHECK(hy.stages()[0].position == 1);
    CHECK(hy.stages()[1].kind == BeamKind::car);
    CHECK(hy.stages()[1].position == 0);
    CHECK(hy.stages()[1].steer_angle_deg == doctest::Approx(-3.3));
    CHECK(hy.stages()[2].kind == BeamKind::car);
    CHECK(hy.stages()[2].steer_angle_deg == doctest::Approx(3.5));

    // main stage identical for both receivers
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(hy.stages()[0].weights[i] == mrc.stages()[0].weights[i]);

    // later MRC stages are computed against the reduced covariance
    const std::vector<std::size_t> cancelled{1};
    const BeamWeights ref = mrc_weights(link.cov, 0, cancelled);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(mrc.stages()[1].weights[i] == ref.w[i]);

    // DML uses the strongest single feed (each desired satellite is on a boresight)
    for (const auto &st : dml.stages())
    {
        CHECK(std::abs(st.weights[st.position]) == 1.0);
        CHECK(norm_sq(st.weights) == 1.0);
    }
}

TEST_CASE("SIC residual equals r minus the cancelled contributions")
{
    const LinkSetup link = prepare_link(reference_scenario(), 14.0);
    const SicPlan hy = plan_sic_hy_ml(link.array, link.cov, link.constellation);
    Rng rng(99);
    const SymbolFrame frame = generate_frame(link.array, link.noise, link.constellation, 2000, rng);
    std::array<std::size_t, 3> idx{};
    std::array<cplx, 3> residual{};
    for (std::size_t t = 0; t < frame.length(); ++t)
    {
        const auto r = frame.rx.col(t);
        hy.detect(r, idx, residual);
        for (std::size_t i = 0; i < 3; ++i)
        {
            cplx expect = r[i];
            for (std::size_t k = 0; k < 3; ++k)
                expect -= link.array.a(i, link.array.desired[k]) * link.constellation.point(idx[k]);
            CHECK(std::abs(residual[i] - expect) < 1e-12);
        }
    }
}

TEST_CASE("SIC follows a hand-unrolled reference")
{
    const LinkSetup link = prepare_link(reference_scenario(), 10.0);
    const SicPlan mrc = plan_sic_mrc_ml(link.array, link.cov, link.constellation);
    Rng rng(5);
    const SymbolFrame frame = generate_frame(link.array, link.noise, link.constellation, 2000, rng);
    for (std::size_t t = 0; t < frame.length(); ++t)
    {
        const auto r = frame.rx.col(t);
        oracle::Vec rr(r.begin(), r.end());
        std::array<std::size_t, 3> expect{};
        for (const auto &st : mrc.stages())
        {
            const oracle::Vec w(st.weights.begin(), st.weights.end());
            const oracle::Vec a(st.response.begin(), st.response.end());
            const std::size_t k = oracle::slice_brute(oracle::inner(w, rr), oracle::inner(w, a));
            expect[st.position] = k;
            for (std::size_t i = 0; i < 3; ++i)
                rr[i] -= a[i] * oracle::qpsk_point(k);
        }
        const auto got = detect_all(mrc, r);
        CHECK(std::equal(got.begin(), got.end(), expect.begin()));
    }
}

TEST_CASE("noise-free desired-only reception is decoded exactly")
{
    const LinkSetup link = prepare_link(reference_scenario(), 80.0, true);
    const auto ids = all_detectors();
    Rng rng(17);
    const SymbolFrame frame = generate_frame(link.array, link.noise, link.constellation, 500, rng);
    for (DetectorId id : ids)
    {
        if (id == DetectorId::sic_dml)
            continue; // single-feed detection keeps the other desired signals as interference
        const auto det = make_detector(id, link.array, link.cov, link.constellation);
        const ErrorTally tally = count_errors(*det, link.array, frame, link.constellation);
        for (auto e : tally.bit_errors)
            CHECK_MESSAGE(e == 0, to_string(id));
    }
}

TEST_CASE("JML equals an independent 64-hypothesis scan")
{
    const Constellation c = Constellation::qpsk();
    std::mt19937_64 gen(21);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 300; ++trial)
    {
        const CMat w = oracle::random_matrix(gen, 3);
        const CMat ad = oracle::random_matrix(gen, 3);
        const JointMlDetector det(DetectorId::mrc_jml, w, ad, c);
        const auto g = oracle::to_rows(w.adjoint() * ad);
        for (int k = 0; k < 20; ++k)
        {
            CVec r(3);
            for (auto &x : r)
                x = cplx(nd(gen), nd(gen));
            const CVec p = w.adjoint() * std::span<const cplx>(r);
            const auto ref = oracle::jml_scan3(p, g);
            const auto got = detect_all(det, r);
            CHECK(std::equal(got.begin(), got.end(), ref.begin()));
            const auto res = jml_detect(p, w, ad, c);
            CHECK(std::equal(res.symbol_indices.begin(), res.symbol_indices.end(), ref.begin()));
        }
    }
}

TEST_CASE("JML guards its hypothesis space")
{
    const Constellation c = Constellation::qpsk();
    CHECK_THROWS_AS(JointMlDetector(DetectorId::jml, CMat::identity(3), CMat::identity(3), c, 63), std::invalid_argument);
    CHECK_NOTHROW(JointMlDetector(DetectorId::jml, CMat::identity(3), CMat::identity(3), c, 64));
    CHECK_THROWS_AS(JointMlDetector(DetectorId::jml, CMat::identity(2), CMat::identity(3), c), std::invalid_argument);
}

TEST_CASE("MMSE filter equals the W-parameterized form for any invertible W")
{
    const LinkSetup link = prepare_link(reference_scenario(), 14.0);
    const MmseDetector det(link.array, link.cov, link.constellation);
    std::mt19937_64 gen(6);
    const auto ad = oracle::to_rows(link.array.desired_block());
    const auto r_rows = oracle::to_rows(link.cov.total);
    for (int trial = 0; trial < 50; ++trial)
    {
        const CMat w = oracle::random_matrix(gen, 3);
        const auto wr = oracle::to_rows(w);
        // F_W = E_s A_d^H W (W^H R W)^-1 W^H
        oracle::Mat whrw(3, oracle::Vec(3, 0.0));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t k = 0; k < 3; ++k)
                    for (std::size_t l = 0; l < 3; ++l)
                        whrw[i][j] += std::conj(wr[k][i]) * r_rows[k][l] * wr[l][j];
        const auto inv = oracle::inverse(whrw);
        for (std::size_t row = 0; row < 3; ++row)
            for (std::size_t col = 0; col < 3; ++col)
            {
                cplx f = 0;
                for (std::size_t k = 0; k < 3; ++k)
                    for (std::size_t j = 0; j < 3; ++j)
                        for (std::size_t l = 0; l < 3; ++l)
                            f += std::conj(ad[k][row]) * wr[k][j] * inv[j][l] * std::conj(wr[col][l]);
                CHECK(std::abs(det.filter()(row, col) - f) < 1e-9);
            }
    }
}

TEST_CASE("factory builds every detector")
{
    const LinkSetup link = prepare_link(reference_scenario(), 14.0);
    for (DetectorId id : all_detectors())
    {
        const auto det = make_detector(id, link.array, link.cov, link.constellation);
        CHECK(det->id() == id);
        CHECK(det->signals() == 3);
    }
    const CMat bank = mrc_weight_bank(link.array, link.cov);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(std::abs(dot(bank.col(k), link.array.column(link.array.desired[k])) - 1.0) < 1e-12);
}
