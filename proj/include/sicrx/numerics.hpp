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

#ifndef SICRX_NUMERICS_HPP
#define SICRX_NUMERICS_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sicrx
{
    using cplx = std::complex<double>;
    using CVec = std::vector<cplx>;

    // Dense complex matrix for the small (<= 8x8) problems of the receiver.
    // Indexing is (row, col); storage is column-major so that columns (steering
    // vectors, received sample vectors) are contiguous and can be viewed as spans.
    class CMat
    {
    public:
        CMat() = default;
        CMat(std::size_t rows, std::size_t cols);
        CMat(std::initializer_list<std::initializer_list<cplx>> rows);

        static CMat identity(std::size_t n);
        static CMat diagonal(std::span<const double> values);
        static CMat from_columns(std::span<const CVec> columns);

        std::size_t rows() const { return rows_; }
        std::size_t cols() const { return cols_; }
        bool empty() const { return data_.empty(); }
        bool is_square() const { return rows_ == cols_; }

        cplx &operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
        const cplx &operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

        std::span<cplx> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
        std::span<const cplx> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

        std::span<const cplx> data() const { return data_; }

        CMat adjoint() const;

        CMat &operator+=(const CMat &other);
        CMat &operator-=(const CMat &other);
        CMat &operator*=(cplx scale);

    private:
        std::size_t rows_ = 0;
        std::size_t cols_ = 0;
        std::vector<cplx> data_;
    };

    CMat operator+(CMat lhs, const CMat &rhs);
    CMat operator-(CMat lhs, const CMat &rhs);
    CMat operator*(const CMat &lhs, const CMat &rhs);
    CMat operator*(cplx scale, CMat m);
    CVec operator*(const CMat &m, std::span<const cplx> v);

    // a^H b
    cplx dot(std::span<const cplx> a, std::span<const cplx> b);
    double norm_sq(std::span<const cplx> v);
    double norm(std::span<const cplx> v);

    // v v^H scaled by `scale`
    CMat outer(std::span<const cplx> v, double scale = 1.0);

    // Sum of |x_ij|^2.
    double frobenius_norm_sq(const CMat &x);
    double max_abs(const CMat &x);

    // max|X - X^H| <= rel_tol * max|X|
    bool is_hermitian(const CMat &x, double rel_tol = 1e-12);

    struct HermitianEigen
    {
        std::vector<double> values; // descending
        CMat vectors;               // column k pairs with values[k]
    };

    struct EigenPair
    {
        double value = 0.0;
        CVec vector;
    };

    inline constexpr double kDefaultEigenTol = 1e-12;
    inline constexpr std::size_t kMaxJacobiRotations = 10000;

    // Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
    // Throws std::invalid_argument for non-square or non-Hermitian input and
    // std::runtime_error if the rotation cap is exhausted.
    HermitianEigen hermitian_eigen(const CMat &x, double tol = kDefaultEigenTol);

    // Largest eigenvalue and a unit-norm eigenvector with ||X v - l v|| <= tol ||X||_F.
    EigenPair hermitian_dominant_eigvec(const CMat &x, double tol = kDefaultEigenTol);

    // Lower-triangular L with L L^H = X. Throws std::domain_error naming the pivot on failure.
    CMat cholesky_lower(const CMat &x);

    // Inverse of a lower-triangular matrix by forward substitution.
    CMat inverse_lower(const CMat &l);

    // Inputs with 1-norm condition number above this are rejected by inverse().
    inline constexpr double kMaxConditionNumber = 1e12;

    // Gauss-Jordan inverse with partial pivoting.
    // Throws std::domain_error for singular or ill-conditioned input.
    CMat inverse(const CMat &x);

} // namespace sicrx

#endif
