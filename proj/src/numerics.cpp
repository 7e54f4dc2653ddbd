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

#include "sicrx/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sicrx
{
    CMat::CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols)
    {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("CMat: dimensions must be at least 1x1");
    }

    CMat::CMat(std::initializer_list<std::initializer_list<cplx>> rows)
    {
        if (rows.size() == 0 || rows.begin()->size() == 0)
            throw std::invalid_argument("CMat: dimensions must be at least 1x1");
        rows_ = rows.size();
        cols_ = rows.begin()->size();
        data_.resize(rows_ * cols_);
        std::size_t r = 0;
        for (const auto &row : rows)
        {
            if (row.size() != cols_)
                throw std::invalid_argument("CMat: ragged initializer");
            std::size_t c = 0;
            for (const auto &v : row)
                (*this)(r, c++) = v;
            ++r;
        }
    }

    CMat CMat::identity(std::size_t n)
    {
        CMat m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    CMat CMat::diagonal(std::span<const double> values)
    {
        CMat m(values.size(), values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            m(i, i) = values[i];
        return m;
    }

    CMat CMat::from_columns(std::span<const CVec> columns)
    {
        if (columns.empty())
            throw std::invalid_argument("CMat::from_columns: no columns");
        CMat m(columns.front().size(), columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c)
        {
            if (columns[c].size() != m.rows())
                throw std::invalid_argument("CMat::from_columns: column length mismatch");
            std::copy(columns[c].begin(), columns[c].end(), m.col(c).begin());
        }
        return m;
    }

    CMat CMat::adjoint() const
    {
        CMat out(cols_, rows_);
        for (std::size_t c = 0; c < cols_; ++c)
            for (std::size_t r = 0; r < rows_; ++r)
                out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    CMat &CMat::operator+=(const CMat &other)
    {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw std::invalid_argument("CMat: dimension mismatch in +");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += other.data_[i];
        return *this;
    }

    CMat &CMat::operator-=(const CMat &other)
    {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw std::invalid_argument("CMat: dimension mismatch in -");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= other.data_[i];
        return *this;
    }

    CMat &CMat::operator*=(cplx scale)
    {
        for (auto &v : data_)
            v *= scale;
        return *this;
    }

    CMat operator+(CMat lhs, const CMat &rhs) { return lhs += rhs; }
    CMat operator-(CMat lhs, const CMat &rhs) { return lhs -= rhs; }
    CMat operator*(cplx scale, CMat m) { return m *= scale; }

    CMat operator*(const CMat &lhs, const CMat &rhs)
    {
        if (lhs.cols() != rhs.rows())
            throw std::invalid_argument("CMat: dimension mismatch in *");
        CMat out(lhs.rows(), rhs.cols());
        for (std::size_t c = 0; c < rhs.cols(); ++c)
            for (std::size_t k = 0; k < lhs.cols(); ++k)
            {
                const cplx b = rhs(k, c);
                for (std::size_t r = 0; r < lhs.rows(); ++r)
                    out(r, c) += lhs(r, k) * b;
            }
        return out;
    }

    CVec operator*(const CMat &m, std::span<const cplx> v)
    {
        if (m.cols() != v.size())
            throw std::invalid_argument("CMat: dimension mismatch in matrix-vector product");
        CVec out(m.rows());
        for (std::size_t c = 0; c < m.cols(); ++c)
            for (std::size_t r = 0; r < m.rows(); ++r)
                out[r] += m(r, c) * v[c];
        return out;
    }

    cplx dot(std::span<const cplx> a, std::span<const cplx> b)
    {
        if (a.size() != b.size())
            throw std::invalid_argument("dot: length mismatch");
        cplx acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += std::conj(a[i]) * b[i];
        return acc;
    }

    double norm_sq(std::span<const cplx> v)
    {
        double acc = 0.0;
        for (const auto &x : v)
            acc += std::norm(x);
        return acc;
    }

    double norm(std::span<const cplx> v) { return std::sqrt(norm_sq(v)); }

    CMat outer(std::span<const cplx> v, double scale)
    {
        CMat out(v.size(), v.size());
        for (std::size_t c = 0; c < v.size(); ++c)
            for (std::size_t r = 0; r < v.size(); ++r)
                out(r, c) = scale * v[r] * std::conj(v[c]);
        return out;
    }

    double frobenius_norm_sq(const CMat &x)
    {
        return norm_sq(x.data());
    }

    double max_abs(const CMat &x)
    {
        double m = 0.0;
        for (const auto &v : x.data())
            m = std::max(m, std::abs(v));
        return m;
    }

    bool is_hermitian(const CMat &x, double rel_tol)
    {
        if (!x.is_square())
            return false;
        const double limit = rel_tol * max_abs(x);
        for (std::size_t c = 0; c < x.cols(); ++c)
            for (std::size_t r = 0; r <= c; ++r)
                if (std::abs(x(r, c) - std::conj(x(c, r))) > limit)
                    return false;
        return true;
    }

    namespace
    {
        void require_hermitian(const CMat &x, const char *who)
        {
            if (x.empty() || !x.is_square())
                throw std::invalid_argument(std::string(who) + ": matrix is not square");
            if (!is_hermitian(x))
                throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian");
        }

        double off_diagonal_norm(const CMat &a)
        {
            double acc = 0.0;
            for (std::size_t c = 0; c < a.cols(); ++c)
                for (std::size_t r = 0; r < a.rows(); ++r)
                    if (r != c)
                        acc += std::norm(a(r, c));
            return std::sqrt(acc);
        }

        // One unitary rotation J acting on (p, q) that annihilates a(p, q):
        //   J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]],  phi = arg a(p, q)
        // a <- J^H a J,  v <- v J
        void jacobi_rotate(CMat &a, CMat &v, std::size_t p, std::size_t q)
        {
            const cplx apq = a(p, q);
            const double mag = std::abs(apq);
            const cplx phase = apq / mag; // e^{i phi}
            const double app = a(p, p).real();
            const double aqq = a(q, q).real();

            const double zeta = (aqq - app) / (2.0 * mag);
            const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;
            const cplx conj_phase = std::conj(phase);
            const std::size_t n = a.rows();

            // a <- a J (columns p, q)
            for (std::size_t k = 0; k < n; ++k)
            {
                const cplx akp = a(k, p), akq = a(k, q);
                a(k, p) = c * akp - s * conj_phase * akq;
                a(k, q) = s * akp + c * conj_phase * akq;
            }
            // a <- J^H a (rows p, q)
            for (std::size_t k = 0; k < n; ++k)
            {
                const cplx apk = a(p, k), aqk = a(q, k);
                a(p, k) = c * apk - s * phase * aqk;
                a(q, k) = s * apk + c * phase * aqk;
            }
            a(p, q) = 0.0;
            a(q, p) = 0.0;
            a(p, p) = app - t * mag;
            a(q, q) = aqq + t * mag;

            for (std::size_t k = 0; k < n; ++k)
            {
                const cplx vkp = v(k, p), vkq = v(k, q);
                v(k, p) = c * vkp - s * conj_phase * vkq;
                v(k, q) = s * vkp + c * conj_phase * vkq;
            }
        }
    } // namespace

    HermitianEigen hermitian_eigen(const CMat &x, double tol)
    {
        require_hermitian(x, "hermitian_eigen");
        const std::size_t n = x.rows();

        // Work on the exactly Hermitian part.
        CMat a = x;
        for (std::size_t c = 0; c < n; ++c)
        {
            a(c, c) = a(c, c).real();
            for (std::size_t r = 0; r < c; ++r)
            {
                const cplx avg = 0.5 * (x(r, c) + std::conj(x(c, r)));
                a(r, c) = avg;
                a(c, r) = std::conj(avg);
            }
        }
        CMat v = CMat::identity(n);

        const double scale = std::sqrt(frobenius_norm_sq(a));
        const double eps = std::numeric_limits<double>::epsilon();
        const double threshold = std::max(0.25 * tol, 8.0 * eps) * scale;

        std::size_t rotations = 0;
        while (off_diagonal_norm(a) > threshold)
        {
            for (std::size_t p = 0; p + 1 < n; ++p)
                for (std::size_t q = p + 1; q < n; ++q)
                {
                    if (std::abs(a(p, q)) == 0.0)
                        continue;
                    if (++rotations > kMaxJacobiRotations)
                        throw std::runtime_error("hermitian_eigen: Jacobi iteration cap reached without convergence");
                    jacobi_rotate(a, v, p, q);
                }
        }

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j)
                         { return a(i, i).real() > a(j, j).real(); });

        HermitianEigen out{std::vector<double>(n), CMat(n, n)};
        for (std::size_t k = 0; k < n; ++k)
        {
            out.values[k] = a(order[k], order[k]).real();
            std::copy(v.col(order[k]).begin(), v.col(order[k]).end(), out.vectors.col(k).begin());
        }
        return out;
    }

    EigenPair hermitian_dominant_eigvec(const CMat &x, double tol)
    {
        auto eig = hermitian_eigen(x, tol);
        auto col = eig.vectors.col(0);
        EigenPair out{eig.values.front(), CVec(col.begin(), col.end())};
        const double len = norm(out.vector);
        for (auto &e : out.vector)
            e /= len;
        return out;
    }

    CMat cholesky_lower(const CMat &x)
    {
        if (x.empty() || !x.is_square())
            throw std::invalid_argument("cholesky_lower: matrix is not square");
        const std::size_t n = x.rows();
        CMat l(n, n);
        for (std::size_t j = 0; j < n; ++j)
        {
            double d = x(j, j).real();
            for (std::size_t k = 0; k < j; ++k)
                d -= std::norm(l(j, k));
            if (!(d > 0.0) || !std::isfinite(d))
                throw std::domain_error("cholesky_lower: matrix is not positive definite (pivot " +
                                        std::to_string(j) + ")");
            const double ljj = std::sqrt(d);
            l(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i)
            {
                cplx acc = x(i, j);
                for (std::size_t k = 0; k < j; ++k)
                    acc -= l(i, k) * std::conj(l(j, k));
                l(i, j) = acc / ljj;
            }
        }
        return l;
    }

    CMat inverse_lower(const CMat &l)
    {
        if (l.empty() || !l.is_square())
            throw std::invalid_argument("inverse_lower: matrix is not square");
        const std::size_t n = l.rows();
        CMat inv(n, n);
        for (std::size_t c = 0; c < n; ++c)
        {
            if (l(c, c) == 0.0)
                throw std::domain_error("inverse_lower: zero diagonal (index " + std::to_string(c) + ")");
            inv(c, c) = 1.0 / l(c, c);
            for (std::size_t r = c + 1; r < n; ++r)
            {
                cplx acc = 0.0;
                for (std::size_t k = c; k < r; ++k)
                    acc -= l(r, k) * inv(k, c);
                inv(r, c) = acc / l(r, r);
            }
        }
        return inv;
    }

    namespace
    {
        double one_norm(const CMat &x)
        {
            double best = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c)
            {
                double s = 0.0;
                for (const auto &v : x.col(c))
                    s += std::abs(v);
                best = std::max(best, s);
            }
            return best;
        }
    } // namespace

    CMat inverse(const CMat &x)
    {
        if (x.empty() || !x.is_square())
            throw std::invalid_argument("inverse: matrix is not square");
        const std::size_t n = x.rows();
        const double scale = max_abs(x);
        if (scale == 0.0 || !std::isfinite(scale))
            throw std::domain_error("inverse: matrix is singular");

        CMat a = x;
        CMat inv = CMat::identity(n);
        for (std::size_t c = 0; c < n; ++c)
        {
            std::size_t pivot = c;
            for (std::size_t r = c + 1; r < n; ++r)
                if (std::abs(a(r, c)) > std::abs(a(pivot, c)))
                    pivot = r;
            if (std::abs(a(pivot, c)) <= 1e-14 * scale)
                throw std::domain_error("inverse: matrix is singular (pivot " + std::to_string(c) + ")");
            if (pivot != c)
                for (std::size_t k = 0; k < n; ++k)
                {
                    std::swap(a(c, k), a(pivot, k));
                    std::swap(inv(c, k), inv(pivot, k));
                }
            const cplx d = 1.0 / a(c, c);
            for (std::size_t k = 0; k < n; ++k)
            {
                a(c, k) *= d;
                inv(c, k) *= d;
            }
            for (std::size_t r = 0; r < n; ++r)
            {
                if (r == c)
                    continue;
                const cplx f = a(r, c);
                if (f == 0.0)
                    continue;
                for (std::size_t k = 0; k < n; ++k)
                {
                    a(r, k) -= f * a(c, k);
                    inv(r, k) -= f * inv(c, k);
                }
            }
        }
        if (one_norm(x) * one_norm(inv) > kMaxConditionNumber)
            throw std::domain_error("inverse: matrix is ill-conditioned");
        return inv;
    }

} // namespace sicrx
