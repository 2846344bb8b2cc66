// Copyright 2026 The chiralmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace chiralmem {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense complex matrix, row-major.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx{}) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw Error("ComplexMatrix: entry count does not match rows*cols");
    }

    /// Row-major nested initializer: {{a, b}, {c, d}}.
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw Error("ComplexMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const noexcept {
        return data_[r * cols_ + c];
    }

    const std::vector<cplx>& entries() const noexcept { return data_; }
    std::vector<cplx>& entries() noexcept { return data_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    cplx trace() const {
        require_square("trace");
        cplx t{};
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) noexcept {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw Error("ComplexMatrix: product dimension mismatch");
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    void require_square(const char* what) const {
        if (!is_square()) throw Error(std::string("ComplexMatrix: ") + what + " needs a square matrix");
    }
    void require_same_shape(const ComplexMatrix& o, const char* what) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw Error(std::string("ComplexMatrix: shape mismatch in ") + what);
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// Largest element-wise |a - b|.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i)
        m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
    return m;
}

inline double max_abs(const ComplexMatrix& a) {
    double m = 0.0;
    for (const auto& v : a.entries()) m = std::max(m, std::abs(v));
    return m;
}

/// max |A - A^dagger| element-wise.
inline double hermiticity_error(const ComplexMatrix& a) {
    if (!a.is_square()) throw Error("hermiticity_error: matrix is not square");
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = r; c < a.cols(); ++c)
            m = std::max(m, std::abs(a(r, c) - std::conj(a(c, r))));
    return m;
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12) {
    return a.is_square() && hermiticity_error(a) <= tol;
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b - b * a;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const cplx s = a(ar, ac);
            if (s == cplx{}) continue;
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    out(ar * b.rows() + br, ac * b.cols() + bc) = s * b(br, bc);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Three-site Hilbert space E1 (x) E2 (x) M.
//
// Basis index = 4*e1 + 2*e2 + m, with 0 = ground and 1 = excited on each site.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDim = 8;

enum class Site { Emitter1, Emitter2, Memory };

inline constexpr std::size_t basis_index(int e1, int e2, int m) noexcept {
    return static_cast<std::size_t>(4 * e1 + 2 * e2 + m);
}

namespace local {

/// sigma_minus = |g><e|.
inline ComplexMatrix lowering() { return {{0.0, 1.0}, {0.0, 0.0}}; }
inline ComplexMatrix raising() { return {{0.0, 0.0}, {1.0, 0.0}}; }
/// sigma^dagger sigma = |e><e|.
inline ComplexMatrix number() { return {{0.0, 0.0}, {0.0, 1.0}}; }
inline ComplexMatrix identity() { return ComplexMatrix::identity(2); }

}  // namespace local

/// A 2x2 operator acting on a single site.
class SiteOperator {
public:
    SiteOperator(Site site, ComplexMatrix local_op) : site_(site), local_(std::move(local_op)) {
        if (local_.rows() != 2 || local_.cols() != 2)
            throw Error("SiteOperator: local operator must be 2x2");
    }

    Site site() const noexcept { return site_; }
    const ComplexMatrix& local() const noexcept { return local_; }

private:
    Site site_;
    ComplexMatrix local_;
};

inline ComplexMatrix embed(const SiteOperator& op) {
    const ComplexMatrix id = local::identity();
    const ComplexMatrix& a = op.site() == Site::Emitter1 ? op.local() : id;
    const ComplexMatrix& b = op.site() == Site::Emitter2 ? op.local() : id;
    const ComplexMatrix& c = op.site() == Site::Memory ? op.local() : id;
    return kron(kron(a, b), c);
}

inline ComplexMatrix embed(Site site, const ComplexMatrix& local_op) {
    return embed(SiteOperator(site, local_op));
}

/// Tr(op * rho) without forming the product.
inline cplx expect(const ComplexMatrix& op, const ComplexMatrix& rho) {
    if (op.rows() != rho.cols() || op.cols() != rho.rows() || !op.is_square())
        throw Error("expect: operator and state dimensions do not match");
    cplx acc{};
    for (std::size_t i = 0; i < op.rows(); ++i)
        for (std::size_t k = 0; k < op.cols(); ++k) acc += op(i, k) * rho(k, i);
    return acc;
}

/// Embedded operators of the chiral-atom model, built once.
struct AtomOperators {
    ComplexMatrix sigma1, sigma2, sigma_m;
    ComplexMatrix n1, n2, n_m;

    static const AtomOperators& get() {
        static const AtomOperators ops = [] {
            AtomOperators o;
            o.sigma1 = embed(Site::Emitter1, local::lowering());
            o.sigma2 = embed(Site::Emitter2, local::lowering());
            o.sigma_m = embed(Site::Memory, local::lowering());
            o.n1 = embed(Site::Emitter1, local::number());
            o.n2 = embed(Site::Emitter2, local::number());
            o.n_m = embed(Site::Memory, local::number());
            return o;
        }();
        return ops;
    }
};

}  // namespace chiralmem
