#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "ttrp/errors.hpp"
#include "ttrp/tensor_shape.hpp"
#include "ttrp/tt_types.hpp"

namespace ttrp {

/// Upper bound on entries materialized by the densifying routines.
inline constexpr Index kDefaultDensifyCap = 10'000'000;

/// Relative threshold under which a negative squared norm is treated as round-off.
inline constexpr double kNormClampTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Kronecker products
// ---------------------------------------------------------------------------

/// Block Kronecker product: block (p, q) of the result is A(p, q) * B.
template <typename DerivedA, typename DerivedB>
[[nodiscard]] Matrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& A,
                                                     const Eigen::MatrixBase<DerivedB>& B) {
    using Scalar = typename DerivedA::Scalar;
    Matrix<Scalar> out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index p = 0; p < A.rows(); ++p)
        for (Index q = 0; q < A.cols(); ++q)
            out.block(p * B.rows(), q * B.cols(), B.rows(), B.cols()) = A(p, q) * B;
    return out;
}

/// Evaluates the row vector x (B ⊗ C) without forming the Kronecker product.
///
/// x has length rows(B) * rows(C) and is passed reshaped column-wise as
/// X in R^{rows(C) x rows(B)}, i.e. X(b, a) = x(a * rows(C) + b). The result
/// is returned in the same reshaped layout, Y = C^T X B, at O(r^3) cost.
template <typename DerivedX, typename DerivedB, typename DerivedC>
[[nodiscard]] Matrix<typename DerivedX::Scalar> reshaped_kron_product(const Eigen::MatrixBase<DerivedX>& X,
                                                                      const Eigen::MatrixBase<DerivedB>& B,
                                                                      const Eigen::MatrixBase<DerivedC>& C) {
    if (X.rows() != C.rows() || X.cols() != B.rows())
        throw ShapeError("reshaped Kronecker product: operand extents do not agree");
    return C.transpose() * X * B;
}

// ---------------------------------------------------------------------------
// Element access and densification
// ---------------------------------------------------------------------------

template <typename Scalar>
[[nodiscard]] Scalar tt_element(const TTVector<Scalar>& v, const std::vector<Index>& multi) {
    const auto& shape = v.shape();
    if (multi.size() != shape.order()) throw IndexError("multi-index has wrong order");
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row = Eigen::Matrix<Scalar, 1, 1>::Ones();
    for (std::size_t k = 0; k < v.order(); ++k) {
        if (multi[k] < 0 || multi[k] >= shape.mode(k)) throw IndexError("multi-index out of range");
        row = row * v.core(k).slice(multi[k]);
    }
    return row(0);
}

template <typename Scalar>
[[nodiscard]] Vector<Scalar> tt_to_dense(const TTVector<Scalar>& v, Index cap = kDefaultDensifyCap) {
    const Index total = v.shape().total();
    if (total > cap)
        throw ShapeError("densifying " + std::to_string(total) + " entries exceeds cap " + std::to_string(cap));
    // prefix(p, :) is the running row vector X_1(j_1)...X_k(j_k) for the
    // row-major prefix p = (j_1, ..., j_k).
    RowMajorMatrix<Scalar> prefix = RowMajorMatrix<Scalar>::Ones(1, 1);
    for (const auto& core : v.cores()) {
        const Index n = core.mode();
        RowMajorMatrix<Scalar> next(prefix.rows() * n, core.right());
        for (Index i = 0; i < n; ++i) {
            const Matrix<Scalar> block = prefix * core.slice(i);
            for (Index p = 0; p < prefix.rows(); ++p) next.row(p * n + i) = block.row(p);
        }
        prefix = std::move(next);
    }
    return Eigen::Map<const Vector<Scalar>>(prefix.data(), total);
}

/// Scales a TT vector by folding alpha into its first core.
template <typename Scalar>
[[nodiscard]] TTVector<Scalar> tt_scaled(TTVector<Scalar> v, Scalar alpha) {
    v.core(0).unfolding() *= alpha;
    return v;
}

// ---------------------------------------------------------------------------
// TT-SVD
// ---------------------------------------------------------------------------

/// Left-to-right sequential SVD compression of a dense vector.
///
/// Singular values at or below tol * ||x||_2 are dropped (at least one is
/// always kept); tol = 0 keeps every nonzero singular value and reproduces x
/// to machine precision.
template <typename Derived>
[[nodiscard]] TTVector<typename Derived::Scalar> tt_from_dense(const Eigen::MatrixBase<Derived>& x,
                                                               const TensorShape& shape, double tol = 0.0) {
    using Scalar = typename Derived::Scalar;
    if (x.size() != shape.total())
        throw ShapeError("vector of length " + std::to_string(x.size()) + " does not match shape " +
                         shape.to_string());
    if (tol < 0) throw std::invalid_argument("TT-SVD tolerance must be nonnegative");

    const Vector<Scalar> flat = x;
    const Scalar threshold = static_cast<Scalar>(tol) * flat.norm();
    const std::size_t d = shape.order();

    std::vector<Core3<Scalar>> cores;
    cores.reserve(d);
    // remainder is the row-major unfolding (rank * n_k) x (n_{k+1} ... n_d);
    // with row-major storage every reshape along the sweep is free.
    RowMajorMatrix<Scalar> remainder = Eigen::Map<const RowMajorMatrix<Scalar>>(flat.data(), 1, flat.size());
    Index rank = 1;
    Index rest = shape.total();
    for (std::size_t k = 0; k + 1 < d; ++k) {
        const Index n = shape.mode(k);
        rest /= n;
        const Eigen::Map<const RowMajorMatrix<Scalar>> unfold(remainder.data(), rank * n, rest);
        Eigen::BDCSVD<Matrix<Scalar>> svd(Matrix<Scalar>(unfold), Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sigma = svd.singularValues();
        Index kept = 0;
        while (kept < sigma.size() && sigma(kept) > threshold) ++kept;
        kept = std::max<Index>(kept, 1);

        Core3<Scalar> core(rank, n, kept);
        const auto U = svd.matrixU().leftCols(kept);
        for (Index a = 0; a < rank; ++a)
            for (Index i = 0; i < n; ++i)
                for (Index b = 0; b < kept; ++b) core(a, i, b) = U(a * n + i, b);
        cores.push_back(std::move(core));

        remainder = sigma.head(kept).asDiagonal() * svd.matrixV().leftCols(kept).transpose();
        rank = kept;
    }
    const Index n_last = shape.mode(d - 1);
    Core3<Scalar> last(rank, n_last, 1);
    for (Index a = 0; a < rank; ++a)
        for (Index i = 0; i < n_last; ++i) last(a, i, 0) = remainder(a, i);
    cores.push_back(std::move(last));
    return TTVector<Scalar>(shape, std::move(cores));
}

// ---------------------------------------------------------------------------
// Arithmetic
// ---------------------------------------------------------------------------

/// Z = Y - Ŷ by core merging: [Y_1, -Ŷ_1], block-diagonal interior cores,
/// and [Y_d; Ŷ_d]. Interior ranks add.
template <typename Scalar>
[[nodiscard]] TTVector<Scalar> tt_subtract(const TTVector<Scalar>& y, const TTVector<Scalar>& yhat) {
    if (!(y.shape() == yhat.shape())) throw ShapeError("tt_subtract: shapes differ");
    const std::size_t d = y.order();
    std::vector<Core3<Scalar>> cores;
    cores.reserve(d);
    if (d == 1) {
        const auto& a = y.core(0);
        const auto& b = yhat.core(0);
        cores.emplace_back(1, 1, RowMajorMatrix<Scalar>(a.unfolding() - b.unfolding()));
        return TTVector<Scalar>(y.shape(), std::move(cores));
    }
    for (std::size_t k = 0; k < d; ++k) {
        const auto& a = y.core(k);
        const auto& b = yhat.core(k);
        const Index n = a.mode();
        const bool first = (k == 0);
        const bool last = (k + 1 == d);
        const Index left = first ? 1 : a.left() + b.left();
        const Index right = last ? 1 : a.right() + b.right();
        Core3<Scalar> z(left, n, right);
        for (Index i = 0; i < n; ++i) {
            auto zs = z.slice(i);
            if (first) {
                zs.leftCols(a.right()) = a.slice(i);
                zs.rightCols(b.right()) = -b.slice(i);
            } else if (last) {
                zs.topRows(a.left()) = a.slice(i);
                zs.bottomRows(b.left()) = b.slice(i);
            } else {
                zs.topLeftCorner(a.left(), a.right()) = a.slice(i);
                zs.bottomRightCorner(b.left(), b.right()) = b.slice(i);
            }
        }
        cores.push_back(std::move(z));
    }
    return TTVector<Scalar>(y.shape(), std::move(cores));
}

/// <Y, Ŷ> = V_1 V_2 ... V_d, swept left to right.
///
/// The running row vector v_k = sum_i v_{k-1} (Y_k(i) ⊗ Ŷ_k(i)) is kept in
/// its reshaped form (r̂_k x r_k) and advanced with Ŷ_k(i)^T V Y_k(i).
template <typename Scalar>
[[nodiscard]] Scalar tt_dot(const TTVector<Scalar>& y, const TTVector<Scalar>& yhat) {
    if (!(y.shape() == yhat.shape())) throw ShapeError("tt_dot: shapes differ");
    const auto& y1 = y.core(0);
    const auto& h1 = yhat.core(0);
    // v_1 = sum_i Y_1(i) ⊗ Ŷ_1(i), reshaped to r̂_1 x r_1.
    Matrix<Scalar> v = Matrix<Scalar>::Zero(h1.right(), y1.right());
    for (Index i = 0; i < y1.mode(); ++i) v.noalias() += h1.slice(i).transpose() * y1.slice(i);
    for (std::size_t k = 1; k < y.order(); ++k) {
        const auto& yk = y.core(k);
        const auto& hk = yhat.core(k);
        Matrix<Scalar> next = Matrix<Scalar>::Zero(hk.right(), yk.right());
        for (Index i = 0; i < yk.mode(); ++i) next.noalias() += reshaped_kron_product(v, yk.slice(i), hk.slice(i));
        v = std::move(next);
    }
    return v(0, 0);
}

namespace detail {

/// Product of squared core Frobenius norms; bounds ||y||^2 from above.
template <typename Scalar>
Scalar core_norm_scale(const TTVector<Scalar>& y) {
    Scalar s = 1;
    for (const auto& c : y.cores()) s *= c.unfolding().squaredNorm();
    return s;
}

template <typename Scalar>
Scalar clamped_sqrt(Scalar squared, Scalar scale) {
    if (squared >= 0) return std::sqrt(squared);
    if (-squared <= static_cast<Scalar>(kNormClampTolerance) * scale) return 0;
    throw InvariantError("squared TT norm is negative beyond round-off: " + std::to_string(squared));
}

} // namespace detail

template <typename Scalar>
[[nodiscard]] Scalar tt_norm(const TTVector<Scalar>& y) {
    return detail::clamped_sqrt(tt_dot(y, y), detail::core_norm_scale(y));
}

/// ||Y - Ŷ||_F: subtraction by core merging, then the dot-product sweep.
template <typename Scalar>
[[nodiscard]] Scalar tt_distance(const TTVector<Scalar>& y, const TTVector<Scalar>& yhat) {
    const TTVector<Scalar> z = tt_subtract(y, yhat);
    return detail::clamped_sqrt(tt_dot(z, z), detail::core_norm_scale(z));
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// y = R x with output cores Y_k(i) = sum_j R_k(i, j) ⊗ X_k(j).
template <typename Scalar>
[[nodiscard]] TTVector<Scalar> tt_matvec(const TTMatrix<Scalar>& R, const TTVector<Scalar>& x) {
    if (!(R.col_shape() == x.shape()))
        throw ShapeError("tt_matvec: operator columns " + R.col_shape().to_string() + " vs vector " +
                         x.shape().to_string());
    std::vector<Core3<Scalar>> cores;
    cores.reserve(R.order());
    for (std::size_t k = 0; k < R.order(); ++k) {
        const auto& rk = R.core(k);
        const auto& xk = x.core(k);
        if (rk.left() == 1 && rk.right() == 1) {
            // Rank-one factor: each output slice is a combination of input slices.
            RowMajorMatrix<Scalar> unfolding = rk.factor() * xk.unfolding();
            cores.emplace_back(xk.left(), xk.right(), std::move(unfolding));
            continue;
        }
        const Index xl = xk.left();
        const Index xr = xk.right();
        Core3<Scalar> yk(rk.left() * xl, rk.rows(), rk.right() * xr);
        for (Index i = 0; i < rk.rows(); ++i) {
            auto out = yk.slice(i);
            for (Index j = 0; j < rk.cols(); ++j) {
                const auto rs = rk.slice(i, j);
                const auto xs = xk.slice(j);
                for (Index a = 0; a < rk.left(); ++a)
                    for (Index b = 0; b < rk.right(); ++b)
                        out.block(a * xl, b * xr, xl, xr) += rs(a, b) * xs;
            }
        }
        cores.push_back(std::move(yk));
    }
    return TTVector<Scalar>(R.row_shape(), std::move(cores));
}

template <typename Scalar>
[[nodiscard]] Matrix<Scalar> tt_matrix_to_dense(const TTMatrix<Scalar>& R, Index cap = kDefaultDensifyCap) {
    const Index rows = R.row_shape().total();
    const Index cols = R.col_shape().total();
    if (rows * cols > cap) throw ShapeError("densifying TT operator exceeds cap");
    // Accumulate kron over cores; each core contributes (rows_k x cols_k) blocks
    // coupled through the rank index.
    std::vector<Matrix<Scalar>> acc{Matrix<Scalar>::Ones(1, 1)};
    for (const auto& core : R.cores()) {
        std::vector<Matrix<Scalar>> next(static_cast<std::size_t>(core.right()),
                                         Matrix<Scalar>::Zero(acc[0].rows() * core.rows(),
                                                              acc[0].cols() * core.cols()));
        for (Index a = 0; a < core.left(); ++a)
            for (Index b = 0; b < core.right(); ++b) {
                Matrix<Scalar> factor(core.rows(), core.cols());
                for (Index i = 0; i < core.rows(); ++i)
                    for (Index j = 0; j < core.cols(); ++j) factor(i, j) = core(a, i, j, b);
                next[static_cast<std::size_t>(b)] += kron(acc[static_cast<std::size_t>(a)], factor);
            }
        acc = std::move(next);
    }
    return acc[0];
}

} // namespace ttrp
