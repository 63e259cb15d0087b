#pragma once

#include <algorithm>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ttrp/errors.hpp"
#include "ttrp/tensor_shape.hpp"

namespace ttrp {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Three-way TT-core G(a, i, b) of extent left x mode x right.
///
/// Storage is a row-major (mode x left*right) matrix whose row i holds the
/// column-major vectorization of the slice G(i) in R^{left x right}. Slices
/// are therefore contiguous, and a linear combination of slices over the mode
/// index is a single matrix product with the unfolding.
template <typename Scalar>
class Core3 {
    static_assert(std::is_floating_point_v<Scalar>, "Core3 requires a floating point scalar");

public:
    using SliceMap = Eigen::Map<Matrix<Scalar>>;
    using ConstSliceMap = Eigen::Map<const Matrix<Scalar>>;

    Core3() = default;
    Core3(Index left, Index mode, Index right)
        : left_(left), right_(right), data_(RowMajorMatrix<Scalar>::Zero(mode, left * right)) {
        if (left < 1 || mode < 1 || right < 1) throw ShapeError("TT-core extents must be positive");
    }
    /// Adopts an existing (mode x left*right) unfolding.
    Core3(Index left, Index right, RowMajorMatrix<Scalar> unfolding)
        : left_(left), right_(right), data_(std::move(unfolding)) {
        if (left < 1 || right < 1 || data_.rows() < 1 || data_.cols() != left * right)
            throw ShapeError("TT-core unfolding does not match its rank extents");
    }

    [[nodiscard]] Index left() const noexcept { return left_; }
    [[nodiscard]] Index mode() const noexcept { return data_.rows(); }
    [[nodiscard]] Index right() const noexcept { return right_; }
    [[nodiscard]] Index size() const noexcept { return data_.size(); }

    [[nodiscard]] ConstSliceMap slice(Index i) const { return {data_.row(i).data(), left_, right_}; }
    [[nodiscard]] SliceMap slice(Index i) { return {data_.row(i).data(), left_, right_}; }

    [[nodiscard]] Scalar operator()(Index a, Index i, Index b) const { return data_(i, a + b * left_); }
    Scalar& operator()(Index a, Index i, Index b) { return data_(i, a + b * left_); }

    [[nodiscard]] const RowMajorMatrix<Scalar>& unfolding() const noexcept { return data_; }
    [[nodiscard]] RowMajorMatrix<Scalar>& unfolding() noexcept { return data_; }

    friend bool operator==(const Core3& a, const Core3& b) {
        return a.left_ == b.left_ && a.right_ == b.right_ && a.data_ == b.data_;
    }

private:
    Index left_ = 0;
    Index right_ = 0;
    RowMajorMatrix<Scalar> data_;
};

/// Four-way TT-core R(a, i, j, b) of extent left x rows x cols x right.
/// Row (i * cols + j) of the unfolding holds the slice R(i, j).
template <typename Scalar>
class Core4 {
    static_assert(std::is_floating_point_v<Scalar>, "Core4 requires a floating point scalar");

public:
    using SliceMap = Eigen::Map<Matrix<Scalar>>;
    using ConstSliceMap = Eigen::Map<const Matrix<Scalar>>;

    Core4() = default;
    Core4(Index left, Index rows, Index cols, Index right)
        : left_(left), rows_(rows), cols_(cols), right_(right),
          data_(RowMajorMatrix<Scalar>::Zero(rows * cols, left * right)) {
        if (left < 1 || rows < 1 || cols < 1 || right < 1)
            throw ShapeError("TT-core extents must be positive");
    }

    [[nodiscard]] Index left() const noexcept { return left_; }
    [[nodiscard]] Index rows() const noexcept { return rows_; }
    [[nodiscard]] Index cols() const noexcept { return cols_; }
    [[nodiscard]] Index right() const noexcept { return right_; }
    [[nodiscard]] Index size() const noexcept { return data_.size(); }

    [[nodiscard]] ConstSliceMap slice(Index i, Index j) const {
        return {data_.row(i * cols_ + j).data(), left_, right_};
    }
    [[nodiscard]] SliceMap slice(Index i, Index j) {
        return {data_.row(i * cols_ + j).data(), left_, right_};
    }

    [[nodiscard]] Scalar operator()(Index a, Index i, Index j, Index b) const {
        return data_(i * cols_ + j, a + b * left_);
    }
    Scalar& operator()(Index a, Index i, Index j, Index b) { return data_(i * cols_ + j, a + b * left_); }

    [[nodiscard]] const RowMajorMatrix<Scalar>& unfolding() const noexcept { return data_; }
    [[nodiscard]] RowMajorMatrix<Scalar>& unfolding() noexcept { return data_; }

    /// rows x cols factor matrix of a rank-one core.
    [[nodiscard]] Eigen::Map<const RowMajorMatrix<Scalar>> factor() const {
        if (left_ != 1 || right_ != 1) throw ShapeError("factor() requires a rank-one core");
        return {data_.data(), rows_, cols_};
    }

    friend bool operator==(const Core4& a, const Core4& b) {
        return a.left_ == b.left_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.right_ == b.right_ &&
               a.data_ == b.data_;
    }

private:
    Index left_ = 0;
    Index rows_ = 0;
    Index cols_ = 0;
    Index right_ = 0;
    RowMajorMatrix<Scalar> data_;
};

/// Tensorized vector x(j) = X_1(j_1) ... X_d(j_d).
template <typename Scalar>
class TTVector {
public:
    using scalar_type = Scalar;
    using core_type = Core3<Scalar>;

    TTVector() = default;
    TTVector(TensorShape shape, std::vector<core_type> cores)
        : shape_(std::move(shape)), cores_(std::move(cores)) {
        if (cores_.size() != shape_.order())
            throw ShapeError("TT vector needs one core per mode of " + shape_.to_string());
        for (std::size_t k = 0; k < cores_.size(); ++k) {
            if (cores_[k].mode() != shape_.mode(k))
                throw ShapeError("TT-core " + std::to_string(k) + " mode extent does not match shape");
            if (k > 0 && cores_[k].left() != cores_[k - 1].right())
                throw ShapeError("TT-core " + std::to_string(k) + " rank does not chain");
        }
        if (cores_.front().left() != 1 || cores_.back().right() != 1)
            throw ShapeError("TT boundary ranks must be 1");
    }

    [[nodiscard]] const TensorShape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t order() const noexcept { return cores_.size(); }
    [[nodiscard]] const std::vector<core_type>& cores() const noexcept { return cores_; }
    [[nodiscard]] const core_type& core(std::size_t k) const { return cores_.at(k); }
    core_type& core(std::size_t k) { return cores_.at(k); }

    /// (r_0, ..., r_d)
    [[nodiscard]] std::vector<Index> ranks() const {
        std::vector<Index> r{1};
        for (const auto& c : cores_) r.push_back(c.right());
        return r;
    }
    [[nodiscard]] Index max_rank() const {
        Index r = 1;
        for (const auto& c : cores_) r = std::max(r, c.right());
        return r;
    }
    /// Number of stored core entries.
    [[nodiscard]] Index storage() const {
        Index s = 0;
        for (const auto& c : cores_) s += c.size();
        return s;
    }

    friend bool operator==(const TTVector&, const TTVector&) = default;

private:
    TensorShape shape_;
    std::vector<core_type> cores_;
};

/// Tensorized operator R(i, j) = R_1(i_1, j_1) ... R_d(i_d, j_d).
template <typename Scalar>
class TTMatrix {
public:
    using scalar_type = Scalar;
    using core_type = Core4<Scalar>;

    TTMatrix() = default;
    TTMatrix(TensorShape row_shape, TensorShape col_shape, std::vector<core_type> cores)
        : row_shape_(std::move(row_shape)), col_shape_(std::move(col_shape)), cores_(std::move(cores)) {
        if (row_shape_.order() != col_shape_.order())
            throw ShapeError("TT operator row and column shapes must have equal order");
        if (cores_.size() != row_shape_.order()) throw ShapeError("TT operator needs one core per mode");
        for (std::size_t k = 0; k < cores_.size(); ++k) {
            if (cores_[k].rows() != row_shape_.mode(k) || cores_[k].cols() != col_shape_.mode(k))
                throw ShapeError("TT operator core " + std::to_string(k) + " does not match shapes");
            if (k > 0 && cores_[k].left() != cores_[k - 1].right())
                throw ShapeError("TT operator core " + std::to_string(k) + " rank does not chain");
        }
        if (cores_.front().left() != 1 || cores_.back().right() != 1)
            throw ShapeError("TT boundary ranks must be 1");
    }

    [[nodiscard]] const TensorShape& row_shape() const noexcept { return row_shape_; }
    [[nodiscard]] const TensorShape& col_shape() const noexcept { return col_shape_; }
    [[nodiscard]] std::size_t order() const noexcept { return cores_.size(); }
    [[nodiscard]] const std::vector<core_type>& cores() const noexcept { return cores_; }
    [[nodiscard]] const core_type& core(std::size_t k) const { return cores_.at(k); }
    core_type& core(std::size_t k) { return cores_.at(k); }

    [[nodiscard]] std::vector<Index> ranks() const {
        std::vector<Index> r{1};
        for (const auto& c : cores_) r.push_back(c.right());
        return r;
    }
    [[nodiscard]] Index storage() const {
        Index s = 0;
        for (const auto& c : cores_) s += c.size();
        return s;
    }

    friend bool operator==(const TTMatrix&, const TTMatrix&) = default;

private:
    TensorShape row_shape_;
    TensorShape col_shape_;
    std::vector<core_type> cores_;
};

using TTVectord = TTVector<double>;
using TTMatrixd = TTMatrix<double>;

} // namespace ttrp
