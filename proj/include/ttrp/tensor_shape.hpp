#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ttrp {

using Index = Eigen::Index;

/// Factorization N = n_1 * ... * n_d of a linear dimension into mode sizes.
///
/// Linear and multi-indices are 0-based and related row-major, first mode
/// slowest: i = i_1 (n_2 ... n_d) + ... + i_{d-1} n_d + i_d. Under this
/// convention a rank-one TT operator acts on a flattened vector exactly as
/// kron(R_1, ..., R_d).
class TensorShape {
public:
    TensorShape() = default;
    explicit TensorShape(std::vector<Index> modes);
    TensorShape(std::initializer_list<Index> modes)
        : TensorShape(std::vector<Index>(modes)) {}

    [[nodiscard]] const std::vector<Index>& modes() const noexcept { return modes_; }
    [[nodiscard]] Index mode(std::size_t k) const { return modes_.at(k); }
    [[nodiscard]] std::size_t order() const noexcept { return modes_.size(); }
    [[nodiscard]] Index total() const noexcept { return total_; }
    [[nodiscard]] Index max_mode() const noexcept;

    /// "6x4"-style rendering used in CSV output.
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const TensorShape&, const TensorShape&) = default;

private:
    std::vector<Index> modes_;
    Index total_ = 0;
};

[[nodiscard]] std::vector<Index> to_multi_index(Index linear, const TensorShape& shape);
[[nodiscard]] Index to_linear_index(const std::vector<Index>& multi, const TensorShape& shape);

/// Parses "6x4" (or "6,4") into a shape.
[[nodiscard]] TensorShape parse_shape(const std::string& text);

} // namespace ttrp
