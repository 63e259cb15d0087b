#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ttrp/random.hpp"
#include "ttrp/tensor_shape.hpp"
#include "ttrp/tt_types.hpp"

namespace ttrp {

enum class Method { TTRP, GaussianTT, GaussianRP, SparseRP, GaussianTRP };
enum class CoreDistribution { Rademacher, Gaussian, Sparse };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] std::string to_string(CoreDistribution d);
/// Accepts the names produced by to_string, case-insensitively.
[[nodiscard]] Method parse_method(const std::string& name);
[[nodiscard]] CoreDistribution parse_distribution(const std::string& name);

/// Configuration of one random projection draw.
struct ProjectionSpec {
    Method method = Method::TTRP;
    /// (m_1, ..., m_d); tensor-train methods only.
    std::optional<TensorShape> row_shape;
    /// (n_1, ..., n_d); tensor-train methods and Gaussian TRP.
    std::optional<TensorShape> col_shape;
    Index M = 0;
    Index N = 0;
    Index rank = 1;
    /// Sampling-rate parameter of the sparse RP matrix.
    double s = 1.0;
    CoreDistribution distribution = CoreDistribution::Rademacher;
    /// s of the Sparse core distribution.
    double core_sparsity = 3.0;
    StreamKey seed;

    static ProjectionSpec ttrp(TensorShape rows, TensorShape cols, StreamKey seed, Index rank = 1,
                               CoreDistribution dist = CoreDistribution::Rademacher, double core_sparsity = 3.0);
    static ProjectionSpec gaussian_tt(TensorShape rows, TensorShape cols, StreamKey seed, Index rank = 1);
    static ProjectionSpec gaussian_rp(Index M, Index N, StreamKey seed);
    static ProjectionSpec sparse_rp(Index M, Index N, double s, StreamKey seed);
    /// Sparse RP with s = sqrt(N).
    static ProjectionSpec very_sparse_rp(Index M, Index N, StreamKey seed);
    static ProjectionSpec gaussian_trp(TensorShape cols, Index M, StreamKey seed);

    [[nodiscard]] bool is_tensor_train() const noexcept {
        return method == Method::TTRP || method == Method::GaussianTT;
    }
    [[nodiscard]] ProjectionSpec with_seed(StreamKey key) const {
        ProjectionSpec s = *this;
        s.seed = std::move(key);
        return s;
    }
    /// Throws ShapeError / std::invalid_argument on inconsistent fields.
    void validate() const;
};

/// How a Gaussian RP matrix is held.
enum class DenseStorage {
    Auto,         ///< materialize when M*N <= kDenseMaterializeCap
    Materialized, ///< keep all M*N entries
    Implicit,     ///< regenerate row i from lane i of the seed on every apply
};

inline constexpr Index kDenseMaterializeCap = 50'000'000;

struct ImplicitGaussian {};

/// Gaussian TRP factors R_1, ..., R_d with R_k in R^{n_k x M}.
struct KhatriRaoFactors {
    std::vector<Eigen::MatrixXd> factors;
};

using DenseOperator = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A realized random projection f(x) = R x / sqrt(M).
class Projector {
public:
    using Payload = std::variant<TTMatrixd, DenseOperator, ImplicitGaussian, SparseOperator, KhatriRaoFactors>;

    Projector(ProjectionSpec spec, Payload payload);

    [[nodiscard]] const ProjectionSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Payload& payload() const noexcept { return payload_; }
    [[nodiscard]] Index input_dim() const noexcept { return spec_.N; }
    [[nodiscard]] Index output_dim() const noexcept { return spec_.M; }
    /// True when apply returns TT-format outputs.
    [[nodiscard]] bool tt_output() const noexcept { return spec_.is_tensor_train(); }

    [[nodiscard]] const TTMatrixd& tt_operator() const { return std::get<TTMatrixd>(payload_); }
    [[nodiscard]] const DenseOperator& dense_operator() const { return std::get<DenseOperator>(payload_); }
    [[nodiscard]] const SparseOperator& sparse_operator() const { return std::get<SparseOperator>(payload_); }
    [[nodiscard]] const KhatriRaoFactors& khatri_rao() const { return std::get<KhatriRaoFactors>(payload_); }

private:
    ProjectionSpec spec_;
    Payload payload_;
};

[[nodiscard]] Projector build_ttrp(const ProjectionSpec& spec);
[[nodiscard]] Projector build_gaussian_rp(Index M, Index N, const StreamKey& seed,
                                          DenseStorage storage = DenseStorage::Auto);
[[nodiscard]] Projector build_sparse_rp(Index M, Index N, double s, const StreamKey& seed);
[[nodiscard]] Projector build_gaussian_trp(const TensorShape& cols, Index M, const StreamKey& seed);
/// Dispatches on spec.method.
[[nodiscard]] Projector build_projector(const ProjectionSpec& spec, DenseStorage storage = DenseStorage::Auto);
/// Wraps a caller-supplied dense matrix R; apply still scales by 1/sqrt(M).
[[nodiscard]] Projector make_dense_projector(DenseOperator R);

using ProjectedPoint = std::variant<Eigen::VectorXd, TTVectord>;

/// f(x) for a dense input. Tensor-train methods first compress x exactly.
[[nodiscard]] ProjectedPoint apply(const Projector& p, const Eigen::VectorXd& x);
/// f(x) for a TT input. Dense methods densify x first.
[[nodiscard]] ProjectedPoint apply(const Projector& p, const TTVectord& x);

[[nodiscard]] Eigen::VectorXd to_dense(const ProjectedPoint& y);
/// Euclidean distance; TT outputs go through tt_distance.
[[nodiscard]] double projected_distance(const ProjectedPoint& a, const ProjectedPoint& b);
[[nodiscard]] double projected_squared_norm(const ProjectedPoint& y);

/// Stored entries: M*N, round(M*N/s), M*sum(n_k), or sum r_{k-1} m_k n_k r_k.
[[nodiscard]] Index storage_count(const ProjectionSpec& spec);
[[nodiscard]] Index storage_count(const Projector& p);
/// Nonzeros actually present in the realized payload.
[[nodiscard]] Index realized_nonzeros(const Projector& p);

} // namespace ttrp
