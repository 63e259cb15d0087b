#include "ttrp/projections.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "ttrp/errors.hpp"
#include "ttrp/tt_algebra.hpp"

namespace ttrp {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '-' || c == '_' || c == ' '; }), s.end());
    return s;
}

double draw_unit(RandomStream& rs, CoreDistribution dist, double core_sparsity) {
    switch (dist) {
    case CoreDistribution::Rademacher: return rs.rademacher();
    case CoreDistribution::Gaussian: return rs.gaussian();
    case CoreDistribution::Sparse: return rs.sparse(core_sparsity);
    }
    throw std::invalid_argument("unsupported core distribution");
}

const TensorShape& require(const std::optional<TensorShape>& s, const char* what) {
    if (!s) throw ShapeError(std::string("projection spec is missing ") + what);
    return *s;
}

} // namespace

std::string to_string(Method m) {
    switch (m) {
    case Method::TTRP: return "TTRP";
    case Method::GaussianTT: return "GaussianTT";
    case Method::GaussianRP: return "GaussianRP";
    case Method::SparseRP: return "SparseRP";
    case Method::GaussianTRP: return "GaussianTRP";
    }
    return "unknown";
}

std::string to_string(CoreDistribution d) {
    switch (d) {
    case CoreDistribution::Rademacher: return "rademacher";
    case CoreDistribution::Gaussian: return "gaussian";
    case CoreDistribution::Sparse: return "sparse";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    const std::string k = lower(name);
    if (k == "ttrp") return Method::TTRP;
    if (k == "gaussiantt") return Method::GaussianTT;
    if (k == "gaussianrp") return Method::GaussianRP;
    if (k == "sparserp" || k == "verysparserp") return Method::SparseRP;
    if (k == "gaussiantrp") return Method::GaussianTRP;
    throw ConfigError("unknown projection method '" + name + "'");
}

CoreDistribution parse_distribution(const std::string& name) {
    const std::string k = lower(name);
    if (k == "rademacher" || k == "rd") return CoreDistribution::Rademacher;
    if (k == "gaussian" || k == "normal") return CoreDistribution::Gaussian;
    if (k == "sparse") return CoreDistribution::Sparse;
    throw ConfigError("unknown core distribution '" + name + "'");
}

// ---------------------------------------------------------------------------
// ProjectionSpec
// ---------------------------------------------------------------------------

ProjectionSpec ProjectionSpec::ttrp(TensorShape rows, TensorShape cols, StreamKey seed, Index rank,
                                    CoreDistribution dist, double core_sparsity) {
    ProjectionSpec s;
    s.method = Method::TTRP;
    s.M = rows.total();
    s.N = cols.total();
    s.row_shape = std::move(rows);
    s.col_shape = std::move(cols);
    s.rank = rank;
    s.distribution = dist;
    s.core_sparsity = core_sparsity;
    s.seed = std::move(seed);
    return s;
}

ProjectionSpec ProjectionSpec::gaussian_tt(TensorShape rows, TensorShape cols, StreamKey seed, Index rank) {
    ProjectionSpec s = ttrp(std::move(rows), std::move(cols), std::move(seed), rank, CoreDistribution::Gaussian);
    s.method = Method::GaussianTT;
    return s;
}

ProjectionSpec ProjectionSpec::gaussian_rp(Index M, Index N, StreamKey seed) {
    ProjectionSpec s;
    s.method = Method::GaussianRP;
    s.M = M;
    s.N = N;
    s.distribution = CoreDistribution::Gaussian;
    s.seed = std::move(seed);
    return s;
}

ProjectionSpec ProjectionSpec::sparse_rp(Index M, Index N, double sparsity, StreamKey seed) {
    ProjectionSpec s;
    s.method = Method::SparseRP;
    s.M = M;
    s.N = N;
    s.s = sparsity;
    s.distribution = CoreDistribution::Sparse;
    s.seed = std::move(seed);
    return s;
}

ProjectionSpec ProjectionSpec::very_sparse_rp(Index M, Index N, StreamKey seed) {
    return sparse_rp(M, N, std::sqrt(static_cast<double>(N)), std::move(seed));
}

ProjectionSpec ProjectionSpec::gaussian_trp(TensorShape cols, Index M, StreamKey seed) {
    ProjectionSpec s;
    s.method = Method::GaussianTRP;
    s.M = M;
    s.N = cols.total();
    s.col_shape = std::move(cols);
    s.distribution = CoreDistribution::Gaussian;
    s.seed = std::move(seed);
    return s;
}

void ProjectionSpec::validate() const {
    if (M < 1 || N < 1) throw ShapeError("projection dimensions must be positive");
    switch (method) {
    case Method::TTRP:
    case Method::GaussianTT: {
        const auto& rows = require(row_shape, "row shape");
        const auto& cols = require(col_shape, "column shape");
        if (rows.order() != cols.order()) throw ShapeError("row and column shapes must have equal order");
        if (rows.total() != M) throw ShapeError("product of row modes " + rows.to_string() + " != M");
        if (cols.total() != N) throw ShapeError("product of column modes " + cols.to_string() + " != N");
        if (rank < 1) throw std::invalid_argument("TT rank must be positive");
        if (distribution == CoreDistribution::Sparse && !(core_sparsity >= 1.0))
            throw std::invalid_argument("sparse core distribution needs s >= 1");
        if (method == Method::GaussianTT && distribution != CoreDistribution::Gaussian)
            throw std::invalid_argument("Gaussian TT uses Gaussian cores");
        break;
    }
    case Method::GaussianRP: break;
    case Method::SparseRP:
        if (!(s >= 1.0) || s > static_cast<double>(N))
            throw std::invalid_argument("sparse RP needs 1 <= s <= N");
        break;
    case Method::GaussianTRP: {
        const auto& cols = require(col_shape, "column shape");
        if (cols.total() != N) throw ShapeError("product of column modes " + cols.to_string() + " != N");
        break;
    }
    }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

Projector::Projector(ProjectionSpec spec, Payload payload) : spec_(std::move(spec)), payload_(std::move(payload)) {}

Projector build_ttrp(const ProjectionSpec& spec) {
    if (!spec.is_tensor_train()) throw std::invalid_argument("build_ttrp needs a TTRP or GaussianTT spec");
    spec.validate();
    const auto& rows = *spec.row_shape;
    const auto& cols = *spec.col_shape;
    const std::size_t d = rows.order();
    const Index r = d == 1 ? 1 : spec.rank;
    // Unit-variance entries, scaled so each bond sum over r terms stays isometric:
    // boundary cores by r^{-1/4}, interior cores by r^{-1/2}.
    const double boundary_scale = std::pow(static_cast<double>(r), -0.25);
    const double interior_scale = std::pow(static_cast<double>(r), -0.5);

    std::vector<Core4<double>> cores;
    cores.reserve(d);
    for (std::size_t k = 0; k < d; ++k) {
        const Index left = k == 0 ? 1 : r;
        const Index right = k + 1 == d ? 1 : r;
        const double scale = (k == 0 || k + 1 == d) ? boundary_scale : interior_scale;
        Core4<double> core(left, rows.mode(k), cols.mode(k), right);
        RandomStream rs(spec.seed.child(static_cast<std::uint32_t>(k)));
        auto& data = core.unfolding();
        for (Index i = 0; i < data.rows(); ++i)
            for (Index j = 0; j < data.cols(); ++j)
                data(i, j) = scale * draw_unit(rs, spec.distribution, spec.core_sparsity);
        cores.push_back(std::move(core));
    }
    return Projector(spec, TTMatrixd(rows, cols, std::move(cores)));
}

Projector build_gaussian_rp(Index M, Index N, const StreamKey& seed, DenseStorage storage) {
    ProjectionSpec spec = ProjectionSpec::gaussian_rp(M, N, seed);
    spec.validate();
    const bool materialize = storage == DenseStorage::Materialized ||
                             (storage == DenseStorage::Auto && M * N <= kDenseMaterializeCap);
    if (!materialize) return Projector(std::move(spec), ImplicitGaussian{});
    // Row i comes from lane i, matching the implicit path entry for entry.
    DenseOperator R(M, N);
    for (Index i = 0; i < M; ++i) {
        RandomStream rs(seed.child(static_cast<std::uint32_t>(i)));
        for (Index j = 0; j < N; ++j) R(i, j) = rs.gaussian();
    }
    return Projector(std::move(spec), std::move(R));
}

Projector build_sparse_rp(Index M, Index N, double s, const StreamKey& seed) {
    ProjectionSpec spec = ProjectionSpec::sparse_rp(M, N, s, seed);
    spec.validate();
    // Every entry is independently nonzero with probability 1/s; positions are
    // visited by geometric gaps so construction costs O(nnz).
    const double p = 1.0 / s;
    const double magnitude = std::sqrt(s);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(std::ceil(static_cast<double>(M) * static_cast<double>(N) * p * 1.1)) +
                     16);
    for (Index i = 0; i < M; ++i) {
        RandomStream rs(seed.child(static_cast<std::uint32_t>(i)));
        std::uint64_t j = rs.geometric_gap(p);
        while (j < static_cast<std::uint64_t>(N)) {
            triplets.emplace_back(i, static_cast<Index>(j), magnitude * rs.rademacher());
            const std::uint64_t gap = rs.geometric_gap(p);
            if (gap >= static_cast<std::uint64_t>(N)) break;
            j += gap + 1;
        }
    }
    SparseOperator R(M, N);
    R.setFromTriplets(triplets.begin(), triplets.end());
    R.makeCompressed();
    return Projector(std::move(spec), std::move(R));
}

Projector build_gaussian_trp(const TensorShape& cols, Index M, const StreamKey& seed) {
    ProjectionSpec spec = ProjectionSpec::gaussian_trp(cols, M, seed);
    spec.validate();
    KhatriRaoFactors kr;
    for (std::size_t k = 0; k < cols.order(); ++k) {
        RandomStream rs(seed.child(static_cast<std::uint32_t>(k)));
        Eigen::MatrixXd F(cols.mode(k), M);
        for (Index j = 0; j < F.rows(); ++j)
            for (Index m = 0; m < M; ++m) F(j, m) = rs.gaussian();
        kr.factors.push_back(std::move(F));
    }
    return Projector(std::move(spec), std::move(kr));
}

Projector build_projector(const ProjectionSpec& spec, DenseStorage storage) {
    spec.validate();
    switch (spec.method) {
    case Method::TTRP:
    case Method::GaussianTT: return build_ttrp(spec);
    case Method::GaussianRP: return build_gaussian_rp(spec.M, spec.N, spec.seed, storage);
    case Method::SparseRP: return build_sparse_rp(spec.M, spec.N, spec.s, spec.seed);
    case Method::GaussianTRP: return build_gaussian_trp(require(spec.col_shape, "column shape"), spec.M, spec.seed);
    }
    throw std::invalid_argument("unsupported projection method");
}

Projector make_dense_projector(DenseOperator R) {
    ProjectionSpec spec = ProjectionSpec::gaussian_rp(R.rows(), R.cols(), StreamKey{});
    return Projector(std::move(spec), std::move(R));
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd apply_implicit_gaussian(const ProjectionSpec& spec, const Eigen::VectorXd& x) {
    Eigen::VectorXd y(spec.M);
    for (Index i = 0; i < spec.M; ++i) {
        RandomStream rs(spec.seed.child(static_cast<std::uint32_t>(i)));
        double acc = 0.0;
        for (Index j = 0; j < spec.N; ++j) acc += rs.gaussian() * x(j);
        y(i) = acc;
    }
    return y;
}

/// y(m) = sum_j x(j) prod_k R_k(j_k, m) without forming the M x N matrix.
Eigen::VectorXd apply_khatri_rao(const KhatriRaoFactors& kr, const TensorShape& cols, Index M,
                                 const Eigen::VectorXd& x) {
    const auto& F = kr.factors;
    Index rest = cols.total() / cols.mode(0);
    const Eigen::Map<const RowMajorMatrix<double>> X(x.data(), cols.mode(0), rest);
    // partial(m, :) holds x contracted with R_1(:, m), ..., R_k(:, m).
    RowMajorMatrix<double> partial = F[0].transpose() * X;
    for (std::size_t k = 1; k < F.size(); ++k) {
        const Index n = cols.mode(k);
        const Index next_rest = rest / n;
        RowMajorMatrix<double> next(M, next_rest);
        for (Index m = 0; m < M; ++m) {
            const Eigen::Map<const RowMajorMatrix<double>> slab(partial.row(m).data(), n, next_rest);
            next.row(m) = F[k].col(m).transpose() * slab;
        }
        partial = std::move(next);
        rest = next_rest;
    }
    return Eigen::Map<const Eigen::VectorXd>(partial.data(), M);
}

Eigen::VectorXd apply_dense_unscaled(const Projector& p, const Eigen::VectorXd& x) {
    const auto& spec = p.spec();
    return std::visit(
        [&](const auto& payload) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, DenseOperator>) {
                // Same left-to-right summation as the implicit path, so both agree bit for bit.
                Eigen::VectorXd y(payload.rows());
                for (Index i = 0; i < payload.rows(); ++i) {
                    double acc = 0.0;
                    for (Index j = 0; j < payload.cols(); ++j) acc += payload(i, j) * x(j);
                    y(i) = acc;
                }
                return y;
            } else if constexpr (std::is_same_v<T, ImplicitGaussian>) {
                return apply_implicit_gaussian(spec, x);
            } else if constexpr (std::is_same_v<T, SparseOperator>) {
                return payload * x;
            } else if constexpr (std::is_same_v<T, KhatriRaoFactors>) {
                return apply_khatri_rao(payload, *spec.col_shape, spec.M, x);
            } else {
                throw std::logic_error("tensor-train payload on dense path");
            }
        },
        p.payload());
}

} // namespace

ProjectedPoint apply(const Projector& p, const Eigen::VectorXd& x) {
    if (x.size() != p.input_dim())
        throw ShapeError("input of length " + std::to_string(x.size()) + " for projector with N = " +
                         std::to_string(p.input_dim()));
    if (p.tt_output()) return apply(p, tt_from_dense(x, *p.spec().col_shape, 0.0));
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.output_dim()));
    return Eigen::VectorXd(scale * apply_dense_unscaled(p, x));
}

ProjectedPoint apply(const Projector& p, const TTVectord& x) {
    if (!p.tt_output()) {
        if (x.shape().total() != p.input_dim()) throw ShapeError("TT input does not match projector");
        return apply(p, Eigen::VectorXd(tt_to_dense(x)));
    }
    if (!(x.shape() == *p.spec().col_shape))
        throw ShapeError("TT input shape " + x.shape().to_string() + " does not match projector columns " +
                         p.spec().col_shape->to_string());
    // Algorithm output: (1/sqrt(M)) Y_1, Y_2, ..., Y_d.
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.output_dim()));
    return tt_scaled(tt_matvec(p.tt_operator(), x), scale);
}

Eigen::VectorXd to_dense(const ProjectedPoint& y) {
    if (const auto* v = std::get_if<Eigen::VectorXd>(&y)) return *v;
    return tt_to_dense(std::get<TTVectord>(y));
}

double projected_distance(const ProjectedPoint& a, const ProjectedPoint& b) {
    const auto* ta = std::get_if<TTVectord>(&a);
    const auto* tb = std::get_if<TTVectord>(&b);
    if (ta && tb) return tt_distance(*ta, *tb);
    if (!ta && !tb) return (std::get<Eigen::VectorXd>(a) - std::get<Eigen::VectorXd>(b)).norm();
    return (to_dense(a) - to_dense(b)).norm();
}

double projected_squared_norm(const ProjectedPoint& y) {
    if (const auto* v = std::get_if<Eigen::VectorXd>(&y)) return v->squaredNorm();
    const double n = tt_norm(std::get<TTVectord>(y));
    return n * n;
}

// ---------------------------------------------------------------------------
// Storage
// ---------------------------------------------------------------------------

Index storage_count(const ProjectionSpec& spec) {
    spec.validate();
    switch (spec.method) {
    case Method::GaussianRP: return spec.M * spec.N;
    case Method::SparseRP:
        return static_cast<Index>(std::llround(static_cast<double>(spec.M) * static_cast<double>(spec.N) / spec.s));
    case Method::GaussianTRP: {
        Index sum = 0;
        for (Index n : spec.col_shape->modes()) sum += n;
        return spec.M * sum;
    }
    case Method::TTRP:
    case Method::GaussianTT: {
        const auto& rows = *spec.row_shape;
        const auto& cols = *spec.col_shape;
        const std::size_t d = rows.order();
        const Index r = d == 1 ? 1 : spec.rank;
        Index total = 0;
        for (std::size_t k = 0; k < d; ++k) {
            const Index left = k == 0 ? 1 : r;
            const Index right = k + 1 == d ? 1 : r;
            total += left * rows.mode(k) * cols.mode(k) * right;
        }
        return total;
    }
    }
    return 0;
}

Index storage_count(const Projector& p) {
    if (std::holds_alternative<DenseOperator>(p.payload())) return p.dense_operator().size();
    return storage_count(p.spec());
}

Index realized_nonzeros(const Projector& p) {
    return std::visit(
        [&](const auto& payload) -> Index {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, TTMatrixd>) {
                return payload.storage();
            } else if constexpr (std::is_same_v<T, DenseOperator>) {
                return payload.size();
            } else if constexpr (std::is_same_v<T, ImplicitGaussian>) {
                return p.spec().M * p.spec().N;
            } else if constexpr (std::is_same_v<T, SparseOperator>) {
                return payload.nonZeros();
            } else {
                Index s = 0;
                for (const auto& F : payload.factors) s += F.size();
                return s;
            }
        },
        p.payload());
}

} // namespace ttrp
