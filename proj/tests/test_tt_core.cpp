#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "ttrp/errors.hpp"
#include "ttrp/tensor_shape.hpp"
#include "ttrp/tt_algebra.hpp"

using namespace ttrp;

namespace {

constexpr double kOracleTol = 1e-10;
constexpr double kExactTol = 1e-12;

TTVectord rank_one(const std::vector<Eigen::VectorXd>& factors) {
    std::vector<Core3<double>> cores;
    std::vector<Index> modes;
    for (const auto& f : factors) {
        Core3<double> c(1, f.size(), 1);
        for (Index i = 0; i < f.size(); ++i) c(0, i, 0) = f(i);
        cores.push_back(std::move(c));
        modes.push_back(f.size());
    }
    return TTVectord(TensorShape(modes), std::move(cores));
}

TTMatrixd rank_one_operator(const std::vector<Eigen::MatrixXd>& factors) {
    std::vector<Core4<double>> cores;
    std::vector<Index> rows, cols;
    for (const auto& F : factors) {
        Core4<double> c(1, F.rows(), F.cols(), 1);
        for (Index i = 0; i < F.rows(); ++i)
            for (Index j = 0; j < F.cols(); ++j) c(0, i, j, 0) = F(i, j);
        cores.push_back(std::move(c));
        rows.push_back(F.rows());
        cols.push_back(F.cols());
    }
    return TTMatrixd(TensorShape(rows), TensorShape(cols), std::move(cores));
}

} // namespace

// ---------------------------------------------------------------------------
// TensorShape and the index bijection
// ---------------------------------------------------------------------------

TEST(TensorShape, TotalIsProductOfModes) {
    const TensorShape s{4, 3, 2};
    EXPECT_EQ(s.total(), 24);
    EXPECT_EQ(s.order(), 3u);
    EXPECT_EQ(s.max_mode(), 4);
    EXPECT_EQ(s.to_string(), "4x3x2");
}

TEST(TensorShape, RejectsEmptyAndNonPositiveModes) {
    EXPECT_THROW(TensorShape(std::vector<Index>{}), ShapeError);
    EXPECT_THROW((TensorShape{3, 0}), ShapeError);
    EXPECT_THROW((TensorShape{-2}), ShapeError);
}

TEST(TensorShape, ParsesBothSeparators) {
    EXPECT_EQ(parse_shape("6x4"), (TensorShape{6, 4}));
    EXPECT_EQ(parse_shape("25,20,20"), (TensorShape{25, 20, 20}));
    EXPECT_THROW((void)parse_shape("6xx4"), ShapeError);
}

TEST(MultiIndex, ZeroMapsToOrigin) {
    EXPECT_EQ(to_multi_index(0, TensorShape{2, 3}), (std::vector<Index>{0, 0}));
}

TEST(MultiIndex, RowMajorFirstIndexSlowest) {
    EXPECT_EQ(to_multi_index(5, TensorShape{2, 3}), (std::vector<Index>{1, 2}));
    EXPECT_EQ(to_multi_index(4, TensorShape{2, 3}), (std::vector<Index>{1, 1}));
    // Enumeration oracle: all six indices are hit exactly once.
    std::set<std::vector<Index>> seen;
    for (Index i = 0; i < 6; ++i) seen.insert(to_multi_index(i, TensorShape{2, 3}));
    EXPECT_EQ(seen.size(), 6u);
}

TEST(MultiIndex, OutOfRangeThrows) {
    EXPECT_THROW((void)to_multi_index(6, TensorShape{2, 3}), IndexError);
    EXPECT_THROW((void)to_multi_index(-1, TensorShape{2, 3}), IndexError);
    EXPECT_THROW((void)to_linear_index({2, 0}, TensorShape{2, 3}), IndexError);
    EXPECT_THROW((void)to_linear_index({0}, TensorShape{2, 3}), IndexError);
}

TEST(MultiIndex, BijectionOnManyShapes) {
    std::mt19937_64 rng(11);
    int shapes = 0;
    while (shapes < 60) {
        const auto modes = oracle::random_modes(1 + rng() % 4, 12, rng);
        if (oracle::product(modes) > 10'000) continue;
        const TensorShape s(modes);
        for (Index i = 0; i < s.total(); ++i) {
            const auto multi = to_multi_index(i, s);
            ASSERT_EQ(multi, oracle::digits(i, modes));
            ASSERT_EQ(to_linear_index(multi, s), i);
        }
        ++shapes;
    }
}

// ---------------------------------------------------------------------------
// Kronecker product
// ---------------------------------------------------------------------------

TEST(Kron, IdentityTimesIdentity) {
    EXPECT_EQ(kron(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)), Eigen::MatrixXd::Identity(6, 6));
}

TEST(Kron, MatchesBlockDefinition) {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Random(2, 3);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Random(4, 2);
    EXPECT_LT(oracle::rel_err(kron(A, B), oracle::kron(A, B)), kExactTol);
}

TEST(Kron, MixedProductLaw) {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Random(2, 2), B = Eigen::MatrixXd::Random(2, 2);
    const Eigen::MatrixXd C = Eigen::MatrixXd::Random(2, 2), D = Eigen::MatrixXd::Random(2, 2);
    EXPECT_LT(oracle::rel_err(kron(A * C, B * D), kron(A, B) * kron(C, D)), kExactTol);
}

TEST(Kron, ScalarLaw) {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Random(3, 2), B = Eigen::MatrixXd::Random(2, 4);
    const double k = -1.7;
    EXPECT_LT(oracle::rel_err(kron(k * A, B), k * kron(A, B)), kExactTol);
}

TEST(Kron, ReshapeTrickMatchesMaterializedProduct) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Index> r(1, 4);
    for (int t = 0; t < 200; ++t) {
        const Eigen::MatrixXd B = Eigen::MatrixXd::Random(r(rng), r(rng));
        const Eigen::MatrixXd C = Eigen::MatrixXd::Random(r(rng), r(rng));
        const Eigen::RowVectorXd x = Eigen::RowVectorXd::Random(B.rows() * C.rows());
        const Eigen::RowVectorXd want = x * oracle::kron(B, C);
        const Eigen::Map<const Eigen::MatrixXd> X(x.data(), C.rows(), B.rows());
        const Eigen::MatrixXd Y = reshaped_kron_product(X, B, C);
        const Eigen::Map<const Eigen::RowVectorXd> got(Y.data(), Y.size());
        ASSERT_LT((got - want).norm(), kExactTol * std::max(1.0, want.norm()));
    }
}

// ---------------------------------------------------------------------------
// Element access and densification
// ---------------------------------------------------------------------------

TEST(TTElement, ProductOfRankOneScalars) {
    const TTVectord v = rank_one({Eigen::Vector2d(3.0, 2.0), Eigen::Vector2d(5.0, 4.0)});
    EXPECT_DOUBLE_EQ(tt_element(v, {1, 1}), 8.0);
}

TEST(TTElement, ZeroCoreAnnihilates) {
    std::mt19937_64 rng(5);
    TTVectord v = oracle::random_tt({3, 4, 2}, {1, 2, 3, 1}, rng);
    v.core(1).unfolding().setZero();
    for (Index i = 0; i < 24; ++i) EXPECT_EQ(tt_element(v, to_multi_index(i, v.shape())), 0.0);
}

TEST(TTElement, MatchesExplicitRankSum) {
    std::mt19937_64 rng(7);
    const TTVectord v = oracle::random_tt({3, 4}, {1, 2, 1}, rng);
    for (Index i = 0; i < 12; ++i) {
        const auto j = to_multi_index(i, v.shape());
        EXPECT_LT(oracle::rel_err(tt_element(v, j), oracle::element(v, j)), kExactTol);
    }
}

TEST(TTElement, RejectsBadIndex) {
    const TTVectord v = rank_one({Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)});
    EXPECT_THROW((void)tt_element(v, {2, 0}), IndexError);
    EXPECT_THROW((void)tt_element(v, {0}), IndexError);
}

TEST(TTToDense, RankOneEnumeration) {
    const TTVectord v = rank_one({Eigen::Vector2d(2.0, 3.0), Eigen::Vector2d(4.0, 5.0)});
    const Eigen::VectorXd x = tt_to_dense(v);
    ASSERT_EQ(x.size(), 4);
    EXPECT_EQ(x, Eigen::Vector4d(8, 10, 12, 15));
    for (Index i = 0; i < 4; ++i) EXPECT_EQ(x(i), tt_element(v, to_multi_index(i, v.shape())));
}

TEST(TTToDense, ZeroVector) {
    TTVectord v = rank_one({Eigen::Vector3d::Zero(), Eigen::Vector2d::Zero()});
    EXPECT_EQ(tt_to_dense(v), Eigen::VectorXd::Zero(6));
}

TEST(TTToDense, CapGuards) {
    const TTVectord v = rank_one({Eigen::VectorXd::Ones(100), Eigen::VectorXd::Ones(100)});
    EXPECT_THROW((void)tt_to_dense(v, 9'999), ShapeError);
    EXPECT_NO_THROW((void)tt_to_dense(v, 10'000));
}

// ---------------------------------------------------------------------------
// TT-SVD
// ---------------------------------------------------------------------------

TEST(TTFromDense, ZerosGiveZeroNorm) {
    const TTVectord v = tt_from_dense(Eigen::VectorXd::Zero(60), TensorShape{3, 4, 5});
    EXPECT_EQ(tt_norm(v), 0.0);
    EXPECT_EQ(tt_to_dense(v), Eigen::VectorXd::Zero(60));
}

TEST(TTFromDense, SeparableVectorHasRankOne) {
    const Eigen::VectorXd a = Eigen::VectorXd::Random(5);
    const Eigen::VectorXd b = Eigen::VectorXd::Random(7);
    const Eigen::VectorXd x = oracle::kron(a, b).col(0);
    const TTVectord v = tt_from_dense(x, TensorShape{5, 7}, 1e-12);
    EXPECT_EQ(v.ranks(), (std::vector<Index>{1, 1, 1}));
    EXPECT_LT(oracle::rel_err(tt_to_dense(v), x), kExactTol);
}

TEST(TTFromDense, ExactRoundTrip) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    Eigen::VectorXd x(100);
    for (auto& e : x) e = g(rng);
    const TTVectord v = tt_from_dense(x, TensorShape{4, 5, 5}, 0.0);
    EXPECT_LT(oracle::rel_err(tt_to_dense(v), x), kExactTol);
    EXPECT_LT(oracle::rel_err(oracle::densify(v), x), kExactTol);
}

TEST(TTFromDense, RanksBoundedByUnfoldings) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 50; ++t) {
        const auto modes = oracle::random_modes(1 + rng() % 4, 6, rng);
        const Eigen::VectorXd x = Eigen::VectorXd::Random(oracle::product(modes));
        const TTVectord v = tt_from_dense(x, TensorShape(modes), 0.0);
        const auto r = v.ranks();
        for (std::size_t k = 0; k + 1 < r.size(); ++k) {
            Index left = 1, right = 1;
            for (std::size_t j = 0; j < modes.size(); ++j) (j <= k ? left : right) *= modes[j];
            EXPECT_LE(r[k + 1], std::min(left, right));
        }
        ASSERT_LT(oracle::rel_err(tt_to_dense(v), x), kExactTol);
    }
}

TEST(TTFromDense, RoundTripOnLargerTotals) {
    std::mt19937_64 rng(19);
    for (const auto& modes : std::vector<std::vector<Index>>{{100, 100}, {10, 10, 10, 10}, {25, 20, 20}, {2, 5000}}) {
        Eigen::VectorXd x(oracle::product(modes));
        std::normal_distribution<double> g;
        for (auto& e : x) e = g(rng);
        const TTVectord v = tt_from_dense(x, TensorShape(modes), 0.0);
        EXPECT_LT(oracle::rel_err(tt_to_dense(v), x), kExactTol);
    }
}

TEST(TTFromDense, RejectsShapeMismatchAndNegativeTolerance) {
    EXPECT_THROW((void)tt_from_dense(Eigen::VectorXd::Zero(10), TensorShape{3, 3}), ShapeError);
    EXPECT_THROW((void)tt_from_dense(Eigen::VectorXd::Zero(9), TensorShape{3, 3}, -1.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Subtraction, dot product, norm, distance
// ---------------------------------------------------------------------------

TEST(TTSubtract, SelfDifferenceHasZeroNorm) {
    std::mt19937_64 rng(23);
    const TTVectord y = oracle::random_tt({3, 4, 2}, {1, 3, 2, 1}, rng);
    EXPECT_EQ(tt_norm(tt_subtract(y, y)), 0.0);
}

TEST(TTSubtract, RanksAdd) {
    std::mt19937_64 rng(29);
    const TTVectord a = oracle::random_tt({3, 4}, {1, 2, 1}, rng);
    const TTVectord b = oracle::random_tt({3, 4}, {1, 3, 1}, rng);
    EXPECT_EQ(tt_subtract(a, b).ranks(), (std::vector<Index>{1, 5, 1}));
}

TEST(TTSubtract, MatchesDenseDifference) {
    std::mt19937_64 rng(31);
    const TTVectord a = oracle::random_tt({3, 4, 2}, {1, 2, 3, 1}, rng);
    const TTVectord b = oracle::random_tt({3, 4, 2}, {1, 3, 1, 1}, rng);
    const TTVectord z = tt_subtract(a, b);
    EXPECT_EQ(z.ranks(), (std::vector<Index>{1, 5, 4, 1}));
    EXPECT_LT(oracle::rel_err(oracle::densify(z), oracle::densify(a) - oracle::densify(b)), kExactTol);
}

TEST(TTSubtract, SingleCore) {
    std::mt19937_64 rng(37);
    const TTVectord a = oracle::random_tt({6}, {1, 1}, rng);
    const TTVectord b = oracle::random_tt({6}, {1, 1}, rng);
    EXPECT_LT(oracle::rel_err(tt_to_dense(tt_subtract(a, b)), oracle::densify(a) - oracle::densify(b)), kExactTol);
}

TEST(TTSubtract, ShapeMismatchThrows) {
    std::mt19937_64 rng(41);
    const TTVectord a = oracle::random_tt({3, 4}, {1, 2, 1}, rng);
    const TTVectord b = oracle::random_tt({4, 3}, {1, 2, 1}, rng);
    EXPECT_THROW((void)tt_subtract(a, b), ShapeError);
    EXPECT_THROW((void)tt_dot(a, b), ShapeError);
    EXPECT_THROW((void)tt_distance(a, b), ShapeError);
}

TEST(TTDot, WithZeroIsZero) {
    std::mt19937_64 rng(43);
    const TTVectord y = oracle::random_tt({4, 4, 4}, {1, 3, 2, 1}, rng);
    TTVectord z = y;
    z.core(2).unfolding().setZero();
    EXPECT_EQ(tt_dot(y, z), 0.0);
}

TEST(TTDot, SelfDotIsSquaredNorm) {
    std::mt19937_64 rng(47);
    const TTVectord y = oracle::random_tt({4, 4, 4}, {1, 3, 3, 1}, rng);
    const double dd = tt_dot(y, y);
    EXPECT_GE(dd, 0.0);
    EXPECT_LT(oracle::rel_err(dd, tt_norm(y) * tt_norm(y)), kExactTol);
}

TEST(TTDot, MatchesDenseDot) {
    std::mt19937_64 rng(53);
    const TTVectord a = oracle::random_tt({4, 4, 4}, {1, 3, 2, 1}, rng);
    const TTVectord b = oracle::random_tt({4, 4, 4}, {1, 2, 3, 1}, rng);
    EXPECT_LT(oracle::rel_err(tt_dot(a, b), oracle::densify(a).dot(oracle::densify(b))), kExactTol);
}

TEST(TTNorm, ZeroVector) {
    const TTVectord v = rank_one({Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()});
    EXPECT_EQ(tt_norm(v), 0.0);
}

TEST(TTNorm, RankOneIsProductOfNorms) {
    const Eigen::VectorXd a = Eigen::VectorXd::Random(6), b = Eigen::VectorXd::Random(4);
    EXPECT_LT(oracle::rel_err(tt_norm(rank_one({a, b})), a.norm() * b.norm()), kExactTol);
}

TEST(TTNorm, MatchesDenseNorm) {
    std::mt19937_64 rng(59);
    const TTVectord v = oracle::random_tt({5, 3, 4}, {1, 3, 3, 1}, rng);
    EXPECT_LT(oracle::rel_err(tt_norm(v), oracle::densify(v).norm()), kOracleTol);
}

TEST(TTDistance, SelfDistanceIsZero) {
    std::mt19937_64 rng(61);
    const TTVectord y = oracle::random_tt({3, 5, 2}, {1, 2, 2, 1}, rng);
    EXPECT_EQ(tt_distance(y, y), 0.0);
}

TEST(TTDistance, MatchesDenseDistance) {
    std::mt19937_64 rng(67);
    const TTVectord a = oracle::random_tt({3, 5, 2}, {1, 2, 2, 1}, rng);
    const TTVectord b = oracle::random_tt({3, 5, 2}, {1, 3, 1, 1}, rng);
    EXPECT_LT(oracle::rel_err(tt_distance(a, b), (oracle::densify(a) - oracle::densify(b)).norm()), kOracleTol);
}

TEST(TTDistance, TriangleInequality) {
    std::mt19937_64 rng(71);
    for (int t = 0; t < 50; ++t) {
        const TTVectord a = oracle::random_tt({3, 4, 2}, {1, 2, 2, 1}, rng);
        const TTVectord b = oracle::random_tt({3, 4, 2}, {1, 3, 2, 1}, rng);
        const TTVectord c = oracle::random_tt({3, 4, 2}, {1, 1, 3, 1}, rng);
        EXPECT_LE(tt_distance(a, c), tt_distance(a, b) + tt_distance(b, c) + 1e-10);
    }
}

// ---------------------------------------------------------------------------
// Matrix-by-vector product
// ---------------------------------------------------------------------------

TEST(TTMatvec, IdentityFactorsReproduceInput) {
    std::mt19937_64 rng(73);
    const TTVectord x = oracle::random_tt({2, 2}, {1, 2, 1}, rng);
    const TTMatrixd R = rank_one_operator({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)});
    EXPECT_LT(oracle::rel_err(tt_to_dense(tt_matvec(R, x)), tt_to_dense(x)), kExactTol);
}

TEST(TTMatvec, RankOneMatchesKronecker) {
    std::mt19937_64 rng(79);
    const Eigen::MatrixXd R1 = Eigen::MatrixXd::Random(2, 3), R2 = Eigen::MatrixXd::Random(3, 2);
    const TTVectord x = oracle::random_tt({3, 2}, {1, 2, 1}, rng);
    const Eigen::VectorXd want = oracle::kron(R1, R2) * oracle::densify(x);
    EXPECT_LT(oracle::rel_err(tt_to_dense(tt_matvec(rank_one_operator({R1, R2}), x)), want), kExactTol);
}

TEST(TTMatvec, OutputCoreExtentsAreRankProducts) {
    std::mt19937_64 rng(83);
    const TTMatrixd R = oracle::random_tt_matrix({2, 3, 2}, {3, 2, 4}, {1, 2, 3, 1}, rng);
    const TTVectord x = oracle::random_tt({3, 2, 4}, {1, 3, 2, 1}, rng);
    const TTVectord y = tt_matvec(R, x);
    EXPECT_EQ(y.shape(), (TensorShape{2, 3, 2}));
    EXPECT_EQ(y.ranks(), (std::vector<Index>{1, 6, 6, 1}));
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(y.core(k).left(), R.core(k).left() * x.core(k).left());
        EXPECT_EQ(y.core(k).mode(), R.core(k).rows());
        EXPECT_EQ(y.core(k).right(), R.core(k).right() * x.core(k).right());
    }
}

TEST(TTMatvec, ShapeMismatchThrows) {
    std::mt19937_64 rng(89);
    const TTMatrixd R = oracle::random_tt_matrix({2, 2}, {3, 2}, {1, 1, 1}, rng);
    const TTVectord x = oracle::random_tt({2, 3}, {1, 1, 1}, rng);
    EXPECT_THROW((void)tt_matvec(R, x), ShapeError);
}

TEST(TTMatrixToDense, MatchesEntrywiseOracle) {
    std::mt19937_64 rng(97);
    const TTMatrixd R = oracle::random_tt_matrix({2, 3, 2}, {3, 2, 2}, {1, 3, 2, 1}, rng);
    EXPECT_LT(oracle::rel_err(tt_matrix_to_dense(R), oracle::densify(R)), kExactTol);
}

// ---------------------------------------------------------------------------
// Dense-oracle equivalence over random instances
// ---------------------------------------------------------------------------

class DenseOracleSweep : public ::testing::Test {
protected:
    std::mt19937_64 rng{101};
    std::pair<TTVectord, TTVectord> pair_with_modes(std::vector<Index>& modes) {
        modes = oracle::random_modes(1 + rng() % 4, 5, rng);
        return {oracle::random_tt(modes, oracle::random_ranks(modes.size(), 3, rng), rng),
                oracle::random_tt(modes, oracle::random_ranks(modes.size(), 3, rng), rng)};
    }
};

TEST_F(DenseOracleSweep, ElementSubtractDotNormDistance) {
    for (int t = 0; t < 250; ++t) {
        std::vector<Index> modes;
        const auto [a, b] = pair_with_modes(modes);
        const Eigen::VectorXd da = oracle::densify(a), db = oracle::densify(b);
        const Index probe = static_cast<Index>(rng() % static_cast<std::uint64_t>(da.size()));
        ASSERT_LT(oracle::rel_err(tt_element(a, oracle::digits(probe, modes)), da(probe)), kOracleTol);
        ASSERT_LT(oracle::rel_err(oracle::densify(tt_subtract(a, b)), da - db), kOracleTol);
        ASSERT_LT(std::abs(tt_dot(a, b) - da.dot(db)), kOracleTol * da.norm() * db.norm());
        ASSERT_LT(oracle::rel_err(tt_norm(a), da.norm()), kOracleTol);
        ASSERT_LT(oracle::rel_err(tt_distance(a, b), (da - db).norm()), kOracleTol);
    }
}

TEST_F(DenseOracleSweep, Matvec) {
    for (int t = 0; t < 250; ++t) {
        const std::size_t d = 1 + rng() % 4;
        const auto rows = oracle::random_modes(d, 4, rng);
        const auto cols = oracle::random_modes(d, 5, rng);
        const TTMatrixd R = oracle::random_tt_matrix(rows, cols, oracle::random_ranks(d, 3, rng), rng);
        const TTVectord x = oracle::random_tt(cols, oracle::random_ranks(d, 3, rng), rng);
        const TTVectord y = tt_matvec(R, x);
        std::vector<Index> want_ranks;
        for (std::size_t k = 0; k <= d; ++k) want_ranks.push_back(R.ranks()[k] * x.ranks()[k]);
        ASSERT_EQ(y.ranks(), want_ranks);
        ASSERT_LT(oracle::rel_err(oracle::densify(y), oracle::densify(R) * oracle::densify(x)), kOracleTol);
    }
}
