#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ttrp/datasets.hpp"
#include "ttrp/projections.hpp"

namespace ttrp {

/// Pairs whose original distance is at or below this are left out of the ratio.
inline constexpr double kPairExclusionThreshold = 1e-12;

struct PairwiseRatios {
    /// One entry per retained pair (i < j), in lexicographic order.
    std::vector<double> ratios;
    double mean = 0.0;
    std::size_t excluded = 0;
};

/// ||f(x_i) - f(x_j)|| / ||x_i - x_j|| over all pairs. TT outputs use tt_distance.
/// Throws DataError when fewer than two points are given or every pair is excluded.
[[nodiscard]] PairwiseRatios pairwise_ratio(const Projector& p, const Dataset& data,
                                            double threshold = kPairExclusionThreshold);

struct RatioStats {
    /// Grand mean over all (repetition, pair) observations.
    double mean = 0.0;
    /// Unbiased sample variance over all observations.
    double variance = 0.0;
    /// Unbiased sample variance of the per-repetition means.
    double rep_variance = 0.0;
    std::size_t samples = 0;
    std::size_t excluded_pairs = 0;
    std::vector<double> per_rep_means;

    /// Standard error of the grand mean, estimated from the per-repetition means.
    [[nodiscard]] double mean_stderr() const;
};

[[nodiscard]] RatioStats summarize_ratios(const std::vector<std::vector<double>>& per_rep,
                                          std::size_t excluded_pairs = 0);

struct ExperimentConfig {
    ProjectionSpec spec;
    Index reps = 100;
    /// Repetition r draws its projector from seed.child(r).
    StreamKey seed;
    double exclusion_threshold = kPairExclusionThreshold;
    unsigned threads = 1;
    DenseStorage storage = DenseStorage::Auto;
};

/// Ratios of one repetition.
[[nodiscard]] PairwiseRatios run_repetition(const ExperimentConfig& cfg, const Dataset& data, Index rep);
/// Tensorizes data when the projector family needs it, then runs all repetitions.
/// The result does not depend on cfg.threads or on scheduling.
[[nodiscard]] RatioStats repeat_stats(const ExperimentConfig& cfg, const Dataset& data);

struct SampleMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double mean_stderr = 0.0;
    /// Large-sample standard error of the unbiased variance estimate.
    double variance_stderr = 0.0;
};

[[nodiscard]] SampleMoments sample_moments(std::span<const double> values);

struct VarianceBoundInputs {
    double delta = 1.0;
    Index m = 1;
    Index n = 1;
    Index d = 1;
    Index M = 1;
    Index N = 1;
    double max_abs = 0.0;
    double norm = 0.0;
};

/// E[entry^4] of a unit-variance core distribution.
[[nodiscard]] double fourth_moment(CoreDistribution dist, double core_sparsity = 3.0);
[[nodiscard]] VarianceBoundInputs variance_bound_inputs(const ProjectionSpec& spec, const Eigen::VectorXd& x);
/// (1/M)(delta + n(m+2) - 3)^d N max_abs^4 - norm^4.
[[nodiscard]] double variance_bound(const VarianceBoundInputs& in);
/// ((delta + 2n - 3)/m + n)^d N max_abs^4 - norm^4, valid for M = m^d, N = n^d.
[[nodiscard]] double variance_bound_uniform(const VarianceBoundInputs& in);

/// ||f(x)||^2 for draw t = 0..draws-1 with the projector seeded by key.child(t).
[[nodiscard]] std::vector<double> squared_norm_samples(const ProjectionSpec& spec, const Eigen::VectorXd& x,
                                                       Index draws, const StreamKey& key);

/// 4 (x1 x2 + x3 x4)^2 for a length-4 x.
[[nodiscard]] double covariance_oracle(const Eigen::Vector4d& x);

struct CovarianceEstimate {
    double estimate = 0.0;
    double stderr_estimate = 0.0;
    std::size_t draws = 0;
};

/// Sample cov(y(0)^2, y(2)^2) of y = R x, R a rank-one 2x2 by 2x2 Rademacher TT operator.
[[nodiscard]] CovarianceEstimate covariance_monte_carlo(const Eigen::Vector4d& x, Index draws,
                                                        const StreamKey& key);

struct TimingCase {
    Index N = 0;
    TensorShape col_shape;
};

struct TimingConfig {
    Index M = 1000;
    TensorShape row_shape{10, 10, 10};
    std::vector<TimingCase> cases;
    std::vector<Method> methods{Method::TTRP, Method::GaussianTRP, Method::SparseRP, Method::GaussianRP};
    Index reps = 100;
    /// Overrides reps for individual methods.
    std::map<Method, Index> method_reps;
    Index warmup = 1;
    StreamKey seed;
};

/// N in {1e4, 1e5, 2e5, 1e6} with three-way column shapes.
[[nodiscard]] std::vector<TimingCase> default_timing_cases();

struct TimingRecord {
    Method method = Method::TTRP;
    Index M = 0;
    Index N = 0;
    TensorShape col_shape;
    Index reps = 0;
    /// Mean nanoseconds per repetition.
    double build_ns = 0.0;
    double apply_ns = 0.0;
    double total_ns = 0.0;
    /// One-off TT-SVD of the input; zero for dense methods.
    double tensorize_ns = 0.0;
};

/// Each repetition builds a fresh projector and applies it to one Gaussian point.
[[nodiscard]] std::vector<TimingRecord> timing_bench(const TimingConfig& cfg);

} // namespace ttrp
