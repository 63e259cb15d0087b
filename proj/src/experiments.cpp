#include "ttrp/experiments.hpp"

#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "ttrp/errors.hpp"
#include "ttrp/tt_algebra.hpp"

namespace ttrp {

namespace {

double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double unbiased_variance(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

bool has_matching_cache(const Dataset& data, const TensorShape& shape) {
    return data.tt_shape && *data.tt_shape == shape && data.tt_cache.size() == data.points.size();
}

} // namespace

PairwiseRatios pairwise_ratio(const Projector& p, const Dataset& data, double threshold) {
    if (data.size() < 2) throw DataError("pairwise ratio needs at least two points");
    for (const auto& x : data.points)
        if (x.size() != p.input_dim()) throw ShapeError("dataset dimension does not match projector");

    const bool use_cache = p.tt_output() && has_matching_cache(data, *p.spec().col_shape);
    std::vector<ProjectedPoint> projected;
    projected.reserve(data.points.size());
    for (std::size_t i = 0; i < data.points.size(); ++i)
        projected.push_back(use_cache ? apply(p, data.tt_cache[i]) : apply(p, data.points[i]));

    PairwiseRatios out;
    const std::size_t n0 = data.points.size();
    out.ratios.reserve(n0 * (n0 - 1) / 2);
    for (std::size_t i = 0; i < n0; ++i) {
        for (std::size_t j = i + 1; j < n0; ++j) {
            const double denom = (data.points[i] - data.points[j]).norm();
            if (denom <= threshold) {
                ++out.excluded;
                continue;
            }
            out.ratios.push_back(projected_distance(projected[i], projected[j]) / denom);
        }
    }
    if (out.ratios.empty()) throw DataError("every point pair lies within the exclusion threshold");
    out.mean = mean_of(out.ratios);
    return out;
}

double RatioStats::mean_stderr() const {
    if (per_rep_means.size() < 2) return 0.0;
    return std::sqrt(rep_variance / static_cast<double>(per_rep_means.size()));
}

RatioStats summarize_ratios(const std::vector<std::vector<double>>& per_rep, std::size_t excluded_pairs) {
    RatioStats st;
    st.excluded_pairs = excluded_pairs;
    std::vector<double> all;
    for (const auto& rep : per_rep) {
        all.insert(all.end(), rep.begin(), rep.end());
        st.per_rep_means.push_back(mean_of(rep));
    }
    st.samples = all.size();
    st.mean = mean_of(all);
    st.variance = unbiased_variance(all, st.mean);
    st.rep_variance = unbiased_variance(st.per_rep_means, mean_of(st.per_rep_means));
    return st;
}

PairwiseRatios run_repetition(const ExperimentConfig& cfg, const Dataset& data, Index rep) {
    const Projector p =
        build_projector(cfg.spec.with_seed(cfg.seed.child(static_cast<std::uint32_t>(rep))), cfg.storage);
    return pairwise_ratio(p, data, cfg.exclusion_threshold);
}

RatioStats repeat_stats(const ExperimentConfig& cfg, const Dataset& data) {
    if (cfg.reps < 1) throw ConfigError("reps must be at least 1");
    cfg.spec.validate();
    const Dataset* source = &data;
    Dataset tensorized;
    if (cfg.spec.is_tensor_train() && !has_matching_cache(data, *cfg.spec.col_shape)) {
        tensorized = tensorize_dataset(data, *cfg.spec.col_shape, 0.0);
        source = &tensorized;
    }

    std::vector<PairwiseRatios> results(static_cast<std::size_t>(cfg.reps));
    const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.reps)));
    if (threads == 1) {
        for (Index r = 0; r < cfg.reps; ++r) results[static_cast<std::size_t>(r)] = run_repetition(cfg, *source, r);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (Index r = t; r < cfg.reps; r += threads)
                        results[static_cast<std::size_t>(r)] = run_repetition(cfg, *source, r);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::vector<std::vector<double>> per_rep;
    per_rep.reserve(results.size());
    std::size_t excluded = 0;
    for (auto& r : results) {
        excluded += r.excluded;
        per_rep.push_back(std::move(r.ratios));
    }
    return summarize_ratios(per_rep, excluded);
}

SampleMoments sample_moments(std::span<const double> values) {
    SampleMoments m;
    m.count = values.size();
    if (values.empty()) return m;
    m.mean = mean_of(values);
    m.variance = unbiased_variance(values, m.mean);
    const double n = static_cast<double>(values.size());
    m.mean_stderr = std::sqrt(m.variance / n);
    if (values.size() > 3) {
        double m4 = 0.0;
        for (double v : values) m4 += std::pow(v - m.mean, 4);
        m4 /= n;
        // Var(s^2) ~ (mu_4 - sigma^4 (n-3)/(n-1)) / n.
        const double s4 = m.variance * m.variance;
        m.variance_stderr = std::sqrt(std::max(0.0, (m4 - s4 * (n - 3.0) / (n - 1.0)) / n));
    }
    return m;
}

double fourth_moment(CoreDistribution dist, double core_sparsity) {
    switch (dist) {
    case CoreDistribution::Rademacher: return 1.0;
    case CoreDistribution::Gaussian: return 3.0;
    case CoreDistribution::Sparse: return core_sparsity;
    }
    throw std::invalid_argument("unsupported core distribution");
}

VarianceBoundInputs variance_bound_inputs(const ProjectionSpec& spec, const Eigen::VectorXd& x) {
    if (!spec.is_tensor_train()) throw std::invalid_argument("variance bound applies to TT projections");
    spec.validate();
    if (x.size() != spec.N) throw ShapeError("vector length does not match N");
    VarianceBoundInputs in;
    in.delta = fourth_moment(spec.distribution, spec.core_sparsity);
    in.m = spec.row_shape->max_mode();
    in.n = spec.col_shape->max_mode();
    in.d = static_cast<Index>(spec.row_shape->order());
    in.M = spec.M;
    in.N = spec.N;
    in.max_abs = x.cwiseAbs().maxCoeff();
    in.norm = x.norm();
    return in;
}

double variance_bound(const VarianceBoundInputs& in) {
    const double base = in.delta + static_cast<double>(in.n) * static_cast<double>(in.m + 2) - 3.0;
    return std::pow(base, static_cast<double>(in.d)) * static_cast<double>(in.N) * std::pow(in.max_abs, 4) /
               static_cast<double>(in.M) -
           std::pow(in.norm, 4);
}

double variance_bound_uniform(const VarianceBoundInputs& in) {
    const double n = static_cast<double>(in.n);
    const double base = (in.delta + 2.0 * n - 3.0) / static_cast<double>(in.m) + n;
    return std::pow(base, static_cast<double>(in.d)) * static_cast<double>(in.N) * std::pow(in.max_abs, 4) -
           std::pow(in.norm, 4);
}

std::vector<double> squared_norm_samples(const ProjectionSpec& spec, const Eigen::VectorXd& x, Index draws,
                                         const StreamKey& key) {
    spec.validate();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max<Index>(draws, 0)));
    std::optional<TTVectord> xt;
    if (spec.is_tensor_train()) xt = tt_from_dense(x, *spec.col_shape, 0.0);
    for (Index t = 0; t < draws; ++t) {
        const Projector p = build_projector(spec.with_seed(key.child(static_cast<std::uint32_t>(t))));
        out.push_back(projected_squared_norm(xt ? apply(p, *xt) : apply(p, x)));
    }
    return out;
}

double covariance_oracle(const Eigen::Vector4d& x) {
    const double c = x(0) * x(1) + x(2) * x(3);
    return 4.0 * c * c;
}

CovarianceEstimate covariance_monte_carlo(const Eigen::Vector4d& x, Index draws, const StreamKey& key) {
    if (draws < 2) throw std::invalid_argument("covariance estimate needs at least two draws");
    const ProjectionSpec spec = ProjectionSpec::ttrp({2, 2}, {2, 2}, key);
    const TTVectord xt = tt_from_dense(Eigen::VectorXd(x), *spec.col_shape, 0.0);
    const double unscale = std::sqrt(static_cast<double>(spec.M));
    std::vector<double> a(static_cast<std::size_t>(draws));
    std::vector<double> b(static_cast<std::size_t>(draws));
    for (Index t = 0; t < draws; ++t) {
        const Projector p = build_ttrp(spec.with_seed(key.child(static_cast<std::uint32_t>(t))));
        const Eigen::VectorXd y = unscale * to_dense(apply(p, xt));
        a[static_cast<std::size_t>(t)] = y(0) * y(0);
        b[static_cast<std::size_t>(t)] = y(2) * y(2);
    }
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
    const double n = static_cast<double>(draws);
    CovarianceEstimate est;
    est.draws = static_cast<std::size_t>(draws);
    est.estimate = std::accumulate(prod.begin(), prod.end(), 0.0) / (n - 1.0);
    est.stderr_estimate = std::sqrt(unbiased_variance(prod, mean_of(prod)) / n);
    return est;
}

} // namespace ttrp
