#include <chrono>

#include "ttrp/errors.hpp"
#include "ttrp/experiments.hpp"
#include "ttrp/tt_algebra.hpp"

namespace ttrp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point from, Clock::time_point to) {
    return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count());
}

ProjectionSpec timing_spec(Method method, const TimingConfig& cfg, const TimingCase& c) {
    switch (method) {
    case Method::TTRP: return ProjectionSpec::ttrp(cfg.row_shape, c.col_shape, {});
    case Method::GaussianTT: return ProjectionSpec::gaussian_tt(cfg.row_shape, c.col_shape, {});
    case Method::GaussianRP: return ProjectionSpec::gaussian_rp(cfg.M, c.N, {});
    case Method::SparseRP: return ProjectionSpec::very_sparse_rp(cfg.M, c.N, {});
    case Method::GaussianTRP: return ProjectionSpec::gaussian_trp(c.col_shape, cfg.M, {});
    }
    throw std::invalid_argument("unsupported projection method");
}

// Keeps results observable so the optimizer cannot drop the work.
volatile double g_sink = 0.0;

} // namespace

std::vector<TimingCase> default_timing_cases() {
    return {{10'000, TensorShape{25, 25, 16}},
            {100'000, TensorShape{50, 50, 40}},
            {200'000, TensorShape{80, 50, 50}},
            {1'000'000, TensorShape{100, 100, 100}}};
}

std::vector<TimingRecord> timing_bench(const TimingConfig& cfg) {
    if (cfg.row_shape.total() != cfg.M) throw ConfigError("timing row shape does not factor M");
    if (cfg.reps < 1) throw ConfigError("timing reps must be at least 1");
    std::vector<TimingRecord> records;
    for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
        const TimingCase& c = cfg.cases[ci];
        if (c.col_shape.total() != c.N) throw ConfigError("timing column shape does not factor N");
        const StreamKey case_key = cfg.seed.child(static_cast<std::uint32_t>(ci));
        const Eigen::VectorXd x = gaussian(case_key.child(0), c.N);

        const auto t0 = Clock::now();
        const TTVectord xt = tt_from_dense(x, c.col_shape, 0.0);
        const double tensorize_ns = elapsed_ns(t0, Clock::now());

        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            const Method method = cfg.methods[mi];
            const auto over = cfg.method_reps.find(method);
            const Index reps = over == cfg.method_reps.end() ? cfg.reps : over->second;
            if (reps < 1) throw ConfigError("timing reps must be at least 1");
            const ProjectionSpec base = timing_spec(method, cfg, c);
            const StreamKey method_key = case_key.child(1).child(static_cast<std::uint32_t>(method));

            TimingRecord rec;
            rec.method = method;
            rec.M = cfg.M;
            rec.N = c.N;
            rec.col_shape = c.col_shape;
            rec.reps = reps;
            rec.tensorize_ns = base.is_tensor_train() ? tensorize_ns : 0.0;

            const auto run_once = [&](Index lane, bool record) {
                const auto b0 = Clock::now();
                const Projector p = build_projector(
                    base.with_seed(method_key.child(static_cast<std::uint32_t>(lane))), DenseStorage::Implicit);
                const auto b1 = Clock::now();
                const ProjectedPoint y = base.is_tensor_train() ? apply(p, xt) : apply(p, x);
                const auto b2 = Clock::now();
                g_sink = g_sink + (std::holds_alternative<Eigen::VectorXd>(y)
                                       ? std::get<Eigen::VectorXd>(y)(0)
                                       : std::get<TTVectord>(y).core(0).unfolding()(0, 0));
                if (record) {
                    rec.build_ns += elapsed_ns(b0, b1);
                    rec.apply_ns += elapsed_ns(b1, b2);
                }
            };
            // Warm-up draws use lanes past the timed ones.
            for (Index w = 0; w < cfg.warmup; ++w) run_once(reps + w, false);
            for (Index r = 0; r < reps; ++r) run_once(r, true);
            rec.build_ns /= static_cast<double>(reps);
            rec.apply_ns /= static_cast<double>(reps);
            rec.total_ns = rec.build_ns + rec.apply_ns;
            records.push_back(rec);
        }
    }
    return records;
}

} // namespace ttrp
