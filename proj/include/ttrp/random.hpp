#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ttrp {

/// Key of an independent random stream: a root seed plus a path of lanes
/// (repetition index, core index, row index, ...). Streams are derived from
/// the key alone, so any stream can be regenerated without replaying others.
struct StreamKey {
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> lane;

    [[nodiscard]] StreamKey child(std::uint32_t sub) const {
        StreamKey k = *this;
        k.lane.push_back(sub);
        return k;
    }

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Sequential sampler bound to one StreamKey. Not thread-safe; use one per thread.
class RandomStream {
public:
    explicit RandomStream(const StreamKey& key);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open();
    /// Uniform integer in [0, bound).
    std::uint64_t uniform_index(std::uint64_t bound);
    /// Standard normal (Marsaglia polar method).
    double gaussian();
    /// Uniform on {-1, +1}.
    double rademacher();
    /// sqrt(s) * {+1 w.p. 1/(2s), 0 w.p. 1 - 1/s, -1 w.p. 1/(2s)}.
    double sparse(double s);
    /// Number of failures before the first success of a Bernoulli(p) sequence.
    std::uint64_t geometric_gap(double p);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

[[nodiscard]] Eigen::VectorXd rademacher(const StreamKey& key, Eigen::Index count);
[[nodiscard]] Eigen::VectorXd gaussian(const StreamKey& key, Eigen::Index count);
/// Throws std::invalid_argument when s < 1.
[[nodiscard]] Eigen::VectorXd sparse_sample(const StreamKey& key, Eigen::Index count, double s);

} // namespace ttrp
