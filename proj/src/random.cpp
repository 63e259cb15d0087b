#include "ttrp/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ttrp {

namespace {

std::mt19937_64 make_engine(const StreamKey& key) {
    // seed_seq scrambles every word of the key into the full engine state, so
    // sibling lanes start from unrelated states.
    std::vector<std::uint32_t> words;
    words.reserve(key.lane.size() + 3);
    words.push_back(static_cast<std::uint32_t>(key.seed));
    words.push_back(static_cast<std::uint32_t>(key.seed >> 32));
    words.push_back(static_cast<std::uint32_t>(key.lane.size()));
    words.insert(words.end(), key.lane.begin(), key.lane.end());
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

} // namespace

std::string StreamKey::to_string() const {
    std::string s = std::to_string(seed);
    for (auto l : lane) s += "/" + std::to_string(l);
    return s;
}

RandomStream::RandomStream(const StreamKey& key) : engine_(make_engine(key)) {}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::uniform_open() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

std::uint64_t RandomStream::uniform_index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_index bound must be positive");
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % bound;
}

double RandomStream::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double RandomStream::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

double RandomStream::sparse(double s) {
    const double u = uniform();
    const double half = 0.5 / s;
    if (u < half) return std::sqrt(s);
    if (u < 2.0 * half) return -std::sqrt(s);
    return 0.0;
}

std::uint64_t RandomStream::geometric_gap(double p) {
    if (p >= 1.0) return 0;
    if (p <= 0.0) throw std::invalid_argument("geometric_gap needs p > 0");
    const double g = std::floor(std::log(uniform_open()) / std::log1p(-p));
    return g >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(g);
}

Eigen::VectorXd rademacher(const StreamKey& key, Eigen::Index count) {
    RandomStream rs(key);
    Eigen::VectorXd out(count);
    for (Eigen::Index i = 0; i < count; ++i) out(i) = rs.rademacher();
    return out;
}

Eigen::VectorXd gaussian(const StreamKey& key, Eigen::Index count) {
    RandomStream rs(key);
    Eigen::VectorXd out(count);
    for (Eigen::Index i = 0; i < count; ++i) out(i) = rs.gaussian();
    return out;
}

Eigen::VectorXd sparse_sample(const StreamKey& key, Eigen::Index count, double s) {
    if (!(s >= 1.0)) throw std::invalid_argument("sparse_sample requires s >= 1");
    RandomStream rs(key);
    Eigen::VectorXd out(count);
    for (Eigen::Index i = 0; i < count; ++i) out(i) = rs.sparse(s);
    return out;
}

} // namespace ttrp
