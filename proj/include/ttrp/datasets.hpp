#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ttrp/random.hpp"
#include "ttrp/tensor_shape.hpp"
#include "ttrp/tt_types.hpp"

namespace ttrp {

struct Dataset {
    std::string name;
    Index dimension = 0;
    std::vector<Eigen::VectorXd> points;
    /// Set by tensorize_dataset; tt_cache[i] compresses points[i].
    std::optional<TensorShape> tt_shape;
    std::vector<TTVectord> tt_cache;

    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(points.size()); }
};

/// Point i is drawn from lane i of the seed.
[[nodiscard]] Dataset synth_gaussian(Index n0, Index N, const StreamKey& seed);

/// In-memory form of an IDX3 unsigned-byte image file.
struct IdxImages {
    std::uint32_t count = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    /// count * rows * cols bytes, image-major then row-major.
    std::vector<std::uint8_t> pixels;

    bool operator==(const IdxImages&) const = default;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

[[nodiscard]] std::vector<std::uint8_t> encode_idx_images(const IdxImages& images);
/// Throws DataError on a wrong magic, a short header or a truncated payload.
[[nodiscard]] IdxImages decode_idx_images(std::span<const std::uint8_t> bytes);
[[nodiscard]] IdxImages read_idx_images(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);

/// Samples n0 images uniformly without replacement; pixels stay raw 0..255.
[[nodiscard]] Dataset load_mnist_idx(const std::filesystem::path& path, Index n0, const StreamKey& seed);
[[nodiscard]] Dataset dataset_from_idx(const IdxImages& images, Index n0, const StreamKey& seed,
                                       std::string name = "idx");

/// Caches tt_from_dense(point, shape, tol) for every point.
[[nodiscard]] Dataset tensorize_dataset(Dataset ds, const TensorShape& shape, double tol = 0.0);

} // namespace ttrp
