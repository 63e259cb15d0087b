#include "ttrp/datasets.hpp"

#include <fstream>
#include <iterator>
#include <numeric>

#include "ttrp/errors.hpp"
#include "ttrp/tt_algebra.hpp"

namespace ttrp {

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

constexpr std::size_t kIdxHeaderBytes = 16;

} // namespace

Dataset synth_gaussian(Index n0, Index N, const StreamKey& seed) {
    if (n0 < 1 || N < 1) throw ShapeError("synthetic dataset needs n0 >= 1 and N >= 1");
    Dataset ds;
    ds.name = "gaussian";
    ds.dimension = N;
    ds.points.reserve(static_cast<std::size_t>(n0));
    for (Index i = 0; i < n0; ++i) ds.points.push_back(gaussian(seed.child(static_cast<std::uint32_t>(i)), N));
    return ds;
}

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images) {
    const std::uint64_t expected = std::uint64_t{images.count} * images.rows * images.cols;
    if (images.pixels.size() != expected) throw ShapeError("IDX payload size does not match its header");
    std::vector<std::uint8_t> out;
    out.reserve(kIdxHeaderBytes + images.pixels.size());
    put_be32(out, kIdxImageMagic);
    put_be32(out, images.count);
    put_be32(out, images.rows);
    put_be32(out, images.cols);
    out.insert(out.end(), images.pixels.begin(), images.pixels.end());
    return out;
}

IdxImages decode_idx_images(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kIdxHeaderBytes) throw DataError("IDX file shorter than its 16-byte header");
    const std::uint32_t magic = get_be32(bytes, 0);
    if (magic != kIdxImageMagic) throw DataError("IDX magic is not 0x00000803");
    IdxImages img;
    img.count = get_be32(bytes, 4);
    img.rows = get_be32(bytes, 8);
    img.cols = get_be32(bytes, 12);
    const std::uint64_t expected = std::uint64_t{img.count} * img.rows * img.cols;
    if (bytes.size() - kIdxHeaderBytes < expected) throw DataError("IDX payload is truncated");
    if (bytes.size() - kIdxHeaderBytes > expected) throw DataError("IDX payload has trailing bytes");
    img.pixels.assign(bytes.begin() + kIdxHeaderBytes, bytes.end());
    return img;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open IDX file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_idx_images(bytes);
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
    const auto bytes = encode_idx_images(images);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write IDX file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + path.string());
}

Dataset dataset_from_idx(const IdxImages& images, Index n0, const StreamKey& seed, std::string name) {
    if (n0 < 0) throw ConfigError("sample count must be non-negative");
    if (n0 > static_cast<Index>(images.count))
        throw DataError("requested " + std::to_string(n0) + " images but file holds " + std::to_string(images.count));
    const Index N = static_cast<Index>(images.rows) * static_cast<Index>(images.cols);
    Dataset ds;
    ds.name = std::move(name);
    ds.dimension = N;
    // Partial Fisher-Yates: the first n0 slots become a uniform sample without replacement.
    std::vector<std::uint32_t> order(images.count);
    std::iota(order.begin(), order.end(), 0u);
    RandomStream rs(seed);
    for (Index i = 0; i < n0; ++i) {
        const auto remaining = static_cast<std::uint64_t>(order.size()) - static_cast<std::uint64_t>(i);
        const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rs.uniform_index(remaining));
        std::swap(order[static_cast<std::size_t>(i)], order[j]);
        const std::uint8_t* src = images.pixels.data() + static_cast<std::size_t>(order[static_cast<std::size_t>(i)]) *
                                                             static_cast<std::size_t>(N);
        Eigen::VectorXd x(N);
        for (Index k = 0; k < N; ++k) x(k) = static_cast<double>(src[k]);
        ds.points.push_back(std::move(x));
    }
    return ds;
}

Dataset load_mnist_idx(const std::filesystem::path& path, Index n0, const StreamKey& seed) {
    return dataset_from_idx(read_idx_images(path), n0, seed, "mnist");
}

Dataset tensorize_dataset(Dataset ds, const TensorShape& shape, double tol) {
    if (shape.total() != ds.dimension)
        throw ShapeError("tensorization " + shape.to_string() + " does not factor N = " +
                         std::to_string(ds.dimension));
    ds.tt_cache.clear();
    ds.tt_cache.reserve(ds.points.size());
    for (const auto& x : ds.points) ds.tt_cache.push_back(tt_from_dense(x, shape, tol));
    ds.tt_shape = shape;
    return ds;
}

} // namespace ttrp
