#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "ttrp/datasets.hpp"
#include "ttrp/errors.hpp"
#include "ttrp/tt_algebra.hpp"

using namespace ttrp;

namespace {

IdxImages tiny_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
    IdxImages im{count, rows, cols, {}};
    im.pixels.resize(std::size_t{count} * rows * cols);
    for (std::size_t i = 0; i < im.pixels.size(); ++i) im.pixels[i] = static_cast<std::uint8_t>((i * 37 + 11) % 256);
    return im;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ttrp_test_" + name);
}

} // namespace

TEST(SynthGaussian, DeterministicPerSeed) {
    const Dataset a = synth_gaussian(5, 100, {1, {0}});
    const Dataset b = synth_gaussian(5, 100, {1, {0}});
    const Dataset c = synth_gaussian(5, 100, {2, {0}});
    ASSERT_EQ(a.size(), 5);
    EXPECT_EQ(a.dimension, 100);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.points[i], b.points[i]);
    EXPECT_NE(a.points[0], c.points[0]);
    EXPECT_NE(a.points[0], a.points[1]);
}

TEST(SynthGaussian, EntryVarianceBand) {
    const Dataset ds = synth_gaussian(10, 10'000, {3, {0}});
    for (const auto& x : ds.points) {
        const double var = (x.array() - x.mean()).square().sum() / (x.size() - 1.0);
        EXPECT_GE(var, 0.8);
        EXPECT_LE(var, 1.2);
    }
}

TEST(SynthGaussian, RejectsEmptyShapes) {
    EXPECT_THROW((void)synth_gaussian(0, 10, {}), ShapeError);
    EXPECT_THROW((void)synth_gaussian(3, 0, {}), ShapeError);
}

TEST(Idx, EncodeHeaderBigEndian) {
    const auto bytes = encode_idx_images(tiny_images(2, 3, 4));
    ASSERT_EQ(bytes.size(), 16u + 24u);
    EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 16),
              (std::vector<std::uint8_t>{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 4}));
}

TEST(Idx, RoundTripInMemoryAndOnDisk) {
    const IdxImages im = tiny_images(7, 5, 6);
    const auto bytes = encode_idx_images(im);
    EXPECT_EQ(decode_idx_images(bytes), im);

    const auto path = temp_file("roundtrip.idx");
    write_idx_images(path, im);
    EXPECT_EQ(read_idx_images(path), im);
    std::ifstream in(path, std::ios::binary);
    const std::vector<std::uint8_t> disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(disk, bytes);
    std::filesystem::remove(path);
}

TEST(Idx, MalformedInputsRaiseDataError) {
    auto bytes = encode_idx_images(tiny_images(2, 2, 2));
    EXPECT_THROW((void)decode_idx_images(std::span(bytes).first(10)), DataError);
    EXPECT_THROW((void)decode_idx_images(std::span(bytes).first(bytes.size() - 1)), DataError);
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW((void)decode_idx_images(longer), DataError);
    auto wrong = bytes;
    wrong[3] = 0x01;  // 0x801 is the label-file magic
    EXPECT_THROW((void)decode_idx_images(wrong), DataError);
    EXPECT_THROW((void)read_idx_images(temp_file("does_not_exist.idx")), DataError);
}

TEST(Idx, ZeroItemsGiveEmptyDataset) {
    const IdxImages im = decode_idx_images(encode_idx_images(tiny_images(0, 28, 28)));
    EXPECT_EQ(im.count, 0u);
    const Dataset ds = dataset_from_idx(im, 0, {1, {}});
    EXPECT_EQ(ds.size(), 0);
    EXPECT_EQ(ds.dimension, 784);
}

TEST(Idx, SamplingWithoutReplacement) {
    IdxImages im = tiny_images(20, 1, 1);
    for (std::uint32_t i = 0; i < 20; ++i) im.pixels[i] = static_cast<std::uint8_t>(i);
    const Dataset ds = dataset_from_idx(im, 20, {4, {}});
    std::set<double> seen;
    for (const auto& p : ds.points) seen.insert(p(0));
    EXPECT_EQ(seen.size(), 20u);
    EXPECT_THROW((void)dataset_from_idx(im, 21, {4, {}}), DataError);
    const Dataset again = dataset_from_idx(im, 5, {4, {}});
    const Dataset other = dataset_from_idx(im, 5, {5, {}});
    EXPECT_EQ(again.points, dataset_from_idx(im, 5, {4, {}}).points);
    EXPECT_NE(again.points, other.points);
}

TEST(Idx, PixelsStayRaw) {
    IdxImages im = tiny_images(1, 2, 2);
    im.pixels = {0, 128, 255, 7};
    const Dataset ds = dataset_from_idx(im, 1, {1, {}});
    EXPECT_EQ(ds.points[0], Eigen::Vector4d(0, 128, 255, 7));
}

TEST(Mnist, BundledSubsetLoads) {
    const auto path = std::filesystem::path(TTRP_SOURCE_DIR) / "data" / "mnist-5k-images-idx3-ubyte";
    if (!std::filesystem::exists(path)) GTEST_SKIP() << "bundled subset missing";
    const IdxImages im = read_idx_images(path);
    EXPECT_EQ(im.rows, 28u);
    EXPECT_EQ(im.cols, 28u);
    EXPECT_EQ(im.count, 5000u);
    const Dataset ds = load_mnist_idx(path, 50, {7, {0}});
    EXPECT_EQ(ds.size(), 50);
    EXPECT_EQ(ds.dimension, 784);
    for (const auto& p : ds.points) {
        EXPECT_GE(p.minCoeff(), 0.0);
        EXPECT_LE(p.maxCoeff(), 255.0);
        EXPECT_GT(p.norm(), 0.0);
    }
}

TEST(Tensorize, AcceptsFactorizationsOfN) {
    const Dataset ds = synth_gaussian(3, 784, {8, {}});
    for (const TensorShape& shape : {TensorShape{196, 4}, TensorShape{49, 4, 4}}) {
        const Dataset t = tensorize_dataset(ds, shape);
        ASSERT_EQ(t.tt_cache.size(), 3u);
        EXPECT_EQ(*t.tt_shape, shape);
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_LE((tt_to_dense(t.tt_cache[i]) - ds.points[i]).norm() / ds.points[i].norm(), 1e-12);
    }
}

TEST(Tensorize, RejectsMismatchedShape) {
    const Dataset ds = synth_gaussian(2, 784, {9, {}});
    EXPECT_THROW((void)tensorize_dataset(ds, TensorShape{10, 10}), ShapeError);
}
