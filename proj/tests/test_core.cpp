#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "porogen/core/io.hpp"
#include "porogen/core/types.hpp"

using namespace porogen;

namespace {

RgbImage random_storage_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> byte(0, 255);
    RgbImage img = RgbImage::zeros(w, h);
    for (float& v : img.data) v = static_cast<float>(byte(rng));
    return img;
}

}  // namespace

TEST_CASE("porosity_of_mask endpoints and checkerboard") {
    CHECK(porosity_of_mask(BinaryMask::filled(8, 8, 1)) == doctest::Approx(1.0));
    CHECK(porosity_of_mask(BinaryMask::filled(8, 8, 0)) == doctest::Approx(0.0));
    BinaryMask checker = BinaryMask::filled(16, 16, 0);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) checker.at(x, y) = (x + y) % 2;
    CHECK(porosity_of_mask(checker) == doctest::Approx(0.5));
}

TEST_CASE("one-hot depth encoding") {
    CHECK(one_hot_depth(DepthLabel(0, 4)) == std::vector<float>{1, 0, 0, 0});
    CHECK(one_hot_depth(DepthLabel(2, 4)) == std::vector<float>{0, 0, 1, 0});
    CHECK_THROWS_AS(DepthLabel(4, 4), ValidationError);
    CHECK_THROWS_AS(DepthLabel(-1, 4), ValidationError);
    for (int i = 0; i < 4; ++i) CHECK(argmax_one_hot(one_hot_depth(DepthLabel(i, 4))) == i);
}

TEST_CASE("condition vector carries porosity and one-hot") {
    auto c = make_condition(0.22, DepthLabel(1, 3));
    CHECK(c.porosity == doctest::Approx(0.22));
    CHECK(c.depth_one_hot == std::vector<float>{0, 1, 0});
}

TEST_CASE("domain conversion endpoints and round trip") {
    RgbImage img = RgbImage::zeros(3, 1);
    img.at(0, 0, 0) = 0.0f;
    img.at(1, 0, 0) = 255.0f;
    img.at(2, 0, 0) = 127.5f;
    auto net = to_network_domain(img);
    CHECK(net.at(0, 0, 0) == doctest::Approx(-1.0));
    CHECK(net.at(1, 0, 0) == doctest::Approx(1.0));
    CHECK(net.at(2, 0, 0) == doctest::Approx(0.0));

    auto rnd = random_storage_image(32, 32, 11);
    auto back = from_network_domain(to_network_domain(rnd));
    for (std::size_t i = 0; i < rnd.data.size(); ++i)
        CHECK(std::abs(back.data[i] - rnd.data[i]) <= 1.0f / 255.0f);
}

TEST_CASE("image and mask PNG round trips") {
    auto dir = std::filesystem::temp_directory_path() / "porogen_core_test";
    std::filesystem::create_directories(dir);

    auto img = random_storage_image(24, 17, 3);
    write_image(dir / "img.png", img);
    auto img2 = read_image(dir / "img.png");
    REQUIRE(img2.width == img.width);
    REQUIRE(img2.height == img.height);
    CHECK(img2.data == img.data);

    BinaryMask mask = BinaryMask::filled(15, 9, 0);
    std::mt19937_64 rng(5);
    for (auto& v : mask.data) v = rng() % 2;
    write_mask(dir / "mask.png", mask);
    CHECK(read_mask(dir / "mask.png").data == mask.data);
}

TEST_CASE("porosity invariant under flips and rotations") {
    std::mt19937_64 rng(9);
    BinaryMask m = BinaryMask::filled(13, 21, 0);
    for (auto& v : m.data) v = rng() % 2;
    double p = porosity_of_mask(m);

    BinaryMask flipped = m;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) flipped.at(x, y) = m.at(m.width - 1 - x, y);
    CHECK(porosity_of_mask(flipped) == doctest::Approx(p));
}
