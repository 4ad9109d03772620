#include "enex/error.hpp"
#include "enex/imaging.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

using namespace enex;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::size_t payload, std::uint8_t fill = 0) {
    std::vector<std::uint8_t> b(header.begin(), header.end());
    b.insert(b.end(), payload, fill);
    return b;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an enex::Error");
    return ErrorCode::io;
}

// Independent bilinear reference: samples the continuous surface through the
// four surrounding pixel centres without precomputed taps.
Rgb reference_bilinear(const Image& src, std::size_t rows, std::size_t cols, std::size_t r, std::size_t c) {
    auto coord = [](std::size_t i, std::size_t s, std::size_t d) {
        double x = (i + 0.5) * static_cast<double>(s) / static_cast<double>(d) - 0.5;
        return std::min(std::max(x, 0.0), static_cast<double>(s - 1));
    };
    const double y = coord(r, src.height(), rows);
    const double x = coord(c, src.width(), cols);
    auto sample = [&](std::uint8_t Rgb::*ch) {
        double acc = 0.0;
        for (std::size_t yy = 0; yy < src.height(); ++yy) {
            for (std::size_t xx = 0; xx < src.width(); ++xx) {
                const double wy = std::max(0.0, 1.0 - std::abs(y - static_cast<double>(yy)));
                const double wx = std::max(0.0, 1.0 - std::abs(x - static_cast<double>(xx)));
                acc += wy * wx * (src.at(yy, xx).*ch);
            }
        }
        return acc;
    };
    auto q = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); };
    return {q(sample(&Rgb::r)), q(sample(&Rgb::g)), q(sample(&Rgb::b))};
}

}  // namespace

TEST_CASE("pixel grid enforces its size invariant") {
    CHECK_THROWS_AS(Image(0, 3), Error);
    CHECK(code_of([] { Image(2, 2, std::vector<Rgb>(3)); }) == ErrorCode::dimension_mismatch);
    const Image img(3, 2, Rgb{1, 2, 3});
    CHECK(img.size() == 6);
    CHECK(img.at(1, 2) == Rgb{1, 2, 3});
}

TEST_CASE("P6 decode of an all-zero 2x2 payload is black") {
    const Image img = decode_ppm(bytes_of("P6\n2 2\n255\n", 12));
    CHECK(img.width() == 2);
    CHECK(img.height() == 2);
    for (const Rgb& p : img.pixels()) CHECK(p == Rgb{0, 0, 0});
}

TEST_CASE("PNM decode errors are distinct") {
    CHECK(code_of([] { decode_ppm(bytes_of("P6\n3 1\n255\n", 6)); }) == ErrorCode::malformed_payload);
    CHECK(code_of([] { decode_ppm(bytes_of("P6\nx 1\n255\n", 3)); }) == ErrorCode::malformed_header);
    CHECK(code_of([] { decode_ppm(bytes_of("Q6\n1 1\n255\n", 3)); }) == ErrorCode::malformed_header);
    CHECK(code_of([] { decode_ppm(bytes_of("P3\n1 1\n255\n", 3)); }) == ErrorCode::unsupported_format);
    CHECK(code_of([] { decode_ppm(bytes_of("P6\n1 1\n65535\n", 6)); }) == ErrorCode::unsupported_format);
    CHECK(code_of([] { decode_ppm(bytes_of("P6\n99999999999 1\n255\n", 3)); }) == ErrorCode::dimension_overflow);
    CHECK(code_of([] { decode_ppm(bytes_of("P6\n70000 70000\n255\n", 3)); }) == ErrorCode::dimension_overflow);
    CHECK(code_of([] { load_image("/nonexistent/enex.ppm"); }) == ErrorCode::io);
    CHECK(code_of([] { decode_pgm_mask(bytes_of("P6\n1 1\n255\n", 3)); }) == ErrorCode::unsupported_format);
}

TEST_CASE("PNM headers accept comments") {
    const Image img = decode_ppm(bytes_of("P6 # magic\n# a comment line\n1 # w\n1\n255\n", 3, 7));
    CHECK(img.at(0, 0) == Rgb{7, 7, 7});
}

TEST_CASE("P6 save/load is byte-identical") {
    testing::TempDir dir("enex_img");
    std::mt19937_64 rng(11);
    const Image img = testing::random_image(rng, 5, 7);
    const auto original = encode_ppm(img);
    const auto path = dir / "in.ppm";
    {
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(original.data()), static_cast<std::streamsize>(original.size()));
    }
    save_image(load_image(path), dir / "out.ppm");
    std::ifstream a(path, std::ios::binary);
    std::ifstream b(dir / "out.ppm", std::ios::binary);
    const std::vector<char> ba((std::istreambuf_iterator<char>(a)), {});
    const std::vector<char> bb((std::istreambuf_iterator<char>(b)), {});
    CHECK(ba == bb);
}

TEST_CASE("PGM masks threshold at 127") {
    std::vector<std::uint8_t> b = bytes_of("P5\n4 1\n255\n", 0);
    for (std::uint8_t v : {0, 127, 128, 255}) b.push_back(v);
    const SilhouetteMask mask = decode_pgm_mask(b);
    CHECK(std::vector<std::uint8_t>(mask.pixels().begin(), mask.pixels().end()) ==
          std::vector<std::uint8_t>{0, 0, 1, 1});
    CHECK(decode_pgm_mask(encode_pgm_mask(mask)) == mask);
}

TEST_CASE("normalize_size") {
    std::mt19937_64 rng(5);

    SUBCASE("identity at the target size") {
        const Image img = testing::random_image(rng, 64, 128);
        CHECK(normalize_size(img) == img);
    }
    SUBCASE("constant images stay constant") {
        std::uniform_int_distribution<int> d(0, 255);
        for (int trial = 0; trial < 100; ++trial) {
            const Rgb c{static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)),
                        static_cast<std::uint8_t>(d(rng))};
            const std::size_t w = 1 + static_cast<std::size_t>(d(rng) % 150);
            const std::size_t h = 1 + static_cast<std::size_t>(d(rng) % 300);
            const Image out = normalize_size(Image(w, h, c));
            REQUIRE(out.width() == 64);
            REQUIRE(out.height() == 128);
            CHECK(std::all_of(out.pixels().begin(), out.pixels().end(), [&](Rgb p) { return p == c; }));
        }
        const Image down = normalize_size(Image(128, 256, Rgb{10, 20, 30}));
        CHECK(down.at(77, 31) == Rgb{10, 20, 30});
    }
    SUBCASE("checkerboard upscale matches the brute-force reference") {
        Image checker(2, 2);
        checker.at(0, 0) = {0, 0, 0};
        checker.at(0, 1) = {255, 255, 255};
        checker.at(1, 0) = {255, 255, 255};
        checker.at(1, 1) = {0, 0, 0};
        const Image out = normalize_size(checker);
        CHECK(out.at(0, 0) == checker.at(0, 0));
        CHECK(out.at(0, 63) == checker.at(0, 1));
        CHECK(out.at(127, 0) == checker.at(1, 0));
        CHECK(out.at(127, 63) == checker.at(1, 1));
        for (std::size_t r = 0; r < 128; ++r) {
            for (std::size_t c = 0; c < 64; ++c) {
                REQUIRE(out.at(r, c) == reference_bilinear(checker, 128, 64, r, c));
            }
        }
    }
    SUBCASE("random downscale matches the brute-force reference") {
        const Image img = testing::random_image(rng, 23, 41);
        const Image out = normalize_size(img, 17, 9);
        for (std::size_t r = 0; r < 17; ++r) {
            for (std::size_t c = 0; c < 9; ++c) REQUIRE(out.at(r, c) == reference_bilinear(img, 17, 9, r, c));
        }
    }
}

TEST_CASE("rgb_to_ycbcr reference points") {
    CHECK(rgb_to_ycbcr(Rgb{0, 0, 0}) == YCbCr{0, 128, 128});
    CHECK(rgb_to_ycbcr(Rgb{255, 255, 255}) == YCbCr{255, 128, 128});
    CHECK(rgb_to_ycbcr(Rgb{255, 0, 0}) == YCbCr{76, 85, 255});
}

TEST_CASE("gray axis maps to neutral chroma for every level") {
    for (int v = 0; v < 256; ++v) {
        const auto u = static_cast<std::uint8_t>(v);
        REQUIRE(rgb_to_ycbcr(Rgb{u, u, u}) == YCbCr{u, 128, 128});
    }
}

TEST_CASE("rgb_to_ycbcr is pixel-local") {
    std::mt19937_64 rng(9);
    const Image img = testing::random_image(rng, 16, 12);
    std::vector<std::size_t> perm(img.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Rgb> shuffled(img.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = img.pixels()[perm[i]];
    const YCbCrImage direct = rgb_to_ycbcr(img);
    const YCbCrImage permuted = rgb_to_ycbcr(Image(16, 12, shuffled));
    for (std::size_t i = 0; i < perm.size(); ++i) REQUIRE(permuted.pixels()[i] == direct.pixels()[perm[i]]);
}

TEST_CASE("decompose_regions") {
    SUBCASE("H = 128") {
        const YCbCrImage img(64, 128);
        const BodyRegions r = decompose_regions(img);
        CHECK(r.head.row_begin() == 0);
        CHECK(r.head.row_end() == 22);
        CHECK(r.torso.row_begin() == 22);
        CHECK(r.torso.row_end() == 70);
        CHECK(r.legs.row_begin() == 70);
        CHECK(r.legs.row_end() == 128);
        CHECK(r.torso.pixels().size() == 48 * 64);
    }
    SUBCASE("H = 6") {
        const BodyRegions r = decompose_regions(YCbCrImage(4, 6));
        CHECK(r.head.rows() == 1);
        CHECK(r.torso.row_begin() == 1);
        CHECK(r.torso.row_end() == 3);
        CHECK(r.legs.row_end() == 6);
    }
    SUBCASE("too short") {
        CHECK(code_of([] { decompose_regions(YCbCrImage(4, 2)); }) == ErrorCode::degenerate_image);
    }
    SUBCASE("bands partition the rows for every height up to 4096") {
        for (std::size_t h = 3; h <= 4096; ++h) {
            const auto b = band_rows(h);
            REQUIRE(b.torso_begin >= 1);
            REQUIRE(b.legs_begin > b.torso_begin);
            REQUIRE(b.legs_begin < h);
            REQUIRE(b.torso_begin + (b.legs_begin - b.torso_begin) + (h - b.legs_begin) == h);
        }
        const YCbCrImage img(1, 4096);
        const BodyRegions r = decompose_regions(img);
        CHECK(r.head.rows() + r.torso.rows() + r.legs.rows() == 4096);
    }
}
