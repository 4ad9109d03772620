#pragma once

#include "enex/imaging.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace enex::testing {

inline Image random_image(std::mt19937_64& rng, std::size_t width, std::size_t height) {
    std::uniform_int_distribution<int> d(0, 255);
    Image img(width, height);
    for (Rgb& p : img.pixels()) {
        p = {static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng))};
    }
    return img;
}

inline YCbCrImage random_ycbcr(std::mt19937_64& rng, std::size_t width, std::size_t height) {
    std::uniform_int_distribution<int> d(0, 255);
    YCbCrImage img(width, height);
    for (YCbCr& p : img.pixels()) {
        p = {static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng))};
    }
    return img;
}

inline SilhouetteMask random_mask(std::mt19937_64& rng, std::size_t width, std::size_t height, double p = 0.5) {
    std::bernoulli_distribution d(p);
    SilhouetteMask mask(width, height);
    for (auto& bit : mask.pixels()) bit = d(rng) ? 1 : 0;
    return mask;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() /
                (name + "_" + std::to_string(std::random_device{}()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::filesystem::path path_;
};

}  // namespace enex::testing
