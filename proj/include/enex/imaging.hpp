#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace enex {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct YCbCr {
    std::uint8_t y = 0;
    std::uint8_t cb = 128;
    std::uint8_t cr = 128;
    friend bool operator==(const YCbCr&, const YCbCr&) = default;
};

/// Row-major pixel grid. Width and height are at least 1 and the pixel
/// buffer always holds exactly width * height entries.
template <typename Pixel>
class PixelGrid {
public:
    PixelGrid(std::size_t width, std::size_t height, Pixel fill = {});
    PixelGrid(std::size_t width, std::size_t height, std::vector<Pixel> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    const Pixel& at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    Pixel& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

    std::span<const Pixel> pixels() const noexcept { return pixels_; }
    std::span<Pixel> pixels() noexcept { return pixels_; }

    friend bool operator==(const PixelGrid&, const PixelGrid&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<Pixel> pixels_;
};

using Image = PixelGrid<Rgb>;
using YCbCrImage = PixelGrid<YCbCr>;

/// Per-pixel foreground flag (stored as 0/1 bytes).
using SilhouetteMask = PixelGrid<std::uint8_t>;

extern template class PixelGrid<Rgb>;
extern template class PixelGrid<YCbCr>;
extern template class PixelGrid<std::uint8_t>;

/// A contiguous band of rows borrowed from a YCbCrImage. The view does not own
/// its pixels; the source image must outlive it.
class RegionView {
public:
    RegionView() = default;
    RegionView(const YCbCrImage& image, std::size_t row_begin, std::size_t row_end);

    std::size_t width() const noexcept { return width_; }
    std::size_t rows() const noexcept { return row_end_ - row_begin_; }
    std::size_t row_begin() const noexcept { return row_begin_; }
    std::size_t row_end() const noexcept { return row_end_; }
    bool empty() const noexcept { return pixels_.empty(); }

    const YCbCr& at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    std::span<const YCbCr> pixels() const noexcept { return pixels_; }

private:
    std::span<const YCbCr> pixels_;
    std::size_t width_ = 0;
    std::size_t row_begin_ = 0;
    std::size_t row_end_ = 0;
};

struct BodyRegions {
    RegionView head;
    RegionView torso;
    RegionView legs;
    std::size_t torso_begin = 0;  // first torso row
    std::size_t legs_begin = 0;   // first legs row
};

inline constexpr std::size_t kNormalizedRows = 128;
inline constexpr std::size_t kNormalizedCols = 64;

// PPM (P6) / PGM (P5) with maxval 255. Masks read as foreground where the
// gray value exceeds 127 and are written as 0/255.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);
SilhouetteMask load_mask(const std::filesystem::path& path);
void save_mask(const SilhouetteMask& mask, const std::filesystem::path& path);

Image decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const Image& image);
SilhouetteMask decode_pgm_mask(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm_mask(const SilhouetteMask& mask);

/// Bilinear resampling over pixel centres, rounded half-up per channel.
Image normalize_size(const Image& image, std::size_t rows = kNormalizedRows,
                     std::size_t cols = kNormalizedCols);

/// Full-range BT.601 conversion, rounded half-up and clamped to [0, 255].
YCbCr rgb_to_ycbcr(Rgb rgb) noexcept;
YCbCrImage rgb_to_ycbcr(const Image& image);

struct BandRows {
    std::size_t torso_begin;
    std::size_t legs_begin;
};

/// Row boundaries used by decompose_regions for an image of `height` rows.
BandRows band_rows(std::size_t height);

/// Head is the top ceil(H/6) rows, torso runs to floor(0.55 H), legs take the
/// rest. Every band keeps at least one row. Throws degenerate_image for H < 3.
BodyRegions decompose_regions(const YCbCrImage& image);

}  // namespace enex
