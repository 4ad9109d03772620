#include "enex/imaging.hpp"

#include "enex/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace enex {

template <typename Pixel>
PixelGrid<Pixel>::PixelGrid(std::size_t width, std::size_t height, Pixel fill)
    : width_(width), height_(height) {
    if (width == 0 || height == 0) {
        throw Error(ErrorCode::invalid_argument, "pixel grid needs width >= 1 and height >= 1");
    }
    pixels_.assign(width * height, fill);
}

template <typename Pixel>
PixelGrid<Pixel>::PixelGrid(std::size_t width, std::size_t height, std::vector<Pixel> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width == 0 || height == 0) {
        throw Error(ErrorCode::invalid_argument, "pixel grid needs width >= 1 and height >= 1");
    }
    if (pixels_.size() != width * height) {
        throw Error(ErrorCode::dimension_mismatch,
                    "pixel buffer holds " + std::to_string(pixels_.size()) + " entries, expected " +
                        std::to_string(width * height));
    }
}

template class PixelGrid<Rgb>;
template class PixelGrid<YCbCr>;
template class PixelGrid<std::uint8_t>;

RegionView::RegionView(const YCbCrImage& image, std::size_t row_begin, std::size_t row_end)
    : width_(image.width()), row_begin_(row_begin), row_end_(row_end) {
    if (row_begin > row_end || row_end > image.height()) {
        throw Error(ErrorCode::invalid_argument, "region rows outside image");
    }
    pixels_ = image.pixels().subspan(row_begin * width_, (row_end - row_begin) * width_);
}

// ---------------------------------------------------------------------------
// PNM codec
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxSide = 1u << 16;
constexpr std::size_t kMaxPixels = 1u << 28;

struct PnmHeader {
    char kind = 0;  // '5' or '6'
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t payload_offset = 0;
};

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::size_t read_number(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(ErrorCode::malformed_header, std::string("expected ") + what);
        }
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > kMaxPixels) {
                throw Error(ErrorCode::dimension_overflow, std::string(what) + " too large");
            }
            ++pos_;
        }
        return value;
    }

    std::size_t& pos() { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

PnmHeader parse_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') {
        throw Error(ErrorCode::malformed_header, "missing PNM magic");
    }
    PnmHeader header;
    header.kind = static_cast<char>(bytes[1]);
    if (header.kind != '5' && header.kind != '6') {
        throw Error(ErrorCode::unsupported_format,
                    std::string("only binary P5/P6 are supported, got P") + header.kind);
    }
    HeaderReader reader(bytes);
    reader.pos() = 2;
    if (reader.pos() < bytes.size() && !std::isspace(bytes[reader.pos()]) && bytes[reader.pos()] != '#') {
        throw Error(ErrorCode::malformed_header, "magic must be followed by whitespace");
    }
    header.width = reader.read_number("width");
    header.height = reader.read_number("height");
    const std::size_t maxval = reader.read_number("maxval");
    if (header.width == 0 || header.height == 0) {
        throw Error(ErrorCode::malformed_header, "zero image dimension");
    }
    if (header.width > kMaxSide || header.height > kMaxSide ||
        header.width * header.height > kMaxPixels) {
        throw Error(ErrorCode::dimension_overflow,
                    std::to_string(header.width) + "x" + std::to_string(header.height));
    }
    if (maxval != 255) {
        throw Error(ErrorCode::unsupported_format, "maxval must be 255, got " + std::to_string(maxval));
    }
    if (reader.pos() >= bytes.size() || !std::isspace(bytes[reader.pos()])) {
        throw Error(ErrorCode::malformed_header, "missing whitespace after maxval");
    }
    header.payload_offset = reader.pos() + 1;
    return header;
}

std::span<const std::uint8_t> payload(std::span<const std::uint8_t> bytes, const PnmHeader& header,
                                      std::size_t channels) {
    const std::size_t expected = header.width * header.height * channels;
    const std::size_t available = bytes.size() - header.payload_offset;
    if (available < expected) {
        throw Error(ErrorCode::malformed_payload, "payload has " + std::to_string(available) +
                                                      " bytes, header requires " +
                                                      std::to_string(expected));
    }
    return bytes.subspan(header.payload_offset, expected);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::io, "read failed for " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::io, "write failed for " + path.string());
    }
}

std::vector<std::uint8_t> pnm_header(char kind, std::size_t width, std::size_t height) {
    const std::string text = std::string("P") + kind + "\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
    return {text.begin(), text.end()};
}

}  // namespace

Image decode_ppm(std::span<const std::uint8_t> bytes) {
    const PnmHeader header = parse_header(bytes);
    if (header.kind != '6') {
        throw Error(ErrorCode::unsupported_format, "expected a P6 colour image");
    }
    const auto data = payload(bytes, header, 3);
    std::vector<Rgb> pixels(header.width * header.height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
    }
    return Image(header.width, header.height, std::move(pixels));
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
    auto bytes = pnm_header('6', image.width(), image.height());
    bytes.reserve(bytes.size() + image.size() * 3);
    for (const Rgb& p : image.pixels()) {
        bytes.push_back(p.r);
        bytes.push_back(p.g);
        bytes.push_back(p.b);
    }
    return bytes;
}

SilhouetteMask decode_pgm_mask(std::span<const std::uint8_t> bytes) {
    const PnmHeader header = parse_header(bytes);
    if (header.kind != '5') {
        throw Error(ErrorCode::unsupported_format, "expected a P5 gray mask");
    }
    const auto data = payload(bytes, header, 1);
    std::vector<std::uint8_t> bits(data.size());
    std::transform(data.begin(), data.end(), bits.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v > 127 ? 1 : 0); });
    return SilhouetteMask(header.width, header.height, std::move(bits));
}

std::vector<std::uint8_t> encode_pgm_mask(const SilhouetteMask& mask) {
    auto bytes = pnm_header('5', mask.width(), mask.height());
    bytes.reserve(bytes.size() + mask.size());
    for (std::uint8_t bit : mask.pixels()) bytes.push_back(bit ? 255 : 0);
    return bytes;
}

Image load_image(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

void save_image(const Image& image, const std::filesystem::path& path) {
    write_file(path, encode_ppm(image));
}

SilhouetteMask load_mask(const std::filesystem::path& path) { return decode_pgm_mask(read_file(path)); }

void save_mask(const SilhouetteMask& mask, const std::filesystem::path& path) {
    write_file(path, encode_pgm_mask(mask));
}

// ---------------------------------------------------------------------------
// Resampling and colour
// ---------------------------------------------------------------------------

namespace {

struct Tap {
    std::size_t lo;
    std::size_t hi;
    double frac;
};

std::vector<Tap> bilinear_taps(std::size_t src, std::size_t dst) {
    std::vector<Tap> taps(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    const double last = static_cast<double>(src - 1);
    for (std::size_t i = 0; i < dst; ++i) {
        const double pos = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, last);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        taps[i] = {lo, std::min(lo + 1, src - 1), pos - static_cast<double>(lo)};
    }
    return taps;
}

std::uint8_t round_clamp(double v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

Image normalize_size(const Image& image, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw Error(ErrorCode::invalid_argument, "target size must be positive");
    }
    if (image.height() == rows && image.width() == cols) return image;

    const auto ytaps = bilinear_taps(image.height(), rows);
    const auto xtaps = bilinear_taps(image.width(), cols);
    Image out(cols, rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const Tap& ty = ytaps[r];
        for (std::size_t c = 0; c < cols; ++c) {
            const Tap& tx = xtaps[c];
            const Rgb& p00 = image.at(ty.lo, tx.lo);
            const Rgb& p01 = image.at(ty.lo, tx.hi);
            const Rgb& p10 = image.at(ty.hi, tx.lo);
            const Rgb& p11 = image.at(ty.hi, tx.hi);
            auto blend = [&](std::uint8_t Rgb::*ch) {
                const double top = p00.*ch + tx.frac * (p01.*ch - p00.*ch);
                const double bottom = p10.*ch + tx.frac * (p11.*ch - p10.*ch);
                return round_clamp(top + ty.frac * (bottom - top));
            };
            out.at(r, c) = {blend(&Rgb::r), blend(&Rgb::g), blend(&Rgb::b)};
        }
    }
    return out;
}

YCbCr rgb_to_ycbcr(Rgb rgb) noexcept {
    const double r = rgb.r;
    const double g = rgb.g;
    const double b = rgb.b;
    return {round_clamp(0.299 * r + 0.587 * g + 0.114 * b),
            round_clamp(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b),
            round_clamp(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b)};
}

YCbCrImage rgb_to_ycbcr(const Image& image) {
    std::vector<YCbCr> planes(image.size());
    std::transform(image.pixels().begin(), image.pixels().end(), planes.begin(),
                   [](Rgb p) { return rgb_to_ycbcr(p); });
    return YCbCrImage(image.width(), image.height(), std::move(planes));
}

BandRows band_rows(std::size_t height) {
    if (height < 3) {
        throw Error(ErrorCode::degenerate_image, "need at least 3 rows, got " + std::to_string(height));
    }
    const std::size_t head_end = (height + 5) / 6;
    return {head_end, std::clamp<std::size_t>((55 * height) / 100, head_end + 1, height - 1)};
}

BodyRegions decompose_regions(const YCbCrImage& image) {
    const std::size_t h = image.height();
    const auto [head_end, torso_end] = band_rows(h);
    BodyRegions regions;
    regions.head = RegionView(image, 0, head_end);
    regions.torso = RegionView(image, head_end, torso_end);
    regions.legs = RegionView(image, torso_end, h);
    regions.torso_begin = head_end;
    regions.legs_begin = torso_end;
    return regions;
}

}  // namespace enex
