#pragma once

#include "enex/imaging.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace enex {

enum class View { front, back, lateral, oblique, unknown };

std::string_view to_string(View view) noexcept;
View parse_view(std::string_view text);

/// One observation of a subject. Bounding-box metrics are only present for
/// frames captured while the subject crosses the entrance.
struct SubjectSample {
    Image image{1, 1};
    std::optional<SilhouetteMask> mask;
    std::optional<double> bbox_height;
    std::optional<double> bbox_width;
    std::optional<double> entrance_ref_height;
    std::string camera_id;
    View view = View::unknown;
};

inline constexpr std::size_t kHistogramBins = 24;
inline constexpr std::size_t kClothingDims = 4 * kHistogramBins;

/// [torso-Cb | torso-Cr | legs-Cb | legs-Cr], each block L1-normalised.
struct ClothingHistogram {
    std::array<double, kClothingDims> values{};
    friend bool operator==(const ClothingHistogram&, const ClothingHistogram&) = default;
};

struct HeightFeature {
    double value = 0.0;
    friend bool operator==(const HeightFeature&, const HeightFeature&) = default;
};

struct BuildFeature {
    double value = 0.0;
    friend bool operator==(const BuildFeature&, const BuildFeature&) = default;
};

/// Mean skin chroma of the head band. `valid` is false when no skin pixel was
/// found, which is the expected outcome for back views.
struct ComplexionFeature {
    double mean_cb = 0.0;
    double mean_cr = 0.0;
    bool valid = false;
    friend bool operator==(const ComplexionFeature&, const ComplexionFeature&) = default;
};

enum class FeatureId : std::uint8_t { clothing = 0, height = 1, build = 2, complexion = 3 };

inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<FeatureId, kFeatureCount> kAllFeatures = {
    FeatureId::clothing, FeatureId::height, FeatureId::build, FeatureId::complexion};

std::string_view to_string(FeatureId id) noexcept;
FeatureId parse_feature(std::string_view text);
constexpr std::size_t index_of(FeatureId id) noexcept { return static_cast<std::size_t>(id); }

/// The four soft-biometric measurements of one sample. Clothing and complexion
/// hold one entry per camera (camera-id order) so paired-camera captures can be
/// concatenated; a single-camera bundle has exactly one of each.
struct FeatureBundle {
    std::vector<ClothingHistogram> clothing;
    std::optional<HeightFeature> height;
    std::optional<BuildFeature> build;
    std::vector<ComplexionFeature> complexion;
    std::optional<std::string> label;

    friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
};

struct FeatureConfig {
    double build_threshold = 0.5;  // fraction of the profile peak a column must reach
    std::size_t rows = kNormalizedRows;
    std::size_t cols = kNormalizedCols;
};

/// Flattened numeric vector for one feature, or nullopt when the bundle lacks
/// it. Complexion slots of cameras without skin borrow the first valid camera's
/// means; with no valid camera the feature is unavailable.
std::optional<std::vector<double>> feature_vector(const FeatureBundle& bundle, FeatureId id);
bool has_feature(const FeatureBundle& bundle, FeatureId id);

ClothingHistogram clothing_histogram(const BodyRegions& regions);

HeightFeature extract_height(const SubjectSample& sample);

std::vector<std::size_t> vertical_projection(const SilhouetteMask& mask);

/// Maximum over profiles of peak / (columns reaching threshold * peak).
BuildFeature build_ratio(std::span<const std::vector<std::size_t>> profiles, double threshold);

inline constexpr std::uint8_t kSkinCbMin = 77;
inline constexpr std::uint8_t kSkinCbMax = 127;
inline constexpr std::uint8_t kSkinCrMin = 133;
inline constexpr std::uint8_t kSkinCrMax = 173;

constexpr bool is_skin(const YCbCr& p) noexcept {
    return p.cb >= kSkinCbMin && p.cb <= kSkinCbMax && p.cr >= kSkinCrMin && p.cr <= kSkinCrMax;
}

SilhouetteMask skin_mask(const RegionView& head);
ComplexionFeature complexion(const RegionView& head);

/// Runs the whole extraction chain. Any extractor failure leaves that feature
/// unavailable in the bundle; it never aborts the bundle.
FeatureBundle extract_bundle(const SubjectSample& sample, const FeatureConfig& config = {});

/// Merges per-camera bundles of one capture. Clothing and complexion are
/// concatenated in the given order; height and build come from the first
/// bundle that has them.
FeatureBundle fuse_bundles(std::span<const FeatureBundle> per_camera);

}  // namespace enex
