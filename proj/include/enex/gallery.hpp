#pragma once

#include "enex/discriminant.hpp"
#include "enex/features.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace enex {

/// Fitted state of one feature: its transform and every enrolled class's
/// projected samples (classes in enrollment order, possibly empty).
struct FeatureIndex {
    FeatureTransform transform;
    std::vector<ClassSamples> projected;

    friend bool operator==(const FeatureIndex& a, const FeatureIndex& b) {
        if (!(a.transform == b.transform) || a.projected.size() != b.projected.size()) return false;
        for (std::size_t i = 0; i < a.projected.size(); ++i) {
            if (a.projected[i].label != b.projected[i].label ||
                a.projected[i].samples != b.projected[i].samples) {
                return false;
            }
        }
        return true;
    }
};

/// Subjects currently inside the private area. Enroll on entry, retire on
/// exit. Any mutation clears the fitted flag; `fit` must run again before
/// matching. Copies are independent snapshots.
class Gallery {
public:
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    bool fitted() const noexcept { return fitted_; }

    const std::vector<std::string>& enrollment_order() const noexcept { return labels_; }
    bool contains(const std::string& label) const;
    std::optional<std::size_t> index_of(const std::string& label) const;
    const std::vector<FeatureBundle>& samples(std::size_t class_index) const { return samples_.at(class_index); }

    void enroll(const std::string& label, std::vector<FeatureBundle> samples);
    void retire(const std::string& label);

    /// Fits one transform per feature that at least two classes can supply.
    /// Without a ridge each feature uses the scale-aware default.
    void fit(std::optional<double> ridge = std::nullopt);

    const std::optional<FeatureIndex>& index(FeatureId id) const { return index_[enex::index_of(id)]; }

    friend bool operator==(const Gallery&, const Gallery&) = default;

private:
    friend Gallery decode_gallery(std::span<const std::uint8_t> bytes);

    void invalidate();
    std::vector<ClassSamples> class_samples(FeatureId id) const;
    void rebuild_projections();

    std::vector<std::string> labels_;
    std::vector<std::vector<FeatureBundle>> samples_;
    std::array<std::optional<FeatureIndex>, kFeatureCount> index_{};
    bool fitted_ = false;
};

inline constexpr char kSnapshotMagic[] = "ENEXGAL1";

// Snapshot layout: 8-byte magic, then little-endian records (u8 fitted,
// u64 class count, per class: label, u64 sample count, bundles; u32 transform
// count, per transform: u8 feature, f64 ridge, u8 discriminative, eigenvalues,
// u32 rows, u32 cols, column-major f64 entries), then a CRC-32 of everything
// before it. Strings are u32 length + UTF-8 bytes.
std::vector<std::uint8_t> encode_gallery(const Gallery& gallery);
Gallery decode_gallery(std::span<const std::uint8_t> bytes);

void save_gallery(const Gallery& gallery, const std::filesystem::path& path);
Gallery load_gallery(const std::filesystem::path& path);

}  // namespace enex
