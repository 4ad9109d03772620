#include "enex/features.hpp"

#include "enex/error.hpp"

#include <algorithm>
#include <cmath>

namespace enex {

std::string_view to_string(View view) noexcept {
    switch (view) {
        case View::front: return "front";
        case View::back: return "back";
        case View::lateral: return "lateral";
        case View::oblique: return "oblique";
        case View::unknown: return "unknown";
    }
    return "unknown";
}

View parse_view(std::string_view text) {
    for (View v : {View::front, View::back, View::lateral, View::oblique, View::unknown}) {
        if (text == to_string(v)) return v;
    }
    if (text.empty()) return View::unknown;
    throw Error(ErrorCode::invalid_argument, "unknown view '" + std::string(text) + "'");
}

std::string_view to_string(FeatureId id) noexcept {
    switch (id) {
        case FeatureId::clothing: return "clothing";
        case FeatureId::height: return "height";
        case FeatureId::build: return "build";
        case FeatureId::complexion: return "complexion";
    }
    return "unknown";
}

FeatureId parse_feature(std::string_view text) {
    for (FeatureId id : kAllFeatures) {
        if (text == to_string(id)) return id;
    }
    throw Error(ErrorCode::invalid_argument, "unknown feature '" + std::string(text) + "'");
}

std::optional<std::vector<double>> feature_vector(const FeatureBundle& bundle, FeatureId id) {
    switch (id) {
        case FeatureId::clothing: {
            if (bundle.clothing.empty()) return std::nullopt;
            std::vector<double> v;
            v.reserve(bundle.clothing.size() * kClothingDims);
            for (const auto& h : bundle.clothing) v.insert(v.end(), h.values.begin(), h.values.end());
            return v;
        }
        case FeatureId::height:
            if (!bundle.height) return std::nullopt;
            return std::vector<double>{bundle.height->value};
        case FeatureId::build:
            if (!bundle.build) return std::nullopt;
            return std::vector<double>{bundle.build->value};
        case FeatureId::complexion: {
            const auto first_valid = std::find_if(bundle.complexion.begin(), bundle.complexion.end(),
                                                  [](const ComplexionFeature& c) { return c.valid; });
            if (first_valid == bundle.complexion.end()) return std::nullopt;
            std::vector<double> v;
            v.reserve(2 * bundle.complexion.size());
            for (const auto& c : bundle.complexion) {
                const auto& src = c.valid ? c : *first_valid;
                v.push_back(src.mean_cb);
                v.push_back(src.mean_cr);
            }
            return v;
        }
    }
    return std::nullopt;
}

bool has_feature(const FeatureBundle& bundle, FeatureId id) {
    switch (id) {
        case FeatureId::clothing: return !bundle.clothing.empty();
        case FeatureId::height: return bundle.height.has_value();
        case FeatureId::build: return bundle.build.has_value();
        case FeatureId::complexion:
            return std::any_of(bundle.complexion.begin(), bundle.complexion.end(),
                               [](const ComplexionFeature& c) { return c.valid; });
    }
    return false;
}

namespace {

constexpr std::size_t bin_of(std::uint8_t v) noexcept { return (static_cast<std::size_t>(v) * kHistogramBins) >> 8; }

void accumulate_region(const RegionView& region, double* cb_block, double* cr_block) {
    if (region.empty()) return;
    for (const YCbCr& p : region.pixels()) {
        cb_block[bin_of(p.cb)] += 1.0;
        cr_block[bin_of(p.cr)] += 1.0;
    }
    const double total = static_cast<double>(region.pixels().size());
    for (std::size_t i = 0; i < kHistogramBins; ++i) {
        cb_block[i] /= total;
        cr_block[i] /= total;
    }
}

}  // namespace

ClothingHistogram clothing_histogram(const BodyRegions& regions) {
    ClothingHistogram h;
    double* base = h.values.data();
    accumulate_region(regions.torso, base, base + kHistogramBins);
    accumulate_region(regions.legs, base + 2 * kHistogramBins, base + 3 * kHistogramBins);
    return h;
}

HeightFeature extract_height(const SubjectSample& sample) {
    if (!sample.bbox_height || !sample.entrance_ref_height) {
        throw Error(ErrorCode::feature_unavailable, "height needs bbox height and entrance reference");
    }
    const double h = *sample.bbox_height;
    const double ref = *sample.entrance_ref_height;
    if (!std::isfinite(h) || !std::isfinite(ref) || h < 1.0 || ref <= 0.0) {
        throw Error(ErrorCode::precondition, "bbox height must be >= 1 and reference positive");
    }
    if (h > ref) {
        throw Error(ErrorCode::precondition, "bbox height exceeds entrance reference height");
    }
    return {h / ref};
}

std::vector<std::size_t> vertical_projection(const SilhouetteMask& mask) {
    std::vector<std::size_t> counts(mask.width(), 0);
    for (std::size_t r = 0; r < mask.height(); ++r) {
        for (std::size_t c = 0; c < mask.width(); ++c) {
            if (mask.at(r, c)) ++counts[c];
        }
    }
    return counts;
}

BuildFeature build_ratio(std::span<const std::vector<std::size_t>> profiles, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "build threshold must lie in (0, 1)");
    }
    if (profiles.empty()) {
        throw Error(ErrorCode::feature_unavailable, "no projection profile supplied");
    }
    double best = 0.0;
    for (const auto& profile : profiles) {
        const auto peak_it = std::max_element(profile.begin(), profile.end());
        if (peak_it == profile.end() || *peak_it == 0) {
            throw Error(ErrorCode::feature_unavailable, "projection profile is empty");
        }
        const double peak = static_cast<double>(*peak_it);
        const double cut = threshold * peak;
        const auto width = std::count_if(profile.begin(), profile.end(),
                                         [cut](std::size_t n) { return static_cast<double>(n) >= cut; });
        best = std::max(best, peak / static_cast<double>(width));
    }
    return {best};
}

SilhouetteMask skin_mask(const RegionView& head) {
    if (head.empty()) {
        throw Error(ErrorCode::precondition, "head region is empty");
    }
    std::vector<std::uint8_t> bits(head.pixels().size());
    std::transform(head.pixels().begin(), head.pixels().end(), bits.begin(),
                   [](const YCbCr& p) { return static_cast<std::uint8_t>(is_skin(p)); });
    return SilhouetteMask(head.width(), head.rows(), std::move(bits));
}

ComplexionFeature complexion(const RegionView& head) {
    const SilhouetteMask skin = skin_mask(head);
    double sum_cb = 0.0;
    double sum_cr = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < skin.size(); ++i) {
        if (!skin.pixels()[i]) continue;
        sum_cb += head.pixels()[i].cb;
        sum_cr += head.pixels()[i].cr;
        ++count;
    }
    if (count == 0) return {};
    const double n = static_cast<double>(count);
    return {sum_cb / n, sum_cr / n, true};
}

FeatureBundle extract_bundle(const SubjectSample& sample, const FeatureConfig& config) {
    const Image normalized = normalize_size(sample.image, config.rows, config.cols);
    const YCbCrImage ycc = rgb_to_ycbcr(normalized);

    FeatureBundle bundle;
    try {
        const BodyRegions regions = decompose_regions(ycc);
        bundle.clothing.push_back(clothing_histogram(regions));
        bundle.complexion.push_back(complexion(regions.head));
    } catch (const Error&) {
        // clothing and complexion stay unavailable
    }
    try {
        bundle.height = extract_height(sample);
    } catch (const Error&) {
    }
    if (sample.mask) {
        try {
            const std::vector<std::size_t> profile = vertical_projection(*sample.mask);
            bundle.build = build_ratio(std::span(&profile, 1), config.build_threshold);
        } catch (const Error&) {
        }
    }
    return bundle;
}

FeatureBundle fuse_bundles(std::span<const FeatureBundle> per_camera) {
    FeatureBundle fused;
    for (const FeatureBundle& b : per_camera) {
        fused.clothing.insert(fused.clothing.end(), b.clothing.begin(), b.clothing.end());
        fused.complexion.insert(fused.complexion.end(), b.complexion.begin(), b.complexion.end());
        if (!fused.height) fused.height = b.height;
        if (!fused.build) fused.build = b.build;
        if (!fused.label) fused.label = b.label;
    }
    return fused;
}

}  // namespace enex
