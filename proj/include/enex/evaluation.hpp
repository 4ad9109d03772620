#pragma once

#include "enex/features.hpp"
#include "enex/gallery.hpp"
#include "enex/matching.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace enex {

// ---------------------------------------------------------------------------
// Dataset manifest
// ---------------------------------------------------------------------------

enum class Role { gallery, probe };

std::string_view to_string(Role role) noexcept;

/// One manifest row. Rows sharing label, role and a non-empty capture id are
/// views of the same moment from different cameras and get fused.
struct ManifestEntry {
    std::string label;
    Role role = Role::gallery;
    std::string capture;
    std::string camera_id;
    View view = View::unknown;
    std::filesystem::path image;  // relative to the manifest root
    std::optional<std::filesystem::path> mask;
    std::optional<double> bbox_height;
    std::optional<double> bbox_width;
    std::optional<double> entrance_ref_height;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

inline constexpr std::string_view kManifestHeader =
    "label,role,capture,camera_id,view,image,mask,bbox_height,bbox_width,entrance_ref_height";

DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& root);
DatasetManifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Throws closed_set_violation when a probe label never appears in the
/// gallery role.
void check_closed_set(const DatasetManifest& manifest);

struct GalleryClass {
    std::string label;
    std::vector<FeatureBundle> samples;
};

struct Probe {
    std::string id;
    std::string truth;
    FeatureBundle bundle;
};

struct IngestedDataset {
    std::vector<GalleryClass> gallery;  // first-appearance order
    std::vector<Probe> probes;          // manifest order
};

/// Extracts a bundle from every manifest row (fusing multi-camera captures)
/// and groups gallery bundles by label.
IngestedDataset ingest(const DatasetManifest& manifest, const FeatureConfig& config = {});
IngestedDataset ingest(const std::filesystem::path& manifest_path, const FeatureConfig& config = {});

/// Probe rows only, without the closed-set check; gallery rows are skipped
/// unread.
std::vector<Probe> ingest_probes(const DatasetManifest& manifest, const FeatureConfig& config = {});

SubjectSample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct NoiseScales {
    int pixel = 0;             // uniform per-channel RGB jitter amplitude, at most 16
    double height = 0.0;       // std-dev of the relative height per capture
    double build = 0.0;        // std-dev of torso width per frame, in columns
    double skin = 0.0;         // std-dev of skin chroma per capture
};

struct SyntheticConfig {
    std::size_t subjects = 25;
    std::size_t gallery_samples = 30;
    std::size_t metric_samples = 5;  // gallery samples carrying bbox metrics and a mask
    std::size_t probes_per_subject = 1;
    std::size_t cameras = 1;         // 1 or 2; a second camera sees the mirrored, opposite view
    double clothing_change_probability = 0.0;
    double back_view_probability = 0.0;
    NoiseScales noise;
    std::uint64_t seed = 1;
    std::size_t image_rows = kNormalizedRows;
    std::size_t image_cols = kNormalizedCols;
    double entrance_ref_height = 200.0;
};

void validate(const SyntheticConfig& config);

struct SyntheticDataset {
    DatasetManifest manifest;
    std::vector<SubjectSample> samples;  // parallel to manifest.entries
};

/// Renders flat-shaded subjects: head band in skin chroma (or hair chroma for
/// back views), torso and legs in clothing colours, plus a silhouette mask
/// whose vertical projection encodes the subject's build.
SyntheticDataset generate_synthetic(const SyntheticConfig& config);

/// Writes images, masks and manifest.csv under `dir`; returns the manifest
/// path.
std::filesystem::path write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

/// Extraction straight from an in-memory dataset, equivalent to writing it
/// out and ingesting the manifest.
IngestedDataset ingest(const SyntheticDataset& dataset, const FeatureConfig& config = {});

// ---------------------------------------------------------------------------
// Rank-k evaluation
// ---------------------------------------------------------------------------

/// accuracy[k-1] is the fraction of probes whose true class ranks within k.
struct CMCCurve {
    std::vector<double> accuracy;

    double at(std::size_t k) const;
    std::size_t size() const noexcept { return accuracy.size(); }
};

struct EvaluationOptions {
    std::optional<double> ridge;
    std::vector<std::size_t> ranks = {1, 5, 10};
    std::vector<FeatureId> features;  // empty: all four
};

struct EvaluationResult {
    CMCCurve curve;
    std::vector<std::pair<std::size_t, double>> table;  // (k, accuracy(k))
    std::vector<std::size_t> true_ranks;                // per probe
};

Gallery build_gallery(std::span<const GalleryClass> classes, std::optional<double> ridge);

EvaluationResult evaluate(const Gallery& fitted, std::span<const Probe> probes, const EvaluationOptions& options = {});
EvaluationResult evaluate(std::span<const GalleryClass> gallery, std::span<const Probe> probes,
                          const EvaluationOptions& options = {});

struct TableRow {
    std::string name;
    std::vector<double> values;
};

TableRow table_row(std::string name, const EvaluationResult& result);

/// Fixed-width rank table: optional title line, a "Rank" header, then one row
/// per method with accuracies to three decimals separated by two spaces.
std::string emit_report(std::span<const TableRow> rows, std::span<const std::size_t> ranks,
                        std::string_view title = {});

struct ParsedTable {
    std::vector<std::size_t> ranks;
    std::vector<TableRow> rows;
};

ParsedTable parse_table(std::string_view text);

/// "k,accuracy" lines for k = 1..n.
std::string cmc_csv(const CMCCurve& curve);

}  // namespace enex
