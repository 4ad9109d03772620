#include "enex/evaluation.hpp"

#include "enex/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace enex {

std::string_view to_string(Role role) noexcept { return role == Role::gallery ? "gallery" : "probe"; }

// ---------------------------------------------------------------------------
// Manifest CSV
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kManifestColumns = 10;

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::optional<double> parse_optional_number(std::string_view text, std::size_t line_no) {
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::malformed_row,
                    "line " + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
    }
    return value;
}

std::string format_number(const std::optional<double>& v) {
    if (!v) return {};
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *v);
    return std::string(buf, ptr);
}

bool safe_field(std::string_view s) {
    return s.find_first_of(",\t\r\n\"") == std::string_view::npos;
}

void check_relative(const std::filesystem::path& p, std::size_t line_no) {
    const auto normal = p.lexically_normal();
    if (p.empty() || p.is_absolute() || (!normal.empty() && *normal.begin() == "..")) {
        throw Error(ErrorCode::malformed_row, "line " + std::to_string(line_no) + ": path '" + p.string() +
                                                  "' does not resolve under the manifest root");
    }
}

}  // namespace

DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& root) {
    DatasetManifest manifest;
    manifest.root = root;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kManifestHeader) {
                throw Error(ErrorCode::malformed_row, "manifest header must be '" + std::string(kManifestHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != kManifestColumns) {
            throw Error(ErrorCode::malformed_row, "line " + std::to_string(line_no) + ": expected " +
                                                      std::to_string(kManifestColumns) + " fields, got " +
                                                      std::to_string(f.size()));
        }
        ManifestEntry e;
        e.label = std::string(f[0]);
        if (e.label.empty()) {
            throw Error(ErrorCode::malformed_row, "line " + std::to_string(line_no) + ": empty label");
        }
        if (f[1] == "gallery") {
            e.role = Role::gallery;
        } else if (f[1] == "probe") {
            e.role = Role::probe;
        } else {
            throw Error(ErrorCode::malformed_row,
                        "line " + std::to_string(line_no) + ": role must be gallery or probe");
        }
        e.capture = std::string(f[2]);
        e.camera_id = std::string(f[3]);
        try {
            e.view = parse_view(f[4]);
        } catch (const Error& err) {
            throw Error(ErrorCode::malformed_row, "line " + std::to_string(line_no) + ": " + err.what());
        }
        e.image = std::filesystem::path(std::string(f[5]));
        check_relative(e.image, line_no);
        if (!f[6].empty()) {
            e.mask = std::filesystem::path(std::string(f[6]));
            check_relative(*e.mask, line_no);
        }
        e.bbox_height = parse_optional_number(f[7], line_no);
        e.bbox_width = parse_optional_number(f[8], line_no);
        e.entrance_ref_height = parse_optional_number(f[9], line_no);
        manifest.entries.push_back(std::move(e));
    }
    if (!header_seen) {
        throw Error(ErrorCode::malformed_row, "manifest is empty");
    }
    return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::missing_file, "cannot open manifest " + path.string());
    }
    return parse_manifest(in, path.parent_path());
}

std::string format_manifest(const DatasetManifest& manifest) {
    std::string out(kManifestHeader);
    out += '\n';
    for (const ManifestEntry& e : manifest.entries) {
        const std::string image = e.image.generic_string();
        const std::string mask = e.mask ? e.mask->generic_string() : std::string();
        for (std::string_view field : {std::string_view(e.label), std::string_view(e.capture),
                                       std::string_view(e.camera_id), std::string_view(image),
                                       std::string_view(mask)}) {
            if (!safe_field(field)) {
                throw Error(ErrorCode::invalid_argument, "field '" + std::string(field) + "' cannot be written to CSV");
            }
        }
        out += e.label + ',' + std::string(to_string(e.role)) + ',' + e.capture + ',' + e.camera_id + ',' +
               std::string(to_string(e.view)) + ',' + image + ',' + mask + ',' + format_number(e.bbox_height) +
               ',' + format_number(e.bbox_width) + ',' + format_number(e.entrance_ref_height) + '\n';
    }
    return out;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    }
    out << format_manifest(manifest);
    if (!out) {
        throw Error(ErrorCode::io, "write failed for " + path.string());
    }
}

void check_closed_set(const DatasetManifest& manifest) {
    std::set<std::string> gallery;
    for (const auto& e : manifest.entries) {
        if (e.role == Role::gallery) gallery.insert(e.label);
    }
    for (const auto& e : manifest.entries) {
        if (e.role == Role::probe && !gallery.count(e.label)) {
            throw Error(ErrorCode::closed_set_violation, "probe label '" + e.label + "' has no gallery entry");
        }
    }
}

SubjectSample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry) {
    auto resolve = [&](const std::filesystem::path& rel) {
        const auto full = manifest.root / rel;
        if (!std::filesystem::exists(full)) {
            throw Error(ErrorCode::missing_file, full.string());
        }
        return full;
    };
    SubjectSample sample;
    sample.image = load_image(resolve(entry.image));
    if (entry.mask) sample.mask = load_mask(resolve(*entry.mask));
    sample.bbox_height = entry.bbox_height;
    sample.bbox_width = entry.bbox_width;
    sample.entrance_ref_height = entry.entrance_ref_height;
    sample.camera_id = entry.camera_id;
    sample.view = entry.view;
    return sample;
}

namespace {

/// Groups row indices into captures: rows sharing label, role and a non-empty
/// capture id form one group, sorted by camera id. Groups keep first-row order.
std::vector<std::vector<std::size_t>> capture_groups(const DatasetManifest& manifest) {
    std::vector<std::vector<std::size_t>> groups;
    std::map<std::tuple<std::string, Role, std::string>, std::size_t> slot;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        if (e.capture.empty()) {
            groups.push_back({i});
            continue;
        }
        const auto [it, inserted] = slot.try_emplace({e.label, e.role, e.capture}, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(i);
    }
    for (auto& g : groups) {
        std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
            return manifest.entries[a].camera_id < manifest.entries[b].camera_id;
        });
    }
    return groups;
}

template <typename SampleAt>
IngestedDataset ingest_with(const DatasetManifest& manifest, const FeatureConfig& config, SampleAt&& sample_at,
                            bool probes_only = false) {
    if (!probes_only) check_closed_set(manifest);
    IngestedDataset data;
    std::map<std::string, std::size_t> class_slot;
    for (const auto& group : capture_groups(manifest)) {
        if (probes_only && manifest.entries[group.front()].role != Role::probe) continue;
        std::vector<FeatureBundle> per_camera;
        per_camera.reserve(group.size());
        for (std::size_t row : group) per_camera.push_back(extract_bundle(sample_at(row), config));
        FeatureBundle bundle = per_camera.size() == 1 ? std::move(per_camera.front()) : fuse_bundles(per_camera);
        const ManifestEntry& e = manifest.entries[group.front()];
        bundle.label = e.label;
        if (e.role == Role::gallery) {
            const auto [it, inserted] = class_slot.try_emplace(e.label, data.gallery.size());
            if (inserted) data.gallery.push_back({e.label, {}});
            data.gallery[it->second].samples.push_back(std::move(bundle));
        } else {
            const std::string id = e.capture.empty() ? e.label + "@row" + std::to_string(group.front() + 1)
                                                     : e.capture;
            data.probes.push_back({id, e.label, std::move(bundle)});
        }
    }
    return data;
}

}  // namespace

IngestedDataset ingest(const DatasetManifest& manifest, const FeatureConfig& config) {
    return ingest_with(manifest, config,
                       [&](std::size_t row) { return load_sample(manifest, manifest.entries[row]); });
}

IngestedDataset ingest(const std::filesystem::path& manifest_path, const FeatureConfig& config) {
    return ingest(read_manifest(manifest_path), config);
}

std::vector<Probe> ingest_probes(const DatasetManifest& manifest, const FeatureConfig& config) {
    return ingest_with(
               manifest, config, [&](std::size_t row) { return load_sample(manifest, manifest.entries[row]); }, true)
        .probes;
}

IngestedDataset ingest(const SyntheticDataset& dataset, const FeatureConfig& config) {
    return ingest_with(dataset.manifest, config,
                       [&](std::size_t row) -> const SubjectSample& { return dataset.samples[row]; });
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

struct Chroma {
    double y;
    double cb;
    double cr;
};

Rgb ycbcr_to_rgb(const Chroma& c) {
    auto clamp8 = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); };
    return {clamp8(c.y + 1.402 * (c.cr - 128.0)),
            clamp8(c.y - 0.344136 * (c.cb - 128.0) - 0.714136 * (c.cr - 128.0)),
            clamp8(c.y + 1.772 * (c.cb - 128.0))};
}

// Well outside the skin box on both chroma axes, so bounded pixel noise can
// never move it inside.
constexpr Chroma kHairChroma{40.0, 150.0, 110.0};

struct Subject {
    std::string label;
    Rgb torso;
    Rgb legs;
    double height;      // relative to the entrance reference
    double torso_width; // columns at the configured image width
    Chroma skin;
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Rgb random_colour(Rng& rng) {
    std::uniform_int_distribution<int> d(0, 255);
    return {static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng))};
}

double gaussian(Rng& rng, double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

struct Capture {
    Rgb torso;
    Rgb legs;
    Chroma skin;
    bool back = false;
};

Image render_image(const SyntheticConfig& cfg, const Capture& cap, bool mirrored, bool back, Rng& rng) {
    Image img(cfg.image_cols, cfg.image_rows);
    const auto bands = band_rows(cfg.image_rows);
    const Rgb head = ycbcr_to_rgb(back ? kHairChroma : cap.skin);
    std::uniform_int_distribution<int> jitter(-cfg.noise.pixel, cfg.noise.pixel);
    for (std::size_t r = 0; r < cfg.image_rows; ++r) {
        const Rgb base = r < bands.torso_begin ? head : (r < bands.legs_begin ? cap.torso : cap.legs);
        for (std::size_t c = 0; c < cfg.image_cols; ++c) {
            Rgb p = base;
            if (cfg.noise.pixel > 0) {
                auto add = [&](std::uint8_t v) {
                    return static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + jitter(rng), 0, 255));
                };
                p = {add(p.r), add(p.g), add(p.b)};
            }
            img.at(r, mirrored ? cfg.image_cols - 1 - c : c) = p;
        }
    }
    return img;
}

/// Silhouette whose projection peaks over the head column at the full image
/// height, keeps every torso column above half of that, and leaves arm columns
/// below half so the thresholded width is the torso width.
SilhouetteMask render_mask(const SyntheticConfig& cfg, std::size_t torso_width, Rng& rng) {
    const std::size_t rows = cfg.image_rows;
    const std::size_t cols = cfg.image_cols;
    SilhouetteMask mask(cols, rows, 0);
    const auto bands = band_rows(rows);
    const std::size_t width = std::clamp<std::size_t>(torso_width, 2, cols > 6 ? cols - 6 : cols);
    const std::size_t left = (cols - width) / 2;
    const std::size_t head_width = std::max<std::size_t>(width / 2, 1);
    const std::size_t head_left = left + (width - head_width) / 2;
    for (std::size_t r = 0; r < bands.torso_begin; ++r) {
        for (std::size_t c = head_left; c < head_left + head_width; ++c) mask.at(r, c) = 1;
    }
    for (std::size_t r = bands.torso_begin; r < rows; ++r) {
        for (std::size_t c = left; c < left + width; ++c) mask.at(r, c) = 1;
    }
    const auto arm_rows = static_cast<std::size_t>(uniform(rng, 0.2, 0.4) * static_cast<double>(rows));
    for (std::size_t r = bands.torso_begin; r < std::min(rows, bands.torso_begin + arm_rows); ++r) {
        for (std::size_t k = 1; k <= 3; ++k) {
            if (left >= k) mask.at(r, left - k) = 1;
            if (left + width - 1 + k < cols) mask.at(r, left + width - 1 + k) = 1;
        }
    }
    return mask;
}

std::string subject_label(std::size_t i, std::size_t n) {
    const std::size_t digits = std::max<std::size_t>(3, std::to_string(n).size());
    std::string num = std::to_string(i + 1);
    return "S" + std::string(digits - num.size(), '0') + num;
}

}  // namespace

void validate(const SyntheticConfig& c) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, what); };
    if (c.subjects < 2) fail("synthetic data needs at least 2 subjects");
    if (c.gallery_samples < 1) fail("gallery samples per subject must be >= 1");
    if (c.metric_samples > c.gallery_samples) fail("metric samples exceed gallery samples");
    if (c.cameras < 1 || c.cameras > 2) fail("cameras must be 1 or 2");
    if (!(c.clothing_change_probability >= 0.0 && c.clothing_change_probability <= 1.0)) {
        fail("clothing-change probability must lie in [0, 1]");
    }
    if (!(c.back_view_probability >= 0.0 && c.back_view_probability <= 1.0)) {
        fail("back-view probability must lie in [0, 1]");
    }
    if (c.noise.pixel < 0 || c.noise.pixel > 16) fail("pixel noise must lie in [0, 16]");
    if (!(c.noise.height >= 0.0 && c.noise.build >= 0.0 && c.noise.skin >= 0.0)) fail("noise scales must be >= 0");
    if (c.image_rows < 12 || c.image_cols < 12) fail("synthetic images must be at least 12x12");
    if (!(c.entrance_ref_height >= 1.0)) fail("entrance reference height must be >= 1");
}

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    const double cols = static_cast<double>(cfg.image_cols);

    // Skin chroma stays far enough inside the skin box that pixel noise and
    // rounding cannot push it out.
    const double margin = cfg.noise.pixel + 3.0;
    auto draw_skin = [&](Rng& g) {
        return Chroma{uniform(g, 100.0, 170.0), uniform(g, kSkinCbMin + margin, kSkinCbMax - margin),
                      uniform(g, kSkinCrMin + margin, kSkinCrMax - margin)};
    };
    auto clamp_skin = [&](Chroma c) {
        c.cb = std::clamp(c.cb, kSkinCbMin + margin, kSkinCbMax - margin);
        c.cr = std::clamp(c.cr, kSkinCrMin + margin, kSkinCrMax - margin);
        return c;
    };

    std::vector<Subject> subjects;
    for (std::size_t i = 0; i < cfg.subjects; ++i) {
        Subject s;
        s.label = subject_label(i, cfg.subjects);
        s.torso = random_colour(rng);
        s.legs = random_colour(rng);
        s.height = uniform(rng, 0.70, 0.98);
        s.torso_width = uniform(rng, 0.22 * cols, 0.5 * cols);
        s.skin = draw_skin(rng);
        subjects.push_back(s);
    }

    SyntheticDataset data;
    auto emit = [&](const Subject& s, Role role, const std::string& capture, const Capture& cap, bool metrics) {
        const double height = std::clamp(s.height + (metrics ? gaussian(rng, cfg.noise.height) : 0.0), 0.3, 1.0);
        const auto width = static_cast<std::size_t>(
            std::max(2.0, std::round(s.torso_width + gaussian(rng, cfg.noise.build))));
        for (std::size_t cam = 0; cam < cfg.cameras; ++cam) {
            const bool second = cam == 1;
            const bool back = second ? !cap.back : cap.back;
            SubjectSample sample;
            sample.image = render_image(cfg, cap, second, back, rng);
            sample.camera_id = "cam" + std::to_string(cam + 1);
            sample.view = back ? View::back : View::front;
            ManifestEntry e;
            e.label = s.label;
            e.role = role;
            e.capture = capture;
            e.camera_id = sample.camera_id;
            e.view = sample.view;
            const std::string stem = capture + "_" + sample.camera_id;
            e.image = std::filesystem::path("images") / (stem + ".ppm");
            if (metrics) {
                sample.mask = render_mask(cfg, width, rng);
                sample.bbox_height = std::round(height * cfg.entrance_ref_height);
                sample.bbox_width = static_cast<double>(width + 6);
                sample.entrance_ref_height = cfg.entrance_ref_height;
                e.mask = std::filesystem::path("masks") / (stem + ".pgm");
                e.bbox_height = sample.bbox_height;
                e.bbox_width = sample.bbox_width;
                e.entrance_ref_height = sample.entrance_ref_height;
            }
            data.manifest.entries.push_back(std::move(e));
            data.samples.push_back(std::move(sample));
        }
    };

    for (const Subject& s : subjects) {
        for (std::size_t j = 0; j < cfg.gallery_samples; ++j) {
            const Capture cap{s.torso, s.legs, clamp_skin({s.skin.y, s.skin.cb + gaussian(rng, cfg.noise.skin),
                                                           s.skin.cr + gaussian(rng, cfg.noise.skin)}),
                              false};
            emit(s, Role::gallery, s.label + "-g" + std::to_string(j), cap, j < cfg.metric_samples);
        }
    }
    for (const Subject& s : subjects) {
        for (std::size_t j = 0; j < cfg.probes_per_subject; ++j) {
            Capture cap{s.torso, s.legs, clamp_skin({s.skin.y, s.skin.cb + gaussian(rng, cfg.noise.skin),
                                                     s.skin.cr + gaussian(rng, cfg.noise.skin)}),
                        false};
            if (uniform(rng, 0.0, 1.0) < cfg.clothing_change_probability) {
                cap.torso = random_colour(rng);
                cap.legs = random_colour(rng);
            }
            cap.back = uniform(rng, 0.0, 1.0) < cfg.back_view_probability;
            emit(s, Role::probe, s.label + "-p" + std::to_string(j), cap, true);
        }
    }
    return data;
}

std::filesystem::path write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "images", ec);
    std::filesystem::create_directories(dir / "masks", ec);
    if (ec) {
        throw Error(ErrorCode::io, "cannot create dataset directory " + dir.string() + ": " + ec.message());
    }
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const ManifestEntry& e = dataset.manifest.entries[i];
        const SubjectSample& s = dataset.samples[i];
        save_image(s.image, dir / e.image);
        if (e.mask && s.mask) save_mask(*s.mask, dir / *e.mask);
    }
    const auto path = dir / "manifest.csv";
    write_manifest(dataset.manifest, path);
    return path;
}

// ---------------------------------------------------------------------------
// Evaluation and reporting
// ---------------------------------------------------------------------------

double CMCCurve::at(std::size_t k) const {
    if (k == 0 || accuracy.empty()) {
        throw Error(ErrorCode::rank_out_of_range, "rank must be >= 1 on a non-empty curve");
    }
    return k > accuracy.size() ? accuracy.back() : accuracy[k - 1];
}

Gallery build_gallery(std::span<const GalleryClass> classes, std::optional<double> ridge) {
    Gallery g;
    for (const GalleryClass& c : classes) g.enroll(c.label, c.samples);
    g.fit(ridge);
    return g;
}

EvaluationResult evaluate(const Gallery& fitted, std::span<const Probe> probes, const EvaluationOptions& options) {
    if (probes.empty()) {
        throw Error(ErrorCode::precondition, "evaluation needs at least one probe");
    }
    if (fitted.size() < 2) {
        throw Error(ErrorCode::cannot_fit, "evaluation needs a gallery of at least 2 subjects");
    }
    const std::size_t n = fitted.size();
    EvaluationResult result;
    MatchOptions match_options;
    match_options.features = options.features;
    std::vector<std::size_t> hits(n + 1, 0);
    for (const Probe& p : probes) {
        match_options.probe_id = p.id;
        const MatchReport report = match_probe(p.bundle, fitted, match_options);
        const auto rank = report.rank_of(p.truth);
        if (!rank) {
            throw Error(ErrorCode::closed_set_violation, "probe '" + p.id + "' truth '" + p.truth + "' not enrolled");
        }
        result.true_ranks.push_back(*rank);
        ++hits[*rank];
    }
    result.curve.accuracy.resize(n);
    std::size_t cumulative = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        cumulative += hits[k];
        result.curve.accuracy[k - 1] = static_cast<double>(cumulative) / static_cast<double>(probes.size());
    }
    for (std::size_t k : options.ranks) result.table.emplace_back(k, result.curve.at(k));
    return result;
}

EvaluationResult evaluate(std::span<const GalleryClass> gallery, std::span<const Probe> probes,
                          const EvaluationOptions& options) {
    std::set<std::string> labels;
    for (const auto& c : gallery) labels.insert(c.label);
    for (const auto& p : probes) {
        if (!labels.count(p.truth)) {
            throw Error(ErrorCode::closed_set_violation, "probe '" + p.id + "' has no gallery class");
        }
    }
    return evaluate(build_gallery(gallery, options.ridge), probes, options);
}

TableRow table_row(std::string name, const EvaluationResult& result) {
    TableRow row{std::move(name), {}};
    for (const auto& [k, acc] : result.table) row.values.push_back(acc);
    return row;
}

namespace {

constexpr int kNameWidth = 22;

std::string rstrip(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

}  // namespace

std::string emit_report(std::span<const TableRow> rows, std::span<const std::size_t> ranks, std::string_view title) {
    std::string out;
    if (!title.empty()) {
        out += title;
        out += '\n';
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-*s", kNameWidth, "Rank");
    std::string header = buf;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%-5zu", ranks[i]);
        header += (i ? "  " : "") + std::string(buf);
    }
    out += rstrip(header) + '\n';
    for (const TableRow& row : rows) {
        if (row.values.size() != ranks.size()) {
            throw Error(ErrorCode::invalid_argument, "row '" + row.name + "' does not match the rank columns");
        }
        std::string line = row.name;
        if (line.size() < static_cast<std::size_t>(kNameWidth)) line.resize(kNameWidth, ' ');
        else line += "  ";
        for (std::size_t i = 0; i < row.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.3f", row.values[i]);
            line += (i ? "  " : "") + std::string(buf);
        }
        out += line + '\n';
    }
    return out;
}

ParsedTable parse_table(std::string_view text) {
    ParsedTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        std::istringstream words(line);
        std::vector<std::string> tokens;
        for (std::string w; words >> w;) tokens.push_back(w);
        if (tokens.empty()) continue;
        if (!header_seen) {
            if (tokens.front() != "Rank") continue;  // title
            for (std::size_t i = 1; i < tokens.size(); ++i) table.ranks.push_back(std::stoul(tokens[i]));
            header_seen = true;
            continue;
        }
        const std::size_t k = table.ranks.size();
        if (tokens.size() < k + 1) {
            throw Error(ErrorCode::malformed_row, "table row too short: " + line);
        }
        TableRow row;
        for (std::size_t i = 0; i + k < tokens.size(); ++i) row.name += (i ? " " : "") + tokens[i];
        for (std::size_t i = tokens.size() - k; i < tokens.size(); ++i) row.values.push_back(std::stod(tokens[i]));
        table.rows.push_back(std::move(row));
    }
    if (!header_seen) {
        throw Error(ErrorCode::malformed_row, "no rank header found");
    }
    return table;
}

std::string cmc_csv(const CMCCurve& curve) {
    std::string out = "k,accuracy\n";
    char buf[64];
    for (std::size_t k = 1; k <= curve.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", k, curve.accuracy[k - 1]);
        out += buf;
    }
    return out;
}

}  // namespace enex
