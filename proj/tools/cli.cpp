#include "cli.hpp"

#include "enex/error.hpp"
#include "enex/evaluation.hpp"
#include "enex/gallery.hpp"
#include "enex/matching.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace enex::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::vector<FeatureId> parse_features(const std::string& text) {
    std::vector<FeatureId> ids;
    if (text.empty() || text == "all") return ids;
    for (const auto& name : split_list(text)) {
        try {
            ids.push_back(parse_feature(name));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    return ids;
}

std::vector<std::size_t> parse_ranks(const std::string& text) {
    std::vector<std::size_t> ranks;
    for (const auto& item : split_list(text)) {
        std::size_t used = 0;
        unsigned long value = 0;
        try {
            value = std::stoul(item, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used != item.size() || value == 0) throw UsageError("bad rank '" + item + "' in --ranks");
        ranks.push_back(value);
    }
    if (ranks.empty()) throw UsageError("--ranks needs at least one rank");
    return ranks;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

/// Tunables shared by the subcommands that extract features or fit.
struct Tuning {
    double threshold = 0.5;
    double ridge = 0.0;  // 0 selects the scale-aware default

    FeatureConfig features() const {
        FeatureConfig c;
        c.build_threshold = threshold;
        return c;
    }
    std::optional<double> ridge_override() const {
        return ridge > 0.0 ? std::optional<double>(ridge) : std::nullopt;
    }
};

void add_tuning(CLI::App* cmd, Tuning& t, bool with_ridge) {
    cmd->add_option("--threshold", t.threshold,
                    "Build threshold t: fraction of the projection peak a column must reach (decision default 0.5)")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    if (with_ridge) {
        cmd->add_option("--ridge", t.ridge,
                        "Ridge added to the within-class scatter; 0 selects 1e-6*trace/dim (floor 1e-9)")
            ->check(CLI::NonNegativeNumber);
    }
}

struct GenerateArgs {
    SyntheticConfig config;
    std::string out;
};

void add_generation(CLI::App* cmd, SyntheticConfig& c) {
    cmd->add_option("--subjects", c.subjects, "Number of subjects (gallery size n >= 2)")->check(CLI::Range(2, 100000));
    cmd->add_option("--samples", c.gallery_samples, "Gallery images per subject (30 in the reference protocol)")
        ->check(CLI::Range(1, 100000));
    auto* metric = cmd->add_option("--metric-samples", c.metric_samples,
                                   "Gallery images per subject carrying bbox metrics and a mask (5 in the reference "
                                   "protocol; capped at --samples unless given)");
    cmd->parse_complete_callback([&c, metric] {
        if (metric->count() == 0) c.metric_samples = std::min(c.metric_samples, c.gallery_samples);
    });
    cmd->add_option("--probes", c.probes_per_subject, "Probe captures per subject");
    cmd->add_option("--cameras", c.cameras, "Cameras per capture (2 = paired views, features concatenated)")
        ->check(CLI::Range(1, 2));
    cmd->add_option("--change-prob", c.clothing_change_probability, "Probability a probe changed clothing")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--back-prob", c.back_view_probability, "Probability a probe is seen from the back")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--pixel-noise", c.noise.pixel, "Uniform per-channel pixel jitter amplitude")
        ->check(CLI::Range(0, 16));
    cmd->add_option("--height-noise", c.noise.height, "Std-dev of relative height per capture")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--build-noise", c.noise.build, "Std-dev of torso width per frame, in columns")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--skin-noise", c.noise.skin, "Std-dev of skin chroma per capture")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--rows", c.image_rows, "Rendered image height")->check(CLI::Range(12, 4096));
    cmd->add_option("--cols", c.image_cols, "Rendered image width")->check(CLI::Range(12, 4096));
    cmd->add_option("--entrance-height", c.entrance_ref_height, "Entrance reference height in pixels")
        ->check(CLI::Range(1.0, 1e6));
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    try {
        validate(a.config);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const SyntheticDataset data = generate_synthetic(a.config);
    const auto manifest = write_dataset(data, a.out);
    out << "generated " << a.config.subjects << " subjects, " << a.config.gallery_samples
        << " gallery samples each, " << a.config.probes_per_subject << " probe(s) each, seed " << a.config.seed
        << '\n'
        << "manifest " << manifest.string() << '\n';
    return kExitOk;
}

struct EnrollArgs {
    std::string manifest;
    std::string gallery;
    Tuning tuning;
};

int cmd_enroll(const EnrollArgs& a, std::ostream& out) {
    if (a.gallery.empty()) throw UsageError("--gallery (or ENEX_GALLERY) is required");
    const IngestedDataset data = ingest(std::filesystem::path(a.manifest), a.tuning.features());
    Gallery gallery;
    if (std::filesystem::exists(a.gallery)) gallery = load_gallery(a.gallery);
    for (const GalleryClass& c : data.gallery) gallery.enroll(c.label, c.samples);
    gallery.fit(a.tuning.ridge_override());
    save_gallery(gallery, a.gallery);
    out << "enrolled " << data.gallery.size() << " subjects; gallery n=" << gallery.size() << " fitted=true\n";
    out << "features fitted:";
    for (FeatureId id : kAllFeatures) {
        if (const auto& slot = gallery.index(id)) {
            out << ' ' << to_string(id) << '(' << slot->transform.output_dimension() << ')';
        }
    }
    out << '\n';
    return kExitOk;
}

struct RetireArgs {
    std::string gallery;
    std::vector<std::string> labels;
    Tuning tuning;
};

int cmd_retire(const RetireArgs& a, std::ostream& out) {
    if (a.gallery.empty()) throw UsageError("--gallery (or ENEX_GALLERY) is required");
    Gallery gallery = load_gallery(a.gallery);
    for (const auto& label : a.labels) gallery.retire(label);
    if (gallery.size() >= 2) gallery.fit(a.tuning.ridge_override());
    save_gallery(gallery, a.gallery);
    out << "retired " << a.labels.size() << "; gallery n=" << gallery.size()
        << " fitted=" << (gallery.fitted() ? "true" : "false") << '\n';
    return kExitOk;
}

struct MatchArgs {
    std::string gallery;
    std::string manifest;
    std::string image;
    std::string mask;
    double bbox_height = 0.0;
    double bbox_width = 0.0;
    double entrance_height = 0.0;
    std::string view = "unknown";
    std::string id = "probe";
    std::string features = "all";
    std::size_t top = 5;
    std::string output;
    Tuning tuning;
};

void print_match(std::ostream& out, const MatchReport& report, std::size_t top) {
    const std::size_t shown = std::min(top, report.size());
    for (std::size_t pos = 0; pos < shown; ++pos) {
        const std::size_t i = report.final_order[pos];
        out << "# top " << (pos + 1) << ' ' << report.labels[i] << " CF " << fixed3(report.collective[i]) << '\n';
    }
    write_report(out, report);
}

int cmd_match(const MatchArgs& a, std::ostream& stdout_stream) {
    if (a.gallery.empty()) throw UsageError("--gallery (or ENEX_GALLERY) is required");
    if (a.manifest.empty() == a.image.empty()) throw UsageError("give exactly one of --manifest or --image");
    const Gallery gallery = load_gallery(a.gallery);
    if (!gallery.fitted()) {
        throw Error(ErrorCode::not_fitted, "snapshot " + a.gallery + " is not fitted; run enroll first");
    }

    std::vector<Probe> probes;
    if (!a.manifest.empty()) {
        DatasetManifest manifest = read_manifest(a.manifest);
        probes = ingest_probes(manifest, a.tuning.features());
    } else {
        SubjectSample sample;
        sample.image = load_image(a.image);
        if (!a.mask.empty()) sample.mask = load_mask(a.mask);
        if (a.bbox_height > 0.0) sample.bbox_height = a.bbox_height;
        if (a.bbox_width > 0.0) sample.bbox_width = a.bbox_width;
        if (a.entrance_height > 0.0) sample.entrance_ref_height = a.entrance_height;
        try {
            sample.view = parse_view(a.view);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        probes.push_back({a.id, {}, extract_bundle(sample, a.tuning.features())});
    }

    std::ofstream file;
    if (!a.output.empty()) {
        file.open(a.output, std::ios::trunc);
        if (!file) throw Error(ErrorCode::io, "cannot open " + a.output + " for writing");
    }
    std::ostream& out = a.output.empty() ? stdout_stream : file;
    MatchOptions options;
    options.features = parse_features(a.features);
    for (const Probe& p : probes) {
        options.probe_id = p.id;
        print_match(out, match_probe(p.bundle, gallery, options), a.top);
    }
    return kExitOk;
}

struct EvaluateArgs {
    std::string manifest;
    SyntheticConfig synthetic;
    std::string ranks = "1,5,10";
    std::string features = "all";
    bool compare_clothing = false;
    std::string cmc;
    std::string output;
    Tuning tuning;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& stdout_stream) {
    EvaluationOptions options;
    options.ranks = parse_ranks(a.ranks);
    options.ridge = a.tuning.ridge_override();
    options.features = parse_features(a.features);

    IngestedDataset data;
    if (!a.manifest.empty()) {
        data = ingest(std::filesystem::path(a.manifest), a.tuning.features());
    } else {
        try {
            validate(a.synthetic);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        data = ingest(generate_synthetic(a.synthetic), a.tuning.features());
    }
    const Gallery gallery = build_gallery(data.gallery, options.ridge);
    const EvaluationResult result = evaluate(gallery, data.probes, options);

    std::vector<TableRow> rows{table_row("Proposed model", result)};
    if (a.compare_clothing) {
        EvaluationOptions clothing = options;
        clothing.features = {FeatureId::clothing};
        rows.push_back(table_row("Clothing only", evaluate(gallery, data.probes, clothing)));
    }
    const std::string table =
        emit_report(rows, options.ranks, "Gallery size = " + std::to_string(gallery.size()));

    if (a.output.empty()) {
        stdout_stream << table;
    } else {
        std::ofstream file(a.output, std::ios::trunc);
        if (!(file << table)) throw Error(ErrorCode::io, "cannot write " + a.output);
    }
    if (!a.cmc.empty()) {
        std::ofstream file(a.cmc, std::ios::trunc);
        if (!(file << cmc_csv(result.curve))) throw Error(ErrorCode::io, "cannot write " + a.cmc);
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entry-exit subject matching with visual soft biometrics", "enex"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Render a synthetic entry/exit dataset and its manifest");
    add_generation(generate, gen.config);
    generate->add_option("--out", gen.out, "Output directory")->required();

    EnrollArgs enr;
    auto* enroll = app.add_subcommand("enroll", "Enroll gallery rows of a manifest, fit and save the snapshot");
    enroll->add_option("--manifest", enr.manifest, "Dataset manifest CSV")->required();
    enroll->add_option("--gallery", enr.gallery, "Gallery snapshot path")->envname("ENEX_GALLERY");
    add_tuning(enroll, enr.tuning, true);

    RetireArgs ret;
    auto* retire = app.add_subcommand("retire", "Remove exited subjects from the snapshot and refit");
    retire->add_option("--gallery", ret.gallery, "Gallery snapshot path")->envname("ENEX_GALLERY");
    retire->add_option("labels", ret.labels, "Labels to retire")->required();
    add_tuning(retire, ret.tuning, true);

    MatchArgs mat;
    auto* match = app.add_subcommand("match", "Rank gallery subjects for one probe or a probe manifest");
    match->add_option("--gallery", mat.gallery, "Gallery snapshot path")->envname("ENEX_GALLERY");
    match->add_option("--manifest", mat.manifest, "Manifest whose probe rows are matched");
    match->add_option("--image", mat.image, "Single probe image (P6)");
    match->add_option("--mask", mat.mask, "Silhouette mask for the probe image (P5)");
    match->add_option("--bbox-height", mat.bbox_height, "Probe bounding-box height at the entrance (0 = absent)");
    match->add_option("--bbox-width", mat.bbox_width, "Probe bounding-box width at the entrance (0 = absent)");
    match->add_option("--entrance-height", mat.entrance_height, "Entrance reference height (0 = absent)");
    match->add_option("--view", mat.view, "Probe view: front, back, lateral, oblique, unknown");
    match->add_option("--id", mat.id, "Probe identifier for single-image matching");
    match->add_option("--features", mat.features, "Comma list of features to fuse, or 'all'");
    match->add_option("--top", mat.top, "Summary lines printed before each record")->check(CLI::Range(0, 1000000));
    match->add_option("--output", mat.output, "Write records here instead of standard output");
    add_tuning(match, mat.tuning, false);

    EvaluateArgs ev;
    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "Rank-k evaluation of a manifest, or of a synthetic set generated in memory");
    evaluate_cmd->add_option("--manifest", ev.manifest, "Dataset manifest CSV (omit to generate synthetic data)");
    add_generation(evaluate_cmd, ev.synthetic);
    evaluate_cmd->add_option("--ranks", ev.ranks, "Comma list of table ranks");
    evaluate_cmd->add_option("--features", ev.features, "Comma list of features to fuse, or 'all'");
    evaluate_cmd->add_flag("--compare-clothing", ev.compare_clothing, "Add a clothing-only row to the table");
    evaluate_cmd->add_option("--cmc", ev.cmc, "Write the full CMC curve as k,accuracy CSV");
    evaluate_cmd->add_option("--output", ev.output, "Write the table here instead of standard output");
    add_tuning(evaluate_cmd, ev.tuning, true);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "enex: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(gen, out);
        if (*enroll) return cmd_enroll(enr, out);
        if (*retire) return cmd_retire(ret, out);
        if (*match) return cmd_match(mat, out);
        if (*evaluate_cmd) return cmd_evaluate(ev, out);
    } catch (const UsageError& e) {
        err << "enex: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "enex: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "enex: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace enex::cli
