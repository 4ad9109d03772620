#include "enex/error.hpp"
#include "enex/evaluation.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace enex;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an enex::Error");
    return ErrorCode::io;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SyntheticConfig small_config(std::size_t subjects = 4) {
    SyntheticConfig c;
    c.subjects = subjects;
    c.gallery_samples = 4;
    c.metric_samples = 2;
    c.seed = 11;
    return c;
}

FeatureBundle height_only(double v) {
    FeatureBundle b;
    b.height = HeightFeature{v};
    return b;
}

}  // namespace

TEST_CASE("manifest parse and format") {
    const std::string text = std::string(kManifestHeader) +
                             "\n"
                             "A,gallery,A-g0,cam1,front,images/a0.ppm,masks/a0.pgm,180,40,200\n"
                             "A,gallery,,cam1,,images/a1.ppm,,,,\n"
                             "\n"
                             "A,probe,A-p0,cam2,back,images/ap.ppm,masks/ap.pgm,181.5,41,200\n";
    std::istringstream in(text);
    const DatasetManifest m = parse_manifest(in, "/data");
    REQUIRE(m.entries.size() == 3);
    CHECK(m.root == "/data");
    CHECK(m.entries[0].mask == std::filesystem::path("masks/a0.pgm"));
    CHECK(*m.entries[0].bbox_height == 180.0);
    CHECK(m.entries[1].view == View::unknown);
    CHECK_FALSE(m.entries[1].mask.has_value());
    CHECK_FALSE(m.entries[1].entrance_ref_height.has_value());
    CHECK(m.entries[2].role == Role::probe);
    CHECK(m.entries[2].view == View::back);
    CHECK(*m.entries[2].bbox_height == 181.5);

    std::istringstream again(format_manifest(m));
    CHECK(parse_manifest(again, "/data").entries == m.entries);
    check_closed_set(m);
}

TEST_CASE("manifest errors") {
    const std::string head = std::string(kManifestHeader) + "\n";
    auto parse = [](const std::string& t) {
        std::istringstream in(t);
        return parse_manifest(in, ".");
    };
    CHECK(code_of([&] { parse(""); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse("label,role\n"); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse(head + "A,gallery,,cam1,front,a.ppm\n"); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse(head + ",gallery,,cam1,front,a.ppm,,,,\n"); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse(head + "A,visitor,,cam1,front,a.ppm,,,,\n"); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse(head + "A,gallery,,cam1,sideways,a.ppm,,,,\n"); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse(head + "A,gallery,,cam1,front,a.ppm,,tall,,\n"); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse(head + "A,gallery,,cam1,front,../a.ppm,,,,\n"); }) == ErrorCode::malformed_row);
    CHECK(code_of([&] { parse(head + "A,gallery,,cam1,front,/etc/a.ppm,,,,\n"); }) == ErrorCode::malformed_row);

    const DatasetManifest open = parse(head + "A,gallery,,cam1,front,a.ppm,,,,\nB,probe,,cam1,front,b.ppm,,,,\n");
    CHECK(code_of([&] { check_closed_set(open); }) == ErrorCode::closed_set_violation);
    CHECK(code_of([&] { ingest(open); }) == ErrorCode::closed_set_violation);

    testing::TempDir dir("manifest");
    CHECK(code_of([&] { read_manifest(dir.path() / "none.csv"); }) == ErrorCode::missing_file);
    DatasetManifest missing = parse(head + "A,gallery,,cam1,front,a.ppm,,,,\n");
    missing.root = dir.path();
    CHECK(code_of([&] { ingest(missing); }) == ErrorCode::missing_file);
}

TEST_CASE("ingest a small dataset from disk") {
    testing::TempDir dir("ingest");
    SyntheticConfig c;
    c.subjects = 2;
    c.gallery_samples = 2;
    c.metric_samples = 1;
    c.probes_per_subject = 1;
    const SyntheticDataset data = generate_synthetic(c);
    const auto manifest = write_dataset(data, dir.path());
    CHECK(manifest == dir.path() / "manifest.csv");
    const IngestedDataset d = ingest(manifest);
    REQUIRE(d.gallery.size() == 2);
    CHECK(d.gallery[0].samples.size() == 2);
    CHECK(d.gallery[1].samples.size() == 2);
    REQUIRE(d.probes.size() == 2);
    CHECK(d.probes[0].truth == d.gallery[0].label);
    CHECK(d.probes[0].id == d.gallery[0].label + "-p0");

    // Reading back from disk equals extraction straight from memory.
    const IngestedDataset mem = ingest(data);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(mem.gallery[i].samples == d.gallery[i].samples);
        CHECK(mem.probes[i].bundle == d.probes[i].bundle);
    }
    CHECK(d.gallery[0].samples[0].build.has_value());
    CHECK_FALSE(d.gallery[0].samples[1].build.has_value());
}

TEST_CASE("bundle count follows manifest rows") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 8; ++trial) {
        SyntheticConfig c;
        c.subjects = 2 + rng() % 4;
        c.gallery_samples = 1 + rng() % 4;
        c.metric_samples = rng() % (c.gallery_samples + 1);
        c.probes_per_subject = rng() % 3;
        c.cameras = 1 + rng() % 2;
        c.image_rows = 24 + rng() % 40;
        c.image_cols = 12 + rng() % 30;
        c.seed = rng();
        const SyntheticDataset data = generate_synthetic(c);
        const IngestedDataset d = ingest(data);
        std::size_t bundles = d.probes.size();
        for (const auto& g : d.gallery) bundles += g.samples.size();
        CHECK(bundles * c.cameras == data.manifest.entries.size());
        CHECK(d.gallery.size() == c.subjects);
        CHECK(d.probes.size() == c.subjects * c.probes_per_subject);
    }
}

TEST_CASE("two-camera captures fuse") {
    SyntheticConfig c = small_config(3);
    c.cameras = 2;
    const SyntheticDataset data = generate_synthetic(c);
    CHECK(data.manifest.entries.size() == 2 * (3 * 4 + 3));
    const IngestedDataset d = ingest(data);
    const FeatureBundle& b = d.gallery[0].samples[0];
    CHECK(b.clothing.size() == 2);
    CHECK(b.complexion.size() == 2);
    CHECK(feature_vector(b, FeatureId::clothing)->size() == 2 * kClothingDims);
    CHECK(feature_vector(b, FeatureId::complexion)->size() == 4);
    // Each capture sees the front once, so complexion survives the fusion.
    for (const Probe& p : d.probes) CHECK(feature_vector(p.bundle, FeatureId::complexion).has_value());
}

TEST_CASE("synthetic generation") {
    SUBCASE("validation") {
        SyntheticConfig c = small_config();
        c.subjects = 1;
        CHECK(code_of([&] { generate_synthetic(c); }) == ErrorCode::invalid_argument);
        c = small_config();
        c.clothing_change_probability = 1.5;
        CHECK(code_of([&] { validate(c); }) == ErrorCode::invalid_argument);
        c = small_config();
        c.metric_samples = 9;
        CHECK(code_of([&] { validate(c); }) == ErrorCode::invalid_argument);
        c = small_config();
        c.cameras = 3;
        CHECK(code_of([&] { validate(c); }) == ErrorCode::invalid_argument);
    }

    SUBCASE("same seed gives byte-identical datasets") {
        testing::TempDir a("gen_a");
        testing::TempDir b("gen_b");
        SyntheticConfig c = small_config();
        c.noise = {6, 0.02, 1.0, 2.0};
        c.clothing_change_probability = 0.5;
        c.back_view_probability = 0.5;
        write_dataset(generate_synthetic(c), a.path());
        write_dataset(generate_synthetic(c), b.path());
        std::size_t files = 0;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
            if (!entry.is_regular_file()) continue;
            const auto rel = std::filesystem::relative(entry.path(), a.path());
            REQUIRE(read_file(entry.path()) == read_file(b.path() / rel));
            ++files;
        }
        CHECK(files == 1 + (4 * 4 + 4) + (4 * 2 + 4));
        c.seed = 12;
        CHECK(format_manifest(generate_synthetic(c).manifest) == format_manifest(generate_synthetic(c).manifest));
        testing::TempDir d("gen_d");
        write_dataset(generate_synthetic(c), d.path());
        CHECK(read_file(a.path() / "images" / "S001-p0_cam1.ppm") != read_file(d.path() / "images" / "S001-p0_cam1.ppm"));
    }

    SUBCASE("no change and no noise keeps clothing pixels identical") {
        const SyntheticConfig c = small_config();
        const SyntheticDataset data = generate_synthetic(c);
        const auto bands = band_rows(c.image_rows);
        std::size_t probes = 0;
        for (std::size_t i = 0; i < data.manifest.entries.size(); ++i) {
            const ManifestEntry& e = data.manifest.entries[i];
            if (e.role != Role::probe) continue;
            ++probes;
            for (std::size_t j = 0; j < data.manifest.entries.size(); ++j) {
                const ManifestEntry& g = data.manifest.entries[j];
                if (g.role != Role::gallery || g.label != e.label) continue;
                const Image& pi = data.samples[i].image;
                const Image& gi = data.samples[j].image;
                for (std::size_t r = bands.torso_begin; r < c.image_rows; ++r) {
                    for (std::size_t col = 0; col < c.image_cols; ++col) REQUIRE(pi.at(r, col) == gi.at(r, col));
                }
            }
        }
        CHECK(probes == 4);
    }

    SUBCASE("back views never yield complexion") {
        SyntheticConfig c = small_config(6);
        c.back_view_probability = 1.0;
        c.noise = {16, 0.0, 0.0, 5.0};
        const IngestedDataset d = ingest(generate_synthetic(c));
        for (const Probe& p : d.probes) {
            REQUIRE(p.bundle.complexion.size() == 1);
            CHECK_FALSE(p.bundle.complexion[0].valid);
            CHECK_FALSE(has_feature(p.bundle, FeatureId::complexion));
        }
        for (const auto& g : d.gallery) {
            for (const auto& b : g.samples) CHECK(b.complexion[0].valid);
        }
    }

    SUBCASE("metric samples carry masks and bbox") {
        const SyntheticDataset data = generate_synthetic(small_config());
        for (std::size_t i = 0; i < data.manifest.entries.size(); ++i) {
            const auto& e = data.manifest.entries[i];
            const bool metric = e.role == Role::probe || e.capture.back() < '2';
            CHECK(e.mask.has_value() == metric);
            CHECK(data.samples[i].bbox_height.has_value() == metric);
            CHECK(data.samples[i].mask.has_value() == metric);
        }
    }
}

TEST_CASE("evaluate") {
    SUBCASE("probes equal to gallery samples rank first") {
        const IngestedDataset d = ingest(generate_synthetic(small_config(6)));
        std::vector<Probe> probes;
        for (const auto& g : d.gallery) probes.push_back({g.label + "-copy", g.label, g.samples[0]});
        const EvaluationResult r = evaluate(d.gallery, probes);
        CHECK(r.curve.at(1) == 1.0);
        CHECK(r.curve.size() == 6);
        CHECK(r.table == std::vector<std::pair<std::size_t, double>>{{1, 1.0}, {5, 1.0}, {10, 1.0}});
    }

    SUBCASE("CMC is monotone and ends at one") {
        SyntheticConfig c = small_config(8);
        c.clothing_change_probability = 0.7;
        c.back_view_probability = 0.5;
        c.noise = {10, 0.05, 3.0, 6.0};
        c.probes_per_subject = 3;
        const IngestedDataset d = ingest(generate_synthetic(c));
        const EvaluationResult r = evaluate(d.gallery, d.probes);
        REQUIRE(r.curve.size() == 8);
        for (std::size_t k = 1; k < 8; ++k) CHECK(r.curve.accuracy[k - 1] <= r.curve.accuracy[k]);
        CHECK(r.curve.at(8) == 1.0);
        CHECK(r.curve.at(100) == 1.0);
        CHECK(r.true_ranks.size() == d.probes.size());
        CHECK(evaluate(d.gallery, d.probes).curve.accuracy == r.curve.accuracy);
    }

    SUBCASE("an adversarial probe counts only from its rank on") {
        const std::size_t n = 7;
        for (std::size_t target = 1; target <= n; ++target) {
            std::vector<GalleryClass> gallery;
            gallery.push_back({"T", {height_only(static_cast<double>(target) - 0.5),
                                     height_only(static_cast<double>(target) - 0.5)}});
            for (std::size_t i = 1; i < n; ++i) {
                const double h = static_cast<double>(i);
                gallery.push_back({"O" + std::to_string(i), {height_only(h), height_only(h)}});
            }
            const std::vector<Probe> probes{{"p", "T", height_only(0.0)}};
            EvaluationOptions o;
            o.ranks = {1, 2, 3, 4, 5, 6, 7};
            const EvaluationResult r = evaluate(gallery, probes, o);
            REQUIRE(r.true_ranks == std::vector<std::size_t>{target});
            for (std::size_t k = 1; k <= n; ++k) CHECK(r.curve.at(k) == (k >= target ? 1.0 : 0.0));
        }
    }

    SUBCASE("errors") {
        const IngestedDataset d = ingest(generate_synthetic(small_config(3)));
        CHECK(code_of([&] { evaluate(d.gallery, std::vector<Probe>{}); }) == ErrorCode::precondition);
        const std::vector<Probe> stray{{"x", "nobody", d.probes[0].bundle}};
        CHECK(code_of([&] { evaluate(d.gallery, stray); }) == ErrorCode::closed_set_violation);
        CHECK(code_of([&] { evaluate(std::span(d.gallery).first(1), std::span(d.probes).first(1)); }) ==
              ErrorCode::cannot_fit);
        CHECK(code_of([] { CMCCurve{}.at(1); }) == ErrorCode::rank_out_of_range);
    }
}

TEST_CASE("rank table") {
    const std::vector<std::size_t> ranks{1, 5, 10};
    const std::vector<TableRow> rows{{"Proposed model", {0.231, 0.489, 0.867}}, {"All ones", {1.0, 1.0, 1.0}}};
    const std::string text = emit_report(rows, ranks, "Gallery size = 25");
    CHECK(text ==
          "Gallery size = 25\n"
          "Rank                  1      5      10\n"
          "Proposed model        0.231  0.489  0.867\n"
          "All ones              1.000  1.000  1.000\n");

    const ParsedTable t = parse_table(text);
    CHECK(t.ranks == ranks);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].name == "Proposed model");
    CHECK(t.rows[0].values == std::vector<double>{0.231, 0.489, 0.867});
    CHECK(t.rows[1].values == std::vector<double>{1.0, 1.0, 1.0});

    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> milli(0, 1000);
    for (int trial = 0; trial < 50; ++trial) {
        TableRow row{"method " + std::to_string(trial), {}};
        for (int k = 0; k < 3; ++k) row.values.push_back(milli(rng) / 1000.0);
        const auto parsed = parse_table(emit_report(std::vector<TableRow>{row}, ranks));
        REQUIRE(parsed.rows.size() == 1);
        CHECK(parsed.rows[0].name == row.name);
        CHECK(parsed.rows[0].values == row.values);
    }

    CHECK(code_of([&] { emit_report(std::vector<TableRow>{{"short", {1.0}}}, ranks); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { parse_table("no header here\n"); }) == ErrorCode::malformed_row);
}

TEST_CASE("cmc csv") {
    CMCCurve c{{0.5, 0.75, 1.0}};
    CHECK(cmc_csv(c) == "k,accuracy\n1,0.500000\n2,0.750000\n3,1.000000\n");
}

TEST_CASE("probe-only ingestion skips gallery rows and the closed-set check") {
    testing::TempDir dir("probes_only");
    SyntheticConfig c = small_config(3);
    c.noise.pixel = 5;
    const SyntheticDataset data = generate_synthetic(c);
    write_dataset(data, dir.path());
    DatasetManifest m = read_manifest(dir / "manifest.csv");
    const auto full = ingest(m);
    std::erase_if(m.entries, [](const ManifestEntry& e) { return e.role == Role::gallery && e.label != "S001"; });
    m.entries.front().image = "images/deleted.ppm";
    const std::vector<Probe> probes = ingest_probes(m);
    REQUIRE(probes.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(probes[i].id == full.probes[i].id);
        CHECK(probes[i].bundle == full.probes[i].bundle);
    }
}
