#include "enex/gallery.hpp"

#include "enex/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace enex {

bool Gallery::contains(const std::string& label) const { return index_of(label).has_value(); }

std::optional<std::size_t> Gallery::index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

void Gallery::enroll(const std::string& label, std::vector<FeatureBundle> samples) {
    if (label.empty()) {
        throw Error(ErrorCode::invalid_argument, "label must not be empty");
    }
    if (samples.empty()) {
        throw Error(ErrorCode::precondition, "enrolling '" + label + "' needs at least one sample");
    }
    if (contains(label)) {
        throw Error(ErrorCode::duplicate_label, "'" + label + "' is already enrolled");
    }
    labels_.push_back(label);
    samples_.push_back(std::move(samples));
    invalidate();
}

void Gallery::retire(const std::string& label) {
    const auto idx = index_of(label);
    if (!idx) {
        throw Error(ErrorCode::unknown_label, "'" + label + "' is not enrolled");
    }
    labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(*idx));
    samples_.erase(samples_.begin() + static_cast<std::ptrdiff_t>(*idx));
    invalidate();
}

void Gallery::invalidate() {
    fitted_ = false;
    for (auto& slot : index_) slot.reset();
}

std::vector<ClassSamples> Gallery::class_samples(FeatureId id) const {
    std::vector<ClassSamples> classes(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        classes[i].label = labels_[i];
        for (const FeatureBundle& b : samples_[i]) {
            if (auto v = feature_vector(b, id)) classes[i].samples.push_back(std::move(*v));
        }
    }
    return classes;
}

void Gallery::fit(std::optional<double> ridge) {
    if (labels_.size() < 2) {
        throw Error(ErrorCode::cannot_fit, "fitting needs at least two enrolled classes, have " +
                                               std::to_string(labels_.size()));
    }
    invalidate();
    for (FeatureId id : kAllFeatures) {
        std::vector<ClassSamples> classes = class_samples(id);
        std::erase_if(classes, [](const ClassSamples& c) { return c.samples.empty(); });
        if (classes.size() < 2) continue;
        index_[enex::index_of(id)] = FeatureIndex{fit_transform(classes, ridge, id), {}};
    }
    rebuild_projections();
    fitted_ = true;
}

void Gallery::rebuild_projections() {
    for (FeatureId id : kAllFeatures) {
        auto& slot = index_[enex::index_of(id)];
        if (!slot) continue;
        std::vector<ClassSamples> raw = class_samples(id);
        slot->projected.clear();
        slot->projected.reserve(raw.size());
        for (ClassSamples& c : raw) {
            ClassSamples out{std::move(c.label), {}};
            out.samples.reserve(c.samples.size());
            for (const auto& v : c.samples) out.samples.push_back(project(slot->transform, v));
            slot->projected.push_back(std::move(out));
        }
    }
}

// ---------------------------------------------------------------------------
// Snapshot codec
// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot codec assumes a little-endian host");

class Writer {
public:
    template <typename T>
    void pod(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void u8(std::uint8_t v) { pod(v); }
    void u32(std::uint32_t v) { pod(v); }
    void u64(std::uint64_t v) { pod(v); }
    void f64(double v) { pod(v); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void f64s(std::span<const double> values) {
        u32(static_cast<std::uint32_t>(values.size()));
        for (double v : values) f64(v);
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T pod() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    std::uint8_t u8() { return pod<std::uint8_t>(); }
    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    double f64() { return pod<double>(); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::vector<double> f64s() {
        const std::uint32_t n = u32();
        need(std::size_t{n} * sizeof(double));
        std::vector<double> values(n);
        for (double& v : values) v = f64();
        return values;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw Error(ErrorCode::truncated, "snapshot ends inside a record");
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

enum BundleFlags : std::uint8_t { kHasHeight = 1, kHasBuild = 2, kHasLabel = 4 };

void write_bundle(Writer& w, const FeatureBundle& b) {
    w.u8(static_cast<std::uint8_t>((b.height ? kHasHeight : 0) | (b.build ? kHasBuild : 0) |
                                   (b.label ? kHasLabel : 0)));
    w.u32(static_cast<std::uint32_t>(b.clothing.size()));
    for (const auto& h : b.clothing) {
        for (double v : h.values) w.f64(v);
    }
    if (b.height) w.f64(b.height->value);
    if (b.build) w.f64(b.build->value);
    w.u32(static_cast<std::uint32_t>(b.complexion.size()));
    for (const auto& c : b.complexion) {
        w.u8(c.valid ? 1 : 0);
        w.f64(c.mean_cb);
        w.f64(c.mean_cr);
    }
    if (b.label) w.str(*b.label);
}

FeatureBundle read_bundle(Reader& r) {
    FeatureBundle b;
    const std::uint8_t flags = r.u8();
    b.clothing.resize(r.u32());
    for (auto& h : b.clothing) {
        for (double& v : h.values) v = r.f64();
    }
    if (flags & kHasHeight) b.height = HeightFeature{r.f64()};
    if (flags & kHasBuild) b.build = BuildFeature{r.f64()};
    const std::uint32_t cameras = r.u32();
    for (std::uint32_t i = 0; i < cameras; ++i) {
        ComplexionFeature c;
        c.valid = r.u8() != 0;
        c.mean_cb = r.f64();
        c.mean_cr = r.f64();
        b.complexion.push_back(c);
    }
    if (flags & kHasLabel) b.label = r.str();
    return b;
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<std::uint8_t> encode_gallery(const Gallery& gallery) {
    Writer w;
    w.bytes().assign(kSnapshotMagic, kSnapshotMagic + 8);
    w.u8(gallery.fitted() ? 1 : 0);
    w.u64(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        w.str(gallery.enrollment_order()[i]);
        const auto& samples = gallery.samples(i);
        w.u64(samples.size());
        for (const auto& b : samples) write_bundle(w, b);
    }
    std::uint32_t transforms = 0;
    for (FeatureId id : kAllFeatures) transforms += gallery.index(id) ? 1 : 0;
    w.u32(transforms);
    for (FeatureId id : kAllFeatures) {
        const auto& slot = gallery.index(id);
        if (!slot) continue;
        const FeatureTransform& t = slot->transform;
        w.u8(static_cast<std::uint8_t>(t.feature));
        w.f64(t.ridge);
        w.u8(t.discriminative ? 1 : 0);
        w.f64s(t.eigenvalues);
        w.u32(static_cast<std::uint32_t>(t.matrix.rows()));
        w.u32(static_cast<std::uint32_t>(t.matrix.cols()));
        for (Eigen::Index k = 0; k < t.matrix.size(); ++k) w.f64(t.matrix.data()[k]);
    }
    w.u32(crc_of(w.bytes()));
    return std::move(w.bytes());
}

Gallery decode_gallery(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSnapshotMagic, 7) != 0) {
        throw Error(ErrorCode::bad_magic, "not a gallery snapshot");
    }
    if (bytes[7] != static_cast<std::uint8_t>(kSnapshotMagic[7])) {
        throw Error(ErrorCode::version_mismatch,
                    std::string("snapshot version '") + static_cast<char>(bytes[7]) + "', expected '" +
                        kSnapshotMagic[7] + "'");
    }
    if (bytes.size() < 12) {
        throw Error(ErrorCode::truncated, "snapshot has no checksum");
    }
    const auto body = bytes.first(bytes.size() - 4);
    std::uint32_t stored = 0;
    std::memcpy(&stored, bytes.data() + body.size(), 4);
    if (crc_of(body) != stored) {
        throw Error(ErrorCode::checksum, "snapshot CRC-32 mismatch");
    }

    Reader r(body.subspan(8));
    Gallery g;
    const bool fitted = r.u8() != 0;
    const std::uint64_t classes = r.u64();
    for (std::uint64_t i = 0; i < classes; ++i) {
        std::string label = r.str();
        const std::uint64_t count = r.u64();
        std::vector<FeatureBundle> samples;
        for (std::uint64_t j = 0; j < count; ++j) samples.push_back(read_bundle(r));
        g.labels_.push_back(std::move(label));
        g.samples_.push_back(std::move(samples));
    }
    const std::uint32_t transforms = r.u32();
    for (std::uint32_t k = 0; k < transforms; ++k) {
        FeatureTransform t;
        const std::uint8_t feature = r.u8();
        if (feature >= kFeatureCount) {
            throw Error(ErrorCode::malformed_payload, "unknown feature id in snapshot");
        }
        t.feature = static_cast<FeatureId>(feature);
        t.ridge = r.f64();
        t.discriminative = r.u8() != 0;
        t.eigenvalues = r.f64s();
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        t.matrix.resize(rows, cols);
        for (Eigen::Index e = 0; e < t.matrix.size(); ++e) t.matrix.data()[e] = r.f64();
        g.index_[enex::index_of(t.feature)] = FeatureIndex{std::move(t), {}};
    }
    if (!r.done()) {
        throw Error(ErrorCode::malformed_payload, "trailing bytes after snapshot records");
    }
    g.fitted_ = fitted;
    g.rebuild_projections();
    return g;
}

void save_gallery(const Gallery& gallery, const std::filesystem::path& path) {
    const auto bytes = encode_gallery(gallery);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::io, "write failed for " + path.string());
    }
}

Gallery load_gallery(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_gallery(bytes);
}

}  // namespace enex
