#include "enex/matching.hpp"

#include "enex/error.hpp"
#include "enex/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace enex {

std::optional<std::size_t> MatchReport::rank_of(const std::string& label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return final_rank[static_cast<std::size_t>(it - labels.begin())];
}

PerFeatureRanking rank_feature(std::span<const double> probe, std::span<const ClassSamples> classes,
                               FeatureId feature) {
    if (classes.empty()) {
        throw Error(ErrorCode::empty_gallery, "no gallery classes to rank");
    }
    const std::size_t n = classes.size();
    PerFeatureRanking ranking;
    ranking.feature = feature;
    ranking.distance.assign(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : classes[i].samples) {
            if (s.size() != probe.size()) {
                throw Error(ErrorCode::dimension_mismatch,
                            "probe has " + std::to_string(probe.size()) + " entries, class '" +
                                classes[i].label + "' sample has " + std::to_string(s.size()));
            }
            double sq = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
                const double diff = probe[k] - s[k];
                sq += diff * diff;
            }
            best = std::min(best, sq);
        }
        ranking.distance[i] = std::sqrt(best);
    }
    ranking.order.resize(n);
    std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
    std::stable_sort(ranking.order.begin(), ranking.order.end(),
                     [&](std::size_t a, std::size_t b) { return ranking.distance[a] < ranking.distance[b]; });
    ranking.rank.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) ranking.rank[ranking.order[pos]] = pos + 1;
    return ranking;
}

double confidence(std::size_t rank, std::size_t n) {
    if (n == 0 || rank < 1 || rank > n) {
        throw Error(ErrorCode::rank_out_of_range,
                    "rank " + std::to_string(rank) + " outside [1, " + std::to_string(n) + "]");
    }
    return static_cast<double>(n - rank + 1) / static_cast<double>(n);
}

double collective_confidence(std::span<const double> per_feature) {
    if (per_feature.empty()) {
        throw Error(ErrorCode::no_usable_feature, "no feature confidences to fuse");
    }
    double sum = 0.0;
    for (double c : per_feature) sum += c;
    return sum / static_cast<double>(per_feature.size());
}

MatchReport match_probe(const FeatureBundle& bundle, const Gallery& gallery, const MatchOptions& options) {
    if (gallery.empty()) {
        throw Error(ErrorCode::empty_gallery, "gallery has no enrolled subjects");
    }
    if (!gallery.fitted()) {
        throw Error(ErrorCode::not_fitted, "gallery must be fitted before matching");
    }
    const std::size_t n = gallery.size();
    MatchReport report;
    report.probe_id = !options.probe_id.empty() ? options.probe_id : bundle.label.value_or("probe");
    report.labels = gallery.enrollment_order();

    const std::vector<FeatureId> wanted =
        options.features.empty() ? std::vector<FeatureId>(kAllFeatures.begin(), kAllFeatures.end())
                                 : options.features;
    for (FeatureId id : kAllFeatures) {
        if (std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
        const auto& slot = gallery.index(id);
        const auto probe = feature_vector(bundle, id);
        if (!slot || !probe) continue;
        const std::vector<double> projected = project(slot->transform, *probe);
        report.features_used.push_back(id);
        report.per_feature.push_back(rank_feature(projected, slot->projected, id));
    }
    if (report.features_used.empty()) {
        throw Error(ErrorCode::no_usable_feature, "probe and gallery share no available feature");
    }

    report.confidence.resize(report.features_used.size());
    for (std::size_t f = 0; f < report.features_used.size(); ++f) {
        report.confidence[f].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            report.confidence[f][i] = confidence(report.per_feature[f].rank[i], n);
        }
    }
    report.collective.resize(n);
    std::vector<std::size_t> best_rank(n, n);
    std::vector<double> column(report.features_used.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < column.size(); ++f) {
            column[f] = report.confidence[f][i];
            best_rank[i] = std::min(best_rank[i], report.per_feature[f].rank[i]);
        }
        report.collective[i] = collective_confidence(column);
    }

    report.final_order.resize(n);
    std::iota(report.final_order.begin(), report.final_order.end(), std::size_t{0});
    std::stable_sort(report.final_order.begin(), report.final_order.end(), [&](std::size_t a, std::size_t b) {
        if (report.collective[a] != report.collective[b]) return report.collective[a] > report.collective[b];
        return best_rank[a] < best_rank[b];
    });
    report.final_rank.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) report.final_rank[report.final_order[pos]] = pos + 1;
    return report;
}

// ---------------------------------------------------------------------------
// Text records
// ---------------------------------------------------------------------------

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(text);
    while (std::getline(in, current, sep)) parts.push_back(current);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

[[noreturn]] void bad_record(const std::string& line) {
    throw Error(ErrorCode::malformed_row, "cannot parse report line: " + line);
}

std::size_t to_size(const std::string& s, const std::string& line) {
    std::size_t used = 0;
    try {
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) bad_record(line);
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        bad_record(line);
    }
}

double to_double(const std::string& s, const std::string& line) {
    std::size_t used = 0;
    try {
        const double v = std::stod(s, &used);
        if (used != s.size()) bad_record(line);
        return v;
    } catch (const std::logic_error&) {
        bad_record(line);
    }
}

}  // namespace

void write_report(std::ostream& out, const MatchReport& report) {
    out << "probe\t" << report.probe_id << "\tn\t" << report.size() << "\tfeatures_used\t"
        << report.features_used.size() << "\tfeatures\t";
    for (std::size_t f = 0; f < report.features_used.size(); ++f) {
        out << (f ? "," : "") << to_string(report.features_used[f]);
    }
    out << '\n';
    for (std::size_t i : report.final_order) {
        out << report.labels[i] << '\t';
        for (std::size_t f = 0; f < report.per_feature.size(); ++f) {
            out << (f ? "," : "") << report.per_feature[f].rank[i];
        }
        out << '\t';
        for (std::size_t f = 0; f < report.confidence.size(); ++f) {
            out << (f ? "," : "") << fixed6(report.confidence[f][i]);
        }
        out << '\t' << fixed6(report.collective[i]) << '\t' << report.final_rank[i] << '\n';
    }
}

std::string format_report(const MatchReport& report) {
    std::ostringstream out;
    write_report(out, report);
    return out.str();
}

std::vector<ParsedReport> parse_reports(std::istream& in) {
    std::vector<ParsedReport> reports;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, '\t');
        if (fields.size() == 8 && fields[0] == "probe") {
            if (fields[2] != "n" || fields[4] != "features_used" || fields[6] != "features") bad_record(line);
            ParsedReport r;
            r.probe_id = fields[1];
            r.n = to_size(fields[3], line);
            for (const auto& name : split(fields[7], ',')) r.features.push_back(parse_feature(name));
            if (r.features.size() != to_size(fields[5], line)) bad_record(line);
            reports.push_back(std::move(r));
            continue;
        }
        if (reports.empty() || fields.size() != 5) bad_record(line);
        ParsedReport& current = reports.back();
        ParsedReportRow row;
        row.label = fields[0];
        for (const auto& s : split(fields[1], ',')) row.ranks.push_back(to_size(s, line));
        for (const auto& s : split(fields[2], ',')) row.confidences.push_back(to_double(s, line));
        row.collective = to_double(fields[3], line);
        row.final_rank = to_size(fields[4], line);
        if (row.ranks.size() != current.features.size() || row.confidences.size() != current.features.size() ||
            current.rows.size() >= current.n) {
            bad_record(line);
        }
        current.rows.push_back(std::move(row));
    }
    for (const auto& r : reports) {
        if (r.rows.size() != r.n) {
            throw Error(ErrorCode::malformed_row, "report for '" + r.probe_id + "' has " +
                                                      std::to_string(r.rows.size()) + " rows, expected " +
                                                      std::to_string(r.n));
        }
    }
    return reports;
}

}  // namespace enex
