#pragma once

#include "enex/discriminant.hpp"
#include "enex/features.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace enex {

class Gallery;

/// Ranking of every gallery class for one feature. Vectors indexed by class
/// follow enrollment order; `order` lists class indices best first.
struct PerFeatureRanking {
    FeatureId feature = FeatureId::clothing;
    std::vector<std::size_t> order;
    std::vector<double> distance;  // +inf for a class without samples of this feature
    std::vector<std::size_t> rank;  // 1-based, a permutation of 1..n
};

struct MatchReport {
    std::string probe_id;
    std::vector<std::string> labels;  // enrollment order
    std::vector<FeatureId> features_used;
    std::vector<PerFeatureRanking> per_feature;    // parallel to features_used
    std::vector<std::vector<double>> confidence;   // [feature][class]
    std::vector<double> collective;                // per class
    std::vector<std::size_t> final_order;          // class indices, best first
    std::vector<std::size_t> final_rank;           // per class, 1-based

    std::size_t size() const noexcept { return labels.size(); }
    /// 1-based final rank of `label`, or nullopt if it is not in the gallery.
    std::optional<std::size_t> rank_of(const std::string& label) const;

    friend bool operator==(const MatchReport&, const MatchReport&) = default;
};

inline bool operator==(const PerFeatureRanking& a, const PerFeatureRanking& b) {
    return a.feature == b.feature && a.order == b.order && a.distance == b.distance && a.rank == b.rank;
}

/// Nearest-sample Euclidean distance per class, ascending, ties to the earlier
/// class.
PerFeatureRanking rank_feature(std::span<const double> probe, std::span<const ClassSamples> classes,
                               FeatureId feature);

/// (n - rank + 1) / n.
double confidence(std::size_t rank, std::size_t n);

/// Equal-weight mean of per-feature confidences.
double collective_confidence(std::span<const double> per_feature);

struct MatchOptions {
    /// Restrict fusion to these features; empty means all four.
    std::vector<FeatureId> features;
    std::string probe_id;
};

MatchReport match_probe(const FeatureBundle& bundle, const Gallery& gallery, const MatchOptions& options = {});

// Record format (tab separated, one probe per block):
//   probe <id> n <n> features_used <f> features <name,name,...>
//   <label> <rank,rank,...> <cf,cf,...> <CF> <final rank>     (one line per class, best first)
// Lines starting with '#' are comments.
void write_report(std::ostream& out, const MatchReport& report);
std::string format_report(const MatchReport& report);

struct ParsedReportRow {
    std::string label;
    std::vector<std::size_t> ranks;
    std::vector<double> confidences;
    double collective = 0.0;
    std::size_t final_rank = 0;
};

struct ParsedReport {
    std::string probe_id;
    std::size_t n = 0;
    std::vector<FeatureId> features;
    std::vector<ParsedReportRow> rows;
};

std::vector<ParsedReport> parse_reports(std::istream& in);

}  // namespace enex
