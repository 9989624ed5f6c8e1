#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "manifest.hpp"

namespace idsynth {

// Shannon entropy, base 2, of the empirical value distribution.
double column_entropy(const std::vector<std::string>& values);

// Upper-tail p-value of the chi-square statistic for observed vs expected
// counts (expected from a model, same total). dof = bins - 1.
double chi_square_pvalue(const std::vector<double>& observed,
                         const std::vector<double>& expected);

struct SsimStats {
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
};

struct QualityReport {
    std::map<std::string, double> column_entropies;
    std::vector<std::string> uniqueness_violations;  // "field:value", one per duplicate
    std::vector<std::pair<std::string, std::string>> dependency_violations;  // (doc, rule)
    SsimStats fidelity;
    std::map<std::string, SsimStats> stealthiness;
};

// Metadata-only audit over the genuine entries: per-column entropy, duplicate
// license numbers and discriminators, date-dependency rules against the
// pack's validity period.
QualityReport audit_dataset(const std::vector<ManifestEntry>& entries, int validity_years);

// Most common expiry-minus-issue gap; lets the audit run without the pack.
int infer_validity_years(const std::vector<ManifestEntry>& entries);

// Mean/stddev SSIM over aligned pairs; mismatched pairs are skipped and their
// indices reported.
SsimStats ssim_pairs(const std::vector<std::pair<cv::Mat, cv::Mat>>& pairs,
                     std::vector<int>* skipped = nullptr);

// SSIM of every fraud variant against its reference, grouped by fraud type.
// The reference is the genuine sibling, except mixed, which is compared to
// the sibling text_replacement variant when present so the score isolates
// the portrait-level change shared with substitution and morphing.
std::map<std::string, SsimStats> stealthiness_by_type(const std::vector<ManifestEntry>& entries,
                                                      const std::string& root,
                                                      std::vector<std::string>* skipped = nullptr);

nlohmann::json quality_report_to_json(const QualityReport& r);

}  // namespace idsynth
