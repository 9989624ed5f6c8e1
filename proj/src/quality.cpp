#include "quality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "imaging.hpp"
#include "ssim.hpp"

namespace idsynth {

namespace {

// Regularized upper incomplete gamma Q(a, x); series for small x, continued
// fraction otherwise.
double igamc(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("igamc: bad arguments");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 500; ++n) {
            term *= x / (a + n);
            sum += term;
            if (term < sum * 1e-16) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - lg);
        return 1.0 - p;
    }
    // modified Lentz
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - lg);
}

SsimStats stats_of(const std::vector<double>& values) {
    SsimStats s;
    s.count = int(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / values.size();
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / values.size());
    return s;
}

}  // namespace

double column_entropy(const std::vector<std::string>& values) {
    if (values.empty()) throw std::invalid_argument("column_entropy: empty column");
    std::map<std::string, size_t> counts;
    for (const std::string& v : values) ++counts[v];
    const double n = double(values.size());
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        const double p = c / n;
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;  // -0.0 guard for single-value columns
}

double chi_square_pvalue(const std::vector<double>& observed,
                         const std::vector<double>& expected) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi_square: bin count mismatch");
    if (observed.size() < 2) throw std::invalid_argument("chi_square: need at least two bins");
    double x = 0.0;
    for (size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw std::invalid_argument("chi_square: nonpositive expectation");
        const double d = observed[i] - expected[i];
        x += d * d / expected[i];
    }
    return igamc(0.5 * double(observed.size() - 1), 0.5 * x);
}

QualityReport audit_dataset(const std::vector<ManifestEntry>& entries, int validity_years) {
    QualityReport rep;
    std::vector<const ManifestEntry*> genuine;
    for (const ManifestEntry& e : entries)
        if (!e.fraud) genuine.push_back(&e);
    if (genuine.empty()) return rep;

    std::map<std::string, std::vector<std::string>> columns;
    for (const ManifestEntry* e : genuine) {
        const IdentityRecord& id = e->identity;
        columns["sex"].push_back(std::string(1, id.sex));
        columns["surname"].push_back(id.surname);
        columns["given_name"].push_back(id.given_name);
        columns["birth_year"].push_back(strprintf("%04d", id.dob.year));
        columns["issue_year"].push_back(strprintf("%04d", id.issue_date.year));
        columns["expiry_year"].push_back(strprintf("%04d", id.expiry_date.year));
    }
    for (const auto& [name, vals] : columns) rep.column_entropies[name] = column_entropy(vals);

    const auto flag_duplicates = [&](const char* field, auto getter) {
        std::map<std::string, int> seen;
        for (const ManifestEntry* e : genuine) ++seen[getter(e->identity)];
        for (const auto& [v, c] : seen)
            if (c > 1) rep.uniqueness_violations.push_back(std::string(field) + ":" + v);
    };
    flag_duplicates("license_number", [](const IdentityRecord& id) { return id.license_number; });
    flag_duplicates("document_discriminator",
                    [](const IdentityRecord& id) { return id.document_discriminator; });

    for (const ManifestEntry* e : genuine) {
        const IdentityRecord& id = e->identity;
        if (id.dob.serial() >= id.issue_date.serial())
            rep.dependency_violations.emplace_back(e->doc_id, "dob_before_issue");
        if (id.issue_date.serial() > id.expiry_date.serial())
            rep.dependency_violations.emplace_back(e->doc_id, "issue_before_expiry");
        const Date want = id.issue_date.add_years(validity_years);
        if (want.serial() != id.expiry_date.serial())
            rep.dependency_violations.emplace_back(e->doc_id, "expiry_matches_validity");
    }
    return rep;
}

int infer_validity_years(const std::vector<ManifestEntry>& entries) {
    std::map<int, int> counts;
    for (const ManifestEntry& e : entries) {
        if (e.fraud) continue;
        ++counts[e.identity.expiry_date.year - e.identity.issue_date.year];
    }
    if (counts.empty()) throw std::invalid_argument("no genuine entries to infer validity from");
    int best = counts.begin()->first;
    for (const auto& [years, c] : counts)
        if (c > counts[best]) best = years;
    return best;
}

SsimStats ssim_pairs(const std::vector<std::pair<cv::Mat, cv::Mat>>& pairs,
                     std::vector<int>* skipped) {
    std::vector<double> values;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first.size() != pairs[i].second.size()) {
            if (skipped) skipped->push_back(int(i));
            continue;
        }
        values.push_back(ssim(pairs[i].first, pairs[i].second));
    }
    return stats_of(values);
}

std::map<std::string, SsimStats> stealthiness_by_type(const std::vector<ManifestEntry>& entries,
                                                      const std::string& root,
                                                      std::vector<std::string>* skipped) {
    std::map<std::string, const ManifestEntry*> by_id;
    for (const ManifestEntry& e : entries) by_id[e.doc_id] = &e;

    std::map<std::string, std::vector<double>> groups;
    for (const ManifestEntry& e : entries) {
        if (!e.fraud) continue;
        std::string ref_id = e.base_id;
        if (e.fraud->fraud_type == "mixed" &&
            by_id.count(e.base_id + ".text_replacement"))
            ref_id = e.base_id + ".text_replacement";
        const auto it = by_id.find(ref_id);
        if (it == by_id.end()) {
            if (skipped) skipped->push_back(e.doc_id + ": reference " + ref_id + " missing");
            continue;
        }
        cv::Mat a, b;
        try {
            a = load_png(root + "/" + e.image_path, 3);
            b = load_png(root + "/" + it->second->image_path, 3);
        } catch (const std::exception& ex) {
            if (skipped) skipped->push_back(e.doc_id + ": " + ex.what());
            continue;
        }
        if (a.size() != b.size()) {
            if (skipped) skipped->push_back(e.doc_id + ": dimension mismatch");
            continue;
        }
        groups[e.fraud->fraud_type].push_back(ssim(a, b));
    }
    std::map<std::string, SsimStats> out;
    for (const auto& [type, vals] : groups) out[type] = stats_of(vals);
    return out;
}

nlohmann::json quality_report_to_json(const QualityReport& r) {
    nlohmann::json j;
    j["column_entropies"] = r.column_entropies;
    j["uniqueness_violations"] = r.uniqueness_violations;
    nlohmann::json deps = nlohmann::json::array();
    for (const auto& [doc, rule] : r.dependency_violations)
        deps.push_back({{"doc_id", doc}, {"rule", rule}});
    j["dependency_violations"] = std::move(deps);
    if (r.fidelity.count > 0)
        j["fidelity"] = {{"mean", r.fidelity.mean},
                         {"stddev", r.fidelity.stddev},
                         {"count", r.fidelity.count}};
    if (!r.stealthiness.empty()) {
        nlohmann::json st;
        for (const auto& [type, s] : r.stealthiness)
            st[type] = {{"mean", s.mean}, {"stddev", s.stddev}, {"count", s.count}};
        j["stealthiness"] = std::move(st);
    }
    return j;
}

}  // namespace idsynth
