#include "quality.hpp"
#include <fstream>

#include "imaging.hpp"

#include <doctest.h>
#include <opencv2/imgproc.hpp>

#include <filesystem>

#include "support/fixtures.hpp"

using namespace idsynth;

namespace {

IdentityRecord sample_identity(int i) {
    IdentityRecord id;
    id.given_name = "Given" + std::to_string(i);
    id.surname = "Surname" + std::to_string(i % 7);
    id.sex = i % 2 ? 'M' : 'F';
    id.eye_color = "BRO";
    id.height_ft = 5;
    id.height_in = i % 12;
    id.weight_lb = 120 + i % 60;
    id.dob = Date{1970 + i % 30, 1 + i % 12, 1 + i % 28};
    id.issue_date = Date{2021 + i % 4, 1 + (i * 5) % 12, 1 + (i * 3) % 28};
    id.expiry_date = id.issue_date.add_years(5);
    id.document_discriminator = strprintf("%016d", i);
    id.license_number = strprintf("%08d", 10000000 + i);
    id.license_class = 'D';
    id.address = "1 Main St";
    id.portrait_id = "p" + std::to_string(i);
    return id;
}

ManifestEntry genuine_entry(int i) {
    ManifestEntry e;
    e.doc_id = strprintf("doc_%05d", i);
    e.base_id = e.doc_id;
    e.variant = "genuine";
    e.image_path = "mini/" + e.doc_id + "/genuine.png";
    e.identity = sample_identity(i);
    e.seed = 1000 + i;
    e.pack_id = "mini";
    return e;
}

}  // namespace

TEST_CASE("column entropy matches the closed forms") {
    CHECK(column_entropy({"a", "a", "a", "a"}) == 0.0);
    CHECK(column_entropy({"a", "b", "c", "d"}) == doctest::Approx(2.0).epsilon(1e-12));
    std::vector<std::string> months;
    for (int rep = 0; rep < 3; ++rep)
        for (int m = 1; m <= 12; ++m) months.push_back(std::to_string(m));
    CHECK(column_entropy(months) == doctest::Approx(3.5849625007211562).epsilon(1e-9));
    CHECK_THROWS_AS(column_entropy({}), std::invalid_argument);

    SUBCASE("entropy is bounded by log2 of the support") {
        std::vector<std::string> skewed{"x", "x", "x", "y", "z", "x", "y", "x"};
        const double h = column_entropy(skewed);
        CHECK(h >= 0.0);
        CHECK(h <= std::log2(3.0) + 1e-12);
    }
}

TEST_CASE("chi-square p-values match the reference distribution") {
    CHECK(chi_square_pvalue({60, 40}, {50, 50}) ==
          doctest::Approx(0.045500263896358414).epsilon(1e-10));
    CHECK(chi_square_pvalue({30, 20, 25, 25}, {25, 25, 25, 25}) ==
          doctest::Approx(0.57240670447087983).epsilon(1e-10));
    CHECK(chi_square_pvalue({12, 8, 10, 12, 8}, {10, 10, 10, 10, 10}) ==
          doctest::Approx(0.80879213541099885).epsilon(1e-10));
    CHECK(chi_square_pvalue({25, 25}, {25, 25}) == doctest::Approx(1.0));

    SUBCASE("larger deviations mean smaller p") {
        const double p1 = chi_square_pvalue({55, 45}, {50, 50});
        const double p2 = chi_square_pvalue({65, 35}, {50, 50});
        CHECK(p2 < p1);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(chi_square_pvalue({1, 2}, {1}), std::invalid_argument);
        CHECK_THROWS_AS(chi_square_pvalue({5}, {5}), std::invalid_argument);
        CHECK_THROWS_AS(chi_square_pvalue({1, 2}, {0, 3}), std::invalid_argument);
    }
}

TEST_CASE("manifest entries survive a json round trip") {
    ManifestEntry e = genuine_entry(3);
    FraudRecord rec;
    rec.fraud_type = "crop_replace";
    rec.partner_doc_id = "doc_00007";
    rec.partner_field_id = "dob";
    rec.has_shift = true;
    rec.shift = {2, -3};
    ChangedField cf;
    cf.field_id = "dob";
    cf.original_text = "01/02/1990";
    cf.new_text = "03/04/1991";
    cf.original_params.font_id = "sans";
    cf.new_params.font_id = "bold";
    cf.new_params.size_pt = 13.5;
    cf.new_params.color_rgb = {10, 20, 30};
    rec.changed_fields.push_back(cf);
    rec.regions.push_back({100, 70, 120, 20});
    e.doc_id = e.base_id + ".crop_replace";
    e.variant = "crop_replace";
    e.fraud = rec;
    e.privacy = PrivacyDescriptor{"pixeldp", PixelDPConfig{1.0, 0.05, 2, 1.0, 0.1, true}};

    const ManifestEntry back = manifest_entry_from_json(manifest_entry_to_json(e));
    CHECK(back.doc_id == e.doc_id);
    CHECK(back.base_id == e.base_id);
    CHECK(back.variant == "crop_replace");
    CHECK(back.identity.license_number == e.identity.license_number);
    CHECK(back.identity.dob.iso() == e.identity.dob.iso());
    CHECK(back.seed == e.seed);
    REQUIRE(back.fraud.has_value());
    CHECK(back.fraud->fraud_type == "crop_replace");
    CHECK(back.fraud->has_shift);
    CHECK(back.fraud->shift == cv::Point(2, -3));
    REQUIRE(back.fraud->changed_fields.size() == 1);
    CHECK(back.fraud->changed_fields[0].new_params.font_id == "bold");
    CHECK(back.fraud->changed_fields[0].new_params.size_pt == 13.5);
    CHECK(back.fraud->regions.size() == 1);
    CHECK(back.fraud->regions[0] == cv::Rect(100, 70, 120, 20));
    REQUIRE(back.privacy.has_value());
    CHECK(back.privacy->mode == "pixeldp");
    CHECK(back.privacy->cfg.L == 0.1);

    SUBCASE("jsonl files keep order and tolerate bad lines") {
        const std::string dir = testutil::tmp_dir("quality_manifest");
        const std::string path = dir + "/manifest.jsonl";
        std::vector<ManifestEntry> entries{genuine_entry(0), genuine_entry(1), e};
        write_manifest(path, entries);
        {
            std::ofstream app(path, std::ios::app);
            app << "{not json\n";
            app << manifest_entry_to_json(genuine_entry(2)).dump() << "\n";
        }
        const ManifestReadResult r = read_manifest(path);
        REQUIRE(r.entries.size() == 4);
        CHECK(r.entries[0].doc_id == "doc_00000");
        CHECK(r.entries[2].variant == "crop_replace");
        CHECK(r.entries[3].doc_id == "doc_00002");
        REQUIRE(r.errors.size() == 1);
        CHECK(r.errors[0].find("line 4") != std::string::npos);
    }
}

TEST_CASE("audit passes a conforming batch and flags planted defects") {
    std::vector<ManifestEntry> entries;
    for (int i = 0; i < 40; ++i) entries.push_back(genuine_entry(i));
    const QualityReport clean = audit_dataset(entries, 5);
    CHECK(clean.uniqueness_violations.empty());
    CHECK(clean.dependency_violations.empty());
    CHECK(clean.column_entropies.at("sex") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(clean.column_entropies.at("surname") > 2.0);
    CHECK(clean.column_entropies.at("given_name") ==
          doctest::Approx(std::log2(40.0)).epsilon(1e-9));
    CHECK(infer_validity_years(entries) == 5);

    SUBCASE("a license number issued twice is one violation") {
        entries[7].identity.license_number = "668174749";
        entries[23].identity.license_number = "668174749";
        const QualityReport rep = audit_dataset(entries, 5);
        REQUIRE(rep.uniqueness_violations.size() == 1);
        CHECK(rep.uniqueness_violations[0] == "license_number:668174749");
    }
    SUBCASE("dob on the issue date breaks the ordering rule") {
        entries[4].identity.dob = entries[4].identity.issue_date;
        const QualityReport rep = audit_dataset(entries, 5);
        REQUIRE(rep.dependency_violations.size() == 1);
        CHECK(rep.dependency_violations[0].first == "doc_00004");
        CHECK(rep.dependency_violations[0].second == "dob_before_issue");
    }
    SUBCASE("a clipped validity period is flagged") {
        entries[9].identity.expiry_date = entries[9].identity.issue_date.add_years(4);
        const QualityReport rep = audit_dataset(entries, 5);
        REQUIRE(rep.dependency_violations.size() == 1);
        CHECK(rep.dependency_violations[0].second == "expiry_matches_validity");
    }
    SUBCASE("fraud variants do not double-count identities") {
        ManifestEntry variant = entries[0];
        variant.doc_id += ".text_replacement";
        variant.variant = "text_replacement";
        FraudRecord rec;
        rec.fraud_type = "text_replacement";
        variant.fraud = rec;
        entries.push_back(variant);
        const QualityReport rep = audit_dataset(entries, 5);
        CHECK(rep.uniqueness_violations.empty());  // duplicate identity sits behind fraud
    }
    SUBCASE("report serializes round") {
        entries[7].identity.license_number = entries[8].identity.license_number;
        const QualityReport rep = audit_dataset(entries, 4);
        const nlohmann::json j = quality_report_to_json(rep);
        CHECK(j["uniqueness_violations"].size() == 1);
        CHECK(j["dependency_violations"].size() == 40);  // every entry has a 5y period
        CHECK(j["column_entropies"]["sex"].get<double>() == doctest::Approx(1.0));
        CHECK_FALSE(j.contains("fidelity"));
    }
}

TEST_CASE("ssim pair statistics skip misaligned pairs") {
    cv::Mat base(64, 64, CV_8UC3);
    cv::randu(base, 0, 255);
    cv::Mat blurred;
    cv::GaussianBlur(base, blurred, {5, 5}, 1.2);
    cv::Mat odd(32, 32, CV_8UC3, cv::Scalar(0, 0, 0));

    std::vector<int> skipped;
    const SsimStats s = ssim_pairs({{base, base}, {base, odd}, {base, blurred}}, &skipped);
    CHECK(s.count == 2);
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0] == 1);
    CHECK(s.mean < 1.0);
    CHECK(s.mean > 0.0);
    CHECK(s.stddev > 0.0);

    SUBCASE("identical pair scores exactly one") {
        const SsimStats one = ssim_pairs({{base, base}});
        CHECK(one.mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(one.stddev == doctest::Approx(0.0));
    }
}

TEST_CASE("stealthiness pairs mixed with its sibling text variant") {
    const std::string root = testutil::tmp_dir("quality_stealth");
    std::filesystem::create_directories(root + "/mini/doc_00000");

    cv::Mat genuine(80, 120, CV_8UC3, cv::Scalar(240, 240, 240));
    cv::putText(genuine, "AB 1234", {8, 40}, cv::FONT_HERSHEY_SIMPLEX, 0.6, {20, 20, 20}, 1);
    cv::Mat text = genuine.clone();
    cv::rectangle(text, {0, 20, 120, 30}, cv::Scalar(0, 0, 0), cv::FILLED);  // loud rewrite
    cv::Mat morph = genuine.clone();
    morph(cv::Rect(5, 5, 10, 10)) += cv::Scalar(6, 6, 6);  // gentle portrait touch
    cv::Mat mixed = text.clone();  // same text stage as the sibling, untouched face

    save_png(root + "/mini/doc_00000/genuine.png", genuine);
    save_png(root + "/mini/doc_00000/text_replacement.png", text);
    save_png(root + "/mini/doc_00000/face_morph.png", morph);
    save_png(root + "/mini/doc_00000/mixed.png", mixed);

    const auto fraud_entry = [&](const std::string& type) {
        ManifestEntry e = genuine_entry(0);
        e.doc_id += "." + type;
        e.variant = type;
        e.image_path = "mini/doc_00000/" + type + ".png";
        FraudRecord rec;
        rec.fraud_type = type;
        e.fraud = rec;
        return e;
    };
    std::vector<ManifestEntry> entries{genuine_entry(0), fraud_entry("text_replacement"),
                                       fraud_entry("face_morph"), fraud_entry("mixed")};

    std::vector<std::string> skipped;
    const auto groups = stealthiness_by_type(entries, root, &skipped);
    CHECK(skipped.empty());
    REQUIRE(groups.count("text_replacement"));
    REQUIRE(groups.count("face_morph"));
    REQUIRE(groups.count("mixed"));
    // mixed equals its sibling bit for bit, so the pairing gives exactly 1.0;
    // against the genuine original it would score as low as text_replacement
    CHECK(groups.at("mixed").mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(groups.at("text_replacement").mean < 0.95);
    CHECK(groups.at("face_morph").mean > groups.at("text_replacement").mean);

    SUBCASE("a missing sibling falls back to the genuine reference") {
        std::vector<ManifestEntry> no_sibling{genuine_entry(0), fraud_entry("mixed")};
        const auto g2 = stealthiness_by_type(no_sibling, root, nullptr);
        REQUIRE(g2.count("mixed"));
        CHECK(g2.at("mixed").mean < 0.95);  // now measured against the genuine image
    }
    SUBCASE("missing files are reported, not fatal") {
        ManifestEntry ghost = fraud_entry("portrait_substitution");
        ghost.image_path = "mini/doc_00000/not_there.png";
        std::vector<std::string> errs;
        const auto g3 = stealthiness_by_type({genuine_entry(0), ghost}, root, &errs);
        CHECK(g3.empty());
        REQUIRE(errs.size() == 1);
        CHECK(errs[0].find("doc_00000.portrait_substitution") != std::string::npos);
    }
}
