#include "tune.hpp"

#include "imaging.hpp"
#include "render.hpp"
#include "support/fixtures.hpp"
#include "support/paths.hpp"

#include <doctest.h>

#include <fstream>

using namespace idsynth;

namespace {

struct TunePackFixture {
    std::string dir;
    TemplatePack pack;
    OverlayParams truth;

    explicit TunePackFixture(const std::string& name) {
        dir = testutil::tmp_dir(name);
        nlohmann::json patch;
        patch["reference_texts"] = {{"given_name", "MARIA"}, {"dob", "03/12/1994"}};
        testutil::make_min_pack(dir, patch);

        truth.font_id = "bold";
        truth.size_pt = 16;
        truth.color_rgb = {0, 0, 132};
        truth.stroke_width = 0;
        truth.dx = 0;
        truth.dy = 0;

        TemplatePack bare = load_template_pack(dir);
        std::map<std::string, OverlayParams> over{{"given_name", truth}, {"dob", truth}};
        save_png(dir + "/reference.png", render_text_layer(bare, over));
        pack = load_template_pack(dir);
        REQUIRE(pack.reference_rgb.has_value());
    }
};

}  // namespace

TEST_CASE("segment band spans the segment rows padded by eight") {
    auto dir = testutil::tmp_dir("tune_band_pack");
    testutil::make_min_pack(dir);
    TemplatePack pack = load_template_pack(dir);
    cv::Rect b0 = segment_band(pack, 0);  // given_name: y 40, h 20
    CHECK(b0 == cv::Rect(0, 32, pack.template_rgba.cols, 36));
    cv::Rect b1 = segment_band(pack, 1);  // dob: y 70, h 20
    CHECK(b1 == cv::Rect(0, 62, pack.template_rgba.cols, 36));
    CHECK_THROWS_AS(segment_band(pack, 9), std::invalid_argument);
}

TEST_CASE("budget zero returns the layout defaults untouched") {
    TunePackFixture fx("tune_zero");
    Rng rng(3);
    SegmentReport r = tune_segment(fx.pack, 0, *fx.pack.reference_rgb, TuneSpace{}, 0, rng);
    CHECK(r.best.font_id == fx.pack.field("given_name").params.font_id);
    CHECK(r.best.size_pt == fx.pack.field("given_name").params.size_pt);
    CHECK(r.best_ssim == r.untuned_ssim);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].step == 0);
}

TEST_CASE("tuning recovers a perturbed reference and improves monotonically") {
    TunePackFixture fx("tune_recover");
    Rng rng(2024);
    SegmentReport r = tune_segment(fx.pack, 0, *fx.pack.reference_rgb, TuneSpace{}, 60, rng);

    CHECK(r.untuned_ssim < 0.995);
    CHECK(r.best_ssim > r.untuned_ssim + 0.002);
    for (size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].segment_ssim >= r.trace[i - 1].segment_ssim);
        CHECK(r.trace[i].step == int(i));
    }
    CHECK(r.best_ssim > 0.9);
}

TEST_CASE("a longer budget replays the shorter run before extending it") {
    TunePackFixture fx("tune_nested");
    Rng rng_a(7), rng_b(7);
    SegmentReport shorter = tune_segment(fx.pack, 0, *fx.pack.reference_rgb, TuneSpace{}, 30, rng_a);
    SegmentReport longer = tune_segment(fx.pack, 0, *fx.pack.reference_rgb, TuneSpace{}, 60, rng_b);
    REQUIRE(longer.trace.size() == 61);
    REQUIRE(shorter.trace.size() == 31);
    for (size_t i = 0; i < shorter.trace.size(); ++i) {
        CHECK(shorter.trace[i].segment_ssim == longer.trace[i].segment_ssim);
        CHECK(shorter.trace[i].full_ssim == longer.trace[i].full_ssim);
    }
    CHECK(longer.best_ssim >= shorter.best_ssim);
}

TEST_CASE("tuning is deterministic for a fixed seed") {
    TunePackFixture fx("tune_deterministic");
    Rng a(5), b(5);
    SegmentReport ra = tune_segment(fx.pack, 1, *fx.pack.reference_rgb, TuneSpace{}, 25, a);
    SegmentReport rb = tune_segment(fx.pack, 1, *fx.pack.reference_rgb, TuneSpace{}, 25, b);
    CHECK(ra.best_ssim == rb.best_ssim);
    CHECK(ra.best.font_id == rb.best.font_id);
    CHECK(ra.best.size_pt == rb.best.size_pt);
    CHECK(ra.best.color_rgb == rb.best.color_rgb);
    REQUIRE(ra.trace.size() == rb.trace.size());
    for (size_t i = 0; i < ra.trace.size(); ++i)
        CHECK(ra.trace[i].segment_ssim == rb.trace[i].segment_ssim);
}

TEST_CASE("overflowing trials score -1 and do not abort the search") {
    TunePackFixture fx("tune_overflow");
    TuneSpace wild;
    wild.size_hi = 60;  // most of the range cannot fit a 20px box
    Rng rng(11);
    SegmentReport r = tune_segment(fx.pack, 0, *fx.pack.reference_rgb, wild, 40, rng);
    CHECK(r.best_ssim >= r.untuned_ssim);
    CHECK(r.trace.size() == 41);
}

TEST_CASE("tune_document tunes every segment and lifts the full-image score") {
    TunePackFixture fx("tune_document");
    Rng rng(42);
    TuneReport report = tune_document(fx.pack, *fx.pack.reference_rgb, 40, rng);
    CHECK(report.segments.size() == 2);
    CHECK(report.best_params.count("given_name") == 1);
    CHECK(report.best_params.count("dob") == 1);
    CHECK(report.full_after >= report.full_before);
    CHECK(report.full_after > 0.9);

    SUBCASE("repeatable") {
        Rng rng2(42);
        TuneReport again = tune_document(fx.pack, *fx.pack.reference_rgb, 40, rng2);
        CHECK(again.full_after == report.full_after);
        CHECK(again.best_params.at("given_name").size_pt ==
              report.best_params.at("given_name").size_pt);
    }

    SUBCASE("params json round trip") {
        auto out = testutil::tmp_dir("tune_params_out");
        write_params_json(out + "/params.json", report);
        auto loaded = read_params_json(out + "/params.json");
        REQUIRE(loaded.size() == report.best_params.size());
        for (const auto& [fid, p] : report.best_params) {
            CHECK(loaded.at(fid).font_id == p.font_id);
            CHECK(loaded.at(fid).size_pt == doctest::Approx(p.size_pt));
            CHECK(loaded.at(fid).color_rgb == p.color_rgb);
            CHECK(loaded.at(fid).dx == doctest::Approx(p.dx));
        }
    }

    SUBCASE("trace csv has one row per step per segment") {
        auto out = testutil::tmp_dir("tune_trace_out");
        write_trace_csv(out + "/trace.csv", report);
        std::ifstream in(out + "/trace.csv");
        std::string line;
        int rows = 0;
        std::getline(in, line);
        CHECK(line == "segment,step,segment_ssim,full_ssim");
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 2 * 41);
    }
}
