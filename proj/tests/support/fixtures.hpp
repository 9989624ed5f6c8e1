#pragma once

#include "assets.hpp"
#include "imaging.hpp"

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "paths.hpp"

namespace testutil {

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

inline void copy_font(const std::string& pack_dir, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(pack_dir) / "fonts");
    fs::copy_file(fs::path(data_dir()) / "fonts" / name,
                  fs::path(pack_dir) / "fonts" / name,
                  fs::copy_options::overwrite_existing);
}

// Tiny two-font pack with one field of each kind; layout knobs overridable.
inline std::string make_min_pack(const std::string& name,
                                 nlohmann::json layout_patch = nlohmann::json::object()) {
    namespace fs = std::filesystem;
    const std::string dir = tmp_dir(name);
    cv::Mat tpl(150, 300, CV_8UC4, cv::Scalar(230, 235, 240, 255));
    cv::rectangle(tpl, {0, 0, 300, 24}, cv::Scalar(180, 120, 60, 255), cv::FILLED);
    idsynth::save_png(dir + "/template.png", tpl);
    copy_font(dir, "DejaVuSans.ttf");
    copy_font(dir, "DejaVuSans-Bold.ttf");

    nlohmann::json layout = {
        {"pack_id", "mini"},
        {"doc_kind", "driver_license"},
        {"region", "AZ"},
        {"language", "en"},
        {"validity_years", 5},
        {"dln_format", "########"},
        {"fonts", {{"sans", "DejaVuSans.ttf"}, {"bold", "DejaVuSans-Bold.ttf"}}},
        {"fields",
         {{{"id", "given_name"},
           {"kind", "text"},
           {"bbox", {100, 40, 120, 20}},
           {"pii", true},
           {"segment", 0},
           {"params",
            {{"font", "sans"}, {"size_pt", 14}, {"color", {20, 20, 60}}, {"offset", {2, 2}}}}},
          {{"id", "dob"},
           {"kind", "text"},
           {"bbox", {100, 70, 120, 20}},
           {"pii", true},
           {"segment", 1},
           {"params",
            {{"font", "sans"}, {"size_pt", 14}, {"color", {20, 20, 60}}, {"offset", {2, 2}}}}},
          {{"id", "portrait"},
           {"kind", "portrait"},
           {"bbox", {8, 32, 80, 100}},
           {"pii", true},
           {"background", {{"mode", "opaque"}, {"color", {235, 240, 245}}}}},
          {{"id", "ghost"},
           {"kind", "ghost"},
           {"bbox", {240, 96, 40, 50}},
           {"pii", true},
           {"source", "portrait"}},
          {{"id", "signature"},
           {"kind", "signature"},
           {"bbox", {100, 110, 130, 28}},
           {"pii", true},
           {"source", "given_name"}}}}};
    layout.merge_patch(layout_patch);
    write_json(dir + "/layout.json", layout);
    return dir;
}

// Flat-colored stand-in face with 5 landmarks; enough for geometry tests.
inline void make_portrait(const std::string& dir, const std::string& id, int w, int h,
                          nlohmann::json meta_patch = nlohmann::json::object(),
                          cv::Scalar face_color = cv::Scalar(150, 180, 210, 255)) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    cv::Mat img(h, w, CV_8UC4, cv::Scalar(0, 0, 0, 0));
    cv::ellipse(img, {w / 2, h / 2}, {w / 3, int(h / 2.5)}, 0, 0, 360, face_color, cv::FILLED);
    cv::circle(img, {w / 2 - w / 8, h / 2 - h / 10}, w / 24, cv::Scalar(60, 90, 90, 255),
               cv::FILLED);
    cv::circle(img, {w / 2 + w / 8, h / 2 - h / 10}, w / 24, cv::Scalar(60, 90, 90, 255),
               cv::FILLED);
    idsynth::save_png(dir + "/" + id + ".png", img);

    nlohmann::json meta = {
        {"age", 30},
        {"sex_probs", {{"male", 0.5}, {"female", 0.5}}},
        {"ethnicity", "hispanic"},
        {"eye_color_probs", {{"brown", 0.7}, {"blue", 0.3}}},
        {"emotion_probs", {{"neutral", 0.9}, {"happiness", 0.05}, {"anger", 0.05}}},
        {"head_pose", {{"pitch", 1.0}, {"roll", 0.0}, {"yaw", 2.0}}},
        {"landmarks",
         {{w / 2 - w / 8, h / 2 - h / 10},
          {w / 2 + w / 8, h / 2 - h / 10},
          {w / 2, h / 2},
          {w / 2 - w / 10, h / 2 + h / 8},
          {w / 2 + w / 10, h / 2 + h / 8}}}};
    meta.merge_patch(meta_patch);
    write_json(dir + "/" + id + ".json", meta);
}

}  // namespace testutil
