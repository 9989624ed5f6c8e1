#pragma once

#include <opencv2/core.hpp>
#include <opencv2/freetype.hpp>

#include <string>
#include <vector>

namespace idsynth {

// FreeType2 instances are not thread-safe; the cache hands out one instance
// per (thread, font file).
class FontCache {
public:
    static cv::Ptr<cv::freetype::FreeType2> get(const std::string& ttf_path);
};

// Ink box of `text` at the given pixel height: size plus baseline drop.
cv::Size text_extent(const std::string& ttf_path, const std::string& text,
                     int font_height, int* baseline = nullptr);

// The bundled slanted/display faces used for signatures.
std::vector<std::string> signature_font_paths();

}  // namespace idsynth
