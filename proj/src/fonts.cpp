#include "fonts.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>

namespace fs = std::filesystem;

namespace idsynth {

cv::Ptr<cv::freetype::FreeType2> FontCache::get(const std::string& ttf_path) {
    thread_local std::map<std::string, cv::Ptr<cv::freetype::FreeType2>> cache;
    auto it = cache.find(ttf_path);
    if (it != cache.end()) return it->second;
    if (!fs::exists(ttf_path)) throw std::runtime_error("font file not found: " + ttf_path);
    auto ft = cv::freetype::createFreeType2();
    ft->loadFontData(ttf_path, 0);
    cache.emplace(ttf_path, ft);
    return ft;
}

cv::Size text_extent(const std::string& ttf_path, const std::string& text,
                     int font_height, int* baseline) {
    auto ft = FontCache::get(ttf_path);
    int base = 0;
    cv::Size sz = ft->getTextSize(text, font_height, -1, &base);
    if (baseline) *baseline = base;
    return sz;
}

std::vector<std::string> signature_font_paths() {
    static const char* kNames[] = {
        "DejaVuSans-Oblique.ttf",
        "DejaVuSans-BoldOblique.ttf",
        "DejaVuSansMono-Oblique.ttf",
        "DejaVuSansMono-BoldOblique.ttf",
        "DejaVuSerif-Italic.ttf",
        "DejaVuSerif-BoldItalic.ttf",
        "DejaVuSansDisplay.ttf",
        "DejaVuSerifDisplay.ttf",
        "STIXGeneralItalic.ttf",
        "STIXGeneralBolIta.ttf",
        "STIXNonUni.ttf",
        "STIXNonUniIta.ttf",
        "STIXNonUniBolIta.ttf",
        "cmmi10.ttf",
    };
    std::vector<std::string> out;
    const fs::path dir = fs::path(IDSYNTH_DATA_DIR) / "fonts";
    for (const char* name : kNames) {
        fs::path p = dir / name;
        if (!fs::exists(p)) throw std::runtime_error("bundled signature font missing: " + p.string());
        out.push_back(p.string());
    }
    return out;
}

}  // namespace idsynth
