#include "imaging.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace idsynth {

cv::Mat load_png(const std::string& path, int channels) {
    cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (img.empty()) throw std::runtime_error("cannot read image: " + path);
    if (img.depth() != CV_8U) throw std::runtime_error("expected 8-bit image: " + path);
    if (channels == 4) {
        if (img.channels() == 1) cv::cvtColor(img, img, cv::COLOR_GRAY2BGRA);
        else if (img.channels() == 3) cv::cvtColor(img, img, cv::COLOR_BGR2BGRA);
    } else if (channels == 3) {
        if (img.channels() == 1) cv::cvtColor(img, img, cv::COLOR_GRAY2BGR);
        else if (img.channels() == 4) cv::cvtColor(img, img, cv::COLOR_BGRA2BGR);
    } else {
        throw std::invalid_argument("load_png: channels must be 3 or 4");
    }
    return img;
}

void save_png(const std::string& path, const cv::Mat& image) {
    if (!cv::imwrite(path, image, {cv::IMWRITE_PNG_COMPRESSION, 6}))
        throw std::runtime_error("cannot write image: " + path);
}

cv::Mat flatten_white(const cv::Mat& bgra) {
    CV_Assert(bgra.type() == CV_8UC4);
    cv::Mat out(bgra.size(), CV_8UC3);
    for (int y = 0; y < bgra.rows; ++y) {
        const cv::Vec4b* src = bgra.ptr<cv::Vec4b>(y);
        cv::Vec3b* dst = out.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgra.cols; ++x) {
            const int a = src[x][3];
            for (int c = 0; c < 3; ++c) {
                const int v = (src[x][c] * a + 255 * (255 - a) + 127) / 255;
                dst[x][c] = static_cast<uchar>(v);
            }
        }
    }
    return out;
}

cv::Mat to_luma64(const cv::Mat& bgr) {
    CV_Assert(bgr.type() == CV_8UC3);
    cv::Mat out(bgr.size(), CV_64F);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* src = bgr.ptr<cv::Vec3b>(y);
        double* dst = out.ptr<double>(y);
        for (int x = 0; x < bgr.cols; ++x)
            dst[x] = 0.114 * src[x][0] + 0.587 * src[x][1] + 0.299 * src[x][2];
    }
    return out;
}

cv::Mat fit_cover(const cv::Mat& image, const cv::Size& target) {
    CV_Assert(!image.empty() && target.width > 0 && target.height > 0);
    const int bw = target.width, bh = target.height;
    const double scale = std::max(double(bw) / image.cols, double(bh) / image.rows);
    const int sw = std::max(bw, int(std::lround(image.cols * scale)));
    const int sh = std::max(bh, int(std::lround(image.rows * scale)));
    cv::Mat resized;
    cv::resize(image, resized, cv::Size(sw, sh), 0, 0, cv::INTER_AREA);
    const int x0 = (sw - bw) / 2, y0 = (sh - bh) / 2;
    return resized(cv::Rect(x0, y0, bw, bh)).clone();
}

int max_abs_diff(const cv::Mat& a, const cv::Mat& b) {
    CV_Assert(a.size() == b.size() && a.type() == b.type());
    cv::Mat diff;
    cv::absdiff(a.reshape(1), b.reshape(1), diff);
    double mx = 0;
    cv::minMaxLoc(diff, nullptr, &mx);
    return static_cast<int>(mx);
}

}  // namespace idsynth
