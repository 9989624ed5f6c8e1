#include "ssim.hpp"

#include "imaging.hpp"

#include <opencv2/imgproc.hpp>

#include <stdexcept>

namespace idsynth {

namespace {

void check_config(const SsimConfig& cfg) {
    if (cfg.window < 3 || cfg.window % 2 == 0)
        throw std::invalid_argument("ssim: window must be odd and at least 3");
    if (cfg.k1 <= 0 || cfg.k2 <= 0 || cfg.window_stddev <= 0 || cfg.dynamic_range <= 0)
        throw std::invalid_argument("ssim: k1, k2, stddev, dynamic_range must be positive");
}

cv::Mat blur_valid(const cv::Mat& img, const cv::Mat& kernel, int win) {
    cv::Mat full;
    cv::sepFilter2D(img, full, CV_64F, kernel, kernel, cv::Point(-1, -1), 0,
                    cv::BORDER_REFLECT);
    const int m = win / 2;
    return full(cv::Rect(m, m, img.cols - 2 * m, img.rows - 2 * m)).clone();
}

}  // namespace

cv::Mat ssim_map(const cv::Mat& luma_a, const cv::Mat& luma_b, const SsimConfig& cfg) {
    check_config(cfg);
    CV_Assert(luma_a.type() == CV_64F && luma_b.type() == CV_64F);
    if (luma_a.size() != luma_b.size())
        throw std::invalid_argument("ssim: image sizes differ");
    if (luma_a.cols < cfg.window || luma_a.rows < cfg.window)
        throw std::invalid_argument("ssim: images smaller than the window");

    const double c1 = cfg.k1 * cfg.dynamic_range * cfg.k1 * cfg.dynamic_range;
    const double c2 = cfg.k2 * cfg.dynamic_range * cfg.k2 * cfg.dynamic_range;
    cv::Mat kernel = cv::getGaussianKernel(cfg.window, cfg.window_stddev, CV_64F);
    cv::Mat mu_a = blur_valid(luma_a, kernel, cfg.window);
    cv::Mat mu_b = blur_valid(luma_b, kernel, cfg.window);
    cv::Mat e_aa = blur_valid(luma_a.mul(luma_a), kernel, cfg.window);
    cv::Mat e_bb = blur_valid(luma_b.mul(luma_b), kernel, cfg.window);
    cv::Mat e_ab = blur_valid(luma_a.mul(luma_b), kernel, cfg.window);

    cv::Mat map(mu_a.size(), CV_64F);
    for (int y = 0; y < map.rows; ++y) {
        const double* ma = mu_a.ptr<double>(y);
        const double* mb = mu_b.ptr<double>(y);
        const double* aa = e_aa.ptr<double>(y);
        const double* bb = e_bb.ptr<double>(y);
        const double* ab = e_ab.ptr<double>(y);
        double* out = map.ptr<double>(y);
        for (int x = 0; x < map.cols; ++x) {
            const double var_a = aa[x] - ma[x] * ma[x];
            const double var_b = bb[x] - mb[x] * mb[x];
            const double cov = ab[x] - ma[x] * mb[x];
            out[x] = (2.0 * ma[x] * mb[x] + c1) * (2.0 * cov + c2) /
                     ((ma[x] * ma[x] + mb[x] * mb[x] + c1) * (var_a + var_b + c2));
        }
    }
    return map;
}

double ssim(const cv::Mat& bgr_a, const cv::Mat& bgr_b, const SsimConfig& cfg) {
    cv::Mat map = ssim_map(to_luma64(bgr_a), to_luma64(bgr_b), cfg);
    return cv::mean(map)[0];
}

double ssim_region(const cv::Mat& bgr_a, const cv::Mat& bgr_b, const cv::Rect& roi,
                   const SsimConfig& cfg) {
    cv::Rect bounds(0, 0, bgr_a.cols, bgr_a.rows);
    cv::Rect clipped = roi & bounds;
    if (clipped.width < cfg.window || clipped.height < cfg.window)
        throw std::invalid_argument("ssim_region: roi too small");
    return ssim(bgr_a(clipped), bgr_b(clipped), cfg);
}

}  // namespace idsynth
