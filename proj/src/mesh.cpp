#include "mesh.hpp"

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace idsynth {

namespace {

constexpr double kEdgeEps = 1e-9;

double cross(const cv::Point2d& o, const cv::Point2d& a, const cv::Point2d& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

cv::Vec4b bilinear4(const cv::Mat& src, double sx, double sy) {
    sx = std::clamp(sx, 0.0, double(src.cols - 1));
    sy = std::clamp(sy, 0.0, double(src.rows - 1));
    const int x0 = std::min(int(std::floor(sx)), src.cols - 1);
    const int y0 = std::min(int(std::floor(sy)), src.rows - 1);
    const int x1 = std::min(x0 + 1, src.cols - 1);
    const int y1 = std::min(y0 + 1, src.rows - 1);
    const double fx = sx - x0, fy = sy - y0;
    const cv::Vec4b p00 = src.at<cv::Vec4b>(y0, x0), p10 = src.at<cv::Vec4b>(y0, x1);
    const cv::Vec4b p01 = src.at<cv::Vec4b>(y1, x0), p11 = src.at<cv::Vec4b>(y1, x1);
    cv::Vec4b out;
    for (int c = 0; c < 4; ++c) {
        const double top = p00[c] * (1.0 - fx) + p10[c] * fx;
        const double bot = p01[c] * (1.0 - fx) + p11[c] * fx;
        out[c] = cv::saturate_cast<uchar>(std::lround(top * (1.0 - fy) + bot * fy));
    }
    return out;
}

double hull_area(const std::vector<cv::Point2d>& hull) {
    double a = 0;
    for (size_t i = 0; i < hull.size(); ++i) {
        const auto& p = hull[i];
        const auto& q = hull[(i + 1) % hull.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return std::abs(a) / 2.0;
}

// CDF-matching lookup table from the value counts of src to those of ref.
std::array<uchar, 256> match_lut(const std::array<long, 256>& src,
                                 const std::array<long, 256>& ref) {
    long src_total = 0, ref_total = 0;
    for (int v = 0; v < 256; ++v) {
        src_total += src[v];
        ref_total += ref[v];
    }
    std::array<uchar, 256> lut{};
    if (src_total == 0 || ref_total == 0) {
        for (int v = 0; v < 256; ++v) lut[v] = uchar(v);
        return lut;
    }
    double ref_cdf[256];
    double acc = 0;
    for (int v = 0; v < 256; ++v) {
        acc += double(ref[v]) / ref_total;
        ref_cdf[v] = acc;
    }
    acc = 0;
    int u = 0;
    for (int v = 0; v < 256; ++v) {
        acc += double(src[v]) / src_total;
        while (u < 255 && ref_cdf[u] < acc - 1e-12) ++u;
        lut[v] = uchar(u);
    }
    return lut;
}

}  // namespace

// Bowyer-Watson with a fixed insertion order; exact-cocircular ties keep the
// triangle created first, so the result is fully deterministic.
std::vector<std::array<int, 3>> delaunay_triangles(const std::vector<cv::Point2d>& pts,
                                                   const cv::Size& bounds) {
    if (pts.size() < 3) throw std::invalid_argument("triangulation needs at least 3 points");
    for (size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].x < 0 || pts[i].y < 0 || pts[i].x > bounds.width || pts[i].y > bounds.height)
            throw std::invalid_argument("triangulation point outside bounds");
        for (size_t j = 0; j < i; ++j)
            if (pts[i] == pts[j])
                throw std::runtime_error("degenerate triangulation: duplicate points");
    }

    struct Tri {
        int a, b, c;
        double ux, uy, r2;
    };
    std::vector<cv::Point2d> p = pts;
    auto make_tri = [&p](int a, int b, int c) {
        const auto &A = p[a], &B = p[b], &C = p[c];
        const double d = 2.0 * (A.x * (B.y - C.y) + B.x * (C.y - A.y) + C.x * (A.y - B.y));
        Tri t{a, b, c, 0.0, 0.0, std::numeric_limits<double>::infinity()};
        if (std::abs(d) > 1e-12) {
            const double a2 = A.x * A.x + A.y * A.y;
            const double b2 = B.x * B.x + B.y * B.y;
            const double c2 = C.x * C.x + C.y * C.y;
            t.ux = (a2 * (B.y - C.y) + b2 * (C.y - A.y) + c2 * (A.y - B.y)) / d;
            t.uy = (a2 * (C.x - B.x) + b2 * (A.x - C.x) + c2 * (B.x - A.x)) / d;
            t.r2 = (A.x - t.ux) * (A.x - t.ux) + (A.y - t.uy) * (A.y - t.uy);
        }
        return t;
    };

    const int n = int(pts.size());
    const double span = 16.0 * std::max(bounds.width, bounds.height) + 16.0;
    const double cx = bounds.width / 2.0, cy = bounds.height / 2.0;
    p.emplace_back(cx - 2.0 * span, cy - span);
    p.emplace_back(cx + 2.0 * span, cy - span);
    p.emplace_back(cx, cy + 2.0 * span);
    std::vector<Tri> live{make_tri(n, n + 1, n + 2)};

    for (int i = 0; i < n; ++i) {
        std::vector<Tri> keep, bad;
        for (const auto& t : live) {
            const double dx = p[i].x - t.ux, dy = p[i].y - t.uy;
            const bool inside =
                std::isinf(t.r2) || dx * dx + dy * dy < t.r2 * (1.0 - 1e-12);
            (inside ? bad : keep).push_back(t);
        }
        std::map<std::pair<int, int>, int> edges;
        for (const auto& t : bad) {
            ++edges[std::make_pair(std::min(t.a, t.b), std::max(t.a, t.b))];
            ++edges[std::make_pair(std::min(t.b, t.c), std::max(t.b, t.c))];
            ++edges[std::make_pair(std::min(t.c, t.a), std::max(t.c, t.a))];
        }
        for (const auto& [e, count] : edges)
            if (count == 1) keep.push_back(make_tri(i, e.first, e.second));
        live = std::move(keep);
    }

    std::vector<std::array<int, 3>> tris;
    for (const auto& t : live) {
        if (t.a >= n || t.b >= n || t.c >= n) continue;
        std::array<int, 3> tri{t.a, t.b, t.c};
        std::sort(tri.begin(), tri.end());
        tris.push_back(tri);
    }
    std::sort(tris.begin(), tris.end());
    tris.erase(std::unique(tris.begin(), tris.end()), tris.end());
    if (tris.empty()) throw std::runtime_error("degenerate triangulation: collinear points");
    return tris;
}

cv::Mat warp_mesh(const cv::Mat& src, const std::vector<cv::Point2d>& src_pts,
                  const std::vector<cv::Point2d>& dst_pts,
                  const std::vector<std::array<int, 3>>& tris, const cv::Size& size) {
    CV_Assert(src.type() == CV_8UC4);
    if (src_pts.size() != dst_pts.size())
        throw std::invalid_argument("warp point lists differ in length");
    cv::Mat out(size, CV_8UC4, cv::Scalar(0, 0, 0, 0));
    for (const auto& tri : tris) {
        for (int k = 0; k < 3; ++k)
            if (tri[k] < 0 || tri[k] >= int(src_pts.size()))
                throw std::invalid_argument("triangle index out of range");
        const cv::Point2d d0 = dst_pts[tri[0]], d1 = dst_pts[tri[1]], d2 = dst_pts[tri[2]];
        const cv::Point2d s0 = src_pts[tri[0]], s1 = src_pts[tri[1]], s2 = src_pts[tri[2]];
        const double det = (d1.x - d0.x) * (d2.y - d0.y) - (d2.x - d0.x) * (d1.y - d0.y);
        if (std::abs(det) < 1e-12) continue;
        const int x_lo = std::max(0, int(std::floor(std::min({d0.x, d1.x, d2.x}))));
        const int x_hi = std::min(size.width - 1, int(std::ceil(std::max({d0.x, d1.x, d2.x}))));
        const int y_lo = std::max(0, int(std::floor(std::min({d0.y, d1.y, d2.y}))));
        const int y_hi = std::min(size.height - 1, int(std::ceil(std::max({d0.y, d1.y, d2.y}))));
        for (int y = y_lo; y <= y_hi; ++y) {
            auto* row = out.ptr<cv::Vec4b>(y);
            for (int x = x_lo; x <= x_hi; ++x) {
                const double px = x - d0.x, py = y - d0.y;
                const double u = (px * (d2.y - d0.y) - py * (d2.x - d0.x)) / det;
                const double v = (py * (d1.x - d0.x) - px * (d1.y - d0.y)) / det;
                if (u < -kEdgeEps || v < -kEdgeEps || u + v > 1.0 + kEdgeEps) continue;
                const double sx = s0.x + u * (s1.x - s0.x) + v * (s2.x - s0.x);
                const double sy = s0.y + u * (s1.y - s0.y) + v * (s2.y - s0.y);
                row[x] = bilinear4(src, sx, sy);
            }
        }
    }
    return out;
}

std::vector<cv::Point2d> convex_hull(std::vector<cv::Point2d> pts) {
    if (pts.size() < 3) throw std::invalid_argument("hull needs at least 3 points");
    std::sort(pts.begin(), pts.end(), [](const cv::Point2d& a, const cv::Point2d& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const cv::Point2d& a, const cv::Point2d& b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    const size_t n = pts.size();
    std::vector<cv::Point2d> h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (size_t i = n - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);  // ordered so interior points sit on the positive side of every edge
    return h;
}

bool inside_hull(const std::vector<cv::Point2d>& hull, double x, double y) {
    const cv::Point2d q(x, y);
    for (size_t i = 0; i < hull.size(); ++i) {
        const auto& p0 = hull[i];
        const auto& p1 = hull[(i + 1) % hull.size()];
        if (cross(p0, p1, q) < -kEdgeEps) return false;
    }
    return true;
}

cv::Mat morph_faces(const PortraitAsset& a, const PortraitAsset& b, const MorphConfig& cfg) {
    CV_Assert(a.image.type() == CV_8UC4 && b.image.type() == CV_8UC4);
    if (a.landmarks.size() != b.landmarks.size())
        throw std::invalid_argument("landmark count mismatch");
    if (a.landmarks.size() < 3)
        throw std::invalid_argument("morphing needs at least 3 landmarks");
    if (!(cfg.blend >= 0.0 && cfg.blend <= 1.0))
        throw std::invalid_argument("blend must be in [0, 1]");

    const double t = cfg.blend;
    const cv::Size sz = a.image.size();
    std::vector<cv::Point2d> mid(a.landmarks.size());
    for (size_t i = 0; i < mid.size(); ++i) {
        mid[i].x = (1.0 - t) * a.landmarks[i].x + t * b.landmarks[i].x;
        mid[i].y = (1.0 - t) * a.landmarks[i].y + t * b.landmarks[i].y;
    }
    const std::vector<cv::Point2d> hull = convex_hull(mid);
    if (hull.size() < 3 || hull_area(hull) < 1e-6)
        throw std::runtime_error("degenerate triangulation: collinear landmarks");

    auto with_corners = [](std::vector<cv::Point2d> p, const cv::Size& s) {
        p.emplace_back(0, 0);
        p.emplace_back(s.width - 1, 0);
        p.emplace_back(s.width - 1, s.height - 1);
        p.emplace_back(0, s.height - 1);
        return p;
    };
    const auto a_pts = with_corners(a.landmarks, a.image.size());
    const auto b_pts = with_corners(b.landmarks, b.image.size());
    const auto m_pts = with_corners(mid, sz);

    const auto tris = delaunay_triangles(m_pts, sz);
    const cv::Mat wa = warp_mesh(a.image, a_pts, m_pts, tris, sz);
    const cv::Mat wb = warp_mesh(b.image, b_pts, m_pts, tris, sz);

    cv::Mat out = a.image.clone();
    std::array<std::array<long, 256>, 3> cnt_out{}, cnt_ref{};
    std::vector<cv::Point> hull_px;
    for (int y = 0; y < sz.height; ++y) {
        const auto* pa = wa.ptr<cv::Vec4b>(y);
        const auto* pb = wb.ptr<cv::Vec4b>(y);
        const auto* orig = a.image.ptr<cv::Vec4b>(y);
        auto* po = out.ptr<cv::Vec4b>(y);
        for (int x = 0; x < sz.width; ++x) {
            if (!inside_hull(hull, x, y)) continue;
            cv::Vec4b mixed;
            for (int c = 0; c < 4; ++c)
                mixed[c] = cv::saturate_cast<uchar>(
                    std::lround((1.0 - t) * pa[x][c] + t * pb[x][c]));
            po[x] = mixed;
            hull_px.emplace_back(x, y);
            for (int c = 0; c < 3; ++c) {
                ++cnt_out[c][mixed[c]];
                ++cnt_ref[c][orig[x][c]];
            }
        }
    }
    if (cfg.histogram_match_to_first) {
        for (int c = 0; c < 3; ++c) {
            const auto lut = match_lut(cnt_out[c], cnt_ref[c]);
            for (const auto& p : hull_px) {
                auto& px = out.at<cv::Vec4b>(p.y, p.x);
                px[c] = lut[px[c]];
            }
        }
    }
    return out;
}

}  // namespace idsynth
