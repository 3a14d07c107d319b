#include "viewfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "viewfuse/parallel.hpp"

namespace viewfuse {

KdTree::KdTree(std::span<const Eigen::Vector3d> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) throw EmptyInputError("kd-tree over an empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    build(0, static_cast<int>(points_.size()), 0);
}

int KdTree::build(int begin, int end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= 8) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    Eigen::Vector3d lo = points_[order_[begin]], hi = lo;
    for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
        return points_[a][axis] < points_[b][axis] || (points_[a][axis] == points_[b][axis] && a < b);
    });
    (void)depth;
    const double split = points_[order_[mid]][axis];
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(int node, const Eigen::Vector3d& q, Eigen::Vector3d& off, double box_d2, std::size_t& best,
                    double& best_d2) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (int i = n.begin; i < n.end; ++i) {
            const double d2 = (points_[order_[i]] - q).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && static_cast<std::size_t>(order_[i]) < best)) {
                best_d2 = d2;
                best = static_cast<std::size_t>(order_[i]);
            }
        }
        return;
    }
    const double diff = q[n.axis] - n.split;
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search(near, q, off, box_d2, best, best_d2);
    // Squared distance from q to the far cell's box, tracked per axis.
    const double old = off[n.axis];
    const double far_d2 = box_d2 - old * old + diff * diff;
    if (far_d2 <= best_d2) {
        off[n.axis] = diff;
        search(far, q, off, far_d2, best, best_d2);
        off[n.axis] = old;
    }
}

std::pair<std::size_t, double> KdTree::nearest(const Eigen::Vector3d& q) const {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d2 = std::numeric_limits<double>::infinity();
    Eigen::Vector3d off = Eigen::Vector3d::Zero();
    search(0, q, off, 0.0, best, best_d2);
    return {best, std::sqrt(best_d2)};
}

double mean_nearest_distance(std::span<const Eigen::Vector3d> from, const KdTree& to) {
    if (from.empty()) throw EmptyInputError("mean_nearest_distance: empty query set");
    const std::size_t chunk = 4096;
    const std::size_t chunks = (from.size() + chunk - 1) / chunk;
    std::vector<double> partial(chunks, 0.0);
    parallel_for(chunks, [&](std::size_t c) {
        double s = 0.0;
        for (std::size_t i = c * chunk; i < std::min(from.size(), (c + 1) * chunk); ++i) s += to.nearest(from[i]).second;
        partial[c] = s;
    });
    double sum = 0.0;
    for (double p : partial) sum += p;
    return sum / static_cast<double>(from.size());
}

ChamferResult chamfer_detail(std::span<const Eigen::Vector3d> a, std::span<const Eigen::Vector3d> b) {
    if (a.empty() || b.empty()) throw EmptyInputError("chamfer: empty cloud");
    const KdTree ta(a), tb(b);
    ChamferResult r;
    r.a_to_b_cm = 100.0 * mean_nearest_distance(a, tb);
    r.b_to_a_cm = 100.0 * mean_nearest_distance(b, ta);
    r.chamfer_cm = 0.5 * (r.a_to_b_cm + r.b_to_a_cm);
    return r;
}

double chamfer(std::span<const Eigen::Vector3d> a, std::span<const Eigen::Vector3d> b) {
    return chamfer_detail(a, b).chamfer_cm;
}

namespace {

std::vector<double> gaussian_kernel() {
    std::vector<double> k(11);
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double x = i - 5;
        k[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable Gaussian filter with replicated borders.
Image<double> blur(const Image<double>& img) {
    static const std::vector<double> k = gaussian_kernel();
    const Eigen::Index rows = img.rows(), cols = img.cols();
    Image<double> tmp(rows, cols), out(rows, cols);
    for (Eigen::Index v = 0; v < rows; ++v)
        for (Eigen::Index u = 0; u < cols; ++u) {
            double s = 0.0;
            for (int i = 0; i < 11; ++i) s += k[i] * img(v, std::clamp<Eigen::Index>(u + i - 5, 0, cols - 1));
            tmp(v, u) = s;
        }
    for (Eigen::Index v = 0; v < rows; ++v)
        for (Eigen::Index u = 0; u < cols; ++u) {
            double s = 0.0;
            for (int i = 0; i < 11; ++i) s += k[i] * tmp(std::clamp<Eigen::Index>(v + i - 5, 0, rows - 1), u);
            out(v, u) = s;
        }
    return out;
}

Image<double> normalized(const Image<std::uint8_t>& c) { return c.cast<double>() / 255.0; }

}  // namespace

Image<double> ssim_map(const Image<double>& x, const Image<double>& y) {
    require_same_size(x, y, "ssim");
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const Image<double> mx = blur(x), my = blur(y);
    const Image<double> sxx = blur(x * x) - mx * mx;
    const Image<double> syy = blur(y * y) - my * my;
    const Image<double> sxy = blur(x * y) - mx * my;
    return ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
}

ImageMetrics image_metrics(const ColorImage& render, const ColorImage& truth, const Mask* region) {
    if (!same_size(render, truth)) throw DimensionMismatchError("image_metrics: size mismatch");
    if (region) require_same_size(*region, render, "image_metrics region");
    const Image<double> weight = region ? Image<double>((*region != 0).cast<double>())
                                        : Image<double>::Ones(render.rows(), render.cols());
    const double n = weight.sum();
    if (!(n > 0.0)) throw EmptyInputError("image_metrics: no pixels to compare");
    double abs_sum = 0.0, sq_sum = 0.0, ssim_sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const Image<double> x = normalized(render.channel[c]), y = normalized(truth.channel[c]);
        const Image<double> d = x - y;
        abs_sum += (d.abs() * weight).sum();
        sq_sum += (d * d * weight).sum();
        ssim_sum += (ssim_map(x, y) * weight).sum();
    }
    ImageMetrics m;
    m.l1 = abs_sum / (3.0 * n);
    const double mse = sq_sum / (3.0 * n);
    m.l2 = std::sqrt(mse);
    m.psnr = mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : std::numeric_limits<double>::infinity();
    m.ssim = ssim_sum / (3.0 * n);
    return m;
}

MaskMetrics mask_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
    if (pred.size() != gt.size()) throw DimensionMismatchError("mask_metrics: size mismatch");
    MaskMetrics m;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0, g = gt[i] != 0;
        if (p && g) ++m.tp;
        else if (p) ++m.fp;
        else if (g) ++m.fn;
        else ++m.tn;
    }
    auto ratio = [](long num, long den) { return static_cast<double>(num) / static_cast<double>(den); };
    if (m.tp + m.fn > 0) {
        m.iou_clutter = ratio(m.tp, m.tp + m.fp + m.fn);
        m.recall = ratio(m.tp, m.tp + m.fn);
    }
    if (m.tn + m.fp > 0) m.iou_non_clutter = ratio(m.tn, m.tn + m.fn + m.fp);
    if (m.tp + m.fp > 0) m.precision = ratio(m.tp, m.tp + m.fp);
    if (m.iou_clutter && m.iou_non_clutter) m.miou = 0.5 * (*m.iou_clutter + *m.iou_non_clutter);
    else if (m.iou_clutter) m.miou = m.iou_clutter;
    else if (m.iou_non_clutter) m.miou = m.iou_non_clutter;
    return m;
}

MaskMetrics mask_metrics(const Mask& pred, const Mask& gt) {
    require_same_size(pred, gt, "mask_metrics");
    return mask_metrics(std::span<const std::uint8_t>(pred.data(), static_cast<std::size_t>(pred.size())),
                        std::span<const std::uint8_t>(gt.data(), static_cast<std::size_t>(gt.size())));
}

namespace {

nlohmann::json number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nlohmann::json maybe(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const ImageMetrics& m) {
    return {{"l1", m.l1}, {"l2", m.l2}, {"psnr", number(m.psnr)}, {"ssim", m.ssim}};
}

nlohmann::json to_json(const MaskMetrics& m) {
    return {{"tp", m.tp},
            {"fp", m.fp},
            {"fn", m.fn},
            {"tn", m.tn},
            {"iou_clutter", maybe(m.iou_clutter)},
            {"iou_non_clutter", maybe(m.iou_non_clutter)},
            {"miou", maybe(m.miou)},
            {"precision", maybe(m.precision)},
            {"recall", maybe(m.recall)}};
}

nlohmann::json to_json(const ChamferResult& c) {
    return {{"chamfer_cm", c.chamfer_cm}, {"a_to_b_cm", c.a_to_b_cm}, {"b_to_a_cm", c.b_to_a_cm},
            {"formula", kChamferFormula}};
}

}  // namespace viewfuse
