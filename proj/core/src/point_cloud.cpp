#include "topocover/point_cloud.hpp"

#include <cmath>
#include <string>

#include "topocover/errors.hpp"

namespace topocover {

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    // Four fixed partial sums; the summation order depends only on the
    // dimension, so every caller gets the same bits.
    const std::size_t d = a.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= d; k += 4) {
        const double d0 = a[k] - b[k], d1 = a[k + 1] - b[k + 1], d2 = a[k + 2] - b[k + 2], d3 = a[k + 3] - b[k + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; k < d; ++k) {
        const double diff = a[k] - b[k];
        s0 += diff * diff;
    }
    return (s0 + s1) + (s2 + s3);
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

LabeledPointCloud::LabeledPointCloud(std::size_t dimension, std::vector<double> coords,
                                     std::vector<Label> labels)
    : dimension_(dimension), coords_(std::move(coords)), labels_(std::move(labels)) {
    if (dimension_ == 0) {
        throw InputError("point cloud dimension must be positive");
    }
    if (coords_.size() != labels_.size() * dimension_) {
        throw InputError("point cloud has " + std::to_string(coords_.size()) + " coordinates for " +
                         std::to_string(labels_.size()) + " labels of dimension " +
                         std::to_string(dimension_));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] > 1) {
            throw InputError("label of point " + std::to_string(i) + " is " +
                             std::to_string(labels_[i]) + ", expected 0 or 1");
        }
    }
}

std::size_t LabeledPointCloud::count(Label label) const noexcept {
    std::size_t n = 0;
    for (Label l : labels_) n += (l == label);
    return n;
}

std::vector<std::size_t> LabeledPointCloud::indices_of(Label label) const {
    std::vector<std::size_t> out;
    out.reserve(count(label));
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) out.push_back(i);
    }
    return out;
}

LabeledPointCloud LabeledPointCloud::subset(std::span<const std::size_t> indices) const {
    std::vector<double> coords;
    std::vector<Label> labels;
    coords.reserve(indices.size() * dimension_);
    labels.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= size()) throw InputError("subset index " + std::to_string(i) + " out of range");
        const auto p = point(i);
        coords.insert(coords.end(), p.begin(), p.end());
        labels.push_back(labels_[i]);
    }
    return LabeledPointCloud(dimension_, std::move(coords), std::move(labels));
}

}  // namespace topocover

#include <atomic>

#include "topocover/parallel.hpp"

namespace topocover {

namespace {
std::atomic<unsigned> g_thread_count{0};
}

void set_thread_count(unsigned count) noexcept { g_thread_count.store(count); }

unsigned thread_count() noexcept {
    const unsigned configured = g_thread_count.load();
    if (configured != 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace topocover
