#include "topocover/kdtree.hpp"

#include <algorithm>
#include <cmath>

#include "topocover/errors.hpp"
#include "topocover/point_cloud.hpp"

namespace topocover {

KdTree::KdTree(std::span<const double> coords, std::size_t dimension, std::vector<std::size_t> ids,
               std::size_t leaf_size)
    : coords_(coords), dimension_(dimension), leaf_size_(std::max<std::size_t>(leaf_size, 1)),
      ids_(std::move(ids)) {
    if (dimension_ == 0) throw InputError("k-d tree dimension must be positive");
    for (std::size_t id : ids_) {
        if ((id + 1) * dimension_ > coords_.size()) throw InputError("k-d tree row id out of range");
    }
    if (!ids_.empty()) {
        nodes_.reserve(2 * (ids_.size() / leaf_size_ + 1));
        build(0, ids_.size());
    }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
    const std::size_t index = nodes_.size();
    nodes_.push_back({begin, end, 0, 0});
    boxes_.resize(boxes_.size() + 2 * dimension_);
    double* lo = boxes_.data() + index * 2 * dimension_;
    double* hi = lo + dimension_;
    std::fill(lo, lo + dimension_, std::numeric_limits<double>::infinity());
    std::fill(hi, hi + dimension_, -std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i) {
        const auto p = row(ids_[i]);
        for (std::size_t k = 0; k < dimension_; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    if (end - begin <= leaf_size_) return index;

    std::size_t axis = 0;
    double widest = -1.0;
    for (std::size_t k = 0; k < dimension_; ++k) {
        if (hi[k] - lo[k] > widest) {
            widest = hi[k] - lo[k];
            axis = k;
        }
    }
    if (widest <= 0.0) return index;  // all rows coincide

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(ids_.begin() + static_cast<std::ptrdiff_t>(begin),
                     ids_.begin() + static_cast<std::ptrdiff_t>(mid),
                     ids_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                         const double va = coords_[a * dimension_ + axis];
                         const double vb = coords_[b * dimension_ + axis];
                         return va < vb || (va == vb && a < b);
                     });
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

double KdTree::box_lower_bound(std::size_t node, std::span<const double> q) const noexcept {
    const double* lo = boxes_.data() + node * 2 * dimension_;
    const double* hi = lo + dimension_;
    double sum = 0.0;
    for (std::size_t k = 0; k < dimension_; ++k) {
        double diff = 0.0;
        if (q[k] < lo[k]) {
            diff = q[k] - lo[k];
        } else if (q[k] > hi[k]) {
            diff = q[k] - hi[k];
        }
        sum += diff * diff;
    }
    return sum;
}

KdTree::Nearest KdTree::nearest(std::span<const double> q) const {
    Nearest best;
    if (ids_.empty()) return best;
    double best_sq = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        if (box_lower_bound(n, q) > best_sq) continue;
        const Node& node = nodes_[n];
        if (node.left == 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t id = ids_[i];
                const double sq = squared_distance(q, row(id));
                if (sq < best_sq || (sq == best_sq && id < best.id)) {
                    best_sq = sq;
                    best.id = id;
                }
            }
            continue;
        }
        // Visit the nearer child first.
        const double dl = box_lower_bound(node.left, q);
        const double dr = box_lower_bound(node.right, q);
        if (dl <= dr) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    best.distance = distance(q, row(best.id));
    return best;
}

void KdTree::radius_search(std::span<const double> q, double radius,
                           std::vector<std::size_t>& out) const {
    if (ids_.empty() || !(radius > 0.0)) return;
    const std::size_t first = out.size();
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        if (std::sqrt(box_lower_bound(n, q)) >= radius) continue;
        const Node& node = nodes_[n];
        if (node.left == 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t id = ids_[i];
                if (distance(q, row(id)) < radius) out.push_back(id);
            }
            continue;
        }
        stack.push_back(node.right);
        stack.push_back(node.left);
    }
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
}

}  // namespace topocover
