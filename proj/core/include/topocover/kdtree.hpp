#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace topocover {

/// Static k-d tree over a subset of rows of a row-major coordinate buffer.
///
/// The buffer is not copied and must outlive the tree. Query results are exact:
/// distances are evaluated with topocover::distance, and bounding boxes are
/// only used to skip subtrees that provably cannot change the answer, so
/// results are bit-identical to a linear scan.
class KdTree {
public:
    struct Nearest {
        std::size_t id = 0;
        double distance = std::numeric_limits<double>::infinity();
    };

    KdTree(std::span<const double> coords, std::size_t dimension, std::vector<std::size_t> ids,
           std::size_t leaf_size = 16);

    std::size_t size() const noexcept { return ids_.size(); }

    /// Closest indexed row to q. Ties resolve to the lowest row id.
    Nearest nearest(std::span<const double> q) const;

    /// Appends every row id p with distance(q, p) < radius, in ascending order.
    void radius_search(std::span<const double> q, double radius, std::vector<std::size_t>& out) const;

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        std::size_t left = 0;   // 0 marks a leaf; the root is never a child
        std::size_t right = 0;
    };

    std::size_t build(std::size_t begin, std::size_t end);
    double box_lower_bound(std::size_t node, std::span<const double> q) const noexcept;
    std::span<const double> row(std::size_t id) const noexcept {
        return coords_.subspan(id * dimension_, dimension_);
    }

    std::span<const double> coords_;
    std::size_t dimension_;
    std::size_t leaf_size_;
    std::vector<std::size_t> ids_;
    std::vector<Node> nodes_;
    std::vector<double> boxes_;  // per node: dimension lows then dimension highs
};

}  // namespace topocover
