#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "topocover/point_cloud.hpp"

namespace topocover {

/// Open ball B_radius(center) with its center taken from the owning cloud.
struct Ball {
    std::size_t center_index = 0;
    double radius = 0.0;

    friend bool operator==(const Ball&, const Ball&) = default;
};

/// Strict-containment digraph on the points of one class: (i, j) is an edge
/// iff i != j and distance(x_i, x_j) < r_i. Node i is the i-th point of the
/// class in cloud order. Stored in compressed sparse row form.
class ContainmentDigraph {
public:
    ContainmentDigraph() = default;
    /// offsets.size() == node_count + 1; targets of node i are
    /// targets[offsets[i] .. offsets[i+1]), strictly increasing, without i.
    ContainmentDigraph(std::vector<std::size_t> offsets, std::vector<std::uint32_t> targets);

    static ContainmentDigraph from_adjacency(const std::vector<std::vector<std::uint32_t>>& out_edges);

    std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return targets_.size(); }
    std::span<const std::uint32_t> out_edges(std::size_t node) const noexcept {
        return {targets_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
    }

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> targets_;
};

struct CoverMetadata {
    bool subsampled = false;
    std::optional<std::uint64_t> seed;
    /// Cloud indices of class points with a coincident opposite-class point (r* = 0).
    std::vector<std::size_t> dropped_points;
};

/// Witness balls covering one class of a cloud while avoiding the other.
class ClassCover {
public:
    ClassCover(std::shared_ptr<const LabeledPointCloud> source, Label class_label,
               std::vector<Ball> balls, CoverMetadata metadata = {});

    Label class_label() const noexcept { return class_label_; }
    const std::vector<Ball>& balls() const noexcept { return balls_; }
    std::size_t size() const noexcept { return balls_.size(); }
    bool empty() const noexcept { return balls_.empty(); }
    std::size_t dimension() const noexcept { return source_->dimension(); }
    const LabeledPointCloud& source() const noexcept { return *source_; }
    const std::shared_ptr<const LabeledPointCloud>& source_ptr() const noexcept { return source_; }
    const CoverMetadata& metadata() const noexcept { return metadata_; }

    std::span<const double> center(std::size_t ball) const noexcept {
        return source_->point(balls_[ball].center_index);
    }

private:
    std::shared_ptr<const LabeledPointCloud> source_;
    Label class_label_;
    std::vector<Ball> balls_;
    CoverMetadata metadata_;
};

/// 1-skeleton of the cover nerve: {i, j} is an edge iff
/// distance(c_i, c_j) < r_i + r_j. Edges are stored with first < second,
/// sorted lexicographically.
struct SkeletonGraph {
    std::size_t node_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

struct CoverOptions {
    /// Opposing/same-class point counts above which queries go through a k-d tree.
    std::size_t spatial_index_threshold = 10'000;
    bool use_spatial_index = true;
    /// k-d trees stop pruning in high dimension; above this, linear scans.
    std::size_t spatial_index_max_dimension = 16;
    /// Above this many containment edges the greedy step stops storing the
    /// digraph and recomputes neighbourhoods from distances. Same result.
    std::size_t max_digraph_edges = 100'000'000;
};

/// Largest radius r such that the open ball B_r(x) contains no opposing point,
/// i.e. the minimum distance from x to `opposing` (row-major, same dimension as x).
/// Returns 0 when x coincides with an opposing point; callers treat that as degenerate.
double max_avoiding_radius(std::span<const double> x, std::span<const double> opposing);

/// max_avoiding_radius for every point of class `label`, in cloud order.
std::vector<double> avoiding_radii(const LabeledPointCloud& cloud, Label label,
                                   const CoverOptions& options = {});

/// radii[i] belongs to the i-th point of class `label`.
ContainmentDigraph build_containment_digraph(const LabeledPointCloud& cloud, Label label,
                                             std::span<const double> radii,
                                             const CoverOptions& options = {});

/// Greedy dominating set: repeatedly takes the node whose closed out-neighbourhood
/// contains the most undominated nodes, lowest index on ties. Returned in
/// selection order.
std::vector<std::size_t> greedy_dominating_set(const ContainmentDigraph& graph);

/// Radius computation, containment digraph, dominating set. Points with r* = 0
/// are dropped and listed in the metadata.
ClassCover build_class_cover(std::shared_ptr<const LabeledPointCloud> cloud, Label label,
                             const CoverOptions& options = {});

SkeletonGraph build_one_skeleton(const ClassCover& cover, const CoverOptions& options = {});

/// Uniform random k-subset of the balls, ball order preserved. The result no
/// longer satisfies the domination property; metadata.subsampled is set.
ClassCover subsample_witness_cover(const ClassCover& cover, std::size_t k, std::uint64_t seed);

}  // namespace topocover
