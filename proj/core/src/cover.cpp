#include "topocover/cover.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <queue>
#include <random>
#include <string>

#include "topocover/errors.hpp"
#include "topocover/kdtree.hpp"
#include "topocover/parallel.hpp"

namespace topocover {

ContainmentDigraph::ContainmentDigraph(std::vector<std::size_t> offsets,
                                       std::vector<std::uint32_t> targets)
    : offsets_(std::move(offsets)), targets_(std::move(targets)) {
    if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != targets_.size()) {
        throw InputError("containment digraph offsets do not match target list");
    }
    const std::size_t n = node_count();
    for (std::size_t i = 0; i < n; ++i) {
        if (offsets_[i] > offsets_[i + 1]) throw InputError("containment digraph offsets not monotone");
        for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
            if (targets_[e] >= n || targets_[e] == i) {
                throw InputError("containment digraph edge from node " + std::to_string(i) +
                                 " has invalid target " + std::to_string(targets_[e]));
            }
        }
    }
}

ContainmentDigraph ContainmentDigraph::from_adjacency(
    const std::vector<std::vector<std::uint32_t>>& out_edges) {
    std::vector<std::size_t> offsets(out_edges.size() + 1, 0);
    for (std::size_t i = 0; i < out_edges.size(); ++i) offsets[i + 1] = offsets[i] + out_edges[i].size();
    std::vector<std::uint32_t> targets;
    targets.reserve(offsets.back());
    for (const auto& edges : out_edges) {
        std::vector<std::uint32_t> sorted(edges);
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        if (sorted.size() != edges.size()) throw InputError("duplicate edge in containment digraph");
        targets.insert(targets.end(), sorted.begin(), sorted.end());
    }
    return ContainmentDigraph(std::move(offsets), std::move(targets));
}

ClassCover::ClassCover(std::shared_ptr<const LabeledPointCloud> source, Label class_label,
                       std::vector<Ball> balls, CoverMetadata metadata)
    : source_(std::move(source)), class_label_(class_label), balls_(std::move(balls)),
      metadata_(std::move(metadata)) {
    if (!source_) throw InputError("cover requires a source cloud");
    if (class_label_ > 1) throw InputError("cover class label must be 0 or 1");
    for (const Ball& b : balls_) {
        if (b.center_index >= source_->size()) throw InputError("ball center index out of range");
        if (!(b.radius > 0.0)) throw InputError("cover balls must have positive radius");
    }
}

double max_avoiding_radius(std::span<const double> x, std::span<const double> opposing) {
    const std::size_t d = x.size();
    if (d == 0) throw InputError("point has dimension zero");
    if (opposing.empty()) throw InputError("opposing class is empty");
    if (opposing.size() % d != 0) {
        throw InputError("opposing coordinates are not a multiple of dimension " + std::to_string(d));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t off = 0; off < opposing.size(); off += d) {
        best = std::min(best, distance(x, opposing.subspan(off, d)));
    }
    return best;
}

namespace {

std::vector<double> gather_rows(const LabeledPointCloud& cloud, std::span<const std::size_t> ids) {
    std::vector<double> out;
    out.reserve(ids.size() * cloud.dimension());
    for (std::size_t id : ids) {
        const auto p = cloud.point(id);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

bool use_tree(const CoverOptions& options, std::size_t n, std::size_t dimension) {
    return options.use_spatial_index && n > options.spatial_index_threshold &&
           dimension <= options.spatial_index_max_dimension;
}

// Digraph over the given class points (cloud indices), radii aligned with them.
// nullopt once more than max_edges edges have been found.
std::optional<ContainmentDigraph> containment_digraph(const LabeledPointCloud& cloud,
                                                      std::span<const std::size_t> members,
                                                      std::span<const double> radii, const CoverOptions& options,
                                                      std::size_t max_edges) {
    const std::size_t n = members.size();
    if (n > std::numeric_limits<std::uint32_t>::max()) throw ResourceError("too many class points");
    std::vector<std::vector<std::uint32_t>> out(n);
    std::atomic<std::size_t> found{0};
    auto over = [&](std::size_t i) {
        if (found.fetch_add(out[i].size()) + out[i].size() > max_edges) {
            std::vector<std::uint32_t>().swap(out[i]);
            return true;
        }
        return false;
    };
    std::atomic<bool> aborted{false};

    if (use_tree(options, n, cloud.dimension())) {
        const std::vector<double> rows = gather_rows(cloud, members);
        std::vector<std::size_t> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = i;
        const KdTree tree(rows, cloud.dimension(), std::move(ids));
        parallel_for(0, n, [&](std::size_t i) {
            if (aborted) return;
            std::vector<std::size_t> hits;
            tree.radius_search(cloud.point(members[i]), radii[i], hits);
            auto& edges = out[i];
            edges.reserve(hits.size());
            for (std::size_t j : hits) {
                if (j != i) edges.push_back(static_cast<std::uint32_t>(j));
            }
            if (over(i)) aborted = true;
        });
    } else {
        parallel_for(0, n, [&](std::size_t i) {
            if (aborted) return;
            const auto xi = cloud.point(members[i]);
            auto& edges = out[i];
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i && distance(xi, cloud.point(members[j])) < radii[i]) {
                    edges.push_back(static_cast<std::uint32_t>(j));
                }
            }
            if (over(i)) aborted = true;
        });
    }
    if (aborted) return std::nullopt;

    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + out[i].size();
    std::vector<std::uint32_t> targets;
    targets.reserve(offsets.back());
    for (auto& edges : out) {
        targets.insert(targets.end(), edges.begin(), edges.end());
        std::vector<std::uint32_t>().swap(edges);
    }
    return ContainmentDigraph(std::move(offsets), std::move(targets));
}

}  // namespace

std::vector<double> avoiding_radii(const LabeledPointCloud& cloud, Label label,
                                   const CoverOptions& options) {
    const std::vector<std::size_t> members = cloud.indices_of(label);
    const std::vector<std::size_t> opposing = cloud.indices_of(static_cast<Label>(1 - label));
    if (opposing.empty()) throw InputError("opposing class is empty");
    std::vector<double> radii(members.size());
    if (use_tree(options, opposing.size(), cloud.dimension())) {
        const KdTree tree(cloud.coords(), cloud.dimension(), opposing);
        parallel_for(0, members.size(), [&](std::size_t i) {
            radii[i] = tree.nearest(cloud.point(members[i])).distance;
        });
    } else {
        const std::vector<double> rows = gather_rows(cloud, opposing);
        parallel_for(0, members.size(), [&](std::size_t i) {
            radii[i] = max_avoiding_radius(cloud.point(members[i]), rows);
        });
    }
    return radii;
}

ContainmentDigraph build_containment_digraph(const LabeledPointCloud& cloud, Label label,
                                             std::span<const double> radii,
                                             const CoverOptions& options) {
    const std::vector<std::size_t> members = cloud.indices_of(label);
    if (radii.size() != members.size()) {
        throw InputError("expected " + std::to_string(members.size()) + " radii, got " +
                         std::to_string(radii.size()));
    }
    return *containment_digraph(cloud, members, radii, options, std::numeric_limits<std::size_t>::max());
}

namespace {

// Lazy greedy over an implicit out-neighbourhood. Max-heap on (gain, -index);
// stored gains are upper bounds, so a popped entry whose gain is still
// current is the true greedy choice, lowest index on ties.
template <typename ForEachNeighbour>
std::vector<std::size_t> lazy_greedy(std::size_t n, std::span<const std::size_t> initial_gain,
                                     ForEachNeighbour&& for_each_neighbour) {
    std::vector<char> dominated(n, 0);
    std::size_t remaining = n;
    using Entry = std::pair<std::size_t, std::size_t>;
    auto worse = [](const Entry& a, const Entry& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
    for (std::size_t v = 0; v < n; ++v) heap.emplace(initial_gain[v], v);

    auto gain_of = [&](std::size_t v) {
        std::size_t g = dominated[v] ? 0 : 1;
        for_each_neighbour(v, [&](std::size_t u) { g += dominated[u] ? 0 : 1; });
        return g;
    };

    std::vector<std::size_t> chosen;
    while (remaining > 0) {
        const auto [stored, v] = heap.top();
        heap.pop();
        const std::size_t gain = gain_of(v);
        if (gain != stored) {
            if (gain > 0) heap.emplace(gain, v);
            continue;
        }
        chosen.push_back(v);
        if (!dominated[v]) {
            dominated[v] = 1;
            --remaining;
        }
        for_each_neighbour(v, [&](std::size_t u) {
            if (!dominated[u]) {
                dominated[u] = 1;
                --remaining;
            }
        });
    }
    return chosen;
}

// Same selection as greedy_dominating_set on the full digraph, with
// neighbourhoods recomputed from distances instead of stored.
std::vector<std::size_t> implicit_greedy(const LabeledPointCloud& cloud, std::span<const std::size_t> members,
                                         std::span<const double> radii) {
    const std::size_t n = members.size();
    const std::size_t d = cloud.dimension();
    const std::vector<double> rows = gather_rows(cloud, members);
    auto row = [&](std::size_t i) { return std::span<const double>(rows.data() + i * d, d); };
    auto for_each_neighbour = [&](std::size_t v, auto&& fn) {
        const auto xv = row(v);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != v && distance(xv, row(j)) < radii[v]) fn(j);
        }
    };
    std::vector<std::size_t> degree(n, 1);
    parallel_for(0, n, [&](std::size_t v) { for_each_neighbour(v, [&](std::size_t) { ++degree[v]; }); });
    return lazy_greedy(n, degree, for_each_neighbour);
}

}  // namespace

std::vector<std::size_t> greedy_dominating_set(const ContainmentDigraph& graph) {
    const std::size_t n = graph.node_count();
    std::vector<std::size_t> degree(n);
    for (std::size_t v = 0; v < n; ++v) degree[v] = graph.out_edges(v).size() + 1;
    return lazy_greedy(n, degree, [&](std::size_t v, auto&& fn) {
        for (std::uint32_t u : graph.out_edges(v)) fn(u);
    });
}

ClassCover build_class_cover(std::shared_ptr<const LabeledPointCloud> cloud, Label label,
                             const CoverOptions& options) {
    if (!cloud) throw InputError("null cloud");
    if (label > 1) throw InputError("class label must be 0 or 1");
    const std::vector<std::size_t> members = cloud->indices_of(label);
    if (members.empty()) throw InputError("class " + std::to_string(label) + " has no points");
    const std::vector<double> all_radii = avoiding_radii(*cloud, label, options);

    CoverMetadata metadata;
    std::vector<std::size_t> kept;
    std::vector<double> radii;
    kept.reserve(members.size());
    radii.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (all_radii[i] > 0.0) {
            kept.push_back(members[i]);
            radii.push_back(all_radii[i]);
        } else {
            metadata.dropped_points.push_back(members[i]);
        }
    }

    std::vector<Ball> balls;
    if (!kept.empty()) {
        const auto graph = containment_digraph(*cloud, kept, radii, options, options.max_digraph_edges);
        const std::vector<std::size_t> witnesses =
            graph ? greedy_dominating_set(*graph) : implicit_greedy(*cloud, kept, radii);
        balls.reserve(witnesses.size());
        for (std::size_t w : witnesses) balls.push_back({kept[w], radii[w]});
    }
    return ClassCover(std::move(cloud), label, std::move(balls), std::move(metadata));
}

SkeletonGraph build_one_skeleton(const ClassCover& cover, const CoverOptions& options) {
    if (cover.empty()) throw InputError("cannot build the skeleton of an empty cover");
    const std::size_t k = cover.size();
    if (k > std::numeric_limits<std::uint32_t>::max()) throw ResourceError("too many balls");
    const auto& balls = cover.balls();
    std::vector<std::vector<std::uint32_t>> upper(k);

    if (use_tree(options, k, cover.dimension())) {
        std::vector<std::size_t> centers(k);
        double max_radius = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            centers[i] = balls[i].center_index;
            max_radius = std::max(max_radius, balls[i].radius);
        }
        const std::vector<double> rows = gather_rows(cover.source(), centers);
        std::vector<std::size_t> ids(k);
        for (std::size_t i = 0; i < k; ++i) ids[i] = i;
        const KdTree tree(rows, cover.dimension(), std::move(ids));
        parallel_for(0, k, [&](std::size_t i) {
            std::vector<std::size_t> hits;
            tree.radius_search(cover.center(i), balls[i].radius + max_radius, hits);
            for (std::size_t j : hits) {
                if (j > i && distance(cover.center(i), cover.center(j)) < balls[i].radius + balls[j].radius) {
                    upper[i].push_back(static_cast<std::uint32_t>(j));
                }
            }
        });
    } else {
        parallel_for(0, k, [&](std::size_t i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                if (distance(cover.center(i), cover.center(j)) < balls[i].radius + balls[j].radius) {
                    upper[i].push_back(static_cast<std::uint32_t>(j));
                }
            }
        });
    }

    SkeletonGraph graph;
    graph.node_count = k;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::uint32_t j : upper[i]) graph.edges.emplace_back(static_cast<std::uint32_t>(i), j);
    }
    return graph;
}

ClassCover subsample_witness_cover(const ClassCover& cover, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k > cover.size()) {
        throw InputError("subsample size " + std::to_string(k) + " outside [1, " +
                         std::to_string(cover.size()) + "]");
    }
    std::vector<Ball> picked;
    picked.reserve(k);
    std::mt19937_64 rng(seed);
    std::sample(cover.balls().begin(), cover.balls().end(), std::back_inserter(picked), k, rng);
    CoverMetadata metadata = cover.metadata();
    metadata.subsampled = true;
    metadata.seed = seed;
    return ClassCover(cover.source_ptr(), cover.class_label(), std::move(picked), std::move(metadata));
}

}  // namespace topocover
