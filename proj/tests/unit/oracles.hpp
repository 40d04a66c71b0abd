#pragma once

// Slow, obviously-correct reference implementations used by the tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "topocover/cover.hpp"
#include "topocover/homology.hpp"
#include "topocover/point_cloud.hpp"

namespace oracle {

inline topocover::LabeledPointCloud random_cloud(std::size_t n, std::size_t dim, std::uint64_t seed,
                                                 double spread = 1.0, bool integer = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-spread, spread);
    std::uniform_int_distribution<int> ui(0, static_cast<int>(spread));
    std::vector<double> coords;
    std::vector<topocover::Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < dim; ++k) coords.push_back(integer ? ui(rng) : u(rng));
        labels.push_back(static_cast<topocover::Label>(i % 2));
    }
    return {dim, std::move(coords), std::move(labels)};
}

// Rank over GF(2) by dense Gaussian elimination.
inline std::size_t dense_rank_gf2(std::vector<std::vector<std::uint8_t>> m) {
    std::size_t rank = 0;
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        while (pivot < rows && !m[pivot][c]) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[pivot], m[rank]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r != rank && m[r][c]) {
                for (std::size_t k = 0; k < cols; ++k) m[r][k] ^= m[rank][k];
            }
        }
        ++rank;
    }
    return rank;
}

inline std::size_t dense_boundary_rank(const topocover::SimplicialComplex& c, int k) {
    std::vector<std::vector<std::uint8_t>> m(c.count(k - 1), std::vector<std::uint8_t>(c.count(k), 0));
    for (std::size_t j = 0; j < c.count(k); ++j) {
        auto s = c.simplex(k, j);
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
            std::vector<std::uint32_t> face;
            for (std::size_t t = 0; t < s.size(); ++t) {
                if (t != drop) face.push_back(s[t]);
            }
            m[*c.find(k - 1, face)][j] = 1;
        }
    }
    return dense_rank_gf2(std::move(m));
}

// All cliques of size <= max_dim + 1 by subset enumeration.
inline std::vector<std::set<std::vector<std::uint32_t>>> brute_cliques(const topocover::SkeletonGraph& g,
                                                                         int max_dim) {
    const std::size_t n = g.node_count;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (auto [a, b] : g.edges) adj[a][b] = adj[b][a] = true;
    std::vector<std::set<std::vector<std::uint32_t>>> out(static_cast<std::size_t>(max_dim) + 1);
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<std::uint32_t> verts;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (mask >> v & 1) verts.push_back(v);
        }
        if (verts.size() > static_cast<std::size_t>(max_dim) + 1) continue;
        bool clique = true;
        for (std::size_t a = 0; a < verts.size() && clique; ++a) {
            for (std::size_t b = a + 1; b < verts.size(); ++b) {
                if (!adj[verts[a]][verts[b]]) {
                    clique = false;
                    break;
                }
            }
        }
        if (clique) out[verts.size() - 1].insert(verts);
    }
    return out;
}

inline topocover::SkeletonGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    topocover::SkeletonGraph g;
    g.node_count = n;
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            if (coin(rng)) g.edges.emplace_back(a, b);
        }
    }
    return g;
}

// Minimum distance to any opposite-class point by linear scan.
inline double brute_radius(const topocover::LabeledPointCloud& c, std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c.label(j) != c.label(i)) best = std::min(best, topocover::distance(c.point(i), c.point(j)));
    }
    return best;
}

}  // namespace oracle
