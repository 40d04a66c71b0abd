#include <algorithm>
#include <memory>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "topocover/errors.hpp"

using namespace topocover;

namespace {

CoverOptions brute() {
    CoverOptions o;
    o.use_spatial_index = false;
    return o;
}

CoverOptions indexed() {
    CoverOptions o;
    o.spatial_index_threshold = 0;
    return o;
}

}  // namespace

TEST_CASE("avoiding radius is the distance to the nearest opposite point") {
    const std::vector<double> x{0.0, 0.0};
    const std::vector<double> opp{3.0, 4.0, 1.0, 0.0, -2.0, 0.0};
    CHECK(max_avoiding_radius(x, opp) == 1.0);
    const std::vector<double> same{0.0, 0.0};
    CHECK(max_avoiding_radius(x, same) == 0.0);
}

TEST_CASE("radii, digraph and skeleton agree with linear-scan oracles on both code paths") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto cloud = oracle::random_cloud(300, 3, seed, seed % 2 ? 1.0 : 4.0, seed % 2 == 0);
        for (Label label : {Label{0}, Label{1}}) {
            const auto idx = cloud.indices_of(label);
            const auto r_b = avoiding_radii(cloud, label, brute());
            const auto r_k = avoiding_radii(cloud, label, indexed());
            REQUIRE(r_b.size() == idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                CHECK(r_b[i] == oracle::brute_radius(cloud, idx[i]));
                CHECK(r_k[i] == r_b[i]);
            }
            const auto g_b = build_containment_digraph(cloud, label, r_b, brute());
            const auto g_k = build_containment_digraph(cloud, label, r_b, indexed());
            REQUIRE(g_b.node_count() == idx.size());
            std::size_t edges = 0;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                std::vector<std::uint32_t> expect;
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    if (i != j && distance(cloud.point(idx[i]), cloud.point(idx[j])) < r_b[i]) {
                        expect.push_back(static_cast<std::uint32_t>(j));
                    }
                }
                edges += expect.size();
                const auto ob = g_b.out_edges(i);
                const auto ok = g_k.out_edges(i);
                CHECK(std::vector<std::uint32_t>(ob.begin(), ob.end()) == expect);
                CHECK(std::vector<std::uint32_t>(ok.begin(), ok.end()) == expect);
            }
            CHECK(g_b.edge_count() == edges);

            auto shared = std::make_shared<const LabeledPointCloud>(cloud);
            const auto cover = build_class_cover(shared, label, brute());
            const auto cover_k = build_class_cover(shared, label, indexed());
            CHECK(cover.balls() == cover_k.balls());
            const auto sk_b = build_one_skeleton(cover, brute());
            const auto sk_k = build_one_skeleton(cover, indexed());
            std::vector<std::pair<std::uint32_t, std::uint32_t>> expect;
            for (std::uint32_t a = 0; a < cover.size(); ++a) {
                for (std::uint32_t b = a + 1; b < cover.size(); ++b) {
                    if (distance(cover.center(a), cover.center(b)) <
                        cover.balls()[a].radius + cover.balls()[b].radius) {
                        expect.emplace_back(a, b);
                    }
                }
            }
            CHECK(sk_b.node_count == cover.size());
            CHECK(sk_b.edges == expect);
            CHECK(sk_k.edges == expect);
        }
    }
}

TEST_CASE("greedy selection dominates the digraph") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto cloud = oracle::random_cloud(200, 2, seed);
        const auto radii = avoiding_radii(cloud, 1);
        const auto g = build_containment_digraph(cloud, 1, radii);
        const auto chosen = greedy_dominating_set(g);
        std::vector<bool> covered(g.node_count(), false);
        std::set<std::size_t> unique(chosen.begin(), chosen.end());
        CHECK(unique.size() == chosen.size());
        for (auto c : chosen) {
            covered[c] = true;
            for (auto t : g.out_edges(c)) covered[t] = true;
        }
        CHECK(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }));
    }
}

TEST_CASE("greedy picks the largest neighbourhood first, lowest index on ties") {
    // 0 -> {1}, 1 -> {}, 2 -> {0, 1, 3}, 3 -> {4}, 4 -> {}
    const auto g = ContainmentDigraph::from_adjacency({{1}, {}, {0, 1, 3}, {4}, {}});
    CHECK(greedy_dominating_set(g) == std::vector<std::size_t>{2, 3});
    const auto tie = ContainmentDigraph::from_adjacency({{1}, {0}});
    CHECK(greedy_dominating_set(tie) == std::vector<std::size_t>{0});
}

TEST_CASE("every class point lies inside some witness ball") {
    const auto cloud = std::make_shared<const LabeledPointCloud>(oracle::random_cloud(400, 3, 9));
    for (Label label : {Label{0}, Label{1}}) {
        const auto cover = build_class_cover(cloud, label);
        for (auto i : cloud->indices_of(label)) {
            bool inside = false;
            for (std::size_t b = 0; b < cover.size() && !inside; ++b) {
                inside = cover.balls()[b].center_index == i ||
                         distance(cloud->point(i), cover.center(b)) < cover.balls()[b].radius;
            }
            CHECK(inside);
        }
        for (std::size_t b = 0; b < cover.size(); ++b) {
            for (std::size_t j = 0; j < cloud->size(); ++j) {
                if (cloud->label(j) != label) CHECK(distance(cloud->point(j), cover.center(b)) >= cover.balls()[b].radius);
            }
        }
    }
}

TEST_CASE("coincident opposite points are dropped and recorded") {
    auto cloud = std::make_shared<const LabeledPointCloud>(
        LabeledPointCloud(1, {0.0, 0.0, 5.0, 10.0}, {1, 0, 1, 0}));
    const auto cover = build_class_cover(cloud, 1);
    CHECK(cover.metadata().dropped_points == std::vector<std::size_t>{0});
    REQUIRE(cover.size() == 1);
    CHECK(cover.balls()[0].center_index == 2);
    CHECK(cover.balls()[0].radius == 5.0);
}

TEST_CASE("cover rejects non-positive radii") {
    auto cloud = std::make_shared<const LabeledPointCloud>(LabeledPointCloud(1, {0.0, 1.0}, {1, 0}));
    CHECK_THROWS_AS(ClassCover(cloud, 1, {Ball{0, 0.0}}), InputError);
}

TEST_CASE("two far-apart blobs give a disconnected skeleton") {
    std::vector<double> coords;
    std::vector<Label> labels;
    for (int blob : {0, 1}) {
        for (int i = 0; i < 5; ++i) {
            coords.push_back(blob * 100.0 + i * 0.1);
            labels.push_back(1);
        }
    }
    coords.push_back(50.0);
    labels.push_back(0);
    auto cloud = std::make_shared<const LabeledPointCloud>(LabeledPointCloud(1, coords, labels));
    const auto cover = build_class_cover(cloud, 1);
    const auto sk = build_one_skeleton(cover);
    for (auto [a, b] : sk.edges) {
        CHECK((cover.center(a)[0] < 50.0) == (cover.center(b)[0] < 50.0));
    }
}

TEST_CASE("witness subsample keeps order and is seed-determined") {
    auto cloud = std::make_shared<const LabeledPointCloud>(oracle::random_cloud(600, 2, 4));
    const auto cover = build_class_cover(cloud, 1);
    REQUIRE(cover.size() > 10);
    const auto a = subsample_witness_cover(cover, 10, 7);
    const auto b = subsample_witness_cover(cover, 10, 7);
    CHECK(a.size() == 10);
    CHECK(a.balls() == b.balls());
    CHECK(a.metadata().subsampled);
    CHECK(a.metadata().seed == std::optional<std::uint64_t>{7});
    CHECK(std::is_sorted(a.balls().begin(), a.balls().end(), [&](const Ball& x, const Ball& y) {
        const auto px = std::find(cover.balls().begin(), cover.balls().end(), x);
        const auto py = std::find(cover.balls().begin(), cover.balls().end(), y);
        return px < py;
    }));
}

TEST_CASE("implicit greedy selects the same witnesses as the stored digraph") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto cloud = std::make_shared<const LabeledPointCloud>(oracle::random_cloud(500, 1 + seed, seed));
        CoverOptions implicit;
        implicit.max_digraph_edges = seed == 4 ? 1000 : 0;
        for (Label label : {Label{0}, Label{1}}) {
            CHECK(build_class_cover(cloud, label).balls() == build_class_cover(cloud, label, implicit).balls());
        }
    }
}
