#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "topocover/errors.hpp"
#include "topocover/kdtree.hpp"
#include "topocover/parallel.hpp"

using namespace topocover;

TEST_CASE("distance is euclidean") {
    const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
    CHECK(distance(a, b) == 5.0);
    CHECK(squared_distance(a, b) == 25.0);
}

TEST_CASE("point cloud validates its shape and labels") {
    CHECK_THROWS_AS(LabeledPointCloud(2, {1.0, 2.0, 3.0}, {0, 1}), InputError);
    CHECK_THROWS_AS(LabeledPointCloud(1, {1.0}, {2}), InputError);
    CHECK_THROWS_AS(LabeledPointCloud(0, {}, {}), InputError);
    const LabeledPointCloud c(2, {0, 0, 1, 1, 2, 2}, {0, 1, 1});
    CHECK(c.size() == 3);
    CHECK(c.count(1) == 2);
    CHECK(c.indices_of(1) == std::vector<std::size_t>{1, 2});
    const std::vector<std::size_t> idx{2, 0};
    const auto s = c.subset(idx);
    CHECK(s.point(0)[0] == 2.0);
    CHECK(s.label(1) == 0);
}

TEST_CASE("k-d tree matches a linear scan") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const std::size_t dim = 1 + seed % 4;
        const auto cloud = oracle::random_cloud(700, dim, seed, seed % 2 ? 1.0 : 3.0, seed % 2 == 0);
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < cloud.size(); i += 2) ids.push_back(i);
        const KdTree tree(cloud.coords(), dim, ids, 4);
        const auto queries = oracle::random_cloud(50, dim, seed + 100, 3.0);
        for (std::size_t q = 0; q < queries.size(); ++q) {
            const auto x = queries.point(q);
            std::size_t best = ids[0];
            double bd = distance(x, cloud.point(best));
            for (auto id : ids) {
                const double d = distance(x, cloud.point(id));
                if (d < bd) {
                    bd = d;
                    best = id;
                }
            }
            const auto nn = tree.nearest(x);
            CHECK(nn.id == best);
            CHECK(nn.distance == bd);

            const double radius = 0.8;
            std::vector<std::size_t> expect;
            for (auto id : ids) {
                if (distance(x, cloud.point(id)) < radius) expect.push_back(id);
            }
            std::vector<std::size_t> got;
            tree.radius_search(x, radius, got);
            CHECK(got == expect);
        }
    }
}

TEST_CASE("k-d tree radius search is strict") {
    const std::vector<double> coords{0.0, 1.0, 2.0};
    const KdTree tree(coords, 1, {0, 1, 2});
    std::vector<std::size_t> out;
    const std::vector<double> q{0.0};
    tree.radius_search(q, 1.0, out);
    CHECK(out == std::vector<std::size_t>{0});
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    set_thread_count(4);
    std::vector<int> hits(1000, 0);
    parallel_for(0, hits.size(), [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_AS(parallel_for(0, 100,
                                 [](std::size_t i) {
                                     if (i == 57) throw InputError("boom");
                                 }),
                    InputError);
    set_thread_count(0);
}
