#include <map>
#include <set>

#include "doctest.h"
#include "topocover/errors.hpp"
#include "topocover/mathdice.hpp"

using namespace topocover;
using namespace topocover::mathdice;

namespace {

// Subset-sum style DP over reachable signed sums, tracking the most dice used.
int dp_oracle(std::span<const int> values) {
    const int target = values.back();
    std::map<int, int> best{{0, 0}};  // sum -> max dice used
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        std::map<int, int> next = best;
        for (auto [s, used] : best) {
            for (int sign : {1, -1}) {
                const int t = s + sign * values[i];
                auto it = next.find(t);
                if (it == next.end() || it->second < used + 1) next[t] = used + 1;
            }
        }
        best = std::move(next);
    }
    auto it = best.find(target);
    return it == best.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("roll counts of the presets") {
    CHECK(DiceConfig::preset(3).roll_count() == 432);
    CHECK(DiceConfig::preset(4).roll_count() == 2592);
    CHECK(DiceConfig::preset(5).roll_count() == 15552);
    CHECK(DiceConfig::preset(6).roll_count() == 23328);
    CHECK(DiceConfig::named_preset("5-mixed").roll_count() == 7776);
    CHECK_THROWS_AS(DiceConfig::preset(2), InputError);
    CHECK_THROWS_AS(DiceConfig::named_preset("7"), InputError);
}

TEST_CASE("solver on hand-checked rolls") {
    CHECK(solve_roll(std::vector<int>{1, 1, 2}) == 2);
    CHECK(label_roll(std::vector<int>{1, 1, 2}) == 1);
    CHECK(solve_roll(std::vector<int>{3, 5, 2}) == 2);
    CHECK(solve_roll(std::vector<int>{1, 1, 12}) == 0);
    CHECK(solve_roll(std::vector<int>{6, 6, 12}) == 2);
    CHECK(solve_roll(std::vector<int>{2, 5, 2}) == 1);
    CHECK(label_roll(std::vector<int>{2, 5, 2}) == 0);
}

TEST_CASE("solver agrees with the DP oracle on every n=4 roll") {
    const auto data = enumerate_dataset(DiceConfig::preset(4));
    for (std::size_t i = 0; i < data.cloud.size(); ++i) {
        std::vector<int> roll;
        for (double v : data.cloud.point(i)) roll.push_back(static_cast<int>(v));
        const int oracle = dp_oracle(roll);
        CHECK(solve_roll(roll) == oracle);
        CHECK(data.cloud.label(i) == (oracle == 3 ? 1 : 0));
    }
}

TEST_CASE("enumeration order, uniqueness and the target-last convention") {
    const auto data = enumerate_dataset(DiceConfig::preset(3));
    REQUIRE(data.cloud.size() == 432);
    CHECK(data.cloud.dimension() == 3);
    CHECK(std::vector<double>(data.cloud.point(0).begin(), data.cloud.point(0).end()) ==
          std::vector<double>{1, 1, 1});
    CHECK(std::vector<double>(data.cloud.point(1).begin(), data.cloud.point(1).end()) ==
          std::vector<double>{1, 1, 2});
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < data.cloud.size(); ++i) {
        seen.emplace(data.cloud.point(i).begin(), data.cloud.point(i).end());
        CHECK(data.cloud.point(i)[2] <= 12);
    }
    CHECK(seen.size() == 432);
    CHECK(data.cloud.count(1) == 66);
}

TEST_CASE("enumeration budget") {
    CHECK_THROWS_AS(enumerate_dataset(DiceConfig::preset(6), 1000), ResourceError);
    CHECK_THROWS_AS(enumerate_dataset(DiceConfig{{{1, 2}}}), InputError);
}
