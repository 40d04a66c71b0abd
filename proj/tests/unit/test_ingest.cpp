#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "topocover/errors.hpp"
#include "topocover/ingest.hpp"

using namespace topocover;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("topocover_test_" + name);
    std::ofstream(p) << text;
    return p;
}

std::string message_of(const DatasetDescriptor& d) {
    try {
        load_csv(d);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("load csv with header, names and column selection") {
    DatasetDescriptor d;
    d.path = write_temp("basic.csv", "a,label,b,c\n1,0,2,3\n4,1,5,6\n");
    d.label_column = std::string("label");
    d.feature_columns = std::vector<ColumnRef>{std::string("c"), std::size_t{0}};
    const auto out = load_csv(d);
    CHECK(out.cloud.size() == 2);
    CHECK(out.cloud.dimension() == 2);
    CHECK(out.feature_names == std::vector<std::string>{"c", "a"});
    CHECK(out.cloud.point(1)[0] == 6.0);
    CHECK(out.cloud.point(1)[1] == 4.0);
    CHECK(out.cloud.label(1) == 1);
    CHECK(out.rows_read == 2);
}

TEST_CASE("malformed rows are reported with their line") {
    DatasetDescriptor d;
    d.path = write_temp("bad.csv", "label,x\n0,1\n1,abc\n");
    CHECK(message_of(d).find("line 3") != std::string::npos);
    d.path = write_temp("short.csv", "label,x\n0,1\n1\n");
    CHECK(message_of(d).find("line 3") != std::string::npos);
    d.path = write_temp("label.csv", "label,x\n0,1\n2,1\n");
    CHECK(message_of(d).find("2") != std::string::npos);
    d.path = "/nonexistent/file.csv";
    CHECK_THROWS_AS(load_csv(d), InputError);
}

TEST_CASE("row limit draws a seeded reservoir but validates every row") {
    std::ostringstream text;
    text << "label,x\n";
    for (int i = 0; i < 1000; ++i) text << i % 2 << ',' << i << '\n';
    DatasetDescriptor d;
    d.path = write_temp("big.csv", text.str());
    d.row_limit = 50;
    d.seed = 4;
    const auto a = load_csv(d);
    const auto b = load_csv(d);
    CHECK(a.cloud.size() == 50);
    CHECK(a.rows_read == 1000);
    CHECK(a.cloud == b.cloud);
    d.seed = 5;
    CHECK_FALSE(load_csv(d).cloud == a.cloud);

    d.path = write_temp("late_error.csv", text.str() + "1,oops\n");
    d.row_limit = 5;
    CHECK(message_of(d).find("line 1002") != std::string::npos);
}

TEST_CASE("headerless file with normalization") {
    DatasetDescriptor d;
    d.path = write_temp("noheader.csv", "0,1,7\n1,3,7\n0,5,7\n");
    d.has_header = false;
    d.normalization = Normalization::ZScore;
    const auto out = load_csv(d);
    CHECK(out.cloud.point(0)[0] == doctest::Approx(-std::sqrt(1.5)));
    CHECK(out.cloud.point(0)[1] == 0.0);
    CHECK(out.warnings.size() == 1);
}

TEST_CASE("z-score gives zero mean and unit variance") {
    const auto cloud = oracle::random_cloud(500, 4, 8, 10.0);
    const auto z = zscore(cloud);
    for (std::size_t k = 0; k < 4; ++k) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) mean += z.point(i)[k];
        mean /= static_cast<double>(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) var += (z.point(i)[k] - mean) * (z.point(i)[k] - mean);
        var /= static_cast<double>(z.size());
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("split partitions the cloud and preserves class proportions") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto cloud = oracle::random_cloud(100 + seed, 2, seed);
        for (bool stratified : {true, false}) {
            const auto [train, test] = train_test_split(cloud, 0.85, seed, stratified);
            CHECK(train.size() + test.size() == cloud.size());
            std::multiset<std::vector<double>> all, parts;
            for (std::size_t i = 0; i < cloud.size(); ++i) all.emplace(cloud.point(i).begin(), cloud.point(i).end());
            for (const auto* part : {&train, &test}) {
                for (std::size_t i = 0; i < part->size(); ++i) {
                    parts.emplace(part->point(i).begin(), part->point(i).end());
                }
            }
            CHECK(all == parts);
            if (stratified) {
                for (Label c : {Label{0}, Label{1}}) {
                    const double expect = 0.85 * static_cast<double>(cloud.count(c));
                    CHECK(std::abs(static_cast<double>(train.count(c)) - expect) <= 1.0);
                }
            }
        }
        const auto again = train_test_split(cloud, 0.85, seed);
        CHECK(again.first == train_test_split(cloud, 0.85, seed).first);
    }
}

TEST_CASE("split errors") {
    const LabeledPointCloud tiny(1, {0.0, 1.0, 2.0}, {0, 1, 1});
    CHECK_THROWS_AS(train_test_split(tiny, 0.5, 1), InputError);
    const auto cloud = oracle::random_cloud(10, 1, 1);
    CHECK_THROWS_AS(train_test_split(cloud, 1.0, 1), InputError);
    CHECK_THROWS_AS(train_test_split(cloud, 0.0, 1), InputError);
}

TEST_CASE("labeled csv round trip") {
    const auto cloud = oracle::random_cloud(20, 3, 2);
    const auto path = fs::temp_directory_path() / "topocover_test_roundtrip.csv";
    write_labeled_csv(path, cloud);
    DatasetDescriptor d;
    d.path = path;
    CHECK(load_csv(d).cloud == cloud);
}
