#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "topocover/errors.hpp"
#include "topocover/experiments.hpp"

using namespace topocover;
using namespace topocover::experiments;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunOptions in_dir(const std::string& name) {
    RunOptions o;
    o.out_dir = fs::temp_directory_path() / ("topocover_exp_" + name);
    fs::remove_all(o.out_dir);
    o.quiet = true;
    return o;
}

}  // namespace

TEST_CASE("unknown keys and bad values fail before computation") {
    CHECK_THROWS_AS(resolve_config(Kind::BettiTable, {{"datasets", {{{"mathdice", "3"}}}}, {"kmx", 3}}), InputError);
    CHECK_THROWS_AS(resolve_config(Kind::BettiTable, {{"datasets", json::array()}}), InputError);
    CHECK_THROWS_AS(resolve_config(Kind::BettiTable, {{"dataset", {{"mathdice", "9"}}}}), InputError);
    CHECK_THROWS_AS(resolve_config(Kind::DnnTable, {{"rows", {{{"dataset", {{"mathdice", "3"}}}, {"layers", {4, 3}}}}}}),
                    InputError);
    CHECK_THROWS_AS(resolve_config(Kind::CoverClassifier, {{"dataset", {{"mathdice", "3"}}}, {"train_fraction", 1.5}}),
                    InputError);
    CHECK_THROWS_AS(resolve_config(Kind::CustomNet, {{"protocols", {"nope"}}}), InputError);
    CHECK_THROWS_AS(resolve_config(Kind::ExportSkeleton, {{"dataset", {{"mathdice", "3"}}}, {"format", "svg"}}),
                    InputError);
    CHECK_THROWS_AS(resolve_config(Kind::LayerTopology, {{"experiment", "betti"}}), InputError);
    CHECK_THROWS_AS(resolve_config(Kind::CoverClassifier,
                                   {{"dataset", {{"csv", {{"path", "x.csv"}}}, {"mathdice", "3"}}}}),
                    InputError);
}

TEST_CASE("resolved config carries defaults and the seed override") {
    RunOptions o;
    o.seed_override = 42;
    const auto r = resolve_config(Kind::DnnTable,
                                  {{"rows", {{{"dataset", {{"mathdice", "3"}}}, {"layers", {4, 2}}}}},
                                   {"train", {{"epochs", 3}}}},
                                  o);
    CHECK(r["seed"] == 42);
    CHECK(r["rows"][0]["train"]["epochs"] == 3);
    CHECK(r["rows"][0]["train"]["batch_size"] == 64);
}

TEST_CASE("gaussian blobs alternate labels and separate along the first axis") {
    const auto g = gaussian_blobs(3, 100, 20.0, 1);
    CHECK(g.size() == 200);
    CHECK(g.count(1) == 100);
    CHECK(g.label(0) == 0);
    CHECK(g.label(1) == 1);
    double m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) (g.label(i) ? m1 : m0) += g.point(i)[0] / 100.0;
    CHECK(m1 - m0 == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("betti run writes reports and reruns byte-identically") {
    const json cfg = {{"datasets", {{{"mathdice", "3"}}}}, {"classes", {0, 1}}, {"kmax", 2}};
    const auto a = in_dir("betti_a");
    const auto b = in_dir("betti_b");
    const auto report = run(Kind::BettiTable, cfg, a);
    run(Kind::BettiTable, cfg, b);
    CHECK(report["results"][1]["betti"] == json({1, 12, 0}));
    CHECK(report["config"]["kmax"] == 2);
    CHECK(report["version"] == std::string(io::library_version()));
    for (const char* f : {"report.json", "betti.csv"}) CHECK(slurp(a.out_dir / f) == slurp(b.out_dir / f));
    CHECK(fs::exists(a.out_dir / "run_meta.json"));
    CHECK(slurp(a.out_dir / "betti.csv").find("config=") != std::string::npos);
}

TEST_CASE("classify, custom-net, nn, layer-topology and export run end to end on small inputs") {
    const json three = {{"mathdice", "3"}};
    auto o = in_dir("classify");
    auto r = run(Kind::CoverClassifier, {{"dataset", three}, {"replications", 3}}, o);
    CHECK(r["results"]["replications"].size() == 3);
    CHECK(fs::exists(o.out_dir / "classify_aggregate.csv"));

    o = in_dir("classify_sep");
    r = run(Kind::CoverClassifier,
            {{"dataset", {{"gaussian", {{"dimension", 2}, {"per_class", 200}, {"separation", 50.0}}}}},
             {"replications", 2},
             {"test_size", 30}},
            o);
    CHECK(r["results"]["aggregate"]["total_accuracy"]["mean"] == 1.0);

    o = in_dir("custom");
    r = run(Kind::CustomNet, {{"dataset", three}, {"protocols", {"exact-delta"}}, {"replications", 2}}, o);
    CHECK(r["results"][0]["mean"] == 1.0);

    o = in_dir("nn");
    r = run(Kind::DnnTable,
            {{"rows", {{{"dataset", three}, {"layers", {4, 2}}}}}, {"train", {{"epochs", 2}, {"replications", 2}}}},
            o);
    CHECK(r["results"][0]["accuracies"].size() == 2);

    o = in_dir("layers");
    r = run(Kind::LayerTopology,
            {{"dataset", three}, {"layers", {8, 2}}, {"kmax", 1}, {"train", {{"epochs", 2}, {"replications", 2}}}}, o);
    CHECK(r["results"]["layers"].size() == 3);
    CHECK(r["results"]["layers"][0]["median_total"] == 13.0);

    o = in_dir("export");
    r = run(Kind::ExportSkeleton, {{"dataset", three}, {"format", "dot"}}, o);
    CHECK(r["results"]["nodes"] == 66);
    CHECK(fs::exists(o.out_dir / "skeleton.dot"));
    CHECK(fs::exists(o.out_dir / "cover.json"));

    o = in_dir("dice");
    r = run(Kind::MathDice, {{"dice", "4"}}, o);
    CHECK(r["results"]["rolls"] == 2592);
}
