#include <set>

#include "doctest.h"
#include "topocover/custom_net.hpp"
#include "topocover/errors.hpp"
#include "topocover/mathdice.hpp"

using namespace topocover;
using namespace topocover::nn;

TEST_CASE("sign patterns enumerate the hypercube") {
    const auto p = sign_patterns(5);
    CHECK(p.size() == 32);
    std::set<std::vector<int>> unique(p.begin(), p.end());
    CHECK(unique.size() == 32);
    CHECK(p[0] == std::vector<int>{1, 1, 1, 1, 1});
    CHECK(p[1] == std::vector<int>{-1, 1, 1, 1, 1});
    CustomNetSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.sign_patterns.pop_back();
    CHECK_THROWS_AS(spec.validate(), InputError);
}

TEST_CASE("phi is the signed sum minus the target") {
    const std::vector<double> x{3, 5, 2};
    CHECK(phi(x, std::vector<int>{-1, 1}) == 0.0);
    CHECK(phi(x, std::vector<int>{1, 1}) == 6.0);
}

TEST_CASE("exact network reproduces the labels of the 3-dice game") {
    const auto rolls = mathdice::enumerate_dataset(mathdice::DiceConfig::preset(3)).cloud;
    CustomNetSpec spec;
    spec.sign_patterns = sign_patterns(2);
    const auto net = build_custom_net(spec);
    CHECK(net.accuracy(rolls) == 1.0);
    const Eigen::MatrixXd proj = CustomNet::preset_projection(spec.sign_patterns);
    CHECK(proj.rows() == 4);
    CHECK(proj(0, 2) == -1.0);
}

TEST_CASE("learned mode needs a delta subnet") {
    CustomNetSpec spec;
    spec.delta_mode = DeltaMode::Learned;
    CHECK_THROWS_AS(build_custom_net(spec), StateError);
    const MlpModel delta(1, {4, 1}, Head::Logistic, 1);
    CHECK_NOTHROW(build_custom_net(spec, &delta));
    const MlpModel wrong(1, {4, 2}, Head::Softmax2, 1);
    CHECK_THROWS(build_custom_net(spec, &wrong));
}

TEST_CASE("delta training set labels zeros of phi") {
    const LabeledPointCloud rolls(3, {3, 5, 2, 1, 1, 12}, {1, 0});
    const auto set = delta_training_set(rolls, sign_patterns(2));
    CHECK(set.size() == 8);
    CHECK(set.dimension() == 1);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK((set.label(i) == 1) == (set.point(i)[0] == 0.0));
        ones += set.label(i);
    }
    CHECK(ones == 1);
}

TEST_CASE("end-to-end fit moves only what it is allowed to") {
    const auto rolls = mathdice::enumerate_dataset(mathdice::DiceConfig::preset(3)).cloud;
    CustomNetSpec spec;
    spec.sign_patterns = sign_patterns(2);
    spec.delta_mode = DeltaMode::Learned;
    const MlpModel delta(1, {6, 1}, Head::Logistic, 5);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 1e-3;

    auto frozen = build_custom_net(spec, &delta);
    const Eigen::MatrixXd preset = frozen.projection();
    fit_custom_net(frozen, rolls, cfg, 1, false);
    CHECK(frozen.projection() == preset);
    CHECK(frozen.delta().layers()[0].weights != delta.layers()[0].weights);

    auto free = build_custom_net(spec, &delta);
    fit_custom_net(free, rolls, cfg, 1, true);
    CHECK(free.projection() != preset);
}

TEST_CASE("protocol names round-trip and exact protocol is perfect") {
    for (auto p : {Protocol::SeparateTraining, Protocol::ArchitectureOnly, Protocol::JointTraining,
                   Protocol::ExactDelta}) {
        CHECK(protocol_from_string(to_string(p)) == p);
    }
    CHECK_THROWS_AS(protocol_from_string("bogus"), InputError);
    const auto rolls = mathdice::enumerate_dataset(mathdice::DiceConfig::preset(4)).cloud;
    ProtocolConfig cfg;
    cfg.replications = 3;
    const auto stats = run_protocol(Protocol::ExactDelta, rolls, cfg);
    CHECK(stats.mean == 1.0);
    CHECK(stats.min == 1.0);
}
