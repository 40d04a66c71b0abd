#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "topocover/neuralnet.hpp"

namespace topocover::nn {

/// Every vector of {-1, +1}^count exactly once; bit i of the pattern index
/// set means w_i = -1.
std::vector<std::vector<int>> sign_patterns(std::size_t count = 5);

/// sum_i w_i x_i - x_last, with x.size() == w.size() + 1.
double phi(std::span<const double> x, std::span<const int> w);

enum class DeltaMode {
    Exact,    // indicator of phi == 0
    Learned,  // trained scalar subnet with a logistic head
};

struct CustomNetSpec {
    std::vector<std::vector<int>> sign_patterns = nn::sign_patterns(5);
    DeltaMode delta_mode = DeltaMode::Exact;

    /// Throws InputError unless the patterns enumerate {-1,+1}^m exactly once.
    void validate() const;
};

/// C(x) = max_i delta(phi(x; w_i)).
///
/// The projection row i holds (w_i, -1), so projection * x gives every phi at
/// once. A learned projection replaces these rows with free weights.
class CustomNet {
public:
    CustomNet(Eigen::MatrixXd projection, DeltaMode mode, std::optional<MlpModel> delta);

    static Eigen::MatrixXd preset_projection(const std::vector<std::vector<int>>& patterns);

    DeltaMode mode() const noexcept { return mode_; }
    const Eigen::MatrixXd& projection() const noexcept { return projection_; }
    Eigen::MatrixXd& mutable_projection() noexcept { return projection_; }
    const MlpModel& delta() const;
    MlpModel& mutable_delta();
    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(projection_.cols()); }

    /// Per-pattern delta values (patterns x batch) for columns of x.
    Eigen::MatrixXd pattern_scores(const Eigen::MatrixXd& x) const;
    /// C(x) per column of x.
    Eigen::RowVectorXd score(const Eigen::MatrixXd& x) const;
    std::vector<Label> predict(const Eigen::MatrixXd& x) const;
    double accuracy(const LabeledPointCloud& data) const;

private:
    Eigen::MatrixXd projection_;
    DeltaMode mode_;
    std::optional<MlpModel> delta_;
};

/// Exact mode ignores `delta`; Learned mode throws StateError without one.
CustomNet build_custom_net(const CustomNetSpec& spec, const MlpModel* delta = nullptr);

/// End-to-end binary cross-entropy training of C through the max. With
/// train_projection false the projection stays fixed.
void fit_custom_net(CustomNet& net, const LabeledPointCloud& train, const TrainConfig& config, std::uint64_t seed,
                    bool train_projection, int replication = 0);

/// Scalar training set for the delta subnet: phi of every training roll under
/// every pattern, labelled 1 iff phi == 0.
LabeledPointCloud delta_training_set(const LabeledPointCloud& rolls, const std::vector<std::vector<int>>& patterns);

enum class Protocol {
    SeparateTraining,  // preset W, delta subnet trained alone on phi values, then glued
    ArchitectureOnly,  // nothing preset, trained end to end
    JointTraining,     // preset W kept fixed, delta subnet trained end to end
    ExactDelta,        // preset W, indicator delta; no training
};

std::string_view to_string(Protocol protocol) noexcept;
Protocol protocol_from_string(std::string_view name);

struct ProtocolConfig {
    std::size_t replications = 20;
    double train_fraction = 0.85;
    std::uint64_t seed = 1;
    std::vector<std::size_t> delta_dims{64, 16, 4, 1};
    TrainConfig delta_training;    // SeparateTraining subnet fit
    TrainConfig network_training;  // ArchitectureOnly / JointTraining end-to-end fit
};

/// Test accuracy per replication over seeded stratified splits of `rolls`.
AccuracyStats run_protocol(Protocol protocol, const LabeledPointCloud& rolls, const ProtocolConfig& config);

}  // namespace topocover::nn
