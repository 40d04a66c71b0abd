#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "topocover/point_cloud.hpp"

namespace topocover::nn {

enum class Head {
    Softmax2,  // two logits, softmax, cross-entropy
    Logistic,  // one logit, sigmoid, binary cross-entropy
};

std::string_view to_string(Head head) noexcept;
Head head_from_string(std::string_view name);

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;
};

/// Feedforward network: layer_dims.size() affine blocks, ReLU after every block
/// but the last. The last block produces the logits consumed by the head.
///
/// For layer_dims (8, 4, 2): 8 -> ReLU -> 4 -> ReLU -> 2 -> softmax.
class MlpModel {
public:
    /// Glorot-uniform weights, zero biases.
    MlpModel(std::size_t input_dim, const std::vector<std::size_t>& layer_dims, Head head, std::uint64_t seed);
    MlpModel(std::size_t input_dim, std::vector<DenseLayer> layers, Head head);

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t depth() const noexcept { return layers_.size(); }
    std::vector<std::size_t> layer_dims() const;
    std::size_t parameter_count() const noexcept;
    Head head() const noexcept { return head_; }

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& mutable_layers() noexcept { return layers_; }

    /// Applies blocks 1..k to the columns of `inputs` (input_dim x batch).
    /// k = 0 returns the inputs; k = depth() returns the logits.
    Eigen::MatrixXd forward_to_layer(const Eigen::MatrixXd& inputs, std::size_t k) const;

    /// Applies blocks k+1..depth to activations of layer k.
    Eigen::MatrixXd forward_from_layer(const Eigen::MatrixXd& activations, std::size_t k) const;

    Eigen::MatrixXd logits(const Eigen::MatrixXd& inputs) const { return forward_to_layer(inputs, depth()); }

    /// Probability of class 1 per column.
    Eigen::RowVectorXd positive_probability(const Eigen::MatrixXd& inputs) const;

    /// Softmax2: two rows summing to one. Logistic: one row.
    Eigen::MatrixXd head_output(const Eigen::MatrixXd& logits) const;

    std::vector<Label> predict(const Eigen::MatrixXd& inputs) const;

    bool all_finite() const noexcept;

    /// Folds x -> (x - shift) / scale into the first block.
    void fold_input_standardization(const Eigen::VectorXd& shift, const Eigen::VectorXd& scale);

private:
    void validate() const;

    std::size_t input_dim_;
    std::vector<DenseLayer> layers_;
    Head head_;
};

/// Columns of the returned matrix are the cloud's points.
Eigen::MatrixXd to_matrix(const LabeledPointCloud& cloud);
LabeledPointCloud from_matrix(const Eigen::MatrixXd& columns, const std::vector<Label>& labels);

/// Transformed cloud after blocks 1..k; labels preserved. Throws InputError
/// unless 1 <= k <= depth.
LabeledPointCloud forward_to_layer(const MlpModel& model, const LabeledPointCloud& data, std::size_t k);

double accuracy(const MlpModel& model, const LabeledPointCloud& data);

enum class Optimizer { Sgd, Momentum, Adam };

std::string_view to_string(Optimizer optimizer) noexcept;
Optimizer optimizer_from_string(std::string_view name);

struct TrainConfig {
    double learning_rate = 1e-2;
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;
    double train_fraction = 0.85;
    std::size_t replications = 20;
    Optimizer optimizer = Optimizer::Sgd;
    double momentum = 0.9;
    /// Train on z-scored inputs (statistics from the training split), then fold
    /// the transform into the first block so the model consumes raw inputs.
    /// The incoming first block is read as acting on standardized inputs.
    bool standardize_inputs = false;
    bool stratified_split = true;

    void validate() const;
};

/// Activations kept by a forward pass for the matching backward pass.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;           // input of each block
    std::vector<Eigen::MatrixXd> pre_activations;  // output of each block before ReLU
};

/// Logits of the columns of x, recording what backward() needs.
Eigen::MatrixXd forward_cached(const MlpModel& model, const Eigen::MatrixXd& x, ForwardCache& cache);

/// Parameter gradients given dLoss/dlogits. If input_grad is non-null it
/// receives dLoss/dx.
std::vector<DenseLayer> backward(const MlpModel& model, const ForwardCache& cache, Eigen::MatrixXd logit_grad,
                                 Eigen::MatrixXd* input_grad = nullptr);

/// Optimizer state for a list of parameter blocks.
class ParameterUpdater {
public:
    ParameterUpdater(const TrainConfig& config, const std::vector<DenseLayer>& shapes);
    void apply(std::vector<DenseLayer>& params, const std::vector<DenseLayer>& grads);

private:
    Optimizer optimizer_;
    double learning_rate_;
    double momentum_;
    std::vector<DenseLayer> first_;
    std::vector<DenseLayer> second_;
    std::size_t step_ = 0;
};

/// Mean cross-entropy of the head on `data`.
double loss(const MlpModel& model, const LabeledPointCloud& data);

/// Gradients of `loss` with the same layout as model.layers().
std::vector<DenseLayer> loss_gradient(const MlpModel& model, const LabeledPointCloud& data);

/// Mini-batch training in place. `replication` only labels errors. Throws
/// TrainingError when the loss or parameters become non-finite.
void fit(MlpModel& model, const LabeledPointCloud& train, const TrainConfig& config, std::uint64_t seed,
         int replication = 0);

struct AccuracyStats {
    std::vector<double> accuracies;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;

    static AccuracyStats from(std::vector<double> accuracies);
};

struct TrainResult {
    std::vector<MlpModel> models;
    AccuracyStats stats;
};

/// Seed of replication r derived from the base seed.
std::uint64_t replication_seed(std::uint64_t base, std::size_t replication) noexcept;

/// config.replications independent runs: seeded stratified split, fresh init,
/// fit, test accuracy. Replications run in parallel; results are seed-determined.
TrainResult train(const std::vector<std::size_t>& layer_dims, const LabeledPointCloud& data,
                  const TrainConfig& config, Head head = Head::Softmax2);

}  // namespace topocover::nn
