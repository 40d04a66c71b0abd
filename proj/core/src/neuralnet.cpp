#include "topocover/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "topocover/errors.hpp"
#include "topocover/ingest.hpp"
#include "topocover/parallel.hpp"

namespace topocover::nn {

std::string_view to_string(Head head) noexcept { return head == Head::Softmax2 ? "softmax2" : "logistic"; }

Head head_from_string(std::string_view name) {
    if (name == "softmax2") return Head::Softmax2;
    if (name == "logistic") return Head::Logistic;
    throw InputError("unknown head '" + std::string(name) + "' (expected softmax2 or logistic)");
}

std::string_view to_string(Optimizer optimizer) noexcept {
    switch (optimizer) {
        case Optimizer::Sgd: return "sgd";
        case Optimizer::Momentum: return "momentum";
        case Optimizer::Adam: return "adam";
    }
    return "sgd";
}

Optimizer optimizer_from_string(std::string_view name) {
    if (name == "sgd") return Optimizer::Sgd;
    if (name == "momentum") return Optimizer::Momentum;
    if (name == "adam") return Optimizer::Adam;
    throw InputError("unknown optimizer '" + std::string(name) + "' (expected sgd, momentum or adam)");
}

namespace {

std::size_t head_arity(Head head) { return head == Head::Softmax2 ? 2 : 1; }

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

MlpModel::MlpModel(std::size_t input_dim, const std::vector<std::size_t>& layer_dims, Head head, std::uint64_t seed)
    : input_dim_(input_dim), head_(head) {
    std::mt19937_64 rng(seed);
    std::size_t fan_in = input_dim;
    for (std::size_t out : layer_dims) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer layer;
        layer.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
            for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = dist(rng);
        }
        layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
        layers_.push_back(std::move(layer));
        fan_in = out;
    }
    validate();
}

MlpModel::MlpModel(std::size_t input_dim, std::vector<DenseLayer> layers, Head head)
    : input_dim_(input_dim), layers_(std::move(layers)), head_(head) {
    validate();
}

void MlpModel::validate() const {
    if (input_dim_ == 0) throw InputError("model input dimension must be positive");
    if (layers_.empty()) throw InputError("model needs at least one layer");
    auto expected_in = static_cast<Eigen::Index>(input_dim_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weights.rows() == 0 || layer.weights.cols() != expected_in ||
            layer.bias.size() != layer.weights.rows()) {
            throw InputError("layer " + std::to_string(l + 1) + " has inconsistent shape");
        }
        expected_in = layer.weights.rows();
    }
    if (static_cast<std::size_t>(expected_in) != head_arity(head_)) {
        throw InputError("last layer has " + std::to_string(expected_in) + " outputs but the " +
                         std::string(to_string(head_)) + " head needs " + std::to_string(head_arity(head_)));
    }
}

std::vector<std::size_t> MlpModel::layer_dims() const {
    std::vector<std::size_t> dims;
    for (const auto& l : layers_) dims.push_back(static_cast<std::size_t>(l.weights.rows()));
    return dims;
}

std::size_t MlpModel::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

Eigen::MatrixXd MlpModel::forward_to_layer(const Eigen::MatrixXd& inputs, std::size_t k) const {
    if (k > depth()) throw InputError("layer " + std::to_string(k) + " exceeds model depth " + std::to_string(depth()));
    if (inputs.rows() != static_cast<Eigen::Index>(input_dim_)) throw InputError("input dimension mismatch");
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < k; ++l) {
        Eigen::MatrixXd z = layers_[l].weights * a;
        z.colwise() += layers_[l].bias;
        a = (l + 1 < depth()) ? relu(z) : std::move(z);
    }
    return a;
}

Eigen::MatrixXd MlpModel::forward_from_layer(const Eigen::MatrixXd& activations, std::size_t k) const {
    if (k > depth()) throw InputError("layer " + std::to_string(k) + " exceeds model depth " + std::to_string(depth()));
    Eigen::MatrixXd a = activations;
    for (std::size_t l = k; l < depth(); ++l) {
        Eigen::MatrixXd z = layers_[l].weights * a;
        z.colwise() += layers_[l].bias;
        a = (l + 1 < depth()) ? relu(z) : std::move(z);
    }
    return a;
}

Eigen::MatrixXd MlpModel::head_output(const Eigen::MatrixXd& logits) const {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    if (head_ == Head::Logistic) {
        for (Eigen::Index c = 0; c < logits.cols(); ++c) out(0, c) = sigmoid(logits(0, c));
        return out;
    }
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double m = logits.col(c).maxCoeff();
        const Eigen::VectorXd e = (logits.col(c).array() - m).exp();
        out.col(c) = e / e.sum();
    }
    return out;
}

Eigen::RowVectorXd MlpModel::positive_probability(const Eigen::MatrixXd& inputs) const {
    const Eigen::MatrixXd out = head_output(logits(inputs));
    return head_ == Head::Logistic ? Eigen::RowVectorXd(out.row(0)) : Eigen::RowVectorXd(out.row(1));
}

std::vector<Label> MlpModel::predict(const Eigen::MatrixXd& inputs) const {
    const Eigen::MatrixXd z = logits(inputs);
    std::vector<Label> labels(static_cast<std::size_t>(z.cols()));
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const bool positive = head_ == Head::Logistic ? z(0, c) > 0.0 : z(1, c) > z(0, c);
        labels[static_cast<std::size_t>(c)] = positive ? 1 : 0;
    }
    return labels;
}

bool MlpModel::all_finite() const noexcept {
    for (const auto& l : layers_) {
        if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
}

void MlpModel::fold_input_standardization(const Eigen::VectorXd& shift, const Eigen::VectorXd& scale) {
    if (shift.size() != static_cast<Eigen::Index>(input_dim_) || scale.size() != shift.size()) {
        throw InputError("standardization vectors do not match the input dimension");
    }
    // W ((x - m) / s) + b = (W diag(1/s)) x + (b - W diag(1/s) m)
    auto& first = layers_.front();
    first.weights = first.weights * scale.cwiseInverse().asDiagonal();
    first.bias -= first.weights * shift;
}

Eigen::MatrixXd to_matrix(const LabeledPointCloud& cloud) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(cloud.dimension()), static_cast<Eigen::Index>(cloud.size()));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto p = cloud.point(i);
        for (std::size_t k = 0; k < p.size(); ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = p[k];
    }
    return m;
}

LabeledPointCloud from_matrix(const Eigen::MatrixXd& columns, const std::vector<Label>& labels) {
    if (static_cast<std::size_t>(columns.cols()) != labels.size()) throw InputError("column/label count mismatch");
    std::vector<double> coords(static_cast<std::size_t>(columns.size()));
    // Column-major storage of a d x n matrix is row-major storage of n points.
    std::copy(columns.data(), columns.data() + columns.size(), coords.begin());
    return LabeledPointCloud(static_cast<std::size_t>(columns.rows()), std::move(coords), labels);
}

LabeledPointCloud forward_to_layer(const MlpModel& model, const LabeledPointCloud& data, std::size_t k) {
    if (k < 1 || k > model.depth()) {
        throw InputError("layer index " + std::to_string(k) + " outside [1, " + std::to_string(model.depth()) + "]");
    }
    if (data.dimension() != model.input_dim()) throw InputError("data dimension does not match the model input");
    return from_matrix(model.forward_to_layer(to_matrix(data), k), data.labels());
}

double accuracy(const MlpModel& model, const LabeledPointCloud& data) {
    if (data.empty()) throw InputError("accuracy of an empty data set");
    const auto predicted = model.predict(to_matrix(data));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += predicted[i] == data.label(i);
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("learning rate must be positive");
    if (epochs == 0) throw InputError("epochs must be positive");
    if (batch_size == 0) throw InputError("batch size must be positive");
    if (replications == 0) throw InputError("replications must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("train fraction must lie in (0, 1)");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("momentum must lie in [0, 1)");
}

namespace {

struct BatchPass {
    double loss = 0.0;
    std::vector<DenseLayer> grads;
};

// Mean loss and gradients over the columns of x.
BatchPass backprop(const MlpModel& model, const Eigen::MatrixXd& x, const std::vector<Label>& y) {
    ForwardCache cache;
    const Eigen::MatrixXd logits = forward_cached(model, x, cache);
    const auto batch = static_cast<double>(x.cols());

    BatchPass pass;
    Eigen::MatrixXd delta(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const Label t = y[static_cast<std::size_t>(c)];
        if (model.head() == Head::Logistic) {
            const double z = logits(0, c);
            pass.loss += t == 1 ? softplus(-z) : softplus(z);
            delta(0, c) = sigmoid(z) - t;
        } else {
            const double m = logits.col(c).maxCoeff();
            const Eigen::Vector2d e = (logits.col(c).array() - m).exp();
            const double sum = e.sum();
            pass.loss += -(logits(t, c) - m - std::log(sum));
            delta.col(c) = e / sum;
            delta(t, c) -= 1.0;
        }
    }
    pass.loss /= batch;
    delta /= batch;
    pass.grads = backward(model, cache, std::move(delta));
    return pass;
}

}  // namespace

Eigen::MatrixXd forward_cached(const MlpModel& model, const Eigen::MatrixXd& x, ForwardCache& cache) {
    const auto& layers = model.layers();
    const std::size_t depth = layers.size();
    if (x.rows() != static_cast<Eigen::Index>(model.input_dim())) throw InputError("input dimension mismatch");
    cache.inputs.clear();
    cache.pre_activations.clear();
    cache.inputs.reserve(depth);
    cache.pre_activations.reserve(depth);
    cache.inputs.push_back(x);
    for (std::size_t l = 0; l < depth; ++l) {
        Eigen::MatrixXd z = layers[l].weights * cache.inputs.back();
        z.colwise() += layers[l].bias;
        cache.pre_activations.push_back(std::move(z));
        if (l + 1 < depth) cache.inputs.push_back(relu(cache.pre_activations.back()));
    }
    return cache.pre_activations.back();
}

std::vector<DenseLayer> backward(const MlpModel& model, const ForwardCache& cache, Eigen::MatrixXd logit_grad,
                                 Eigen::MatrixXd* input_grad) {
    const auto& layers = model.layers();
    const std::size_t depth = layers.size();
    std::vector<DenseLayer> grads(depth);
    Eigen::MatrixXd delta = std::move(logit_grad);
    for (std::size_t l = depth; l-- > 0;) {
        grads[l].weights = delta * cache.inputs[l].transpose();
        grads[l].bias = delta.rowwise().sum();
        if (l > 0 || input_grad) {
            Eigen::MatrixXd back = layers[l].weights.transpose() * delta;
            if (l == 0) {
                *input_grad = std::move(back);
            } else {
                delta = back.cwiseProduct((cache.pre_activations[l - 1].array() > 0.0).cast<double>().matrix());
            }
        }
    }
    return grads;
}

ParameterUpdater::ParameterUpdater(const TrainConfig& config, const std::vector<DenseLayer>& shapes)
    : optimizer_(config.optimizer), learning_rate_(config.learning_rate), momentum_(config.momentum) {
    if (optimizer_ == Optimizer::Sgd) return;
    for (const auto& l : shapes) {
        first_.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    }
    if (optimizer_ == Optimizer::Adam) second_ = first_;
}

void ParameterUpdater::apply(std::vector<DenseLayer>& params, const std::vector<DenseLayer>& grads) {
    const double lr = learning_rate_;
    ++step_;
    for (std::size_t l = 0; l < params.size(); ++l) {
        switch (optimizer_) {
            case Optimizer::Sgd:
                params[l].weights -= lr * grads[l].weights;
                params[l].bias -= lr * grads[l].bias;
                break;
            case Optimizer::Momentum:
                first_[l].weights = momentum_ * first_[l].weights - lr * grads[l].weights;
                first_[l].bias = momentum_ * first_[l].bias - lr * grads[l].bias;
                params[l].weights += first_[l].weights;
                params[l].bias += first_[l].bias;
                break;
            case Optimizer::Adam: {
                constexpr double b1 = 0.9;
                constexpr double b2 = 0.999;
                constexpr double eps = 1e-8;
                const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
                const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
                auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
                    m = b1 * m + (1.0 - b1) * g;
                    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
                    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
                };
                update(params[l].weights, first_[l].weights, second_[l].weights, grads[l].weights);
                update(params[l].bias, first_[l].bias, second_[l].bias, grads[l].bias);
                break;
            }
        }
    }
}

double loss(const MlpModel& model, const LabeledPointCloud& data) {
    return backprop(model, to_matrix(data), data.labels()).loss;
}

std::vector<DenseLayer> loss_gradient(const MlpModel& model, const LabeledPointCloud& data) {
    return backprop(model, to_matrix(data), data.labels()).grads;
}

void fit(MlpModel& model, const LabeledPointCloud& train, const TrainConfig& config, std::uint64_t seed,
         int replication) {
    config.validate();
    if (train.empty()) throw InputError("training set is empty");
    if (train.dimension() != model.input_dim()) throw InputError("training data dimension does not match the model");

    Eigen::MatrixXd x = to_matrix(train);
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;
    if (config.standardize_inputs) {
        shift = x.rowwise().mean();
        scale = ((x.colwise() - shift).array().square().rowwise().mean()).sqrt().matrix();
        for (Eigen::Index k = 0; k < scale.size(); ++k) {
            if (!(scale(k) > 0.0)) scale(k) = 1.0;
        }
        x = (x.colwise() - shift).array().colwise() / scale.array();
    }

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    ParameterUpdater updater(config, model.layers());
    Eigen::MatrixXd batch_x;
    std::vector<Label> batch_y;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            batch_x.resize(x.rows(), static_cast<Eigen::Index>(stop - start));
            batch_y.resize(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch_x.col(static_cast<Eigen::Index>(i - start)) = x.col(static_cast<Eigen::Index>(order[i]));
                batch_y[i - start] = train.label(order[i]);
            }
            const BatchPass pass = backprop(model, batch_x, batch_y);
            if (!std::isfinite(pass.loss)) {
                throw TrainingError("non-finite loss in epoch " + std::to_string(epoch + 1) + " of replication " +
                                        std::to_string(replication),
                                    static_cast<int>(epoch + 1), replication);
            }
            updater.apply(model.mutable_layers(), pass.grads);
            if (!model.all_finite()) {
                throw TrainingError("non-finite parameters in epoch " + std::to_string(epoch + 1) +
                                        " of replication " + std::to_string(replication),
                                    static_cast<int>(epoch + 1), replication);
            }
        }
    }
    if (config.standardize_inputs) model.fold_input_standardization(shift, scale);
}

AccuracyStats AccuracyStats::from(std::vector<double> accuracies) {
    if (accuracies.empty()) throw InputError("no accuracies to summarize");
    AccuracyStats stats;
    stats.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(accuracies.size());
    stats.min = *std::min_element(accuracies.begin(), accuracies.end());
    stats.max = *std::max_element(accuracies.begin(), accuracies.end());
    stats.accuracies = std::move(accuracies);
    return stats;
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t replication) noexcept {
    // splitmix64 of base + replication
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(replication) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TrainResult train(const std::vector<std::size_t>& layer_dims, const LabeledPointCloud& data,
                  const TrainConfig& config, Head head) {
    config.validate();
    if (data.empty()) throw InputError("training data is empty");
    std::vector<std::optional<MlpModel>> models(config.replications);
    std::vector<double> accuracies(config.replications);
    parallel_for(0, config.replications, [&](std::size_t r) {
        const std::uint64_t seed = replication_seed(config.seed, r);
        auto [train_set, test_set] = train_test_split(data, config.train_fraction, seed, config.stratified_split);
        MlpModel model(data.dimension(), layer_dims, head, seed ^ 0x5eedULL);
        fit(model, train_set, config, seed + 1, static_cast<int>(r));
        accuracies[r] = accuracy(model, test_set);
        models[r].emplace(std::move(model));
    });
    TrainResult result;
    for (auto& m : models) result.models.push_back(std::move(*m));
    result.stats = AccuracyStats::from(std::move(accuracies));
    return result;
}

}  // namespace topocover::nn
