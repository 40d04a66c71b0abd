#include "topocover/custom_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "topocover/errors.hpp"
#include "topocover/ingest.hpp"
#include "topocover/parallel.hpp"

namespace topocover::nn {

std::vector<std::vector<int>> sign_patterns(std::size_t count) {
    if (count == 0 || count > 20) throw InputError("sign pattern length must lie in [1, 20]");
    std::vector<std::vector<int>> patterns;
    for (std::size_t p = 0; p < (std::size_t{1} << count); ++p) {
        std::vector<int> w(count);
        for (std::size_t i = 0; i < count; ++i) w[i] = (p >> i) & 1U ? -1 : 1;
        patterns.push_back(std::move(w));
    }
    return patterns;
}

double phi(std::span<const double> x, std::span<const int> w) {
    if (x.size() != w.size() + 1) throw InputError("phi needs one more coordinate than sign entries");
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * x[i];
    return sum - x.back();
}

void CustomNetSpec::validate() const {
    if (sign_patterns.empty()) throw InputError("no sign patterns");
    const std::size_t m = sign_patterns.front().size();
    if (m == 0 || m > 20 || sign_patterns.size() != (std::size_t{1} << m)) {
        throw InputError("sign patterns must enumerate all of {-1,+1}^m");
    }
    std::set<std::vector<int>> seen;
    for (const auto& w : sign_patterns) {
        if (w.size() != m) throw InputError("sign patterns differ in length");
        for (int v : w) {
            if (v != 1 && v != -1) throw InputError("sign pattern entries must be -1 or +1");
        }
        if (!seen.insert(w).second) throw InputError("duplicate sign pattern");
    }
}

CustomNet::CustomNet(Eigen::MatrixXd projection, DeltaMode mode, std::optional<MlpModel> delta)
    : projection_(std::move(projection)), mode_(mode), delta_(std::move(delta)) {
    if (projection_.rows() == 0 || projection_.cols() == 0) throw InputError("empty projection");
    if (mode_ == DeltaMode::Learned) {
        if (!delta_) throw StateError("learned delta mode needs a trained delta subnet");
        if (delta_->input_dim() != 1 || delta_->head() != Head::Logistic) {
            throw InputError("delta subnet must map a scalar through a logistic head");
        }
    }
}

Eigen::MatrixXd CustomNet::preset_projection(const std::vector<std::vector<int>>& patterns) {
    if (patterns.empty()) throw InputError("no sign patterns");
    const std::size_t m = patterns.front().size();
    Eigen::MatrixXd p(static_cast<Eigen::Index>(patterns.size()), static_cast<Eigen::Index>(m + 1));
    for (std::size_t r = 0; r < patterns.size(); ++r) {
        if (patterns[r].size() != m) throw InputError("sign patterns differ in length");
        for (std::size_t i = 0; i < m; ++i) p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = patterns[r][i];
        p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)) = -1.0;
    }
    return p;
}

const MlpModel& CustomNet::delta() const {
    if (!delta_) throw StateError("custom net has no delta subnet");
    return *delta_;
}

MlpModel& CustomNet::mutable_delta() {
    if (!delta_) throw StateError("custom net has no delta subnet");
    return *delta_;
}

Eigen::MatrixXd CustomNet::pattern_scores(const Eigen::MatrixXd& x) const {
    if (x.rows() != projection_.cols()) throw InputError("roll dimension does not match the projection");
    const Eigen::MatrixXd phis = projection_ * x;
    if (mode_ == DeltaMode::Exact) return (phis.array() == 0.0).cast<double>().matrix();
    const Eigen::Map<const Eigen::MatrixXd> flat(phis.data(), 1, phis.size());
    const Eigen::RowVectorXd p = delta_->positive_probability(flat);
    return Eigen::Map<const Eigen::MatrixXd>(p.data(), phis.rows(), phis.cols());
}

Eigen::RowVectorXd CustomNet::score(const Eigen::MatrixXd& x) const {
    return pattern_scores(x).colwise().maxCoeff();
}

std::vector<Label> CustomNet::predict(const Eigen::MatrixXd& x) const {
    const Eigen::RowVectorXd s = score(x);
    std::vector<Label> labels(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.size(); ++i) labels[static_cast<std::size_t>(i)] = s(i) > 0.5 ? 1 : 0;
    return labels;
}

double CustomNet::accuracy(const LabeledPointCloud& data) const {
    if (data.empty()) throw InputError("accuracy of an empty data set");
    const auto predicted = predict(to_matrix(data));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += predicted[i] == data.label(i);
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

CustomNet build_custom_net(const CustomNetSpec& spec, const MlpModel* delta) {
    spec.validate();
    Eigen::MatrixXd projection = CustomNet::preset_projection(spec.sign_patterns);
    if (spec.delta_mode == DeltaMode::Exact) return CustomNet(std::move(projection), DeltaMode::Exact, std::nullopt);
    if (!delta) throw StateError("learned delta mode needs a trained delta subnet");
    return CustomNet(std::move(projection), DeltaMode::Learned, *delta);
}

void fit_custom_net(CustomNet& net, const LabeledPointCloud& train, const TrainConfig& config, std::uint64_t seed,
                    bool train_projection, int replication) {
    config.validate();
    if (net.mode() != DeltaMode::Learned) throw StateError("only a learned-delta custom net can be trained");
    if (train.empty()) throw InputError("training set is empty");
    if (train.dimension() != net.input_dim()) throw InputError("roll dimension does not match the projection");

    const Eigen::MatrixXd x = to_matrix(train);
    const std::size_t n = train.size();
    const Eigen::Index patterns = net.projection().rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);

    // Parameter block 0 is the projection (bias unused, kept at zero).
    auto gather = [&] {
        std::vector<DenseLayer> params{{net.projection(), Eigen::VectorXd::Zero(patterns)}};
        for (const auto& l : net.delta().layers()) params.push_back(l);
        return params;
    };
    std::vector<DenseLayer> params = gather();
    ParameterUpdater updater(config, params);
    ForwardCache cache;
    Eigen::MatrixXd bx;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const auto b = static_cast<Eigen::Index>(stop - start);
            bx.resize(x.rows(), b);
            for (std::size_t i = start; i < stop; ++i) bx.col(static_cast<Eigen::Index>(i - start)) = x.col(static_cast<Eigen::Index>(order[i]));

            const Eigen::MatrixXd phis = net.projection() * bx;
            const Eigen::Map<const Eigen::MatrixXd> flat(phis.data(), 1, phis.size());
            const Eigen::MatrixXd logits = forward_cached(net.delta(), flat, cache);

            Eigen::MatrixXd logit_grad = Eigen::MatrixXd::Zero(1, logits.cols());
            double loss = 0.0;
            for (Eigen::Index c = 0; c < b; ++c) {
                Eigen::Index best = 0;
                for (Eigen::Index r = 1; r < patterns; ++r) {
                    if (logits(0, c * patterns + r) > logits(0, c * patterns + best)) best = r;
                }
                // max of sigmoids = sigmoid of the max logit
                const double z = logits(0, c * patterns + best);
                const Label y = train.label(order[start + static_cast<std::size_t>(c)]);
                loss += y == 1 ? std::log1p(std::exp(-std::abs(z))) + std::max(-z, 0.0)
                               : std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
                const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
                logit_grad(0, c * patterns + best) = (p - y) / static_cast<double>(b);
            }
            loss /= static_cast<double>(b);
            if (!std::isfinite(loss)) {
                throw TrainingError("non-finite loss in epoch " + std::to_string(epoch + 1) + " of replication " +
                                        std::to_string(replication),
                                    static_cast<int>(epoch + 1), replication);
            }

            Eigen::MatrixXd input_grad;
            std::vector<DenseLayer> delta_grads =
                backward(net.delta(), cache, std::move(logit_grad), train_projection ? &input_grad : nullptr);
            std::vector<DenseLayer> grads;
            grads.reserve(delta_grads.size() + 1);
            if (train_projection) {
                const Eigen::Map<const Eigen::MatrixXd> dphi(input_grad.data(), patterns, b);
                grads.push_back({dphi * bx.transpose(), Eigen::VectorXd::Zero(patterns)});
            } else {
                grads.push_back({Eigen::MatrixXd::Zero(patterns, x.rows()), Eigen::VectorXd::Zero(patterns)});
            }
            for (auto& g : delta_grads) grads.push_back(std::move(g));

            updater.apply(params, grads);
            if (train_projection) net.mutable_projection() = params[0].weights;
            params[0].bias.setZero();
            auto& layers = net.mutable_delta().mutable_layers();
            for (std::size_t l = 0; l < layers.size(); ++l) layers[l] = params[l + 1];
            if (!net.projection().allFinite() || !net.delta().all_finite()) {
                throw TrainingError("non-finite parameters in epoch " + std::to_string(epoch + 1) +
                                        " of replication " + std::to_string(replication),
                                    static_cast<int>(epoch + 1), replication);
            }
        }
    }
}

LabeledPointCloud delta_training_set(const LabeledPointCloud& rolls, const std::vector<std::vector<int>>& patterns) {
    std::vector<double> values;
    std::vector<Label> labels;
    values.reserve(rolls.size() * patterns.size());
    labels.reserve(rolls.size() * patterns.size());
    for (std::size_t i = 0; i < rolls.size(); ++i) {
        for (const auto& w : patterns) {
            const double v = phi(rolls.point(i), w);
            values.push_back(v);
            labels.push_back(v == 0.0 ? 1 : 0);
        }
    }
    return LabeledPointCloud(1, std::move(values), std::move(labels));
}

std::string_view to_string(Protocol protocol) noexcept {
    switch (protocol) {
        case Protocol::SeparateTraining: return "separate-training";
        case Protocol::ArchitectureOnly: return "architecture-only";
        case Protocol::JointTraining: return "joint-training";
        case Protocol::ExactDelta: return "exact-delta";
    }
    return "unknown";
}

Protocol protocol_from_string(std::string_view name) {
    for (Protocol p : {Protocol::SeparateTraining, Protocol::ArchitectureOnly, Protocol::JointTraining,
                       Protocol::ExactDelta}) {
        if (name == to_string(p)) return p;
    }
    throw InputError("unknown protocol '" + std::string(name) + "'");
}

AccuracyStats run_protocol(Protocol protocol, const LabeledPointCloud& rolls, const ProtocolConfig& config) {
    if (config.replications == 0) throw InputError("replications must be positive");
    if (rolls.dimension() < 2) throw InputError("rolls need at least one die plus the target");
    if (config.delta_dims.empty() || config.delta_dims.back() != 1) {
        throw InputError("delta subnet must end in a single logistic unit");
    }
    const auto patterns = sign_patterns(rolls.dimension() - 1);
    std::vector<double> accuracies(config.replications);

    parallel_for(0, config.replications, [&](std::size_t r) {
        const std::uint64_t seed = replication_seed(config.seed, r);
        auto [train_set, test_set] = train_test_split(rolls, config.train_fraction, seed);
        const int rep = static_cast<int>(r);
        switch (protocol) {
            case Protocol::ExactDelta: {
                accuracies[r] = build_custom_net({patterns, DeltaMode::Exact}).accuracy(test_set);
                break;
            }
            case Protocol::SeparateTraining: {
                MlpModel delta(1, config.delta_dims, Head::Logistic, seed ^ 0xde17aULL);
                fit(delta, delta_training_set(train_set, patterns), config.delta_training, seed + 1, rep);
                accuracies[r] = build_custom_net({patterns, DeltaMode::Learned}, &delta).accuracy(test_set);
                break;
            }
            case Protocol::ArchitectureOnly:
            case Protocol::JointTraining: {
                MlpModel delta(1, config.delta_dims, Head::Logistic, seed ^ 0xde17aULL);
                const bool learned_projection = protocol == Protocol::ArchitectureOnly;
                Eigen::MatrixXd projection;
                if (learned_projection) {
                    // Glorot-uniform, like every other linear block.
                    const auto rows = static_cast<Eigen::Index>(patterns.size());
                    const auto cols = static_cast<Eigen::Index>(rolls.dimension());
                    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
                    std::mt19937_64 rng(seed ^ 0x9a0cULL);
                    std::uniform_real_distribution<double> dist(-limit, limit);
                    projection.resize(rows, cols);
                    for (Eigen::Index c = 0; c < cols; ++c) {
                        for (Eigen::Index i = 0; i < rows; ++i) projection(i, c) = dist(rng);
                    }
                } else {
                    projection = CustomNet::preset_projection(patterns);
                }
                CustomNet net(std::move(projection), DeltaMode::Learned, std::move(delta));
                fit_custom_net(net, train_set, config.network_training, seed + 1, learned_projection, rep);
                accuracies[r] = net.accuracy(test_set);
                break;
            }
        }
    });
    return AccuracyStats::from(std::move(accuracies));
}

}  // namespace topocover::nn
