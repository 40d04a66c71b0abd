#include "topocover/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "topocover/classifier.hpp"
#include "topocover/cover.hpp"
#include "topocover/custom_net.hpp"
#include "topocover/errors.hpp"
#include "topocover/homology.hpp"
#include "topocover/ingest.hpp"
#include "topocover/mathdice.hpp"
#include "topocover/neuralnet.hpp"

namespace topocover::experiments {

namespace fs = std::filesystem;

std::string_view to_string(Kind kind) noexcept {
    switch (kind) {
        case Kind::MathDice: return "mathdice";
        case Kind::BettiTable: return "betti";
        case Kind::DnnTable: return "nn";
        case Kind::LayerTopology: return "layer-topology";
        case Kind::CoverClassifier: return "classify";
        case Kind::CustomNet: return "custom-net";
        case Kind::ExportSkeleton: return "export-skeleton";
    }
    return "unknown";
}

Kind kind_from_string(std::string_view name) {
    for (Kind k : {Kind::MathDice, Kind::BettiTable, Kind::DnnTable, Kind::LayerTopology, Kind::CoverClassifier,
                   Kind::CustomNet, Kind::ExportSkeleton}) {
        if (name == to_string(k)) return k;
    }
    // Long-form names used inside config files.
    if (name == "betti-table") return Kind::BettiTable;
    if (name == "dnn-table") return Kind::DnnTable;
    if (name == "cover-classifier") return Kind::CoverClassifier;
    throw InputError("unknown experiment kind '" + std::string(name) + "'");
}

LabeledPointCloud gaussian_blobs(std::size_t dimension, std::size_t per_class, double separation, std::uint64_t seed) {
    if (dimension == 0 || per_class == 0) throw InputError("gaussian blobs need positive dimension and size");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> coords;
    std::vector<Label> labels;
    coords.reserve(2 * per_class * dimension);
    labels.reserve(2 * per_class);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const Label c = static_cast<Label>(i % 2);
        for (std::size_t k = 0; k < dimension; ++k) {
            double v = normal(rng);
            if (k == 0) v += c * separation;
            coords.push_back(v);
        }
        labels.push_back(c);
    }
    return LabeledPointCloud(dimension, std::move(coords), std::move(labels));
}

namespace {

using Clock = std::chrono::steady_clock;

class Timer {
public:
    void start(std::string stage) {
        stage_ = std::move(stage);
        begin_ = Clock::now();
    }
    void stop() {
        timings_[stage_] += std::chrono::duration<double>(Clock::now() - begin_).count();
    }
    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : timings_) j[k] = v;
        return j;
    }

private:
    std::string stage_;
    Clock::time_point begin_;
    std::map<std::string, double> timings_;
};

void progress(const RunOptions& options, const std::string& message) {
    if (!options.quiet) std::cerr << "[topocover] " << message << std::endl;
}

ColumnRef column_ref(const json& j) {
    if (j.is_number_unsigned() || j.is_number_integer()) {
        if (j.get<long long>() < 0) throw InputError("column index must be nonnegative");
        return j.get<std::size_t>();
    }
    if (j.is_string()) return j.get<std::string>();
    throw InputError("column reference must be an index or a name");
}

DatasetDescriptor descriptor_from_json(const json& j) {
    DatasetDescriptor d;
    if (!j.contains("path")) throw InputError("csv dataset needs a path");
    d.path = j.at("path").get<std::string>();
    if (j.contains("label_column")) d.label_column = column_ref(j.at("label_column"));
    if (j.contains("feature_columns") && !j.at("feature_columns").is_null()) {
        std::vector<ColumnRef> cols;
        for (const auto& c : j.at("feature_columns")) cols.push_back(column_ref(c));
        d.feature_columns = std::move(cols);
    }
    d.has_header = j.value("has_header", true);
    d.normalization = normalization_from_string(j.value("normalization", std::string("none")));
    if (j.contains("row_limit") && !j.at("row_limit").is_null()) d.row_limit = j.at("row_limit").get<std::size_t>();
    d.seed = j.value("seed", std::uint64_t{0});
    d.validate();
    return d;
}

nn::TrainConfig train_config_from_json(const json& j, std::uint64_t seed) {
    nn::TrainConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.replications = j.value("replications", c.replications);
    c.optimizer = nn::optimizer_from_string(j.value("optimizer", std::string(nn::to_string(c.optimizer))));
    c.momentum = j.value("momentum", c.momentum);
    c.standardize_inputs = j.value("standardize_inputs", c.standardize_inputs);
    c.stratified_split = j.value("stratified_split", c.stratified_split);
    c.seed = seed;
    c.validate();
    return c;
}

json train_config_to_json(const nn::TrainConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"optimizer", nn::to_string(c.optimizer)},
            {"momentum", c.momentum},
            {"standardize_inputs", c.standardize_inputs},
            {"stratified_split", c.stratified_split},
            {"train_fraction", c.train_fraction},
            {"replications", c.replications}};
}

std::string structure_string(const std::vector<std::size_t>& dims) {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(dims[i]);
    }
    return s + ")";
}

void require_keys(const json& config, const std::set<std::string>& allowed, Kind kind) {
    if (!config.is_object()) throw InputError("experiment config must be a JSON object");
    for (const auto& [key, value] : config.items()) {
        if (!allowed.count(key)) {
            throw InputError("unknown key '" + key + "' for experiment " + std::string(to_string(kind)));
        }
    }
}

std::vector<std::size_t> dims_from_json(const json& j, const char* what) {
    auto dims = j.get<std::vector<std::size_t>>();
    if (dims.empty() || std::find(dims.begin(), dims.end(), 0) != dims.end()) {
        throw InputError(std::string(what) + " must be a nonempty list of positive sizes");
    }
    return dims;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json envelope(Kind kind, const json& resolved) {
    return {{"experiment", to_string(kind)},
            {"version", io::library_version()},
            {"format_version", io::kFormatVersion},
            {"config", resolved}};
}

std::string csv_comment(const json& resolved) {
    return "# topocover " + std::string(io::library_version()) + " config=" + resolved.dump() + "\n";
}

struct PipelineResult {
    std::size_t points = 0;
    std::size_t witnesses = 0;
    std::size_t dropped = 0;
    std::size_t skeleton_edges = 0;
    std::vector<std::size_t> simplices;
    BettiProfile profile;
};

PipelineResult betti_pipeline(std::shared_ptr<const LabeledPointCloud> cloud, Label label, int kmax,
                              std::size_t budget, std::optional<std::size_t> subsample, std::uint64_t seed,
                              Timer* timer) {
    PipelineResult r;
    r.points = cloud->count(label);
    if (timer) timer->start("cover");
    ClassCover cover = build_class_cover(std::move(cloud), label);
    if (subsample && *subsample < cover.size()) cover = subsample_witness_cover(cover, *subsample, seed);
    r.witnesses = cover.size();
    r.dropped = cover.metadata().dropped_points.size();
    if (timer) {
        timer->stop();
        timer->start("skeleton");
    }
    if (cover.empty()) throw InputError("every point of class " + std::to_string(label) + " was dropped");
    const SkeletonGraph skeleton = build_one_skeleton(cover);
    r.skeleton_edges = skeleton.edges.size();
    if (timer) {
        timer->stop();
        timer->start("clique_complex");
    }
    const SimplicialComplex complex = clique_complex(skeleton, kmax + 1, budget);
    for (int k = 0; k <= complex.max_dim(); ++k) r.simplices.push_back(complex.count(k));
    if (timer) {
        timer->stop();
        timer->start("homology");
    }
    r.profile = betti_numbers(complex, kmax);
    if (timer) timer->stop();
    return r;
}

json pipeline_json(const PipelineResult& r) {
    json j = io::betti_to_json(r.profile);
    j["class_points"] = r.points;
    j["witnesses"] = r.witnesses;
    j["dropped_points"] = r.dropped;
    j["skeleton_edges"] = r.skeleton_edges;
    j["simplex_counts"] = r.simplices;
    return j;
}

json base_defaults(Kind kind) {
    const json train_defaults = train_config_to_json(nn::TrainConfig{});
    switch (kind) {
        case Kind::MathDice:
            return {{"dice", "3"}, {"output", "mathdice.csv"}};
        case Kind::BettiTable:
            return {{"datasets", json::array()},
                    {"classes", {1}},
                    {"kmax", kDefaultKmax},
                    {"simplex_budget", kDefaultSimplexBudget},
                    {"witness_subsample", nullptr}};
        case Kind::DnnTable:
            return {{"rows", json::array()}, {"train", train_defaults}};
        case Kind::LayerTopology:
            return {{"dataset", {{"mathdice", "5"}}},
                    {"layers", {256, 16, 2}},
                    {"train", train_defaults},
                    {"class", 1},
                    {"kmax", 4},
                    {"simplex_budget", kDefaultSimplexBudget},
                    {"min_accuracy", 0.0}};
        case Kind::CoverClassifier:
            return {{"dataset", nullptr},
                    {"test_dataset", nullptr},
                    {"train_fraction", 0.85},
                    {"replications", 20},
                    {"test_size", nullptr},
                    {"train_per_class", nullptr},
                    {"witness_subsample", nullptr},
                    {"distance_rule", "surface"}};
        case Kind::CustomNet:
            return {{"dataset", {{"mathdice", "6"}}},
                    {"protocols", {"separate-training", "architecture-only", "joint-training", "exact-delta"}},
                    {"replications", 20},
                    {"train_fraction", 0.85},
                    {"delta_dims", {64, 16, 4, 1}},
                    {"delta_training", train_defaults},
                    {"network_training", train_defaults}};
        case Kind::ExportSkeleton:
            return {{"dataset", nullptr}, {"class", 1}, {"format", "graphml"}, {"witness_subsample", nullptr}};
    }
    return json::object();
}

std::set<std::string> allowed_keys(Kind kind) {
    std::set<std::string> keys{"experiment", "seed"};
    const json defaults = base_defaults(kind);
    for (const auto& [k, v] : defaults.items()) keys.insert(k);
    if (kind == Kind::BettiTable) keys.insert("dataset");
    return keys;
}

// Overlays the user's object on the defaults, one level deep for nested
// training blocks so partial "train" objects keep their defaults.
json overlay(json defaults, const json& user) {
    for (const auto& [key, value] : user.items()) {
        if (defaults.contains(key) && defaults[key].is_object() && value.is_object() &&
            (key == "train" || key == "delta_training" || key == "network_training")) {
            for (const auto& [k2, v2] : value.items()) defaults[key][k2] = v2;
        } else {
            defaults[key] = value;
        }
    }
    return defaults;
}

std::optional<std::size_t> optional_size(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const auto v = j.at(key).get<long long>();
    if (v <= 0) throw InputError(std::string(key) + " must be positive");
    return static_cast<std::size_t>(v);
}

}  // namespace

std::string DatasetSource::name() const {
    if (spec.contains("name")) return spec.at("name").get<std::string>();
    if (spec.contains("mathdice")) return "mathdice-" + spec.at("mathdice").get<std::string>();
    if (spec.contains("csv")) return fs::path(spec.at("csv").at("path").get<std::string>()).filename().string();
    if (spec.contains("gaussian")) return "gaussian";
    return "dataset";
}

void DatasetSource::validate() const {
    if (!spec.is_object()) throw InputError("dataset must be a JSON object");
    const int kinds = static_cast<int>(spec.contains("mathdice")) + static_cast<int>(spec.contains("csv")) +
                      static_cast<int>(spec.contains("gaussian"));
    if (kinds != 1) throw InputError("dataset needs exactly one of mathdice, csv, gaussian");
    for (const auto& [key, value] : spec.items()) {
        if (key != "name" && key != "mathdice" && key != "csv" && key != "gaussian") {
            throw InputError("unknown dataset key '" + key + "'");
        }
    }
    if (spec.contains("mathdice")) {
        mathdice::DiceConfig::named_preset(spec.at("mathdice").get<std::string>());
    } else if (spec.contains("csv")) {
        descriptor_from_json(spec.at("csv"));
    } else {
        const auto& g = spec.at("gaussian");
        if (g.value("dimension", 0) <= 0 || g.value("per_class", 0) <= 0) {
            throw InputError("gaussian dataset needs positive dimension and per_class");
        }
    }
}

LabeledPointCloud DatasetSource::load(std::vector<std::string>* warnings) const {
    validate();
    if (spec.contains("mathdice")) {
        return mathdice::enumerate_dataset(mathdice::DiceConfig::named_preset(spec.at("mathdice").get<std::string>()))
            .cloud;
    }
    if (spec.contains("csv")) {
        LoadedDataset loaded = load_csv(descriptor_from_json(spec.at("csv")));
        if (warnings) warnings->insert(warnings->end(), loaded.warnings.begin(), loaded.warnings.end());
        return std::move(loaded.cloud);
    }
    const auto& g = spec.at("gaussian");
    return gaussian_blobs(g.at("dimension").get<std::size_t>(), g.at("per_class").get<std::size_t>(),
                          g.value("separation", 6.0), g.value("seed", std::uint64_t{1}));
}

json resolve_config(Kind kind, const json& config, const RunOptions& options) {
    require_keys(config, allowed_keys(kind), kind);
    if (config.contains("experiment") && kind_from_string(config.at("experiment").get<std::string>()) != kind) {
        throw InputError("config is for experiment '" + config.at("experiment").get<std::string>() + "', not '" +
                         std::string(to_string(kind)) + "'");
    }
    json r = overlay(base_defaults(kind), config);
    r["experiment"] = to_string(kind);
    if (!r.contains("seed")) r["seed"] = 1;
    if (options.seed_override) r["seed"] = *options.seed_override;
    const auto seed = r.at("seed").get<std::uint64_t>();

    try {
        switch (kind) {
            case Kind::MathDice:
                mathdice::DiceConfig::named_preset(r.at("dice").get<std::string>());
                if (r.at("output").get<std::string>().empty()) throw InputError("output path is empty");
                break;
            case Kind::BettiTable: {
                if (r.contains("dataset")) {
                    r["datasets"].push_back(r.at("dataset"));
                    r.erase("dataset");
                }
                if (r.at("datasets").empty()) throw InputError("betti needs at least one dataset");
                for (const auto& d : r.at("datasets")) DatasetSource{d}.validate();
                for (int c : r.at("classes").get<std::vector<int>>()) {
                    if (c != 0 && c != 1) throw InputError("classes must be 0 or 1");
                }
                if (r.at("kmax").get<int>() < 0) throw InputError("kmax must be nonnegative");
                optional_size(r, "witness_subsample");
                if (r.at("simplex_budget").get<long long>() <= 0) throw InputError("simplex_budget must be positive");
                break;
            }
            case Kind::DnnTable:
                if (r.at("rows").empty()) throw InputError("nn needs at least one row");
                for (auto& row : r.at("rows")) {
                    if (!row.contains("dataset") || !row.contains("layers")) {
                        throw InputError("each nn row needs dataset and layers");
                    }
                    DatasetSource{row.at("dataset")}.validate();
                    const auto dims = dims_from_json(row.at("layers"), "layers");
                    if (dims.back() != 2) throw InputError("nn rows end in the two-unit softmax layer");
                    json train = r.at("train");
                    if (row.contains("train")) {
                        for (const auto& [k, v] : row.at("train").items()) train[k] = v;
                    }
                    train_config_from_json(train, seed);
                    row["train"] = train;
                }
                break;
            case Kind::LayerTopology: {
                DatasetSource{r.at("dataset")}.validate();
                const auto dims = dims_from_json(r.at("layers"), "layers");
                if (dims.back() != 2) throw InputError("layers end in the two-unit softmax layer");
                train_config_from_json(r.at("train"), seed);
                const int c = r.at("class").get<int>();
                if (c != 0 && c != 1) throw InputError("class must be 0 or 1");
                if (r.at("kmax").get<int>() < 0) throw InputError("kmax must be nonnegative");
                const double m = r.at("min_accuracy").get<double>();
                if (!(m >= 0.0 && m <= 1.0)) throw InputError("min_accuracy must lie in [0, 1]");
                break;
            }
            case Kind::CoverClassifier: {
                if (r.at("dataset").is_null()) throw InputError("classify needs a dataset");
                DatasetSource{r.at("dataset")}.validate();
                if (!r.at("test_dataset").is_null()) DatasetSource{r.at("test_dataset")}.validate();
                const double f = r.at("train_fraction").get<double>();
                if (!(f > 0.0 && f < 1.0)) throw InputError("train_fraction must lie in (0, 1)");
                if (r.at("replications").get<long long>() <= 0) throw InputError("replications must be positive");
                optional_size(r, "test_size");
                optional_size(r, "train_per_class");
                optional_size(r, "witness_subsample");
                distance_rule_from_string(r.at("distance_rule").get<std::string>());
                break;
            }
            case Kind::CustomNet: {
                DatasetSource{r.at("dataset")}.validate();
                for (const auto& p : r.at("protocols")) nn::protocol_from_string(p.get<std::string>());
                if (r.at("replications").get<long long>() <= 0) throw InputError("replications must be positive");
                const double f = r.at("train_fraction").get<double>();
                if (!(f > 0.0 && f < 1.0)) throw InputError("train_fraction must lie in (0, 1)");
                const auto dims = dims_from_json(r.at("delta_dims"), "delta_dims");
                if (dims.back() != 1) throw InputError("delta_dims must end in 1");
                train_config_from_json(r.at("delta_training"), seed);
                train_config_from_json(r.at("network_training"), seed);
                break;
            }
            case Kind::ExportSkeleton: {
                if (r.at("dataset").is_null()) throw InputError("export-skeleton needs a dataset");
                DatasetSource{r.at("dataset")}.validate();
                const int c = r.at("class").get<int>();
                if (c != 0 && c != 1) throw InputError("class must be 0 or 1");
                const auto format = r.at("format").get<std::string>();
                if (format != "graphml" && format != "dot") throw InputError("format must be graphml or dot");
                optional_size(r, "witness_subsample");
                break;
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid ") + std::string(to_string(kind)) + " config: " + e.what());
    }
    return r;
}

json run_mathdice(const json& resolved, const RunOptions& options) {
    const auto preset = resolved.at("dice").get<std::string>();
    const auto dataset = mathdice::enumerate_dataset(mathdice::DiceConfig::named_preset(preset));
    fs::path out = resolved.at("output").get<std::string>();
    if (out.is_relative()) out = options.out_dir / out;
    write_labeled_csv(out, dataset.cloud);
    const std::size_t ones = dataset.cloud.count(1);
    progress(options, "wrote " + std::to_string(dataset.cloud.size()) + " rolls to " + out.string());
    json report = envelope(Kind::MathDice, resolved);
    report["results"] = {{"rolls", dataset.cloud.size()},
                         {"class_1", ones},
                         {"class_0", dataset.cloud.size() - ones},
                         {"class_1_fraction", static_cast<double>(ones) / static_cast<double>(dataset.cloud.size())}};
    return report;
}

json run_betti_table(const json& resolved, const RunOptions& options) {
    const int kmax = resolved.at("kmax").get<int>();
    const auto budget = resolved.at("simplex_budget").get<std::size_t>();
    const auto subsample = optional_size(resolved, "witness_subsample");
    const auto seed = resolved.at("seed").get<std::uint64_t>();
    Timer timer;
    json rows = json::array();
    std::ostringstream csv;
    csv << csv_comment(resolved) << "dataset,class,witnesses,dropped";
    for (int k = 0; k <= kmax; ++k) csv << ",b" << k;
    csv << ",T\n";
    for (const auto& d : resolved.at("datasets")) {
        const DatasetSource source{d};
        progress(options, "betti: loading " + source.name());
        timer.start("load");
        auto cloud = std::make_shared<const LabeledPointCloud>(source.load());
        timer.stop();
        for (int c : resolved.at("classes").get<std::vector<int>>()) {
            progress(options, "betti: " + source.name() + " class " + std::to_string(c));
            const auto r = betti_pipeline(cloud, static_cast<Label>(c), kmax, budget, subsample, seed, &timer);
            json row = pipeline_json(r);
            row["dataset"] = source.name();
            row["class"] = c;
            rows.push_back(row);
            csv << source.name() << ',' << c << ',' << r.witnesses << ',' << r.dropped;
            for (auto b : r.profile.betti) csv << ',' << b;
            csv << ',' << r.profile.total << '\n';
        }
    }
    write_text(options.out_dir / "betti.csv", csv.str());
    json report = envelope(Kind::BettiTable, resolved);
    report["results"] = rows;
    report["timings"] = timer.to_json();
    return report;
}

json run_dnn_table(const json& resolved, const RunOptions& options) {
    const auto seed = resolved.at("seed").get<std::uint64_t>();
    json rows = json::array();
    std::ostringstream csv;
    csv << csv_comment(resolved) << "dataset," << io::accuracy_csv_header() << '\n';
    Timer timer;
    std::size_t index = 0;
    for (const auto& row : resolved.at("rows")) {
        const DatasetSource source{row.at("dataset")};
        const auto dims = dims_from_json(row.at("layers"), "layers");
        const auto config = train_config_from_json(row.at("train"), nn::replication_seed(seed, 1000 + index++));
        progress(options, "nn: " + source.name() + " " + structure_string(dims));
        const LabeledPointCloud data = source.load();
        timer.start("train " + source.name() + " " + structure_string(dims));
        const auto result = nn::train(dims, data, config);
        timer.stop();
        csv << source.name() << ',' << io::accuracy_csv_row(structure_string(dims), result.stats) << '\n';
        std::size_t params = result.models.front().parameter_count();
        rows.push_back({{"dataset", source.name()},
                        {"structure", dims},
                        {"parameters", params},
                        {"mean", result.stats.mean},
                        {"min", result.stats.min},
                        {"max", result.stats.max},
                        {"accuracies", result.stats.accuracies}});
    }
    write_text(options.out_dir / "nn.csv", csv.str());
    json report = envelope(Kind::DnnTable, resolved);
    report["results"] = rows;
    report["timings"] = timer.to_json();
    return report;
}

json run_layer_topology(const json& resolved, const RunOptions& options) {
    const auto seed = resolved.at("seed").get<std::uint64_t>();
    const DatasetSource source{resolved.at("dataset")};
    const auto dims = dims_from_json(resolved.at("layers"), "layers");
    const auto config = train_config_from_json(resolved.at("train"), seed);
    const auto label = static_cast<Label>(resolved.at("class").get<int>());
    const int kmax = resolved.at("kmax").get<int>();
    const auto budget = resolved.at("simplex_budget").get<std::size_t>();
    const double min_accuracy = resolved.at("min_accuracy").get<double>();
    Timer timer;

    const LabeledPointCloud data = source.load();
    progress(options, "layer-topology: training " + std::to_string(config.replications) + " models " +
                          structure_string(dims));
    timer.start("train");
    const auto trained = nn::train(dims, data, config);
    timer.stop();

    progress(options, "layer-topology: input topology");
    const auto input = betti_pipeline(std::make_shared<const LabeledPointCloud>(data), label, kmax, budget,
                                      std::nullopt, seed, &timer);

    const std::size_t depth = dims.size();
    // per_layer[k] collects the profiles of layer k over accepted models.
    std::vector<std::vector<PipelineResult>> per_layer(depth + 1);
    json replications = json::array();
    for (std::size_t r = 0; r < trained.models.size(); ++r) {
        const double acc = trained.stats.accuracies[r];
        json rep = {{"replication", r}, {"accuracy", acc}, {"accepted", acc >= min_accuracy}};
        if (acc < min_accuracy) {
            replications.push_back(rep);
            continue;
        }
        json layers = json::array();
        per_layer[0].push_back(input);
        layers.push_back(pipeline_json(input));
        for (std::size_t k = 1; k <= depth; ++k) {
            progress(options, "layer-topology: replication " + std::to_string(r) + " layer " + std::to_string(k));
            auto transformed =
                std::make_shared<const LabeledPointCloud>(nn::forward_to_layer(trained.models[r], data, k));
            auto result = betti_pipeline(transformed, label, kmax, budget, std::nullopt, seed, &timer);
            layers.push_back(pipeline_json(result));
            per_layer[k].push_back(std::move(result));
        }
        rep["layers"] = layers;
        replications.push_back(rep);
    }

    std::ostringstream csv;
    csv << csv_comment(resolved) << "layer,models";
    for (int k = 0; k <= kmax; ++k) csv << ",mean_b" << k;
    csv << ",mean_T,median_T\n";
    json summary = json::array();
    for (std::size_t k = 0; k <= depth; ++k) {
        const auto& results = per_layer[k];
        std::vector<double> mean_betti(static_cast<std::size_t>(kmax) + 1, 0.0);
        std::vector<std::int64_t> totals;
        for (const auto& res : results) {
            for (std::size_t b = 0; b < mean_betti.size(); ++b) mean_betti[b] += static_cast<double>(res.profile.betti[b]);
            totals.push_back(res.profile.total);
        }
        double mean_total = 0.0;
        double median_total = 0.0;
        if (!results.empty()) {
            for (auto& m : mean_betti) m /= static_cast<double>(results.size());
            for (auto t : totals) mean_total += static_cast<double>(t);
            mean_total /= static_cast<double>(totals.size());
            std::sort(totals.begin(), totals.end());
            const std::size_t h = totals.size() / 2;
            median_total = totals.size() % 2 ? static_cast<double>(totals[h])
                                             : 0.5 * static_cast<double>(totals[h - 1] + totals[h]);
        }
        csv << k << ',' << results.size();
        for (double m : mean_betti) csv << ',' << io::format_double(m);
        csv << ',' << io::format_double(mean_total) << ',' << io::format_double(median_total) << '\n';
        summary.push_back({{"layer", k},
                           {"models", results.size()},
                           {"mean_betti", mean_betti},
                           {"mean_total", mean_total},
                           {"median_total", median_total}});
    }
    write_text(options.out_dir / "layer_topology.csv", csv.str());
    json report = envelope(Kind::LayerTopology, resolved);
    report["results"] = {{"accuracy",
                          {{"mean", trained.stats.mean},
                           {"min", trained.stats.min},
                           {"max", trained.stats.max},
                           {"accuracies", trained.stats.accuracies}}},
                         {"layers", summary},
                         {"replications", replications}};
    report["timings"] = timer.to_json();
    return report;
}

json run_cover_classifier(const json& resolved, const RunOptions& options) {
    const auto seed = resolved.at("seed").get<std::uint64_t>();
    const DatasetSource source{resolved.at("dataset")};
    const double fraction = resolved.at("train_fraction").get<double>();
    const auto replications = resolved.at("replications").get<std::size_t>();
    const auto test_size = optional_size(resolved, "test_size");
    const auto train_per_class = optional_size(resolved, "train_per_class");
    const auto subsample = optional_size(resolved, "witness_subsample");
    const auto rule = distance_rule_from_string(resolved.at("distance_rule").get<std::string>());
    Timer timer;
    std::vector<std::string> warnings;

    timer.start("load");
    const LabeledPointCloud data = source.load(&warnings);
    std::optional<LabeledPointCloud> test_pool;
    if (!resolved.at("test_dataset").is_null()) test_pool = DatasetSource{resolved.at("test_dataset")}.load(&warnings);
    timer.stop();

    auto cap_per_class = [&](const LabeledPointCloud& cloud, std::uint64_t s) {
        if (!train_per_class) return cloud;
        std::mt19937_64 rng(s);
        std::vector<std::size_t> keep;
        for (Label c : {Label{0}, Label{1}}) {
            auto idx = cloud.indices_of(c);
            if (idx.size() > *train_per_class) {
                std::vector<std::size_t> picked;
                std::sample(idx.begin(), idx.end(), std::back_inserter(picked), *train_per_class, rng);
                idx = std::move(picked);
            }
            keep.insert(keep.end(), idx.begin(), idx.end());
        }
        std::sort(keep.begin(), keep.end());
        return cloud.subset(keep);
    };

    auto build = [&](const LabeledPointCloud& train, std::uint64_t s) {
        auto shared = std::make_shared<const LabeledPointCloud>(train);
        ClassCover c0 = build_class_cover(shared, 0);
        ClassCover c1 = build_class_cover(shared, 1);
        if (subsample) {
            if (*subsample < c0.size()) c0 = subsample_witness_cover(c0, *subsample, s);
            if (*subsample < c1.size()) c1 = subsample_witness_cover(c1, *subsample, s + 1);
        }
        return CoverClassifier(std::move(c0), std::move(c1), rule);
    };

    std::vector<EvaluationReport> reports;
    json cover_info = json::array();
    auto describe = [](const CoverClassifier& clf) {
        return json{{"class_0_balls", clf.cover(0).size()},
                    {"class_1_balls", clf.cover(1).size()},
                    {"class_0_dropped", clf.cover(0).metadata().dropped_points.size()},
                    {"class_1_dropped", clf.cover(1).metadata().dropped_points.size()}};
    };

    if (test_size || test_pool) {
        // One cover from the training data; test replications are random draws
        // from the held-out pool.
        LabeledPointCloud train = data;
        LabeledPointCloud pool;
        if (test_pool) {
            pool = *test_pool;
        } else {
            auto split = train_test_split(data, fraction, seed);
            train = std::move(split.first);
            pool = std::move(split.second);
        }
        train = cap_per_class(train, seed ^ 0x7a11ULL);
        progress(options, "classify: building covers on " + std::to_string(train.size()) + " points");
        timer.start("cover");
        const CoverClassifier clf = build(train, seed);
        timer.stop();
        cover_info.push_back(describe(clf));
        const std::size_t draw = std::min(test_size.value_or(pool.size()), pool.size());
        timer.start("evaluate");
        for (std::size_t r = 0; r < replications; ++r) {
            std::mt19937_64 rng(nn::replication_seed(seed, r));
            std::vector<std::size_t> all(pool.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            std::vector<std::size_t> picked;
            std::sample(all.begin(), all.end(), std::back_inserter(picked), draw, rng);
            reports.push_back(evaluate(clf, pool.subset(picked)));
        }
        timer.stop();
    } else {
        for (std::size_t r = 0; r < replications; ++r) {
            const std::uint64_t s = nn::replication_seed(seed, r);
            auto [train, test] = train_test_split(data, fraction, s);
            train = cap_per_class(train, s ^ 0x7a11ULL);
            progress(options, "classify: replication " + std::to_string(r));
            timer.start("cover");
            const CoverClassifier clf = build(train, s);
            timer.stop();
            cover_info.push_back(describe(clf));
            timer.start("evaluate");
            reports.push_back(evaluate(clf, test));
            timer.stop();
        }
    }

    std::ostringstream per_rep;
    per_rep << csv_comment(resolved) << "replication," << io::report_csv_header() << '\n';
    json rep_json = json::array();
    for (std::size_t r = 0; r < reports.size(); ++r) {
        per_rep << r << ',' << io::report_csv_row(reports[r]) << '\n';
        rep_json.push_back(io::report_to_json(reports[r]));
    }
    write_text(options.out_dir / "classify_replications.csv", per_rep.str());

    // Aggregate in the layout measure,mean,min,max.
    struct Measure {
        const char* name;
        std::optional<double> (*get)(const EvaluationReport&);
    };
    const Measure measures[] = {
        {"total_accuracy", [](const EvaluationReport& e) -> std::optional<double> { return e.total_accuracy; }},
        {"true_positive_rate", [](const EvaluationReport& e) { return e.true_positive_rate; }},
        {"false_positive_rate", [](const EvaluationReport& e) { return e.false_positive_rate; }},
        {"f1_score", [](const EvaluationReport& e) { return e.f1_score; }},
        {"out_of_cover_proportion",
         [](const EvaluationReport& e) -> std::optional<double> { return e.out_of_cover_proportion; }},
        {"confused_proportion", [](const EvaluationReport& e) -> std::optional<double> { return e.confused_proportion; }},
    };
    std::ostringstream agg;
    agg << csv_comment(resolved) << "measure,mean,min,max\n";
    json aggregate = json::object();
    for (const auto& m : measures) {
        std::vector<double> values;
        for (const auto& rep : reports) {
            if (auto v = m.get(rep)) values.push_back(*v);
        }
        if (values.empty()) {
            agg << m.name << ",,,\n";
            aggregate[m.name] = nullptr;
            continue;
        }
        const auto stats = nn::AccuracyStats::from(values);
        agg << m.name << ',' << io::format_double(stats.mean) << ',' << io::format_double(stats.min) << ','
            << io::format_double(stats.max) << '\n';
        aggregate[m.name] = {{"mean", stats.mean}, {"min", stats.min}, {"max", stats.max}};
    }
    write_text(options.out_dir / "classify_aggregate.csv", agg.str());

    json report = envelope(Kind::CoverClassifier, resolved);
    report["results"] = {{"aggregate", aggregate}, {"replications", rep_json}, {"covers", cover_info},
                         {"warnings", warnings}};
    report["timings"] = timer.to_json();
    return report;
}

json run_custom_net(const json& resolved, const RunOptions& options) {
    const auto seed = resolved.at("seed").get<std::uint64_t>();
    const DatasetSource source{resolved.at("dataset")};
    const LabeledPointCloud rolls = source.load();
    nn::ProtocolConfig pc;
    pc.replications = resolved.at("replications").get<std::size_t>();
    pc.train_fraction = resolved.at("train_fraction").get<double>();
    pc.seed = seed;
    pc.delta_dims = dims_from_json(resolved.at("delta_dims"), "delta_dims");
    pc.delta_training = train_config_from_json(resolved.at("delta_training"), seed);
    pc.network_training = train_config_from_json(resolved.at("network_training"), seed);

    Timer timer;
    std::ostringstream csv;
    csv << csv_comment(resolved) << "experiment,mean,min,max\n";
    json rows = json::array();
    for (const auto& p : resolved.at("protocols")) {
        const auto protocol = nn::protocol_from_string(p.get<std::string>());
        progress(options, "custom-net: " + std::string(nn::to_string(protocol)));
        timer.start(std::string(nn::to_string(protocol)));
        const auto stats = nn::run_protocol(protocol, rolls, pc);
        timer.stop();
        csv << io::accuracy_csv_row(nn::to_string(protocol), stats) << '\n';
        rows.push_back({{"protocol", nn::to_string(protocol)},
                        {"mean", stats.mean},
                        {"min", stats.min},
                        {"max", stats.max},
                        {"accuracies", stats.accuracies}});
    }
    write_text(options.out_dir / "custom_net.csv", csv.str());
    json report = envelope(Kind::CustomNet, resolved);
    report["results"] = rows;
    report["timings"] = timer.to_json();
    return report;
}

json run_export_skeleton(const json& resolved, const RunOptions& options) {
    const auto seed = resolved.at("seed").get<std::uint64_t>();
    const DatasetSource source{resolved.at("dataset")};
    const auto label = static_cast<Label>(resolved.at("class").get<int>());
    const auto subsample = optional_size(resolved, "witness_subsample");
    const auto format = resolved.at("format").get<std::string>();
    auto cloud = std::make_shared<const LabeledPointCloud>(source.load());
    ClassCover cover = build_class_cover(cloud, label);
    if (subsample && *subsample < cover.size()) cover = subsample_witness_cover(cover, *subsample, seed);
    const SkeletonGraph skeleton = build_one_skeleton(cover);
    std::ostringstream graph;
    if (format == "graphml") {
        io::write_graphml(graph, cover, skeleton);
    } else {
        io::write_dot(graph, cover, skeleton);
    }
    const std::string file = "skeleton." + format;
    write_text(options.out_dir / file, graph.str());
    json cover_doc = io::cover_to_json(cover);
    cover_doc["config"] = resolved;
    cover_doc["version"] = io::library_version();
    write_json(options.out_dir / "cover.json", cover_doc);
    progress(options, "export-skeleton: " + std::to_string(skeleton.node_count) + " nodes, " +
                          std::to_string(skeleton.edges.size()) + " edges");
    json report = envelope(Kind::ExportSkeleton, resolved);
    report["results"] = {{"nodes", skeleton.node_count},
                         {"edges", skeleton.edges.size()},
                         {"graph_file", file},
                         {"dropped_points", cover.metadata().dropped_points.size()}};
    return report;
}

json run(Kind kind, const json& config, const RunOptions& options) {
    const json resolved = resolve_config(kind, config, options);
    fs::create_directories(options.out_dir);
    const auto started = std::chrono::system_clock::now();
    const auto t0 = Clock::now();
    json report;
    switch (kind) {
        case Kind::MathDice: report = run_mathdice(resolved, options); break;
        case Kind::BettiTable: report = run_betti_table(resolved, options); break;
        case Kind::DnnTable: report = run_dnn_table(resolved, options); break;
        case Kind::LayerTopology: report = run_layer_topology(resolved, options); break;
        case Kind::CoverClassifier: report = run_cover_classifier(resolved, options); break;
        case Kind::CustomNet: report = run_custom_net(resolved, options); break;
        case Kind::ExportSkeleton: report = run_export_skeleton(resolved, options); break;
    }
    json meta = {{"experiment", to_string(kind)},
                 {"version", io::library_version()},
                 {"started_unix", std::chrono::duration_cast<std::chrono::seconds>(started.time_since_epoch()).count()},
                 {"wall_seconds", std::chrono::duration<double>(Clock::now() - t0).count()},
                 {"timings", report.contains("timings") ? report.at("timings") : json::object()}};
    report.erase("timings");
    write_json(options.out_dir / "report.json", report);
    write_json(options.out_dir / "run_meta.json", meta);
    return report;
}

}  // namespace topocover::experiments
