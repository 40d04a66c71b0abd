#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topocover/io.hpp"
#include "topocover/point_cloud.hpp"

namespace topocover::experiments {

using io::json;

/// Experiment kinds, one per CLI subcommand.
enum class Kind { MathDice, BettiTable, DnnTable, LayerTopology, CoverClassifier, CustomNet, ExportSkeleton };

std::string_view to_string(Kind kind) noexcept;
Kind kind_from_string(std::string_view name);

/// A dataset source as written in a config:
///   {"mathdice": "3"}                                (preset name)
///   {"csv": {"path": ..., "label_column": 0, ...}}   (ingest descriptor)
///   {"gaussian": {"dimension": d, "per_class": n, "separation": s, "seed": k}}
/// An optional "name" labels report rows.
struct DatasetSource {
    json spec;

    std::string name() const;
    /// Loads or generates the cloud. Warnings from ingestion are appended.
    LabeledPointCloud load(std::vector<std::string>* warnings = nullptr) const;
    /// Throws InputError for malformed sources without touching the file system.
    void validate() const;
};

/// Two isotropic unit-variance Gaussian classes in R^dimension, class c
/// centred at c * separation * e_0. Points alternate 0, 1, 0, 1, ...
LabeledPointCloud gaussian_blobs(std::size_t dimension, std::size_t per_class, double separation, std::uint64_t seed);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;  // suppress progress on stderr
};

/// Defaults filled in, seed override applied, parameters validated for the
/// kind. Throws InputError before any computation starts.
json resolve_config(Kind kind, const json& config, const RunOptions& options = {});

/// Runs one experiment and writes its outputs to options.out_dir:
/// report.json (resolved config, version, results), kind-specific CSV/graph
/// files, and run_meta.json holding timings. Returns the report.
json run(Kind kind, const json& config, const RunOptions& options = {});

json run_mathdice(const json& resolved, const RunOptions& options);
json run_betti_table(const json& resolved, const RunOptions& options);
json run_dnn_table(const json& resolved, const RunOptions& options);
json run_layer_topology(const json& resolved, const RunOptions& options);
json run_cover_classifier(const json& resolved, const RunOptions& options);
json run_custom_net(const json& resolved, const RunOptions& options);
json run_export_skeleton(const json& resolved, const RunOptions& options);

}  // namespace topocover::experiments
