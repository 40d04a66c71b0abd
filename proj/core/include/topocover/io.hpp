#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "topocover/classifier.hpp"
#include "topocover/cover.hpp"
#include "topocover/homology.hpp"
#include "topocover/neuralnet.hpp"

namespace topocover::io {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

std::string_view library_version() noexcept;

/// {format_version, class, dimension, balls:[{center:[...], radius}],
///  metadata:{subsampled, seed, dropped_points}}
json cover_to_json(const ClassCover& cover);

/// The returned cover owns a fresh cloud holding only the ball centers.
ClassCover cover_from_json(const json& doc);

void write_graphml(std::ostream& out, const ClassCover& cover, const SkeletonGraph& graph);
void write_dot(std::ostream& out, const ClassCover& cover, const SkeletonGraph& graph);

/// {betti:[...], total, field}
json betti_to_json(const BettiProfile& profile);
BettiProfile betti_from_json(const json& doc);

/// "dimension,simplices" rows.
void write_simplex_counts_csv(std::ostream& out, const SimplicialComplex& complex);

json report_to_json(const EvaluationReport& report);
std::string report_csv_header();
std::string report_csv_row(const EvaluationReport& report);

json model_to_json(const nn::MlpModel& model);
nn::MlpModel model_from_json(const json& doc);

/// "structure,mean,min,max"
std::string accuracy_csv_header();
std::string accuracy_csv_row(std::string_view structure, const nn::AccuracyStats& stats);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace topocover::io
