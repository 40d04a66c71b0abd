#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "topocover/point_cloud.hpp"

namespace topocover {

enum class Normalization { None, ZScore };

std::string_view to_string(Normalization normalization) noexcept;
Normalization normalization_from_string(std::string_view name);

/// Column by zero-based index or by header name.
using ColumnRef = std::variant<std::size_t, std::string>;

struct DatasetDescriptor {
    std::filesystem::path path;
    ColumnRef label_column = std::size_t{0};
    /// nullopt: every column except the label, in file order.
    std::optional<std::vector<ColumnRef>> feature_columns;
    bool has_header = true;
    Normalization normalization = Normalization::None;
    /// Uniform reservoir subsample of this many data rows.
    std::optional<std::size_t> row_limit;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LoadedDataset {
    LabeledPointCloud cloud;
    std::vector<std::string> feature_names;
    std::size_t rows_read = 0;
    std::vector<std::string> warnings;
};

/// Single pass over a comma-separated file. Throws InputError naming the line
/// for malformed rows and naming the value for labels other than 0 or 1.
LoadedDataset load_csv(const DatasetDescriptor& descriptor);

/// Z-scores every feature over the cloud's own points (population variance).
/// Constant features are only centred; a warning per such feature is appended.
LabeledPointCloud zscore(const LabeledPointCloud& cloud, std::vector<std::string>* warnings = nullptr);

/// Seeded partition into (train, test); both keep the original point order.
/// Stratified: each class contributes round(fraction * class size) training
/// points, clamped so both sides get at least one. Throws InputError when
/// fraction is outside (0, 1) or a class has fewer than two points.
std::pair<LabeledPointCloud, LabeledPointCloud> train_test_split(const LabeledPointCloud& cloud, double fraction,
                                                                 std::uint64_t seed, bool stratified = true);

/// Label column followed by the features, header "label,x0,x1,...".
void write_labeled_csv(std::ostream& out, const LabeledPointCloud& cloud,
                       const std::vector<std::string>& feature_names = {});
void write_labeled_csv(const std::filesystem::path& path, const LabeledPointCloud& cloud,
                       const std::vector<std::string>& feature_names = {});

}  // namespace topocover
