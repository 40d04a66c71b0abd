#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace topocover {

using Label = std::uint8_t;

// Euclidean metric. Every distance comparison in the library goes through
// these two functions so that alternative code paths (brute force, k-d tree,
// parallel) produce bit-identical results.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
double distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Immutable set of d-dimensional points with binary labels.
///
/// Coordinates are stored row-major in one contiguous buffer.
class LabeledPointCloud {
public:
    LabeledPointCloud() = default;

    /// Throws InputError unless coords.size() == labels.size() * dimension,
    /// dimension > 0 and every label is 0 or 1.
    LabeledPointCloud(std::size_t dimension, std::vector<double> coords, std::vector<Label> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t dimension() const noexcept { return dimension_; }

    std::span<const double> point(std::size_t i) const noexcept {
        return {coords_.data() + i * dimension_, dimension_};
    }
    Label label(std::size_t i) const noexcept { return labels_[i]; }

    const std::vector<double>& coords() const noexcept { return coords_; }
    const std::vector<Label>& labels() const noexcept { return labels_; }

    std::size_t count(Label label) const noexcept;
    std::vector<std::size_t> indices_of(Label label) const;

    /// Points at the given indices, in the given order.
    LabeledPointCloud subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const LabeledPointCloud&, const LabeledPointCloud&) = default;

private:
    std::size_t dimension_ = 0;
    std::vector<double> coords_;
    std::vector<Label> labels_;
};

}  // namespace topocover
