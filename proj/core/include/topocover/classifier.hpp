#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "topocover/cover.hpp"

namespace topocover {

enum class MembershipStatus { OnlyClass0, OnlyClass1, Confused, Outside };

std::string_view to_string(MembershipStatus status) noexcept;

/// How "closer to a cover" is measured when a point is in both covers or neither.
enum class DistanceRule {
    Surface,  // min over balls of distance(x, c) - r
    Center,   // min over balls of distance(x, c)
};

std::string_view to_string(DistanceRule rule) noexcept;
DistanceRule distance_rule_from_string(std::string_view name);

/// min over balls of distance(x, c_i) - r_i; negative iff x is strictly inside the cover.
double signed_cover_distance(std::span<const double> x, const ClassCover& cover);

/// min over balls of distance(x, c_i).
double nearest_center_distance(std::span<const double> x, const ClassCover& cover);

struct Classification {
    Label label = 0;
    MembershipStatus status = MembershipStatus::Outside;
};

class CoverClassifier {
public:
    /// Throws InputError unless cover0 covers class 0, cover1 covers class 1,
    /// both are nonempty and share a dimension.
    CoverClassifier(ClassCover cover0, ClassCover cover1, DistanceRule rule = DistanceRule::Surface);

    /// Inside exactly one cover: that class. Inside both or neither: the closer
    /// cover under the distance rule, ties to class 0.
    Classification classify(std::span<const double> x) const;

    const ClassCover& cover(Label label) const noexcept { return label == 0 ? cover0_ : cover1_; }
    std::size_t dimension() const noexcept { return cover0_.dimension(); }
    DistanceRule rule() const noexcept { return rule_; }

private:
    ClassCover cover0_;
    ClassCover cover1_;
    DistanceRule rule_;
};

/// Binary confusion matrix with class 1 as the positive class.
struct ConfusionCounts {
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;

    std::size_t total() const noexcept { return true_positive + false_positive + true_negative + false_negative; }
    void add(Label truth, Label predicted) noexcept;
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct StatusCounts {
    std::size_t only_class0 = 0;
    std::size_t only_class1 = 0;
    std::size_t confused = 0;
    std::size_t outside = 0;

    std::size_t total() const noexcept { return only_class0 + only_class1 + confused + outside; }
    void add(MembershipStatus status) noexcept;
    friend bool operator==(const StatusCounts&, const StatusCounts&) = default;
};

/// Rates are absent when undefined (no positives for TPR, no negatives for FPR,
/// no positive predictions or positives for F1).
struct EvaluationReport {
    ConfusionCounts confusion;
    StatusCounts status;
    double total_accuracy = 0.0;
    std::optional<double> true_positive_rate;
    std::optional<double> false_positive_rate;
    std::optional<double> f1_score;
    double out_of_cover_proportion = 0.0;
    double confused_proportion = 0.0;

    /// Derives every rate from the counts. Throws InputError if the two count
    /// sets disagree on the total or the total is zero.
    static EvaluationReport from_counts(const ConfusionCounts& confusion, const StatusCounts& status);
};

EvaluationReport evaluate(const CoverClassifier& classifier, const LabeledPointCloud& test);

}  // namespace topocover
