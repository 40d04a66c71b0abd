#include "topocover/classifier.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "topocover/errors.hpp"
#include "topocover/parallel.hpp"

namespace topocover {

std::string_view to_string(MembershipStatus status) noexcept {
    switch (status) {
        case MembershipStatus::OnlyClass0: return "only_class_0";
        case MembershipStatus::OnlyClass1: return "only_class_1";
        case MembershipStatus::Confused: return "confused";
        case MembershipStatus::Outside: return "outside";
    }
    return "unknown";
}

std::string_view to_string(DistanceRule rule) noexcept {
    return rule == DistanceRule::Surface ? "surface" : "center";
}

DistanceRule distance_rule_from_string(std::string_view name) {
    if (name == "surface") return DistanceRule::Surface;
    if (name == "center") return DistanceRule::Center;
    throw InputError("unknown distance rule '" + std::string(name) + "' (expected surface or center)");
}

namespace {

void check_query(std::span<const double> x, const ClassCover& cover) {
    if (cover.empty()) throw InputError("cover has no balls");
    if (x.size() != cover.dimension()) {
        throw InputError("query has dimension " + std::to_string(x.size()) + ", cover has " +
                         std::to_string(cover.dimension()));
    }
}

}  // namespace

double signed_cover_distance(std::span<const double> x, const ClassCover& cover) {
    check_query(x, cover);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cover.size(); ++i) {
        best = std::min(best, distance(x, cover.center(i)) - cover.balls()[i].radius);
    }
    return best;
}

double nearest_center_distance(std::span<const double> x, const ClassCover& cover) {
    check_query(x, cover);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cover.size(); ++i) best = std::min(best, distance(x, cover.center(i)));
    return best;
}

CoverClassifier::CoverClassifier(ClassCover cover0, ClassCover cover1, DistanceRule rule)
    : cover0_(std::move(cover0)), cover1_(std::move(cover1)), rule_(rule) {
    if (cover0_.class_label() != 0 || cover1_.class_label() != 1) {
        throw InputError("classifier needs the class-0 cover first and the class-1 cover second");
    }
    if (cover0_.empty() || cover1_.empty()) throw InputError("classifier covers must be nonempty");
    if (cover0_.dimension() != cover1_.dimension()) throw InputError("classifier covers differ in dimension");
}

Classification CoverClassifier::classify(std::span<const double> x) const {
    const double s0 = signed_cover_distance(x, cover0_);
    const double s1 = signed_cover_distance(x, cover1_);
    const bool in0 = s0 < 0.0;
    const bool in1 = s1 < 0.0;
    if (in0 != in1) {
        return in1 ? Classification{1, MembershipStatus::OnlyClass1} : Classification{0, MembershipStatus::OnlyClass0};
    }
    double d0 = s0;
    double d1 = s1;
    if (rule_ == DistanceRule::Center) {
        d0 = nearest_center_distance(x, cover0_);
        d1 = nearest_center_distance(x, cover1_);
    }
    const Label label = d1 < d0 ? 1 : 0;
    return {label, in0 ? MembershipStatus::Confused : MembershipStatus::Outside};
}

void ConfusionCounts::add(Label truth, Label predicted) noexcept {
    if (truth == 1) {
        ++(predicted == 1 ? true_positive : false_negative);
    } else {
        ++(predicted == 1 ? false_positive : true_negative);
    }
}

void StatusCounts::add(MembershipStatus status) noexcept {
    switch (status) {
        case MembershipStatus::OnlyClass0: ++only_class0; break;
        case MembershipStatus::OnlyClass1: ++only_class1; break;
        case MembershipStatus::Confused: ++confused; break;
        case MembershipStatus::Outside: ++outside; break;
    }
}

EvaluationReport EvaluationReport::from_counts(const ConfusionCounts& confusion, const StatusCounts& status) {
    const std::size_t n = confusion.total();
    if (n == 0) throw InputError("evaluation needs a nonempty test set");
    if (status.total() != n) throw InputError("status counts do not match the confusion matrix total");
    EvaluationReport report;
    report.confusion = confusion;
    report.status = status;
    const auto total = static_cast<double>(n);
    const auto tp = static_cast<double>(confusion.true_positive);
    const auto fp = static_cast<double>(confusion.false_positive);
    const auto tn = static_cast<double>(confusion.true_negative);
    const auto fn = static_cast<double>(confusion.false_negative);
    report.total_accuracy = (tp + tn) / total;
    if (tp + fn > 0) report.true_positive_rate = tp / (tp + fn);
    if (fp + tn > 0) report.false_positive_rate = fp / (fp + tn);
    if (2 * tp + fp + fn > 0 && tp + fn > 0) report.f1_score = 2 * tp / (2 * tp + fp + fn);
    report.out_of_cover_proportion = static_cast<double>(status.outside) / total;
    report.confused_proportion = static_cast<double>(status.confused) / total;
    return report;
}

EvaluationReport evaluate(const CoverClassifier& classifier, const LabeledPointCloud& test) {
    if (test.empty()) throw InputError("evaluation needs a nonempty test set");
    if (test.dimension() != classifier.dimension()) throw InputError("test set dimension differs from the covers");
    std::vector<Classification> results(test.size());
    parallel_for(0, test.size(), [&](std::size_t i) { results[i] = classifier.classify(test.point(i)); });
    ConfusionCounts confusion;
    StatusCounts status;
    for (std::size_t i = 0; i < test.size(); ++i) {
        confusion.add(test.label(i), results[i].label);
        status.add(results[i].status);
    }
    return EvaluationReport::from_counts(confusion, status);
}

}  // namespace topocover
