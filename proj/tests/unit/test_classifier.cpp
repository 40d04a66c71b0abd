#include <memory>

#include "doctest.h"
#include "oracles.hpp"
#include "topocover/classifier.hpp"
#include "topocover/errors.hpp"
#include "topocover/ingest.hpp"
#include "topocover/mathdice.hpp"

using namespace topocover;

namespace {

// Class 0 ball at 0 radius 2, class 1 ball at 3 radius 2 (1-D); they overlap on (1, 2).
CoverClassifier line_classifier(DistanceRule rule = DistanceRule::Surface) {
    auto cloud = std::make_shared<const LabeledPointCloud>(LabeledPointCloud(1, {0.0, 3.0}, {0, 1}));
    return CoverClassifier(ClassCover(cloud, 0, {Ball{0, 2.0}}), ClassCover(cloud, 1, {Ball{1, 2.0}}), rule);
}

}  // namespace

TEST_CASE("membership statuses") {
    const auto clf = line_classifier();
    auto at = [&](double x) { return clf.classify(std::vector<double>{x}); };
    CHECK(at(-1.0).status == MembershipStatus::OnlyClass0);
    CHECK(at(-1.0).label == 0);
    CHECK(at(4.0).status == MembershipStatus::OnlyClass1);
    CHECK(at(4.0).label == 1);
    CHECK(at(1.2).status == MembershipStatus::Confused);
    CHECK(at(1.2).label == 0);
    CHECK(at(1.8).label == 1);
    // Boundary points are outside (open balls).
    CHECK(at(-2.0).status == MembershipStatus::Outside);
    CHECK(at(10.0).status == MembershipStatus::Outside);
    CHECK(at(10.0).label == 1);
    // Exact tie in the overlap goes to class 0.
    CHECK(at(1.5).label == 0);
}

TEST_CASE("signed and center distances") {
    const auto clf = line_classifier();
    const std::vector<double> x{0.5};
    CHECK(signed_cover_distance(x, clf.cover(0)) == -1.5);
    CHECK(signed_cover_distance(x, clf.cover(1)) == 0.5);
    CHECK(nearest_center_distance(x, clf.cover(1)) == 2.5);
}

TEST_CASE("center rule differs from surface rule with unequal radii") {
    auto cloud = std::make_shared<const LabeledPointCloud>(LabeledPointCloud(1, {0.0, 10.0}, {0, 1}));
    const ClassCover c0(cloud, 0, {Ball{0, 1.0}});
    const ClassCover c1(cloud, 1, {Ball{1, 7.0}});
    const std::vector<double> x{4.0};  // outside c0 by 3, inside c1 by 1
    CHECK(CoverClassifier(c0, c1, DistanceRule::Surface).classify(x).label == 1);
    const std::vector<double> y{-2.0};  // outside both: surface 1 vs 5, centers 2 vs 12
    CHECK(CoverClassifier(c0, c1, DistanceRule::Center).classify(y).label == 0);
    const std::vector<double> z{3.6};  // outside both by surface (2.6 vs -0.6 inside c1) -> only c1
    CHECK(CoverClassifier(c0, c1, DistanceRule::Center).classify(z).status == MembershipStatus::OnlyClass1);
}

TEST_CASE("classifier requires covers of the right classes") {
    auto cloud = std::make_shared<const LabeledPointCloud>(LabeledPointCloud(1, {0.0, 3.0}, {0, 1}));
    const ClassCover c0(cloud, 0, {Ball{0, 1.0}});
    const ClassCover c1(cloud, 1, {Ball{1, 1.0}});
    CHECK_THROWS_AS(CoverClassifier(c1, c0), InputError);
    CHECK_THROWS_AS(CoverClassifier(c0, ClassCover(cloud, 1, {})), InputError);
}

TEST_CASE("report rates from counts") {
    ConfusionCounts cm{.true_positive = 6, .false_positive = 2, .true_negative = 10, .false_negative = 2};
    StatusCounts st{.only_class0 = 10, .only_class1 = 5, .confused = 3, .outside = 2};
    const auto r = EvaluationReport::from_counts(cm, st);
    CHECK(r.total_accuracy == doctest::Approx(0.8));
    CHECK(*r.true_positive_rate == doctest::Approx(0.75));
    CHECK(*r.false_positive_rate == doctest::Approx(2.0 / 12.0));
    CHECK(*r.f1_score == doctest::Approx(0.75));
    CHECK(r.out_of_cover_proportion == doctest::Approx(0.1));
    CHECK(r.confused_proportion == doctest::Approx(0.15));

    ConfusionCounts negatives_only{.false_positive = 1, .true_negative = 3};
    StatusCounts st2{.only_class0 = 4};
    const auto r2 = EvaluationReport::from_counts(negatives_only, st2);
    CHECK_FALSE(r2.true_positive_rate.has_value());
    CHECK_FALSE(r2.f1_score.has_value());
    CHECK(r2.false_positive_rate.has_value());
    CHECK_THROWS_AS(EvaluationReport::from_counts(cm, StatusCounts{}), InputError);
}

TEST_CASE("evaluate matches an independent recount on Math Dice n=3") {
    const auto rolls = mathdice::enumerate_dataset(mathdice::DiceConfig::preset(3)).cloud;
    const auto [train, test] = train_test_split(rolls, 0.85, 11);
    auto shared = std::make_shared<const LabeledPointCloud>(train);
    const CoverClassifier clf(build_class_cover(shared, 0), build_class_cover(shared, 1));
    const auto report = evaluate(clf, test);

    std::size_t correct = 0, tp = 0, fp = 0, fn = 0, confused = 0, outside = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto x = test.point(i);
        bool in0 = false, in1 = false;
        double d0 = 1e300, d1 = 1e300;
        for (std::size_t b = 0; b < clf.cover(0).size(); ++b) {
            const double s = distance(x, clf.cover(0).center(b)) - clf.cover(0).balls()[b].radius;
            in0 = in0 || s < 0;
            d0 = std::min(d0, s);
        }
        for (std::size_t b = 0; b < clf.cover(1).size(); ++b) {
            const double s = distance(x, clf.cover(1).center(b)) - clf.cover(1).balls()[b].radius;
            in1 = in1 || s < 0;
            d1 = std::min(d1, s);
        }
        const int pred = in0 != in1 ? (in1 ? 1 : 0) : (d1 < d0 ? 1 : 0);
        confused += in0 && in1;
        outside += !in0 && !in1;
        correct += pred == test.label(i);
        tp += pred == 1 && test.label(i) == 1;
        fp += pred == 1 && test.label(i) == 0;
        fn += pred == 0 && test.label(i) == 1;
    }
    CHECK(report.confusion.total() == test.size());
    CHECK(report.confusion.true_positive == tp);
    CHECK(report.confusion.false_positive == fp);
    CHECK(report.confusion.false_negative == fn);
    CHECK(report.status.confused == confused);
    CHECK(report.status.outside == outside);
    CHECK(report.total_accuracy == doctest::Approx(static_cast<double>(correct) / static_cast<double>(test.size())));
}

TEST_CASE("separable data is classified perfectly") {
    std::vector<double> coords;
    std::vector<Label> labels;
    for (int i = 0; i < 40; ++i) {
        coords.push_back(i % 2 ? 10.0 + 0.1 * i : -10.0 - 0.1 * i);
        labels.push_back(static_cast<Label>(i % 2));
    }
    const LabeledPointCloud data(1, coords, labels);
    const auto [train, test] = train_test_split(data, 0.5, 3);
    auto shared = std::make_shared<const LabeledPointCloud>(train);
    const CoverClassifier clf(build_class_cover(shared, 0), build_class_cover(shared, 1));
    CHECK(evaluate(clf, test).total_accuracy == 1.0);
}
