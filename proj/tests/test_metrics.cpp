#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rcc/errors.hpp"
#include "rcc/metrics.hpp"
#include "rcc/prng.hpp"

using namespace rcc;

namespace {

// Mann-Whitney AUC by direct pair enumeration with half credit for ties
double mann_whitney(const std::vector<double>& s, const std::vector<int>& y) {
    double u = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            ++pairs;
            if (s[i] > s[j]) u += 1.0;
            else if (s[i] == s[j]) u += 0.5;
        }
    return u / double(pairs);
}

}  // namespace

TEST_CASE("AUC on the textbook four-point example") {
    const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y = {0, 0, 1, 1};
    const RocCurve roc = roc_curve(s, y);
    CHECK(roc.auc == 0.75);
    REQUIRE(!roc.points.empty());
    CHECK(roc.points.front().fpr == 0.0);
    CHECK(roc.points.front().tpr == 0.0);
    CHECK(roc.points.back().fpr == 1.0);
    CHECK(roc.points.back().tpr == 1.0);
    // thresholds descend, curve is monotone
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        CHECK(roc.points[i].threshold <= roc.points[i - 1].threshold);
        CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
        CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    }
}

TEST_CASE("AUC extremes and ties") {
    CHECK(roc_curve({1, 2, 3, 4}, {0, 0, 1, 1}).auc == 1.0);
    CHECK(roc_curve({4, 3, 2, 1}, {0, 0, 1, 1}).auc == 0.0);
    CHECK(roc_curve({5, 5, 5, 5}, {0, 1, 0, 1}).auc == 0.5);
    CHECK_THROWS_AS(roc_curve({1, 2}, {1, 1}), SingleClass);
    CHECK_THROWS_AS(roc_curve({}, {}), SingleClass);
    CHECK_THROWS_AS(roc_curve({1}, {1, 0}), DimensionMismatch);
}

TEST_CASE("trapezoid AUC is bit-equal to Mann-Whitney on random data") {
    Prng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + int(rng.uniform_int(29));
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool both = false;
        for (int i = 0; i < n; ++i) {
            s[i] = double(rng.uniform_int(8));  // heavy ties
            y[i] = int(rng.uniform_int(2));
        }
        y[0] = 0;
        y[n - 1] = 1;
        both = true;
        REQUIRE(both);
        const double a = roc_curve(s, y).auc;
        const double b = mann_whitney(s, y);
        CHECK(a == b);  // exact, not approximate
    }
}

TEST_CASE("AUC complement and monotone-transform identities") {
    Prng rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 4 + int(rng.uniform_int(20));
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            s[i] = rng.uniform(-2, 2);
            y[i] = int(rng.uniform_int(2));
        }
        y[0] = 0;
        y[1] = 1;
        const double a = roc_curve(s, y).auc;
        std::vector<double> neg = s;
        for (double& v : neg) v = -v;
        CHECK(roc_curve(neg, y).auc == doctest::Approx(1.0 - a).epsilon(1e-12));
        // strictly increasing transform preserves the AUC exactly
        std::vector<double> warped = s;
        for (double& v : warped) v = std::exp(v) + 3.0 * v;
        CHECK(roc_curve(warped, y).auc == a);
        // duplicating the dataset preserves the AUC
        std::vector<double> s2 = s;
        std::vector<int> y2 = y;
        s2.insert(s2.end(), s.begin(), s.end());
        y2.insert(y2.end(), y.begin(), y.end());
        CHECK(roc_curve(s2, y2).auc == doctest::Approx(a).epsilon(1e-12));
    }
}

TEST_CASE("best_cutoff on a separable example") {
    // scores 1,2 negative; 3,4 positive -> threshold 3 separates perfectly
    const CutoffResult c = best_cutoff({1, 2, 3, 4}, {0, 0, 1, 1});
    CHECK(c.threshold == 3.0);
    CHECK(c.sensitivity == 1.0);
    CHECK(c.specificity == 1.0);
    CHECK(c.youden_j == doctest::Approx(1.0));
}

TEST_CASE("best_cutoff tie-breaking prefers higher specificity") {
    // scores: neg {1, 3}, pos {2, 4}. J is 0.5 at thresholds 2 and 4;
    // threshold 4 has specificity 1.0 and wins.
    const CutoffResult c = best_cutoff({1, 2, 3, 4}, {0, 1, 0, 1});
    CHECK(c.youden_j == doctest::Approx(0.5));
    CHECK(c.threshold == 4.0);
    CHECK(c.specificity == 1.0);
    CHECK(c.sensitivity == doctest::Approx(0.5));
}

TEST_CASE("sens_spec_at applies the >= rule") {
    const std::vector<double> s = {1, 2, 3, 4};
    const std::vector<int> y = {0, 0, 1, 1};
    CutoffResult c = sens_spec_at(s, y, 3.0);
    CHECK(c.sensitivity == 1.0);
    CHECK(c.specificity == 1.0);
    c = sens_spec_at(s, y, 2.0);  // the score-2 negative now flags positive
    CHECK(c.sensitivity == 1.0);
    CHECK(c.specificity == doctest::Approx(0.5));
    c = sens_spec_at(s, y, 100.0);  // nothing flags
    CHECK(c.sensitivity == 0.0);
    CHECK(c.specificity == 1.0);
    CHECK(c.youden_j == doctest::Approx(c.sensitivity + c.specificity - 1.0));
}

TEST_CASE("auc_ci is deterministic and brackets the point estimate") {
    Prng rng(33);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        y.push_back(i % 2);
        s.push_back(rng.uniform() + 0.6 * (i % 2));
    }
    const AucResult a = auc_ci(s, y, 500, 17);
    const AucResult b = auc_ci(s, y, 500, 17);
    CHECK(a.auc == b.auc);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.ci_high == b.ci_high);
    CHECK(a.ci_low <= a.auc);
    CHECK(a.auc <= a.ci_high);
    CHECK(a.n_pos == 20);
    CHECK(a.n_neg == 20);
    CHECK(a.auc == roc_curve(s, y).auc);
    // a different seed may move the interval but never the point estimate
    const AucResult c = auc_ci(s, y, 500, 99);
    CHECK(c.auc == a.auc);
}

TEST_CASE("indicator comparison table") {
    std::vector<ClinicalRecord> recs;
    Prng rng(34);
    for (int i = 0; i < 60; ++i) {
        ClinicalRecord r;
        r.patient_id = "P" + std::to_string(i);
        r.cohort = "TCGA";
        r.age_years = 60;
        r.sex = Sex::Male;
        r.stage = 1 + int(rng.uniform_int(4));
        r.grade = 1 + int(rng.uniform_int(4));
        r.subtype = Subtype::CcRcc;
        const bool dies = rng.uniform() < 0.5;
        r.event = dies ? EventStatus::Dead : EventStatus::Alive;
        r.os_months = dies ? rng.uniform(1, 59) : rng.uniform(61, 120);
        recs.push_back(r);
    }
    // a clairvoyant score: high iff the patient dies before 60 months
    NamedScores oracle{"oracle", {}};
    NamedScores noise{"noise", {}};
    for (const auto& r : recs) {
        oracle.scores.push_back(r.event == EventStatus::Dead ? 1.0 : 0.0);
        noise.scores.push_back(rng.uniform());
    }
    const auto rows = indicator_comparison(recs, {oracle, noise}, 100, 5);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].name == "oracle");
    CHECK(rows[0].auc_5y.auc == 1.0);
    // the binary score ties all deaths with each other, capping C below 1
    CHECK(rows[0].c_index > 0.8);
    CHECK(rows[0].c_index > rows[1].c_index);
    CHECK(rows[1].auc_5y.auc < 0.75);

    const std::string csv = comparison_table_csv(rows);
    CHECK(csv.rfind("indicator,auc_5y,ci_5y,auc_3y,ci_3y,auc_1y,ci_1y,c_index\n", 0) == 0);
    const bool has_oracle_row = csv.find("\noracle,") != std::string::npos;
    CHECK(has_oracle_row);
    // one line per indicator plus the header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("roc_points_csv layout") {
    const RocCurve roc = roc_curve({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1});
    const std::string csv = roc_points_csv(roc);
    CHECK(csv.rfind("threshold,fpr,tpr\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          long(roc.points.size()) + 1);
}
