#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rcc/errors.hpp"
#include "rcc/prng.hpp"
#include "rcc/special.hpp"
#include "rcc/survival.hpp"

using namespace rcc;

namespace {

std::vector<SurvivalSample> samples_of(std::initializer_list<std::pair<double, int>> rows) {
    std::vector<SurvivalSample> out;
    for (const auto& [t, e] : rows) out.push_back({t, e, {}});
    return out;
}

// brute-force Efron partial log-likelihood for a univariate model
double efron_loglik(const std::vector<SurvivalSample>& s, double beta) {
    std::vector<double> times;
    for (const auto& r : s)
        if (r.event) times.push_back(r.time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    double ll = 0.0;
    for (double t : times) {
        double risk_sum = 0.0;
        double tie_sum = 0.0;
        int dcount = 0;
        for (const auto& r : s) {
            const double e = std::exp(beta * r.covariates[0]);
            if (r.time >= t) risk_sum += e;
            if (r.event && r.time == t) {
                tie_sum += e;
                ++dcount;
                ll += beta * r.covariates[0];
            }
        }
        for (int l = 0; l < dcount; ++l)
            ll -= std::log(risk_sum - (double(l) / dcount) * tie_sum);
    }
    return ll;
}

}  // namespace

TEST_CASE("KM with all events at 1,2,3") {
    const KmCurve km = km_estimate(samples_of({{1, 1}, {2, 1}, {3, 1}}));
    REQUIRE(km.event_times == std::vector<double>{1, 2, 3});
    CHECK(km.surv[0] == doctest::Approx(2.0 / 3));
    CHECK(km.surv[1] == doctest::Approx(1.0 / 3));
    CHECK(km.surv[2] == doctest::Approx(0.0));
    CHECK(km.at_risk == std::vector<int>{3, 2, 1});
    CHECK(km.survival_at(0.5) == 1.0);
    CHECK(km.survival_at(1.0) == doctest::Approx(2.0 / 3));
    CHECK(km.survival_at(2.5) == doctest::Approx(1.0 / 3));
}

TEST_CASE("KM with a censored middle subject") {
    const KmCurve km = km_estimate(samples_of({{1, 1}, {2, 0}, {3, 1}}));
    REQUIRE(km.event_times == std::vector<double>{1, 3});
    CHECK(km.surv[0] == doctest::Approx(2.0 / 3));
    CHECK(km.surv[1] == doctest::Approx(0.0));
    CHECK(km.censor_times == std::vector<double>{2});
}

TEST_CASE("KM keeps same-time censored subjects at risk") {
    // death and censoring both at t=2: censored subject still counts at risk
    const KmCurve km = km_estimate(samples_of({{2, 1}, {2, 0}, {5, 0}}));
    REQUIRE(km.event_times == std::vector<double>{2});
    CHECK(km.at_risk[0] == 3);
    CHECK(km.surv[0] == doctest::Approx(2.0 / 3));
}

TEST_CASE("KM edge cases") {
    CHECK_THROWS_AS(km_estimate({}), EmptyInput);
    // all censored: flat survival, no event times
    const KmCurve flat = km_estimate(samples_of({{1, 0}, {2, 0}}));
    CHECK(flat.event_times.empty());
    CHECK(flat.survival_at(100.0) == 1.0);
}

TEST_CASE("log-rank on identical groups is zero") {
    const auto g = samples_of({{1, 1}, {2, 0}, {3, 1}, {4, 1}});
    const LogrankResult r = logrank(g, g);
    CHECK(r.chi2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(1.0));
}

TEST_CASE("log-rank detects fully separated groups") {
    const auto early = samples_of({{1, 1}, {2, 1}, {3, 1}, {4, 1}});
    const auto late = samples_of({{10, 1}, {11, 1}, {12, 1}, {13, 1}});
    const LogrankResult r = logrank(early, late);
    CHECK(r.chi2 > 3.84);
    CHECK(r.p < 0.05);
    // symmetric in the group order
    const LogrankResult rev = logrank(late, early);
    CHECK(rev.chi2 == doctest::Approx(r.chi2).epsilon(1e-12));
}

TEST_CASE("log-rank p matches the chi-square tail") {
    // chi2 = 3.841459 is the 5% critical value on 1 df
    CHECK(chi2_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(2e-4));
}

TEST_CASE("Cox matches a grid-search maximizer on tie-free data") {
    Prng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<SurvivalSample> s;
        const int n = 5 + int(rng.uniform_int(3));
        for (int i = 0; i < n; ++i) {
            SurvivalSample r;
            r.time = double(i + 1);  // distinct times: no ties
            r.event = rng.uniform() < 0.7 ? 1 : 0;
            r.covariates = {rng.uniform(-1, 1)};
            s.push_back(r);
        }
        int events = 0;
        for (const auto& r : s) events += r.event;
        if (events < 2) continue;
        CoxModel fit;
        try {
            fit = cox_fit(s);
        } catch (const Separation&) {
            continue;
        }
        double best_beta = 0.0;
        double best = -1e300;
        for (double b = -10.0; b <= 10.0 + 1e-12; b += 1e-3) {
            const double ll = efron_loglik(s, b);
            if (ll > best) {
                best = ll;
                best_beta = b;
            }
        }
        if (std::fabs(best_beta) > 9.5) continue;  // grid boundary: separation-ish
        CHECK(std::fabs(fit.beta[0] - best_beta) < 2e-3);
        CHECK(fit.loglik >= efron_loglik(s, 0.0) - 1e-12);
    }
}

TEST_CASE("Cox loglik at the optimum beats the null and the fit is equivariant") {
    Prng rng(22);
    std::vector<SurvivalSample> s;
    for (int i = 0; i < 30; ++i) {
        SurvivalSample r;
        r.covariates = {rng.uniform(0, 1)};
        r.time = -std::log(1.0 - rng.uniform()) / std::exp(r.covariates[0]);
        r.event = rng.uniform() < 0.8 ? 1 : 0;
        s.push_back(r);
    }
    const CoxModel fit = cox_fit(s);
    CHECK(fit.loglik >= efron_loglik(s, 0.0));
    CHECK(fit.loglik == doctest::Approx(efron_loglik(s, fit.beta[0])).epsilon(1e-9));

    // scaling x by c divides beta by c
    std::vector<SurvivalSample> scaled = s;
    for (auto& r : scaled) r.covariates[0] *= 4.0;
    const CoxModel fit2 = cox_fit(scaled);
    CHECK(fit2.beta[0] == doctest::Approx(fit.beta[0] / 4.0).epsilon(1e-8));
    // shifting x leaves beta unchanged
    std::vector<SurvivalSample> shifted = s;
    for (auto& r : shifted) r.covariates[0] += 100.0;
    const CoxModel fit3 = cox_fit(shifted);
    CHECK(fit3.beta[0] == doctest::Approx(fit.beta[0]).epsilon(1e-8));
}

TEST_CASE("Cox on a permuted covariate stays near zero") {
    Prng rng(23);
    std::vector<SurvivalSample> s;
    for (int i = 0; i < 200; ++i) {
        SurvivalSample r;
        r.time = rng.uniform(0.1, 50.0);
        r.event = rng.uniform() < 0.7 ? 1 : 0;
        r.covariates = {rng.normal()};
        s.push_back(r);
    }
    const CoxModel fit = cox_fit(s);
    CHECK(std::fabs(fit.beta[0]) < 3.0 * fit.se(0));
    CHECK(std::fabs(fit.beta[0]) < 0.5);
}

TEST_CASE("Cox recovers a known exponential hazard ratio") {
    Prng rng(24);
    int hits = 0;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<SurvivalSample> s;
        for (int i = 0; i < 300; ++i) {
            SurvivalSample r;
            r.covariates = {double(i % 2)};
            const double hazard = r.covariates[0] == 1.0 ? 3.0 : 1.0;
            r.time = -std::log(1.0 - rng.uniform()) / hazard;
            r.event = 1;
            s.push_back(r);
        }
        const CoxModel fit = cox_fit(s);
        const double lo = std::exp(fit.beta[0] - 1.959963984540054 * fit.se(0));
        const double hi = std::exp(fit.beta[0] + 1.959963984540054 * fit.se(0));
        if (lo <= 3.0 && 3.0 <= hi) ++hits;
    }
    CHECK(hits >= 8);  // ~95% coverage
}

TEST_CASE("Cox guards") {
    CHECK_THROWS_AS(cox_fit({}), EmptyInput);
    // constant covariate
    auto s = samples_of({{1, 1}, {2, 1}, {3, 1}});
    for (auto& r : s) r.covariates = {1.0};
    CHECK_THROWS_AS(cox_fit(s), ConstantCovariate);
    // perfect separation: covariate ranks identical to death order
    std::vector<SurvivalSample> sep;
    for (int i = 0; i < 6; ++i) sep.push_back({double(i + 1), 1, {double(i)}});
    CHECK_THROWS_AS(cox_fit(sep), Separation);
}

TEST_CASE("hazard ratio identities") {
    Prng rng(25);
    std::vector<SurvivalSample> a, b;
    for (int i = 0; i < 40; ++i) {
        a.push_back({-std::log(1.0 - rng.uniform()) / 2.0, 1, {}});
        b.push_back({-std::log(1.0 - rng.uniform()), 1, {}});
    }
    const HazardRatioResult ab = hazard_ratio_groups(a, b);
    const HazardRatioResult ba = hazard_ratio_groups(b, a);
    CHECK(ab.hr > 1.0);  // group a dies faster
    CHECK(ba.hr == doctest::Approx(1.0 / ab.hr).epsilon(1e-9));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-9));
    CHECK(ab.ci_low < ab.hr);
    CHECK(ab.hr < ab.ci_high);
    CHECK(ab.hr == doctest::Approx(std::exp(ab.beta)));
}

TEST_CASE("c_index basics") {
    const auto s = samples_of({{1, 1}, {2, 1}, {3, 1}, {4, 1}});
    // risk perfectly anti-ordered with survival time
    CHECK(c_index({4, 3, 2, 1}, s) == doctest::Approx(1.0));
    CHECK(c_index({1, 2, 3, 4}, s) == doctest::Approx(0.0));
    CHECK(c_index({7, 7, 7, 7}, s) == doctest::Approx(0.5));
    // censored-first pair is not permissible
    const auto c = samples_of({{1, 0}, {2, 1}});
    CHECK_THROWS_AS(c_index({1, 2}, c), NoPermissiblePairs);
    // equal times: only (event, censored) is permissible
    const auto tie = samples_of({{5, 1}, {5, 0}});
    CHECK(c_index({2, 1}, tie) == doctest::Approx(1.0));
    CHECK(c_index({1, 2}, tie) == doctest::Approx(0.0));
    CHECK_THROWS_AS(c_index({1}, s), DimensionMismatch);
}

TEST_CASE("c_index agrees with a direct pair count on random data") {
    Prng rng(26);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + int(rng.uniform_int(20));
        std::vector<SurvivalSample> s;
        std::vector<double> risk;
        for (int i = 0; i < n; ++i) {
            s.push_back({double(1 + rng.uniform_int(8)), int(rng.uniform_int(2)), {}});
            risk.push_back(double(rng.uniform_int(5)));
        }
        double num = 0.0;
        long denom = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const bool perm =
                    (s[i].time < s[j].time && s[i].event == 1) ||
                    (s[i].time == s[j].time && s[i].event == 1 && s[j].event == 0);
                if (!perm) continue;
                ++denom;
                if (risk[i] > risk[j]) num += 1.0;
                else if (risk[i] == risk[j]) num += 0.5;
            }
        if (denom == 0) {
            CHECK_THROWS_AS(c_index(risk, s), NoPermissiblePairs);
        } else {
            CHECK(c_index(risk, s) == doctest::Approx(num / denom).epsilon(1e-12));
        }
    }
}

TEST_CASE("anova matches the hand-computed F") {
    // groups (1,2,3) and (2,3,4): F = 1.5, df (1, 4)
    const AnovaResult r = anova_oneway({{1, 2, 3}, {2, 3, 4}});
    CHECK(r.F == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(f_sf(1.5, 1, 4)));
    // F(1,4) 5% critical value
    CHECK(f_sf(7.7086, 1, 4) == doctest::Approx(0.05).epsilon(2e-3));
}

TEST_CASE("anova invariances and degenerate cases") {
    const AnovaResult base = anova_oneway({{1, 2, 3}, {2, 3, 4}, {5, 6, 9}});
    // shifting every value leaves F unchanged; scaling too
    std::vector<std::vector<double>> shifted = {{11, 12, 13}, {12, 13, 14}, {15, 16, 19}};
    CHECK(anova_oneway(shifted).F == doctest::Approx(base.F).epsilon(1e-9));
    std::vector<std::vector<double>> scaled = {{2, 4, 6}, {4, 6, 8}, {10, 12, 18}};
    CHECK(anova_oneway(scaled).F == doctest::Approx(base.F).epsilon(1e-9));
    // identical constant groups: zero variance everywhere
    const AnovaResult flat = anova_oneway({{2, 2}, {2, 2}});
    CHECK(flat.F == 0.0);
    CHECK(flat.p == 1.0);
    CHECK_THROWS_AS(anova_oneway({}), DegenerateGroups);
    CHECK_THROWS_AS(anova_oneway({{1, 2}}), DegenerateGroups);
    CHECK_THROWS_AS(anova_oneway({{1, 2}, {}}), DegenerateGroups);
    // equal constant groups with different means: F = +inf, p = 0
    const AnovaResult split = anova_oneway({{1, 1}, {2, 2}});
    CHECK(std::isinf(split.F));
    CHECK(split.p == 0.0);
}

TEST_CASE("baseline cumulative hazard reproduces survival on simple data") {
    // no ties, univariate; check cumhaz is nonnegative and nondecreasing
    Prng rng(27);
    std::vector<SurvivalSample> s;
    for (int i = 0; i < 20; ++i) {
        SurvivalSample r;
        r.covariates = {rng.uniform(-1, 1)};
        r.time = rng.uniform(0.5, 40.0);
        r.event = rng.uniform() < 0.8 ? 1 : 0;
        s.push_back(r);
    }
    const CoxModel fit = cox_fit(s);
    double prev = 0.0;
    for (const auto& [t, h] : fit.baseline_cumhaz) {
        CHECK(h >= prev);
        prev = h;
    }
    CHECK(fit.cumhaz_at(0.0) == 0.0);
    CHECK(fit.cumhaz_at(1e9) == doctest::Approx(fit.baseline_cumhaz.back().second));
    // left-continuity: just before the first event time the hazard is 0
    const double t0 = fit.baseline_cumhaz.front().first;
    CHECK(fit.cumhaz_at(std::nextafter(t0, 0.0)) == 0.0);
    CHECK(fit.cumhaz_at(t0) == doctest::Approx(fit.baseline_cumhaz.front().second));
}
