#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rcc/clinical.hpp"
#include "rcc/errors.hpp"
#include "rcc/prng.hpp"

using namespace rcc;

namespace {

const char* kHeader =
    "patient_id,cohort,age_years,sex,stage,grade,subtype,os_months,event\n";

std::vector<ClinicalRecord> parse_rows(const std::string& rows) {
    return parse_clinical_text(kHeader + rows);
}

}  // namespace

TEST_CASE("parse maps fields directly") {
    const auto recs = parse_rows("P1,TCGA,64,M,3,4,ccRCC,38.2,1\n");
    REQUIRE(recs.size() == 1);
    const auto& r = recs[0];
    CHECK(r.patient_id == "P1");
    CHECK(r.cohort == "TCGA");
    CHECK(r.age_years == 64);
    CHECK(r.sex == Sex::Male);
    CHECK(r.stage == 3);
    CHECK(r.grade == 4);
    CHECK(r.subtype == Subtype::CcRcc);
    CHECK(r.os_months == doctest::Approx(38.2));
    CHECK(r.event == EventStatus::Dead);
}

TEST_CASE("parse rejects invariant violations with row context") {
    CHECK_THROWS_AS(parse_rows("P1,TCGA,64,M,5,4,ccRCC,38.2,1\n"), BadEnumValue);
    CHECK_THROWS_AS(parse_rows("P1,TCGA,64,X,3,4,ccRCC,38.2,1\n"), BadEnumValue);
    CHECK_THROWS_AS(parse_rows("P1,TCGA,64,M,3,4,ccRCC,-1,1\n"), NegativeTime);
    CHECK_THROWS_AS(parse_clinical_text("bogus,header\nP1\n"), MissingColumn);
    try {
        parse_rows("P1,TCGA,64,M,3,4,ccRCC,38.2,1\nP2,TCGA,64,M,5,4,ccRCC,1,1\n");
        FAIL("expected BadEnumValue");
    } catch (const BadEnumValue& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("grade NA becomes the unknown sentinel") {
    const auto recs = parse_rows("P1,CPTAC,50,F,2,NA,pRCC,10,0\n");
    CHECK_FALSE(recs[0].grade.has_value());
    CHECK(recs[0].event == EventStatus::Alive);
}

TEST_CASE("high_grade_label") {
    CHECK(high_grade_label(3));
    CHECK(high_grade_label(4));
    CHECK_FALSE(high_grade_label(2));
    CHECK_FALSE(high_grade_label(1));
    CHECK_THROWS_AS(high_grade_label(std::nullopt), UnknownGrade);
}

TEST_CASE("horizon_label three-way definition") {
    CHECK(horizon_label(38.2, EventStatus::Dead, 60) == HorizonLabel::Positive);
    CHECK(horizon_label(72.0, EventStatus::Alive, 60) == HorizonLabel::Negative);
    CHECK(horizon_label(24.0, EventStatus::Alive, 60) == HorizonLabel::Excluded);
    // death at exactly the horizon ties toward the event
    CHECK(horizon_label(60.0, EventStatus::Dead, 60) == HorizonLabel::Positive);
    CHECK(horizon_label(60.0, EventStatus::Alive, 60) == HorizonLabel::Negative);
    CHECK(horizon_label(90.0, EventStatus::Dead, 60) == HorizonLabel::Negative);
    CHECK_THROWS_AS(horizon_label(10, EventStatus::Unknown, 60), UnknownEvent);
}

TEST_CASE("horizon_label partitions and is monotone in the horizon") {
    Prng rng(11);
    for (int i = 0; i < 500; ++i) {
        const double t = rng.uniform(0, 120);
        const EventStatus ev = rng.uniform() < 0.5 ? EventStatus::Dead : EventStatus::Alive;
        const double h = rng.uniform(1, 120);
        // exactly one of the three labels holds
        const HorizonLabel l = horizon_label(t, ev, h);
        int count = 0;
        count += l == HorizonLabel::Positive;
        count += l == HorizonLabel::Negative;
        count += l == HorizonLabel::Excluded;
        CHECK(count == 1);
        if (ev == EventStatus::Dead) {
            // growing the horizon can only move Negative -> Positive
            const HorizonLabel l2 = horizon_label(t, ev, h + rng.uniform(0, 60));
            const bool flipped =
                l == HorizonLabel::Positive && l2 == HorizonLabel::Negative;
            CHECK_FALSE(flipped);
        }
    }
}

TEST_CASE("parse -> serialize -> parse round-trips") {
    const auto recs = parse_rows(
        "P1,TCGA,64,M,3,4,ccRCC,38.2,1\n"
        "P2,General,55,F,1,NA,pRCC,100.5,0\n"
        "P3,CPTAC,70,M,2,2,ChRCC,12.25,NA\n"
        "P4,General,61,F,4,3,ONCO,0,0\n");
    const std::string text = serialize_clinical(recs);
    const auto again = parse_clinical_text(text);
    REQUIRE(again.size() == recs.size());
    CHECK(serialize_clinical(again) == text);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(again[i].patient_id == recs[i].patient_id);
        CHECK(again[i].grade == recs[i].grade);
        CHECK(again[i].os_months == recs[i].os_months);
        CHECK(again[i].event == recs[i].event);
    }
}
