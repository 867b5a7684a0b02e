#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rcc {

enum class Sex { Male, Female };
enum class Subtype { CcRcc, PRcc, ChRcc, Oncocytoma, Normal };
enum class EventStatus { Alive = 0, Dead = 1, Unknown = 2 };

struct ClinicalRecord {
    std::string patient_id;
    std::string cohort;
    int age_years = 0;
    Sex sex = Sex::Male;
    int stage = 1;                 // 1..4
    std::optional<int> grade;      // 1..4, nullopt = unknown
    Subtype subtype = Subtype::CcRcc;
    double os_months = 0.0;
    EventStatus event = EventStatus::Unknown;
};

enum class HorizonLabel { Positive, Negative, Excluded };

// clinical.csv schema: header exactly
//   patient_id,cohort,age_years,sex,stage,grade,subtype,os_months,event
// sex M/F; stage 1-4; grade 1-4 or NA; subtype ccRCC/pRCC/ChRCC/ONCO/NORMAL;
// event 0/1/NA. Rows violating an invariant are rejected with their row
// number.
std::vector<ClinicalRecord> parse_clinical_csv(const std::string& path);
std::vector<ClinicalRecord> parse_clinical_text(const std::string& text);
std::string serialize_clinical(const std::vector<ClinicalRecord>& records);

// high grade = grade 3 or 4; throws UnknownGrade when the grade is missing
bool high_grade_label(std::optional<int> grade);

// Binary survival label at a follow-up horizon (months). Death at or before
// the horizon is Positive; anyone followed past the horizon is Negative
// (death at exactly the horizon ties toward Positive); alive with follow-up
// shorter than the horizon carries no usable label and is Excluded.
HorizonLabel horizon_label(double os_months, EventStatus event,
                           double horizon_months = 60.0);

std::string subtype_name(Subtype s);

}  // namespace rcc
