#include "rcc/clinical.hpp"

#include <sstream>

#include "rcc/errors.hpp"
#include "rcc/util.hpp"

namespace rcc {

namespace {

const char* kHeader =
    "patient_id,cohort,age_years,sex,stage,grade,subtype,os_months,event";

Subtype parse_subtype(const std::string& s, int row) {
    if (s == "ccRCC") return Subtype::CcRcc;
    if (s == "pRCC") return Subtype::PRcc;
    if (s == "ChRCC") return Subtype::ChRcc;
    if (s == "ONCO") return Subtype::Oncocytoma;
    if (s == "NORMAL") return Subtype::Normal;
    throw BadEnumValue("row " + std::to_string(row) + ": bad subtype '" + s + "'");
}

}  // namespace

std::string subtype_name(Subtype s) {
    switch (s) {
        case Subtype::CcRcc: return "ccRCC";
        case Subtype::PRcc: return "pRCC";
        case Subtype::ChRcc: return "ChRCC";
        case Subtype::Oncocytoma: return "ONCO";
        case Subtype::Normal: return "NORMAL";
    }
    return "?";
}

std::vector<ClinicalRecord> parse_clinical_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty clinical file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw MissingColumn("clinical header mismatch, expected: " +
                            std::string(kHeader));

    std::vector<ClinicalRecord> records;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 9)
            throw MissingColumn("row " + std::to_string(row) + ": expected 9 fields, got " +
                                std::to_string(f.size()));
        const std::string ctx = "row " + std::to_string(row);
        ClinicalRecord r;
        r.patient_id = f[0];
        r.cohort = f[1];
        const long age = parse_long(f[2], ctx);
        if (age < 0) throw BadEnumValue(ctx + ": negative age");
        r.age_years = static_cast<int>(age);
        if (f[3] == "M")
            r.sex = Sex::Male;
        else if (f[3] == "F")
            r.sex = Sex::Female;
        else
            throw BadEnumValue(ctx + ": bad sex '" + f[3] + "'");
        const long stage = parse_long(f[4], ctx);
        if (stage < 1 || stage > 4) throw BadEnumValue(ctx + ": stage out of 1..4");
        r.stage = static_cast<int>(stage);
        if (f[5] == "NA") {
            r.grade = std::nullopt;
        } else {
            const long grade = parse_long(f[5], ctx);
            if (grade < 1 || grade > 4) throw BadEnumValue(ctx + ": grade out of 1..4");
            r.grade = static_cast<int>(grade);
        }
        r.subtype = parse_subtype(f[6], row);
        r.os_months = parse_double(f[7], ctx);
        if (r.os_months < 0.0) throw NegativeTime(ctx + ": negative os_months");
        if (f[8] == "0")
            r.event = EventStatus::Alive;
        else if (f[8] == "1")
            r.event = EventStatus::Dead;
        else if (f[8] == "NA")
            r.event = EventStatus::Unknown;
        else
            throw BadEnumValue(ctx + ": bad event '" + f[8] + "'");
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<ClinicalRecord> parse_clinical_csv(const std::string& path) {
    return parse_clinical_text(read_file(path));
}

std::string serialize_clinical(const std::vector<ClinicalRecord>& records) {
    std::ostringstream out;
    out << kHeader << "\n";
    for (const auto& r : records) {
        out << r.patient_id << ',' << r.cohort << ',' << r.age_years << ','
            << (r.sex == Sex::Male ? 'M' : 'F') << ',' << r.stage << ',';
        if (r.grade)
            out << *r.grade;
        else
            out << "NA";
        out << ',' << subtype_name(r.subtype) << ',' << format_double(r.os_months) << ',';
        switch (r.event) {
            case EventStatus::Alive: out << '0'; break;
            case EventStatus::Dead: out << '1'; break;
            case EventStatus::Unknown: out << "NA"; break;
        }
        out << "\n";
    }
    return out.str();
}

bool high_grade_label(std::optional<int> grade) {
    if (!grade) throw UnknownGrade("grade unknown");
    return *grade == 3 || *grade == 4;
}

HorizonLabel horizon_label(double os_months, EventStatus event, double horizon_months) {
    if (event == EventStatus::Unknown) throw UnknownEvent("event status unknown");
    if (horizon_months <= 0.0) throw DataError("horizon must be positive");
    if (event == EventStatus::Dead && os_months <= horizon_months)
        return HorizonLabel::Positive;
    if (os_months >= horizon_months) return HorizonLabel::Negative;
    return HorizonLabel::Excluded;
}

}  // namespace rcc
