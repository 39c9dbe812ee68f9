#pragma once

#include <array>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tarkit/error.hpp"
#include "tarkit/text.hpp"

namespace tarkit {

enum class ReviewType { dta, intervention, qualitative, prognosis };

inline const char* review_type_name(ReviewType t) {
    switch (t) {
        case ReviewType::dta: return "DTA";
        case ReviewType::intervention: return "Intervention";
        case ReviewType::qualitative: return "Qualitative";
        case ReviewType::prognosis: return "Prognosis";
    }
    return "?";
}

inline ReviewType review_type_from_string(const std::string& s) {
    if (s == "DTA") return ReviewType::dta;
    if (s == "Intervention") return ReviewType::intervention;
    if (s == "Qualitative") return ReviewType::qualitative;
    if (s == "Prognosis") return ReviewType::prognosis;
    fail("unknown review type: " + s);
}

/// The free-text sections of a review protocol. Which sections may be
/// populated depends on the review type; sections not admitted by the type
/// stay empty.
struct Protocol {
    std::string topic_id;
    ReviewType review_type = ReviewType::dta;
    std::string title;
    std::string objectives;
    std::string types_of_studies;
    std::string types_of_participants;
    std::string index_tests;
    std::string target_conditions;
    std::string reference_standards;
    std::string types_of_intervention;
    std::string types_of_outcome_measures;

    static constexpr size_t kFieldCount = 9;

    /// Section texts in canonical order; this order is load-bearing for the
    /// feature layout and must not change.
    std::array<const std::string*, kFieldCount> fields() const {
        return {&title,
                &objectives,
                &types_of_studies,
                &types_of_participants,
                &index_tests,
                &target_conditions,
                &reference_standards,
                &types_of_intervention,
                &types_of_outcome_measures};
    }

    static const std::array<const char*, kFieldCount>& field_keys() {
        static const std::array<const char*, kFieldCount> keys = {
            "title",
            "objectives",
            "types_of_studies",
            "types_of_participants",
            "index_tests",
            "target_conditions",
            "reference_standards",
            "types_of_intervention",
            "types_of_outcome_measures"};
        return keys;
    }

    /// Whether the review type admits the field at `index` (canonical order).
    static bool field_allowed(ReviewType type, size_t index) {
        if (index < 4) return true;
        switch (type) {
            case ReviewType::dta: return index < 7;  // + index tests/conditions/standards
            case ReviewType::intervention: return index == 7 || index == 8;
            case ReviewType::prognosis: return index == 8;
            case ReviewType::qualitative: return false;
        }
        return false;
    }

    /// Title and objectives joined with a space; the seed text used for
    /// query formulation and synthetic seed documents.
    std::string seed_text() const { return concat_fields({title, objectives}); }
};

inline void validate_protocol(const Protocol& p) {
    if (p.topic_id.empty()) fail("protocol has empty topic_id");
    if (trim(p.title).empty()) fail("protocol " + p.topic_id + ": title is required");
    if (trim(p.objectives).empty()) fail("protocol " + p.topic_id + ": objectives are required");
    auto fields = p.fields();
    const auto& keys = Protocol::field_keys();
    for (size_t i = 0; i < Protocol::kFieldCount; ++i)
        if (!fields[i]->empty() && !Protocol::field_allowed(p.review_type, i))
            fail("protocol " + p.topic_id + ": field " + keys[i] + " is not valid for " +
                 review_type_name(p.review_type) + " reviews");
}

inline Protocol protocol_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail("protocol entry is not an object");
    Protocol p;
    auto get = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return "";
        if (!it->is_string()) fail(std::string("protocol field is not a string: ") + key);
        return it->get<std::string>();
    };
    p.topic_id = get("topic_id");
    std::string type = get("review_type");
    if (type.empty()) fail("protocol " + p.topic_id + ": review_type is required");
    p.review_type = review_type_from_string(type);
    p.title = get("title");
    p.objectives = get("objectives");
    p.types_of_studies = get("types_of_studies");
    p.types_of_participants = get("types_of_participants");
    p.index_tests = get("index_tests");
    p.target_conditions = get("target_conditions");
    p.reference_standards = get("reference_standards");
    p.types_of_intervention = get("types_of_intervention");
    p.types_of_outcome_measures = get("types_of_outcome_measures");
    validate_protocol(p);
    return p;
}

inline nlohmann::json protocol_to_json(const Protocol& p) {
    nlohmann::json j;
    j["topic_id"] = p.topic_id;
    j["review_type"] = review_type_name(p.review_type);
    auto fields = p.fields();
    const auto& keys = Protocol::field_keys();
    for (size_t i = 0; i < Protocol::kFieldCount; ++i)
        if (!fields[i]->empty()) j[keys[i]] = *fields[i];
    return j;
}

/// Loads one protocol per line from a JSONL file, keyed by topic_id.
inline std::map<std::string, Protocol> load_protocols_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open protocol file: " + path);
    std::map<std::string, Protocol> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        Protocol p;
        try {
            p = protocol_from_json(j);
        } catch (const Error& e) {
            fail(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        std::string topic_id = p.topic_id;
        if (!out.emplace(topic_id, std::move(p)).second)
            fail(path + ":" + std::to_string(line_no) + ": duplicate topic_id: " + topic_id);
    }
    return out;
}

}  // namespace tarkit
