#pragma once

#include "assets.hpp"
#include "common.hpp"
#include "rng.hpp"
#include "textpool.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace idsynth {

struct Traits {
    char sex = 'F';  // 'M' | 'F'
    std::string eye_color;
    int height_ft = 5;
    int height_in = 0;
    int weight_lb = 100;
};

Traits sample_traits(Rng& rng, const PortraitAsset& meta);

// 16 alphanumeric chars: 1..6 letters at random positions, digits elsewhere.
std::string gen_document_discriminator(Rng& rng);

// Issues values matching a '#'/'A' format string without replacement.
class NumberPool {
public:
    explicit NumberPool(std::string format);

    std::string draw(Rng& rng);
    size_t issued() const { return used_.size(); }
    const std::string& format() const { return format_; }

private:
    std::string format_;
    double capacity_;
    std::set<std::string> used_;
};

struct DatesAndClass {
    Date dob, issue, expiry;
    char license_class = 'D';
};

DatesAndClass sample_dates_and_class(Rng& rng, int age, int validity_years, const Date& now);

// Swap the leading street number for a fresh random 1-4 digit one.
std::string augment_address(const std::string& line, Rng& rng);

struct IdentityRecord {
    std::string given_name;
    std::string surname;
    char sex = 'F';
    std::string eye_color;
    int height_ft = 5;
    int height_in = 0;
    int weight_lb = 100;
    Date dob, issue_date, expiry_date;
    std::string document_discriminator;
    std::string license_number;
    char license_class = 'D';
    std::string address;
    std::string portrait_id;
};

nlohmann::json identity_to_json(const IdentityRecord& id);
IdentityRecord identity_from_json(const nlohmann::json& j);

// Run-wide uniqueness state. The orchestrator owns it and must call
// build_identity serially; everything after that phase is pure.
struct SharedPools {
    explicit SharedPools(const std::string& dln_format) : dln(dln_format) {}
    NumberPool dln;
    std::set<std::string> used_full_names;
    std::set<std::string> used_dd;
};

IdentityRecord build_identity(Rng& rng, const PortraitAsset& portrait,
                              const TemplatePack& pack, PoolProvider& pools,
                              SharedPools& shared, const Date& now);

// Text rendered into a document field; throws on unknown field ids.
std::string field_value(const IdentityRecord& id, const std::string& field_id);

}  // namespace idsynth
