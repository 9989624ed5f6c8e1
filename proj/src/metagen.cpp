#include "metagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

using nlohmann::json;

namespace idsynth {

namespace {

std::string sample_categorical(Rng& rng, const std::map<std::string, double>& probs) {
    const double u = rng.uniform();
    double acc = 0;
    for (const auto& [name, p] : probs) {
        acc += p;
        if (u < acc) return name;
    }
    return probs.rbegin()->first;
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

Traits sample_traits(Rng& rng, const PortraitAsset& meta) {
    if (std::abs(meta.p_male + meta.p_female - 1.0) > 1e-6)
        throw std::invalid_argument("sex_probs not normalized");

    Traits t;
    t.sex = rng.uniform() < meta.p_male ? 'M' : 'F';
    t.eye_color = sample_categorical(rng, meta.eye_color_probs);

    const double u = rng.uniform();
    if (u < 0.6) t.height_ft = 5;
    else if (t.sex == 'F') t.height_ft = u < 0.9 ? 6 : 7;
    else t.height_ft = u < 0.8 ? 6 : 7;
    t.height_in = static_cast<int>(rng.below(12));

    const int hi = t.sex == 'F' ? 200 : 250;
    t.weight_lb = static_cast<int>(rng.uniform_int(100, hi));
    return t;
}

std::string gen_document_discriminator(Rng& rng) {
    const int n = 16;
    const int letters = static_cast<int>(rng.uniform_int(1, 6));
    int idx[n];
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < letters; ++i)
        std::swap(idx[i], idx[i + rng.below(n - i)]);

    std::string out(n, '0');
    bool is_letter[n] = {};
    for (int i = 0; i < letters; ++i) is_letter[idx[i]] = true;
    for (int i = 0; i < n; ++i)
        out[i] = is_letter[i] ? static_cast<char>('A' + rng.below(26))
                              : static_cast<char>('0' + rng.below(10));
    return out;
}

NumberPool::NumberPool(std::string format) : format_(std::move(format)) {
    if (format_.empty()) throw std::invalid_argument("empty number format");
    capacity_ = 1.0;
    for (char c : format_) {
        if (c == '#') capacity_ *= 10.0;
        else if (c == 'A') capacity_ *= 26.0;
        else throw std::invalid_argument("number format may contain only '#' and 'A'");
    }
}

std::string NumberPool::draw(Rng& rng) {
    if (static_cast<double>(used_.size()) >= capacity_)
        throw std::runtime_error("number pool exhausted: " + format_);
    for (;;) {
        std::string v(format_.size(), '0');
        for (size_t i = 0; i < format_.size(); ++i)
            v[i] = format_[i] == '#' ? static_cast<char>('0' + rng.below(10))
                                     : static_cast<char>('A' + rng.below(26));
        if (used_.insert(v).second) return v;
    }
}

DatesAndClass sample_dates_and_class(Rng& rng, int age, int validity_years, const Date& now) {
    if (validity_years < 1) throw std::invalid_argument("validity_years must be >= 1");
    DatesAndClass out;
    const int birth_year = now.year - age;

    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        int m = static_cast<int>(rng.uniform_int(1, 12));
        out.dob = Date{birth_year, m, 1};
        out.dob.day = static_cast<int>(rng.uniform_int(1, Date::days_in_month(birth_year, m)));

        const int k = static_cast<int>(rng.below(validity_years + 1));
        const int issue_year = now.year - k;
        m = static_cast<int>(rng.uniform_int(1, 12));
        out.issue = Date{issue_year, m, 1};
        out.issue.day =
            static_cast<int>(rng.uniform_int(1, Date::days_in_month(issue_year, m)));

        const int expiry_year = issue_year + validity_years;
        m = static_cast<int>(rng.uniform_int(1, 12));
        out.expiry = Date{expiry_year, m, 1};
        out.expiry.day =
            static_cast<int>(rng.uniform_int(1, Date::days_in_month(expiry_year, m)));

        ok = out.dob < out.issue && out.issue <= out.expiry;
    }
    if (!ok) throw std::runtime_error("date constraint unsatisfiable");

    if (rng.uniform() > 0.9)
        out.license_class = static_cast<char>('A' + rng.below(3));
    else
        out.license_class = 'D';
    return out;
}

std::string augment_address(const std::string& line, Rng& rng) {
    size_t end = 0;
    while (end < line.size() && std::isdigit(static_cast<unsigned char>(line[end]))) ++end;
    if (end == 0) return line;

    const int digits = static_cast<int>(rng.uniform_int(1, 4));
    uint64_t lo = 1;
    for (int i = 1; i < digits; ++i) lo *= 10;
    const uint64_t hi = lo * 10 - 1;
    const uint64_t number = lo + rng.below(hi - lo + 1);
    return std::to_string(number) + line.substr(end);
}

json identity_to_json(const IdentityRecord& id) {
    return json{{"given_name", id.given_name},
                {"surname", id.surname},
                {"sex", std::string(1, id.sex)},
                {"eye_color", id.eye_color},
                {"height_ft", id.height_ft},
                {"height_in", id.height_in},
                {"weight_lb", id.weight_lb},
                {"dob", id.dob.iso()},
                {"issue_date", id.issue_date.iso()},
                {"expiry_date", id.expiry_date.iso()},
                {"document_discriminator", id.document_discriminator},
                {"license_number", id.license_number},
                {"license_class", std::string(1, id.license_class)},
                {"address", id.address},
                {"portrait_id", id.portrait_id}};
}

IdentityRecord identity_from_json(const json& j) {
    IdentityRecord id;
    id.given_name = j.at("given_name").get<std::string>();
    id.surname = j.at("surname").get<std::string>();
    id.sex = j.at("sex").get<std::string>().at(0);
    id.eye_color = j.at("eye_color").get<std::string>();
    id.height_ft = j.at("height_ft").get<int>();
    id.height_in = j.at("height_in").get<int>();
    id.weight_lb = j.at("weight_lb").get<int>();
    id.dob = Date::parse(j.at("dob").get<std::string>());
    id.issue_date = Date::parse(j.at("issue_date").get<std::string>());
    id.expiry_date = Date::parse(j.at("expiry_date").get<std::string>());
    id.document_discriminator = j.at("document_discriminator").get<std::string>();
    id.license_number = j.at("license_number").get<std::string>();
    id.license_class = j.at("license_class").get<std::string>().at(0);
    id.address = j.at("address").get<std::string>();
    id.portrait_id = j.at("portrait_id").get<std::string>();
    return id;
}

IdentityRecord build_identity(Rng& rng, const PortraitAsset& portrait,
                              const TemplatePack& pack, PoolProvider& pools,
                              SharedPools& shared, const Date& now) {
    IdentityRecord id;
    id.portrait_id = portrait.id;

    const Traits t = sample_traits(rng, portrait);
    id.sex = t.sex;
    id.eye_color = t.eye_color;
    id.height_ft = t.height_ft;
    id.height_in = t.height_in;
    id.weight_lb = t.weight_lb;

    PoolKey name_key{portrait.ethnicity, std::string(1, t.sex), pack.language, ""};
    const TextPool given = pools.fetch(PoolKind::given_names, name_key);
    const TextPool sur = pools.fetch(PoolKind::surnames, name_key);

    bool named = false;
    for (int attempt = 0; attempt < 1000 && !named; ++attempt) {
        const auto& g = given.entries[rng.below(given.entries.size())];
        const auto& s = sur.entries[rng.below(sur.entries.size())];
        if (shared.used_full_names.insert(g + "\x1f" + s).second) {
            id.given_name = g;
            id.surname = s;
            named = true;
        }
    }
    if (!named) throw std::runtime_error("name-combination pool exhausted");

    const TextPool addr = pools.fetch(PoolKind::addresses, PoolKey{"", "", "", pack.region});
    id.address = augment_address(addr.entries[rng.below(addr.entries.size())], rng);

    for (;;) {
        id.document_discriminator = gen_document_discriminator(rng);
        if (shared.used_dd.insert(id.document_discriminator).second) break;
    }
    id.license_number = shared.dln.draw(rng);

    const auto dc =
        sample_dates_and_class(rng, static_cast<int>(portrait.age), pack.validity_years, now);
    id.dob = dc.dob;
    id.issue_date = dc.issue;
    id.expiry_date = dc.expiry;
    id.license_class = dc.license_class;
    return id;
}

std::string field_value(const IdentityRecord& id, const std::string& field_id) {
    if (field_id == "given_name") return upper(id.given_name);
    if (field_id == "surname") return upper(id.surname);
    if (field_id == "full_name") return upper(id.given_name + " " + id.surname);
    if (field_id == "dob") return strprintf("%02d/%02d/%04d", id.dob.month, id.dob.day, id.dob.year);
    if (field_id == "issue_date")
        return strprintf("%02d/%02d/%04d", id.issue_date.month, id.issue_date.day,
                         id.issue_date.year);
    if (field_id == "expiry_date")
        return strprintf("%02d/%02d/%04d", id.expiry_date.month, id.expiry_date.day,
                         id.expiry_date.year);
    if (field_id == "dd" || field_id == "document_discriminator")
        return id.document_discriminator;
    if (field_id == "dln" || field_id == "license_number") return id.license_number;
    if (field_id == "class" || field_id == "license_class")
        return std::string(1, id.license_class);
    if (field_id == "sex") return std::string(1, id.sex);
    if (field_id == "eye_color") return upper(id.eye_color.substr(0, 3));
    if (field_id == "height")
        return strprintf("%d'-%02d\"", id.height_ft, id.height_in);
    if (field_id == "weight") return strprintf("%d lb", id.weight_lb);
    if (field_id == "address") return id.address;
    throw std::runtime_error("no value mapping for field '" + field_id + "'");
}

}  // namespace idsynth
