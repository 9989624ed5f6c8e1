#include <doctest.h>

#include "metagen.hpp"
#include "support/fixtures.hpp"

#include <regex>
#include <set>

using namespace idsynth;

namespace {

PortraitAsset meta(double p_male, std::map<std::string, double> eyes = {{"brown", 1.0}}) {
    PortraitAsset a;
    a.id = "p";
    a.age = 30;
    a.p_male = p_male;
    a.p_female = 1.0 - p_male;
    a.ethnicity = "white";
    a.eye_color_probs = std::move(eyes);
    a.emotion_probs = {{"neutral", 1.0}};
    return a;
}

}  // namespace

TEST_CASE("degenerate sex distribution") {
    Rng rng(1);
    PortraitAsset a = meta(1.0);
    for (int i = 0; i < 200; ++i) CHECK(sample_traits(rng, a).sex == 'M');
    a = meta(0.0);
    for (int i = 0; i < 200; ++i) CHECK(sample_traits(rng, a).sex == 'F');
}

TEST_CASE("trait distributions") {
    Rng rng(77);
    PortraitAsset female = meta(0.0, {{"brown", 0.7}, {"blue", 0.3}});
    PortraitAsset male = meta(1.0);

    const int n = 200000;
    int f5 = 0, f6 = 0, f7 = 0, blue = 0;
    int m6 = 0, m7 = 0;
    for (int i = 0; i < n; ++i) {
        const Traits tf = sample_traits(rng, female);
        CHECK(tf.weight_lb >= 100);
        CHECK(tf.weight_lb <= 200);
        CHECK(tf.height_in >= 0);
        CHECK(tf.height_in < 12);
        f5 += tf.height_ft == 5;
        f6 += tf.height_ft == 6;
        f7 += tf.height_ft == 7;
        blue += tf.eye_color == "blue";

        const Traits tm = sample_traits(rng, male);
        CHECK(tm.weight_lb >= 100);
        CHECK(tm.weight_lb <= 250);
        m6 += tm.height_ft == 6;
        m7 += tm.height_ft == 7;
    }
    CHECK(double(f5) / n == doctest::Approx(0.6).epsilon(0.01));
    CHECK(double(f6) / n == doctest::Approx(0.3).epsilon(0.02));
    CHECK(double(f7) / n == doctest::Approx(0.1).epsilon(0.04));
    CHECK(double(m6) / n == doctest::Approx(0.2).epsilon(0.03));
    CHECK(double(m7) / n == doctest::Approx(0.2).epsilon(0.03));
    CHECK(double(blue) / n == doctest::Approx(0.3).epsilon(0.02));
}

TEST_CASE("document discriminator shape") {
    Rng rng(9);
    const std::regex shape("^[A-Z0-9]{16}$");
    std::set<int> letter_counts;
    for (int i = 0; i < 20000; ++i) {
        const std::string dd = gen_document_discriminator(rng);
        REQUIRE(dd.size() == 16);
        CHECK(std::regex_match(dd, shape));
        int letters = 0;
        for (char c : dd) letters += (c >= 'A' && c <= 'Z');
        CHECK(letters >= 1);
        CHECK(letters <= 6);
        letter_counts.insert(letters);
    }
    CHECK(letter_counts.size() == 6);

    Rng a(42), b(42);
    for (int i = 0; i < 50; ++i)
        CHECK(gen_document_discriminator(a) == gen_document_discriminator(b));
}

TEST_CASE("number pool draws without replacement") {
    Rng rng(5);
    NumberPool pool("########");
    std::set<std::string> seen;
    for (int i = 0; i < 5979; ++i) {
        const std::string v = pool.draw(rng);
        REQUIRE(v.size() == 8);
        for (char c : v) CHECK((c >= '0' && c <= '9'));
        CHECK(seen.insert(v).second);
    }
    CHECK(pool.issued() == 5979);
}

TEST_CASE("number pool exhaustion") {
    Rng rng(5);
    NumberPool pool("#");
    std::set<std::string> seen;
    for (int i = 0; i < 10; ++i) seen.insert(pool.draw(rng));
    CHECK(seen.size() == 10);
    CHECK_THROWS_WITH_AS(pool.draw(rng), doctest::Contains("exhausted"),
                         std::runtime_error);
}

TEST_CASE("alphanumeric formats") {
    Rng rng(6);
    NumberPool pool("A#######");
    for (int i = 0; i < 100; ++i) {
        const std::string v = pool.draw(rng);
        REQUIRE(v.size() == 8);
        CHECK((v[0] >= 'A' && v[0] <= 'Z'));
        for (size_t k = 1; k < v.size(); ++k) CHECK((v[k] >= '0' && v[k] <= '9'));
    }
    CHECK_THROWS(NumberPool("#x#"));
}

TEST_CASE("dates and class") {
    Rng rng(11);
    const Date now{2024, 6, 15};

    int d_count = 0;
    std::map<char, int> abc;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto dc = sample_dates_and_class(rng, 30, 5, now);
        CHECK(dc.dob.year == 1994);
        CHECK(dc.issue.year >= 2019);
        CHECK(dc.issue.year <= 2024);
        CHECK(dc.expiry.year == dc.issue.year + 5);
        CHECK(dc.dob < dc.issue);
        CHECK(dc.issue <= dc.expiry);
        CHECK(dc.dob.valid());
        CHECK(dc.issue.valid());
        CHECK(dc.expiry.valid());
        if (dc.license_class == 'D') ++d_count;
        else ++abc[dc.license_class];
    }
    CHECK(double(d_count) / n == doctest::Approx(0.9).epsilon(0.003));
    for (char c : {'A', 'B', 'C'})
        CHECK(double(abc[c]) / n == doctest::Approx(0.1 / 3).epsilon(0.1));
}

TEST_CASE("issue uses the full validity window") {
    Rng rng(3);
    std::set<int> years;
    for (int i = 0; i < 2000; ++i)
        years.insert(sample_dates_and_class(rng, 40, 5, Date{2024, 1, 1}).issue.year);
    CHECK(years == std::set<int>{2019, 2020, 2021, 2022, 2023, 2024});
}

TEST_CASE("address augmentation") {
    Rng a(1), b(2);
    const std::string line = "5436 N Central Ave, Phoenix, AZ 85004";
    const std::string s1 = augment_address(line, a);
    const std::string s2 = augment_address(line, b);
    const std::string tail = " N Central Ave, Phoenix, AZ 85004";
    CHECK(s1.substr(s1.size() - tail.size()) == tail);
    CHECK(s2.substr(s2.size() - tail.size()) == tail);
    CHECK(s1 != s2);

    const size_t n1 = s1.size() - tail.size();
    CHECK(n1 >= 1);
    CHECK(n1 <= 4);
    for (size_t i = 0; i < n1; ++i) CHECK(std::isdigit(static_cast<unsigned char>(s1[i])));

    Rng c(9);
    CHECK(augment_address("No Number Rd, Nowhere", c) == "No Number Rd, Nowhere");
}

TEST_CASE("build_identity honors invariants and uniqueness") {
    const std::string pack_dir = testutil::make_min_pack("metagen_pack");
    TemplatePack pack = load_template_pack(pack_dir);
    PoolProvider pools(ProviderConfig{});
    SharedPools shared(pack.dln_format);
    const Date now{2025, 3, 1};

    PortraitAsset a = meta(0.4, {{"brown", 0.6}, {"green", 0.4}});

    std::set<std::string> names, dlns, dds;
    for (int i = 0; i < 100; ++i) {
        Rng rng(derive_seed(2024, i));
        const IdentityRecord id = build_identity(rng, a, pack, pools, shared, now);
        CHECK(id.dob < id.issue_date);
        CHECK(id.issue_date <= id.expiry_date);
        CHECK(id.expiry_date.year - id.issue_date.year == pack.validity_years);
        CHECK(id.document_discriminator.size() == 16);
        CHECK(id.license_number.size() == 8);
        CHECK(names.insert(id.given_name + "|" + id.surname).second);
        CHECK(dlns.insert(id.license_number).second);
        CHECK(dds.insert(id.document_discriminator).second);
        CHECK(id.address.find(", AZ ") != std::string::npos);
        CHECK(id.portrait_id == "p");
    }
}

TEST_CASE("build_identity is deterministic") {
    const std::string pack_dir = testutil::make_min_pack("metagen_det");
    TemplatePack pack = load_template_pack(pack_dir);
    PortraitAsset a = meta(0.5);

    auto run = [&](uint64_t seed) {
        PoolProvider pools(ProviderConfig{});
        SharedPools shared(pack.dln_format);
        std::string out;
        for (int i = 0; i < 20; ++i) {
            Rng rng(derive_seed(seed, i));
            out += identity_to_json(build_identity(rng, a, pack, pools, shared,
                                                   Date{2025, 1, 1}))
                       .dump();
            out += '\n';
        }
        return out;
    };
    CHECK(run(7) == run(7));
    CHECK(run(7) != run(8));
}

TEST_CASE("identity json round trip") {
    IdentityRecord id;
    id.given_name = "Maria";
    id.surname = "Lopez";
    id.sex = 'F';
    id.eye_color = "brown";
    id.height_ft = 5;
    id.height_in = 6;
    id.weight_lb = 140;
    id.dob = Date{1991, 4, 12};
    id.issue_date = Date{2023, 6, 1};
    id.expiry_date = Date{2028, 6, 1};
    id.document_discriminator = "AB12345678901234";
    id.license_number = "00123456";
    id.license_class = 'D';
    id.address = "742 E Palm Ln, Phoenix, AZ 85004";
    id.portrait_id = "p0003";

    const IdentityRecord back = identity_from_json(identity_to_json(id));
    CHECK(identity_to_json(back) == identity_to_json(id));
}

TEST_CASE("field value formatting") {
    IdentityRecord id;
    id.given_name = "Maria";
    id.surname = "Lopez";
    id.sex = 'F';
    id.eye_color = "brown";
    id.height_ft = 5;
    id.height_in = 6;
    id.weight_lb = 140;
    id.dob = Date{1991, 4, 2};
    id.issue_date = Date{2023, 6, 1};
    id.expiry_date = Date{2028, 6, 1};
    id.document_discriminator = "AB12345678901234";
    id.license_number = "00123456";
    id.license_class = 'D';
    id.address = "742 E Palm Ln, Phoenix, AZ 85004";

    CHECK(field_value(id, "given_name") == "MARIA");
    CHECK(field_value(id, "surname") == "LOPEZ");
    CHECK(field_value(id, "full_name") == "MARIA LOPEZ");
    CHECK(field_value(id, "dob") == "04/02/1991");
    CHECK(field_value(id, "expiry_date") == "06/01/2028");
    CHECK(field_value(id, "dln") == "00123456");
    CHECK(field_value(id, "dd") == "AB12345678901234");
    CHECK(field_value(id, "class") == "D");
    CHECK(field_value(id, "sex") == "F");
    CHECK(field_value(id, "eye_color") == "BRO");
    CHECK(field_value(id, "height") == "5'-06\"");
    CHECK(field_value(id, "weight") == "140 lb");
    CHECK(field_value(id, "address") == id.address);
    CHECK_THROWS(field_value(id, "nope"));
}
