#include "doctest.h"

#include "actmc/io.hpp"
#include "fixtures.hpp"

using namespace actmc;

namespace {

bool mentions(const ValidationReport& r, const std::string& needle) {
    for (const auto& s : r.issues)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("T1 is admissible with one setting and one off state") {
    Model m = t1_model();
    CHECK(validate(m).ok());
    auto c = classify(m);
    CHECK(c.setting == std::vector<size_t>{0});
    CHECK(c.off == std::vector<size_t>{1});
    CHECK(c.owner.at(0) == 0);
    CHECK(c.regen == std::vector<size_t>{0, 1});
}

TEST_CASE("overlapping enabling sets are reported") {
    Model m = t1_model();
    Alarm b = m.alarms[0];
    b.name = "b";
    m.alarms.push_back(b);
    auto r = validate(m);
    CHECK_FALSE(r.ok());
    CHECK(mentions(r, "enabling sets overlap"));
}

TEST_CASE("non-stochastic rows, bad bounds and disconnection are reported") {
    Model m = t1_model();
    m.delay[1][0].prob = frac(9, 10);
    auto r = validate(m);
    CHECK(mentions(r, "delay row of 't'"));

    m = t1_model();
    m.alarms[0].lower = 0;
    CHECK(mentions(validate(m), "l_a must be positive"));

    m = t1_model();
    m.delay[1] = {{1, 1, 0}};
    CHECK(mentions(validate(m), "not strongly connected"));
}

TEST_CASE("an alarm without setting states is not localized") {
    // u and v are entered only by delays inside S_a; the alarm leads to the
    // absorbing off state w.
    Model m;
    m.states = {"u", "v", "w"};
    m.lambda = 1;
    m.delay = {{{1, 1, 0}}, {{0, 1, 0}}, {{2, 1, 0}}};
    m.rate_cost = {0, 0, 0};
    Alarm a;
    a.name = "a";
    a.enabled = {0, 1};
    a.rows = {{{2, 1, 0}}, {{2, 1, 0}}, {}};
    a.family = Family::dirac();
    a.lower = 1;
    a.upper = 1;
    m.alarms.push_back(a);
    auto r = validate(m);
    CHECK(mentions(r, "not localized: 0 setting states"));
    CHECK_THROWS_AS(classify(m), ClassificationError);
}

TEST_CASE("setting states ignore identity rows of other alarms") {
    Model m = t1_model();
    m.alarms[0].rows[1] = {{1, 1, 0}};
    CHECK(setting_states(m)[0] == std::vector<size_t>{0});
}

TEST_CASE("model files round-trip") {
    for (auto fam : {Family::dirac(), Family::uniform_zero(), Family::uniform_shift(2), Family::weibull(3),
                     Family::exponential()}) {
        Model m = t1_model(fam);
        m.delay[0][0].impulse = frac(3, 7);
        m.alarms[0].rows[0][0].impulse = 5;
        CHECK(parse_model_text(emit_model(m)) == m);
    }
}

TEST_CASE("rate form is uniformized with an impulse-preserving self-loop") {
    const char* text = R"({
      "states": ["a", "b"],
      "delays": [
        {"from": "a", "to": "b", "rate": "3"},
        {"from": "b", "to": "a", "rate": "1"},
        {"from": "b", "to": "b", "rate": "1", "impulse": "6"}
      ],
      "rate_costs": {"a": 2}
    })";
    Model m = parse_model_text(text);
    CHECK(m.lambda == 3);
    CHECK(m.prob(1, 1) == frac(2, 3));
    CHECK(m.prob(1, 0) == frac(1, 3));
    CHECK(m.expected_delay_impulse(1) == 2);
    CHECK(m.rate_cost[0] == 2);
    CHECK(validate(m).ok());
}

TEST_CASE("parse errors carry a location") {
    CHECK_THROWS_WITH_AS(parse_model_text("{\"states\": [\"a\",]}"), doctest::Contains("line 1"), ParseError);
    CHECK_THROWS_WITH_AS(parse_model_text(R"({"states":["a"],"rate":"1","delays":[{"from":"a","to":"z","prob":"1"}]})"),
                         doctest::Contains("$.delays[0].to"), ParseError);
    CHECK_THROWS_WITH_AS(parse_model_text(R"({"states":["a"],"rate":"1","delays":[{"from":"a","to":"a","prob":0.5}]})"),
                         doctest::Contains("strings"), ParseError);
}

TEST_CASE("assignments parse exactly") {
    auto v = parse_assignments("d_s=0.1,d_w=7/2");
    REQUIRE(v.size() == 2);
    CHECK(v[0].first == "d_s");
    CHECK(v[0].second == frac(1, 10));
    CHECK(v[1].second == frac(7, 2));
    CHECK_THROWS_AS(parse_assignments("x"), ParseError);
}
