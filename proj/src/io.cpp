#include "actmc/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace actmc {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ParseError(path + ": " + msg); }

Rational number(const json& v, const std::string& path) {
    if (v.is_string()) {
        try {
            return parse_rational(v.get<std::string>());
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
    }
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_number_unsigned()) return Rational(static_cast<unsigned long>(v.get<unsigned long long>()));
    if (v.is_number_float()) fail(path, "write non-integer numbers as strings (\"0.1\" or \"1/10\") to keep them exact");
    fail(path, "expected a number");
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

size_t state_ref(const Model& m, const json& v, const std::string& path) {
    std::string name = text(v, path);
    auto i = m.index_of(name);
    if (!i) fail(path, "unknown state '" + name + "'");
    return *i;
}

Family parse_family(const json& v, const std::string& path) {
    std::string kind;
    const json* obj = nullptr;
    if (v.is_string()) {
        kind = v.get<std::string>();
    } else if (v.is_object()) {
        kind = text(field(v, "kind", path), path + ".kind");
        obj = &v;
    } else {
        fail(path, "expected a family name or object");
    }
    if (kind == "dirac") return Family::dirac();
    if (kind == "uniform-zero") return Family::uniform_zero();
    if (kind == "exponential") return Family::exponential();
    if (kind == "uniform-shift") {
        if (!obj) fail(path, "uniform-shift needs a width");
        return Family::uniform_shift(number(field(*obj, "width", path), path + ".width"));
    }
    if (kind == "weibull") {
        if (!obj) fail(path, "weibull needs a shape");
        const json& k = field(*obj, "shape", path);
        if (!k.is_number_integer() || k.get<long>() < 1) fail(path + ".shape", "shape must be a positive integer");
        return Family::weibull(static_cast<unsigned>(k.get<long>()));
    }
    fail(path, "unknown family '" + kind + "'");
}

void add_transition(Row& row, size_t to, const Rational& p, const Rational& imp, const std::string& path) {
    for (const auto& tr : row)
        if (tr.to == to) fail(path, "duplicate transition");
    row.push_back({to, p, imp});
}

void sort_row(Row& row) {
    std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.to < b.to; });
}

std::string line_col(const std::string& text, size_t byte) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Model parse_model_text(const std::string& src) {
    json doc;
    try {
        doc = json::parse(src);
    } catch (const json::parse_error& e) {
        throw ParseError("syntax error at " + line_col(src, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
    if (!doc.is_object()) fail("$", "expected a JSON object");
    Model m;
    const json& st = field(doc, "states", "$");
    if (!st.is_array()) fail("$.states", "expected an array");
    for (size_t i = 0; i < st.size(); ++i) {
        std::string name = text(st[i], "$.states[" + std::to_string(i) + "]");
        if (m.index_of(name)) fail("$.states[" + std::to_string(i) + "]", "duplicate state '" + name + "'");
        m.states.push_back(name);
    }
    size_t n = m.size();
    m.delay.assign(n, {});
    m.rate_cost.assign(n, 0);

    bool rate_form = !doc.contains("rate");
    if (!rate_form) m.lambda = number(doc["rate"], "$.rate");

    const json& dl = field(doc, "delays", "$");
    if (!dl.is_array()) fail("$.delays", "expected an array");
    std::vector<std::vector<std::pair<size_t, std::pair<Rational, Rational>>>> raw(n);
    for (size_t i = 0; i < dl.size(); ++i) {
        std::string p = "$.delays[" + std::to_string(i) + "]";
        size_t from = state_ref(m, field(dl[i], "from", p), p + ".from");
        size_t to = state_ref(m, field(dl[i], "to", p), p + ".to");
        Rational imp = dl[i].contains("impulse") ? number(dl[i]["impulse"], p + ".impulse") : Rational(0);
        Rational w;
        if (rate_form) {
            if (dl[i].contains("prob")) fail(p, "'prob' given but the model has no top-level 'rate'");
            w = number(field(dl[i], "rate", p), p + ".rate");
            if (w <= 0) fail(p + ".rate", "rates must be positive");
        } else {
            if (dl[i].contains("rate")) fail(p, "'rate' given but the model has a top-level 'rate'");
            w = number(field(dl[i], "prob", p), p + ".prob");
        }
        for (const auto& e : raw[from])
            if (e.first == to) fail(p, "duplicate transition");
        raw[from].push_back({to, {w, imp}});
    }
    if (rate_form) {
        std::vector<RateTransition> rates;
        for (size_t s = 0; s < n; ++s)
            for (const auto& e : raw[s]) rates.push_back({s, e.first, e.second.first, e.second.second});
        if (rates.empty()) fail("$.delays", "no positive rates");
        uniformize(m, rates);
    } else {
        for (size_t s = 0; s < n; ++s) {
            for (const auto& e : raw[s]) m.delay[s].push_back({e.first, e.second.first, e.second.second});
            sort_row(m.delay[s]);
        }
    }

    if (doc.contains("rate_costs")) {
        const json& rc = doc["rate_costs"];
        if (!rc.is_object()) fail("$.rate_costs", "expected an object");
        for (auto it = rc.begin(); it != rc.end(); ++it) {
            auto s = m.index_of(it.key());
            if (!s) fail("$.rate_costs", "unknown state '" + it.key() + "'");
            m.rate_cost[*s] = number(it.value(), "$.rate_costs." + it.key());
        }
    }

    if (doc.contains("alarms")) {
        const json& al = doc["alarms"];
        if (!al.is_array()) fail("$.alarms", "expected an array");
        for (size_t i = 0; i < al.size(); ++i) {
            std::string p = "$.alarms[" + std::to_string(i) + "]";
            Alarm a;
            a.name = text(field(al[i], "name", p), p + ".name");
            if (m.alarm_index(a.name)) fail(p + ".name", "duplicate alarm '" + a.name + "'");
            a.family = parse_family(field(al[i], "family", p), p + ".family");
            a.lower = number(field(al[i], "lower", p), p + ".lower");
            a.upper = number(field(al[i], "upper", p), p + ".upper");
            const json& en = field(al[i], "enabled", p);
            if (!en.is_array()) fail(p + ".enabled", "expected an array");
            for (size_t j = 0; j < en.size(); ++j)
                a.enabled.push_back(state_ref(m, en[j], p + ".enabled[" + std::to_string(j) + "]"));
            std::sort(a.enabled.begin(), a.enabled.end());
            if (std::adjacent_find(a.enabled.begin(), a.enabled.end()) != a.enabled.end())
                fail(p + ".enabled", "duplicate state");
            a.rows.assign(n, {});
            const json& tr = field(al[i], "transitions", p);
            if (!tr.is_array()) fail(p + ".transitions", "expected an array");
            for (size_t j = 0; j < tr.size(); ++j) {
                std::string q = p + ".transitions[" + std::to_string(j) + "]";
                size_t from = state_ref(m, field(tr[j], "from", q), q + ".from");
                size_t to = state_ref(m, field(tr[j], "to", q), q + ".to");
                if (!a.enables(from)) fail(q + ".from", "alarm is not enabled in '" + m.states[from] + "'");
                Rational pr = number(field(tr[j], "prob", q), q + ".prob");
                Rational imp = tr[j].contains("impulse") ? number(tr[j]["impulse"], q + ".impulse") : Rational(0);
                add_transition(a.rows[from], to, pr, imp, q);
            }
            for (auto& row : a.rows) sort_row(row);
            m.alarms.push_back(std::move(a));
        }
    }
    return m;
}

Model parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_model_text(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

ordered_json model_to_json(const Model& m) {
    ordered_json j;
    j["format"] = "actmc-model";
    j["version"] = 1;
    j["states"] = m.states;
    j["rate"] = to_string(m.lambda);
    ordered_json rc = ordered_json::object();
    for (size_t s = 0; s < m.size(); ++s)
        if (m.rate_cost[s] != 0) rc[m.states[s]] = to_string(m.rate_cost[s]);
    j["rate_costs"] = rc;
    ordered_json dl = ordered_json::array();
    for (size_t s = 0; s < m.size(); ++s)
        for (const auto& tr : m.delay[s]) {
            ordered_json t;
            t["from"] = m.states[s];
            t["to"] = m.states[tr.to];
            t["prob"] = to_string(tr.prob);
            if (tr.impulse != 0) t["impulse"] = to_string(tr.impulse);
            dl.push_back(t);
        }
    j["delays"] = dl;
    ordered_json al = ordered_json::array();
    for (const auto& a : m.alarms) {
        ordered_json o;
        o["name"] = a.name;
        if (a.family.kind == FamilyKind::UniformShift)
            o["family"] = {{"kind", "uniform-shift"}, {"width", to_string(a.family.width)}};
        else if (a.family.kind == FamilyKind::Weibull)
            o["family"] = {{"kind", "weibull"}, {"shape", a.family.shape}};
        else
            o["family"] = a.family.name();
        o["lower"] = to_string(a.lower);
        o["upper"] = to_string(a.upper);
        ordered_json en = ordered_json::array();
        for (size_t s : a.enabled) en.push_back(m.states[s]);
        o["enabled"] = en;
        ordered_json tr = ordered_json::array();
        for (size_t s : a.enabled)
            for (const auto& t : a.rows[s]) {
                ordered_json x;
                x["from"] = m.states[s];
                x["to"] = m.states[t.to];
                x["prob"] = to_string(t.prob);
                if (t.impulse != 0) x["impulse"] = to_string(t.impulse);
                tr.push_back(x);
            }
        o["transitions"] = tr;
        al.push_back(o);
    }
    j["alarms"] = al;
    return j;
}

std::string emit_model(const Model& m) { return model_to_json(m).dump(2) + "\n"; }

std::vector<std::pair<std::string, Rational>> parse_assignments(const std::string& src) {
    std::vector<std::pair<std::string, Rational>> out;
    std::stringstream ss(src);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("assignment '" + item + "' lacks '='");
        std::string key = item.substr(0, eq);
        try {
            out.emplace_back(key, parse_rational(item.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw ParseError("assignment '" + item + "': " + e.what());
        }
    }
    return out;
}

}  // namespace actmc
