#include "conjlab/harness/config.hpp"

#include "conjlab/core/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace conjlab::harness {

namespace {

Json from_yaml(const YAML::Node& node) {
    switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
        return nullptr;
    case YAML::NodeType::Sequence: {
        Json arr = Json::array();
        for (const auto& item : node) arr.push_back(from_yaml(item));
        return arr;
    }
    case YAML::NodeType::Map: {
        Json obj = Json::object();
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (obj.contains(key)) throw ConfigError("duplicate key '" + key + "'");
            obj[key] = from_yaml(kv.second);
        }
        return obj;
    }
    case YAML::NodeType::Scalar: {
        const std::string& s = node.Scalar();
        if (node.Tag() == "!") return s;  // quoted
        if (s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
        if (s == "true" || s == "True" || s == "TRUE") return true;
        if (s == "false" || s == "False" || s == "FALSE") return false;
        long long i = 0;
        if (YAML::convert<long long>::decode(node, i) && s.find_first_of(".eE") == std::string::npos) return i;
        double d = 0.0;
        if (YAML::convert<double>::decode(node, d)) return d;
        return s;
    }
    }
    return nullptr;
}

std::string kind_of(const Json& j) {
    if (j.is_null()) return "null";
    if (j.is_boolean()) return "boolean";
    if (j.is_number()) return "number";
    if (j.is_string()) return "string";
    if (j.is_array()) return "list";
    return "mapping";
}

std::string range_text(double lo, double hi, bool lo_open) {
    std::ostringstream os;
    os << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
    return os.str();
}

} // namespace

Json parse_document(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return Json::parse(text);
        } catch (const Json::exception& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
    }
    try {
        return from_yaml(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("invalid YAML: ") + e.what());
    }
}

Json load_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str());
}

Section::Section(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {
    if (!node.is_object())
        throw ConfigError("'" + (path_.empty() ? std::string("<root>") : path_) + "' must be a mapping, got " +
                          kind_of(node));
}

bool Section::has(const std::string& key) const {
    return node_->contains(key) && !(*node_)[key].is_null();
}

const Json* Section::value(const std::string& key) const {
    used_.insert(key);
    if (!has(key)) return nullptr;
    return &(*node_)[key];
}

const Json& Section::raw(const std::string& key) const {
    const Json* v = value(key);
    if (!v) throw ConfigError("missing required key '" + where(key) + "'");
    return *v;
}

double Section::number(const std::string& key, std::optional<double> fallback, double lo, double hi,
                       bool lo_open) const {
    const Json* v = value(key);
    if (!v) {
        if (!fallback) throw ConfigError("missing required key '" + where(key) + "'");
        return *fallback;
    }
    if (!v->is_number()) throw ConfigError("'" + where(key) + "' must be a number, got " + kind_of(*v));
    const double x = v->get<double>();
    if (!std::isfinite(x) || x < lo || x > hi || (lo_open && x == lo))
        throw ConfigError("'" + where(key) + "' = " + v->dump() + " is outside " + range_text(lo, hi, lo_open));
    return x;
}

std::uint64_t Section::count(const std::string& key, std::optional<std::uint64_t> fallback, std::uint64_t lo,
                             std::uint64_t hi) const {
    const Json* v = value(key);
    if (!v) {
        if (!fallback) throw ConfigError("missing required key '" + where(key) + "'");
        return *fallback;
    }
    double x = 0.0;
    if (v->is_number_integer()) {
        if (v->is_number_unsigned()) {
            const auto u = v->get<std::uint64_t>();
            if (u < lo || u > hi)
                throw ConfigError("'" + where(key) + "' = " + v->dump() + " is outside [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
            return u;
        }
        x = static_cast<double>(v->get<std::int64_t>());
    } else if (v->is_number_float()) {
        x = v->get<double>();  // allows 1e6
        if (x != std::floor(x)) throw ConfigError("'" + where(key) + "' must be an integer");
    } else {
        throw ConfigError("'" + where(key) + "' must be an integer, got " + kind_of(*v));
    }
    if (x < static_cast<double>(lo) || x > static_cast<double>(hi))
        throw ConfigError("'" + where(key) + "' = " + v->dump() + " is outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    return static_cast<std::uint64_t>(x);
}

bool Section::flag(const std::string& key, bool fallback) const {
    const Json* v = value(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError("'" + where(key) + "' must be true or false");
    return v->get<bool>();
}

std::string Section::text(const std::string& key, std::optional<std::string> fallback,
                          const std::vector<std::string>& allowed) const {
    const Json* v = value(key);
    if (!v) {
        if (!fallback) throw ConfigError("missing required key '" + where(key) + "'");
        return *fallback;
    }
    if (!v->is_string()) throw ConfigError("'" + where(key) + "' must be a string, got " + kind_of(*v));
    auto s = v->get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError("'" + where(key) + "' = '" + s + "' is not one of: " + list);
    }
    return s;
}

std::vector<double> Section::numbers(const std::string& key, std::optional<std::vector<double>> fallback,
                                     double lo, double hi, bool lo_open) const {
    const Json* v = value(key);
    if (!v) {
        if (!fallback) throw ConfigError("missing required key '" + where(key) + "'");
        return *fallback;
    }
    std::vector<double> out;
    if (v->is_number()) {
        out.push_back(v->get<double>());
    } else if (v->is_array()) {
        for (const auto& e : *v) {
            if (!e.is_number()) throw ConfigError("'" + where(key) + "' must be a list of numbers");
            out.push_back(e.get<double>());
        }
    } else {
        throw ConfigError("'" + where(key) + "' must be a number or a list of numbers");
    }
    if (out.empty()) throw ConfigError("'" + where(key) + "' must not be empty");
    for (double x : out)
        if (!std::isfinite(x) || x < lo || x > hi || (lo_open && x == lo))
            throw ConfigError("'" + where(key) + "' entry " + Json(x).dump() + " is outside " +
                              range_text(lo, hi, lo_open));
    return out;
}

std::vector<std::uint64_t> Section::counts(const std::string& key, std::optional<std::vector<std::uint64_t>> fallback,
                                           std::uint64_t lo, std::uint64_t hi) const {
    const Json* v = value(key);
    if (!v) {
        if (!fallback) throw ConfigError("missing required key '" + where(key) + "'");
        return *fallback;
    }
    Json wrapped = Json::object();
    std::vector<std::uint64_t> out;
    const Json items = v->is_array() ? *v : Json::array({*v});
    for (std::size_t k = 0; k < items.size(); ++k) {
        wrapped["item"] = items[k];
        out.push_back(Section(wrapped, where(key) + "[" + std::to_string(k) + "]").count("item", std::nullopt, lo, hi));
    }
    if (out.empty()) throw ConfigError("'" + where(key) + "' must not be empty");
    return out;
}

Section Section::section(const std::string& key) const {
    const Json* v = value(key);
    if (!v) throw ConfigError("missing required section '" + where(key) + "'");
    return Section(*v, where(key));
}

std::vector<Section> Section::sections(const std::string& key) const {
    const Json* v = value(key);
    if (!v) throw ConfigError("missing required key '" + where(key) + "'");
    if (!v->is_array() || v->empty()) throw ConfigError("'" + where(key) + "' must be a nonempty list of mappings");
    std::vector<Section> out;
    for (std::size_t k = 0; k < v->size(); ++k) out.emplace_back((*v)[k], where(key) + "[" + std::to_string(k) + "]");
    return out;
}

void Section::finish() const {
    for (const auto& [key, _] : node_->items())
        if (!used_.count(key)) throw ConfigError("unknown key '" + where(key) + "'");
}

namespace {

gauss::CorrelationModel parse_model(const Section& s) {
    const auto family = s.text("family", "powered_exponential", {"powered_exponential", "generalized_cauchy"});
    const double C = s.number("C", 1.0, 0.0, 1e6, true);
    if (s.has("alpha")) {
        const Json& a = s.raw("alpha");
        if (!a.is_number()) throw ConfigError("'" + s.path() + ".alpha' must be a number");
        const double alpha = a.get<double>();
        if (!(alpha > 0.0 && alpha <= 2.0))
            throw ConfigError("'" + s.path() + ".alpha' = " + a.dump() +
                              " violates the local expansion r(t) = 1 - C|t|^alpha + o(|t|^alpha), which needs alpha in (0, 2]");
    }
    const double alpha = s.number("alpha", std::nullopt, 0.0, 2.0, true);
    if (family == "generalized_cauchy")
        return gauss::CorrelationModel::generalized_cauchy(C, alpha, s.number("gamma", 1.0, 0.0, 1e6, true));
    return gauss::CorrelationModel::powered_exponential(C, alpha);
}

limit::TimeChangeLaw parse_law(const Section& s) {
    if (s.has("discrete") == s.has("uniform"))
        throw ConfigError("'" + s.path() + "' needs exactly one of 'discrete' or 'uniform'");
    if (s.has("discrete")) {
        std::vector<limit::TimeChangeLaw::Atom> atoms;
        for (const auto& atom : s.sections("discrete")) {
            atoms.push_back({atom.number("value", std::nullopt, 0.0, 1e6), atom.number("prob", std::nullopt, 0.0, 1.0, true)});
            atom.finish();
        }
        s.finish();
        return limit::TimeChangeLaw::discrete(std::move(atoms));
    }
    const auto u = s.section("uniform");
    auto law = limit::TimeChangeLaw::uniform(u.number("lo", std::nullopt, 0.0, 1e6), u.number("hi", std::nullopt, 0.0, 1e6, true));
    u.finish();
    s.finish();
    return law;
}

limit::ProcessSpec parse_process(const Section& s) {
    auto model = parse_model(s);
    const double b = s.number("b", 1.0, 0.0, 1e3, true);
    std::optional<limit::TimeChangeLaw> theta;
    if (s.has("theta")) theta = parse_law(s.section("theta"));
    s.finish();
    return limit::ProcessSpec(model, b, theta);
}

} // namespace

limit::EnsembleSpec parse_ensemble(const Section& s) {
    if (s.has("processes") == s.has("process"))
        throw ConfigError("'" + s.path() + "' needs exactly one of 'processes' (a list) or 'process' with 'n'");
    std::vector<limit::ProcessSpec> procs;
    if (s.has("processes")) {
        if (s.has("n")) throw ConfigError("'" + s.path() + ".n' is only used together with 'process'");
        for (const auto& p : s.sections("processes")) procs.push_back(parse_process(p));
    } else {
        const auto n = s.count("n", 1, 1, 64);
        const auto p = parse_process(s.section("process"));
        procs.assign(n, p);
    }
    s.finish();
    return limit::EnsembleSpec(std::move(procs));
}

limit::LimitVariant parse_variant(const Section& s) {
    const auto kind = limit::limit_kind_from_string(
        s.text("kind", "standard", {"standard", "order_stat", "time_changed", "non_standard"}));
    limit::LimitVariant v{kind, 0};
    if (kind == limit::LimitVariant::Kind::OrderStat) v.j = s.count("j", std::nullopt, 1, 64);
    s.finish();
    return v;
}

} // namespace conjlab::harness
