#pragma once

// Constructor configs: TOML for people, JSON as the machine mirror. Both map
// onto BuildConfig, which selects and parameterizes one constructor.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "fence_forge/constructors.hpp"

namespace ff {

struct BuildConfig {
    std::string kind;
    std::size_t depth = 0;
    std::size_t alphabet = 2;
    /// Base cycle lengths (isometry lifts) or the divisibility chain (minimal Fraisse).
    std::vector<std::size_t> periods;
    /// Levels where masked child cycles start (isometry lifts).
    std::vector<std::size_t> masks;
    std::size_t vertex_budget = kDefaultVertexBudget;
};

inline const std::vector<std::string>& known_kinds() {
    static const std::vector<std::string> k{"cantor",          "lelek",          "fraisse",
                                            "twosided",        "isometry_fraisse", "isometry_lelek",
                                            "isometry_twosided", "isometry_warmup", "transitive",
                                            "chaotic",         "mixing",         "minimal_fraisse"};
    return k;
}

inline void check_config(const BuildConfig& c) {
    const auto& k = known_kinds();
    if (std::find(k.begin(), k.end(), c.kind) == k.end())
        throw Error(ErrorKind::ParseError, "unknown kind '" + c.kind + "'");
}

inline BuildConfig config_from_json(const nlohmann::json& j) {
    try {
        BuildConfig c;
        c.kind = j.at("kind").get<std::string>();
        c.depth = j.value("depth", std::size_t{0});
        c.alphabet = j.value("alphabet", std::size_t{2});
        if (j.contains("periods")) c.periods = j.at("periods").get<std::vector<std::size_t>>();
        if (j.contains("masks")) c.masks = j.at("masks").get<std::vector<std::size_t>>();
        c.vertex_budget = j.value("vertex_budget", kDefaultVertexBudget);
        check_config(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

inline BuildConfig config_from_toml(const std::string& text) {
    toml::table t;
    try {
        t = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw Error(ErrorKind::ParseError, std::string(e.description()));
    }
    auto count = [&](const char* key, std::size_t dflt) -> std::size_t {
        auto node = t[key];
        if (!node) return dflt;
        auto v = node.value<std::int64_t>();
        if (!v || *v < 0) throw Error(ErrorKind::ParseError, std::string("'") + key + "' must be a nonnegative integer");
        return static_cast<std::size_t>(*v);
    };
    auto list = [&](const char* key) {
        std::vector<std::size_t> out;
        auto node = t[key];
        if (!node) return out;
        auto* arr = node.as_array();
        if (!arr) throw Error(ErrorKind::ParseError, std::string("'") + key + "' must be an array");
        for (auto& e : *arr) {
            auto v = e.value<std::int64_t>();
            if (!v || *v < 0) throw Error(ErrorKind::ParseError, std::string("'") + key + "' entries must be integers");
            out.push_back(static_cast<std::size_t>(*v));
        }
        return out;
    };
    BuildConfig c;
    auto kind = t["kind"].value<std::string>();
    if (!kind) throw Error(ErrorKind::ParseError, "missing 'kind'");
    c.kind = *kind;
    c.depth = count("depth", 0);
    c.alphabet = count("alphabet", 2);
    c.periods = list("periods");
    c.masks = list("masks");
    c.vertex_budget = count("vertex_budget", kDefaultVertexBudget);
    check_config(c);
    return c;
}

/// Picks the parser by extension: ".json" is JSON, anything else TOML.
inline BuildConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
        try {
            return config_from_json(nlohmann::json::parse(ss.str()));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::ParseError, e.what());
        }
    }
    return config_from_toml(ss.str());
}

inline FSystem build_from_config(const BuildConfig& c) {
    check_config(c);
    const std::size_t d = c.depth, k = c.alphabet, B = c.vertex_budget;
    auto iso = [&](IsometryVariant v) {
        IsometryOptions o;
        if (!c.periods.empty()) o.periods = c.periods;
        o.mask_starts = c.masks;
        o.vertex_budget = B;
        return build_isometry_lift(v, d, o);
    };
    if (c.kind == "cantor") return build_cantor_fence(d);
    if (c.kind == "lelek") return build_lelek(d);
    if (c.kind == "fraisse") return build_fraisse(d);
    if (c.kind == "twosided") return build_twosided_nonfraisse(d);
    if (c.kind == "isometry_fraisse") return iso(IsometryVariant::Fraisse);
    if (c.kind == "isometry_lelek") return iso(IsometryVariant::Lelek);
    if (c.kind == "isometry_twosided") return iso(IsometryVariant::TwoSided);
    if (c.kind == "isometry_warmup") return build_isometry_warmup(d, B);
    if (c.kind == "transitive") return build_transitive_lift(k, d, B);
    if (c.kind == "chaotic") return build_chaotic_lift(k, d, B);
    if (c.kind == "mixing") return build_mixing_lift(k, d, B);
    return build_minimal_fraisse_lift(c.periods.empty() ? primorial_chain(8) : c.periods, d, B);
}

}  // namespace ff
