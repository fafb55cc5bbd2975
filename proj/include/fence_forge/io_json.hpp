#pragma once

// JSON forms of F-systems, Gamma reports, certificates and fence points.
// Objects are emitted with sorted keys, so equal inputs give equal bytes.
// Vertex ids must be unique across the whole tower because "phi" is keyed
// by id alone.

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "fence_forge/fsystem.hpp"
#include "fence_forge/lifting.hpp"
#include "fence_forge/verify.hpp"

namespace ff {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// F-systems

inline Json tower_level_json(const Level& L, const Level* parent) {
    Json lv;
    lv["index"] = L.index();
    lv["vertices"] = L.ids();
    Json edges = Json::array();
    L.for_each_edge([&](Index u, Index v) { edges.push_back({L.id(u), L.id(v)}); });
    lv["edges"] = std::move(edges);
    Json bond = Json::object(), dagger = Json::object();
    if (parent) {
        for (Index v = 0; v < L.size(); ++v) bond[L.id(v)] = parent->id(L.parent(v));
        for (Index p = 0; p < parent->size(); ++p)
            if (Index c = L.dagger_child(p); c != kNone) dagger[parent->id(p)] = L.id(c);
    }
    lv["bond"] = std::move(bond);
    lv["dagger_child"] = std::move(dagger);
    return lv;
}

inline Json fsystem_to_json(const FSystem& fs) {
    std::unordered_set<std::string> seen;
    Json j;
    j["kind"] = fs.kind;
    j["mode"] = fs.lift_mode;
    j["params"] = fs.params;
    Json levels = Json::array(), phi = Json::object(), witness = Json::object();
    for (std::size_t n = 0; n < fs.tower.level_count(); ++n) {
        const Level& L = fs.level(n);
        const Level* P = n == 0 ? nullptr : &fs.level(n - 1);
        levels.push_back(tower_level_json(L, P));
        for (Index v = 0; v < L.size(); ++v) {
            if (!seen.insert(L.id(v)).second)
                throw Error(ErrorKind::MalformedTower, "vertex id '" + L.id(v) + "' repeats across levels");
            phi[L.id(v)] = {{"lo", to_string(fs.lo(n, v))}, {"hi", to_string(fs.hi(n, v))}};
        }
        // The dagger witness lists the parents whose designated child keeps the parent interval.
        if (P)
            for (Index p = 0; p < P->size(); ++p) {
                Index c = L.dagger_child(p);
                if (c != kNone && fs.lo_id[n][c] == fs.lo_id[n - 1][p] && fs.hi_id[n][c] == fs.hi_id[n - 1][p])
                    witness[P->id(p)] = L.id(c);
            }
    }
    j["levels"] = std::move(levels);
    j["phi"] = std::move(phi);
    j["dagger_witness"] = std::move(witness);
    Json m;
    m["designated"] = fs.marks.designated ? Json(fs.marks.designated->at) : Json(nullptr);
    m["orbit"] = fs.marks.orbit;
    m["orbit_start"] = fs.marks.orbit_start;
    m["periodic"] = fs.marks.periodic;
    m["mask"] = fs.marks.mask;
    m["window"] = fs.marks.window;
    m["notes"] = fs.marks.notes;
    j["marks"] = std::move(m);
    return j;
}

inline std::string fsystem_to_string(const FSystem& fs) { return fsystem_to_json(fs).dump(1) + "\n"; }

namespace io_detail {

[[noreturn]] inline void bad(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

inline const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

}  // namespace io_detail

inline FSystem fsystem_from_json(const Json& j) {
    using io_detail::bad;
    using io_detail::field;
    try {
        FSystem fs;
        fs.kind = j.value("kind", std::string("custom"));
        fs.lift_mode = j.value("mode", std::string("affine"));
        if (fs.lift_mode != "ratio" && fs.lift_mode != "affine") bad("unknown mode '" + fs.lift_mode + "'");
        if (j.contains("params")) fs.params = j.at("params").get<std::map<std::string, std::string>>();
        const Json& levels = field(j, "levels");
        const Json& phi = field(j, "phi");
        if (!levels.is_array() || levels.empty()) bad("'levels' must be a nonempty array");
        std::vector<std::string> prev_ids;
        std::unordered_map<std::string, Index> prev_index;
        for (std::size_t n = 0; n < levels.size(); ++n) {
            const Json& lv = levels[n];
            if (field(lv, "index").get<std::size_t>() != n) bad("levels out of order at " + std::to_string(n));
            auto ids = field(lv, "vertices").get<std::vector<std::string>>();
            std::unordered_map<std::string, Index> index;
            for (Index v = 0; v < ids.size(); ++v)
                if (!index.emplace(ids[v], v).second) bad("duplicate vertex '" + ids[v] + "'");
            auto lookup = [&](const std::unordered_map<std::string, Index>& m, const std::string& id) {
                auto it = m.find(id);
                if (it == m.end()) bad("unknown vertex '" + id + "' at level " + std::to_string(n));
                return it->second;
            };
            EdgeList edges;
            for (auto& e : field(lv, "edges")) {
                if (!e.is_array() || e.size() != 2) bad("edge must be a pair");
                edges.emplace_back(lookup(index, e[0].get<std::string>()), lookup(index, e[1].get<std::string>()));
            }
            std::vector<Index> bond, dagger;
            if (n > 0) {
                const Json& b = field(lv, "bond");
                bond.resize(ids.size());
                for (Index v = 0; v < ids.size(); ++v) {
                    if (!b.contains(ids[v])) bad("vertex '" + ids[v] + "' has no bond");
                    bond[v] = lookup(prev_index, b.at(ids[v]).get<std::string>());
                }
                dagger.assign(prev_ids.size(), kNone);
                if (lv.contains("dagger_child"))
                    for (auto& [p, c] : lv.at("dagger_child").items())
                        dagger[lookup(prev_index, p)] = lookup(index, c.get<std::string>());
            }
            std::vector<Rational> lo(ids.size()), hi(ids.size());
            for (Index v = 0; v < ids.size(); ++v) {
                const Json& e = field(phi, ids[v].c_str());
                lo[v] = parse_rational(field(e, "lo").get<std::string>());
                hi[v] = parse_rational(field(e, "hi").get<std::string>());
            }
            Level L(n, ids, std::move(edges), std::move(bond), std::move(dagger), prev_ids.size());
            fs.push_level(std::move(L), lo, hi);
            prev_ids = std::move(ids);
            prev_index = std::move(index);
        }
        if (j.contains("marks")) {
            const Json& m = j.at("marks");
            if (m.contains("designated") && !m.at("designated").is_null())
                fs.marks.designated = Thread{m.at("designated").get<std::vector<Index>>()};
            auto get = [&](const char* key, auto& out) {
                if (m.contains(key)) m.at(key).get_to(out);
            };
            get("orbit", fs.marks.orbit);
            get("orbit_start", fs.marks.orbit_start);
            get("periodic", fs.marks.periodic);
            get("mask", fs.marks.mask);
            get("window", fs.marks.window);
            get("notes", fs.marks.notes);
        }
        return fs;
    } catch (const Json::exception& e) {
        bad(e.what());
    }
}

inline FSystem fsystem_from_string(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    return fsystem_from_json(j);
}

/// Structural equality including every endpoint rational and the marks.
inline bool same_fsystem(const FSystem& a, const FSystem& b) {
    if (a.kind != b.kind || a.lift_mode != b.lift_mode || a.params != b.params || !(a.marks == b.marks)) return false;
    if (a.tower.level_count() != b.tower.level_count()) return false;
    for (std::size_t n = 0; n < a.tower.level_count(); ++n) {
        const Level &A = a.level(n), &B = b.level(n);
        if (A.ids() != B.ids() || A.bond() != B.bond() || A.edge_count() != B.edge_count()) return false;
        if (n > 0 && A.dagger() != B.dagger()) return false;
        for (Index v = 0; v < A.size(); ++v) {
            auto ea = A.out(v), eb = B.out(v);
            if (!std::equal(ea.begin(), ea.end(), eb.begin(), eb.end())) return false;
            if (a.lo(n, v) != b.lo(n, v) || a.hi(n, v) != b.hi(n, v)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Reports

inline Json gamma_to_json(const GammaReport& r) {
    Json j;
    j["mode"] = mode_name(r.mode);
    Json lv = Json::array();
    for (auto& l : r.levels) lv.push_back({{"n", l.n}, {"gamma", to_string(l.gamma)}, {"gamma_plus", to_string(l.gamma_plus)}});
    j["levels"] = std::move(lv);
    j["partial_sum"] = to_string(r.total());
    return j;
}

inline Json certificate_to_json(const Certificate& c) {
    Json j;
    j["kind"] = c.kind;
    j["verdict"] = verdict_name(c.verdict);
    j["witnesses"] = c.witnesses;
    Json b = Json::object();
    if (c.claimed) b["claimed"] = to_string(*c.claimed);
    if (c.observed) b["observed"] = to_string(*c.observed);
    j["bounds"] = std::move(b);
    return j;
}

inline Certificate certificate_from_json(const Json& j) {
    try {
        Certificate c;
        c.kind = io_detail::field(j, "kind").get<std::string>();
        std::string v = io_detail::field(j, "verdict").get<std::string>();
        if (v == "pass") c.verdict = Verdict::Pass;
        else if (v == "fail") c.verdict = Verdict::Fail;
        else if (v == "unwitnessed") c.verdict = Verdict::Unwitnessed;
        else io_detail::bad("unknown verdict '" + v + "'");
        if (j.contains("witnesses")) c.witnesses = j.at("witnesses").get<std::vector<std::string>>();
        if (j.contains("bounds")) {
            const Json& b = j.at("bounds");
            if (b.contains("claimed")) c.claimed = parse_rational(b.at("claimed").get<std::string>());
            if (b.contains("observed")) c.observed = parse_rational(b.at("observed").get<std::string>());
        }
        return c;
    } catch (const Json::exception& e) {
        io_detail::bad(e.what());
    }
}

// ---------------------------------------------------------------------------
// Fence points

inline Json point_to_json(const FSystem& fs, const FencePoint& p) {
    Json ids = Json::array();
    for (std::size_t k = 0; k <= p.thread.depth(); ++k) ids.push_back(fs.level(k).id(p.thread.at[k]));
    return {{"level", p.thread.depth()},
            {"vertex", fs.level(p.thread.depth()).id(p.thread.last())},
            {"thread", std::move(ids)},
            {"height", to_string(p.height)}};
}

/// Level and vertex of an id (ids are unique across levels).
inline std::pair<std::size_t, Index> locate_vertex(const FSystem& fs, const std::string& id) {
    for (std::size_t n = fs.tower.level_count(); n-- > 0;)
        if (auto v = fs.level(n).find(id)) return {n, *v};
    throw Error(ErrorKind::ParseError, "unknown vertex '" + id + "'");
}

/// {"vertex": id, "height": "p/q"}; the height defaults to the upper endpoint.
inline FencePoint point_from_json(const FSystem& fs, const Json& j) {
    try {
        auto [n, v] = locate_vertex(fs, io_detail::field(j, "vertex").get<std::string>());
        FencePoint p{thread_through(fs.tower, n, v), fs.hi(n, v)};
        if (j.contains("height")) p.height = parse_rational(j.at("height").get<std::string>());
        if (!in_fiber(fs, p)) throw Error(ErrorKind::ParseError, "height outside the fiber of '" + fs.level(n).id(v) + "'");
        return p;
    } catch (const Json::exception& e) {
        io_detail::bad(e.what());
    }
}

}  // namespace ff
