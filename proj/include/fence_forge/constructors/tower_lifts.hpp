#pragma once

// Transitive and chaotic Lelek-type lifts over cycle-and-walk towers.
//
// Both constructors refine one stage at a time. With N the largest edge ratio
// of upper endpoints at level n, r = 1 - 2^{-q} and t come from choose_rungs,
// so one rung step changes an edge ratio by less than 2^{-(n+1)} and the rung
// set {1, r, ..., r^{t-1}} is 2^{-(n+1)}-dense in [0,1].
//
// The base dynamics is a cycle tower rather than a symbolic shift: every
// refinement is carved out of a single long orbit segment (transitive) or a
// fresh periodic orbit (chaotic), which is all the lifting argument consumes.
// The alphabet argument is recorded but does not shape the tower.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fence_forge/constructors/common.hpp"
#include "fence_forge/constructors/shift.hpp"

namespace ff {

namespace lift_detail {

/// Interns parent * r^e once per (parent value, e).
class RungHeights {
public:
    RungHeights(FSystem& fs, const RungChoice& rc) : fs_(fs) {
        pow_.assign(rc.t, Rational(1));
        for (std::size_t e = 1; e < rc.t; ++e) pow_[e] = pow_[e - 1] * rc.r;
    }
    ValueId operator()(ValueId parent, std::size_t e) {
        std::uint64_t key = (std::uint64_t(parent) << 16) | e;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        ValueId v = fs_.pool.intern(fs_.pool[parent] * pow_[e]);
        cache_.emplace(key, v);
        return v;
    }

private:
    FSystem& fs_;
    std::vector<Rational> pow_;
    std::unordered_map<std::uint64_t, ValueId> cache_;
};

inline void append_csv(std::string& s, std::size_t v) { s += (s.empty() ? "" : ",") + std::to_string(v); }

}  // namespace lift_detail

/// Level n is one cycle of length P_n, vertex index = floor. Stage n lays
/// 2t copies of the level-n cycle around relative time 0 and one extra copy
/// ("otherwise" region): floor s has relative time j = s (s < l + P_n) or
/// s - P_{n+1}, with l = t P_n and P_{n+1} = (2t+1) P_n. Window i = floor(j/P_n)
/// in [-t, t) gets exponent i (i >= 0) or |i|-1 (i < 0); the extra copy gets
/// t-1. Floor 0 at every level is the designated thread, and level n+1 marks
/// the orbit segment j = -l..l.
inline FSystem build_transitive_lift(std::size_t k, std::size_t depth, std::size_t vertex_budget = kDefaultVertexBudget) {
    check_alphabet(k);
    FSystem fs;
    fs.kind = "transitive";
    fs.lift_mode = "ratio";
    fs.params["alphabet"] = std::to_string(k);
    fs.params["depth"] = std::to_string(depth);
    push_root(fs);
    fs.marks.orbit.push_back({0});
    fs.marks.orbit_start.push_back(0);
    std::string ts, qs, ls;
    for (std::size_t n = 0; n < depth; ++n) {
        RungChoice rc = choose_rungs(max_edge_ratio(fs, n), n);
        const std::size_t P = fs.level(n).size(), t = rc.t, ell = t * P, P2 = (2 * t + 1) * P;
        check_budget(P2, vertex_budget, "transitive level " + std::to_string(n + 1));
        lift_detail::RungHeights heights(fs, rc);
        LevelDraft d;
        d.ids.reserve(P2);
        const ValueId zero = fs.pool.intern(0);
        const long long Pl = static_cast<long long>(P), ll = static_cast<long long>(ell);
        for (std::size_t s = 0; s < P2; ++s) {
            long long j = s <= ell + P - 1 ? static_cast<long long>(s) : static_cast<long long>(s) - static_cast<long long>(P2);
            std::size_t e;
            if (j >= ll) {
                e = t - 1;
            } else {
                long long i = j >= 0 ? j / Pl : -((-j + Pl - 1) / Pl);
                e = static_cast<std::size_t>(i >= 0 ? i : -i - 1);
            }
            Index parent = static_cast<Index>(s % P);
            d.add(vid(n + 1, s), parent, zero, heights(fs.hi_id[n][parent], e));
            d.edges.emplace_back(static_cast<Index>(s), static_cast<Index>((s + 1) % P2));
        }
        std::vector<Index> dagger(P);
        for (Index f = 0; f < P; ++f) dagger[f] = f;
        commit(fs, std::move(d), std::move(dagger));
        std::vector<Index> orbit;
        orbit.reserve(2 * ell + 1);
        for (long long j = -ll; j <= ll; ++j)
            orbit.push_back(static_cast<Index>((j + static_cast<long long>(P2)) % static_cast<long long>(P2)));
        fs.marks.orbit.push_back(std::move(orbit));
        fs.marks.orbit_start.push_back(-ll);
        lift_detail::append_csv(ts, t);
        lift_detail::append_csv(qs, rc.q);
        lift_detail::append_csv(ls, ell);
    }
    fs.marks.designated = Thread{std::vector<Index>(depth + 1, 0)};
    fs.params["t"] = ts;
    fs.params["q"] = qs;
    fs.params["orbit_half_length"] = ls;
    return fs;
}

/// Stage L+1 of the chaotic lift is built from a closed walk W through every
/// edge of level L. The main cycle (the new periodic orbit) has (2t+1)|W|
/// floors, floor f lying over W[f mod |W|]; window i = f/|W| - t in [-t, t)
/// gets exponent t-1-i (i >= 0) or t-|i| (i < 0) and the last |W| floors get 0.
/// Every level-L vertex u also gets a core copy with its cycle edges and
/// frozen height, which carries the earlier periodic orbits. For each level-L
/// cycle D one floor f of the exponent-0 region, running along D, gets the
/// junctions f -> copy(succ_D(W f)) and copy(pred_D(W f)) -> f, so the level
/// stays strongly connected and both determinism conditions hold one level
/// down.
inline FSystem build_chaotic_lift(std::size_t k, std::size_t depth, std::size_t vertex_budget = kDefaultVertexBudget) {
    check_alphabet(k);
    FSystem fs;
    fs.kind = "chaotic";
    fs.lift_mode = "ratio";
    fs.params["alphabet"] = std::to_string(k);
    fs.params["depth"] = std::to_string(depth);
    push_root(fs);
    fs.marks.periodic.push_back({0});
    // Cycles of the current level (lists of vertices in successor order) and
    // the cover walk.
    std::vector<std::vector<Index>> cycles{{0}};
    std::vector<Index> walk{0};
    std::string ts, qs;
    for (std::size_t L = 0; L < depth; ++L) {
        const Level& G = fs.level(L);
        std::vector<Index> succ(G.size(), kNone), pred(G.size(), kNone), cyc_of(G.size(), kNone);
        for (Index c = 0; c < cycles.size(); ++c)
            for (std::size_t i = 0; i < cycles[c].size(); ++i) {
                Index v = cycles[c][i];
                succ[v] = cycles[c][(i + 1) % cycles[c].size()];
                pred[v] = cycles[c][(i + cycles[c].size() - 1) % cycles[c].size()];
                cyc_of[v] = c;
            }
        RungChoice rc = choose_rungs(max_edge_ratio(fs, L), L);
        const std::size_t t = rc.t, W = walk.size(), P = (2 * t + 1) * W, total = P + G.size();
        check_budget(total, vertex_budget, "chaotic level " + std::to_string(L + 1));
        lift_detail::RungHeights heights(fs, rc);
        const ValueId zero = fs.pool.intern(0);
        LevelDraft d;
        d.ids.reserve(total);
        for (std::size_t f = 0; f < P; ++f) {
            Index g = walk[f % W];
            long long i = static_cast<long long>(f / W) - static_cast<long long>(t);
            std::size_t e = f >= 2 * t * W ? 0 : (i >= 0 ? t - 1 - static_cast<std::size_t>(i) : t - static_cast<std::size_t>(-i));
            d.add(vid(L + 1, f), g, zero, heights(fs.hi_id[L][g], e));
            d.edges.emplace_back(static_cast<Index>(f), static_cast<Index>((f + 1) % P));
        }
        for (Index u = 0; u < G.size(); ++u) {
            d.add(vid(L + 1, P + u), u, zero, fs.hi_id[L][u]);
            d.edges.emplace_back(static_cast<Index>(P + u), static_cast<Index>(P + succ[u]));
        }
        // Junction floors, one per level-L cycle, from the exponent-0 region.
        std::vector<std::size_t> junction(cycles.size(), SIZE_MAX);
        std::size_t found = 0;
        for (std::size_t f = 2 * t * W; f < P && found < cycles.size(); ++f) {
            Index g = walk[f % W];
            Index c = cyc_of[g];
            if (junction[c] != SIZE_MAX) continue;
            if (walk[(f + W - 1) % W] != pred[g] || walk[(f + 1) % W] != succ[g]) continue;
            junction[c] = f;
            ++found;
        }
        if (found < cycles.size())
            throw Error(ErrorKind::PeriodicSearchExhausted,
                        "no junction floor for some cycle at level " + std::to_string(L));
        std::vector<std::uint8_t> is_junction(P, 0);
        for (std::size_t f : junction) {
            Index g = walk[f % W];
            is_junction[f] = 1;
            d.edges.emplace_back(static_cast<Index>(f), static_cast<Index>(P + succ[g]));
            d.edges.emplace_back(static_cast<Index>(P + pred[g]), static_cast<Index>(f));
        }
        std::vector<Index> dagger(G.size());
        for (Index u = 0; u < G.size(); ++u) dagger[u] = static_cast<Index>(P + u);
        commit(fs, std::move(d), std::move(dagger));

        // Next cycles: the main cycle, then the core copies in level-L cycle order.
        std::vector<std::vector<Index>> next;
        next.emplace_back(P);
        for (Index f = 0; f < P; ++f) next[0][f] = f;
        for (auto& c : cycles) {
            std::vector<Index> copy;
            copy.reserve(c.size());
            for (Index u : c) copy.push_back(static_cast<Index>(P + u));
            next.push_back(std::move(copy));
        }
        // Next cover walk: the main cycle with one detour around each core cycle.
        std::vector<Index> nwalk;
        for (std::size_t f = 0; f < P; ++f) {
            nwalk.push_back(static_cast<Index>(f));
            if (!is_junction[f]) continue;
            Index g = walk[f % W];
            const std::size_t len = cycles[cyc_of[g]].size();
            // R steps from copy(succ g) must land on copy(pred g) and go around at least once.
            std::size_t R = (2 * len - 2) % len;
            while (R < len + 1) R += len;
            Index x = succ[g];
            for (std::size_t s = 0; s <= R; ++s) {
                nwalk.push_back(static_cast<Index>(P + x));
                x = succ[x];
            }
            nwalk.push_back(static_cast<Index>(f));
        }
        fs.marks.periodic.push_back(next[0]);
        cycles = std::move(next);
        walk = std::move(nwalk);
        lift_detail::append_csv(ts, t);
        lift_detail::append_csv(qs, rc.q);
    }
    fs.params["t"] = ts;
    fs.params["q"] = qs;
    return fs;
}

}  // namespace ff
