#pragma once

// Cycle systems (towers whose levels are disjoint unions of directed cycles)
// and the isometry lifts built on them. Endpoints are constant on every
// cycle, so every scaling map along an edge is the identity.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fence_forge/constructors/common.hpp"

namespace ff {

struct CycleInfo {
    std::vector<std::vector<Index>> cycles;  // vertices in successor order
    std::vector<Index> cycle_of, pos;
};

/// Decomposes a level whose vertices all have in- and out-degree 1.
inline CycleInfo cycle_info(const Level& L) {
    CycleInfo ci;
    ci.cycle_of.assign(L.size(), kNone);
    ci.pos.assign(L.size(), kNone);
    for (Index v = 0; v < L.size(); ++v)
        if (L.out(v).size() != 1 || L.in(v).size() != 1)
            throw Error(ErrorKind::MalformedTower, "level " + std::to_string(L.index()) + " is not a union of cycles");
    for (Index v = 0; v < L.size(); ++v) {
        if (ci.cycle_of[v] != kNone) continue;
        std::vector<Index> cyc;
        Index w = v;
        do {
            ci.cycle_of[w] = static_cast<Index>(ci.cycles.size());
            ci.pos[w] = static_cast<Index>(cyc.size());
            cyc.push_back(w);
            w = L.out(w)[0];
        } while (w != v);
        ci.cycles.push_back(std::move(cyc));
    }
    return ci;
}

/// Length of the cycle through v: the least l with h^l([v]) = [v].
inline std::size_t cycle_period(const Level& L, Index v) {
    if (L.out(v).size() != 1) throw Error(ErrorKind::MalformedTower, "vertex is not on a cycle");
    std::size_t l = 1;
    for (Index w = L.out(v)[0]; w != v; w = L.out(w)[0]) ++l;
    return l;
}

struct CycleSystemReport {
    bool cycles_only = true;
    bool lengths_divisible = true;
    std::vector<std::string> problems;
    bool ok() const { return cycles_only && lengths_divisible; }
};

inline CycleSystemReport check_cycle_system(const Tower& t) {
    CycleSystemReport r;
    std::vector<CycleInfo> infos;
    for (std::size_t n = 0; n <= t.depth(); ++n) {
        try {
            infos.push_back(cycle_info(t.level(n)));
        } catch (const Error& e) {
            r.cycles_only = false;
            r.problems.emplace_back(e.what());
            return r;
        }
    }
    for (std::size_t n = 1; n <= t.depth(); ++n) {
        const Level& L = t.level(n);
        for (auto& cyc : infos[n].cycles) {
            Index parent_cycle = infos[n - 1].cycle_of[L.parent(cyc[0])];
            std::size_t pl = infos[n - 1].cycles[parent_cycle].size();
            if (cyc.size() % pl != 0) {
                r.lengths_divisible = false;
                r.problems.push_back("cycle length " + std::to_string(cyc.size()) + " at level " + std::to_string(n) +
                                     " is not a multiple of " + std::to_string(pl));
            }
        }
    }
    return r;
}

/// Finite point model of an isometry: a permutation of points, each lying in
/// a cell of the current cycle level.
struct CyclePointModel {
    std::vector<Index> succ;
    std::vector<Index> cell;
};

struct RefinedCycles {
    std::vector<Index> succ;        // successor on the refined level
    std::vector<Index> bond;        // refined vertex -> cell
    std::vector<Index> point_class; // point -> refined vertex
};

/// Common refinement of {cell} with the label partition along the orbit: a
/// point's class is the periodic itinerary of (cell, label) pairs read
/// backwards along its cycle, reduced to its least period.
inline RefinedCycles refine_to_cycles(const CyclePointModel& pts, const std::vector<int>& labels) {
    const std::size_t N = pts.succ.size();
    if (N == 0) throw Error(ErrorKind::EmptyRefinement, "no points to refine");
    if (labels.size() != N || pts.cell.size() != N)
        throw Error(ErrorKind::MalformedTower, "labels and cells must cover every point");
    std::vector<Index> pred(N, kNone);
    for (Index x = 0; x < N; ++x) {
        if (pts.succ[x] >= N || pred[pts.succ[x]] != kNone)
            throw Error(ErrorKind::MalformedTower, "point successor is not a permutation");
        pred[pts.succ[x]] = x;
    }
    using Word = std::vector<std::pair<Index, int>>;
    std::map<Word, Index> classes;
    RefinedCycles out;
    out.point_class.assign(N, kNone);
    std::vector<Word> words;
    for (Index x = 0; x < N; ++x) {
        Word w;
        Index y = x;
        do {
            w.emplace_back(pts.cell[y], labels[y]);
            y = pred[y];
        } while (y != x);
        std::size_t p = 1;
        for (; p < w.size(); ++p) {
            if (w.size() % p != 0) continue;
            bool periodic = true;
            for (std::size_t i = p; i < w.size() && periodic; ++i) periodic = w[i] == w[i - p];
            if (periodic) break;
        }
        w.resize(p);
        auto [it, fresh] = classes.try_emplace(w, static_cast<Index>(words.size()));
        if (fresh) words.push_back(w);
        out.point_class[x] = it->second;
    }
    out.succ.assign(words.size(), kNone);
    out.bond.assign(words.size(), kNone);
    for (Index x = 0; x < N; ++x) {
        Index c = out.point_class[x];
        out.succ[c] = out.point_class[pts.succ[x]];
        out.bond[c] = pts.cell[x];
    }
    return out;
}

enum class IsometryVariant { Fraisse, Lelek, TwoSided, WarmUp };

inline const char* variant_name(IsometryVariant v) {
    switch (v) {
        case IsometryVariant::Fraisse: return "isometry_fraisse";
        case IsometryVariant::Lelek: return "isometry_lelek";
        case IsometryVariant::TwoSided: return "isometry_twosided";
        case IsometryVariant::WarmUp: return "isometry_warmup";
    }
    return "?";
}

struct IsometryOptions {
    /// Cycle length per level of the synthesized base (level 0 always has length 1);
    /// the last entry repeats. Each entry must divide the next.
    std::vector<std::size_t> periods{2};
    /// Levels at which every unmasked parent cycle gains a masked child cycle.
    std::vector<std::size_t> mask_starts;
    /// Optional explicit base; when set, its cycles are used instead of synthesizing.
    const Tower* base = nullptr;
    /// Explicit mask on the base, per level (1 = masked); required shape when base is set.
    std::vector<std::vector<std::uint8_t>> base_mask;
    std::size_t vertex_budget = kDefaultVertexBudget;
};

namespace iso_detail {

struct ChildPlan {
    Rational lo, hi;
    std::size_t length_factor = 1;  // synthesized child cycle length / parent length (warm-up only)
};

/// Child intervals of one parent cycle; the first plan is the dagger copy.
inline std::vector<ChildPlan> plans(IsometryVariant var, std::size_t n, const Rational& b, const Rational& u) {
    const Rational a = u - b;
    std::vector<ChildPlan> out;
    const long long R = 1LL << n;
    switch (var) {
        case IsometryVariant::Fraisse:
            out.push_back({b, u});
            for (long long i = 0; i < R; ++i)
                for (long long j = i + 1; j <= R; ++j)
                    if (!(i == 0 && j == R)) out.push_back({b + a * Rational(i) / R, b + a * Rational(j) / R});
            break;
        case IsometryVariant::Lelek:
            out.push_back({0, u});
            for (long long i = 1; i < R; ++i) out.push_back({0, u * Rational(i) / R});
            break;
        case IsometryVariant::TwoSided: {
            out.push_back({b, u});
            const long long T = 1LL << (n + 2);
            for (long long k = 0; k < T; ++k) out.push_back({b + a * Rational(k) / T, b + a * Rational(k + 1) / T});
            break;
        }
        case IsometryVariant::WarmUp: {
            const long long K = static_cast<long long>(n) + 1;
            const Rational d = a / K;
            out.push_back({b, u, 2});
            out.push_back({(b + u) / 2, u, 1});
            for (long long i = 0; i < K + 1; ++i)
                for (long long j = i + 1; j <= K; ++j)
                    if (!(i == 0 && j == K)) out.push_back({b + d * i, b + d * j, 2});
            break;
        }
    }
    return out;
}

inline ChildPlan masked_plan(IsometryVariant var, std::size_t n, const Rational& b, const Rational& u) {
    if (var == IsometryVariant::Lelek) return {0, u};
    return {b, b + (u - b) * pow2neg(static_cast<int>(n) + 2)};
}

}  // namespace iso_detail

inline FSystem build_isometry_lift(IsometryVariant var, std::size_t depth, const IsometryOptions& opt = {}) {
    FSystem fs;
    fs.kind = variant_name(var);
    fs.params["depth"] = std::to_string(depth);
    fs.lift_mode = var == IsometryVariant::Lelek ? "ratio" : "affine";
    auto period_at = [&](std::size_t n) -> std::size_t {
        if (n == 0 || opt.periods.empty()) return 1;
        return opt.periods[std::min(n, opt.periods.size()) - 1];
    };
    if (!opt.base) {
        std::string ps;
        for (std::size_t i = 1; i <= depth; ++i) {
            if (period_at(i) == 0 || period_at(i) % period_at(i - 1) != 0)
                throw Error(ErrorKind::MalformedTower, "cycle periods must form a divisibility chain");
            ps += (ps.empty() ? "" : ",") + std::to_string(period_at(i));
        }
        fs.params["periods"] = ps;
        std::string ms;
        for (auto s : opt.mask_starts) ms += (ms.empty() ? "" : ",") + std::to_string(s);
        fs.params["mask_starts"] = ms;
        if (var != IsometryVariant::Lelek)
            for (auto s : opt.mask_starts)
                if (s == 0)
                    throw Error(ErrorKind::MaskNotInvariant,
                                "the root cannot be masked when masked gaps must shrink below 1");
    } else {
        if (opt.base->depth() < depth) throw Error(ErrorKind::InsufficientDepth, "base tower shallower than depth");
        if (!opt.base_mask.empty() && opt.base_mask.size() <= depth)
            throw Error(ErrorKind::MalformedTower, "base mask must cover every level");
    }
    if (var == IsometryVariant::Lelek)
        fs.marks.notes.push_back(
            "rung cycles receive upper endpoint i*2^-n times the parent cycle's upper endpoint; the self-referential "
            "right-hand side of the rung rule is read as the parent value");

    // Level 0.
    std::vector<std::uint8_t> mask0(1, 0);
    bool root_masked = std::find(opt.mask_starts.begin(), opt.mask_starts.end(), 0) != opt.mask_starts.end();
    if (opt.base) {
        const Level& B = opt.base->level(0);
        cycle_info(B);
        std::vector<Rational> lo(B.size(), Rational(0)), hi(B.size(), Rational(1));
        Level L(0, B.ids(), [&] {
            EdgeList e;
            B.for_each_edge([&](Index u, Index v) { e.emplace_back(u, v); });
            return e;
        }());
        fs.push_level(std::move(L), lo, hi);
        mask0.assign(B.size(), 0);
        if (!opt.base_mask.empty()) mask0 = opt.base_mask[0];
    } else {
        push_root(fs);
        mask0[0] = root_masked ? 1 : 0;
    }
    fs.marks.mask.push_back(mask0);

    for (std::size_t n = 0; n < depth; ++n) {
        const Level& P = fs.level(n);
        CycleInfo pci = cycle_info(P);
        const auto& pmask = fs.marks.mask[n];
        LevelDraft d;
        std::vector<Index> dagger(P.size(), kNone);
        std::vector<std::uint8_t> cmask;
        if (!opt.base) {
            const bool new_masks =
                std::find(opt.mask_starts.begin(), opt.mask_starts.end(), n + 1) != opt.mask_starts.end();
            for (auto& cyc : pci.cycles) {
                const std::size_t plen = cyc.size();
                const Rational& b = fs.lo(n, cyc[0]);
                const Rational& u = fs.hi(n, cyc[0]);
                const bool parent_masked = pmask[cyc[0]] != 0;
                auto pl = iso_detail::plans(var, n, b, u);
                std::vector<std::pair<iso_detail::ChildPlan, bool>> kids;
                for (auto& p : pl) kids.emplace_back(p, false);
                if (parent_masked || new_masks) kids.emplace_back(iso_detail::masked_plan(var, n, b, u), true);
                bool first = true;
                for (auto& [p, masked] : kids) {
                    std::size_t len = var == IsometryVariant::WarmUp ? plen * p.length_factor : period_at(n + 1);
                    if (var != IsometryVariant::WarmUp && len % plen != 0)
                        throw Error(ErrorKind::MalformedTower, "child cycle length not a multiple of parent length");
                    ValueId lo = fs.pool.intern(p.lo), hi = fs.pool.intern(p.hi);
                    Index start = static_cast<Index>(d.size());
                    for (std::size_t t = 0; t < len; ++t) {
                        Index v = d.add(vid(n + 1, d.size()), cyc[t % plen], lo, hi);
                        cmask.push_back(masked ? 1 : 0);
                        if (first && dagger[cyc[t % plen]] == kNone) dagger[cyc[t % plen]] = v;
                    }
                    for (std::size_t t = 0; t < len; ++t)
                        d.edges.emplace_back(start + static_cast<Index>(t), start + static_cast<Index>((t + 1) % len));
                    first = false;
                }
                check_budget(d.size(), opt.vertex_budget, std::string(variant_name(var)) + " level " + std::to_string(n + 1));
            }
            commit(fs, std::move(d), std::move(dagger));
        } else {
            const Level& B = opt.base->level(n + 1);
            CycleInfo cci = cycle_info(B);
            std::vector<std::uint8_t> bm = opt.base_mask.empty() ? std::vector<std::uint8_t>(B.size(), 0)
                                                                  : opt.base_mask[n + 1];
            if (bm.size() != B.size()) throw Error(ErrorKind::MalformedTower, "mask size mismatch");
            for (Index v = 0; v < B.size(); ++v)
                if (bm[v] && !bm[B.out(v)[0]])
                    throw Error(ErrorKind::MaskNotInvariant, "mask not closed under successor at level " +
                                                                 std::to_string(n + 1));
            std::vector<std::vector<Index>> kids_of(pci.cycles.size());
            for (Index c = 0; c < cci.cycles.size(); ++c) kids_of[pci.cycle_of[B.parent(cci.cycles[c][0])]].push_back(c);
            std::vector<Rational> lo(B.size()), hi(B.size());
            for (Index pc = 0; pc < pci.cycles.size(); ++pc) {
                auto& cyc = pci.cycles[pc];
                const Rational& b = fs.lo(n, cyc[0]);
                const Rational& u = fs.hi(n, cyc[0]);
                auto pl = iso_detail::plans(var, n, b, u);
                std::size_t next = 0;
                bool dagger_done = false;
                for (Index c : kids_of[pc]) {
                    const auto& ccyc = cci.cycles[c];
                    iso_detail::ChildPlan p;
                    bool is_dagger = false;
                    if (bm[ccyc[0]]) {
                        p = iso_detail::masked_plan(var, n, b, u);
                    } else {
                        p = next < pl.size() ? pl[next] : pl[0];
                        is_dagger = next == 0 || next >= pl.size();
                        ++next;
                    }
                    for (Index v : ccyc) {
                        lo[v] = p.lo;
                        hi[v] = p.hi;
                        if (is_dagger && !dagger_done && dagger[B.parent(v)] == kNone) dagger[B.parent(v)] = v;
                    }
                    if (is_dagger) dagger_done = true;
                }
                if (next < pl.size())
                    throw Error(ErrorKind::InsufficientCycles,
                                "parent cycle at level " + std::to_string(n) + " has " + std::to_string(next) +
                                    " unmasked child cycles, needs " + std::to_string(pl.size()));
            }
            EdgeList e;
            B.for_each_edge([&](Index u, Index v) { e.emplace_back(u, v); });
            Level L(n + 1, B.ids(), std::move(e), B.bond(), std::move(dagger), P.size());
            fs.push_level(std::move(L), lo, hi);
            cmask = std::move(bm);
        }
        fs.marks.mask.push_back(std::move(cmask));
    }
    return fs;
}

inline FSystem build_isometry_lift_fraisse(std::size_t depth, const IsometryOptions& opt = {}, bool twosided = false) {
    return build_isometry_lift(twosided ? IsometryVariant::TwoSided : IsometryVariant::Fraisse, depth, opt);
}
inline FSystem build_isometry_lift_lelek(std::size_t depth, const IsometryOptions& opt = {}) {
    return build_isometry_lift(IsometryVariant::Lelek, depth, opt);
}
/// Cycles of length n spawn one length-n cycle with the upper half interval and
/// (k+2)(k+1)/2 cycles of length 2n at step k.
inline FSystem build_isometry_warmup(std::size_t depth, std::size_t vertex_budget = kDefaultVertexBudget) {
    IsometryOptions o;
    o.vertex_budget = vertex_budget;
    return build_isometry_lift(IsometryVariant::WarmUp, depth, o);
}

/// Odometer tower: level n is one cycle of length periods[n-1] (level 0 has length 1).
inline Tower build_odometer_tower(const std::vector<std::size_t>& periods) {
    Tower t;
    {
        Level L(0, {"0:0"}, {{0, 0}});
        t.push(std::move(L));
    }
    std::size_t prev = 1;
    for (std::size_t i = 0; i < periods.size(); ++i) {
        std::size_t p = periods[i];
        if (p == 0 || p % prev != 0) throw Error(ErrorKind::MalformedTower, "periods must form a divisibility chain");
        std::vector<std::string> ids;
        EdgeList e;
        std::vector<Index> bond, dagger(prev, kNone);
        for (std::size_t r = 0; r < p; ++r) {
            ids.push_back(vid(i + 1, r));
            e.emplace_back(static_cast<Index>(r), static_cast<Index>((r + 1) % p));
            bond.push_back(static_cast<Index>(r % prev));
            if (dagger[r % prev] == kNone) dagger[r % prev] = static_cast<Index>(r);
        }
        t.push(Level(i + 1, std::move(ids), std::move(e), std::move(bond), std::move(dagger), prev));
        prev = p;
    }
    return t;
}

}  // namespace ff
