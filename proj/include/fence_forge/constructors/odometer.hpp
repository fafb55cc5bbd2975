#pragma once

// Odometer refinement of cycle levels and the minimal Fraisse lift.
//
// Each parent interval is cut into N equal pieces (1/N < eps). A child cycle
// winds m times around its parent cycle and is constant on each turn. Turn 0
// is the full pair (0,N); then every grid pair (j,k), 0 <= j < k <= N, follows
// in lexicographic order; the schedule closes with (0,N) again. Between two
// scheduled pairs whose normalized endpoints differ by D, M-1 correction turns
// walk the straight segment in M equal steps, M the least power of 2 with
// D/M < eps, so every child scaling map (and its inverse) stays within eps of
// the parent map. Turns beyond the schedule repeat the full pair.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fence_forge/constructors/common.hpp"
#include "fence_forge/constructors/cycles.hpp"

namespace ff {

using GridPair = std::array<std::size_t, 2>;

/// Least N with 1/N < eps.
inline std::size_t grid_size_for(const Rational& eps) {
    if (eps <= 0) throw Error(ErrorKind::DegenerateInterval, "eps must be positive");
    Rational inv = Rational(1) / eps;
    Integer n = num(inv) / den(inv) + 1;
    return n.convert_to<std::size_t>();
}

/// One turn of the child cycle: normalized endpoints (a,b) in [0,1].
struct OdometerTurn {
    Rational a, b;
    /// Grid pair for scheduled turns; unset for correction turns.
    std::optional<GridPair> grid;
};

inline std::vector<GridPair> odometer_grid_pairs(std::size_t N) {
    if (N < 1) throw Error(ErrorKind::DegenerateInterval, "grid needs at least one piece");
    std::vector<GridPair> p{{0, N}};
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = j + 1; k <= N; ++k) p.push_back({j, k});
    p.push_back({0, N});
    return p;
}

inline std::vector<OdometerTurn> odometer_schedule(std::size_t N, const Rational& eps) {
    auto pairs = odometer_grid_pairs(N);
    const Rational n = static_cast<long long>(N);
    std::vector<OdometerTurn> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        Rational a(static_cast<long long>(pairs[i][0])), b(static_cast<long long>(pairs[i][1]));
        a /= n;
        b /= n;
        if (i > 0) {
            const Rational &pa = out.back().a, &pb = out.back().b;
            Rational D = rmax(rabs(a - pa), rabs(b - pb));
            long long M = 1;
            while (!(D / M < eps)) M *= 2;
            Rational sa = (a - pa) / M, sb = (b - pb) / M;
            Rational ca = pa, cb = pb;
            for (long long s = 1; s < M; ++s) {
                ca += sa;
                cb += sb;
                out.push_back({ca, cb, std::nullopt});
            }
        }
        out.push_back({a, b, pairs[i]});
    }
    return out;
}

struct OdometerStep {
    std::size_t N = 0, m0 = 0, m = 0;
    std::vector<OdometerTurn> schedule;
    LevelDraft level;
    std::vector<Index> dagger;
};

/// Refines level n of fs (a union of cycles with nondegenerate intervals).
/// Endpoint values are interned into fs.pool; the level itself is not pushed.
inline OdometerStep refine_cycle_odometer(FSystem& fs, std::size_t n, const Rational& eps, std::size_t m_request,
                                          std::size_t vertex_budget = kDefaultVertexBudget) {
    const Level& G = fs.level(n);
    CycleInfo ci = cycle_info(G);
    for (Index g = 0; g < G.size(); ++g)
        if (!(fs.lo(n, g) < fs.hi(n, g)))
            throw Error(ErrorKind::DegenerateInterval, "odometer refinement needs nondegenerate intervals");
    OdometerStep st;
    st.N = grid_size_for(eps);
    st.schedule = odometer_schedule(st.N, eps);
    st.m0 = st.schedule.size();
    if (m_request < st.m0)
        throw Error(ErrorKind::MTooSmall, "m = " + std::to_string(m_request) + " is below m0 = " + std::to_string(st.m0));
    st.m = m_request;
    check_budget(G.size() * st.m, vertex_budget, "odometer level " + std::to_string(n + 1));
    // Endpoint ids per (g, turn).
    std::vector<std::vector<std::array<ValueId, 2>>> ends(G.size());
    for (Index g = 0; g < G.size(); ++g) {
        const Rational& L = fs.lo(n, g);
        Rational gap = fs.gap(n, g);
        ends[g].reserve(st.m0);
        for (auto& tu : st.schedule) ends[g].push_back({fs.pool.intern(L + gap * tu.a), fs.pool.intern(L + gap * tu.b)});
    }
    st.dagger.assign(G.size(), kNone);
    LevelDraft& d = st.level;
    d.ids.reserve(G.size() * st.m);
    for (auto& cyc : ci.cycles) {
        const Index base = static_cast<Index>(d.size());
        const std::size_t len = cyc.size() * st.m;
        for (std::size_t turn = 0; turn < st.m; ++turn) {
            const std::size_t k = std::min(turn, st.m0 - 1);
            for (std::size_t t = 0; t < cyc.size(); ++t) {
                Index g = cyc[t];
                Index v = d.add(vid(n + 1, d.size()), g, ends[g][k][0], ends[g][k][1]);
                if (turn == 0) st.dagger[g] = v;
            }
        }
        for (std::size_t s = 0; s < len; ++s)
            d.edges.emplace_back(base + static_cast<Index>(s), base + static_cast<Index>((s + 1) % len));
    }
    return st;
}

/// Periods must form a strictly increasing divisibility chain.
inline void check_period_chain(const std::vector<std::size_t>& periods) {
    if (periods.empty()) throw Error(ErrorKind::PeriodChainExhausted, "empty period chain");
    for (std::size_t i = 0; i < periods.size(); ++i) {
        if (periods[i] < 2) throw Error(ErrorKind::MalformedTower, "periods must exceed 1");
        if (i > 0 && (periods[i] <= periods[i - 1] || periods[i] % periods[i - 1] != 0))
            throw Error(ErrorKind::MalformedTower, "periods must form a strictly increasing divisibility chain");
    }
}

/// First `count` primorials: 2, 6, 30, 210, ...
inline std::vector<std::size_t> primorial_chain(std::size_t count) {
    std::vector<std::size_t> out;
    std::size_t acc = 1;
    for (std::size_t p = 2; out.size() < count; ++p) {
        bool prime = true;
        for (std::size_t q = 2; q * q <= p; ++q)
            if (p % q == 0) prime = false;
        if (!prime) continue;
        acc *= p;
        out.push_back(acc);
    }
    return out;
}

/// Per-refinement record of the minimal Fraisse lift.
struct OdometerLevelRecord {
    std::size_t n = 0, N = 0, m0 = 0, m = 0;
    Rational eps;
};

struct MinimalFraisse {
    FSystem fs;
    std::vector<OdometerLevelRecord> steps;
    std::vector<std::vector<OdometerTurn>> schedules;
};

/// Refinement n uses eps = 2^-n and the least chain entry m >= m0; the
/// cycle length at level n is the product of the chosen m.
inline MinimalFraisse build_minimal_fraisse_lift_detailed(const std::vector<std::size_t>& periods, std::size_t depth,
                                                          std::size_t vertex_budget = kDefaultVertexBudget) {
    check_period_chain(periods);
    MinimalFraisse out;
    FSystem& fs = out.fs;
    fs.kind = "minimal_fraisse";
    fs.lift_mode = "affine";
    fs.params["depth"] = std::to_string(depth);
    std::string ps;
    for (auto p : periods) ps += (ps.empty() ? "" : ",") + std::to_string(p);
    fs.params["periods"] = ps;
    push_root(fs);
    std::string chosen;
    for (std::size_t n = 0; n < depth; ++n) {
        Rational eps = pow2neg(static_cast<int>(n));
        std::size_t m0 = odometer_schedule(grid_size_for(eps), eps).size();
        auto it = std::find_if(periods.begin(), periods.end(), [&](std::size_t p) { return p >= m0; });
        if (it == periods.end())
            throw Error(ErrorKind::PeriodChainExhausted,
                        "no period >= m0 = " + std::to_string(m0) + " at refinement " + std::to_string(n));
        OdometerStep st = refine_cycle_odometer(fs, n, eps, *it, vertex_budget);
        out.steps.push_back({n, st.N, st.m0, st.m, eps});
        out.schedules.push_back(st.schedule);
        chosen += (chosen.empty() ? "" : ",") + std::to_string(st.m);
        commit(fs, std::move(st.level), std::move(st.dagger));
    }
    fs.params["chosen_m"] = chosen;
    return out;
}

inline FSystem build_minimal_fraisse_lift(const std::vector<std::size_t>& periods, std::size_t depth,
                                          std::size_t vertex_budget = kDefaultVertexBudget) {
    return std::move(build_minimal_fraisse_lift_detailed(periods, depth, vertex_budget).fs);
}

}  // namespace ff
