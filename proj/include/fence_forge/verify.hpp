#pragma once

// Finite-depth certificates for the dynamical claims: factor commutation,
// isometry, covering radii of marked orbits, masked mixing windows, periodic
// orbits, entropy bounds, two-sided inheritance, odometer refinement items
// and frozen heights. Every comparison is exact.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fence_forge/constructors/cycles.hpp"
#include "fence_forge/constructors/shift.hpp"
#include "fence_forge/eta.hpp"
#include "fence_forge/fence_systems.hpp"
#include "fence_forge/lifting.hpp"
#include "fence_forge/parallel.hpp"

namespace ff {

enum class Verdict { Pass, Fail, Unwitnessed };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Unwitnessed: return "unwitnessed";
    }
    return "?";
}

struct Certificate {
    std::string kind;
    Verdict verdict = Verdict::Unwitnessed;
    /// Human-readable witnesses; failures first, capped.
    std::vector<std::string> witnesses;
    std::optional<Rational> claimed, observed;

    bool pass() const { return verdict == Verdict::Pass; }
    void note(std::string w) {
        if (witnesses.size() < kWitnessCap) witnesses.push_back(std::move(w));
    }
    static constexpr std::size_t kWitnessCap = 32;
};

inline Certificate make_cert(std::string kind, bool ok) {
    Certificate c;
    c.kind = std::move(kind);
    c.verdict = ok ? Verdict::Pass : Verdict::Fail;
    return c;
}

/// Folds sub-certificates: fail dominates, then unwitnessed.
inline Certificate combine(std::string kind, const std::vector<Certificate>& parts) {
    Certificate c;
    c.kind = std::move(kind);
    c.verdict = Verdict::Pass;
    for (auto& p : parts) {
        if (p.verdict == Verdict::Fail) c.verdict = Verdict::Fail;
        else if (p.verdict == Verdict::Unwitnessed && c.verdict == Verdict::Pass) c.verdict = Verdict::Unwitnessed;
        c.note(p.kind + ": " + verdict_name(p.verdict));
    }
    return c;
}

inline LiftMode fs_mode(const FSystem& fs) { return parse_mode(fs.lift_mode); }

inline std::string vertex_tag(const FSystem& fs, std::size_t n, Index v) { return fs.level(n).id(v); }

// ---------------------------------------------------------------------------
// Sample points

/// Every level-d vertex with heights lo, hi and (for nondegenerate fibers) the
/// midpoint. `stride` > 1 keeps every stride-th vertex.
inline std::vector<FencePoint> lattice_points(const FSystem& fs, std::size_t d, std::size_t stride = 1) {
    if (d > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "lattice level beyond depth");
    std::vector<FencePoint> out;
    const Level& L = fs.level(d);
    for (Index v = 0; v < L.size(); v += static_cast<Index>(std::max<std::size_t>(stride, 1))) {
        Thread x = thread_through(fs.tower, d, v);
        const Rational &lo = fs.lo(d, v), &hi = fs.hi(d, v);
        out.push_back({x, lo});
        if (lo != hi) {
            out.push_back({x, (lo + hi) / 2});
            out.push_back({x, hi});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Factor commutation

/// The lifted thread must be the base image. Checked against the edge relation
/// directly: every out-neighbour (in-neighbour for the inverse) of the input's
/// last vertex projects to the output thread at every level.
inline Certificate check_factor(const FSystem& fs, const std::vector<FencePoint>& samples, bool inverse = false) {
    Lifter lift(fs, fs_mode(fs));
    const std::size_t N = samples.size();
    std::vector<std::uint8_t> bad(N, 0);
    std::vector<std::string> why(N);
    parallel_for(N, [&](std::size_t i) {
        const FencePoint& p = samples[i];
        try {
            FencePoint q = inverse ? lift.inverse(p) : lift.apply(p);
            const std::size_t d = p.thread.depth(), m = q.thread.depth();
            const Level& L = fs.level(d);
            auto nb = inverse ? L.in(p.thread.last()) : L.out(p.thread.last());
            for (Index w : nb)
                for (std::size_t k = 0; k <= m; ++k)
                    if (fs.tower.ancestor(d, w, k) != q.thread.at[k]) {
                        bad[i] = 1;
                        why[i] = "thread mismatch at level " + std::to_string(k) + " from " + vertex_tag(fs, d, p.thread.last());
                        return;
                    }
            if (!in_fiber(fs, q)) {
                bad[i] = 1;
                why[i] = "image height outside fiber";
            }
        } catch (const Error& e) {
            bad[i] = 1;
            why[i] = e.what();
        }
    });
    std::size_t fails = 0;
    Certificate c = make_cert(inverse ? "factor_inverse" : "factor", true);
    for (std::size_t i = 0; i < N; ++i)
        if (bad[i]) ++fails, c.note(why[i]);
    c.verdict = fails == 0 ? Verdict::Pass : Verdict::Fail;
    c.claimed = Rational(0);
    c.observed = Rational(static_cast<long long>(fails));
    c.note("samples " + std::to_string(N));
    return c;
}

// ---------------------------------------------------------------------------
// Isometry

using PointPair = std::pair<FencePoint, FencePoint>;

inline Rational point_distance(const FencePoint& a, const FencePoint& b) {
    return rmax(thread_distance(a.thread, b.thread), rabs(a.height - b.height));
}

/// Pairs of upper-endpoint points over distinct level-d threads, plus each
/// thread's (lower, upper) pair. Above `max_pairs` the pair list is thinned by
/// a fixed stride.
inline std::vector<PointPair> isometry_pairs(const FSystem& fs, std::size_t d, std::size_t max_pairs = 10'000) {
    const Level& L = fs.level(d);
    std::vector<FencePoint> pts;
    for (Index v = 0; v < L.size(); ++v) pts.push_back({thread_through(fs.tower, d, v), fs.hi(d, v)});
    const std::size_t n = pts.size(), total = n * (n - 1) / 2 + n;
    const std::size_t stride = total <= max_pairs ? 1 : (total + max_pairs - 1) / max_pairs;
    std::vector<PointPair> out;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (k++ % stride == 0) out.push_back({{pts[i].thread, fs.lo(d, pts[i].thread.last())}, pts[i]});
        for (std::size_t j = i + 1; j < n; ++j)
            if (k++ % stride == 0) out.push_back({pts[i], pts[j]});
    }
    return out;
}

/// Max-metric distance preserved exactly by one lift step on every pair. The
/// input distance is taken at the output depth.
inline Certificate check_isometry(const FSystem& fs, const std::vector<PointPair>& pairs) {
    LiftMode mode = fs_mode(fs);
    if (mode == LiftMode::Ratio && !fs.lower_identically_zero())
        throw Error(ErrorKind::ModeMismatch, "ratio isometry check needs lower endpoints identically 0");
    Lifter lift(fs, mode);
    Certificate c = make_cert("isometry", true);
    std::size_t fails = 0;
    Rational worst = 0;
    for (auto& [a, b] : pairs) {
        FencePoint fa = lift.apply(a), fb = lift.apply(b);
        std::size_t m = std::min(fa.thread.depth(), fb.thread.depth());
        FencePoint ta{truncate(a.thread, m), a.height}, tb{truncate(b.thread, m), b.height};
        Rational din = point_distance(ta, tb), dout = point_distance(fa, fb);
        if (din != dout) {
            ++fails;
            worst = rmax(worst, rabs(din - dout));
            c.note(vertex_tag(fs, a.thread.depth(), a.thread.last()) + " / " +
                   vertex_tag(fs, b.thread.depth(), b.thread.last()) + ": " + to_string(din) + " -> " + to_string(dout));
        }
    }
    c.verdict = fails == 0 ? Verdict::Pass : Verdict::Fail;
    c.claimed = Rational(0);
    c.observed = worst;
    c.note("pairs " + std::to_string(pairs.size()) + ", violations " + std::to_string(fails));
    return c;
}

// ---------------------------------------------------------------------------
// Covering radius of a marked orbit

struct CoveringReport {
    std::size_t slab_level = 0, orbit_level = 0;
    Rational radius, bound;
    Index worst = kNone;
    Certificate cert;
};

namespace verify_detail {

/// Sorted heights with their consecutive midpoints and half-gaps, plus a
/// sparse table for range maxima of the half-gaps.
struct HeightGroup {
    std::vector<Rational> H, mid, half;
    std::vector<std::vector<std::uint32_t>> table;

    void build() {
        for (std::size_t i = 0; i + 1 < H.size(); ++i) {
            mid.push_back((H[i] + H[i + 1]) / 2);
            half.push_back((H[i + 1] - H[i]) / 2);
        }
        const std::size_t n = half.size();
        if (n == 0) return;
        table.emplace_back(n);
        for (std::uint32_t i = 0; i < n; ++i) table[0][i] = i;
        for (std::size_t w = 1; (std::size_t{1} << w) <= n; ++w) {
            auto& prev = table[w - 1];
            std::vector<std::uint32_t> row(n - (std::size_t{1} << w) + 1);
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::uint32_t a = prev[i], b = prev[i + (std::size_t{1} << (w - 1))];
                row[i] = half[a] < half[b] ? b : a;
            }
            table.push_back(std::move(row));
        }
    }
    const Rational& range_max(std::size_t i, std::size_t j) const {  // inclusive, i <= j
        std::size_t w = 0;
        while ((std::size_t{2} << w) <= j - i + 1) ++w;
        std::uint32_t a = table[w][i], b = table[w][j + 1 - (std::size_t{1} << w)];
        return half[a] < half[b] ? half[b] : half[a];
    }
    /// max over s in [lo, hi] of the distance from s to H (H nonempty).
    Rational radius(const Rational& lo, const Rational& hi) const {
        auto dist = [&](const Rational& s) {
            auto it = std::lower_bound(H.begin(), H.end(), s);
            if (it == H.end()) return Rational(s - H.back());
            Rational d = *it - s;
            if (it != H.begin()) d = rmin(d, Rational(s - *std::prev(it)));
            return d;
        };
        Rational best = rmax(dist(lo), dist(hi));
        std::size_t i0 = static_cast<std::size_t>(std::upper_bound(mid.begin(), mid.end(), lo) - mid.begin());
        std::size_t i1 = static_cast<std::size_t>(std::lower_bound(mid.begin(), mid.end(), hi) - mid.begin());
        if (i0 < i1) best = rmax(best, range_max(i0, i1 - 1));
        return best;
    }
};

}  // namespace verify_detail

/// Exact covering radius, in the max metric, of the orbit points
/// (cell, phiU(cell)) at level O against the level-S slab (S <= O). A slab
/// box over v is matched at level k <= S by the orbit points sharing v's
/// level-k ancestor: base distance at most 2^{-(k+1)}, height distance the
/// max-min distance from [phiL(v), phiU(v)] to their heights.
inline CoveringReport covering_radius(const FSystem& fs, std::size_t S, std::size_t O, const std::vector<Index>& orbit) {
    if (O > fs.depth() || S > O) throw Error(ErrorKind::InsufficientDepth, "covering radius levels out of range");
    if (orbit.empty()) throw Error(ErrorKind::MarksMissing, "empty orbit");
    CoveringReport rep;
    rep.slab_level = S;
    rep.orbit_level = O;
    // Distinct heights per level-k ancestor, sorted.
    std::vector<std::vector<std::vector<ValueId>>> ids(S + 1);
    for (std::size_t k = 0; k <= S; ++k) ids[k].resize(fs.level(k).size());
    for (Index cell : orbit) {
        ValueId h = fs.hi_id[O][cell];
        Index a = fs.tower.ancestor(O, cell, S);
        for (std::size_t k = S + 1; k-- > 0;) {
            ids[k][a].push_back(h);
            if (k > 0) a = fs.level(k).parent(a);
        }
    }
    std::vector<std::vector<verify_detail::HeightGroup>> heights(S + 1);
    for (std::size_t k = 0; k <= S; ++k) {
        heights[k].resize(ids[k].size());
        parallel_for(ids[k].size(), [&](std::size_t a) {
            auto& hs = ids[k][a];
            std::sort(hs.begin(), hs.end());
            hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
            auto& g = heights[k][a];
            for (ValueId h : hs) g.H.push_back(fs.pool[h]);
            std::sort(g.H.begin(), g.H.end());
            g.build();
            std::vector<ValueId>().swap(hs);
        });
    }
    std::vector<Rational> base(S + 1);
    for (std::size_t k = 0; k <= S; ++k) base[k] = pow2neg(static_cast<int>(k) + 1);
    const Level& G = fs.level(S);
    struct KeyHash {
        std::size_t operator()(const std::array<std::uint64_t, 2>& k) const noexcept {
            return std::hash<std::uint64_t>()(k[0] * 0x9e3779b97f4a7c15ULL ^ k[1]);
        }
    };
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(G.size(), worker_count()));
    std::vector<Rational> chunk_max(chunks, Rational(0));
    std::vector<Index> chunk_worst(chunks, kNone);
    parallel_for(chunks, [&](std::size_t ci) {
        // Below level S many slab cells share (ancestor, endpoints).
        std::unordered_map<std::array<std::uint64_t, 2>, Rational, KeyHash> memo;
        auto height_radius = [&](std::size_t k, Index a, Index v) -> Rational {
            const auto& H = heights[k][a];
            if (k == S) return H.radius(fs.lo(S, v), fs.hi(S, v));
            std::array<std::uint64_t, 2> key{(std::uint64_t(k) << 32) | a,
                                             (std::uint64_t(fs.lo_id[S][v]) << 32) | fs.hi_id[S][v]};
            auto it = memo.find(key);
            if (it != memo.end()) return it->second;
            return memo.emplace(key, H.radius(fs.lo(S, v), fs.hi(S, v))).first->second;
        };
        std::vector<Index> anc(S + 1);
        const std::size_t lo_v = ci * G.size() / chunks, hi_v = (ci + 1) * G.size() / chunks;
        for (std::size_t vv = lo_v; vv < hi_v; ++vv) {
            Index a = static_cast<Index>(vv);
            for (std::size_t k = S + 1; k-- > 0;) {
                anc[k] = a;
                if (k > 0) a = fs.level(k).parent(a);
            }
            std::optional<Rational> best;
            for (std::size_t k = S + 1; k-- > 0;) {
                if (best && base[k] >= *best) break;
                if (heights[k][anc[k]].H.empty()) continue;
                Rational r = rmax(base[k], height_radius(k, anc[k], static_cast<Index>(vv)));
                if (!best || r < *best) best = std::move(r);
            }
            Rational rho = best ? *best : Rational(1);
            if (rho > chunk_max[ci]) chunk_max[ci] = rho, chunk_worst[ci] = static_cast<Index>(vv);
        }
    });
    rep.radius = 0;
    for (std::size_t ci = 0; ci < chunks; ++ci)
        if (chunk_max[ci] > rep.radius) rep.radius = chunk_max[ci], rep.worst = chunk_worst[ci];
    return rep;
}

/// Designated-orbit density at stage n. Transitive lifts (orbit marks): the
/// orbit at level n+1 against the level-n slab, bound 2*2^{-(n+1)} + mesh.
/// Chaotic lifts (periodic marks): the stage-(n+1) periodic orbit against its
/// own slab, bound 2^{-n} + 2^{-(n+1)}.
inline CoveringReport check_transitive(const FSystem& fs, std::size_t n) {
    CoveringReport rep;
    if (!fs.marks.orbit.empty()) {
        std::size_t O = std::min(n + 1, fs.depth());
        if (n > fs.depth() || O >= fs.marks.orbit.size()) throw Error(ErrorKind::InsufficientDepth, "stage beyond depth");
        rep = covering_radius(fs, n, O, fs.marks.orbit[O]);
        rep.bound = pow2neg(static_cast<int>(n)) + mesh(n);
        if (n == 0 && O == 0) rep.bound = 1;
        rep.cert.kind = "transitive";
    } else if (!fs.marks.periodic.empty()) {
        if (n + 1 > fs.depth() || n + 1 >= fs.marks.periodic.size())
            throw Error(ErrorKind::InsufficientDepth, "periodic stage beyond depth");
        rep = covering_radius(fs, n + 1, n + 1, fs.marks.periodic[n + 1]);
        rep.bound = pow2neg(static_cast<int>(n)) + pow2neg(static_cast<int>(n) + 1);
        rep.cert.kind = "periodic_density";
    } else {
        throw Error(ErrorKind::MarksMissing, "no orbit or periodic marks recorded");
    }
    rep.cert.verdict = rep.radius <= rep.bound ? Verdict::Pass : Verdict::Fail;
    rep.cert.claimed = rep.bound;
    rep.cert.observed = rep.radius;
    rep.cert.note("stage " + std::to_string(n) + ", slab level " + std::to_string(rep.slab_level) + ", orbit level " +
                  std::to_string(rep.orbit_level));
    if (rep.worst != kNone) rep.cert.note("worst slab cell " + vertex_tag(fs, rep.slab_level, rep.worst));
    return rep;
}

// ---------------------------------------------------------------------------
// Masks and mixing

/// Every masked cell has a masked out-neighbour and a masked in-neighbour.
inline Certificate check_mask_invariance(const FSystem& fs) {
    if (fs.marks.mask.empty()) throw Error(ErrorKind::MarksMissing, "no mask recorded");
    Certificate c = make_cert("mask_invariance", true);
    std::size_t fails = 0;
    for (std::size_t d = 0; d < fs.marks.mask.size() && d <= fs.depth(); ++d) {
        const auto& m = fs.marks.mask[d];
        if (m.empty()) continue;
        const Level& L = fs.level(d);
        for (Index v = 0; v < L.size(); ++v) {
            if (!m[v]) continue;
            bool out = false, in = false;
            for (Index w : L.out(v)) out = out || m[w];
            for (Index w : L.in(v)) in = in || m[w];
            if (!out || !in) ++fails, c.note("not invariant at " + vertex_tag(fs, d, v));
        }
    }
    c.verdict = fails == 0 ? Verdict::Pass : Verdict::Fail;
    c.observed = Rational(static_cast<long long>(fails));
    return c;
}

/// For every level-n pair (g1, g2) and every m in [window, horizon]: a path of
/// exactly m edges inside the level-(n+1) mask from a child of g1 to a child
/// of g2. Shift towers additionally check the explicit word w_j, j = m - 2n,
/// and that its orbit windows stay masked.
inline Certificate check_mixing(const FSystem& fs, std::size_t n, std::size_t window, std::size_t horizon) {
    if (n + 1 > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "mixing needs level n+1");
    if (fs.marks.mask.size() <= n + 1 || fs.marks.mask[n + 1].empty())
        throw Error(ErrorKind::MarksMissing, "no mask at level " + std::to_string(n + 1));
    const auto& mask = fs.marks.mask[n + 1];
    const Level& G = fs.level(n);
    const Level& C = fs.level(n + 1);
    Certificate c = make_cert("mixing", true);
    std::vector<std::vector<std::uint8_t>> fail(G.size(), std::vector<std::uint8_t>(horizon + 1, 0));
    parallel_for(G.size(), [&](std::size_t g1) {
        std::vector<std::uint8_t> cur(C.size(), 0), nxt(C.size());
        for (Index ch : C.children(static_cast<Index>(g1)))
            if (mask[ch]) cur[ch] = 1;
        for (std::size_t m = 0; m <= horizon; ++m) {
            if (m >= window) {
                std::vector<std::uint8_t> hit(G.size(), 0);
                for (Index v = 0; v < C.size(); ++v)
                    if (cur[v]) hit[C.parent(v)] = 1;
                for (Index g2 = 0; g2 < G.size(); ++g2)
                    if (!hit[g2]) fail[g1][m] = 1;
            }
            std::fill(nxt.begin(), nxt.end(), 0);
            for (Index v = 0; v < C.size(); ++v)
                if (cur[v])
                    for (Index w : C.out(v))
                        if (mask[w]) nxt[w] = 1;
            cur.swap(nxt);
        }
    });
    std::size_t fails = 0;
    for (Index g1 = 0; g1 < G.size(); ++g1)
        for (std::size_t m = window; m <= horizon; ++m)
            if (fail[g1][m]) ++fails, c.note("no masked path of length " + std::to_string(m) + " from " + vertex_tag(fs, n, g1));
    std::size_t word_fails = 0;
    if (fs.kind == "mixing" && window >= 2 * n + 1) {
        const std::size_t k = std::stoul(fs.params.at("alphabet"));
        const std::size_t len = 2 * n + 1, clen = 2 * n + 3;
        for (std::size_t u = 0; u < G.size(); ++u)
            for (std::size_t v = 0; v < G.size(); ++v) {
                std::string U = shift_word(k, len, u), V = shift_word(k, len, v);
                for (std::size_t m = window; m <= horizon; ++m) {
                    SparseSequence w = mixing_word(k, U, V, m - 2 * n);
                    auto window_index = [&](long long centre, std::size_t half) {
                        std::size_t idx = 0;
                        for (long long i = centre - static_cast<long long>(half); i <= centre + static_cast<long long>(half); ++i)
                            idx = idx * k + w.at(i);
                        return idx;
                    };
                    bool ok = window_index(0, n) == u && window_index(static_cast<long long>(m), n) == v;
                    for (long long l = 0; ok && l <= static_cast<long long>(m); ++l) ok = mask[window_index(l, n + 1)] != 0;
                    (void)clen;
                    if (!ok) ++word_fails, c.note("word witness fails for " + U + " -> " + V + " at m = " + std::to_string(m));
                }
            }
    }
    c.verdict = fails + word_fails == 0 ? Verdict::Pass : Verdict::Fail;
    c.claimed = Rational(static_cast<long long>(window));
    c.observed = Rational(static_cast<long long>(fails + word_fails));
    c.note("pairs " + std::to_string(G.size() * G.size()) + ", m in [" + std::to_string(window) + ", " +
           std::to_string(horizon) + "]");
    return c;
}

// ---------------------------------------------------------------------------
// Frozen heights

/// Orbit marks: at level n+1, the cells visited by the designated orbit at the
/// times marked at level n keep their parent's upper endpoint. Periodic marks:
/// the dagger images of each marked periodic orbit stay a cycle with the same
/// upper endpoints at every deeper level. Masks: masked cells at level d >= 1
/// keep their parent's upper endpoint.
inline Certificate check_frozen_heights(const FSystem& fs) {
    Certificate c = make_cert("frozen_heights", true);
    std::size_t fails = 0, checked = 0;
    if (!fs.marks.orbit.empty() && fs.marks.designated) {
        for (std::size_t n = 0; n + 1 <= fs.depth() && n + 1 < fs.marks.orbit.size(); ++n) {
            const std::size_t P = fs.level(n + 1).size();
            const long long start = fs.marks.orbit_start[n], len = static_cast<long long>(fs.marks.orbit[n].size());
            // Floor of time tau at level n+1 (cycle level, designated thread at floor 0).
            for (long long tau = start; tau < start + len; ++tau) {
                Index cell = static_cast<Index>(((tau % static_cast<long long>(P)) + static_cast<long long>(P)) %
                                                static_cast<long long>(P));
                ++checked;
                if (fs.hi_id[n + 1][cell] != fs.hi_id[n][fs.level(n + 1).parent(cell)])
                    ++fails, c.note("orbit cell " + vertex_tag(fs, n + 1, cell) + " changed height");
            }
        }
    }
    if (!fs.marks.periodic.empty()) {
        for (std::size_t L = 1; L < fs.marks.periodic.size() && L <= fs.depth(); ++L) {
            std::vector<Index> orbit = fs.marks.periodic[L];
            for (std::size_t d = L; d <= fs.depth(); ++d) {
                const Level& G = fs.level(d);
                for (std::size_t i = 0; i < orbit.size(); ++i) {
                    Index a = orbit[i], b = orbit[(i + 1) % orbit.size()];
                    auto out = G.out(a);
                    if (std::find(out.begin(), out.end(), b) == out.end())
                        ++fails, c.note("periodic orbit of level " + std::to_string(L) + " broken at level " + std::to_string(d));
                    ++checked;
                    if (fs.hi_id[d][a] != fs.hi_id[L][fs.marks.periodic[L][i]])
                        ++fails, c.note("periodic height of level " + std::to_string(L) + " moved at level " + std::to_string(d));
                }
                if (d < fs.depth())
                    for (Index& a : orbit) a = fs.level(d + 1).dagger_child(a);
            }
        }
    }
    if (!fs.marks.mask.empty()) {
        for (std::size_t d = 1; d < fs.marks.mask.size() && d <= fs.depth(); ++d) {
            const auto& m = fs.marks.mask[d];
            for (Index v = 0; v < m.size(); ++v) {
                if (!m[v]) continue;
                ++checked;
                if (fs.hi_id[d][v] != fs.hi_id[d - 1][fs.level(d).parent(v)])
                    ++fails, c.note("masked cell " + vertex_tag(fs, d, v) + " changed height");
            }
        }
    }
    if (checked == 0) c.verdict = Verdict::Unwitnessed;
    else c.verdict = fails == 0 ? Verdict::Pass : Verdict::Fail;
    c.observed = Rational(static_cast<long long>(fails));
    c.note("cells checked " + std::to_string(checked));
    return c;
}

/// Masked endpoint conditions of the isometry lifts: Lelek-type systems keep
/// phiU on masked cells (frozen at 1 when masked from the root); the others
/// shrink masked gaps below 2^{-depth} at the last level.
inline Certificate check_isometry_masks(const FSystem& fs) {
    if (fs.marks.mask.empty()) throw Error(ErrorKind::MarksMissing, "no mask recorded");
    const std::size_t D = fs.depth();
    if (fs.lift_mode == "ratio") {
        Certificate c = check_frozen_heights(fs);
        c.kind = "isometry_masks";
        if (!fs.marks.mask[0].empty() && fs.marks.mask[0][0]) {
            for (std::size_t d = 0; d <= D; ++d)
                for (Index v = 0; v < fs.level(d).size(); ++v)
                    if (fs.marks.mask[d][v] && fs.hi(d, v) != 1)
                        c.verdict = Verdict::Fail, c.note("masked cell " + vertex_tag(fs, d, v) + " below 1");
        }
        return c;
    }
    Certificate c = make_cert("isometry_masks", true);
    Rational worst = 0;
    std::size_t masked = 0;
    const auto& m = fs.marks.mask[D];
    for (Index v = 0; v < fs.level(D).size(); ++v) {
        if (m.empty() || !m[v]) continue;
        ++masked;
        worst = rmax(worst, fs.gap(D, v));
    }
    c.claimed = pow2neg(static_cast<int>(D));
    c.observed = worst;
    if (masked == 0) c.verdict = Verdict::Unwitnessed;
    else c.verdict = worst < *c.claimed ? Verdict::Pass : Verdict::Fail;
    c.note("masked cells at level " + std::to_string(D) + ": " + std::to_string(masked));
    return c;
}

// ---------------------------------------------------------------------------
// Periodic orbits

struct PeriodicOrbit {
    std::size_t length = 0;
    Index first = kNone;
    Rational min_gap, max_gap;
    /// Steps after which the upper endpoint returns: length, 2*length, or 0 (neither).
    std::size_t height_period = 0;
};

struct PeriodicReport {
    std::size_t level = 0;
    std::vector<PeriodicOrbit> orbits;
    std::map<std::size_t, std::size_t> count_by_length;
    Certificate cert;
};

/// Cycles of length <= max_period on a cycle level, or the marked periodic
/// orbits otherwise. Upper endpoints are lifted around each cycle at fixed
/// depth to see whether they return after p or 2p steps.
inline PeriodicReport check_periodic(const FSystem& fs, std::size_t max_period, std::size_t depth) {
    if (depth > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "periodic scan beyond depth");
    PeriodicReport rep;
    rep.level = depth;
    rep.cert.kind = "periodic";
    const Level& G = fs.level(depth);
    std::vector<std::vector<Index>> cycles;
    bool cycle_level = true;
    try {
        cycles = cycle_info(G).cycles;
    } catch (const Error&) {
        cycle_level = false;
    }
    if (!cycle_level) {
        if (fs.marks.periodic.empty()) {
            rep.cert.verdict = Verdict::Unwitnessed;
            rep.cert.note("level is not a union of cycles and no periodic orbits are marked");
            return rep;
        }
        for (std::size_t L = 1; L < fs.marks.periodic.size() && L <= depth; ++L) {
            std::vector<Index> orbit = fs.marks.periodic[L];
            for (std::size_t d = L; d < depth; ++d)
                for (Index& a : orbit) a = fs.level(d + 1).dagger_child(a);
            cycles.push_back(std::move(orbit));
        }
    }
    const bool identity = cycle_level && std::all_of(cycles.begin(), cycles.end(), [](auto& c) { return c.size() == 1; });
    std::size_t fails = 0;
    for (auto& cyc : cycles) {
        if (cyc.size() > max_period) continue;
        PeriodicOrbit o;
        o.length = cyc.size();
        o.first = cyc[0];
        o.min_gap = o.max_gap = fs.gap(depth, cyc[0]);
        for (Index v : cyc) {
            o.min_gap = rmin(o.min_gap, fs.gap(depth, v));
            o.max_gap = rmax(o.max_gap, fs.gap(depth, v));
        }
        // Heights along the cycle under the level-depth scaling maps.
        LiftMode mode = fs_mode(fs);
        Rational h = fs.hi(depth, cyc[0]);
        for (std::size_t step = 1; step <= 2 * cyc.size(); ++step) {
            Index u = cyc[(step - 1) % cyc.size()], v = cyc[step % cyc.size()];
            if (mode == LiftMode::Ratio)
                h = h * fs.hi(depth, v) / fs.hi(depth, u);
            else if (fs.gap(depth, u) != 0)
                h = affine_between(fs.lo(depth, u), fs.hi(depth, u), fs.lo(depth, v), fs.hi(depth, v))(h);
            else
                h = fs.hi(depth, v);
            if (h == fs.hi(depth, cyc[0]) && (step == cyc.size() || step == 2 * cyc.size())) {
                o.height_period = step;
                break;
            }
        }
        if (o.height_period == 0) ++fails, rep.cert.note("height does not return on cycle through " + vertex_tag(fs, depth, o.first));
        ++rep.count_by_length[o.length];
        rep.orbits.push_back(std::move(o));
    }
    rep.cert.verdict = fails == 0 ? Verdict::Pass : Verdict::Fail;
    for (auto& [len, cnt] : rep.count_by_length)
        rep.cert.note("length " + std::to_string(len) + ": " + std::to_string(cnt) + " orbit(s)");
    if (identity) rep.cert.note("identity dynamics: every thread has period 1");
    return rep;
}

// ---------------------------------------------------------------------------
// Entropy

struct EntropyReport {
    /// Worst ratio count / (n/eps) over sampled fibers, n and eps.
    Rational worst_fiber_ratio;
    bool fiber_ok = true;
    /// Path counts of lengths 0..steps in the level digraph and the lifted model.
    std::vector<Integer> base_counts, lift_counts;
    std::vector<Rational> base_ratios, lift_ratios;
    /// log of the last base ratio.
    double base_growth = 0, lift_growth = 0;
    bool growth_equal = false;
    std::size_t rung_count = 0;
    Certificate cert;
};

namespace verify_detail {

inline std::vector<Integer> path_counts(const Level& L, std::size_t steps, std::size_t copies = 1) {
    std::vector<Integer> cur(L.size(), 1), nxt(L.size());
    std::vector<Integer> out;
    auto total = [&] {
        Integer s = 0;
        for (auto& x : cur) s += x;
        return s * static_cast<long>(copies);
    };
    out.push_back(total());
    for (std::size_t s = 0; s < steps; ++s) {
        for (auto& x : nxt) x = 0;
        for (Index v = 0; v < L.size(); ++v)
            for (Index w : L.out(v)) nxt[v] += cur[w];
        cur.swap(nxt);
        out.push_back(total());
    }
    return out;
}

/// Fiber maps along a level-d path: the scaling map of each edge.
inline Rational step_height(const FSystem& fs, std::size_t d, Index u, Index v, const Rational& t, LiftMode mode) {
    if (mode == LiftMode::Ratio) return t * fs.hi(d, v) / fs.hi(d, u);
    if (fs.gap(d, u) == 0) return fs.lo(d, v);
    return affine_between(fs.lo(d, u), fs.hi(d, u), fs.lo(d, v), fs.hi(d, v))(t);
}

}  // namespace verify_detail

/// (i) greedy (n, eps)-separated sets in sampled fibers, counted against n/eps;
/// (ii) path-count growth of the level-d digraph; (iii) the same on the lifted
/// model whose vertices are (v, c) with c a normalized rung position present at
/// level d. The scaling maps preserve normalized positions, so the lifted
/// model is the product with the rung set.
inline EntropyReport check_entropy(const FSystem& fs, std::size_t d, const std::vector<Rational>& eps_grid,
                                   std::size_t n_max = 16, std::size_t fiber_samples = 16, std::size_t steps = 8) {
    if (d > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "entropy level beyond depth");
    EntropyReport rep;
    rep.cert.kind = "entropy";
    const Level& L = fs.level(d);
    const LiftMode mode = fs_mode(fs);
    rep.worst_fiber_ratio = 0;
    const std::size_t stride = std::max<std::size_t>(1, L.size() / std::max<std::size_t>(fiber_samples, 1));
    for (Index v0 = 0; v0 < L.size(); v0 += static_cast<Index>(stride)) {
        std::vector<Index> path{v0};
        for (std::size_t s = 0; s < n_max; ++s) path.push_back(L.out(path.back())[0]);
        if (fs.gap(d, v0) == 0) continue;
        for (const Rational& eps : eps_grid) {
            // Candidate heights at pitch eps/4 across the fiber.
            std::vector<std::vector<Rational>> traj;
            const Rational lo = fs.lo(d, v0), hi = fs.hi(d, v0), pitch = eps / 4;
            for (Rational t = lo;; t += pitch) {
                Rational s = rmin(t, hi);
                std::vector<Rational> tr{s};
                for (std::size_t i = 0; i < n_max; ++i) tr.push_back(verify_detail::step_height(fs, d, path[i], path[i + 1], tr.back(), mode));
                traj.push_back(std::move(tr));
                if (t >= hi) break;
            }
            for (std::size_t n = 1; n <= n_max; ++n) {
                std::vector<std::size_t> chosen;
                for (std::size_t a = 0; a < traj.size(); ++a) {
                    bool sep = true;
                    for (std::size_t b : chosen) {
                        Rational dist = 0;
                        for (std::size_t i = 0; i < n; ++i) dist = rmax(dist, rabs(traj[a][i] - traj[b][i]));
                        if (!(dist > eps)) {
                            sep = false;
                            break;
                        }
                    }
                    if (sep) chosen.push_back(a);
                }
                Rational bound = Rational(static_cast<long long>(n)) / eps;
                Rational ratio = Rational(static_cast<long long>(chosen.size())) / bound;
                rep.worst_fiber_ratio = rmax(rep.worst_fiber_ratio, ratio);
                if (ratio > 1) {
                    rep.fiber_ok = false;
                    rep.cert.note("fiber over " + vertex_tag(fs, d, v0) + ": " + std::to_string(chosen.size()) +
                                  " separated points exceed " + to_string(bound));
                }
            }
        }
    }
    // Rung positions present at level d, normalized to the parent interval.
    std::vector<Rational> rungs;
    for (Index v = 0; v < L.size(); ++v) {
        Rational c = 1;
        if (d > 0) {
            Index p = L.parent(v);
            if (fs.gap(d - 1, p) != 0) c = (fs.hi(d, v) - fs.lo(d - 1, p)) / fs.gap(d - 1, p);
        }
        rungs.push_back(c);
    }
    std::sort(rungs.begin(), rungs.end());
    rungs.erase(std::unique(rungs.begin(), rungs.end()), rungs.end());
    rep.rung_count = rungs.size();
    rep.base_counts = verify_detail::path_counts(L, steps);
    rep.lift_counts = verify_detail::path_counts(L, steps, rep.rung_count);
    for (std::size_t s = 0; s + 1 < rep.base_counts.size(); ++s) {
        rep.base_ratios.push_back(Rational(rep.base_counts[s + 1]) / Rational(rep.base_counts[s]));
        rep.lift_ratios.push_back(Rational(rep.lift_counts[s + 1]) / Rational(rep.lift_counts[s]));
    }
    if (!rep.base_ratios.empty()) {
        rep.base_growth = std::log(to_double(rep.base_ratios.back()));
        rep.lift_growth = std::log(to_double(rep.lift_ratios.back()));
    }
    rep.growth_equal = rep.base_ratios == rep.lift_ratios;
    rep.cert.verdict = rep.fiber_ok && rep.growth_equal ? Verdict::Pass : Verdict::Fail;
    rep.cert.claimed = Rational(1);
    rep.cert.observed = rep.worst_fiber_ratio;
    if (!rep.base_ratios.empty()) rep.cert.note("base path-count ratio " + to_string(rep.base_ratios.back()));
    return rep;
}

// ---------------------------------------------------------------------------
// Two-sided inheritance

/// At level n: (1) every slab box keeps a full-fiber sub-box down the dagger
/// chain; (2) small-gap cells (gap < r) among the descendants cover every
/// fiber height within eps; (3) on cycle levels, every cycle at the last level
/// passes over every level-n cylinder.
inline Certificate check_twosided_inheritance(const FSystem& fs, std::size_t n, const Rational& r, const Rational& eps) {
    if (n > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "inheritance level beyond depth");
    const std::size_t D = fs.depth();
    const Level& G = fs.level(n);
    std::vector<Certificate> parts;
    {
        Certificate c = make_cert("full_fiber_subbox", true);
        for (Index v = 0; v < G.size(); ++v) {
            Index a = v;
            for (std::size_t d = n + 1; d <= D && a != kNone; ++d) {
                Index b = fs.level(d).dagger_child(a);
                if (b == kNone || fs.lo_id[d][b] != fs.lo_id[n][v] || fs.hi_id[d][b] != fs.hi_id[n][v]) {
                    c.verdict = Verdict::Fail;
                    c.note("dagger chain loses the fiber of " + vertex_tag(fs, n, v));
                    a = kNone;
                    break;
                }
                a = b;
            }
        }
        parts.push_back(std::move(c));
    }
    {
        Certificate c = make_cert("two_sided_density", true);
        // Small-gap intervals per level-n ancestor.
        std::vector<std::vector<std::pair<Rational, Rational>>> small(G.size());
        for (std::size_t d = n; d <= D; ++d)
            for (Index w = 0; w < fs.level(d).size(); ++w)
                if (fs.gap(d, w) < r) small[fs.tower.ancestor(d, w, n)].push_back({fs.lo(d, w), fs.hi(d, w)});
        Rational worst = 0;
        for (Index v = 0; v < G.size(); ++v) {
            auto& iv = small[v];
            if (iv.empty()) {
                worst = rmax(worst, Rational(1));
                c.note("no small-gap descendant of " + vertex_tag(fs, n, v));
                continue;
            }
            std::sort(iv.begin(), iv.end());
            Rational cover_end = iv[0].second, rad = iv[0].first - fs.lo(n, v);
            for (std::size_t i = 1; i < iv.size(); ++i) {
                if (iv[i].first > cover_end) rad = rmax(rad, (iv[i].first - cover_end) / 2);
                cover_end = rmax(cover_end, iv[i].second);
            }
            rad = rmax(rad, fs.hi(n, v) - cover_end);
            worst = rmax(worst, rad);
        }
        c.claimed = eps;
        c.observed = worst;
        c.verdict = worst <= eps ? Verdict::Pass : Verdict::Fail;
        parts.push_back(std::move(c));
    }
    {
        Certificate c = make_cert("orbit_visits_cylinders", true);
        try {
            CycleInfo ci = cycle_info(fs.level(D));
            for (auto& cyc : ci.cycles) {
                std::vector<std::uint8_t> seen(G.size(), 0);
                std::size_t cnt = 0;
                for (Index v : cyc) {
                    Index a = fs.tower.ancestor(D, v, n);
                    if (!seen[a]) seen[a] = 1, ++cnt;
                }
                if (cnt != G.size()) {
                    c.verdict = Verdict::Fail;
                    c.note("cycle through " + vertex_tag(fs, D, cyc[0]) + " misses " + std::to_string(G.size() - cnt) +
                           " level-" + std::to_string(n) + " cylinders");
                }
            }
            c.note(std::to_string(ci.cycles.size()) + " cycle(s) at level " + std::to_string(D));
        } catch (const Error&) {
            c.verdict = Verdict::Unwitnessed;
            c.note("last level is not a union of cycles");
        }
        parts.push_back(std::move(c));
    }
    Certificate all = combine("twosided_inheritance", parts);
    all.claimed = parts[1].claimed;
    all.observed = parts[1].observed;
    for (auto& p : parts)
        for (auto& w : p.witnesses) all.note(p.kind + ": " + w);
    return all;
}

// ---------------------------------------------------------------------------
// Odometer refinement items

/// Refinement n -> n+1 of a cycle tower: (a) child intervals nondegenerate and
/// nested; (b) a child with the parent's interval; (c) every subinterval of a
/// parent fiber is eps-approximated in both endpoints by a child (via the
/// exact eta); (d) Gamma_n and Gamma+_n below eps; plus |G_{n+1}| = m|G_n| and
/// a single child cycle per parent cycle.
inline Certificate check_odometer_refinement(const FSystem& fs, std::size_t n, const Rational& eps,
                                             std::optional<std::size_t> m = std::nullopt) {
    if (n + 1 > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "refinement needs level n+1");
    const Level& G = fs.level(n);
    const Level& C = fs.level(n + 1);
    std::vector<Certificate> parts;
    {
        Certificate c = make_cert("item_a", true);
        for (Index v = 0; v < C.size(); ++v) {
            Index p = C.parent(v);
            if (!(fs.lo(n, p) <= fs.lo(n + 1, v) && fs.lo(n + 1, v) < fs.hi(n + 1, v) && fs.hi(n + 1, v) <= fs.hi(n, p))) {
                c.verdict = Verdict::Fail;
                c.note("child " + vertex_tag(fs, n + 1, v) + " breaks nesting or is degenerate");
            }
        }
        parts.push_back(std::move(c));
    }
    {
        Certificate c = make_cert("item_b", true);
        for (Index g = 0; g < G.size(); ++g) {
            bool any = false;
            for (Index ch : C.children(g))
                any = any || (fs.lo_id[n + 1][ch] == fs.lo_id[n][g] && fs.hi_id[n + 1][ch] == fs.hi_id[n][g]);
            if (!any) c.verdict = Verdict::Fail, c.note("no full-interval child of " + vertex_tag(fs, n, g));
        }
        parts.push_back(std::move(c));
    }
    {
        EtaEntry e = eta_report(fs, n, true);
        Certificate c = make_cert("item_c", e.eta < eps);
        c.claimed = eps;
        c.observed = e.eta;
        parts.push_back(std::move(c));
    }
    {
        auto [g, gp] = gamma_affine(fs, n);
        Certificate c = make_cert("item_d", g < eps && gp < eps);
        c.claimed = eps;
        c.observed = rmax(g, gp);
        c.note("gamma " + to_string(g) + ", gamma_plus " + to_string(gp));
        parts.push_back(std::move(c));
    }
    {
        Certificate c = make_cert("cycle_size", true);
        try {
            CycleInfo cg = cycle_info(G), cc = cycle_info(C);
            if (cc.cycles.size() != cg.cycles.size()) c.verdict = Verdict::Fail, c.note("child cycle count differs");
            if (m && C.size() != *m * G.size()) c.verdict = Verdict::Fail;
            c.note(std::to_string(C.size()) + " = " + (m ? std::to_string(*m) : std::string("?")) + " x " +
                   std::to_string(G.size()));
        } catch (const Error& e) {
            c.verdict = Verdict::Fail;
            c.note(e.what());
        }
        parts.push_back(std::move(c));
    }
    Certificate all = combine("odometer_refinement", parts);
    all.claimed = eps;
    for (auto& p : parts)
        for (auto& w : p.witnesses) all.note(p.kind + ": " + w);
    return all;
}

}  // namespace ff
