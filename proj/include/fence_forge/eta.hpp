#pragma once

// Exact approximation radii of a vertex's fiber by its children's fibers.
//
// For a parent interval [L,U] and child intervals [c_i,d_i]:
//   eta_plus  = max_{t in [L,U]} min_i |t - d_i|
//   eta_minus = max_{t in [L,U]} min_i |t - c_i|
//   eta       = max_{L<=a<=b<=U} min_i max(|a - c_i|, |b - d_i|)
// eta is the radius of the largest Chebyshev-empty square centred in the
// triangle {L<=a<=b<=U}; it is found by binary search over the finite set of
// radii |x-y| and |x-y|/2 for x,y among all endpoints, with an exact
// feasibility sweep at each probe.

#include <algorithm>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fence_forge/fsystem.hpp"
#include "fence_forge/parallel.hpp"

namespace ff {

struct ChildInterval {
    Rational lo, hi;
};

namespace eta_detail {

inline Rational max_min_distance(const Rational& L, const Rational& U, std::vector<Rational> pts) {
    if (pts.empty()) throw Error(ErrorKind::NoChildren, "vertex has no children");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto dist = [&](const Rational& t) {
        auto it = std::lower_bound(pts.begin(), pts.end(), t);
        Rational best = -1;
        if (it != pts.end()) best = *it - t;
        if (it != pts.begin()) {
            Rational d = t - *std::prev(it);
            if (best < 0 || d < best) best = d;
        }
        return best;
    };
    Rational best = rmax(dist(L), dist(U));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Rational m = (pts[i] + pts[i + 1]) / 2;
        if (m < L || m > U) continue;
        Rational d = dist(m);
        if (d > best) best = d;
    }
    return best;
}

/// True when some (a,b) with L<=a<=b<=U has Chebyshev distance >= r from all
/// (c_i,d_i). Children must be sorted by hi.
inline bool square_fits(const Rational& L, const Rational& U, const std::vector<ChildInterval>& by_hi,
                        const Rational& r) {
    if (r == 0) return true;
    std::vector<Rational> as{L};
    for (auto& c : by_hi) {
        Rational lo = c.lo - r, hi = c.lo + r;
        if (lo >= L && lo <= U) as.push_back(std::move(lo));
        if (hi >= L && hi <= U) as.push_back(std::move(hi));
    }
    for (const Rational& a : as) {
        Rational cur = a;
        for (auto& c : by_hi) {
            if (!(rabs(a - c.lo) < r)) continue;
            Rational s = c.hi - r;
            if (s >= cur) break;
            Rational e = c.hi + r;
            if (e > cur) cur = std::move(e);
        }
        if (cur <= U) return true;
    }
    return false;
}

}  // namespace eta_detail

inline Rational eta_plus_of(const Rational& L, const Rational& U, const std::vector<ChildInterval>& ch) {
    std::vector<Rational> pts;
    pts.reserve(ch.size());
    for (auto& c : ch) pts.push_back(c.hi);
    return eta_detail::max_min_distance(L, U, std::move(pts));
}

inline Rational eta_minus_of(const Rational& L, const Rational& U, const std::vector<ChildInterval>& ch) {
    std::vector<Rational> pts;
    pts.reserve(ch.size());
    for (auto& c : ch) pts.push_back(c.lo);
    return eta_detail::max_min_distance(L, U, std::move(pts));
}

inline Rational eta_of(const Rational& L, const Rational& U, std::vector<ChildInterval> ch) {
    if (ch.empty()) throw Error(ErrorKind::NoChildren, "vertex has no children");
    if (L > U) throw Error(ErrorKind::OrderViolation, "parent interval reversed");
    std::sort(ch.begin(), ch.end(), [](auto& x, auto& y) { return x.hi < y.hi || (x.hi == y.hi && x.lo < y.lo); });
    ch.erase(std::unique(ch.begin(), ch.end(), [](auto& x, auto& y) { return x.lo == y.lo && x.hi == y.hi; }),
             ch.end());
    std::vector<Rational> pts{L, U};
    for (auto& c : ch) {
        pts.push_back(c.lo);
        pts.push_back(c.hi);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Rational> radii{Rational(0)};
    radii.reserve(pts.size() * pts.size() + 1);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            Rational d = pts[j] - pts[i];
            radii.push_back(d / 2);
            radii.push_back(std::move(d));
        }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    std::size_t lo = 0, hi = radii.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi + 1) / 2;
        if (eta_detail::square_fits(L, U, ch, radii[mid]))
            lo = mid;
        else
            hi = mid - 1;
    }
    return radii[lo];
}

struct VertexEta {
    Rational eta, eta_plus, eta_minus;
};

/// eta values of a vertex computed on the normalized configuration, cached
/// by that configuration. Gap-zero parents contribute 0.
class EtaCache {
public:
    VertexEta get(const Rational& L, const Rational& U, const std::vector<ChildInterval>& ch, bool with_eta) {
        if (ch.empty()) throw Error(ErrorKind::NoChildren, "vertex has no children");
        Rational gap = U - L;
        if (gap == 0) return {0, 0, 0};
        std::vector<ChildInterval> norm;
        norm.reserve(ch.size());
        for (auto& c : ch) norm.push_back({(c.lo - L) / gap, (c.hi - L) / gap});
        std::sort(norm.begin(), norm.end(),
                  [](auto& x, auto& y) { return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi); });
        norm.erase(std::unique(norm.begin(), norm.end(), [](auto& x, auto& y) { return x.lo == y.lo && x.hi == y.hi; }),
                   norm.end());
        std::string key = with_eta ? "E" : "P";
        for (auto& c : norm) key += to_string(c.lo) + "," + to_string(c.hi) + ";";
        VertexEta base;
        bool hit = false;
        {
            std::lock_guard lk(mu_);
            if (auto it = map_.find(key); it != map_.end()) {
                base = it->second;
                hit = true;
            }
        }
        if (!hit) {
            Rational zero = 0, one = 1;
            base.eta_plus = eta_plus_of(zero, one, norm);
            base.eta_minus = eta_minus_of(zero, one, norm);
            base.eta = with_eta ? eta_of(zero, one, norm) : Rational(-1);
            std::lock_guard lk(mu_);
            map_.emplace(std::move(key), base);
        }
        VertexEta out{base.eta * gap, base.eta_plus * gap, base.eta_minus * gap};
        if (!with_eta) out.eta = -1;
        return out;
    }

private:
    std::mutex mu_;
    std::unordered_map<std::string, VertexEta> map_;
};

struct EtaEntry {
    std::size_t n = 0;
    Rational eta, eta_plus, eta_minus;
    /// Vertices attaining each maximum.
    Index eta_at = kNone, eta_plus_at = kNone, eta_minus_at = kNone;
    bool has_eta = true;
};

inline std::vector<ChildInterval> child_intervals(const FSystem& fs, std::size_t n, Index g) {
    const Level& C = fs.level(n + 1);
    std::vector<ChildInterval> ch;
    for (Index c : C.children(g)) ch.push_back({fs.lo(n + 1, c), fs.hi(n + 1, c)});
    return ch;
}

/// eta, eta_plus, eta_minus at level n (requires level n+1). With
/// `with_eta == false` only the endpoint radii are computed.
inline EtaEntry eta_report(const FSystem& fs, std::size_t n, bool with_eta = true, EtaCache* cache = nullptr) {
    if (n + 1 > fs.depth())
        throw Error(ErrorKind::InsufficientDepth, "eta at level " + std::to_string(n) + " needs level " +
                                                      std::to_string(n + 1));
    EtaCache local;
    EtaCache& c = cache ? *cache : local;
    const Level& G = fs.level(n);
    std::vector<VertexEta> per(G.size());
    parallel_for(G.size(), [&](std::size_t g) {
        per[g] = c.get(fs.lo(n, static_cast<Index>(g)), fs.hi(n, static_cast<Index>(g)),
                       child_intervals(fs, n, static_cast<Index>(g)), with_eta);
    });
    EtaEntry e;
    e.n = n;
    e.has_eta = with_eta;
    e.eta = e.eta_plus = e.eta_minus = -1;
    for (Index g = 0; g < G.size(); ++g) {
        if (with_eta && per[g].eta > e.eta) e.eta = per[g].eta, e.eta_at = g;
        if (per[g].eta_plus > e.eta_plus) e.eta_plus = per[g].eta_plus, e.eta_plus_at = g;
        if (per[g].eta_minus > e.eta_minus) e.eta_minus = per[g].eta_minus, e.eta_minus_at = g;
    }
    return e;
}

}  // namespace ff
