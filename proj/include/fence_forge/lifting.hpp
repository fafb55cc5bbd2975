#pragma once

// Fiber scaling along base edges. Ratio mode multiplies heights by the ratio
// of upper endpoints; affine mode maps the source fiber interval onto the
// target one. Gamma measures how much a level's scaling maps move when the
// tower is refined by one level.

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fence_forge/fsystem.hpp"

namespace ff {

enum class LiftMode { Ratio, Affine };

inline const char* mode_name(LiftMode m) { return m == LiftMode::Ratio ? "ratio" : "affine"; }
inline LiftMode parse_mode(const std::string& s) {
    if (s == "ratio") return LiftMode::Ratio;
    if (s == "affine") return LiftMode::Affine;
    throw Error(ErrorKind::ParseError, "unknown lift mode '" + s + "'");
}

/// t -> slope * (t - from) + to
struct AffineMap {
    Rational slope, from, to;
    Rational operator()(const Rational& t) const { return slope * (t - from) + to; }
    bool operator==(const AffineMap&) const = default;
};

inline AffineMap affine_between(const Rational& lu, const Rational& hu, const Rational& lv, const Rational& hv) {
    if (hu == lu) throw Error(ErrorKind::DegenerateInterval, "source interval is a point");
    return {(hv - lv) / (hu - lu), lu, lv};
}

struct GammaLevel {
    std::size_t n = 0;
    Rational gamma, gamma_plus;
};

struct GammaReport {
    LiftMode mode = LiftMode::Ratio;
    std::vector<GammaLevel> levels;
    /// Prefix sums, one per level.
    std::vector<Rational> partial_sum, partial_sum_plus;

    Rational total() const { return partial_sum.empty() ? Rational(0) : partial_sum.back(); }
    Rational total_plus() const { return partial_sum_plus.empty() ? Rational(0) : partial_sum_plus.back(); }
};

namespace lift_detail {
struct KeyHash {
    template <std::size_t N>
    std::size_t operator()(const std::array<ValueId, N>& a) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (ValueId v : a) h = (h ^ v) * 1099511628211ULL;
        return h;
    }
};
}  // namespace lift_detail

/// Ratio-mode Gamma at level n: max over level-n edges (u,v) and child edges
/// (u',v') of |s_n(u,v) - s_{n+1}(u',v')| and |s_n(v,u) - s_{n+1}(v',u')|.
inline Rational gamma_ratio(const FSystem& fs, std::size_t n) {
    if (n + 1 > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "gamma needs level n+1");
    for (std::size_t k : {n, n + 1})
        for (ValueId h : fs.hi_id[k])
            if (fs.pool[h] == 0) throw Error(ErrorKind::ZeroUpper, "upper endpoint 0 at level " + std::to_string(k));
    const Level& C = fs.level(n + 1);
    std::unordered_set<std::array<ValueId, 4>, lift_detail::KeyHash> keys;
    C.for_each_edge([&](Index u2, Index v2) {
        Index u = C.parent(u2), v = C.parent(v2);
        keys.insert({fs.hi_id[n][u], fs.hi_id[n][v], fs.hi_id[n + 1][u2], fs.hi_id[n + 1][v2]});
    });
    Rational best = 0;
    for (auto& k : keys) {
        const Rational &hu = fs.pool[k[0]], &hv = fs.pool[k[1]], &hu2 = fs.pool[k[2]], &hv2 = fs.pool[k[3]];
        best = rmax(best, rabs(hv / hu - hv2 / hu2));
        best = rmax(best, rabs(hu / hv - hu2 / hv2));
    }
    return best;
}

/// Affine-mode (Gamma, Gamma+) at level n, evaluated at the endpoints of the
/// child map's domain (the deviation of two affine maps is extremal there).
inline std::pair<Rational, Rational> gamma_affine(const FSystem& fs, std::size_t n) {
    if (n + 1 > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "gamma needs level n+1");
    const Level& C = fs.level(n + 1);
    std::unordered_set<std::array<ValueId, 8>, lift_detail::KeyHash> keys;
    C.for_each_edge([&](Index u2, Index v2) {
        Index u = C.parent(u2), v = C.parent(v2);
        keys.insert({fs.lo_id[n][u], fs.hi_id[n][u], fs.lo_id[n][v], fs.hi_id[n][v], fs.lo_id[n + 1][u2],
                     fs.hi_id[n + 1][u2], fs.lo_id[n + 1][v2], fs.hi_id[n + 1][v2]});
    });
    Rational g = 0, gp = 0;
    for (auto& k : keys) {
        auto P = [&](int i) -> const Rational& { return fs.pool[k[static_cast<std::size_t>(i)]]; };
        AffineMap fwd = affine_between(P(0), P(1), P(2), P(3));
        AffineMap fwd2 = affine_between(P(4), P(5), P(6), P(7));
        AffineMap bwd = affine_between(P(2), P(3), P(0), P(1));
        AffineMap bwd2 = affine_between(P(6), P(7), P(4), P(5));
        for (int i : {4, 5}) g = rmax(g, rabs(fwd(P(i)) - fwd2(P(i))));
        for (int i : {6, 7}) gp = rmax(gp, rabs(bwd(P(i)) - bwd2(P(i))));
    }
    return {g, gp};
}

inline GammaReport gamma_report(const FSystem& fs, LiftMode mode) {
    GammaReport r;
    r.mode = mode;
    Rational s = 0, sp = 0;
    for (std::size_t n = 0; n < fs.depth(); ++n) {
        GammaLevel gl;
        gl.n = n;
        if (mode == LiftMode::Ratio) {
            gl.gamma = gamma_ratio(fs, n);
            gl.gamma_plus = gl.gamma;
        } else {
            auto [g, gp] = gamma_affine(fs, n);
            gl.gamma = g;
            gl.gamma_plus = gp;
        }
        s += gl.gamma;
        sp += gl.gamma_plus;
        r.levels.push_back(gl);
        r.partial_sum.push_back(s);
        r.partial_sum_plus.push_back(sp);
    }
    return r;
}

struct GammaVerdict {
    LiftMode mode = LiftMode::Ratio;
    bool holds = false;
    /// Ratio mode: 1 - sum Gamma.
    Rational margin;
    Rational partial_sum, partial_sum_plus;
    /// Least C with Gamma_n <= C * 2^{-(n+1)} (and likewise Gamma+) on all levels.
    Rational decay_constant;
};

/// Ratio mode holds iff the partial sum stays below 1. Affine mode holds when
/// the observed decay constant is at most `claimed_constant`.
inline GammaVerdict condition_gamma(const GammaReport& r, const Rational& claimed_constant = 2) {
    GammaVerdict v;
    v.mode = r.mode;
    v.partial_sum = r.total();
    v.partial_sum_plus = r.total_plus();
    v.margin = Rational(1) - v.partial_sum;
    v.decay_constant = 0;
    for (auto& l : r.levels) {
        Rational scale = pow2neg(-(static_cast<int>(l.n) + 1));
        v.decay_constant = rmax(v.decay_constant, rmax(l.gamma, l.gamma_plus) * scale);
    }
    v.holds = r.mode == LiftMode::Ratio ? v.partial_sum < 1 : v.decay_constant <= claimed_constant;
    return v;
}

struct SEstimate {
    std::size_t level = 0;
    /// Ratio mode value, or the affine map in affine mode.
    Rational value;
    AffineMap map;
    /// Extrapolated tail sum of Gamma beyond `level` from the decay constant.
    Rational tail_bound;
    /// Ratio mode: s~_0(x) -/+ (observed sum + tail).
    Rational lower, upper;
};

/// Applies the induced fence map (and its inverse) at finite depth.
class Lifter {
public:
    Lifter(const FSystem& fs, LiftMode mode) : fs_(fs), mode_(mode) {
        if (mode == LiftMode::Ratio && !fs.lower_identically_zero())
            throw Error(ErrorKind::RatioModeRequiresZeroLower, "ratio scaling needs lower endpoints identically 0");
    }

    LiftMode mode() const { return mode_; }

    /// Output depth of one forward (or backward) step from depth d.
    std::size_t out_depth(std::size_t d, bool forward = true) const {
        auto m = image_depth(fs_.tower, d, forward);
        if (!m)
            throw Error(ErrorKind::InsufficientDepth, "no determinism witness within depth " + std::to_string(d));
        return *m;
    }

    FencePoint apply(const FencePoint& p) const { return step(p, true); }
    FencePoint inverse(const FencePoint& p) const { return step(p, false); }

    /// s~ at the output level of x: ratio value or affine map.
    SEstimate s_estimate(const Thread& x, const GammaReport* report = nullptr) const {
        std::size_t m = out_depth(x.depth());
        Thread y = base_image(fs_.tower, x, m);
        SEstimate e;
        e.level = m;
        Index u = x.at[m], v = y.at[m];
        if (mode_ == LiftMode::Ratio) {
            e.value = fs_.hi(m, v) / fs_.hi(m, u);
            e.map = {e.value, 0, 0};
        } else {
            e.map = affine_between(fs_.lo(m, u), fs_.hi(m, u), fs_.lo(m, v), fs_.hi(m, v));
            e.value = e.map.slope;
        }
        if (report) {
            GammaVerdict gv = condition_gamma(*report);
            e.tail_bound = gv.decay_constant * pow2neg(static_cast<int>(m) + 1) * 2;
            Rational s0 = 1;
            if (mode_ == LiftMode::Ratio) s0 = fs_.hi(0, y.at[0]) / fs_.hi(0, x.at[0]);
            Rational spread = report->total() + e.tail_bound;
            e.lower = s0 - spread;
            e.upper = s0 + spread;
        }
        return e;
    }

private:
    FencePoint step(const FencePoint& p, bool forward) const {
        const std::size_t d = p.thread.depth();
        if (!in_fiber(fs_, p)) throw Error(ErrorKind::ImageOutsideFiber, "input height outside its fiber");
        std::size_t m = out_depth(d, forward);
        Thread y = forward ? base_image(fs_.tower, p.thread, m) : base_preimage(fs_.tower, p.thread, m);
        Index u = p.thread.at[m], v = y.at[m];
        Rational t;
        if (mode_ == LiftMode::Ratio) {
            if (fs_.hi(m, u) == 0) throw Error(ErrorKind::ZeroUpper, "upper endpoint 0 on the source vertex");
            t = p.height * fs_.hi(m, v) / fs_.hi(m, u);
        } else {
            t = affine_between(fs_.lo(m, u), fs_.hi(m, u), fs_.lo(m, v), fs_.hi(m, v))(p.height);
        }
        FencePoint q{std::move(y), std::move(t)};
        if (!in_fiber(fs_, q)) throw Error(ErrorKind::ImageOutsideFiber, "image height left the target fiber");
        return q;
    }

    const FSystem& fs_;
    LiftMode mode_;
};

inline FencePoint lift_apply(const FSystem& fs, const FencePoint& p, LiftMode mode) { return Lifter(fs, mode).apply(p); }
inline FencePoint lift_inverse(const FSystem& fs, const FencePoint& p, LiftMode mode) {
    return Lifter(fs, mode).inverse(p);
}
inline SEstimate s_estimate(const FSystem& fs, const Thread& x, LiftMode mode, const GammaReport* report = nullptr) {
    return Lifter(fs, mode).s_estimate(x, report);
}

}  // namespace ff
