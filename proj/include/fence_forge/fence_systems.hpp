#pragma once

// Validation, classification and slab queries for F-systems.

#include <optional>
#include <string>
#include <vector>

#include "fence_forge/eta.hpp"
#include "fence_forge/fsystem.hpp"

namespace ff {

struct FValidationReport {
    std::size_t range_violations = 0, order_violations = 0, nesting_violations = 0, dagger_missing = 0,
                dagger_designation_mismatch = 0;
    /// First offending vertices, capped, as "kind level:id".
    std::vector<std::string> samples;

    bool ok() const {
        return range_violations + order_violations + nesting_violations + dagger_missing +
                   dagger_designation_mismatch ==
               0;
    }
};

inline FValidationReport validate_f_system(const FSystem& fs) {
    FValidationReport r;
    auto note = [&](const char* what, std::size_t n, Index v) {
        if (r.samples.size() < 64) r.samples.push_back(std::string(what) + " " + std::to_string(n) + ":" + fs.level(n).id(v));
    };
    for (std::size_t n = 0; n <= fs.depth(); ++n) {
        const Level& L = fs.level(n);
        for (Index v = 0; v < L.size(); ++v) {
            const Rational &lo = fs.lo(n, v), &hi = fs.hi(n, v);
            if (lo < 0 || hi > 1) ++r.range_violations, note("range", n, v);
            if (lo > hi) ++r.order_violations, note("order", n, v);
            if (n > 0) {
                Index p = L.parent(v);
                if (hi > fs.hi(n - 1, p) || lo < fs.lo(n - 1, p)) ++r.nesting_violations, note("nesting", n, v);
            }
        }
        if (n + 1 > fs.depth()) continue;
        const Level& C = fs.level(n + 1);
        for (Index v = 0; v < L.size(); ++v) {
            auto same = [&](Index c) { return fs.lo_id[n + 1][c] == fs.lo_id[n][v] && fs.hi_id[n + 1][c] == fs.hi_id[n][v]; };
            Index d = C.dagger_child(v);
            bool any = false;
            for (Index c : C.children(v))
                if (same(c)) {
                    any = true;
                    break;
                }
            if (!any) ++r.dagger_missing, note("dagger", n, v);
            else if (d == kNone || !same(d)) ++r.dagger_designation_mismatch, note("dagger-designation", n, v);
        }
    }
    return r;
}

inline Rational hausdorff_interval(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
    if (a > b || c > d) throw Error(ErrorKind::OrderViolation, "interval endpoints out of order");
    return rmax(rabs(a - c), rabs(b - d));
}

enum class FenceClass { CantorFence, Scissorhand, TwoSidedScissorhand, LelekFence, FraisseFence, Unclassified };

inline const char* class_name(FenceClass c) {
    switch (c) {
        case FenceClass::CantorFence: return "CantorFence";
        case FenceClass::Scissorhand: return "Scissorhand";
        case FenceClass::TwoSidedScissorhand: return "TwoSidedScissorhand";
        case FenceClass::LelekFence: return "LelekFence";
        case FenceClass::FraisseFence: return "FraisseFence";
        case FenceClass::Unclassified: return "Unclassified";
    }
    return "?";
}

struct ClassifyOptions {
    /// Rate at level n is 2^{-(n - rate_shift)}; the default 1 gives 2^{-(n-1)}.
    int rate_shift = 1;
    /// Skip the full eta (the costly radius search) when only endpoint classes are needed.
    bool with_eta = true;
};

struct FenceCertificate {
    FenceClass cls = FenceClass::Unclassified;
    std::vector<EtaEntry> etas;
    std::vector<Rational> rate;
    bool dagger_ok = false, lower_zero = false, constant_unit = false;
    bool plus_ok = false, minus_ok = false, eta_ok = false;
    /// First level where each rate witness fails, if any.
    std::optional<std::size_t> plus_fail, minus_fail, eta_fail;
};

inline Rational classify_rate(std::size_t n, int shift) { return pow2neg(static_cast<int>(n) - shift); }

inline FenceCertificate classify(const FSystem& fs, const ClassifyOptions& opt = {}) {
    auto v = validate_f_system(fs);
    if (v.dagger_missing > 0) throw Error(ErrorKind::DaggerMissing, "dagger condition fails at " + v.samples.front());
    FenceCertificate c;
    c.dagger_ok = true;
    c.lower_zero = fs.lower_identically_zero();
    c.constant_unit = c.lower_zero;
    for (auto& lv : fs.hi_id)
        for (ValueId i : lv)
            if (fs.pool[i] != 1) c.constant_unit = false;
    c.plus_ok = c.minus_ok = c.eta_ok = true;
    EtaCache cache;
    for (std::size_t n = 0; n < fs.depth(); ++n) {
        bool need_eta = opt.with_eta && !c.lower_zero;
        EtaEntry e = eta_report(fs, n, need_eta, &cache);
        Rational rate = classify_rate(n, opt.rate_shift);
        if (e.eta_plus > rate && !c.plus_fail) c.plus_fail = n;
        if (e.eta_minus > rate && !c.minus_fail) c.minus_fail = n;
        if ((!need_eta || e.eta > rate) && !c.eta_fail) c.eta_fail = n;
        c.etas.push_back(std::move(e));
        c.rate.push_back(rate);
    }
    c.plus_ok = !c.plus_fail;
    c.minus_ok = !c.minus_fail;
    c.eta_ok = !c.eta_fail;
    if (c.constant_unit)
        c.cls = FenceClass::CantorFence;
    else if (c.lower_zero && c.plus_ok)
        c.cls = FenceClass::LelekFence;
    else if (c.eta_ok)
        c.cls = FenceClass::FraisseFence;
    else if (c.plus_ok && c.minus_ok)
        c.cls = FenceClass::TwoSidedScissorhand;
    else if (c.plus_ok)
        c.cls = FenceClass::Scissorhand;
    return c;
}

struct SlabBox {
    Index vertex;
    Rational lo, hi;
};

inline std::vector<SlabBox> fence_slab(const FSystem& fs, std::size_t n) {
    if (n > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "slab level beyond depth");
    std::vector<SlabBox> out;
    out.reserve(fs.level(n).size());
    for (Index v = 0; v < fs.level(n).size(); ++v) out.push_back({v, fs.lo(n, v), fs.hi(n, v)});
    return out;
}

struct DensityReport {
    /// Per level-n vertex: least level m >= n holding a descendant with gap < r.
    std::vector<std::optional<std::size_t>> witness_level;
    bool all_witnessed = false;
};

inline DensityReport degenerate_density(const FSystem& fs, std::size_t n, const Rational& r) {
    if (n > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "density level beyond depth");
    DensityReport rep;
    // best[v] at level m: least level >= m where v's subtree has a small-gap vertex.
    std::vector<std::optional<std::size_t>> best(fs.level(fs.depth()).size());
    for (std::size_t m = fs.depth() + 1; m-- > n;) {
        const Level& L = fs.level(m);
        std::vector<std::optional<std::size_t>> cur(L.size());
        for (Index v = 0; v < L.size(); ++v)
            if (fs.gap(m, v) < r) cur[v] = m;
        if (m < fs.depth()) {
            const Level& C = fs.level(m + 1);
            for (Index v = 0; v < L.size(); ++v) {
                if (cur[v]) continue;
                for (Index c : C.children(v))
                    if (best[c] && (!cur[v] || *best[c] < *cur[v])) cur[v] = best[c];
            }
        }
        best = std::move(cur);
    }
    rep.witness_level = std::move(best);
    rep.all_witnessed = true;
    for (auto& w : rep.witness_level)
        if (!w) rep.all_witnessed = false;
    return rep;
}

}  // namespace ff
