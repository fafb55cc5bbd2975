#pragma once

// Structure-only fences over a static base (every vertex carries a self-loop):
// the Cantor fence, the Lelek and Fraisse rung constructions and the
// two-sided construction with half-gap anchored children.

#include "fence_forge/constructors/common.hpp"

namespace ff {

inline FSystem build_cantor_fence(std::size_t depth) {
    FSystem fs;
    fs.kind = "cantor";
    fs.params["depth"] = std::to_string(depth);
    fs.lift_mode = "ratio";
    ValueId zero = fs.pool.intern(0), one = fs.pool.intern(1);
    std::vector<std::string> words{""};
    {
        LevelDraft d;
        d.add("0:-", kNone, zero, one);
        d.self_loops();
        commit(fs, std::move(d));
    }
    for (std::size_t n = 1; n <= depth; ++n) {
        LevelDraft d;
        std::vector<std::string> next;
        std::vector<Index> dagger;
        for (Index p = 0; p < words.size(); ++p)
            for (char b : {'0', '1'}) {
                Index v = d.add(std::to_string(n) + ":" + words[p] + b, p, zero, one);
                if (b == '0') dagger.push_back(v);
                next.push_back(words[p] + b);
            }
        d.self_loops();
        commit(fs, std::move(d), std::move(dagger));
        words = std::move(next);
    }
    return fs;
}

inline FSystem build_lelek(std::size_t depth) {
    FSystem fs;
    fs.kind = "lelek";
    fs.params["depth"] = std::to_string(depth);
    fs.lift_mode = "ratio";
    push_root(fs);
    ValueId zero = fs.pool.intern(0);
    for (std::size_t n = 0; n < depth; ++n) {
        const std::size_t rungs = std::size_t{1} << n;
        LevelDraft d;
        std::vector<Index> dagger(fs.level(n).size());
        for (Index g = 0; g < fs.level(n).size(); ++g) {
            const Rational& L = fs.lo(n, g);
            Rational gap = fs.hi(n, g) - L;
            for (std::size_t k = 1; k <= rungs; ++k) {
                Rational up = L + Rational(static_cast<long long>(k)) / Rational(static_cast<long long>(rungs)) * gap;
                Index v = d.add(vid(n + 1, d.size()), g, zero, fs.pool.intern(up));
                if (k == rungs) dagger[g] = v;
            }
        }
        d.self_loops();
        commit(fs, std::move(d), std::move(dagger));
    }
    return fs;
}

/// Each refinement composes the upper-rung step with the dual lower-rung step:
/// child [hi - l'(hi - L), hi] with hi = L + l*(U - L), for l, l' in {k/2^n}.
inline FSystem build_fraisse(std::size_t depth) {
    FSystem fs;
    fs.kind = "fraisse";
    fs.params["depth"] = std::to_string(depth);
    fs.lift_mode = "affine";
    push_root(fs);
    for (std::size_t n = 0; n < depth; ++n) {
        const long long rungs = 1LL << n;
        LevelDraft d;
        std::vector<Index> dagger(fs.level(n).size());
        for (Index g = 0; g < fs.level(n).size(); ++g) {
            const Rational& L = fs.lo(n, g);
            Rational gap = fs.hi(n, g) - L;
            for (long long i = 1; i <= rungs; ++i) {
                Rational up = L + Rational(i) / Rational(rungs) * gap;
                ValueId hi = fs.pool.intern(up);
                for (long long j = 1; j <= rungs; ++j) {
                    Rational low = up - Rational(j) / Rational(rungs) * (up - L);
                    Index v = d.add(vid(n + 1, d.size()), g, fs.pool.intern(low), hi);
                    if (i == rungs && j == rungs) dagger[g] = v;
                }
            }
        }
        d.self_loops();
        commit(fs, std::move(d), std::move(dagger));
    }
    return fs;
}

/// Children per vertex: the full interval, the upper-anchored half and the
/// lower-anchored half.
inline FSystem build_twosided_nonfraisse(std::size_t depth) {
    FSystem fs;
    fs.kind = "twosided";
    fs.params["depth"] = std::to_string(depth);
    fs.lift_mode = "affine";
    push_root(fs);
    for (std::size_t n = 0; n < depth; ++n) {
        LevelDraft d;
        std::vector<Index> dagger(fs.level(n).size());
        for (Index g = 0; g < fs.level(n).size(); ++g) {
            ValueId L = fs.lo_id[n][g], U = fs.hi_id[n][g];
            Rational mid = (fs.pool[L] + fs.pool[U]) / 2;
            ValueId M = fs.pool.intern(mid);
            dagger[g] = d.add(vid(n + 1, d.size()), g, L, U);
            d.add(vid(n + 1, d.size()), g, M, U);
            d.add(vid(n + 1, d.size()), g, L, M);
        }
        d.self_loops();
        commit(fs, std::move(d), std::move(dagger));
    }
    return fs;
}

}  // namespace ff
