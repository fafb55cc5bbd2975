#pragma once

// Full k-shift towers. Level n holds the central words x[-n..n] (length
// 2n+1), indexed in base k with x[-n] most significant. The shift acts by
// h(x)_i = x_{i+1}, so w -> w' is an edge iff w' drops w's first letter and
// appends one; the bond keeps the central 2n-1 letters. Both determinism
// conditions for level m are witnessed at level m+1.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include "fence_forge/constructors/common.hpp"

namespace ff {

inline char shift_letter(std::size_t a) {
    return static_cast<char>(a < 10 ? '0' + a : 'a' + (a - 10));
}

inline std::size_t shift_letter_value(char c) {
    if (c >= '0' && c <= '9') return static_cast<std::size_t>(c - '0');
    if (c >= 'a' && c <= 'z') return static_cast<std::size_t>(c - 'a') + 10;
    throw Error(ErrorKind::ParseError, std::string("bad shift letter '") + c + "'");
}

inline std::size_t ipow(std::size_t b, std::size_t e) {
    std::size_t r = 1;
    while (e--) r *= b;
    return r;
}

inline std::string shift_word(std::size_t k, std::size_t len, std::size_t index) {
    std::string w(len, '0');
    for (std::size_t i = len; i-- > 0;) {
        w[i] = shift_letter(index % k);
        index /= k;
    }
    return w;
}

inline std::size_t shift_index(std::size_t k, const std::string& w) {
    std::size_t idx = 0;
    for (char c : w) {
        std::size_t a = shift_letter_value(c);
        if (a >= k) throw Error(ErrorKind::ParseError, "letter outside the alphabet");
        idx = idx * k + a;
    }
    return idx;
}

inline void check_alphabet(std::size_t k) {
    if (k < 2 || k > 36) throw Error(ErrorKind::MalformedTower, "alphabet size must lie in [2,36]");
}

/// Level n of the k-shift tower (no dagger designation).
inline Level shift_level(std::size_t k, std::size_t n, std::vector<Index> dagger = {}) {
    const std::size_t len = 2 * n + 1, size = ipow(k, len), tail = size / k;
    std::vector<std::string> ids(size);
    EdgeList e;
    e.reserve(size * k);
    std::vector<Index> bond;
    if (n > 0) bond.resize(size);
    const std::size_t inner = n == 0 ? 1 : ipow(k, len - 2);
    for (std::size_t w = 0; w < size; ++w) {
        ids[w] = std::to_string(n) + ":" + shift_word(k, len, w);
        for (std::size_t a = 0; a < k; ++a) e.emplace_back(static_cast<Index>(w), static_cast<Index>((w % tail) * k + a));
        if (n > 0) bond[w] = static_cast<Index>((w / k) % inner);
    }
    return Level(n, std::move(ids), std::move(e), std::move(bond), std::move(dagger), n == 0 ? 0 : inner);
}

inline Tower build_shift_system(std::size_t k, std::size_t depth, std::size_t vertex_budget = kDefaultVertexBudget) {
    check_alphabet(k);
    Tower t;
    for (std::size_t n = 0; n <= depth; ++n) {
        check_budget(ipow(k, 2 * n + 1), vertex_budget, "shift level " + std::to_string(n));
        t.push(shift_level(k, n));
    }
    return t;
}

/// Finitely supported sequence: letters at positions, zero elsewhere.
struct SparseSequence {
    std::vector<std::pair<long long, std::size_t>> letters;  // nonzero only

    long long lo() const { return letters.empty() ? 0 : letters.front().first; }
    long long hi() const { return letters.empty() ? 0 : letters.back().first; }
    std::size_t at(long long i) const {
        for (auto& [p, a] : letters)
            if (p == i) return a;
        return 0;
    }
};

inline SparseSequence block_sequence(std::size_t k, const std::vector<std::pair<long long, std::string>>& blocks) {
    SparseSequence s;
    for (auto& [start, word] : blocks)
        for (std::size_t i = 0; i < word.size(); ++i) {
            std::size_t a = shift_letter_value(word[i]);
            if (a >= k) throw Error(ErrorKind::ParseError, "letter outside the alphabet");
            if (a != 0) s.letters.emplace_back(start + static_cast<long long>(i), a);
        }
    std::sort(s.letters.begin(), s.letters.end());
    return s;
}

/// Marks, at level d, the word of x restricted to [l-d, l+d] for every l.
inline void mark_orbit_windows(std::size_t k, std::size_t d, const SparseSequence& x, std::vector<std::uint8_t>& mask) {
    const long long D = static_cast<long long>(d);
    mask[0] = 1;  // windows far from the support are all-zero
    for (long long l = x.lo() - D; l <= x.hi() + D; ++l) {
        std::size_t idx = 0;
        for (long long i = l - D; i <= l + D; ++i) idx = idx * k + x.at(i);
        mask[idx] = 1;
    }
}

/// The word family of the mixing witness for the pair (U, V) of level-n words:
/// w_j carries U on [-n, n] and V on [n+j, 3n+j].
inline SparseSequence mixing_word(std::size_t k, const std::string& U, const std::string& V, std::size_t j) {
    const long long n = static_cast<long long>(U.size() / 2);
    return block_sequence(k, {{-n, U}, {n + static_cast<long long>(j), V}});
}

/// Per level d in [n, depth]: the cylinders meeting the invariant set
/// {h^l(w_j), h^l(u_inf), h^l(v_inf), 0}.
/// Levels below n are left empty (all zero).
inline std::vector<std::vector<std::uint8_t>> build_mixing_kmask(std::size_t k, const std::string& U, const std::string& V,
                                                                 std::size_t depth) {
    check_alphabet(k);
    if (U.size() != V.size() || U.size() % 2 == 0)
        throw Error(ErrorKind::MalformedTower, "U and V must be central words of equal odd length");
    const std::size_t n = U.size() / 2;
    if (n > depth) throw Error(ErrorKind::CylinderTooDeep, "cylinders at level " + std::to_string(n) + " exceed depth");
    std::vector<std::vector<std::uint8_t>> mask;
    for (std::size_t d = 0; d <= depth; ++d) {
        std::vector<std::uint8_t> m(ipow(k, 2 * d + 1), 0);
        if (d >= n) {
            const long long N = static_cast<long long>(n);
            mark_orbit_windows(k, d, block_sequence(k, {{-N, U}}), m);
            mark_orbit_windows(k, d, block_sequence(k, {{-N, V}}), m);
            // Once the gap exceeds the window, w_j's windows repeat those of u_inf and v_inf.
            for (std::size_t j = 1; j <= 2 * d + 2 * n + 2; ++j) mark_orbit_windows(k, d, mixing_word(k, U, V, j), m);
        }
        mask.push_back(std::move(m));
    }
    return mask;
}

/// True when the nonzero letters of `w` fit in two blocks of length L; these
/// are exactly the cylinders meeting the union of all masks built from
/// level-((L-1)/2) pairs.
inline bool within_two_blocks(std::size_t k, std::size_t len, std::size_t index, std::size_t L) {
    std::vector<std::size_t> support;
    std::string w = shift_word(k, len, index);
    for (std::size_t i = 0; i < len; ++i)
        if (w[i] != '0') support.push_back(i);
    if (support.empty()) return true;
    std::size_t first_end = support.front() + L - 1;
    auto it = std::upper_bound(support.begin(), support.end(), first_end);
    if (it == support.end()) return true;
    return support.back() - *it <= L - 1;
}

struct RungChoice {
    Rational N, r;
    std::size_t q = 0, t = 0;
};

/// r = 1 - 2^{-q} with the least q such that (1-r)N and (1/r - 1)N are below
/// 2^{-(n+1)}, then the least t with r^{t-1} < 2^{-(n+1)}.
inline RungChoice choose_rungs(const Rational& N, std::size_t n) {
    RungChoice c;
    c.N = N;
    const Rational bound = pow2neg(static_cast<int>(n) + 1);
    for (c.q = 1;; ++c.q) {
        c.r = Rational(1) - pow2neg(static_cast<int>(c.q));
        if ((Rational(1) - c.r) * N < bound && (Rational(1) / c.r - 1) * N < bound) break;
    }
    Rational p = 1;
    c.t = 1;
    while (!(p < bound)) {
        p *= c.r;
        ++c.t;
    }
    return c;
}

/// Largest ratio phiU(g1)/phiU(g2) over edges in either direction at level n.
inline Rational max_edge_ratio(const FSystem& fs, std::size_t n) {
    Rational N = 1;
    std::unordered_set<std::uint64_t> seen;
    fs.level(n).for_each_edge([&](Index u, Index v) {
        ValueId a = fs.hi_id[n][u], b = fs.hi_id[n][v];
        if (!seen.insert((std::uint64_t(a) << 32) | b).second) return;
        N = rmax(N, rmax(fs.pool[a] / fs.pool[b], fs.pool[b] / fs.pool[a]));
    });
    return N;
}

/// Lelek-type lift of the k-shift: cylinders meeting the stage mask keep their
/// parent height; the others drop by r per step of undirected distance from
/// the mask, capped at r^{t-1}. marks.mask[d] (d >= 1) holds the cylinders
/// meeting the mask built from all level-(d-1) pairs; marks.window[n] = 2n+2.
inline FSystem build_mixing_lift(std::size_t k, std::size_t depth, std::size_t vertex_budget = kDefaultVertexBudget) {
    check_alphabet(k);
    FSystem fs;
    fs.kind = "mixing";
    fs.lift_mode = "ratio";
    fs.params["alphabet"] = std::to_string(k);
    fs.params["depth"] = std::to_string(depth);
    fs.marks.notes.push_back(
        "unmasked cylinders receive parent*r^min(t-1, undirected distance to the masked cylinders)");
    {
        Level L = shift_level(k, 0);
        std::vector<Rational> lo(L.size(), Rational(0)), hi(L.size(), Rational(1));
        fs.push_level(std::move(L), lo, hi);
        std::vector<std::uint8_t> m0(k, 0);
        m0[0] = 1;
        fs.marks.mask.push_back(std::move(m0));
        fs.marks.window.push_back(2);
    }
    std::string ts;
    for (std::size_t n = 0; n < depth; ++n) {
        const std::size_t len = 2 * n + 3, size = ipow(k, len);
        check_budget(size, vertex_budget, "mixing level " + std::to_string(n + 1));
        RungChoice rc = choose_rungs(max_edge_ratio(fs, n), n);
        ts += (ts.empty() ? "" : ",") + std::to_string(rc.t);
        std::vector<Index> dagger(fs.level(n).size());
        for (Index g = 0; g < dagger.size(); ++g) dagger[g] = static_cast<Index>(g * k);  // 0 g 0
        Level L = shift_level(k, n + 1, std::move(dagger));
        std::vector<std::uint8_t> mask(size);
        for (std::size_t w = 0; w < size; ++w) mask[w] = within_two_blocks(k, len, w, 2 * n + 1) ? 1 : 0;
        // Undirected BFS distance from the mask.
        std::vector<std::size_t> dist(size, SIZE_MAX);
        std::deque<Index> q;
        for (Index w = 0; w < size; ++w)
            if (mask[w]) dist[w] = 0, q.push_back(w);
        while (!q.empty()) {
            Index u = q.front();
            q.pop_front();
            auto relax = [&](Index v) {
                if (dist[v] == SIZE_MAX) dist[v] = dist[u] + 1, q.push_back(v);
            };
            for (Index v : L.out(u)) relax(v);
            for (Index v : L.in(u)) relax(v);
        }
        std::vector<Rational> rpow_cache(rc.t);
        rpow_cache[0] = 1;
        for (std::size_t e = 1; e < rc.t; ++e) rpow_cache[e] = rpow_cache[e - 1] * rc.r;
        std::vector<ValueId> lo(size, fs.pool.intern(0)), hi(size);
        for (Index w = 0; w < size; ++w) {
            const Rational& up = fs.hi(n, L.parent(w));
            std::size_t e = std::min(rc.t - 1, dist[w]);
            hi[w] = fs.pool.intern(up * rpow_cache[e]);
        }
        fs.push_level_ids(std::move(L), std::move(lo), std::move(hi));
        fs.marks.mask.push_back(std::move(mask));
        fs.marks.window.push_back(2 * (n + 1) + 2);
    }
    fs.params["t"] = ts;
    return fs;
}

}  // namespace ff
