#pragma once

// F-systems: a tower plus exact endpoint functions on every level.
// Endpoint values are interned in a per-system pool so that towers with
// millions of vertices and a few hundred distinct heights stay small.

#include <gmp.h>

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fence_forge/graph_systems.hpp"
#include "fence_forge/rational.hpp"

namespace ff {

struct RationalHash {
    std::size_t operator()(const Rational& q) const noexcept {
        const mpq_t& m = q.backend().data();
        auto mix = [](std::size_t h, mpz_srcptr z) {
            h ^= static_cast<std::size_t>(z->_mp_size) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            std::size_t n = mpz_size(z);
            for (std::size_t i = 0; i < n; ++i)
                h ^= static_cast<std::size_t>(mpz_getlimbn(z, static_cast<mp_size_t>(i))) + 0x9e3779b97f4a7c15ULL +
                     (h << 6) + (h >> 2);
            return h;
        };
        return mix(mix(0, mpq_numref(m)), mpq_denref(m));
    }
};

using ValueId = std::uint32_t;

class ValuePool {
public:
    ValueId intern(const Rational& q) {
        auto [it, fresh] = index_.try_emplace(q, static_cast<ValueId>(values_.size()));
        if (fresh) values_.push_back(q);
        return it->second;
    }
    const Rational& operator[](ValueId i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

private:
    std::deque<Rational> values_;  // deque: references survive interning
    std::unordered_map<Rational, ValueId, RationalHash> index_;
};

/// Constructor annotations consumed by the verify module.
struct Marks {
    /// Designated base point (transitive lift).
    std::optional<Thread> designated;
    /// Per level: marked orbit vertices in time order, starting at time orbit_start[n].
    std::vector<std::vector<Index>> orbit;
    std::vector<std::int64_t> orbit_start;
    /// Per level n >= 1: the periodic orbit introduced at that level (chaotic lift),
    /// listed in orbit order. Empty vector when the level introduces none.
    std::vector<std::vector<Index>> periodic;
    /// Per level: 1 for masked vertices. Empty when the system carries no mask.
    std::vector<std::vector<std::uint8_t>> mask;
    /// Per level: mixing window start.
    std::vector<std::size_t> window;
    std::vector<std::string> notes;

    bool operator==(const Marks&) const = default;
};

class FSystem {
public:
    Tower tower;
    ValuePool pool;
    std::vector<std::vector<ValueId>> lo_id, hi_id;
    std::string kind = "custom";
    std::map<std::string, std::string> params;
    /// "ratio" or "affine": the scaling family the constructor certifies.
    std::string lift_mode = "affine";
    Marks marks;

    std::size_t depth() const { return tower.depth(); }
    const Level& level(std::size_t n) const { return tower.level(n); }
    const Rational& lo(std::size_t n, Index v) const { return pool[lo_id[n][v]]; }
    const Rational& hi(std::size_t n, Index v) const { return pool[hi_id[n][v]]; }
    Rational gap(std::size_t n, Index v) const { return hi(n, v) - lo(n, v); }

    void push_level(Level level, const std::vector<Rational>& lo, const std::vector<Rational>& hi) {
        std::vector<ValueId> l(lo.size()), h(hi.size());
        for (std::size_t i = 0; i < lo.size(); ++i) l[i] = pool.intern(lo[i]);
        for (std::size_t i = 0; i < hi.size(); ++i) h[i] = pool.intern(hi[i]);
        push_level_ids(std::move(level), std::move(l), std::move(h));
    }

    void push_level_ids(Level level, std::vector<ValueId> lo, std::vector<ValueId> hi) {
        if (lo.size() != level.size() || hi.size() != level.size())
            throw Error(ErrorKind::MalformedTower, "endpoint arrays do not match level size");
        tower.push(std::move(level));
        lo_id.push_back(std::move(lo));
        hi_id.push_back(std::move(hi));
    }

    /// Replaces one endpoint pair in place (fixture construction only).
    void set_phi(std::size_t n, Index v, const Rational& lo, const Rational& hi) {
        lo_id[n][v] = pool.intern(lo);
        hi_id[n][v] = pool.intern(hi);
    }

    bool lower_identically_zero() const {
        for (auto& lv : lo_id)
            for (ValueId i : lv)
                if (pool[i] != 0) return false;
        return true;
    }
};

/// A thread together with an exact height in the fiber interval of its last vertex.
struct FencePoint {
    Thread thread;
    Rational height;
    bool operator==(const FencePoint&) const = default;
};

inline bool in_fiber(const FSystem& fs, const FencePoint& p) {
    std::size_t d = p.thread.depth();
    return fs.lo(d, p.thread.last()) <= p.height && p.height <= fs.hi(d, p.thread.last());
}

}  // namespace ff
