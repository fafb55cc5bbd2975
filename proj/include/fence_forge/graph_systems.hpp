#pragma once

// Leveled digraph towers (C-structures), threads through them, the thread
// metric, and the base map induced on threads by forward determinism.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fence_forge/errors.hpp"
#include "fence_forge/rational.hpp"

namespace ff {

using Index = std::uint32_t;
inline constexpr Index kNone = std::numeric_limits<Index>::max();

using EdgeList = std::vector<std::pair<Index, Index>>;

class Level {
public:
    Level() = default;

    /// `bond` is empty at level 0; otherwise bond[v] is the parent of v and
    /// `parent_count` is the size of the previous level. `dagger` has one entry
    /// per parent (kNone when the constructor designated nothing).
    Level(std::size_t index, std::vector<std::string> ids, EdgeList edges, std::vector<Index> bond = {},
          std::vector<Index> dagger = {}, std::size_t parent_count = 0)
        : index_(index), ids_(std::move(ids)), bond_(std::move(bond)), dagger_(std::move(dagger)),
          lookup_(std::make_shared<Lookup>()) {
        const auto n = static_cast<Index>(ids_.size());
        if (ids_.size() >= kNone) throw Error(ErrorKind::MalformedTower, "level too large");
        for (auto& [u, v] : edges)
            if (u >= n || v >= n)
                throw Error(ErrorKind::MalformedTower, "edge endpoint out of range at level " + std::to_string(index));
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        build_csr(edges, n, false, out_off_, out_);
        build_csr(edges, n, true, in_off_, in_);
        if (index_ == 0) {
            if (!bond_.empty()) throw Error(ErrorKind::MalformedTower, "level 0 cannot have a bond");
            return;
        }
        if (bond_.size() != ids_.size())
            throw Error(ErrorKind::MalformedTower, "bond must cover every vertex of level " + std::to_string(index));
        for (Index p : bond_)
            if (p >= parent_count)
                throw Error(ErrorKind::MalformedTower, "bond references unknown parent at level " + std::to_string(index));
        if (dagger_.empty()) dagger_.assign(parent_count, kNone);
        if (dagger_.size() != parent_count)
            throw Error(ErrorKind::MalformedTower, "dagger map size mismatch at level " + std::to_string(index));
        child_off_.assign(parent_count + 1, 0);
        for (Index p : bond_) ++child_off_[p + 1];
        for (std::size_t i = 0; i < parent_count; ++i) child_off_[i + 1] += child_off_[i];
        children_.resize(bond_.size());
        std::vector<Index> fill(child_off_.begin(), child_off_.end() - 1);
        for (Index v = 0; v < n; ++v) children_[fill[bond_[v]]++] = v;
        for (std::size_t p = 0; p < parent_count; ++p) {
            Index d = dagger_[p];
            if (d != kNone && (d >= n || bond_[d] != p))
                throw Error(ErrorKind::MalformedTower, "dagger child is not a child of its parent at level " +
                                                            std::to_string(index));
        }
    }

    std::size_t index() const { return index_; }
    std::size_t size() const { return ids_.size(); }
    const std::string& id(Index v) const { return ids_[v]; }
    const std::vector<std::string>& ids() const { return ids_; }

    std::optional<Index> find(std::string_view id) const {
        std::call_once(lookup_->once, [&] {
            lookup_->map.reserve(ids_.size());
            for (Index v = 0; v < ids_.size(); ++v) lookup_->map.emplace(ids_[v], v);
        });
        auto it = lookup_->map.find(std::string(id));
        if (it == lookup_->map.end()) return std::nullopt;
        return it->second;
    }

    std::span<const Index> out(Index v) const { return {out_.data() + out_off_[v], out_.data() + out_off_[v + 1]}; }
    std::span<const Index> in(Index v) const { return {in_.data() + in_off_[v], in_.data() + in_off_[v + 1]}; }
    std::size_t edge_count() const { return out_.size(); }

    template <class F>
    void for_each_edge(F&& f) const {
        for (Index u = 0; u < ids_.size(); ++u)
            for (Index v : out(u)) f(u, v);
    }

    bool has_bond() const { return index_ > 0; }
    Index parent(Index v) const { return index_ == 0 ? kNone : bond_[v]; }
    const std::vector<Index>& bond() const { return bond_; }
    std::size_t parent_count() const { return index_ == 0 ? 0 : child_off_.size() - 1; }
    /// Children (vertices of this level) of a vertex of the previous level.
    std::span<const Index> children(Index p) const {
        return {children_.data() + child_off_[p], children_.data() + child_off_[p + 1]};
    }
    Index dagger_child(Index p) const { return index_ == 0 ? kNone : dagger_[p]; }
    const std::vector<Index>& dagger() const { return dagger_; }

private:
    struct Lookup {
        std::once_flag once;
        std::unordered_map<std::string, Index> map;
    };

    static void build_csr(const EdgeList& edges, Index n, bool reverse, std::vector<Index>& off,
                          std::vector<Index>& tgt) {
        off.assign(static_cast<std::size_t>(n) + 1, 0);
        for (auto& [u, v] : edges) ++off[(reverse ? v : u) + 1];
        for (Index i = 0; i < n; ++i) off[i + 1] += off[i];
        tgt.resize(edges.size());
        std::vector<Index> fill(off.begin(), off.end() - 1);
        for (auto& [u, v] : edges) {
            Index s = reverse ? v : u, t = reverse ? u : v;
            tgt[fill[s]++] = t;
        }
        if (reverse)
            for (Index i = 0; i < n; ++i) std::sort(tgt.begin() + off[i], tgt.begin() + off[i + 1]);
    }

    std::size_t index_ = 0;
    std::vector<std::string> ids_;
    std::vector<Index> bond_, dagger_;
    std::vector<Index> out_off_, out_, in_off_, in_;
    std::vector<Index> child_off_, children_;
    std::shared_ptr<Lookup> lookup_;
};

class Tower {
public:
    Tower() : cache_(std::make_shared<Cache>()) {}

    void push(Level level) {
        if (level.index() != levels_.size())
            throw Error(ErrorKind::MalformedTower, "level index " + std::to_string(level.index()) + " out of order");
        if (!levels_.empty() && level.parent_count() != levels_.back().size())
            throw Error(ErrorKind::MalformedTower, "bond target size mismatch at level " + std::to_string(level.index()));
        levels_.push_back(std::move(level));
        cache_ = std::make_shared<Cache>();
    }

    std::size_t depth() const { return levels_.empty() ? 0 : levels_.size() - 1; }
    std::size_t level_count() const { return levels_.size(); }
    bool empty() const { return levels_.empty(); }
    const Level& level(std::size_t n) const { return levels_.at(n); }
    const std::vector<Level>& levels() const { return levels_; }

    /// Bond projection of vertex v of level n down to level m <= n.
    Index ancestor(std::size_t n, Index v, std::size_t m) const {
        while (n > m) v = levels_[n--].parent(v);
        return v;
    }

    /// Least n in [m, depth] such that every level-n vertex has out-neighbors
    /// projecting to a single level-m vertex.
    std::optional<std::size_t> forward_witness(std::size_t m) const { return witness(m, true); }
    std::optional<std::size_t> backward_witness(std::size_t m) const { return witness(m, false); }

private:
    struct Cache {
        std::mutex mu;
        std::unordered_map<std::size_t, std::optional<std::size_t>> fwd, bwd;
    };

    bool single_valued(std::size_t n, std::size_t m, bool forward) const {
        const Level& L = levels_[n];
        for (Index v = 0; v < L.size(); ++v) {
            auto nb = forward ? L.out(v) : L.in(v);
            if (nb.empty()) return false;
            Index first = ancestor(n, nb[0], m);
            for (std::size_t i = 1; i < nb.size(); ++i)
                if (ancestor(n, nb[i], m) != first) return false;
        }
        return true;
    }

    std::optional<std::size_t> witness(std::size_t m, bool forward) const {
        if (m >= levels_.size()) return std::nullopt;
        {
            std::lock_guard lk(cache_->mu);
            auto& c = forward ? cache_->fwd : cache_->bwd;
            if (auto it = c.find(m); it != c.end()) return it->second;
        }
        std::optional<std::size_t> found;
        for (std::size_t n = m; n < levels_.size(); ++n)
            if (single_valued(n, m, forward)) {
                found = n;
                break;
            }
        std::lock_guard lk(cache_->mu);
        (forward ? cache_->fwd : cache_->bwd)[m] = found;
        return found;
    }

    std::vector<Level> levels_;
    std::shared_ptr<Cache> cache_;
};

/// Vertex indices from level 0 to level depth(), compatible with the bonds.
struct Thread {
    std::vector<Index> at;

    std::size_t depth() const { return at.empty() ? 0 : at.size() - 1; }
    Index last() const { return at.back(); }
    bool operator==(const Thread&) const = default;
};

inline Thread thread_through(const Tower& t, std::size_t n, Index v) {
    Thread x;
    x.at.resize(n + 1);
    for (std::size_t k = n + 1; k-- > 0;) {
        x.at[k] = v;
        if (k > 0) v = t.level(k).parent(v);
    }
    return x;
}

inline Thread truncate(const Thread& x, std::size_t d) {
    if (d > x.depth()) throw Error(ErrorKind::InsufficientDepth, "cannot truncate to a deeper level");
    return Thread{std::vector<Index>(x.at.begin(), x.at.begin() + static_cast<std::ptrdiff_t>(d) + 1)};
}

inline bool is_thread(const Tower& t, const Thread& x) {
    if (x.at.empty() || x.depth() > t.depth()) return false;
    for (std::size_t k = 0; k <= x.depth(); ++k) {
        if (x.at[k] >= t.level(k).size()) return false;
        if (k > 0 && t.level(k).parent(x.at[k]) != x.at[k - 1]) return false;
    }
    return true;
}

struct CStructureReport {
    struct LevelReport {
        std::size_t index = 0;
        bool bond_surjective = true;
        std::vector<Index> unmapped_parents;
        std::vector<Index> no_out, no_in;
        std::vector<std::pair<Index, Index>> non_homomorphic_edges;
    };
    std::vector<LevelReport> levels;
    /// Per level and vertex: least deeper level holding two distinct
    /// descendants, or -1 when unwitnessed within the tower.
    std::vector<std::vector<int>> split_level;

    bool structural_ok() const {
        for (auto& l : levels)
            if (!l.bond_surjective || !l.no_out.empty() || !l.no_in.empty() || !l.non_homomorphic_edges.empty())
                return false;
        return true;
    }
    std::size_t unwitnessed_splits() const {
        std::size_t c = 0;
        for (auto& l : split_level) c += static_cast<std::size_t>(std::count(l.begin(), l.end(), -1));
        return c;
    }
};

inline CStructureReport validate_c_structure(const Tower& t) {
    if (t.empty()) throw Error(ErrorKind::MalformedTower, "tower has no levels");
    CStructureReport r;
    for (std::size_t n = 0; n <= t.depth(); ++n) {
        const Level& L = t.level(n);
        CStructureReport::LevelReport lr;
        lr.index = n;
        for (Index v = 0; v < L.size(); ++v) {
            if (L.out(v).empty()) lr.no_out.push_back(v);
            if (L.in(v).empty()) lr.no_in.push_back(v);
        }
        if (n > 0) {
            const Level& P = t.level(n - 1);
            for (Index p = 0; p < P.size(); ++p)
                if (L.children(p).empty()) lr.unmapped_parents.push_back(p);
            lr.bond_surjective = lr.unmapped_parents.empty();
            L.for_each_edge([&](Index u, Index v) {
                auto nb = P.out(L.parent(u));
                if (!std::binary_search(nb.begin(), nb.end(), L.parent(v))) lr.non_homomorphic_edges.emplace_back(u, v);
            });
        }
        r.levels.push_back(std::move(lr));
    }
    r.split_level.resize(t.depth() + 1);
    r.split_level[t.depth()].assign(t.level(t.depth()).size(), -1);
    for (std::size_t n = t.depth(); n-- > 0;) {
        const Level& C = t.level(n + 1);
        auto& sl = r.split_level[n];
        sl.assign(t.level(n).size(), -1);
        for (Index v = 0; v < sl.size(); ++v) {
            auto ch = C.children(v);
            if (ch.size() >= 2)
                sl[v] = static_cast<int>(n + 1);
            else if (ch.size() == 1)
                sl[v] = r.split_level[n + 1][ch[0]];
        }
    }
    return r;
}

struct DeterminismReport {
    std::vector<std::optional<std::size_t>> forward, backward;
};

inline DeterminismReport validate_graph_c_system(const Tower& t) {
    if (t.empty()) throw Error(ErrorKind::MalformedTower, "tower has no levels");
    DeterminismReport r;
    for (std::size_t m = 0; m <= t.depth(); ++m) {
        r.forward.push_back(t.forward_witness(m));
        r.backward.push_back(t.backward_witness(m));
    }
    return r;
}

namespace detail {
inline Thread step_image(const Tower& t, const Thread& x, std::size_t target_depth, bool forward) {
    if (!is_thread(t, x)) throw Error(ErrorKind::MalformedTower, "not a thread of this tower");
    auto w = forward ? t.forward_witness(target_depth) : t.backward_witness(target_depth);
    if (!w || *w > x.depth())
        throw Error(ErrorKind::InsufficientDepth, std::string(forward ? "forward" : "backward") +
                                                      " determinism for level " + std::to_string(target_depth) +
                                                      " is not witnessed within depth " + std::to_string(x.depth()));
    const std::size_t n = *w;
    auto nb = forward ? t.level(n).out(x.at[n]) : t.level(n).in(x.at[n]);
    return thread_through(t, target_depth, t.ancestor(n, nb[0], target_depth));
}
}  // namespace detail

/// Image of x under the induced base map, resolved to `target_depth`.
inline Thread base_image(const Tower& t, const Thread& x, std::size_t target_depth) {
    return detail::step_image(t, x, target_depth, true);
}

/// Preimage under the induced base map (backward determinism).
inline Thread base_preimage(const Tower& t, const Thread& x, std::size_t target_depth) {
    return detail::step_image(t, x, target_depth, false);
}

/// Determinism offset consumed by one application of the base map at depth d:
/// the largest output depth m with a witness n <= d.
inline std::optional<std::size_t> image_depth(const Tower& t, std::size_t d, bool forward = true) {
    for (std::size_t m = d + 1; m-- > 0;) {
        auto w = forward ? t.forward_witness(m) : t.backward_witness(m);
        if (w && *w <= d) return m;
    }
    return std::nullopt;
}

/// Extends (or truncates) x along the designated dagger children.
inline Thread thread_extend(const Tower& t, const Thread& x, std::size_t new_depth) {
    if (new_depth > t.depth())
        throw Error(ErrorKind::InsufficientDepth, "tower depth " + std::to_string(t.depth()) + " < requested " +
                                                      std::to_string(new_depth));
    if (new_depth <= x.depth()) return truncate(x, new_depth);
    Thread y = x;
    for (std::size_t k = x.depth() + 1; k <= new_depth; ++k) {
        Index c = t.level(k).dagger_child(y.last());
        if (c == kNone) {
            auto ch = t.level(k).children(y.last());
            if (ch.empty()) throw Error(ErrorKind::MalformedTower, "vertex without children");
            c = ch[0];
        }
        y.at.push_back(c);
    }
    return y;
}

/// 2^{-n} for the least level n where the threads differ, over their common
/// depth; 0 when they agree there.
inline Rational thread_distance(const Thread& x, const Thread& y) {
    std::size_t d = std::min(x.depth(), y.depth());
    for (std::size_t n = 0; n <= d; ++n)
        if (x.at[n] != y.at[n]) return pow2neg(static_cast<int>(n));
    return 0;
}

/// First level where the threads differ, or nullopt over the common depth.
inline std::optional<std::size_t> first_difference(const Thread& x, const Thread& y) {
    std::size_t d = std::min(x.depth(), y.depth());
    for (std::size_t n = 0; n <= d; ++n)
        if (x.at[n] != y.at[n]) return n;
    return std::nullopt;
}

/// Diameter bound of a level-n cylinder in the thread metric.
inline Rational mesh(std::size_t n) { return pow2neg(static_cast<int>(n) + 1); }

}  // namespace ff
