#pragma once

#include <string>
#include <vector>

#include "fence_forge/fsystem.hpp"

namespace ff {

/// Default budget on vertices per level for the larger constructors.
inline constexpr std::size_t kDefaultVertexBudget = 8'000'000;

/// Accumulates one level before it is frozen into the tower.
struct LevelDraft {
    std::vector<std::string> ids;
    EdgeList edges;
    std::vector<Index> bond;
    std::vector<ValueId> lo, hi;

    Index add(std::string id, Index parent, ValueId l, ValueId h) {
        ids.push_back(std::move(id));
        bond.push_back(parent);
        lo.push_back(l);
        hi.push_back(h);
        return static_cast<Index>(ids.size() - 1);
    }
    std::size_t size() const { return ids.size(); }

    void self_loops() {
        for (Index v = 0; v < ids.size(); ++v) edges.emplace_back(v, v);
    }
};

inline std::string vid(std::size_t level, std::size_t k) { return std::to_string(level) + ":" + std::to_string(k); }

/// Pushes a draft as level `index` of fs. `dagger` maps each previous-level vertex to its designated child.
inline void commit(FSystem& fs, LevelDraft&& d, std::vector<Index> dagger = {}) {
    std::size_t index = fs.tower.level_count();
    std::size_t parents = index == 0 ? 0 : fs.level(index - 1).size();
    if (index == 0) d.bond.clear();
    Level L(index, std::move(d.ids), std::move(d.edges), std::move(d.bond), std::move(dagger), parents);
    fs.push_level_ids(std::move(L), std::move(d.lo), std::move(d.hi));
}

inline void check_budget(std::size_t count, std::size_t budget, const std::string& what) {
    if (count > budget)
        throw Error(ErrorKind::BudgetExceeded, what + " needs " + std::to_string(count) + " vertices, budget is " +
                                                   std::to_string(budget));
}

/// Single root vertex [0,1] with a self-loop.
inline void push_root(FSystem& fs, std::string id = "0:0") {
    LevelDraft d;
    d.add(std::move(id), kNone, fs.pool.intern(0), fs.pool.intern(1));
    d.self_loops();
    commit(fs, std::move(d));
}

}  // namespace ff
