#pragma once

// Small hand-built towers shared by the unit tests.

#include <string>
#include <vector>

#include "fence_forge/fence_forge.hpp"

namespace fixtures {

using namespace ff;

/// One self-loop vertex per level: identity dynamics on a point.
inline Tower single_loop_tower(std::size_t depth) {
    Tower t;
    for (std::size_t n = 0; n <= depth; ++n) {
        std::vector<Index> bond, dagger;
        if (n > 0) bond = {0}, dagger = {0};
        t.push(Level(n, {"p" + std::to_string(n)}, {{0, 0}}, bond, dagger, n == 0 ? 0 : 1));
    }
    return t;
}

/// Root [0,1] with the given child intervals, every vertex a self-loop; the
/// first child is designated as the dagger child.
inline FSystem one_parent(const std::vector<std::pair<Rational, Rational>>& children) {
    FSystem fs;
    fs.push_level(Level(0, {"r"}, {{0, 0}}), {Rational(0)}, {Rational(1)});
    std::vector<std::string> ids;
    EdgeList e;
    std::vector<Index> bond;
    std::vector<Rational> lo, hi;
    for (std::size_t i = 0; i < children.size(); ++i) {
        ids.push_back("c" + std::to_string(i));
        e.emplace_back(static_cast<Index>(i), static_cast<Index>(i));
        bond.push_back(0);
        lo.push_back(children[i].first);
        hi.push_back(children[i].second);
    }
    fs.push_level(Level(1, ids, e, bond, {0}, 1), lo, hi);
    return fs;
}

/// Two-vertex base u -> v -> u at level 0 with one child each at level 1.
/// Upper endpoints (ratio mode) or intervals (affine mode) are supplied per vertex.
inline FSystem edge_pair(std::pair<Rational, Rational> u, std::pair<Rational, Rational> v,
                         std::pair<Rational, Rational> u1, std::pair<Rational, Rational> v1, std::string mode) {
    FSystem fs;
    fs.lift_mode = std::move(mode);
    fs.push_level(Level(0, {"u", "v"}, {{0, 1}, {1, 0}}), {u.first, v.first}, {u.second, v.second});
    fs.push_level(Level(1, {"u1", "v1"}, {{0, 1}, {1, 0}}, {0, 1}, {kNone, kNone}, 2), {u1.first, v1.first},
                  {u1.second, v1.second});
    return fs;
}

/// The k-shift tower with every fiber [0,1], in ratio mode.
inline FSystem shift_fsystem(std::size_t k, std::size_t depth) {
    Tower t = build_shift_system(k, depth);
    FSystem fs;
    fs.lift_mode = "ratio";
    for (std::size_t n = 0; n <= depth; ++n) {
        const std::size_t size = t.level(n).size();
        fs.push_level(t.level(n), std::vector<Rational>(size, Rational(0)), std::vector<Rational>(size, Rational(1)));
    }
    return fs;
}

/// Thread of the central word w in the k-shift tower.
inline Thread word_thread(const Tower& t, std::size_t k, const std::string& w) {
    return thread_through(t, w.size() / 2, static_cast<Index>(shift_index(k, w)));
}

}  // namespace fixtures
