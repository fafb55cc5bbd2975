#include <catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace ff;
using namespace fixtures;

TEST_CASE("single self-loop tower: structure passes, splitting unwitnessed", "[graph]") {
    Tower t = single_loop_tower(3);
    auto r = validate_c_structure(t);
    CHECK(r.structural_ok());
    CHECK(r.unwitnessed_splits() == 4);
    auto d = validate_graph_c_system(t);
    for (std::size_t m = 0; m <= 3; ++m) {
        REQUIRE(d.forward[m]);
        CHECK(*d.forward[m] == m);
        CHECK(*d.backward[m] == m);
    }
}

TEST_CASE("full 2-shift tower: every vertex splits one level down, witness m+1", "[graph]") {
    Tower t = build_shift_system(2, 3);
    auto r = validate_c_structure(t);
    CHECK(r.structural_ok());
    for (std::size_t n = 0; n < 3; ++n)
        for (int s : r.split_level[n]) CHECK(s == static_cast<int>(n) + 1);
    auto d = validate_graph_c_system(t);
    for (std::size_t m = 0; m < 3; ++m) {
        REQUIRE(d.forward[m]);
        CHECK(*d.forward[m] == m + 1);
        CHECK(*d.backward[m] == m + 1);
    }
    CHECK_FALSE(d.forward[3]);
}

TEST_CASE("bond missing a parent is reported as non-surjective", "[graph]") {
    Tower t;
    t.push(Level(0, {"a"}, {{0, 0}}));
    t.push(Level(1, {"b0", "b1"}, {{0, 1}, {1, 0}}, {0, 0}, {0}, 1));
    t.push(Level(2, {"c0", "c1"}, {{0, 1}, {1, 0}}, {0, 0}, {0, kNone}, 2));
    auto r = validate_c_structure(t);
    CHECK_FALSE(r.levels[2].bond_surjective);
    CHECK(r.levels[2].unmapped_parents == std::vector<Index>{1});
}

TEST_CASE("bond to an unknown parent is malformed", "[graph]") {
    CHECK_THROWS_AS(Level(1, {"x"}, {{0, 0}}, {3}, {}, 1), Error);
}

TEST_CASE("two vertices whose out-edges always split parents: condition 1 unwitnessed", "[graph]") {
    // Level n has vertices a_n, b_n over a_{n-1}, b_{n-1}; both point at both.
    Tower t;
    for (std::size_t n = 0; n <= 4; ++n) {
        std::vector<Index> bond, dagger;
        if (n > 0) bond = {0, 1}, dagger = {0, 1};
        t.push(Level(n, {"a" + std::to_string(n), "b" + std::to_string(n)}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, bond,
                     dagger, n == 0 ? 0 : 2));
    }
    for (std::size_t m = 1; m <= 4; ++m) CHECK_FALSE(t.forward_witness(m));
}

TEST_CASE("base_image on the identity tower is truncation", "[graph]") {
    Tower t = single_loop_tower(4);
    Thread x = thread_through(t, 4, 0);
    CHECK(base_image(t, x, 2) == truncate(x, 2));
}

TEST_CASE("base_image shifts the central word: 01101 -> 101", "[graph]") {
    // h(x)_i = x_{i+1}: the image's central word of length 3 is x_0 x_1 x_2.
    Tower t = build_shift_system(2, 2);
    Thread x = word_thread(t, 2, "01101");
    Thread y = base_image(t, x, 1);
    CHECK(t.level(1).id(y.last()) == "1:101");
    CHECK(t.level(0).id(y.at[0]) == "0:0");
    // Cross-check by edge enumeration: every out-neighbour projects to 101.
    for (Index w : t.level(2).out(x.last())) CHECK(t.ancestor(2, w, 1) == y.last());
    CHECK_THROWS_AS(base_image(t, x, 2), Error);
}

TEST_CASE("odometer (2,4,8): residues (0,0,0) map to (1,1,1)", "[graph]") {
    Tower t = build_odometer_tower({2, 4, 8});
    Thread x = thread_through(t, 3, 0);
    Thread y = base_image(t, x, 3);
    CHECK(y.at == std::vector<Index>{0, 1, 1, 1});
    CHECK(base_image(t, x, 2) == truncate(y, 2));
    CHECK(base_preimage(t, y, 3) == x);
}

TEST_CASE("thread distance is the dyadic first-difference metric", "[graph]") {
    Tower t = build_shift_system(2, 3);
    Thread x = word_thread(t, 2, "1111111"), y = word_thread(t, 2, "0111110");
    CHECK(thread_distance(x, x) == 0);
    CHECK(thread_distance(x, y) == Rational(1, 8));
    Thread z = word_thread(t, 2, "1111101");
    CHECK(thread_distance(x, z) <= rmax(thread_distance(x, y), thread_distance(y, z)));
}

TEST_CASE("thread_extend follows the dagger children", "[graph]") {
    FSystem fs = build_lelek(3);
    Thread x = thread_through(fs.tower, 1, 0);
    Thread y = thread_extend(fs.tower, x, 3);
    for (std::size_t k = 2; k <= 3; ++k) CHECK(y.at[k] == fs.level(k).dagger_child(y.at[k - 1]));
    CHECK_THROWS_AS(thread_extend(fs.tower, x, 4), Error);
}

TEST_CASE("base_image is functorial and respects edges on the shift", "[graph]") {
    Tower t = build_shift_system(2, 3);
    for (Index v = 0; v < t.level(3).size(); v += 7) {
        Thread x = thread_through(t, 3, v);
        Thread y = base_image(t, x, 2);
        CHECK(base_image(t, x, 1) == truncate(y, 1));
        for (std::size_t k = 0; k <= 2; ++k) {
            auto nb = t.level(k).out(x.at[k]);
            CHECK(std::find(nb.begin(), nb.end(), y.at[k]) != nb.end());
        }
        CHECK(base_preimage(t, thread_extend(t, y, 2), 1) == truncate(x, 1));
    }
}
