#include <catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"

using namespace ff;
using namespace fixtures;

TEST_CASE("certificates: combine lets fail dominate unwitnessed", "[verify]") {
    Certificate a = make_cert("a", true), b = make_cert("b", false), u;
    u.kind = "u";
    CHECK(combine("x", {a, u}).verdict == Verdict::Unwitnessed);
    CHECK(combine("x", {u, b, a}).verdict == Verdict::Fail);
    CHECK(combine("x", {a, a}).pass());
}

TEST_CASE("factor commutation on identity and shift dynamics", "[verify][factor]") {
    FSystem id = one_parent({{0, 1}});
    CHECK(check_factor(id, lattice_points(id, 1)).pass());
    FSystem sh = shift_fsystem(2, 3);
    auto pts = lattice_points(sh, 3, 7);
    CHECK(check_factor(sh, pts).pass());
    CHECK(check_factor(sh, pts, true).pass());
    FSystem tr = build_transitive_lift(2, 2);
    CHECK(check_factor(tr, lattice_points(tr, 2)).pass());
}

TEST_CASE("isometry: exact on the lift, broken by one perturbed endpoint", "[verify][isometry]") {
    FSystem fs = build_isometry_lift(IsometryVariant::Fraisse, 3);
    auto c = check_isometry(fs, isometry_pairs(fs, 3, 4000));
    CHECK(c.pass());
    CHECK(*c.observed == 0);
    // Shrink one top-level fiber: the affine map into its cycle successor now stretches.
    Index v = 5;
    fs.set_phi(3, v, fs.lo(3, v), (fs.lo(3, v) + fs.hi(3, v)) / 2);
    auto bad = check_isometry(fs, isometry_pairs(fs, 3, 4000));
    CHECK_FALSE(bad.pass());
    CHECK(*bad.observed > 0);
}

TEST_CASE("isometry pairs are thinned by a fixed stride", "[verify][isometry]") {
    FSystem fs = build_isometry_lift(IsometryVariant::Fraisse, 3);
    const std::size_t n = fs.level(3).size();
    CHECK(isometry_pairs(fs, 3, 1'000'000).size() == n * (n - 1) / 2 + n);
    CHECK(isometry_pairs(fs, 3, 100).size() <= 100);
}

TEST_CASE("transitive lift: marked orbit covers the slab within the bound", "[verify][transitive]") {
    FSystem fs = build_transitive_lift(2, 3);
    for (std::size_t n = 0; n < 3; ++n) {
        auto r = check_transitive(fs, n);
        INFO("stage " << n << " radius " << to_string(r.radius));
        CHECK(r.cert.pass());
        CHECK(r.radius <= r.bound);
    }
    CHECK_THROWS_AS(check_transitive(build_lelek(2), 0), Error);
}

TEST_CASE("chaotic lift: periodic orbits dense, heights frozen", "[verify][chaotic]") {
    FSystem fs = build_chaotic_lift(2, 3);
    for (std::size_t n = 0; n < 2; ++n) CHECK(check_transitive(fs, n).cert.pass());
    CHECK(check_frozen_heights(fs).pass());
    auto p = check_periodic(fs, 1'000'000, 3);
    CHECK(p.cert.pass());
    CHECK(p.orbits.size() == 3);
}

TEST_CASE("mixing on the full 2-shift with the pair mask for U = V = 1, window 1", "[verify][mixing]") {
    FSystem fs = shift_fsystem(2, 2);
    fs.marks.mask = build_mixing_kmask(2, "1", "1", 2);
    CHECK(check_mask_invariance(fs).pass());
    CHECK(check_mixing(fs, 0, 1, 8).pass());
}

TEST_CASE("mixing lift: every level-n pair connects for m in [2n+2, 2n+10]", "[verify][mixing]") {
    FSystem fs = build_mixing_lift(2, 3);
    CHECK(check_mask_invariance(fs).pass());
    CHECK(check_frozen_heights(fs).pass());
    for (std::size_t n = 0; n < 2; ++n) {
        std::size_t w = fs.marks.window[n];
        CHECK(check_mixing(fs, n, w, w + 8).pass());
    }
}

TEST_CASE("periodic orbits of an isometry lift return after one period", "[verify][periodic]") {
    FSystem fs = build_isometry_lift(IsometryVariant::Fraisse, 2);
    auto r = check_periodic(fs, 16, 2);
    CHECK(r.cert.pass());
    CHECK(r.count_by_length == std::map<std::size_t, std::size_t>{{2, 3}});
    for (auto& o : r.orbits) CHECK(o.height_period == o.length);
}

TEST_CASE("identity dynamics: every cycle has length 1", "[verify][periodic]") {
    auto r = check_periodic(build_lelek(3), 4, 3);
    CHECK(r.cert.pass());
    CHECK(r.count_by_length.size() == 1);
    CHECK(r.count_by_length.begin()->first == 1);
}

TEST_CASE("entropy: full 2-shift grows like log 2, fibers add nothing", "[verify][entropy]") {
    FSystem fs = shift_fsystem(2, 2);
    auto r = check_entropy(fs, 2, {Rational(1, 4), Rational(1, 8)}, 8, 4, 6);
    CHECK(r.cert.pass());
    CHECK(r.base_ratios.back() == 2);
    CHECK(r.rung_count == 1);
    CHECK(std::abs(r.base_growth - std::log(2.0)) < 1e-12);
    CHECK(r.growth_equal);
}

TEST_CASE("entropy: transitive lift over a cycle has zero growth", "[verify][entropy]") {
    FSystem fs = build_transitive_lift(2, 2);
    auto r = check_entropy(fs, 2, {Rational(1, 4)}, 8, 4, 6);
    CHECK(r.fiber_ok);
    CHECK(r.base_ratios.back() == 1);
    CHECK(r.base_growth == 0);
}

TEST_CASE("two-sided inheritance: Cantor fence has no small-gap cells", "[verify][inheritance]") {
    auto c = check_twosided_inheritance(build_cantor_fence(3), 1, Rational(1, 4), Rational(1, 4));
    CHECK(c.verdict == Verdict::Fail);
}

TEST_CASE("two-sided inheritance: minimal Fraisse lift", "[verify][inheritance]") {
    FSystem fs = build_minimal_fraisse_lift(primorial_chain(8), 3);
    auto c = check_twosided_inheritance(fs, 1, Rational(1, 2), Rational(1, 2));
    CHECK(c.pass());
}

TEST_CASE("odometer refinement items hold on the minimal Fraisse lift", "[verify][odometer]") {
    auto mf = build_minimal_fraisse_lift_detailed(primorial_chain(8), 3);
    for (std::size_t n = 0; n < 3; ++n) {
        INFO("refinement " << n);
        CHECK(check_odometer_refinement(mf.fs, n, mf.steps[n].eps, mf.steps[n].m).pass());
    }
}
