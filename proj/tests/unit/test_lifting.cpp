#include <catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace ff;
using namespace fixtures;

TEST_CASE("ratio Gamma hand instance: u->v with uppers 1,1/2 over 1,1/4 gives 2", "[lifting][gamma]") {
    // Forward ratios 1/2 vs 1/4 differ by 1/4; backward ratios 2 vs 4 differ by 2.
    FSystem fs = edge_pair({0, 1}, {0, Rational(1, 2)}, {0, 1}, {0, Rational(1, 4)}, "ratio");
    CHECK(gamma_ratio(fs, 0) == 2);
    auto r = gamma_report(fs, LiftMode::Ratio);
    REQUIRE(r.levels.size() == 1);
    CHECK(r.total() == 2);
    auto v = condition_gamma(r);
    CHECK_FALSE(v.holds);
    CHECK(v.margin == -1);
    CHECK(v.decay_constant == 4);
}

TEST_CASE("affine Gamma hand instance: identity against a half shift gives 1/2", "[lifting][gamma]") {
    FSystem fs = edge_pair({0, 1}, {0, 1}, {0, Rational(1, 2)}, {Rational(1, 2), 1}, "affine");
    auto [g, gp] = gamma_affine(fs, 0);
    CHECK(g == Rational(1, 2));
    CHECK(gp == Rational(1, 2));
    CHECK(condition_gamma(gamma_report(fs, LiftMode::Affine), 1).holds);
}

TEST_CASE("isometry lifts have Gamma identically 0", "[lifting][gamma]") {
    for (auto var : {IsometryVariant::Fraisse, IsometryVariant::Lelek, IsometryVariant::TwoSided}) {
        FSystem fs = build_isometry_lift(var, 3);
        auto r = gamma_report(fs, LiftMode::Affine);
        for (auto& l : r.levels) {
            CHECK(l.gamma == 0);
            CHECK(l.gamma_plus == 0);
        }
    }
}

TEST_CASE("gamma needs the next level and nonzero uppers in ratio mode", "[lifting][gamma]") {
    FSystem fs = edge_pair({0, 1}, {0, 1}, {0, 1}, {0, 0}, "ratio");
    CHECK_THROWS_AS(gamma_ratio(fs, 0), Error);
    CHECK_THROWS_AS(gamma_ratio(build_lelek(2), 2), Error);
}

TEST_CASE("condition_gamma: a decay constant above the claimed one fails", "[lifting][gamma]") {
    GammaReport r;
    r.mode = LiftMode::Affine;
    r.levels = {{0, 2, 0}, {1, Rational(1, 8), 0}};
    r.partial_sum = {2, Rational(17, 8)};
    r.partial_sum_plus = {0, 0};
    auto v = condition_gamma(r, 2);
    CHECK(v.decay_constant == 4);
    CHECK_FALSE(v.holds);
    CHECK(condition_gamma(r, 4).holds);
}

TEST_CASE("ratio lift from an upper endpoint lands on an upper endpoint", "[lifting]") {
    FSystem fs = build_transitive_lift(2, 3);
    Lifter L(fs, LiftMode::Ratio);
    for (Index v = 0; v < fs.level(3).size(); v += 97) {
        FencePoint p{thread_through(fs.tower, 3, v), fs.hi(3, v)};
        FencePoint q = L.apply(p);
        CHECK(q.height == fs.hi(q.thread.depth(), q.thread.last()));
    }
}

TEST_CASE("lift and inverse round-trip exactly", "[lifting]") {
    FSystem fs = build_transitive_lift(2, 3);
    Lifter L(fs, LiftMode::Ratio);
    for (Index v = 0; v < fs.level(3).size(); v += 131) {
        FencePoint p{thread_through(fs.tower, 3, v), fs.hi(3, v) * Rational(2, 3)};
        FencePoint q = L.apply(p);
        CHECK(L.inverse(q) == p);
    }
}

TEST_CASE("ratio mode refuses nonzero lower endpoints", "[lifting]") {
    CHECK_THROWS_AS(Lifter(build_fraisse(2), LiftMode::Ratio), Error);
}

TEST_CASE("lift rejects a height outside the fiber", "[lifting]") {
    FSystem fs = build_transitive_lift(2, 2);
    FencePoint p{thread_through(fs.tower, 2, 0), fs.hi(2, 0) + 1};
    CHECK_THROWS_AS(lift_apply(fs, p, LiftMode::Ratio), Error);
}

TEST_CASE("ratio scalings telescope within the Gamma partial sums", "[lifting]") {
    FSystem fs = build_transitive_lift(2, 3);
    auto r = gamma_report(fs, LiftMode::Ratio);
    for (Index v = 0; v < fs.level(3).size(); v += 53) {
        Thread x = thread_through(fs.tower, 3, v);
        Thread y = base_image(fs.tower, x, 3);
        Rational prev = fs.hi(0, y.at[0]) / fs.hi(0, x.at[0]);
        for (std::size_t k = 1; k <= 3; ++k) {
            Rational s = fs.hi(k, y.at[k]) / fs.hi(k, x.at[k]);
            CHECK(rabs(s - prev) <= r.levels[k - 1].gamma);
            prev = s;
        }
        auto e = s_estimate(fs, x, LiftMode::Ratio, &r);
        CHECK(e.lower <= e.value);
        CHECK(e.value <= e.upper);
    }
}

TEST_CASE("affine s estimate on an isometry lift is the identity map", "[lifting]") {
    FSystem fs = build_isometry_lift(IsometryVariant::Fraisse, 3);
    auto e = s_estimate(fs, thread_through(fs.tower, 3, 0), LiftMode::Affine);
    CHECK(e.value == 1);
    CHECK(e.map(Rational(1, 3)) == Rational(1, 3));
}
