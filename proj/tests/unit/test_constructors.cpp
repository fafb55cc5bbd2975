#include <catch_amalgamated.hpp>

#include <set>

#include "fixtures.hpp"

using namespace ff;
using namespace fixtures;

namespace {

std::set<std::size_t> cycle_lengths(const Level& L) {
    std::set<std::size_t> out;
    for (auto& c : cycle_info(L).cycles) out.insert(c.size());
    return out;
}

}  // namespace

TEST_CASE("classic constructors: level sizes", "[constructors]") {
    for (std::size_t d = 1; d <= 4; ++d) {
        CHECK(build_cantor_fence(d).level(d).size() == (std::size_t{1} << d));
        CHECK(build_twosided_nonfraisse(d).level(d).size() == ipow(3, d));
    }
    // Lelek: 2^n children per vertex at step n.
    FSystem lk = build_lelek(4);
    for (std::size_t n = 0; n < 4; ++n)
        for (Index p = 0; p < lk.level(n).size(); ++p) {
            std::size_t kids = 0;
            for (Index c = 0; c < lk.level(n + 1).size(); ++c) kids += lk.level(n + 1).parent(c) == p;
            CHECK(kids == (std::size_t{1} << n));
        }
    CHECK(build_fraisse(4).level(4).size() == 4096);
}

TEST_CASE("every constructor designates a dagger child that keeps the parent interval", "[constructors]") {
    std::vector<FSystem> all;
    all.push_back(build_cantor_fence(3));
    all.push_back(build_lelek(3));
    all.push_back(build_fraisse(3));
    all.push_back(build_twosided_nonfraisse(3));
    all.push_back(build_isometry_lift(IsometryVariant::Fraisse, 3));
    all.push_back(build_transitive_lift(2, 3));
    all.push_back(build_chaotic_lift(2, 3));
    all.push_back(build_mixing_lift(2, 3));
    all.push_back(build_minimal_fraisse_lift(primorial_chain(8), 3));
    for (auto& fs : all) {
        INFO(fs.kind);
        auto v = validate_f_system(fs);
        CHECK(v.dagger_missing == 0);
        CHECK(v.ok());
    }
}

TEST_CASE("refine_to_cycles: Z4 with alternating labels splits into two 2-cycles over one cell", "[constructors][cycles]") {
    CyclePointModel m{{1, 2, 3, 0}, {0, 0, 0, 0}};
    auto r = refine_to_cycles(m, {0, 1, 0, 1});
    CHECK(r.succ.size() == 2);
    CHECK(r.point_class[0] == r.point_class[2]);
    CHECK(r.point_class[1] == r.point_class[3]);
    CHECK(r.succ[r.point_class[0]] == r.point_class[1]);
    // Constant labels collapse everything to a single fixed class.
    auto c = refine_to_cycles(m, {0, 0, 0, 0});
    CHECK(c.succ == std::vector<Index>{0});
}

TEST_CASE("refine_to_cycles: Z2 cells with distinct labels stay a 2-cycle", "[constructors][cycles]") {
    CyclePointModel m{{1, 0}, {0, 1}};
    auto r = refine_to_cycles(m, {0, 1});
    CHECK(r.succ.size() == 2);
    CHECK(r.bond[r.point_class[0]] == 0);
    CHECK(r.bond[r.point_class[1]] == 1);
    CHECK_THROWS_AS(refine_to_cycles({{0, 0}, {0, 0}}, {0, 0}), Error);
}

TEST_CASE("warm-up isometry: one length-n copy plus (k+2)(k+1)/2 doubled cycles", "[constructors][cycles]") {
    FSystem fs = build_isometry_warmup(3);
    std::size_t cycles = 1;
    for (std::size_t k = 0; k < 3; ++k) {
        cycles *= 1 + (k + 2) * (k + 1) / 2;
        CHECK(cycle_info(fs.level(k + 1)).cycles.size() == cycles);
    }
    CHECK(fs.level(3).size() == 273);
}

TEST_CASE("odometer grid pairs: N=2 lists the full pair, all pairs, then the full pair", "[constructors][odometer]") {
    auto p = odometer_grid_pairs(2);
    CHECK(p == std::vector<GridPair>{{0, 2}, {0, 1}, {0, 2}, {1, 2}, {0, 2}});
    CHECK(grid_size_for(Rational(1, 2)) == 3);
    CHECK(grid_size_for(1) == 2);
    // Consecutive turns move by less than eps.
    auto s = odometer_schedule(3, Rational(1, 2));
    for (std::size_t i = 1; i < s.size(); ++i)
        CHECK(rmax(rabs(s[i].a - s[i - 1].a), rabs(s[i].b - s[i - 1].b)) < Rational(1, 2));
}

TEST_CASE("minimal Fraisse lift: level sizes multiply by the chosen chain entries", "[constructors][odometer]") {
    auto mf = build_minimal_fraisse_lift_detailed(primorial_chain(8), 3);
    REQUIRE(mf.steps.size() == 3);
    std::size_t size = 1;
    for (std::size_t n = 0; n < 3; ++n) {
        const auto& s = mf.steps[n];
        CHECK(s.m >= s.m0);
        size *= s.m;
        CHECK(mf.fs.level(n + 1).size() == size);
        CHECK(cycle_info(mf.fs.level(n + 1)).cycles.size() == 1);
    }
    CHECK(mf.fs.level(3).size() == 5400);
    CHECK_THROWS_AS(build_minimal_fraisse_lift({2, 3}, 1), Error);
}

TEST_CASE("isometry lift over prime chains: disjoint cycle-length spectra", "[constructors][cycles]") {
    IsometryOptions a, b;
    a.periods = {2, 6, 30};
    b.periods = {5, 35};
    FSystem fa = build_isometry_lift(IsometryVariant::Fraisse, 2, a);
    FSystem fb = build_isometry_lift(IsometryVariant::Fraisse, 2, b);
    auto la = cycle_lengths(fa.level(2)), lb = cycle_lengths(fb.level(2));
    for (auto x : la) CHECK(lb.count(x) == 0);
    CHECK(la == std::set<std::size_t>{6});
    CHECK(lb == std::set<std::size_t>{35});
}

TEST_CASE("mixing masks: the union over level-1 pairs is the two-block set", "[constructors][mixing]") {
    const std::size_t k = 2, depth = 2;
    std::vector<std::uint8_t> uni(ipow(k, 2 * depth + 1), 0);
    for (std::size_t u = 0; u < 8; ++u)
        for (std::size_t v = 0; v < 8; ++v) {
            auto m = build_mixing_kmask(k, shift_word(k, 3, u), shift_word(k, 3, v), depth);
            CHECK(std::all_of(m[0].begin(), m[0].end(), [](auto b) { return b == 0; }));
            for (std::size_t i = 0; i < uni.size(); ++i) uni[i] |= m[depth][i];
        }
    for (std::size_t i = 0; i < uni.size(); ++i) {
        INFO(shift_word(k, 2 * depth + 1, i));
        CHECK(static_cast<bool>(uni[i]) == within_two_blocks(k, 2 * depth + 1, i, 3));
    }
}

TEST_CASE("mixing lift records masks and windows 2n+2", "[constructors][mixing]") {
    FSystem fs = build_mixing_lift(2, 3);
    REQUIRE(fs.marks.window.size() >= 3);
    for (std::size_t n = 0; n < fs.marks.window.size(); ++n) CHECK(fs.marks.window[n] == 2 * n + 2);
    REQUIRE(fs.marks.mask.size() == 4);
    for (std::size_t d = 1; d <= 3; ++d) CHECK(fs.marks.mask[d].size() == fs.level(d).size());
}

TEST_CASE("transitive and chaotic lifts: Gamma below 2^-(n+1), frozen values", "[constructors][gamma]") {
    const std::vector<Rational> frozen{Rational(1, 3), Rational(1, 7), Rational(1, 15)};
    for (FSystem fs : {build_transitive_lift(2, 3), build_chaotic_lift(2, 3)}) {
        INFO(fs.kind);
        auto r = gamma_report(fs, LiftMode::Ratio);
        REQUIRE(r.levels.size() == 3);
        for (std::size_t n = 0; n < 3; ++n) {
            CHECK(r.levels[n].gamma == frozen[n]);
            CHECK(r.levels[n].gamma < pow2neg(static_cast<int>(n) + 1));
        }
        CHECK(condition_gamma(r).holds);
    }
    FSystem t = build_transitive_lift(2, 3);
    CHECK(t.level(3).size() == 15525);
    CHECK(build_chaotic_lift(2, 3).level(3).size() == 24278);
}

TEST_CASE("vertex budget is enforced", "[constructors]") {
    CHECK_THROWS_AS(build_transitive_lift(2, 3, 1000), Error);
    try {
        build_transitive_lift(2, 3, 1000);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BudgetExceeded);
    }
}
