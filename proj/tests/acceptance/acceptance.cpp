// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [path-to-fence_forge-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "fence_forge/fence_forge.hpp"

using namespace ff;
namespace fs_ = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += why;
        }
    }
    void say(const std::string& s) {
        if (!detail.empty()) detail += "; ";
        detail += s;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string cli_path;
int failures = 0;

void run(int id, const std::string& title, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.say(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    char time[32];
    std::snprintf(time, sizeof time, "%.1fs", seconds_since(t0));
    std::cout << "criterion " << (id < 10 ? " " : "") << id << "  " << (o.pass ? "PASS" : "FAIL") << "  " << title
              << "  [" << time << "]  " << o.detail << std::endl;
}

// The k-shift tower with every fiber [0,1].
FSystem shift_fsystem(std::size_t k, std::size_t depth) {
    Tower t = build_shift_system(k, depth);
    FSystem fs;
    fs.kind = "shift";
    fs.lift_mode = "ratio";
    for (std::size_t n = 0; n <= depth; ++n) {
        const std::size_t size = t.level(n).size();
        fs.push_level(t.level(n), std::vector<Rational>(size, Rational(0)), std::vector<Rational>(size, Rational(1)));
    }
    return fs;
}

// ---------------------------------------------------------------------------
// Floating-point grid oracles (independent of the exact search).

double grid_eta(double L, double U, const std::vector<std::pair<double, double>>& ch, int steps) {
    double best = 0;
    for (int i = 0; i <= steps; ++i) {
        double a = L + (U - L) * i / steps;
        for (int j = i; j <= steps; ++j) {
            double b = L + (U - L) * j / steps, m = 1e300;
            for (auto& [c, d] : ch) m = std::min(m, std::max(std::abs(a - c), std::abs(b - d)));
            best = std::max(best, m);
        }
    }
    return best;
}

double grid_endpoint(double L, double U, const std::vector<double>& pts, int steps) {
    double best = 0;
    for (int i = 0; i <= steps; ++i) {
        double t = L + (U - L) * i / steps, m = 1e300;
        for (double p : pts) m = std::min(m, std::abs(t - p));
        best = std::max(best, m);
    }
    return best;
}

// Samples |A(t) - B(t)| on the grid of pitch 2^-10 inside [lo, hi].
double grid_affine_gap(double lo, double hi, double sa, double fa, double ta, double sb, double fb, double tb) {
    double best = 0;
    const double pitch = 1.0 / 1024;
    for (double t = lo;; t = std::min(hi, t + pitch)) {
        best = std::max(best, std::abs(sa * (t - fa) + ta - (sb * (t - fb) + tb)));
        if (t >= hi) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// CLI runs

std::string read_file(const fs_::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int sh(const std::string& cmd) {
    int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct Pipeline {
    std::string kind;
    std::size_t depth;
};

// build -> verify -> render (fence, fan) -> orbit; returns the emitted files.
std::vector<fs_::path> run_pipeline(const Pipeline& p, const fs_::path& dir, Outcome& o) {
    fs_::create_directories(dir);
    const std::string q = "'" + cli_path + "'";
    auto f = [&](const std::string& name) { return dir / (p.kind + "_" + name); };
    std::vector<fs_::path> out{f("system.json"), f("verify.json"), f("fence.svg"), f("fan.svg")};
    int rc = sh(q + " build --kind " + p.kind + " --depth " + std::to_string(p.depth) + " --out '" + out[0].string() + "'");
    o.require(rc == 0, p.kind + " build exit " + std::to_string(rc));
    rc = sh(q + " verify '" + out[0].string() + "' --checks classify,gamma,factor --out '" + out[1].string() + "'");
    o.require(rc == 0 || rc == 3, p.kind + " verify exit " + std::to_string(rc));
    rc = sh(q + " render '" + out[0].string() + "' --mode fence --out '" + out[2].string() + "'");
    o.require(rc == 0, p.kind + " render fence exit " + std::to_string(rc));
    rc = sh(q + " render '" + out[0].string() + "' --mode fan --out '" + out[3].string() + "'");
    o.require(rc == 0, p.kind + " render fan exit " + std::to_string(rc));
    if (p.kind == "transitive" || p.kind == "chaotic" || p.kind == "isometry_fraisse") {
        out.push_back(f("orbit.json"));
        rc = sh(q + " orbit '" + out[0].string() + "' --steps 6 --out '" + out.back().string() + "'");
        o.require(rc == 0, p.kind + " orbit exit " + std::to_string(rc));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef FF_CLI_PATH
    cli_path = FF_CLI_PATH;
#endif
    if (argc > 1) cli_path = argv[1];

    run(1, "Lelek eta+_n <= 2^-n, depths 1-6, depth 6 under 10 s", [] {
        Outcome o;
        for (std::size_t d = 1; d <= 6; ++d) {
            auto t0 = std::chrono::steady_clock::now();
            FSystem fs = build_lelek(d);
            for (std::size_t n = 0; n < d; ++n) {
                EtaEntry e = eta_report(fs, n, false);
                o.require(e.eta_plus <= pow2neg(static_cast<int>(n)),
                          "depth " + std::to_string(d) + " n=" + std::to_string(n) + " eta+=" + to_string(e.eta_plus));
            }
            double t = seconds_since(t0);
            if (d == 6) {
                o.require(t < 10, "depth 6 took " + std::to_string(t) + " s");
                o.say("depth 6 in " + std::to_string(t).substr(0, 5) + " s, " + std::to_string(fs.level(6).size()) +
                      " vertices");
            }
        }
        return o;
    });

    run(2, "Fraisse eta_n <= 2^-n, depths 1-5, dagger at every vertex", [] {
        Outcome o;
        Rational worst_ratio = 0;
        for (std::size_t d = 1; d <= 5; ++d) {
            FSystem fs = build_fraisse(d);
            o.require(validate_f_system(fs).dagger_missing == 0, "dagger missing at depth " + std::to_string(d));
            if (d < 5) continue;  // depth 5 contains every shallower level
            for (std::size_t n = 0; n < d; ++n) {
                EtaEntry e = eta_report(fs, n);
                Rational bound = pow2neg(static_cast<int>(n));
                o.require(e.eta <= bound, "n=" + std::to_string(n) + " eta=" + to_string(e.eta));
                worst_ratio = rmax(worst_ratio, e.eta / bound);
            }
            o.say(std::to_string(fs.level(5).size()) + " vertices at depth 5");
        }
        o.say("max eta_n * 2^n = " + to_string(worst_ratio));
        return o;
    });

    run(3, "two-sided: eta+_n = eta-_n = 2^-n, eta_n bounded below, depths 1-5", [] {
        Outcome o;
        FSystem fs = build_twosided_nonfraisse(5);
        Rational eta_floor = 1;
        for (std::size_t n = 0; n < 5; ++n) {
            EtaEntry e = eta_report(fs, n);
            Rational want = pow2neg(static_cast<int>(n));
            o.require(e.eta_plus == want, "n=" + std::to_string(n) + " eta+=" + to_string(e.eta_plus) + " (want " +
                                              to_string(want) + ")");
            o.require(e.eta_minus == want, "n=" + std::to_string(n) + " eta-=" + to_string(e.eta_minus));
            eta_floor = rmin(eta_floor, e.eta);
        }
        o.require(eta_floor > 0, "eta_n reaches 0");
        o.say("eta_n >= " + to_string(eta_floor) + " on depths 1-5");
        return o;
    });

    run(4, "isometry lifts: Gamma = 0, isometry at depth 4, masked endpoint conditions", [] {
        Outcome o;
        IsometryOptions opt;
        opt.mask_starts = {1};
        for (auto var : {IsometryVariant::Fraisse, IsometryVariant::Lelek}) {
            const std::string name = variant_name(var);
            FSystem fs = build_isometry_lift(var, 5, opt);
            auto r = gamma_report(fs, LiftMode::Affine);
            for (auto& l : r.levels)
                o.require(l.gamma == 0 && l.gamma_plus == 0, name + " Gamma_" + std::to_string(l.n) + " = " + to_string(l.gamma));
            auto pairs = isometry_pairs(fs, 4, 10'000);
            auto c = check_isometry(fs, pairs);
            o.require(c.pass(), name + " isometry: " + (c.witnesses.empty() ? "" : c.witnesses.front()));
            for (std::size_t d = 1; d <= 5; ++d) {
                FSystem sub = build_isometry_lift(var, d, opt);
                auto m = check_isometry_masks(sub);
                o.require(m.pass(), name + " masks at depth " + std::to_string(d) + ": " + verdict_name(m.verdict));
            }
            o.say(name + " " + std::to_string(pairs.size()) + " pairs over " + std::to_string(fs.level(4).size()) +
                  " level-4 threads");
        }
        return o;
    });

    run(5, "transitive lift k=2, depths 1-5: Gamma_n < 2^-(n+1), sum < 1, covering radius", [] {
        Outcome o;
        for (std::size_t d = 1; d <= 5; ++d) {
            FSystem fs;
            try {
                fs = build_transitive_lift(2, d);
            } catch (const Error& e) {
                o.require(false, "depth " + std::to_string(d) + " not constructible: " + e.what());
                continue;
            }
            auto r = gamma_report(fs, LiftMode::Ratio);
            for (auto& l : r.levels)
                o.require(l.gamma < pow2neg(static_cast<int>(l.n) + 1),
                          "depth " + std::to_string(d) + " Gamma_" + std::to_string(l.n) + " = " + to_string(l.gamma));
            o.require(r.total() < 1, "depth " + std::to_string(d) + " sum Gamma = " + to_string(r.total()));
            if (d == 4) {
                for (std::size_t n = 0; n < d; ++n) {
                    auto c = check_transitive(fs, n);
                    o.require(c.cert.pass(), "stage " + std::to_string(n) + " radius " + to_string(c.radius) + " > " +
                                                 to_string(c.bound));
                }
                o.say("depth 4: sum Gamma = " + to_string(r.total()) + ", " + std::to_string(fs.level(4).size()) +
                      " vertices");
            }
        }
        return o;
    });

    run(6, "chaotic lift k=2, depths 1-4: periodic orbits dense in their slabs, heights frozen", [] {
        Outcome o;
        FSystem fs = build_chaotic_lift(2, 4);
        for (std::size_t n = 0; n < 4; ++n) {
            auto c = check_transitive(fs, n);
            o.require(c.cert.pass(), "stage " + std::to_string(n + 1) + " radius " + to_string(c.radius) + " > " +
                                         to_string(c.bound));
            o.say("stage " + std::to_string(n + 1) + " radius " + to_string(c.radius));
        }
        for (std::size_t d = 1; d <= 4; ++d) {
            auto f = check_frozen_heights(d == 4 ? fs : build_chaotic_lift(2, d));
            o.require(f.pass(), "frozen heights at depth " + std::to_string(d) + ": " + verdict_name(f.verdict));
        }
        return o;
    });

    run(7, "mixing lift k=2: masked paths for all level-2 pairs, m in [m2, m2+8]; mask invariance", [] {
        Outcome o;
        FSystem fs = build_mixing_lift(2, 4);
        const std::size_t m2 = fs.marks.window.at(2);
        auto c = check_mixing(fs, 2, m2, m2 + 8);
        o.require(c.pass(), c.witnesses.empty() ? "mixing failed" : c.witnesses.front());
        auto inv = check_mask_invariance(fs);
        o.require(inv.pass(), "mask not invariant");
        o.say("m2 = " + std::to_string(m2) + ", " + std::to_string(fs.level(2).size() * fs.level(2).size()) + " pairs");
        return o;
    });

    run(8, "minimal Fraisse lift, chain 2,6,30,...: 4 refinements, items (a)-(d), sizes, class, visits", [] {
        Outcome o;
        auto mf = build_minimal_fraisse_lift_detailed(primorial_chain(8), 4);
        const FSystem& fs = mf.fs;
        std::string ms;
        for (std::size_t n = 0; n < 4; ++n) {
            const auto& s = mf.steps[n];
            auto c = check_odometer_refinement(fs, n, s.eps, s.m);
            o.require(c.pass(), "refinement " + std::to_string(n) + ": " + verdict_name(c.verdict));
            o.require(fs.level(n + 1).size() == s.m * fs.level(n).size(), "size at level " + std::to_string(n + 1));
            ms += (ms.empty() ? "" : ",") + std::to_string(s.m);
        }
        auto cls = classify(fs);
        o.require(cls.cls == FenceClass::FraisseFence, std::string("class ") + class_name(cls.cls));
        for (std::size_t n = 0; n < 4; ++n) {
            auto c = check_twosided_inheritance(fs, n, pow2neg(static_cast<int>(n)), pow2neg(static_cast<int>(n)));
            o.require(c.pass(), "inheritance at level " + std::to_string(n) + ": " + verdict_name(c.verdict));
        }
        o.say("m = " + ms + ", " + std::to_string(fs.level(4).size()) + " vertices");
        return o;
    });

    run(9, "factor commutation: every constructor, exhaustive lattice at depth 4", [] {
        Outcome o;
        std::vector<std::function<FSystem()>> makers{
            [] { return build_cantor_fence(4); },
            [] { return build_lelek(4); },
            [] { return build_fraisse(4); },
            [] { return build_twosided_nonfraisse(4); },
            [] { return build_isometry_lift(IsometryVariant::Fraisse, 4); },
            [] { return build_isometry_lift(IsometryVariant::Lelek, 4); },
            [] { return build_isometry_lift(IsometryVariant::TwoSided, 4); },
            [] { return build_isometry_warmup(4); },
            [] { return build_transitive_lift(2, 4); },
            [] { return build_chaotic_lift(2, 4); },
            [] { return build_mixing_lift(2, 4); },
            [] { return build_minimal_fraisse_lift(primorial_chain(8), 4); },
        };
        std::size_t total = 0;
        for (auto& make : makers) {
            FSystem fs = make();
            auto pts = lattice_points(fs, 4);
            total += pts.size();
            auto c = check_factor(fs, pts);
            o.require(c.pass(), fs.kind + ": " + (c.witnesses.empty() ? "" : c.witnesses.front()));
        }
        o.say(std::to_string(total) + " points over " + std::to_string(makers.size()) + " constructors");
        return o;
    });

    run(10, "entropy: fiber separated sets <= n/eps; 2-shift growth log 2 = lifted growth", [] {
        Outcome o;
        const std::vector<Rational> grid{Rational(1, 4), Rational(1, 8), Rational(1, 16)};
        Rational worst = 0;
        for (FSystem fs : {build_mixing_lift(2, 3), build_transitive_lift(2, 2), build_fraisse(3)}) {
            auto r = check_entropy(fs, fs.depth(), grid, 16, 8, 8);
            o.require(r.fiber_ok, fs.kind + " fiber count exceeds n/eps");
            worst = rmax(worst, r.worst_fiber_ratio);
        }
        for (std::size_t d = 0; d <= 4; ++d) {
            auto r = check_entropy(shift_fsystem(2, d), d, grid, 16, 8, 8);
            o.require(r.base_ratios.back() == 2, "shift depth " + std::to_string(d) + " ratio " + to_string(r.base_ratios.back()));
            o.require(r.growth_equal, "shift depth " + std::to_string(d) + " lifted growth differs");
        }
        FSystem mix = build_mixing_lift(2, 4);
        auto r = check_entropy(mix, 4, grid, 16, 8, 8);
        o.require(r.base_ratios.back() == 2 && r.growth_equal,
                  "lifted symbolic model ratio " + to_string(r.lift_ratios.back()));
        o.say("worst fiber ratio " + to_string(worst) + ", lifted model with " + std::to_string(r.rung_count) + " rungs");
        return o;
    });

    run(11, "oracles: eta and gamma_affine against 2^-10 grids on 50 random instances", [] {
        Outcome o;
        std::mt19937 rng(11);
        const int steps = 1024;
        double worst = 0;
        auto rnd = [&](int den) { return Rational(std::uniform_int_distribution<int>(0, den)(rng), den); };
        for (int trial = 0; trial < 50; ++trial) {
            // Parent [L,U] with up to 16 nested children; the first keeps the parent interval.
            Rational L = rnd(8) / 2, U = L + Rational(1, 4) + rnd(8) / 4;
            const int kids = std::uniform_int_distribution<int>(1, 16)(rng);
            std::vector<Rational> lo{L}, hi{U};
            for (int i = 1; i < kids; ++i) {
                Rational a = L + (U - L) * rnd(97), b = L + (U - L) * rnd(97);
                lo.push_back(rmin(a, b));
                hi.push_back(rmax(a, b));
            }
            FSystem fs;
            fs.push_level(Level(0, {"r"}, {{0, 0}}), {L}, {U});
            std::vector<std::string> ids;
            EdgeList e;
            std::vector<Index> bond;
            for (int i = 0; i < kids; ++i) {
                ids.push_back("c" + std::to_string(i));
                e.emplace_back(static_cast<Index>(i), static_cast<Index>(i));
                bond.push_back(0);
            }
            fs.push_level(Level(1, ids, e, bond, {0}, 1), lo, hi);
            EtaEntry ex = eta_report(fs, 0);
            std::vector<std::pair<double, double>> ch;
            std::vector<double> his, los;
            for (int i = 0; i < kids; ++i) {
                ch.emplace_back(to_double(lo[i]), to_double(hi[i]));
                his.push_back(to_double(hi[i]));
                los.push_back(to_double(lo[i]));
            }
            const double l = to_double(L), u = to_double(U), pitch = (u - l) / steps + 1e-12;
            const double ge = grid_eta(l, u, ch, steps), gp = grid_endpoint(l, u, his, steps),
                         gm = grid_endpoint(l, u, los, steps);
            for (auto [exact, grid, what] : {std::tuple{to_double(ex.eta), ge, "eta"},
                                             std::tuple{to_double(ex.eta_plus), gp, "eta+"},
                                             std::tuple{to_double(ex.eta_minus), gm, "eta-"}}) {
                worst = std::max(worst, std::abs(exact - grid));
                o.require(grid <= exact + 1e-12 && exact - grid <= pitch,
                          std::string(what) + " trial " + std::to_string(trial) + ": exact " + std::to_string(exact) +
                              " grid " + std::to_string(grid));
            }

            // Affine Gamma on a two-cycle with random nested child intervals.
            auto interval = [&](const Rational& a, const Rational& b) {
                Rational x = a + (b - a) * rnd(32), y = a + (b - a) * rnd(32);
                if (x == y) y = x == b ? a : b;
                return std::pair{rmin(x, y), rmax(x, y)};
            };
            auto pu = interval(0, 1), pv = interval(0, 1);
            auto cu = interval(pu.first, pu.second), cv = interval(pv.first, pv.second);
            FSystem g;
            g.lift_mode = "affine";
            g.push_level(Level(0, {"u", "v"}, {{0, 1}, {1, 0}}), {pu.first, pv.first}, {pu.second, pv.second});
            g.push_level(Level(1, {"u1", "v1"}, {{0, 1}, {1, 0}}, {0, 1}, {kNone, kNone}, 2), {cu.first, cv.first},
                         {cu.second, cv.second});
            auto [gam, gam_plus] = gamma_affine(g, 0);
            auto map = [](auto s, auto t) {
                AffineMap m = affine_between(s.first, s.second, t.first, t.second);
                return std::tuple{to_double(m.slope), to_double(m.from), to_double(m.to)};
            };
            // Both child edges u1->v1 and v1->u1 contribute; each direction
            // compares the parent map with the child map on the child's domain.
            auto [s1, f1, t1] = map(pu, pv);
            auto [s2, f2, t2] = map(cu, cv);
            auto [s3, f3, t3] = map(pv, pu);
            auto [s4, f4, t4] = map(cv, cu);
            const double on_u = grid_affine_gap(to_double(cu.first), to_double(cu.second), s1, f1, t1, s2, f2, t2);
            const double on_v = grid_affine_gap(to_double(cv.first), to_double(cv.second), s3, f3, t3, s4, f4, t4);
            const double og = std::max(on_u, on_v), ogp = og;
            for (auto [exact, grid, what] : {std::tuple{to_double(gam), og, "Gamma"}, std::tuple{to_double(gam_plus), ogp, "Gamma+"}}) {
                worst = std::max(worst, std::abs(exact - grid));
                o.require(std::abs(exact - grid) <= 1.0 / 1024,
                          std::string(what) + " trial " + std::to_string(trial) + ": exact " + std::to_string(exact) +
                              " grid " + std::to_string(grid));
            }
        }
        o.say("largest exact/grid gap " + std::to_string(worst));
        return o;
    });

    run(12, "determinism: CLI pipelines emit byte-identical JSON and SVG on rerun", [] {
        Outcome o;
        if (cli_path.empty() || !fs_::exists(cli_path)) {
            o.require(false, "CLI binary not found: '" + cli_path + "'");
            return o;
        }
        const std::vector<Pipeline> pipes{{"cantor", 3},           {"lelek", 4},           {"fraisse", 3},
                                          {"twosided", 3},         {"isometry_fraisse", 3}, {"isometry_lelek", 3},
                                          {"isometry_twosided", 3}, {"isometry_warmup", 3}, {"transitive", 3},
                                          {"chaotic", 3},          {"mixing", 3},          {"minimal_fraisse", 3}};
        fs_::path root = fs_::temp_directory_path() / ("fence_forge_acceptance_" + std::to_string(::getpid()));
        std::size_t files = 0;
        for (auto& p : pipes) {
            auto a = run_pipeline(p, root / "run1", o);
            auto b = run_pipeline(p, root / "run2", o);
            for (std::size_t i = 0; i < a.size(); ++i) {
                std::string x = read_file(a[i]), y = read_file(b[i]);
                o.require(!x.empty(), a[i].filename().string() + " is empty");
                o.require(x == y, a[i].filename().string() + " differs between runs");
                ++files;
            }
        }
        fs_::remove_all(root);
        o.say(std::to_string(files) + " files compared over " + std::to_string(pipes.size()) + " pipelines");
        return o;
    });

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criterion(s) fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
