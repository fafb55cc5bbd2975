// fence_forge: build, verify, lift, iterate and render fence systems.
//
// Exit codes: 0 success, 2 malformed input, 3 a requested certificate
// failed, 4 a depth or vertex budget was exceeded.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fence_forge/config.hpp"
#include "fence_forge/fence_forge.hpp"

namespace {

using namespace ff;

constexpr int kExitMalformed = 2, kExitCertificate = 3, kExitBudget = 4;

struct Failure {
    int code;
    std::string what;
};

int exit_code_for(ErrorKind k) {
    return k == ErrorKind::BudgetExceeded || k == ErrorKind::InsufficientDepth ? kExitBudget : kExitMalformed;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{kExitMalformed, "cannot write '" + path + "'"};
    out << text;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// ---------------------------------------------------------------------------
// verify

Certificate classify_cert(const FSystem& fs) {
    Certificate c;
    c.kind = "classify";
    FenceCertificate fc;
    try {
        fc = classify(fs);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DaggerMissing) throw;
        c.verdict = Verdict::Fail;
        c.note(e.what());
        return c;
    }
    c.verdict = fc.cls == FenceClass::Unclassified ? Verdict::Fail : Verdict::Pass;
    c.note(std::string("class ") + class_name(fc.cls));
    for (auto& e : fc.etas) {
        std::string w = "n=" + std::to_string(e.n) + " eta+=" + to_string(e.eta_plus) + " eta-=" + to_string(e.eta_minus);
        if (e.has_eta) w += " eta=" + to_string(e.eta);
        c.note(w);
    }
    if (!fc.etas.empty()) {
        c.claimed = fc.rate.back();
        c.observed = fc.etas.back().eta_plus;
    }
    return c;
}

Certificate gamma_cert(const FSystem& fs, LiftMode mode, Json& gamma_json) {
    GammaReport r = gamma_report(fs, mode);
    gamma_json = gamma_to_json(r);
    GammaVerdict v = condition_gamma(r);
    Certificate c = make_cert("gamma", v.holds);
    if (mode == LiftMode::Ratio) {
        c.claimed = Rational(1);
        c.observed = v.partial_sum;
        c.note("partial sum " + to_string(v.partial_sum) + " against 1");
    } else {
        c.claimed = Rational(2);
        c.observed = v.decay_constant;
        c.note("decay constant " + to_string(v.decay_constant) + " against 2");
    }
    return c;
}

Certificate run_check(const FSystem& fs, const std::string& name, LiftMode mode, Json& extra) {
    const std::size_t D = fs.depth();
    if (name == "classify") return classify_cert(fs);
    if (name == "gamma") return gamma_cert(fs, mode, extra["gamma"]);
    if (name == "factor") {
        std::size_t stride = std::max<std::size_t>(1, fs.level(D).size() / 50'000);
        Certificate c = check_factor(fs, lattice_points(fs, D, stride));
        c.note("lattice stride " + std::to_string(stride));
        return c;
    }
    if (name == "isometry") return check_isometry(fs, isometry_pairs(fs, std::min<std::size_t>(D, 4)));
    if (name == "transitive") {
        std::vector<Certificate> parts;
        for (std::size_t n = 0; n < std::max<std::size_t>(D, 1); ++n) {
            CoveringReport r = check_transitive(fs, n);
            r.cert.kind = "transitive_n" + std::to_string(n);
            r.cert.note("radius " + to_string(r.radius) + " bound " + to_string(r.bound));
            parts.push_back(std::move(r.cert));
        }
        return combine("transitive", parts);
    }
    if (name == "mixing") {
        if (D == 0 || fs.marks.window.empty()) throw Error(ErrorKind::MarksMissing, "no mixing windows");
        std::size_t n = std::min<std::size_t>({2, D - 1, fs.marks.window.size() - 1});
        return check_mixing(fs, n, fs.marks.window[n], fs.marks.window[n] + 8);
    }
    if (name == "masks") {
        // Affine isometry lifts shrink masked gaps instead of freezing heights.
        std::vector<Certificate> parts{check_mask_invariance(fs)};
        if (fs.kind.rfind("isometry", 0) == 0) parts.push_back(check_isometry_masks(fs));
        else parts.push_back(check_frozen_heights(fs));
        return combine("masks", parts);
    }
    if (name == "frozen") return check_frozen_heights(fs);
    if (name == "periodic") return check_periodic(fs, 64, D).cert;
    if (name == "entropy") {
        EntropyReport r = check_entropy(fs, std::min<std::size_t>(D, 2), {Rational(1, 4), Rational(1, 8), Rational(1, 16)});
        r.cert.note("worst fiber ratio " + to_string(r.worst_fiber_ratio));
        return r.cert;
    }
    if (name == "inheritance")
        return check_twosided_inheritance(fs, std::min<std::size_t>(D, 2), Rational(1, 4), Rational(1, 4));
    if (name == "odometer") {
        std::vector<Certificate> parts;
        for (std::size_t n = 0; n < D; ++n) {
            Certificate c = check_odometer_refinement(fs, n, pow2neg(static_cast<int>(n)));
            c.kind = "refinement_n" + std::to_string(n);
            parts.push_back(std::move(c));
        }
        return combine("odometer", parts);
    }
    throw Failure{kExitMalformed, "unknown check '" + name + "'"};
}

int cmd_verify(const std::string& file, const std::string& checks, const std::string& mode_flag,
               const std::string& out) {
    FSystem fs = fsystem_from_string(read_file(file));
    LiftMode mode = mode_flag.empty() ? parse_mode(fs.lift_mode) : parse_mode(mode_flag);
    Json report;
    report["system"] = fs.kind;
    report["depth"] = fs.depth();
    Json certs = Json::array(), extra = Json::object();
    bool ok = true;
    for (const std::string& name : split_csv(checks)) {
        Certificate c;
        try {
            c = run_check(fs, name, mode, extra);
        } catch (const Error& e) {
            if (exit_code_for(e.kind()) == kExitBudget) throw;
            c.kind = name;
            c.verdict = Verdict::Fail;
            c.note(e.what());
        }
        c.kind = name == c.kind ? c.kind : name + ":" + c.kind;
        ok = ok && c.verdict != Verdict::Fail;
        certs.push_back(certificate_to_json(c));
    }
    report["certificates"] = std::move(certs);
    for (auto& [k, v] : extra.items()) report[k] = v;
    write_out(out, report.dump(1) + "\n");
    return ok ? 0 : kExitCertificate;
}

// ---------------------------------------------------------------------------
// build, lift, orbit, render

int cmd_build(const std::string& config_path, BuildConfig flags, bool have_kind, bool have_depth,
              bool have_alphabet, bool have_periods, const std::string& out) {
    BuildConfig c;
    if (!config_path.empty()) c = load_config(config_path);
    if (have_kind) c.kind = flags.kind;
    if (have_depth) c.depth = flags.depth;
    if (have_alphabet) c.alphabet = flags.alphabet;
    if (have_periods) c.periods = flags.periods;
    if (!flags.masks.empty()) c.masks = flags.masks;
    if (c.kind.empty()) throw Failure{kExitMalformed, "no kind given (config file or --kind)"};
    check_config(c);
    write_out(out, fsystem_to_string(build_from_config(c)));
    return 0;
}

FencePoint parse_point(const FSystem& fs, const std::string& spec) {
    Json j;
    auto at = spec.find('@');
    j["vertex"] = spec.substr(0, at);
    if (at != std::string::npos) j["height"] = spec.substr(at + 1);
    return point_from_json(fs, j);
}

int cmd_lift(const std::string& file, const std::string& points_file, const std::string& mode_flag, bool inverse,
             const std::string& out) {
    FSystem fs = fsystem_from_string(read_file(file));
    Json pts;
    try {
        pts = Json::parse(read_file(points_file));
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    Lifter lift(fs, mode_flag.empty() ? parse_mode(fs.lift_mode) : parse_mode(mode_flag));
    const Json& list = pts.is_array() ? pts : io_detail::field(pts, "points");
    Json images = Json::array();
    for (const Json& pj : list) {
        FencePoint p = point_from_json(fs, pj);
        FencePoint q = inverse ? lift.inverse(p) : lift.apply(p);
        images.push_back({{"input", point_to_json(fs, p)}, {"image", point_to_json(fs, q)}});
    }
    Json report;
    report["mode"] = mode_name(lift.mode());
    report["direction"] = inverse ? "inverse" : "forward";
    report["images"] = std::move(images);
    write_out(out, report.dump(1) + "\n");
    return 0;
}

int cmd_orbit(const std::string& file, const std::string& point, std::size_t steps, const std::string& mode_flag,
              const std::string& out) {
    FSystem fs = fsystem_from_string(read_file(file));
    Lifter lift(fs, mode_flag.empty() ? parse_mode(fs.lift_mode) : parse_mode(mode_flag));
    FencePoint p;
    if (!point.empty()) {
        p = parse_point(fs, point);
    } else {
        Thread x = fs.marks.designated ? *fs.marks.designated : thread_through(fs.tower, fs.depth(), 0);
        x = thread_extend(fs.tower, x, fs.depth());
        p = {x, fs.hi(x.depth(), x.last())};
    }
    // Depth budget first: each step consumes the determinism offset.
    std::size_t d = p.thread.depth();
    for (std::size_t s = 0; s < steps; ++s) {
        auto m = image_depth(fs.tower, d);
        if (!m)
            throw Error(ErrorKind::InsufficientDepth, "orbit step " + std::to_string(s + 1) + " has no determinism witness at depth " +
                                                          std::to_string(d));
        d = *m;
    }
    Json orbit = Json::array();
    for (std::size_t s = 0; s < steps; ++s) {
        p = lift.apply(p);
        orbit.push_back(point_to_json(fs, p));
    }
    Json report;
    report["mode"] = mode_name(lift.mode());
    report["steps"] = steps;
    report["orbit"] = std::move(orbit);
    write_out(out, report.dump(1) + "\n");
    return 0;
}

int cmd_render(const std::string& file, const std::string& mode, std::optional<std::size_t> level,
               const std::string& dots, const std::string& out) {
    FSystem fs = fsystem_from_string(read_file(file));
    RenderOptions opt;
    if (dots == "on") opt.dots = RenderOptions::Dots::On;
    else if (dots == "off") opt.dots = RenderOptions::Dots::Off;
    else if (dots != "auto") throw Failure{kExitMalformed, "--dots must be auto, on or off"};
    std::size_t n = level.value_or(fs.depth());
    if (n > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "render level beyond depth");
    opt.title = fs.kind + " level " + std::to_string(n);
    std::string svg;
    if (mode.empty() || mode == "fence") svg = render_fence(fs, n, opt);
    else if (mode == "fan") svg = render_fan(fs, n, opt);
    else throw Failure{kExitMalformed, "--mode must be fence or fan"};
    write_out(out, svg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-depth fences over Cantor space: build, verify, lift, orbit, render"};
    app.require_subcommand(1);

    std::string out, mode, config, file, points, point, checks = "classify,gamma", dots = "auto";
    BuildConfig flags;
    std::size_t steps = 1, depth = 0;
    bool inverse = false;

    auto* build = app.add_subcommand("build", "Build an F-system from a config file and/or flags");
    build->add_option("config", config, "TOML or JSON config")->check(CLI::ExistingFile);
    auto* o_kind = build->add_option("--kind", flags.kind, "Constructor kind");
    auto* o_depth = build->add_option("--depth", flags.depth, "Tower depth");
    auto* o_alpha = build->add_option("--alphabet", flags.alphabet, "Shift alphabet size");
    auto* o_per = build->add_option("--periods", flags.periods, "Cycle lengths or period chain")->delimiter(',');
    build->add_option("--masks", flags.masks, "Mask start levels (isometry lifts)")->delimiter(',');
    build->add_option("--out", out, "Output file (default stdout)");

    auto* verify = app.add_subcommand("verify", "Run certificate checks on an F-system file");
    verify->add_option("fsystem", file, "F-system JSON")->required()->check(CLI::ExistingFile);
    verify->add_option("--checks", checks,
                       "Comma list: classify, gamma, factor, isometry, transitive, mixing, masks, frozen, periodic, "
                       "entropy, inheritance, odometer");
    verify->add_option("--mode", mode, "Lift mode override: ratio or affine");
    verify->add_option("--out", out, "Output file (default stdout)");

    auto* lift = app.add_subcommand("lift", "Apply the lifted map to a points file");
    lift->add_option("fsystem", file, "F-system JSON")->required()->check(CLI::ExistingFile);
    lift->add_option("points", points, "Points JSON: [{\"vertex\": id, \"height\": \"p/q\"}]")
        ->required()
        ->check(CLI::ExistingFile);
    lift->add_option("--mode", mode, "Lift mode override: ratio or affine");
    lift->add_flag("--inverse", inverse, "Apply the inverse map");
    lift->add_option("--out", out, "Output file (default stdout)");

    auto* orbit = app.add_subcommand("orbit", "Iterate the lifted map from one point");
    orbit->add_option("fsystem", file, "F-system JSON")->required()->check(CLI::ExistingFile);
    orbit->add_option("--point", point, "Start point as vertex_id@p/q (default: designated thread, top height)");
    orbit->add_option("--steps", steps, "Number of steps");
    orbit->add_option("--mode", mode, "Lift mode override: ratio or affine");
    orbit->add_option("--out", out, "Output file (default stdout)");

    auto* render = app.add_subcommand("render", "Render a level as SVG");
    render->add_option("fsystem", file, "F-system JSON")->required()->check(CLI::ExistingFile);
    render->add_option("--mode", mode, "fence or fan");
    auto* o_level = render->add_option("--depth", depth, "Level to draw (default: deepest)");
    render->add_option("--dots", dots, "Endpoint dots: auto, on or off");
    render->add_option("--out", out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitMalformed;
    }

    try {
        if (*build)
            return cmd_build(config, flags, o_kind->count() > 0, o_depth->count() > 0, o_alpha->count() > 0,
                             o_per->count() > 0, out);
        if (*verify) return cmd_verify(file, checks, mode, out);
        if (*lift) return cmd_lift(file, points, mode, inverse, out);
        if (*orbit) return cmd_orbit(file, point, steps, mode, out);
        if (*render)
            return cmd_render(file, mode, o_level->count() ? std::optional<std::size_t>(depth) : std::nullopt, dots,
                              out);
    } catch (const Failure& f) {
        std::cerr << "fence_forge: " << f.what << "\n";
        return f.code;
    } catch (const Error& e) {
        std::cerr << "fence_forge: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "fence_forge: " << e.what() << "\n";
        return kExitMalformed;
    }
    return 0;
}
