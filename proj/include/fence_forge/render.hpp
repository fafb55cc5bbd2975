#pragma once

// SVG figures of depth-n slabs: one vertical segment per vertex over its
// cylinder (middle-thirds layout), and the fan quotient where the base
// collapses to an apex. Output is a pure function of its inputs.

#include <sstream>
#include <string>
#include <vector>

#include "fence_forge/fsystem.hpp"

namespace ff {

struct RenderOptions {
    enum class Dots { Auto, On, Off };
    /// Auto draws endpoint dots when the lower endpoints are not identically 0.
    Dots dots = Dots::Auto;
    std::string stroke = "#000000";
    std::string title;
};

namespace render_detail {

inline constexpr int kWidth = 1000, kHeight = 600, kDigits = 12;
inline const Rational kMargin = 50, kSpanX = 900, kBaseY = 550, kSpanY = 500;

inline std::string dec(const Rational& q) { return to_decimal(q, kDigits); }

/// Horizontal position in [0,1] of every level-n vertex. The children of a
/// cylinder [a,b] with c children take the even pieces of 2c-1 equal parts;
/// the position is the centre of the vertex's piece.
inline std::vector<Rational> layout(const Tower& t, std::size_t n) {
    std::vector<Rational> a{Rational(0)}, w{Rational(1)};
    for (std::size_t k = 1; k <= n; ++k) {
        const Level& L = t.level(k);
        std::vector<Rational> na(L.size()), nw(L.size());
        for (Index p = 0; p < a.size(); ++p) {
            auto ch = L.children(p);
            if (ch.empty()) continue;
            Rational piece = w[p] / Rational(static_cast<long long>(2 * ch.size() - 1));
            for (std::size_t i = 0; i < ch.size(); ++i) {
                na[ch[i]] = a[p] + piece * Rational(static_cast<long long>(2 * i));
                nw[ch[i]] = piece;
            }
        }
        a = std::move(na);
        w = std::move(nw);
    }
    for (std::size_t v = 0; v < a.size(); ++v) a[v] += w[v] / 2;
    return a;
}

inline void header(std::ostringstream& o, const std::string& title) {
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    if (!title.empty()) {
        o << "<title>";
        for (char c : title) {
            if (c == '&') o << "&amp;";
            else if (c == '<') o << "&lt;";
            else if (c == '>') o << "&gt;";
            else o << c;
        }
        o << "</title>\n";
    }
    o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";
}

inline void line(std::ostringstream& o, const std::string& cls, const std::string& id, const Rational& x1,
                 const Rational& y1, const Rational& x2, const Rational& y2, const std::string& stroke) {
    o << "<line class=\"" << cls << "\" data-vertex=\"" << id << "\" x1=\"" << dec(x1) << "\" y1=\"" << dec(y1)
      << "\" x2=\"" << dec(x2) << "\" y2=\"" << dec(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
}

inline void dot(std::ostringstream& o, const std::string& id, const Rational& x, const Rational& y,
                const std::string& stroke) {
    o << "<circle class=\"endpoint\" data-vertex=\"" << id << "\" cx=\"" << dec(x) << "\" cy=\"" << dec(y)
      << "\" r=\"2\" fill=\"" << stroke << "\"/>\n";
}

inline bool want_dots(const FSystem& fs, const RenderOptions& opt) {
    if (opt.dots == RenderOptions::Dots::Auto) return !fs.lower_identically_zero();
    return opt.dots == RenderOptions::Dots::On;
}

}  // namespace render_detail

/// Slab at level n: segment x = layout, y from phi^L to phi^U (height 1 at the top).
inline std::string render_fence(const FSystem& fs, std::size_t n, const RenderOptions& opt = {}) {
    using namespace render_detail;
    if (n > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "render level beyond depth");
    std::ostringstream o;
    header(o, opt.title);
    const bool dots = want_dots(fs, opt);
    auto pos = layout(fs.tower, n);
    const Level& L = fs.level(n);
    for (Index v = 0; v < L.size(); ++v) {
        Rational x = kMargin + kSpanX * pos[v];
        Rational y0 = kBaseY - kSpanY * fs.lo(n, v), y1 = kBaseY - kSpanY * fs.hi(n, v);
        line(o, "fiber", L.id(v), x, y0, x, y1, opt.stroke);
        if (dots) {
            dot(o, L.id(v), x, y0, opt.stroke);
            dot(o, L.id(v), x, y1, opt.stroke);
        }
    }
    o << "</svg>\n";
    return o.str();
}

/// Fan quotient: the height-0 level collapses to the apex (500, 575); a point
/// of height h over layout position p sits at apex + h * (target(p) - apex),
/// with targets spread along y = 25. Vertices with phi^U = 0 contribute no segment.
inline std::string render_fan(const FSystem& fs, std::size_t n, const RenderOptions& opt = {}) {
    using namespace render_detail;
    if (n > fs.depth()) throw Error(ErrorKind::InsufficientDepth, "render level beyond depth");
    std::ostringstream o;
    header(o, opt.title);
    const bool dots = want_dots(fs, opt);
    const Rational ax = 500, ay = 575, top = 25;
    auto pos = layout(fs.tower, n);
    const Level& L = fs.level(n);
    o << "<circle class=\"apex\" cx=\"" << dec(ax) << "\" cy=\"" << dec(ay) << "\" r=\"3\" fill=\"" << opt.stroke
      << "\"/>\n";
    for (Index v = 0; v < L.size(); ++v) {
        if (fs.hi(n, v) == 0) continue;
        Rational dx = kMargin + kSpanX * pos[v] - ax, dy = top - ay;
        const Rational &lo = fs.lo(n, v), &hi = fs.hi(n, v);
        line(o, "ray", L.id(v), ax + lo * dx, ay + lo * dy, ax + hi * dx, ay + hi * dy, opt.stroke);
        if (dots) {
            dot(o, L.id(v), ax + lo * dx, ay + lo * dy, opt.stroke);
            dot(o, L.id(v), ax + hi * dx, ay + hi * dy, opt.stroke);
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace ff
