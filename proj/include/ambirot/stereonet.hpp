#pragma once

// Stereonet rendering of C2 frames: the frame's directed normal is drawn as a
// triangle, the in-plane axis as a pair of circles (filled for the lower end,
// open for the upper end), and the sample mean in double-size markers. The
// whole sphere maps into the unit disc through (x, y) / (1 + |z|), so every
// axis appears twice. Output is deterministic SVG text.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ambirot/mean.hpp"

namespace ambirot {

struct StereonetStyle {
    double size = 480;            // pixels across
    double marker_radius = 4.5;
    double mean_scale = 2.0;      // mean markers are drawn this many times larger
    std::string vector_color = "#c1272d";
    std::string axis_color = "#1a1a1a";
};

namespace detail {

inline std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct DiscPoint {
    double x, y;
    bool lower;
};

inline DiscPoint project_to_disc(const Vec3& p, const StereonetStyle& st) {
    double denom = 1.0 + std::fabs(p.z);
    double half = st.size / 2;
    return {half + half * 0.94 * (p.x / denom), half - half * 0.94 * (p.y / denom), p.z < 0};
}

inline void append_triangle(std::string& svg, const DiscPoint& d, double r,
                            const std::string& color) {
    svg += "<polygon points=\"";
    svg += fmt_coord(d.x) + "," + fmt_coord(d.y - 1.2 * r) + " ";
    svg += fmt_coord(d.x - 1.04 * r) + "," + fmt_coord(d.y + 0.6 * r) + " ";
    svg += fmt_coord(d.x + 1.04 * r) + "," + fmt_coord(d.y + 0.6 * r);
    svg += "\" fill=\"" + color + "\"/>\n";
}

inline void append_axis_end(std::string& svg, const DiscPoint& d, double r,
                            const std::string& color) {
    svg += "<circle cx=\"" + fmt_coord(d.x) + "\" cy=\"" + fmt_coord(d.y) + "\" r=\"" +
           fmt_coord(r) + "\"";
    if (d.lower)
        svg += " fill=\"" + color + "\"/>\n";
    else
        svg += " fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\"/>\n";
}

} // namespace detail

inline std::string render_stereonet(const std::vector<AmbiguousRotation>& sample,
                                    const std::optional<AmbiguousRotation>& mean,
                                    const StereonetStyle& st = {}) {
    if (sample.empty()) throw std::invalid_argument("render_stereonet: empty sample");
    const auto& g = *sample.front().group;
    if (!(g.kind == GroupKind::Cyclic && g.order_parameter == 2))
        throw std::invalid_argument("stereonet rendering is defined for C2 frames only");

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt_coord(st.size) +
           "\" height=\"" + detail::fmt_coord(st.size) + "\" viewBox=\"0 0 " +
           detail::fmt_coord(st.size) + " " + detail::fmt_coord(st.size) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    double half = st.size / 2;
    svg += "<circle cx=\"" + detail::fmt_coord(half) + "\" cy=\"" + detail::fmt_coord(half) +
           "\" r=\"" + detail::fmt_coord(half * 0.94) +
           "\" fill=\"none\" stroke=\"#666666\" stroke-width=\"1\"/>\n";

    auto draw_frame = [&](const AmbiguousRotation& x, double scale) {
        Vec3 u0 = x.rep * Vec3{0, 0, 1};
        Vec3 u1 = x.rep * Vec3{1, 0, 0};
        detail::append_triangle(svg, detail::project_to_disc(u0, st), st.marker_radius * scale,
                                st.vector_color);
        detail::append_axis_end(svg, detail::project_to_disc(u1, st), st.marker_radius * scale,
                                st.axis_color);
        detail::append_axis_end(svg, detail::project_to_disc(-u1, st), st.marker_radius * scale,
                                st.axis_color);
    };
    for (const auto& x : sample) draw_frame(x, 1.0);
    if (mean) draw_frame(*mean, st.mean_scale);
    svg += "</svg>\n";
    return svg;
}

} // namespace ambirot
