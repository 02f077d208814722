#include "msweep/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace msweep {

namespace {

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Polygon of the workspace clipped to {<n, x> >= offset} (the removed side of a half-plane).
std::vector<Vec2> clip_outside(const Box& ws, const HalfSpace& h) {
    const std::vector<Vec2> rect{ws.lo, {ws.hi.x, ws.lo.y}, ws.hi, {ws.lo.x, ws.hi.y}};
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < rect.size(); ++i) {
        const Vec2 a = rect[i];
        const Vec2 b = rect[(i + 1) % rect.size()];
        const double da = dot(h.normal, a) - h.offset;
        const double db = dot(h.normal, b) - h.offset;
        if (da >= 0.0) out.push_back(a);
        if ((da >= 0.0) != (db >= 0.0)) out.push_back(a + (da / (da - db)) * (b - a));
    }
    return out;
}

void draw_part(std::ostream& os, const Primitive& p, const Box& ws) {
    if (const auto* e = std::get_if<EllipseComplement>(&p)) {
        os << "<ellipse class=\"obstacle\" cx=\"" << g6(e->center.x) << "\" cy=\"" << g6(e->center.y) << "\" rx=\""
           << g6(e->a1) << "\" ry=\"" << g6(e->a2) << "\" transform=\"rotate(" << g6(-e->angle * 180.0 / std::numbers::pi)
           << " " << g6(e->center.x) << " " << g6(e->center.y) << ")\"/>\n";
    } else if (const auto* b = std::get_if<BallComplement>(&p)) {
        os << "<circle class=\"obstacle\" cx=\"" << g6(b->center.x) << "\" cy=\"" << g6(b->center.y) << "\" r=\""
           << g6(b->radius) << "\"/>\n";
    } else if (const auto* d = std::get_if<Ball>(&p)) {
        os << "<circle class=\"boundary\" cx=\"" << g6(d->center.x) << "\" cy=\"" << g6(d->center.y) << "\" r=\""
           << g6(d->radius) << "\"/>\n";
    } else if (const auto* h = std::get_if<HalfSpace>(&p)) {
        const auto poly = clip_outside(ws, *h);
        if (poly.size() >= 3) {
            os << "<polygon class=\"obstacle\" points=\"";
            for (std::size_t i = 0; i < poly.size(); ++i) os << (i ? " " : "") << g6(poly[i].x) << "," << g6(poly[i].y);
            os << "\"/>\n";
        }
    } else if (const auto* bx = std::get_if<Box>(&p)) {
        os << "<rect class=\"boundary\" x=\"" << g6(bx->lo.x) << "\" y=\"" << g6(bx->lo.y) << "\" width=\""
           << g6(bx->hi.x - bx->lo.x) << "\" height=\"" << g6(bx->hi.y - bx->lo.y) << "\"/>\n";
    } else if (const auto* w = std::get_if<WallWithExit>(&p)) {
        const double top = std::min(w->extent, ws.hi.y + w->thickness);
        const double bottom = std::max(-w->extent, ws.lo.y - w->thickness);
        const double d = w->thickness;
        if (top > w->gap)
            os << "<rect class=\"wall\" x=\"" << g6(-d) << "\" y=\"" << g6(w->gap) << "\" width=\"" << g6(2.0 * d)
               << "\" height=\"" << g6(top - w->gap) << "\"/>\n";
        if (bottom < -w->gap)
            os << "<rect class=\"wall\" x=\"" << g6(-d) << "\" y=\"" << g6(bottom) << "\" width=\"" << g6(2.0 * d)
               << "\" height=\"" << g6(-w->gap - bottom) << "\"/>\n";
        for (double y : {w->gap, -w->gap})
            os << "<circle class=\"wall\" cx=\"0\" cy=\"" << g6(y) << "\" r=\"" << g6(d) << "\"/>\n";
        os << "<line class=\"exit\" x1=\"0\" y1=\"" << g6(-w->gap + d) << "\" x2=\"0\" y2=\"" << g6(w->gap - d)
           << "\"/>\n";
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,particle_id,x1,x2,v1,v2\n";
    for (std::size_t j = 0; j < traj.mesh_size(); ++j) {
        const ParticleCloud& c = traj.cloud(j);
        const std::string t = g17(traj.time(j));
        const bool has_v = j < traj.velocity_count();
        for (std::size_t i = 0; i < c.size(); ++i) {
            const Vec2 x = c.at(i);
            os << t << ',' << i << ',' << g17(x.x) << ',' << g17(x.y) << ',';
            if (has_v) {
                const Vec2 v = traj.velocities(j)[i];
                os << g17(v.x) << ',' << g17(v.y) << '\n';
            } else {
                os << "nan,nan\n";
            }
        }
    }
}

void write_diagnostics_csv(std::ostream& os, const std::vector<InvariantRow>& rows) {
    os << "t,invariant,value,bound,pass\n";
    for (const auto& r : rows)
        os << g17(r.t) << ',' << r.name << ',' << g17(r.value) << ',' << g17(r.bound) << ','
           << (r.pass ? "true" : "false") << '\n';
}

std::string render_frame_svg(const Trajectory& traj, std::size_t j, const Box& ws) {
    const double w = ws.hi.x - ws.lo.x;
    const double h = ws.hi.y - ws.lo.y;
    const double px = 600.0;
    const double radius = 0.006 * std::max(w, h);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g6(px) << "\" height=\"" << g6(px * h / w)
       << "\" viewBox=\"" << g6(ws.lo.x) << " " << g6(-ws.hi.y) << " " << g6(w) << " " << g6(h) << "\">\n";
    os << "<style>.obstacle{fill:#9aa5b1;stroke:#3e4c59;stroke-width:" << g6(radius * 0.4)
       << "}.boundary{fill:none;stroke:#3e4c59;stroke-width:" << g6(radius * 0.4)
       << "}.wall{fill:#3e4c59}.exit{stroke:#2f9e44;stroke-width:" << g6(radius * 0.8)
       << ";stroke-dasharray:" << g6(radius * 2) << "}.particle{fill:#d6336c}</style>\n";
    os << "<rect x=\"" << g6(ws.lo.x) << "\" y=\"" << g6(-ws.hi.y) << "\" width=\"" << g6(w) << "\" height=\""
       << g6(h) << "\" fill=\"#ffffff\"/>\n";
    os << "<g transform=\"scale(1,-1)\">\n";
    const ProxRegularSet c = eval_moving(traj.moving_set(), traj.time(j));
    for (const Primitive& p : c.shape().parts) draw_part(os, p, ws);
    const ParticleCloud& cloud = traj.cloud(j);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec2 x = cloud.at(i);
        os << "<circle class=\"particle\" cx=\"" << g6(x.x) << "\" cy=\"" << g6(x.y) << "\" r=\"" << g6(radius)
           << "\"/>\n";
    }
    os << "</g>\n";
    os << "<text x=\"" << g6(ws.lo.x + 0.02 * w) << "\" y=\"" << g6(-ws.hi.y + 0.05 * h) << "\" font-size=\""
       << g6(0.04 * h) << "\">t = " << g6(traj.time(j)) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::vector<Vec2> read_cloud_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::ParseError, "cloud CSV is empty");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            header.push_back(cell);
        }
    }
    auto column = [&](const std::string& name) -> long {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<long>(k);
        return -1;
    };
    const long cx = column("x1");
    const long cy = column("x2");
    const long ct = column("t");
    if (cx < 0 || cy < 0) fail(ErrorCode::ParseError, "cloud CSV needs x1 and x2 columns");

    std::vector<Vec2> pts;
    double t_max = -std::numeric_limits<double>::infinity();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> vals;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            double v = 0.0;
            const char* b = cell.data();
            const char* e = b + cell.size();
            while (e > b && (e[-1] == '\r' || e[-1] == ' ')) --e;
            while (b < e && *b == ' ') ++b;
            const auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc() || res.ptr != e)
                fail(ErrorCode::ParseError, "cloud CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            vals.push_back(v);
        }
        if (vals.size() != header.size())
            fail(ErrorCode::ParseError, "cloud CSV line " + std::to_string(lineno) + ": wrong number of fields");
        if (ct >= 0) {
            const double t = vals[static_cast<std::size_t>(ct)];
            if (t > t_max) {
                t_max = t;
                pts.clear();
            } else if (t < t_max) {
                continue;
            }
        }
        pts.push_back({vals[static_cast<std::size_t>(cx)], vals[static_cast<std::size_t>(cy)]});
    }
    if (pts.empty()) fail(ErrorCode::ParseError, "cloud CSV has no rows");
    return pts;
}

}  // namespace msweep
