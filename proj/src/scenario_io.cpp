// Scenario text format: `[section]` headers followed by `key = value` lines.
// `#` starts a comment. Vectors are whitespace-separated numbers; point lists
// separate points with `;`.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "msweep/scenarios.hpp"

namespace msweep {

namespace {

struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
    std::size_t key_col = 0;
    std::size_t value_col = 0;
};

struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<Entry> entries;
};

[[noreturn]] void parse_error(std::size_t line, std::size_t col, const std::string& msg) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<Section> tokenize(std::string_view text) {
    std::vector<Section> sections;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t b = 0;
        while (b < line.size() && is_space(line[b])) ++b;
        std::size_t e = line.size();
        while (e > b && is_space(line[e - 1])) --e;
        if (b == e) continue;
        const std::string_view body = line.substr(b, e - b);
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) parse_error(lineno, b + 1, "malformed section header");
            sections.push_back({std::string(body.substr(1, body.size() - 2)), lineno, {}});
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) parse_error(lineno, b + 1, "expected 'key = value'");
        if (sections.empty()) parse_error(lineno, b + 1, "key outside of any section");
        std::size_t ke = eq;
        while (ke > 0 && is_space(body[ke - 1])) --ke;
        std::size_t vb = eq + 1;
        while (vb < body.size() && is_space(body[vb])) ++vb;
        if (ke == 0) parse_error(lineno, b + 1, "missing key");
        if (vb == body.size()) parse_error(lineno, b + eq + 2, "missing value");
        sections.back().entries.push_back(
            {std::string(body.substr(0, ke)), std::string(body.substr(vb)), lineno, b + 1, b + vb + 1});
    }
    if (sections.empty()) parse_error(1, 1, "scenario is empty");
    return sections;
}

/// Typed access to one section; every key must be consumed.
class Reader {
public:
    explicit Reader(const Section& s) : section_(s) {
        std::set<std::string> seen;
        for (const auto& e : s.entries)
            if (!seen.insert(e.key).second) parse_error(e.line, e.key_col, "duplicate key '" + e.key + "'");
    }

    const Entry* find(const std::string& key) {
        for (const auto& e : section_.entries)
            if (e.key == key) {
                used_.insert(key);
                return &e;
            }
        return nullptr;
    }

    const Entry& require(const std::string& key) {
        const Entry* e = find(key);
        if (!e) parse_error(section_.line, 1, "section [" + section_.name + "] needs key '" + key + "'");
        return *e;
    }

    void finish() const {
        for (const auto& e : section_.entries)
            if (!used_.count(e.key))
                parse_error(e.line, e.key_col, "unknown key '" + e.key + "' in section [" + section_.name + "]");
    }

    static std::vector<double> numbers(const Entry& e, std::size_t n) {
        std::vector<double> out;
        const char* p = e.value.data();
        const char* end = p + e.value.size();
        while (p < end) {
            while (p < end && is_space(*p)) ++p;
            if (p == end) break;
            double v = 0.0;
            const auto [q, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || (q < end && !is_space(*q)))
                parse_error(e.line, e.value_col + static_cast<std::size_t>(p - e.value.data()),
                            "expected a number in '" + e.value + "'");
            out.push_back(v);
            p = q;
        }
        if (out.size() != n)
            parse_error(e.line, e.value_col,
                        "'" + e.key + "' expects " + std::to_string(n) + " number" + (n == 1 ? "" : "s"));
        return out;
    }

    double number(const std::string& key, double fallback) {
        const Entry* e = find(key);
        return e ? numbers(*e, 1)[0] : fallback;
    }
    Vec2 vec(const std::string& key, Vec2 fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        const auto v = numbers(*e, 2);
        return {v[0], v[1]};
    }
    std::size_t count(const std::string& key, std::size_t fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        std::size_t v = 0;
        const auto [q, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
        if (ec != std::errc() || q != e->value.data() + e->value.size())
            parse_error(e->line, e->value_col, "expected a non-negative integer");
        return v;
    }
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        std::uint64_t v = 0;
        const auto [q, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
        if (ec != std::errc() || q != e->value.data() + e->value.size())
            parse_error(e->line, e->value_col, "expected a non-negative integer");
        return v;
    }
    bool flag(const std::string& key, bool fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        parse_error(e->line, e->value_col, "expected 'true' or 'false'");
    }
    /// "auto" or a number.
    std::optional<double> auto_number(const std::string& key) {
        const Entry* e = find(key);
        if (!e || e->value == "auto") return std::nullopt;
        return numbers(*e, 1)[0];
    }

    const Section& section() const { return section_; }

private:
    const Section& section_;
    std::set<std::string> used_;
};

Drift parse_drift(const Entry& e, bool allow_parabolic) {
    std::istringstream in(e.value);
    std::string kind;
    in >> kind;
    const std::size_t rest_col = e.value_col + kind.size() + 1;
    Entry rest{e.key, e.value.substr(std::min(e.value.size(), kind.size())), e.line, e.key_col, rest_col};
    if (kind == "parabolic") {
        if (!allow_parabolic) parse_error(e.line, e.value_col, "parabolic drift needs the congestion field");
        if (!rest.value.empty() && rest.value.find_first_not_of(" \t") != std::string::npos)
            parse_error(e.line, rest_col, "parabolic drift takes no parameters");
        return ParabolicDrift{};
    }
    if (kind == "constant") {
        const auto v = Reader::numbers(rest, 2);
        return AffineDrift{{0.0, 0.0, 0.0, 0.0}, {v[0], v[1]}};
    }
    if (kind == "affine") {
        const auto v = Reader::numbers(rest, 6);
        return AffineDrift{{v[0], v[1], v[2], v[3]}, {v[4], v[5]}};
    }
    parse_error(e.line, e.value_col, "unknown drift kind '" + kind + "' (constant, affine, parabolic)");
}

AffineDrift parse_affine(const Entry& e) { return std::get<AffineDrift>(parse_drift(e, false)); }

void read_field(Reader& r, Scenario& s) {
    const Entry& kind = r.require("kind");
    s.L = Reader::numbers(r.require("L"), 1)[0];
    if (kind.value == "morse") {
        MorseParams m;
        m.attraction_strength = r.number("attraction_strength", m.attraction_strength);
        m.repulsion_strength = r.number("repulsion_strength", m.repulsion_strength);
        m.attraction_range = r.number("attraction_range", m.attraction_range);
        m.repulsion_range = r.number("repulsion_range", m.repulsion_range);
        if (const Entry* d = r.find("drift")) m.drift = parse_affine(*d);
        s.field = m;
    } else if (kind.value == "congestion") {
        CongestionParams c;
        c.epsilon = r.number("epsilon", c.epsilon);
        c.kappa = r.number("kappa", c.kappa);
        c.beta = r.number("beta", c.beta);
        if (const Entry* d = r.find("drift")) c.drift = parse_drift(*d, true);
        s.field = c;
    } else if (kind.value == "drift") {
        CustomDriftParams c;
        if (const Entry* d = r.find("drift")) c.drift = parse_affine(*d);
        s.field = c;
    } else {
        parse_error(kind.line, kind.value_col, "unknown field kind '" + kind.value + "' (morse, congestion, drift)");
    }
}

MovingPart read_obstacle(Reader& r) {
    const Entry& shape = r.require("shape");
    MovingPart part;
    part.motion.velocity = r.vec("velocity", {});
    part.motion.angular_rate = r.number("angular_rate", 0.0);
    if (shape.value == "ellipse-complement") {
        EllipseComplement e;
        e.center = r.vec("center", e.center);
        const Vec2 axes = r.vec("axes", {e.a1, e.a2});
        e.a1 = axes.x;
        e.a2 = axes.y;
        e.angle = r.number("angle", e.angle);
        part.shape = e;
    } else if (shape.value == "ball-complement") {
        BallComplement b;
        b.center = r.vec("center", b.center);
        b.radius = r.number("radius", b.radius);
        part.shape = b;
    } else if (shape.value == "ball") {
        Ball b;
        b.center = r.vec("center", b.center);
        b.radius = r.number("radius", b.radius);
        part.shape = b;
    } else if (shape.value == "half-space") {
        HalfSpace h;
        h.normal = r.vec("normal", h.normal);
        h.offset = r.number("offset", h.offset);
        part.shape = h;
    } else if (shape.value == "box") {
        Box b;
        b.lo = r.vec("lo", b.lo);
        b.hi = r.vec("hi", b.hi);
        part.shape = b;
    } else {
        parse_error(shape.line, shape.value_col,
                    "unknown obstacle shape '" + shape.value +
                        "' (ellipse-complement, ball-complement, ball, half-space, box)");
    }
    return part;
}

std::vector<Vec2> read_points(const Entry& e) {
    std::vector<Vec2> pts;
    std::size_t start = 0;
    while (start <= e.value.size()) {
        const std::size_t end = std::min(e.value.find(';', start), e.value.size());
        const std::string chunk = e.value.substr(start, end - start);
        if (chunk.find_first_not_of(" \t") != std::string::npos) {
            const auto v = Reader::numbers({e.key, chunk, e.line, e.key_col, e.value_col + start}, 2);
            pts.push_back({v[0], v[1]});
        }
        start = end + 1;
    }
    if (pts.empty()) parse_error(e.line, e.value_col, "point list is empty");
    return pts;
}

void read_initial(Reader& r, Scenario& s) {
    const Entry& kind = r.require("kind");
    InitialSpec& in = s.initial;
    in = InitialSpec{};
    if (kind.value == "gaussian") {
        in.kind = InitialKind::Gaussian;
        in.mean = r.vec("mean", in.mean);
        if (const Entry* c = r.find("covariance")) {
            const auto v = Reader::numbers(*c, 4);
            in.covariance = {v[0], v[1], v[2], v[3]};
        }
    } else if (kind.value == "uniform") {
        in.kind = InitialKind::Uniform;
        in.box.lo = r.vec("lo", in.box.lo);
        in.box.hi = r.vec("hi", in.box.hi);
        in.stratified = r.flag("stratified", false);
    } else if (kind.value == "points") {
        in.kind = InitialKind::Points;
        in.points = read_points(r.require("points"));
    } else {
        parse_error(kind.line, kind.value_col, "unknown initial kind '" + kind.value + "' (gaussian, uniform, points)");
    }
    s.particles = r.count("particles", in.kind == InitialKind::Points ? in.points.size() : s.particles);
}

void read_run(Reader& r, Scenario& s) {
    if (const Entry* n = r.find("name")) s.name = n->value;
    s.tau = Reader::numbers(r.require("tau"), 1)[0];
    s.horizon = Reader::numbers(r.require("horizon"), 1)[0];
    s.seed = r.u64("seed", s.seed);
    s.substeps = r.count("substeps", s.substeps);
    if (const Entry* e = r.find("integrator")) {
        if (e->value == "rk4") s.integrator = Integrator::RK4;
        else if (e->value == "euler") s.integrator = Integrator::Euler;
        else parse_error(e->line, e->value_col, "unknown integrator '" + e->value + "' (euler, rk4)");
    }
    if (const Entry* e = r.find("workspace")) {
        const auto v = Reader::numbers(*e, 4);
        s.workspace = {{v[0], v[1]}, {v[2], v[3]}};
    }
    s.reach = r.auto_number("reach");
    s.lipschitz = r.auto_number("lipschitz");
    if (const Entry* e = r.find("validation")) {
        if (e->value == "strict") s.validation = Validation::Strict;
        else if (e->value == "advisory") s.validation = Validation::Advisory;
        else parse_error(e->line, e->value_col, "unknown validation mode '" + e->value + "' (strict, advisory)");
    }
}

void read_region(Reader& r, Scenario& s) {
    const Entry& kind = r.require("kind");
    s.region = RegionSpec{};
    if (kind.value == "half-space") {
        s.region.kind = RegionKind::HalfSpace;
        s.region.normal = r.vec("normal", s.region.normal);
        s.region.offset = r.number("offset", s.region.offset);
    } else if (kind.value == "box") {
        s.region.kind = RegionKind::Box;
        s.region.box.lo = r.vec("lo", s.region.box.lo);
        s.region.box.hi = r.vec("hi", s.region.box.hi);
    } else {
        parse_error(kind.line, kind.value_col, "unknown region kind '" + kind.value + "' (half-space, box)");
    }
}

// ---- writing ----------------------------------------------------------------

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
std::string fmt(Vec2 v) { return fmt(v.x) + " " + fmt(v.y); }

std::string fmt_drift(const Drift& d) {
    if (std::holds_alternative<ParabolicDrift>(d)) return "parabolic";
    const auto& a = std::get<AffineDrift>(d);
    if (a.matrix == std::array<double, 4>{0.0, 0.0, 0.0, 0.0}) return "constant " + fmt(a.offset);
    return "affine " + fmt(a.matrix[0]) + " " + fmt(a.matrix[1]) + " " + fmt(a.matrix[2]) + " " + fmt(a.matrix[3]) +
           " " + fmt(a.offset);
}

void write_motion(std::ostream& os, const Motion& m) {
    os << "velocity = " << fmt(m.velocity) << "\n";
    os << "angular_rate = " << fmt(m.angular_rate) << "\n";
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    const std::vector<Section> sections = tokenize(text);
    Scenario s;
    s.name.clear();
    std::set<std::string> once;
    bool have_field = false;
    bool have_run = false;
    bool have_initial = false;
    for (const Section& sec : sections) {
        if (sec.name != "obstacle" && !once.insert(sec.name).second)
            parse_error(sec.line, 1, "section [" + sec.name + "] appears twice");
        Reader r(sec);
        if (sec.name == "field") {
            read_field(r, s);
            have_field = true;
        } else if (sec.name == "obstacle") {
            s.obstacles.push_back(read_obstacle(r));
        } else if (sec.name == "wall") {
            WallWithExit w;
            w.gap = r.number("gap", w.gap);
            w.thickness = r.number("thickness", w.thickness);
            w.extent = r.number("extent", w.extent);
            s.wall = w;
        } else if (sec.name == "initial") {
            read_initial(r, s);
            have_initial = true;
        } else if (sec.name == "run") {
            read_run(r, s);
            have_run = true;
        } else if (sec.name == "region") {
            read_region(r, s);
        } else {
            parse_error(sec.line, 2,
                        "unknown section [" + sec.name + "] (field, obstacle, wall, initial, run, region)");
        }
        r.finish();
    }
    if (!have_field) parse_error(1, 1, "missing [field] section");
    if (!have_initial) parse_error(1, 1, "missing [initial] section");
    if (!have_run) parse_error(1, 1, "missing [run] section");
    return s;
}

std::string serialize(const Scenario& s) {
    std::ostringstream os;
    os << "[field]\n";
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, MorseParams>) {
                os << "kind = morse\nL = " << fmt(s.L) << "\n";
                os << "attraction_strength = " << fmt(f.attraction_strength) << "\n";
                os << "repulsion_strength = " << fmt(f.repulsion_strength) << "\n";
                os << "attraction_range = " << fmt(f.attraction_range) << "\n";
                os << "repulsion_range = " << fmt(f.repulsion_range) << "\n";
                os << "drift = " << fmt_drift(f.drift) << "\n";
            } else if constexpr (std::is_same_v<F, CongestionParams>) {
                os << "kind = congestion\nL = " << fmt(s.L) << "\n";
                os << "epsilon = " << fmt(f.epsilon) << "\n";
                os << "kappa = " << fmt(f.kappa) << "\n";
                os << "beta = " << fmt(f.beta) << "\n";
                os << "drift = " << fmt_drift(f.drift) << "\n";
            } else {
                os << "kind = drift\nL = " << fmt(s.L) << "\n";
                os << "drift = " << fmt_drift(f.drift) << "\n";
            }
        },
        s.field);

    for (const MovingPart& p : s.obstacles) {
        os << "\n[obstacle]\n";
        std::visit(
            [&](const auto& g) {
                using G = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<G, EllipseComplement>) {
                    os << "shape = ellipse-complement\ncenter = " << fmt(g.center) << "\naxes = " << fmt(g.a1) << " "
                       << fmt(g.a2) << "\nangle = " << fmt(g.angle) << "\n";
                } else if constexpr (std::is_same_v<G, BallComplement>) {
                    os << "shape = ball-complement\ncenter = " << fmt(g.center) << "\nradius = " << fmt(g.radius)
                       << "\n";
                } else if constexpr (std::is_same_v<G, Ball>) {
                    os << "shape = ball\ncenter = " << fmt(g.center) << "\nradius = " << fmt(g.radius) << "\n";
                } else if constexpr (std::is_same_v<G, HalfSpace>) {
                    os << "shape = half-space\nnormal = " << fmt(g.normal) << "\noffset = " << fmt(g.offset) << "\n";
                } else if constexpr (std::is_same_v<G, Box>) {
                    os << "shape = box\nlo = " << fmt(g.lo) << "\nhi = " << fmt(g.hi) << "\n";
                } else {
                    fail(ErrorCode::InvalidArgument, "walls belong in the [wall] section");
                }
            },
            p.shape);
        write_motion(os, p.motion);
    }

    if (s.wall) {
        os << "\n[wall]\ngap = " << fmt(s.wall->gap) << "\nthickness = " << fmt(s.wall->thickness)
           << "\nextent = " << fmt(s.wall->extent) << "\n";
    }

    os << "\n[initial]\n";
    const InitialSpec& in = s.initial;
    switch (in.kind) {
        case InitialKind::Gaussian:
            os << "kind = gaussian\nmean = " << fmt(in.mean) << "\ncovariance = " << fmt(in.covariance[0]) << " "
               << fmt(in.covariance[1]) << " " << fmt(in.covariance[2]) << " " << fmt(in.covariance[3]) << "\n";
            break;
        case InitialKind::Uniform:
            os << "kind = uniform\nlo = " << fmt(in.box.lo) << "\nhi = " << fmt(in.box.hi)
               << "\nstratified = " << (in.stratified ? "true" : "false") << "\n";
            break;
        case InitialKind::Points:
            os << "kind = points\npoints = ";
            for (std::size_t i = 0; i < in.points.size(); ++i) os << (i ? "; " : "") << fmt(in.points[i]);
            os << "\n";
            break;
    }
    os << "particles = " << s.particles << "\n";

    os << "\n[run]\n";
    if (!s.name.empty()) os << "name = " << s.name << "\n";
    os << "tau = " << fmt(s.tau) << "\nhorizon = " << fmt(s.horizon) << "\nseed = " << s.seed
       << "\nsubsteps = " << s.substeps << "\nintegrator = " << to_string(s.integrator)
       << "\nworkspace = " << fmt(s.workspace.lo) << " " << fmt(s.workspace.hi)
       << "\nreach = " << (s.reach ? fmt(*s.reach) : "auto")
       << "\nlipschitz = " << (s.lipschitz ? fmt(*s.lipschitz) : "auto")
       << "\nvalidation = " << (s.validation == Validation::Strict ? "strict" : "advisory") << "\n";

    os << "\n[region]\n";
    if (s.region.kind == RegionKind::HalfSpace)
        os << "kind = half-space\nnormal = " << fmt(s.region.normal) << "\noffset = " << fmt(s.region.offset) << "\n";
    else
        os << "kind = box\nlo = " << fmt(s.region.box.lo) << "\nhi = " << fmt(s.region.box.hi) << "\n";
    return os.str();
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    Scenario s = parse_scenario(buf.str());
    validate(s);
    return s;
}

}  // namespace msweep
