#include "starnav/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace starnav {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, int line) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError(line, "expected a number, got '" + tok + "'");
    }
    if (pos != tok.size()) throw ParseError(line, "trailing characters in number '" + tok + "'");
    return v;
}

Vec2 parse_vec(const std::string& tok, int line) {
    if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')')
        throw ParseError(line, "expected a point '(x,y)', got '" + tok + "'");
    size_t comma = tok.find(',');
    if (comma == std::string::npos) throw ParseError(line, "point is missing a comma: '" + tok + "'");
    return {parse_number(tok.substr(1, comma - 1), line),
            parse_number(tok.substr(comma + 1, tok.size() - comma - 2), line)};
}

std::vector<Vec2> parse_vec_list(const std::vector<std::string>& toks, size_t first, int line) {
    std::vector<Vec2> out;
    for (size_t i = first; i < toks.size(); ++i) out.push_back(parse_vec(toks[i], line));
    return out;
}

// key=value option token
std::pair<std::string, std::string> parse_kv(const std::string& tok, int line) {
    size_t eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key=value, got '" + tok + "'");
    return {tok.substr(0, eq), tok.substr(eq + 1)};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt(Vec2 v) { return "(" + fmt(v.x) + "," + fmt(v.y) + ")"; }

}  // namespace

SimState Scenario::start_state() const {
    return SimState{robot.start, robot.heading_deg * kDegToRad, 0.0};
}

Scenario parse_scenario(std::istream& in) {
    Scenario s;
    bool saw_workspace = false, saw_robot = false, saw_goal = false;
    ShapeSpec* open_shape = nullptr;

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (size_t hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::string text = trim(raw);
        if (text.empty()) continue;

        if (open_shape) {
            if (text == "end") {
                if (open_shape->vertices.size() < 3)
                    throw ParseError(line, "shape '" + open_shape->name + "' needs >= 3 vertices");
                open_shape = nullptr;
                continue;
            }
            size_t colon = text.find(':');
            if (colon == std::string::npos)
                throw ParseError(line, "expected 'key: value' inside shape block");
            std::string key = trim(text.substr(0, colon));
            std::vector<std::string> toks = split_ws(text.substr(colon + 1));
            if (key == "epsilon") {
                if (toks.size() != 1) throw ParseError(line, "epsilon takes one number");
                open_shape->epsilon = parse_number(toks[0], line);
            } else if (key == "center") {
                if (toks.size() != 1) throw ParseError(line, "center takes one point");
                open_shape->star_center = parse_vec(toks[0], line);
            } else if (key == "vertices") {
                open_shape->vertices = parse_vec_list(toks, 0, line);
            } else {
                throw ParseError(line, "unknown shape key '" + key + "'");
            }
            continue;
        }

        size_t colon = text.find(':');
        if (colon == std::string::npos) throw ParseError(line, "expected 'directive: ...'");
        std::string key = trim(text.substr(0, colon));
        std::vector<std::string> toks = split_ws(text.substr(colon + 1));

        if (key == "workspace") {
            s.workspace = parse_vec_list(toks, 0, line);
            if (s.workspace.size() < 3) throw ParseError(line, "workspace needs >= 3 vertices");
            saw_workspace = true;
        } else if (key == "robot") {
            for (const std::string& tok : toks) {
                auto [k, v] = parse_kv(tok, line);
                if (k == "radius") {
                    s.robot.radius = parse_number(v, line);
                } else if (k == "type") {
                    if (v == "full") {
                        s.robot.type = RobotType::kFullyActuated;
                    } else if (v == "diffdrive") {
                        s.robot.type = RobotType::kDiffDrive;
                    } else {
                        throw ParseError(line, "robot type must be full or diffdrive");
                    }
                } else if (k == "start") {
                    s.robot.start = parse_vec(v, line);
                } else if (k == "heading") {
                    s.robot.heading_deg = parse_number(v, line);
                } else {
                    throw ParseError(line, "unknown robot key '" + k + "'");
                }
            }
            saw_robot = true;
        } else if (key == "goal") {
            if (toks.size() != 1) throw ParseError(line, "goal takes one point");
            s.goal = parse_vec(toks[0], line);
            saw_goal = true;
        } else if (key == "sensor") {
            for (const std::string& tok : toks) {
                auto [k, v] = parse_kv(tok, line);
                if (k == "range") {
                    s.sensor_range = parse_number(v, line);
                } else if (k == "rays") {
                    s.params.n_rays = static_cast<int>(parse_number(v, line));
                } else {
                    throw ParseError(line, "unknown sensor key '" + k + "'");
                }
            }
        } else if (key == "params") {
            for (const std::string& tok : toks) {
                auto [k, v] = parse_kv(tok, line);
                if (k == "k") {
                    s.params.k = parse_number(v, line);
                } else if (k == "p") {
                    s.params.p = static_cast<int>(parse_number(v, line));
                    if (s.params.p < 2 || s.params.p % 2 != 0)
                        throw ParseError(line, "p must be even and >= 2");
                } else if (k == "dt_max") {
                    s.params.dt_max = parse_number(v, line);
                } else if (k == "t_max") {
                    s.params.t_max = parse_number(v, line);
                } else if (k == "goal_tol") {
                    s.params.goal_tol = parse_number(v, line);
                } else if (k == "rvirt_factor") {
                    s.params.r_virt_factor = parse_number(v, line);
                } else if (k == "integrator") {
                    if (v != "rk4")
                        throw ParseError(line, "only the rk4 integrator is supported");
                    s.params.integrator = v;
                } else {
                    throw ParseError(line, "unknown param '" + k + "'");
                }
            }
        } else if (key == "shape") {
            if (toks.size() != 1) throw ParseError(line, "shape takes one name");
            s.shapes.push_back(ShapeSpec{toks[0], {}, {}, 0.3});
            open_shape = &s.shapes.back();
        } else if (key == "place") {
            PlacementSpec p;
            bool saw_name = false;
            for (const std::string& tok : toks) {
                auto [k, v] = parse_kv(tok, line);
                if (k == "shape") {
                    p.shape = v;
                    saw_name = true;
                } else if (k == "center") {
                    p.center = parse_vec(v, line);
                } else if (k == "angle") {
                    p.angle_deg = parse_number(v, line);
                } else {
                    throw ParseError(line, "unknown place key '" + k + "'");
                }
            }
            if (!saw_name) throw ParseError(line, "place needs shape=<name>");
            s.placements.push_back(std::move(p));
        } else if (key == "unknown") {
            if (toks.empty()) throw ParseError(line, "unknown needs disk or poly");
            UnknownSpec u;
            if (toks[0] == "disk") {
                u.is_disk = true;
                for (size_t i = 1; i < toks.size(); ++i) {
                    auto [k, v] = parse_kv(toks[i], line);
                    if (k == "center") {
                        u.center = parse_vec(v, line);
                    } else if (k == "radius") {
                        u.radius = parse_number(v, line);
                    } else {
                        throw ParseError(line, "unknown disk key '" + k + "'");
                    }
                }
                if (u.radius <= 0.0) throw ParseError(line, "disk radius must be > 0");
            } else if (toks[0] == "poly") {
                u.is_disk = false;
                u.vertices = parse_vec_list(toks, 1, line);
                if (u.vertices.size() < 3) throw ParseError(line, "poly needs >= 3 vertices");
            } else {
                throw ParseError(line, "unknown obstacle kind '" + toks[0] + "'");
            }
            s.unknown.push_back(std::move(u));
        } else {
            throw ParseError(line, "unknown directive '" + key + "'");
        }
    }
    if (open_shape) throw ParseError(line, "shape block not closed with 'end'");
    if (!saw_workspace) throw ParseError(line, "missing workspace");
    if (!saw_robot) throw ParseError(line, "missing robot");
    if (!saw_goal) throw ParseError(line, "missing goal");
    for (const PlacementSpec& p : s.placements) {
        bool found = false;
        for (const ShapeSpec& sh : s.shapes) found = found || sh.name == p.shape;
        if (!found) throw ParseError(line, "placement references unknown shape '" + p.shape + "'");
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file: " + path);
    return parse_scenario(in);
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream os;
    os << "workspace:";
    for (Vec2 v : s.workspace) os << " " << fmt(v);
    os << "\n";
    os << "robot: radius=" << fmt(s.robot.radius) << " type="
       << (s.robot.type == RobotType::kFullyActuated ? "full" : "diffdrive")
       << " start=" << fmt(s.robot.start) << " heading=" << fmt(s.robot.heading_deg) << "\n";
    os << "goal: " << fmt(s.goal) << "\n";
    os << "sensor: range=" << fmt(s.sensor_range) << " rays=" << s.params.n_rays << "\n";
    os << "params: k=" << fmt(s.params.k) << " p=" << s.params.p << " dt_max=" << fmt(s.params.dt_max)
       << " t_max=" << fmt(s.params.t_max) << " goal_tol=" << fmt(s.params.goal_tol)
       << " rvirt_factor=" << fmt(s.params.r_virt_factor) << " integrator=" << s.params.integrator
       << "\n";
    for (const ShapeSpec& sh : s.shapes) {
        os << "shape: " << sh.name << "\n";
        os << "  epsilon: " << fmt(sh.epsilon) << "\n";
        os << "  center: " << fmt(sh.star_center) << "\n";
        os << "  vertices:";
        for (Vec2 v : sh.vertices) os << " " << fmt(v);
        os << "\nend\n";
    }
    for (const PlacementSpec& p : s.placements) {
        os << "place: shape=" << p.shape << " center=" << fmt(p.center)
           << " angle=" << fmt(p.angle_deg) << "\n";
    }
    for (const UnknownSpec& u : s.unknown) {
        if (u.is_disk) {
            os << "unknown: disk center=" << fmt(u.center) << " radius=" << fmt(u.radius) << "\n";
        } else {
            os << "unknown: poly";
            for (Vec2 v : u.vertices) os << " " << fmt(v);
            os << "\n";
        }
    }
    return os.str();
}

World build_world(const Scenario& s) {
    World w;
    w.robot_radius = s.robot.radius;
    w.sensor_range = s.sensor_range;
    w.goal = s.goal;

    if (signed_area(s.workspace) <= 0.0) throw DegenerateInput("workspace must be CCW");
    w.boundary_raw = ConvexPolygon{s.workspace};
    w.boundary = erode_convex(w.boundary_raw, s.robot.radius);

    for (const ShapeSpec& sh : s.shapes) {
        w.catalogue.entries.push_back(build_catalogue_entry(sh.name, sh.vertices, sh.star_center,
                                                            sh.epsilon, s.params.p, s.robot.radius));
    }
    for (const PlacementSpec& p : s.placements) {
        const CatalogueEntry* entry = w.catalogue.find(p.shape);
        if (!entry) throw DegenerateInput("placement references unknown shape " + p.shape);
        size_t entry_index = static_cast<size_t>(entry - w.catalogue.entries.data());
        double angle = p.angle_deg * kDegToRad;
        w.placements.push_back(FamiliarPlacement{p.shape, entry_index, angle, p.center});
        w.familiar.emplace_back(entry->tree, Mat2::rotation(angle), p.center, entry->epsilon,
                                entry->rho, entry->delta);
    }
    for (const UnknownSpec& u : s.unknown) {
        if (u.is_disk) {
            w.unknown_raw.push_back(ConvexObstacle::disk(u.center, u.radius));
            w.unknown.push_back(ConvexObstacle::disk(u.center, u.radius + s.robot.radius));
        } else {
            if (signed_area(u.vertices) <= 0.0)
                throw DegenerateInput("unknown polygon must be CCW");
            w.unknown_raw.push_back(ConvexObstacle::polygon(u.vertices));
            w.unknown.push_back(
                ConvexObstacle::polygon(dilate_polygon(u.vertices, s.robot.radius)));
        }
    }
    return w;
}

}  // namespace starnav
