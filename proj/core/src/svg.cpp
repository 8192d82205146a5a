#include "starnav/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "starnav/diffeo.hpp"

namespace starnav {

namespace {

struct Panel {
    double offset_x = 0.0;  // pixel offset of this panel
    double scale = 1.0;
    double min_x = 0.0, max_y = 0.0;
    double pad = 12.0;

    double px(double wx) const { return offset_x + pad + (wx - min_x) * scale; }
    double py(double wy) const { return pad + (max_y - wy) * scale; }
};

std::string pts(const Panel& p, std::span<const Vec2> v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << " ";
        os << p.px(v[i].x) << "," << p.py(v[i].y);
    }
    return os.str();
}

void polygon(std::ostream& os, const Panel& p, std::span<const Vec2> v, const char* fill,
             const char* stroke) {
    os << "  <polygon points=\"" << pts(p, v) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
       << "\" stroke-width=\"1\"/>\n";
}

void polyline(std::ostream& os, const Panel& p, std::span<const Vec2> v, const char* stroke,
              double width) {
    if (v.size() < 2) return;
    os << "  <polyline points=\"" << pts(p, v) << "\" fill=\"none\" stroke=\"" << stroke
       << "\" stroke-width=\"" << width << "\"/>\n";
}

void circle(std::ostream& os, const Panel& p, Vec2 c, double r_world, const char* fill,
            const char* stroke) {
    os << "  <circle cx=\"" << p.px(c.x) << "\" cy=\"" << p.py(c.y) << "\" r=\"" << r_world * p.scale
       << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
}

void dot(std::ostream& os, const Panel& p, Vec2 c, double r_px, const char* fill) {
    os << "  <circle cx=\"" << p.px(c.x) << "\" cy=\"" << p.py(c.y) << "\" r=\"" << r_px
       << "\" fill=\"" << fill << "\"/>\n";
}

void label(std::ostream& os, const Panel& p, const char* text) {
    os << "  <text x=\"" << p.offset_x + p.pad << "\" y=\"" << p.pad - 2
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << text << "</text>\n";
}

}  // namespace

void write_run_svg(std::ostream& os, const Scenario& scenario, const World& world,
                   const SemanticMap& final_map, const TrajectoryLog& log) {
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (Vec2 v : scenario.workspace) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    const double panel_w = 360.0, pad = 12.0;
    double scale = (panel_w - 2 * pad) / std::max(max_x - min_x, 1e-9);
    double panel_h = (max_y - min_y) * scale + 2 * pad + 6.0;

    Panel panels[3];
    for (int i = 0; i < 3; ++i) {
        panels[i] = Panel{i * panel_w, scale, min_x, max_y, pad};
    }

    std::vector<Vec2> path;
    path.reserve(log.rows.size());
    for (const LogRow& r : log.rows) path.push_back(r.x);
    std::vector<Vec2> model_path;
    model_path.reserve(path.size());
    for (Vec2 x : path) model_path.push_back(evaluate_diffeo(x, final_map).y);

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 3 * panel_w << "\" height=\""
       << panel_h << "\" viewBox=\"0 0 " << 3 * panel_w << " " << panel_h << "\">\n";
    os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Physical layer: authored geometry, robot disk, trajectory.
    {
        const Panel& p = panels[0];
        label(os, p, "physical");
        polygon(os, p, scenario.workspace, "none", "black");
        for (const FamiliarPlacement& fp : world.placements) {
            const CatalogueEntry& e = world.catalogue.entries[fp.entry_index];
            Mat2 rot = Mat2::rotation(fp.angle_rad);
            std::vector<Vec2> v;
            v.reserve(e.raw_vertices.size());
            for (Vec2 b : e.raw_vertices) v.push_back(fp.center + rot * (b - e.star_center));
            polygon(os, p, v, "#555555", "#333333");
        }
        for (const ConvexObstacle& obs : world.unknown_raw) {
            if (const Disk* d = std::get_if<Disk>(&obs.shape)) {
                circle(os, p, d->center, d->radius, "#bbbbbb", "#999999");
            } else {
                polygon(os, p, std::get<ConvexPolygon>(obs.shape).vertices, "#bbbbbb", "#999999");
            }
        }
        polyline(os, p, path, "#1f6fd6", 1.5);
        if (!path.empty()) circle(os, p, path.back(), world.robot_radius, "none", "#1f6fd6");
        dot(os, p, scenario.robot.start, 3.0, "#1f6fd6");
        dot(os, p, world.goal, 3.5, "#d62728");
    }

    // Mapped layer: discovered dilated stars and the last sensed fragments.
    {
        const Panel& p = panels[1];
        label(os, p, "mapped");
        polygon(os, p, world.boundary.vertices, "none", "black");
        for (const PlacedObstacle& star : final_map.stars) {
            polygon(os, p, star.world_vertices, "#111111", "#111111");
        }
        for (const Fragment& frag : final_map.fragments) {
            for (Vec2 q : frag.points) dot(os, p, q, 1.2, "#999999");
        }
        polyline(os, p, path, "#1f6fd6", 1.5);
        dot(os, p, world.goal, 3.5, "#d62728");
    }

    // Model layer: disks, fragments, pushed-forward trajectory.
    {
        const Panel& p = panels[2];
        label(os, p, "model");
        polygon(os, p, world.boundary.vertices, "none", "black");
        for (const PlacedObstacle& star : final_map.stars) {
            circle(os, p, star.center, star.rho, "#111111", "#111111");
        }
        for (const Fragment& frag : final_map.fragments) {
            for (Vec2 q : frag.points) dot(os, p, q, 1.2, "#999999");
        }
        polyline(os, p, model_path, "#2ca02c", 1.5);
        dot(os, p, world.goal, 3.5, "#d62728");
    }

    os << "</svg>\n";
}

}  // namespace starnav
