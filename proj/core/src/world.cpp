#include "starnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace starnav {

const CatalogueEntry* Catalogue::find(const std::string& name) const {
    for (const CatalogueEntry& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

CatalogueEntry build_catalogue_entry(std::string name, std::vector<Vec2> raw_vertices,
                                     Vec2 star_center, double epsilon, int p, double robot_radius) {
    if (epsilon <= 0.0) throw DegenerateInput("catalogue epsilon must be > 0");
    CatalogueEntry e;
    e.name = std::move(name);
    e.raw_vertices = std::move(raw_vertices);
    e.star_center = star_center;
    e.epsilon = epsilon;
    e.p = p;
    std::vector<Vec2> dilated = dilate_polygon(e.raw_vertices, robot_radius);
    e.tree = std::make_shared<const ObstacleTree>(build_tree(dilated, p, star_center));
    e.rho = choose_rho(e.tree->vertices(), star_center);
    e.delta = sample_band(*e.tree, epsilon).delta;
    return e;
}

BandSamples sample_band(const ObstacleTree& tree, double epsilon, int target_samples) {
    const std::vector<Vec2>& v = tree.vertices();
    size_t n = v.size();
    const double offsets[] = {1e-4, 0.25 * epsilon, 0.5 * epsilon, 0.75 * epsilon, epsilon};
    int per_edge = std::max(4, static_cast<int>(target_samples / (n * std::size(offsets))));

    BandSamples out;
    out.delta = std::numeric_limits<double>::infinity();
    auto consider = [&](Vec2 p) {
        double beta = tree.value(p);
        if (beta < 0.0 || beta > epsilon) return;
        for (Vec2 vert : v) {
            if (distance(p, vert) < 10.0 * tree.vertex_guard()) return;
        }
        out.points.push_back(p);
        Vec2 grad = tree.jet(p).gradient;
        out.delta = std::min(out.delta, (p - tree.star_center_body()).dot(grad));
    };

    for (size_t i = 0; i < n; ++i) {
        Vec2 a = v[i], b = v[(i + 1) % n];
        Vec2 outward = -(b - a).perp().normalized();
        for (int k = 0; k < per_edge; ++k) {
            double t = (k + 0.5) / per_edge;
            Vec2 base = a + t * (b - a);
            for (double d : offsets) consider(base + d * outward);
        }
        // Corner fans cover the wedge beyond each vertex.
        for (int k = 1; k < 8; ++k) {
            double ang = 2.0 * M_PI * k / 8.0;
            Vec2 dir{std::cos(ang), std::sin(ang)};
            consider(a + (0.5 * epsilon) * dir);
            consider(a + epsilon * dir);
        }
    }
    if (out.points.empty()) out.delta = 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// World queries
// ---------------------------------------------------------------------------

double World::min_beta(Vec2 x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const PlacedObstacle& star : familiar) best = std::min(best, star.value(x));
    return best;
}

namespace {

double obstacle_clearance(Vec2 x, const ConvexObstacle& obs) {
    if (const Disk* d = std::get_if<Disk>(&obs.shape)) return distance(x, d->center) - d->radius;
    const ConvexPolygon& poly = std::get<ConvexPolygon>(obs.shape);
    double d = distance_to_polygon_boundary(x, poly.vertices);
    return poly.contains(x) ? -d : d;
}

}  // namespace

double World::unknown_clearance(Vec2 x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const ConvexObstacle& obs : unknown) best = std::min(best, obstacle_clearance(x, obs));
    return best;
}

double World::boundary_clearance(Vec2 x) const {
    double d = distance_to_polygon_boundary(x, boundary.vertices);
    return boundary.contains(x) ? d : -d;
}

bool World::in_freespace(Vec2 x, double margin) const {
    return boundary_clearance(x) >= margin && unknown_clearance(x) >= margin && min_beta(x) >= margin;
}

// ---------------------------------------------------------------------------
// Sensing
// ---------------------------------------------------------------------------

std::vector<SenseHit> sense(Vec2 x, const World& world, int n_rays) {
    std::vector<SenseHit> hits;
    for (int i = 0; i < n_rays; ++i) {
        double ang = 2.0 * M_PI * i / n_rays;
        Vec2 dir{std::cos(ang), std::sin(ang)};
        std::optional<double> best;
        SourceId src;
        for (size_t f = 0; f < world.familiar.size(); ++f) {
            if (auto t = ray_polygon(x, dir, world.familiar[f].world_vertices)) {
                if (!best || *t < *best) {
                    best = t;
                    src = {SourceId::Kind::kFamiliar, f};
                }
            }
        }
        for (size_t u = 0; u < world.unknown.size(); ++u) {
            const ConvexObstacle& obs = world.unknown[u];
            std::optional<double> t;
            if (const Disk* d = std::get_if<Disk>(&obs.shape)) {
                t = ray_disk(x, dir, *d);
            } else {
                t = ray_polygon(x, dir, std::get<ConvexPolygon>(obs.shape).vertices);
            }
            if (t && (!best || *t < *best)) {
                best = t;
                src = {SourceId::Kind::kUnknown, u};
            }
        }
        if (best && *best <= world.sensor_range) {
            hits.push_back({x + (*best) * dir, *best, src, i});
        }
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Semantic map
// ---------------------------------------------------------------------------

bool SemanticMap::knows(size_t familiar_index) const {
    return std::find(star_sources.begin(), star_sources.end(), familiar_index) != star_sources.end();
}

std::vector<Fragment> group_hits(std::span<const SenseHit> hits, int n_rays,
                                 bool familiar_as_unknown) {
    std::map<std::pair<int, size_t>, std::vector<std::pair<int, Vec2>>> groups;  // (ray, point)
    for (const SenseHit& hit : hits) {
        if (hit.source.kind == SourceId::Kind::kFamiliar && !familiar_as_unknown) continue;
        groups[{static_cast<int>(hit.source.kind), hit.source.index}].emplace_back(hit.ray,
                                                                                   hit.point);
    }
    std::vector<Fragment> fragments;
    for (auto& [key, pts] : groups) {
        // Keep the points ordered along the obstacle boundary. Ray order is
        // angular order; a fragment spanning the 0/2pi seam is rotated so it
        // starts after the largest ray gap.
        size_t split = 0;
        int largest_gap = pts.front().first + n_rays - pts.back().first;
        for (size_t i = 1; i < pts.size(); ++i) {
            int gap = pts[i].first - pts[i - 1].first;
            if (gap > largest_gap) {
                largest_gap = gap;
                split = i;
            }
        }
        Fragment frag{key.second, {}};
        frag.points.reserve(pts.size());
        for (size_t i = 0; i < pts.size(); ++i)
            frag.points.push_back(pts[(split + i) % pts.size()].second);
        fragments.push_back(std::move(frag));
    }
    return fragments;
}

void update_map(SemanticMap& map, std::span<const SenseHit> hits, const World& world) {
    int n_rays = 0;
    for (const SenseHit& hit : hits) {
        n_rays = std::max(n_rays, hit.ray + 1);
        if (hit.source.kind == SourceId::Kind::kFamiliar && !map.knows(hit.source.index)) {
            map.stars.push_back(world.familiar[hit.source.index]);
            map.star_sources.push_back(hit.source.index);
        }
    }
    map.fragments = group_hits(hits, n_rays, false);
}

ModelLayer model_layer(const SemanticMap& map) {
    ModelLayer ml;
    ml.disks.reserve(map.stars.size());
    for (const PlacedObstacle& star : map.stars) ml.disks.push_back(Disk{star.center, star.rho});
    ml.fragments = map.fragments;
    return ml;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const ValidationEntry& e) { return e.pass; });
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const ValidationEntry& e : entries) {
        os << (e.pass ? "PASS" : "FAIL") << "  [" << e.condition << "] " << e.subject;
        if (!e.detail.empty()) os << " — " << e.detail;
        os << "\n";
    }
    return os.str();
}

namespace {

std::vector<Vec2> boundary_samples(const ConvexObstacle& obs, int n) {
    std::vector<Vec2> pts;
    if (const Disk* d = std::get_if<Disk>(&obs.shape)) {
        for (int i = 0; i < n; ++i) {
            double a = 2.0 * M_PI * i / n;
            pts.push_back(d->center + d->radius * Vec2{std::cos(a), std::sin(a)});
        }
    } else {
        const std::vector<Vec2>& v = std::get<ConvexPolygon>(obs.shape).vertices;
        int per_edge = std::max(2, static_cast<int>(n / v.size()));
        for (size_t i = 0; i < v.size(); ++i) {
            Vec2 a = v[i], b = v[(i + 1) % v.size()];
            for (int k = 0; k < per_edge; ++k) pts.push_back(a + ((k + 0.5) / per_edge) * (b - a));
        }
    }
    return pts;
}

}  // namespace

ValidationReport validate_assumptions(const World& world) {
    ValidationReport report;
    auto add = [&](std::string cond, std::string subject, bool pass, std::string detail = "") {
        report.entries.push_back({std::move(cond), std::move(subject), pass, std::move(detail)});
    };

    size_t m = world.familiar.size();
    std::vector<std::vector<Vec2>> bands(m);  // world-frame band samples per star
    for (size_t i = 0; i < m; ++i) {
        const PlacedObstacle& star = world.familiar[i];
        BandSamples bs = sample_band(*star.tree, star.epsilon);
        bands[i].reserve(bs.points.size());
        for (Vec2 b : bs.points) bands[i].push_back(star.to_world(b));
    }

    // (a) thickened boundaries of any two stars do not overlap
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = i + 1; j < m; ++j) {
            bool ok = true;
            double worst = std::numeric_limits<double>::infinity();
            for (Vec2 p : bands[i]) {
                double bj = world.familiar[j].value(p);
                worst = std::min(worst, bj - world.familiar[j].epsilon);
                if (bj <= world.familiar[j].epsilon) ok = false;
            }
            for (Vec2 p : bands[j]) {
                double bi = world.familiar[i].value(p);
                worst = std::min(worst, bi - world.familiar[i].epsilon);
                if (bi <= world.familiar[i].epsilon) ok = false;
            }
            std::ostringstream det;
            det << "band separation margin " << worst;
            add("a: band disjointness", "stars " + std::to_string(i) + "," + std::to_string(j), ok,
                det.str());
        }
    }

    // (b) goal and unknown obstacles clear of every band
    for (size_t i = 0; i < m; ++i) {
        const PlacedObstacle& star = world.familiar[i];
        double bg = star.value(world.goal);
        add("b: goal outside band", "star " + std::to_string(i), bg > star.epsilon,
            "beta(goal) = " + std::to_string(bg));
        bool clear = true;
        for (size_t u = 0; u < world.unknown.size() && clear; ++u) {
            for (Vec2 p : boundary_samples(world.unknown[u], 256)) {
                if (star.value(p) <= star.epsilon) {
                    clear = false;
                    break;
                }
            }
            for (Vec2 p : bands[i]) {
                if (obstacle_clearance(p, world.unknown[u]) <= 0.0) {
                    clear = false;
                    break;
                }
            }
        }
        add("b: band clear of unknown obstacles", "star " + std::to_string(i), clear);
    }

    // (c) sampled band margin
    constexpr double kDeltaMin = 1e-3;
    for (size_t i = 0; i < m; ++i) {
        double delta = world.familiar[i].delta;
        add("c: star margin delta", "star " + std::to_string(i), delta >= kDeltaMin,
            "delta = " + std::to_string(delta));
    }

    // Freespace and sensor sanity.
    add("goal in freespace", "goal", world.in_freespace(world.goal, 0.0));
    double max_eps = 0.0;
    for (const PlacedObstacle& star : world.familiar) max_eps = std::max(max_eps, star.epsilon);
    add("sensor range", "R >= 10*max epsilon", world.sensor_range >= 10.0 * max_eps,
        "R = " + std::to_string(world.sensor_range));
    for (size_t i = 0; i < m; ++i) {
        bool inside = true;
        for (Vec2 p : world.familiar[i].world_vertices) {
            if (!world.boundary.contains(p)) inside = false;
        }
        add("workspace containment", "star " + std::to_string(i), inside);
    }
    return report;
}

}  // namespace starnav
