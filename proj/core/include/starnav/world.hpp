#pragma once

#include <optional>
#include <string>
#include <vector>

#include "starnav/geom.hpp"
#include "starnav/implicit.hpp"

namespace starnav {

/// One catalogued star-shaped geometry class. The stored polygon is the
/// authored shape dilated by the robot radius, so all downstream geometry
/// treats the robot as a point.
struct CatalogueEntry {
    std::string name;
    std::vector<Vec2> raw_vertices;  // authored, undilated (kept for rendering)
    Vec2 star_center;                // body frame
    double epsilon = 0.3;
    int p = 20;
    std::shared_ptr<const ObstacleTree> tree;  // built on the dilated polygon
    double rho = 0.0;
    double delta = 0.0;  // measured band margin, see measure_band_margin
};

struct Catalogue {
    std::vector<CatalogueEntry> entries;

    const CatalogueEntry* find(const std::string& name) const;
};

/// Dilates, builds the implicit tree and derives rho/delta for one shape.
CatalogueEntry build_catalogue_entry(std::string name, std::vector<Vec2> raw_vertices,
                                     Vec2 star_center, double epsilon, int p, double robot_radius);

/// Samples the band {0 <= beta <= epsilon} of a body-frame tree and returns
/// the sampled minimum of (b - center)^T grad beta(b) over roughly
/// `target_samples` points, together with the samples themselves.
struct BandSamples {
    std::vector<Vec2> points;  // body frame
    double delta = 0.0;        // sampled inner-product minimum
};
BandSamples sample_band(const ObstacleTree& tree, double epsilon, int target_samples = 2000);

struct FamiliarPlacement {
    std::string shape_name;
    size_t entry_index = 0;
    double angle_rad = 0.0;
    Vec2 center;  // world position of the star center
};

/// Ground-truth world: workspace, catalogued star instances, unknown convex
/// obstacles, goal and sensor. All obstacle geometry stored here is dilated
/// by the robot radius and the workspace is eroded by it, so the robot is a
/// point and the freespace is exactly the set of valid centre placements.
struct World {
    ConvexPolygon boundary_raw;  // workspace as authored
    ConvexPolygon boundary;      // eroded by robot_radius
    Catalogue catalogue;
    std::vector<FamiliarPlacement> placements;
    std::vector<PlacedObstacle> familiar;  // ground truth, indexed like placements
    std::vector<ConvexObstacle> unknown_raw;
    std::vector<ConvexObstacle> unknown;  // dilated
    Vec2 goal;
    double robot_radius = 0.2;
    double sensor_range = 10.0;

    /// Smallest obstacle function value over all familiar obstacles
    /// (+infinity when there are none).
    double min_beta(Vec2 x) const;
    /// Signed clearance to the dilated unknown obstacles (negative inside).
    double unknown_clearance(Vec2 x) const;
    /// Signed clearance to the eroded workspace boundary (negative outside).
    double boundary_clearance(Vec2 x) const;
    /// Point-robot freespace membership with optional margin.
    bool in_freespace(Vec2 x, double margin = 0.0) const;
};

// ---------------------------------------------------------------------------
// Sensing
// ---------------------------------------------------------------------------

struct SourceId {
    enum class Kind { kFamiliar, kUnknown } kind = Kind::kUnknown;
    size_t index = 0;

    bool operator==(const SourceId&) const = default;
};

struct SenseHit {
    Vec2 point;
    double distance = 0.0;
    SourceId source;
    int ray = 0;  // index of the ray that produced the hit
};

/// Casts n_rays evenly spaced rays (first along +x) with the world sensor
/// range and reports the nearest obstacle hit per ray.
std::vector<SenseHit> sense(Vec2 x, const World& world, int n_rays);

// ---------------------------------------------------------------------------
// Semantic map
// ---------------------------------------------------------------------------

/// Sensed boundary points of one still-unrecognized obstacle, ordered along
/// the obstacle boundary (consecutive rays hit adjacent boundary points, so
/// the polyline through them lies inside the convex obstacle).
struct Fragment {
    size_t source_index = 0;
    std::vector<Vec2> points;
};

/// The robot's evolving knowledge: discovered stars are permanent; fragments
/// of unknown obstacles are replaced wholesale at every sensing cycle.
struct SemanticMap {
    std::vector<PlacedObstacle> stars;
    std::vector<size_t> star_sources;  // familiar indices, parallel to stars
    std::vector<Fragment> fragments;

    bool knows(size_t familiar_index) const;
};

/// Groups hits into per-obstacle fragments ordered along each boundary.
/// With familiar_as_unknown set, hits on familiar obstacles are grouped too
/// (the baseline law's view of the world).
std::vector<Fragment> group_hits(std::span<const SenseHit> hits, int n_rays,
                                 bool familiar_as_unknown);

/// Recognition oracle: any familiar obstacle with at least one hit is
/// instantiated at its ground-truth pose; unknown hits replace the fragments.
void update_map(SemanticMap& map, std::span<const SenseHit> hits, const World& world);

/// Convex stand-ins the controller plans against: one disk per discovered
/// star plus identity copies of the sensed fragments.
struct ModelLayer {
    std::vector<Disk> disks;
    std::vector<Fragment> fragments;
};
ModelLayer model_layer(const SemanticMap& map);

// ---------------------------------------------------------------------------
// Preflight validation
// ---------------------------------------------------------------------------

struct ValidationEntry {
    std::string condition;
    std::string subject;
    bool pass = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;

    bool all_pass() const;
    std::string to_string() const;
};

/// Checks the separation and star-margin assumptions the controller relies
/// on: (a) pairwise disjoint obstacle bands, (b) goal and unknown obstacles
/// clear of every band, (c) positive sampled band margin delta per star,
/// plus basic freespace and sensor-range sanity. Failures are report
/// entries, never exceptions.
ValidationReport validate_assumptions(const World& world);

}  // namespace starnav
