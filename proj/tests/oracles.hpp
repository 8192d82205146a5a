#pragma once

// Test-only oracles, kept independent of the library code paths they check.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "starnav/geom.hpp"

namespace oracles {

using starnav::Vec2;

// Central finite difference of a scalar function of Vec2.
inline Vec2 fd_gradient(const std::function<double(Vec2)>& f, Vec2 x, double h = 1e-5) {
    return {(f({x.x + h, x.y}) - f({x.x - h, x.y})) / (2 * h),
            (f({x.x, x.y + h}) - f({x.x, x.y - h})) / (2 * h)};
}

// Central finite difference Jacobian of a Vec2-valued function.
inline starnav::Mat2 fd_jacobian(const std::function<Vec2(Vec2)>& f, Vec2 x, double h = 1e-5) {
    Vec2 dx = (f({x.x + h, x.y}) - f({x.x - h, x.y})) / (2 * h);
    Vec2 dy = (f({x.x, x.y + h}) - f({x.x, x.y - h})) / (2 * h);
    return {dx.x, dy.x, dx.y, dy.y};
}

inline double fd_derivative(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

inline double rel_err(double got, double want, double floor = 1e-9) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

// Even-odd crossing test, written independently of the library version.
inline bool point_in_polygon_oracle(Vec2 q, const std::vector<Vec2>& poly) {
    int crossings = 0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % n];
        if ((a.y <= q.y) != (b.y <= q.y)) {
            double t = (q.y - a.y) / (b.y - a.y);
            if (a.x + t * (b.x - a.x) > q.x) ++crossings;
        }
    }
    return crossings % 2 == 1;
}

// O(n^3) convex hull: a point is a hull vertex iff it is not strictly inside
// the hull, i.e. there is a line through it with all other points on one side.
inline std::vector<Vec2> brute_force_hull(const std::vector<Vec2>& pts) {
    std::vector<Vec2> hull;
    for (size_t i = 0; i < pts.size(); ++i) {
        bool extreme = false;
        for (size_t j = 0; j < pts.size() && !extreme; ++j) {
            if (j == i) continue;
            bool all_left = true, all_right = true;
            for (size_t k = 0; k < pts.size(); ++k) {
                if (k == i || k == j) continue;
                double c = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
                if (c < -1e-12) all_left = false;
                if (c > 1e-12) all_right = false;
            }
            extreme = all_left || all_right;
        }
        if (extreme) hull.push_back(pts[i]);
    }
    return hull;  // unordered vertex set
}

// Brute-force metric projection by dense sampling of a convex polygon.
inline Vec2 brute_force_project(Vec2 q, const std::vector<Vec2>& poly, int n = 400) {
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (Vec2 v : poly) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    Vec2 best;
    double best_d = 1e300;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            Vec2 p{min_x + (max_x - min_x) * i / n, min_y + (max_y - min_y) * j / n};
            if (!point_in_polygon_oracle(p, poly) &&
                starnav::distance_to_polygon_boundary(p, poly) > 1e-9)
                continue;
            double d = (q - p).squared_norm();
            if (d < best_d) {
                best_d = d;
                best = p;
            }
        }
    }
    return best;
}

// Minimal XML well-formedness check: prolog-tolerant tag balancing.
inline bool xml_well_formed(const std::string& doc) {
    std::vector<std::string> stack;
    size_t i = 0;
    bool seen_element = false;
    while (i < doc.size()) {
        if (doc[i] != '<') {
            ++i;
            continue;
        }
        size_t close = doc.find('>', i);
        if (close == std::string::npos) return false;
        std::string tag = doc.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;  // prolog / doctype / comment
        if (tag.back() == '/') {
            seen_element = true;
            continue;  // self-closing
        }
        if (tag[0] == '/') {
            std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
            continue;
        }
        std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
        stack.push_back(name);
        seen_element = true;
    }
    return stack.empty() && seen_element;
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(unsigned long long seed) : gen(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    Vec2 point(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi)}; }
};

}  // namespace oracles
