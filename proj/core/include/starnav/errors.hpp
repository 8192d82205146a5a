#pragma once

#include <stdexcept>
#include <string>

namespace starnav {

// Base class for all recoverable domain errors raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry
struct EmptyIntersection : Error {
    explicit EmptyIntersection(const std::string& w = "half-plane intersection is empty") : Error(w) {}
};
struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& w) : Error(w) {}
};
struct SelfIntersection : Error {
    explicit SelfIntersection(const std::string& w = "polygon offset self-intersects") : Error(w) {}
};

// Implicit shapes
struct NotSimplePolygon : Error {
    explicit NotSimplePolygon(const std::string& w = "polygon is not simple") : Error(w) {}
};
struct CenterOutside : Error {
    explicit CenterOutside(const std::string& w = "star center lies outside the polygon") : Error(w) {}
};
struct NearVertex : Error {
    explicit NearVertex(const std::string& w = "derivative query too close to a polygon vertex") : Error(w) {}
};

// Diffeomorphism
struct AtStarCenter : Error {
    explicit AtStarCenter(const std::string& w = "evaluation at a star center is singular") : Error(w) {}
};
struct NoConvergence : Error {
    explicit NoConvergence(const std::string& w = "iteration failed to converge") : Error(w) {}
};

// Controller
struct EmptyLocalFreespace : Error {
    explicit EmptyLocalFreespace(const std::string& w = "local freespace is empty") : Error(w) {}
};
struct DegenerateLine : Error {
    explicit DegenerateLine(const std::string& w = "line does not intersect the local freespace") : Error(w) {}
};

// Scenario / validation
struct ParseError : Error {
    int line = 0;
    ParseError(int line_, const std::string& w) : Error("line " + std::to_string(line_) + ": " + w), line(line_) {}
};
struct ValidationFailed : Error {
    std::string report_text;
    explicit ValidationFailed(std::string report)
        : Error("world fails preflight validation"), report_text(std::move(report)) {}
};

}  // namespace starnav
