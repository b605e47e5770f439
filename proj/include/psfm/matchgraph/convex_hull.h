#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace psfm {

// Andrew's monotone chain. Counter-clockwise, no collinear vertices; fewer
// than three vertices when the input is degenerate.
std::vector<Eigen::Vector2d> ConvexHull(std::span<const Eigen::Vector2d> points);

// Shoelace area of the hull; 0 for fewer than 3 points or collinear input.
double ConvexHullArea(std::span<const Eigen::Vector2d> points);

double PolygonArea(std::span<const Eigen::Vector2d> polygon);

}  // namespace psfm
