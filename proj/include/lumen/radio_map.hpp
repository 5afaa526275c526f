#pragma once

#include "lumen/channel.hpp"
#include "lumen/model.hpp"
#include "lumen/scene.hpp"

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace lumen {

/// RSS grid on a horizontal plane. values(iy, ix) is the cell whose lower
/// corner is origin + (ix, iy) * spacing; the last row/column may overhang the
/// footprint, in which case its sample point is clamped to the wall.
struct RadioMap {
  using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  double x0 = 0.0;
  double y0 = 0.0;
  double spacing = 0.0;
  double z_plane = 0.0;
  double lx = 0.0; // footprint covered by the grid
  double ly = 0.0;
  Grid values;
  std::string source; // "simulated" or "predicted:<model>"

  Eigen::Index nx() const { return values.cols(); }
  Eigen::Index ny() const { return values.rows(); }

  /// Sample point of a cell (its center, clamped to the footprint).
  Point3 cell_point(Eigen::Index ix, Eigen::Index iy) const;
  /// Closed [xmin, xmax] x [ymin, ymax] extent of a cell.
  Eigen::Vector4d cell_bounds(Eigen::Index ix, Eigen::Index iy) const;
  /// (ix, iy) of the largest value; first in row-major order on ties.
  std::pair<Eigen::Index, Eigen::Index> argmax() const;
};

/// Grid dimensions covering the footprint at the given spacing.
std::pair<Eigen::Index, Eigen::Index> grid_shape(const Room& room, double spacing);

RadioMap simulate_map(const ChannelModel& channel, double z_plane, double spacing);
RadioMap simulate_map(const Scene& scene, double z_plane, double spacing,
                      double patch_edge_m = kDefaultPatchEdge);

/// Model inference at each cell. Three-feature models take (x, y, z); five
/// feature models also take the scene's (lx, ly), which must be a valid
/// variable room.
RadioMap predict_map(const Regressor& model, const Scene& scene, double z_plane, double spacing);

struct ProfilePoint {
  double x = 0.0;
  double y = 0.0;
  double rss_dbm = 0.0;
};

/// n_points evenly spaced from the floor-plan center to the (0, 0) corner.
std::vector<Point3> half_diagonal_points(const Room& room, double z_plane, std::size_t n_points);

std::vector<ProfilePoint> half_diagonal_profile(const ChannelModel& channel, double z_plane,
                                                std::size_t n_points);
std::vector<ProfilePoint> half_diagonal_profile(const Regressor& model, const Scene& scene,
                                                double z_plane, std::size_t n_points);

/// Long-format CSV: x,y,z,rss_dbm per cell, row-major.
void write_map_csv(const RadioMap& map, const std::string& path);

/// Plain P2 grayscale, min-max scaled to 0..255, first row at the largest y.
void write_map_pgm(const RadioMap& map, const std::string& path);

} // namespace lumen
