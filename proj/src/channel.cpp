#include "lumen/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lumen {

namespace {

// ceil(extent / edge) that does not round 5 / 0.2 up to 26.
int cell_count(double extent, double edge)
{
  const double ratio = extent / edge;
  return std::max(1, static_cast<int>(std::ceil(ratio * (1.0 - 1e-12))));
}

void tile_wall(std::vector<WallPatch>& out, const Point3& origin, const Point3& along,
               double width, double height, const Point3& normal, double edge)
{
  const int nu = cell_count(width, edge);
  const int nv = cell_count(height, edge);
  const double du = width / nu;
  const double dv = height / nv;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      WallPatch patch;
      patch.center = origin + along * ((i + 0.5) * du) + Point3::UnitZ() * ((j + 0.5) * dv);
      patch.normal = normal;
      patch.area_m2 = du * dv;
      out.push_back(patch);
    }
  }
}

void check_inside(const Room& room, const Point3& p)
{
  if (p.x() < 0.0 || p.x() > room.lx || p.y() < 0.0 || p.y() > room.ly || p.z() < 0.0
      || p.z() >= room.lz)
    throw std::invalid_argument("received_power: receiver must lie inside the room below the ceiling");
}

} // namespace

std::vector<WallPatch> discretize_walls(const Room& room, double patch_edge_m)
{
  if (!(patch_edge_m > 0.0))
    throw std::invalid_argument("discretize_walls: patch edge must be positive");
  if (patch_edge_m > std::min({room.lx, room.ly, room.lz}))
    throw std::invalid_argument("discretize_walls: patch edge exceeds the smallest room dimension");

  std::vector<WallPatch> patches;
  const Point3 ex = Point3::UnitX(), ey = Point3::UnitY();
  tile_wall(patches, Point3(0, 0, 0), ex, room.lx, room.lz, ey, patch_edge_m);
  tile_wall(patches, Point3(room.lx, 0, 0), ey, room.ly, room.lz, -ex, patch_edge_m);
  tile_wall(patches, Point3(0, room.ly, 0), ex, room.lx, room.lz, -ey, patch_edge_m);
  tile_wall(patches, Point3(0, 0, 0), ey, room.ly, room.lz, ex, patch_edge_m);
  return patches;
}

ChannelModel::ChannelModel(Scene scene, double patch_edge_m)
    : scene_(std::move(scene)), patch_edge_(patch_edge_m)
{
  scene_.validate();
  mesh_ = WallMesh(discretize_walls(scene_.room, patch_edge_));
}

PowerBreakdown ChannelModel::received_power(const Point3& rx_pos) const
{
  check_inside(scene_.room, rx_pos);
  PowerBreakdown out;
  out.per_tx.reserve(scene_.transmitters.size());
  for (const auto& tx : scene_.transmitters) {
    PowerBreakdown::PerTx p;
    p.los_mw = tx.power_mw * los_gain(tx, scene_.receiver, rx_pos);
    p.nlos_mw = tx.power_mw * nlos_gain(tx, scene_.receiver, rx_pos, mesh_, scene_.wall_reflectance);
    out.p_los_mw += p.los_mw;
    out.p_nlos_mw += p.nlos_mw;
    out.per_tx.push_back(p);
  }
  return out;
}

PowerBreakdown received_power(const Scene& scene, const Point3& rx_pos, double patch_edge_m)
{
  return ChannelModel(scene, patch_edge_m).received_power(rx_pos);
}

} // namespace lumen
