#include "lumen/radio_map.hpp"

#include "lumen/parallel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace lumen {

namespace {

void check_plane(const Room& room, double z_plane, double spacing)
{
  if (!(z_plane >= 0.0 && z_plane < room.lz))
    throw std::invalid_argument("radio map: plane must satisfy 0 <= z < room height");
  if (!(spacing > 0.0))
    throw std::invalid_argument("radio map: spacing must be positive");
}

RadioMap empty_map(const Room& room, double z_plane, double spacing)
{
  check_plane(room, z_plane, spacing);
  const auto [nx, ny] = grid_shape(room, spacing);
  RadioMap map;
  map.spacing = spacing;
  map.z_plane = z_plane;
  map.lx = room.lx;
  map.ly = room.ly;
  map.values = RadioMap::Grid::Zero(ny, nx);
  return map;
}

void append_number(std::string& out, double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

} // namespace

std::pair<Eigen::Index, Eigen::Index> grid_shape(const Room& room, double spacing)
{
  auto count = [spacing](double extent) {
    return std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::ceil(extent / spacing * (1.0 - 1e-12))));
  };
  return {count(room.lx), count(room.ly)};
}

Point3 RadioMap::cell_point(Eigen::Index ix, Eigen::Index iy) const
{
  const double x = std::min(x0 + (static_cast<double>(ix) + 0.5) * spacing, x0 + lx);
  const double y = std::min(y0 + (static_cast<double>(iy) + 0.5) * spacing, y0 + ly);
  return {x, y, z_plane};
}

Eigen::Vector4d RadioMap::cell_bounds(Eigen::Index ix, Eigen::Index iy) const
{
  const double xa = x0 + static_cast<double>(ix) * spacing;
  const double ya = y0 + static_cast<double>(iy) * spacing;
  return {xa, std::min(xa + spacing, x0 + lx), ya, std::min(ya + spacing, y0 + ly)};
}

std::pair<Eigen::Index, Eigen::Index> RadioMap::argmax() const
{
  Eigen::Index row = 0, col = 0;
  values.maxCoeff(&row, &col);
  return {col, row};
}

RadioMap simulate_map(const ChannelModel& channel, double z_plane, double spacing)
{
  RadioMap map = empty_map(channel.scene().room, z_plane, spacing);
  map.source = "simulated";
  const auto nx = map.nx();
  parallel_for(static_cast<std::size_t>(map.values.size()), [&](std::size_t k) {
    const auto iy = static_cast<Eigen::Index>(k) / nx;
    const auto ix = static_cast<Eigen::Index>(k) % nx;
    map.values(iy, ix) = rss_dbm(channel.received_power(map.cell_point(ix, iy)).total_mw());
  });
  return map;
}

RadioMap simulate_map(const Scene& scene, double z_plane, double spacing, double patch_edge_m)
{
  return simulate_map(ChannelModel(scene, patch_edge_m), z_plane, spacing);
}

namespace {

Eigen::MatrixXd model_inputs(const Regressor& model, const Scene& scene,
                             const std::vector<Point3>& points)
{
  const int k = arity(model);
  if (k == 5) {
    const auto& r = scene.room;
    if (r.lx < kVariableRoomMin || r.lx > kVariableRoomMax || r.ly < kVariableRoomMin
        || r.ly > kVariableRoomMax || r.lz != kVariableRoomHeight)
      throw std::invalid_argument(
          "variable-room model needs a scene of (3-7) x (3-7) x 3 m");
  } else if (k != 3) {
    throw std::invalid_argument("model arity must be 3 or 5");
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(points.size()), k);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    x(i, 0) = p.x();
    x(i, 1) = p.y();
    x(i, 2) = p.z();
    if (k == 5) {
      x(i, 3) = scene.room.lx;
      x(i, 4) = scene.room.ly;
    }
  }
  return x;
}

} // namespace

RadioMap predict_map(const Regressor& model, const Scene& scene, double z_plane, double spacing)
{
  RadioMap map = empty_map(scene.room, z_plane, spacing);
  map.source = "predicted:" + describe(model);
  std::vector<Point3> points;
  points.reserve(static_cast<std::size_t>(map.values.size()));
  for (Eigen::Index iy = 0; iy < map.ny(); ++iy)
    for (Eigen::Index ix = 0; ix < map.nx(); ++ix)
      points.push_back(map.cell_point(ix, iy));
  const Eigen::VectorXd pred = predict(model, model_inputs(model, scene, points));
  map.values = Eigen::Map<const RadioMap::Grid>(pred.data(), map.ny(), map.nx());
  return map;
}

std::vector<Point3> half_diagonal_points(const Room& room, double z_plane, std::size_t n_points)
{
  if (n_points < 2)
    throw std::invalid_argument("half-diagonal profile needs at least 2 points");
  std::vector<Point3> out;
  out.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_points - 1);
    out.emplace_back(room.lx / 2 * (1.0 - t), room.ly / 2 * (1.0 - t), z_plane);
  }
  return out;
}

std::vector<ProfilePoint> half_diagonal_profile(const ChannelModel& channel, double z_plane,
                                                std::size_t n_points)
{
  std::vector<ProfilePoint> out;
  for (const auto& p : half_diagonal_points(channel.scene().room, z_plane, n_points))
    out.push_back({p.x(), p.y(), rss_dbm(channel.received_power(p).total_mw())});
  return out;
}

std::vector<ProfilePoint> half_diagonal_profile(const Regressor& model, const Scene& scene,
                                                double z_plane, std::size_t n_points)
{
  const auto points = half_diagonal_points(scene.room, z_plane, n_points);
  const Eigen::VectorXd pred = predict(model, model_inputs(model, scene, points));
  std::vector<ProfilePoint> out;
  for (std::size_t k = 0; k < points.size(); ++k)
    out.push_back({points[k].x(), points[k].y(), pred(static_cast<Eigen::Index>(k))});
  return out;
}

void write_map_csv(const RadioMap& map, const std::string& path)
{
  std::string text = "x,y,z,rss_dbm\n";
  for (Eigen::Index iy = 0; iy < map.ny(); ++iy) {
    for (Eigen::Index ix = 0; ix < map.nx(); ++ix) {
      const auto p = map.cell_point(ix, iy);
      append_number(text, p.x());
      text += ',';
      append_number(text, p.y());
      text += ',';
      append_number(text, p.z());
      text += ',';
      append_number(text, map.values(iy, ix));
      text += '\n';
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_map_pgm(const RadioMap& map, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  const double lo = map.values.minCoeff();
  const double hi = map.values.maxCoeff();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  out << "P2\n" << map.nx() << ' ' << map.ny() << "\n255\n";
  for (Eigen::Index iy = map.ny(); iy-- > 0;) {
    for (Eigen::Index ix = 0; ix < map.nx(); ++ix) {
      const auto level = static_cast<int>(std::lround((map.values(iy, ix) - lo) * scale));
      out << level << (ix + 1 < map.nx() ? ' ' : '\n');
    }
  }
}

} // namespace lumen
