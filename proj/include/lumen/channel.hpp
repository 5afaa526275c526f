#pragma once

#include "lumen/scene.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lumen {

// DC channel gains of the Lambertian LOS path and of single-bounce wall
// reflections, and the received optical power they induce.
//
// Orientation is fixed: transmitters face -z, the photodetector faces +z, so
// every cosine below is a dot product with one of those normals or with an
// inward wall normal.

template <typename Scalar>
Scalar deg_to_rad(Scalar deg)
{
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

/// Lambertian order m = -ln 2 / ln cos(hpa).
template <typename Scalar>
Scalar lambertian_order(Scalar hpa_deg)
{
  if (!(hpa_deg > Scalar(0) && hpa_deg < Scalar(90)))
    throw std::invalid_argument("lambertian_order: half-power angle must lie in (0, 90) degrees");
  return -std::log(Scalar(2)) / std::log(std::cos(deg_to_rad(hpa_deg)));
}

/// Non-imaging concentrator: n^2 / sin^2(fov) inside the field of view, else 0.
template <typename Scalar>
Scalar concentrator_gain(Scalar cos_psi, Scalar fov_deg, Scalar refractive_index)
{
  if (!(refractive_index >= Scalar(1)))
    throw std::invalid_argument("concentrator_gain: refractive index must be >= 1");
  if (!(fov_deg > Scalar(0) && fov_deg <= Scalar(90)))
    throw std::invalid_argument("concentrator_gain: field of view must lie in (0, 90] degrees");
  const Scalar fov = deg_to_rad(fov_deg);
  if (cos_psi < std::cos(fov))
    return Scalar(0);
  const Scalar s = std::sin(fov);
  return refractive_index * refractive_index / (s * s);
}

template <typename Scalar>
struct LinkGeometry {
  Scalar d;
  Scalar cos_phi; // irradiance angle at the (down-facing) LED
  Scalar cos_psi; // incidence angle at the (up-facing) photodetector
};

template <typename DerivedTx, typename DerivedRx>
LinkGeometry<typename DerivedRx::Scalar> link_geometry(const Eigen::MatrixBase<DerivedTx>& tx_pos,
                                                       const Eigen::MatrixBase<DerivedRx>& rx_pos)
{
  using Scalar = typename DerivedRx::Scalar;
  const Eigen::Matrix<Scalar, 3, 1> delta = tx_pos.template cast<Scalar>() - rx_pos;
  const Scalar d = delta.norm();
  if (d == Scalar(0))
    throw std::invalid_argument("link_geometry: receiver coincides with transmitter");
  // (tx - rx).z / d serves both ends: -z . (rx - tx) and +z . (tx - rx).
  const Scalar c = delta.z() / d;
  return {d, c, c};
}

/// LOS DC gain H_LOS(0) for one transmitter at a receiver position.
template <typename Derived>
typename Derived::Scalar los_gain(const Transmitter& tx, const Receiver& rx,
                                  const Eigen::MatrixBase<Derived>& rx_pos)
{
  using Scalar = typename Derived::Scalar;
  const auto link = link_geometry(tx.position, rx_pos);
  if (link.cos_phi < Scalar(0) || link.cos_psi < Scalar(0))
    return Scalar(0);
  const Scalar g = concentrator_gain<Scalar>(link.cos_psi, rx.fov_deg, rx.refractive_index);
  if (g == Scalar(0))
    return Scalar(0);
  const Scalar m = lambertian_order<Scalar>(tx.hpa_deg);
  return (m + 1) * Scalar(rx.area_m2) / (2 * std::numbers::pi_v<Scalar> * link.d * link.d)
         * std::pow(link.cos_phi, m) * Scalar(rx.filter_gain) * g * link.cos_psi;
}

struct WallPatch {
  Point3 center = Point3::Zero();
  Point3 normal = Point3::Zero(); // unit, pointing into the room
  double area_m2 = 0.0;
};

/// Midpoint-rule tiling of the four walls. Each wall is split into
/// ceil(extent / patch_edge) cells per direction with equal cell sizes, so the
/// tiling is exact and mirror-symmetric.
std::vector<WallPatch> discretize_walls(const Room& room, double patch_edge_m);

/// Structure-of-arrays view of a patch list, one column per patch.
template <typename Scalar>
struct BasicWallMesh {
  Eigen::Matrix<Scalar, 3, Eigen::Dynamic> centers;
  Eigen::Matrix<Scalar, 3, Eigen::Dynamic> normals;
  Eigen::Array<Scalar, 1, Eigen::Dynamic> areas;

  BasicWallMesh() = default;

  explicit BasicWallMesh(const std::vector<WallPatch>& patches)
      : centers(3, static_cast<Eigen::Index>(patches.size())),
        normals(3, static_cast<Eigen::Index>(patches.size())),
        areas(static_cast<Eigen::Index>(patches.size()))
  {
    for (Eigen::Index i = 0; i < centers.cols(); ++i) {
      const auto& p = patches[static_cast<std::size_t>(i)];
      centers.col(i) = p.center.cast<Scalar>();
      normals.col(i) = p.normal.cast<Scalar>();
      areas(i) = static_cast<Scalar>(p.area_m2);
    }
  }

  Eigen::Index size() const { return centers.cols(); }
};

using WallMesh = BasicWallMesh<double>;

/// Single-bounce NLOS DC gain H_ref(0), summed over all wall patches. A patch
/// contributes nothing when it faces away from either end of the path or
/// falls outside the receiver field of view.
template <typename Scalar, typename Derived>
Scalar nlos_gain(const Transmitter& tx, const Receiver& rx, const Eigen::MatrixBase<Derived>& rx_pos,
                 const BasicWallMesh<Scalar>& mesh, Scalar rho)
{
  using Row = Eigen::Array<Scalar, 1, Eigen::Dynamic>;
  using Points = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
  if (rho == Scalar(0) || mesh.size() == 0)
    return Scalar(0);

  const Eigen::Matrix<Scalar, 3, 1> t = tx.position.template cast<Scalar>();
  const Eigen::Matrix<Scalar, 3, 1> r = rx_pos.template cast<Scalar>();

  const Points tx_to_wall = mesh.centers.colwise() - t;
  const Points rx_to_wall = mesh.centers.colwise() - r;
  const Row d1_sq = tx_to_wall.colwise().squaredNorm().array();
  const Row d2_sq = rx_to_wall.colwise().squaredNorm().array();
  if ((d1_sq == Scalar(0)).any())
    throw std::invalid_argument("nlos_gain: transmitter coincides with a wall patch center");
  if ((d2_sq == Scalar(0)).any())
    throw std::invalid_argument("nlos_gain: receiver coincides with a wall patch center");
  const Row d1 = d1_sq.sqrt();
  const Row d2 = d2_sq.sqrt();

  const Row cos_phi = -tx_to_wall.row(2).array() / d1;
  const Row cos_alpha = -mesh.normals.cwiseProduct(tx_to_wall).colwise().sum().array() / d1;
  const Row cos_beta = -mesh.normals.cwiseProduct(rx_to_wall).colwise().sum().array() / d2;
  const Row cos_psi = rx_to_wall.row(2).array() / d2;

  const Scalar cos_fov = std::cos(deg_to_rad(Scalar(rx.fov_deg)));
  const Scalar m = lambertian_order<Scalar>(tx.hpa_deg);
  const auto visible = (cos_phi >= Scalar(0)) && (cos_alpha >= Scalar(0))
                       && (cos_beta >= Scalar(0)) && (cos_psi >= cos_fov);
  const Row terms = cos_phi.pow(m) * cos_alpha * cos_beta * cos_psi * mesh.areas / (d1_sq * d2_sq);
  const Scalar sum = visible.select(terms, Scalar(0)).sum();

  // g is constant inside the field of view; evaluate it at normal incidence.
  const Scalar g = concentrator_gain<Scalar>(Scalar(1), rx.fov_deg, rx.refractive_index);
  return (m + 1) * Scalar(rx.area_m2) / (2 * std::numbers::pi_v<Scalar>) * rho
         * Scalar(rx.filter_gain) * g * sum;
}

struct PowerBreakdown {
  struct PerTx {
    double los_mw = 0.0;
    double nlos_mw = 0.0;
  };

  double p_los_mw = 0.0;
  double p_nlos_mw = 0.0;
  std::vector<PerTx> per_tx;

  double total_mw() const { return p_los_mw + p_nlos_mw; }
};

inline constexpr double kDefaultPatchEdge = 0.2;

/// A scene with its wall tiling precomputed; evaluating many receiver
/// positions against one model reuses the tiling.
class ChannelModel {
public:
  ChannelModel(Scene scene, double patch_edge_m = kDefaultPatchEdge);

  const Scene& scene() const { return scene_; }
  const WallMesh& mesh() const { return mesh_; }
  double patch_edge() const { return patch_edge_; }

  /// Per-transmitter LOS and NLOS powers. Receiver noise is not added here.
  PowerBreakdown received_power(const Point3& rx_pos) const;

private:
  Scene scene_;
  double patch_edge_;
  WallMesh mesh_;
};

PowerBreakdown received_power(const Scene& scene, const Point3& rx_pos,
                              double patch_edge_m = kDefaultPatchEdge);

template <typename Scalar>
Scalar rss_dbm(Scalar p_mw)
{
  if (!(p_mw > Scalar(0)))
    throw std::invalid_argument("rss_dbm: received power must be positive");
  return Scalar(10) * std::log10(p_mw);
}

template <typename Scalar>
Scalar dbm_to_mw(Scalar dbm)
{
  return std::pow(Scalar(10), dbm / Scalar(10));
}

template <typename Scalar>
Scalar path_loss_db(Scalar h0)
{
  if (!(h0 > Scalar(0)))
    throw std::invalid_argument("path_loss_db: DC gain must be positive");
  return -Scalar(10) * std::log10(h0);
}

} // namespace lumen
