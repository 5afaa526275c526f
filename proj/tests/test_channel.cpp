#include "lumen/channel.hpp"

#include "oracles/naive_channel.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lumen;
using testing_util::rel_diff;

namespace {

// Reference values from a separate numpy evaluation of the same formulas.
constexpr double kMidCenterLos = 1.80419802075694e-05;
constexpr double kMidCenterNlosEdge020 = 1.60808311065259e-06;
constexpr double kMidCenterNlosEdge005 = 1.59021789219051e-06;
constexpr double kOrder30 = 4.81884167930642;
constexpr double kGainFov85 = 2.26722209905249;

Scene without_walls(Scene s)
{
  s.wall_reflectance = 0.0;
  return s;
}

} // namespace

TEST(Lambertian, KnownOrders)
{
  EXPECT_NEAR(lambertian_order(60.0), 1.0, 1e-12);
  EXPECT_NEAR(lambertian_order(45.0), 2.0, 1e-12);
  EXPECT_NEAR(lambertian_order(30.0), kOrder30, 1e-12);
  EXPECT_GT(lambertian_order(20.0), lambertian_order(30.0));
  EXPECT_THROW(lambertian_order(0.0), std::invalid_argument);
  EXPECT_THROW(lambertian_order(90.0), std::invalid_argument);
}

TEST(Concentrator, Gain)
{
  EXPECT_NEAR(concentrator_gain(1.0, 85.0, 1.5), kGainFov85, 1e-12);
  EXPECT_EQ(concentrator_gain(std::cos(deg_to_rad(89.0)), 85.0, 1.5), 0.0);
  EXPECT_DOUBLE_EQ(concentrator_gain(1.0, 90.0, 1.0), 1.0);
  EXPECT_THROW(concentrator_gain(1.0, 85.0, 0.5), std::invalid_argument);
  EXPECT_THROW(concentrator_gain(1.0, 0.0, 1.5), std::invalid_argument);
}

TEST(Los, UnderTheLed)
{
  const Scene s = preset_scene("mid", 1);
  const double h = los_gain(s.transmitters[0], s.receiver, Point3(2.5, 2.5, 1.0));
  EXPECT_LT(rel_diff(h, kMidCenterLos), 1e-12);
  EXPECT_NEAR(h, 1.8043e-5, 1e-8);
}

TEST(Los, GeometryAndCutoff)
{
  const Scene s = preset_scene("mid", 1);
  const auto& tx = s.transmitters[0];
  EXPECT_DOUBLE_EQ(los_gain(tx, s.receiver, Point3(2.0, 2.5, 1.0)),
                   los_gain(tx, s.receiver, Point3(3.0, 2.5, 1.0)));
  // 1 cm below the ceiling, 2 m sideways: incidence ~89.7 degrees.
  EXPECT_EQ(los_gain(tx, s.receiver, Point3(0.5, 2.5, 2.99)), 0.0);
  EXPECT_THROW(los_gain(tx, s.receiver, tx.position), std::invalid_argument);

  const auto link = link_geometry(tx.position, Point3(2.5, 2.5, 1.0));
  EXPECT_DOUBLE_EQ(link.d, 2.0);
  EXPECT_DOUBLE_EQ(link.cos_phi, 1.0);
  EXPECT_DOUBLE_EQ(link.cos_psi, 1.0);
}

TEST(Los, MatchesNaiveFormula)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Scene s = preset_scene("big", 4);
  for (int k = 0; k < 200; ++k) {
    const Point3 p(u(rng) * 6.5, u(rng) * 6.5, u(rng) * 3.4);
    for (const auto& tx : s.transmitters) {
      const double ref = oracle::los(tx, s.receiver, p.x(), p.y(), p.z());
      EXPECT_LE(rel_diff(los_gain(tx, s.receiver, p), ref), 1e-13);
    }
  }
}

TEST(Walls, Counts)
{
  const auto small = discretize_walls(Room{3, 3, 2.8}, 1.5);
  EXPECT_EQ(small.size(), 16u);
  double area = 0.0;
  for (const auto& p : small)
    area += p.area_m2;
  EXPECT_NEAR(area, 33.6, 1e-12);
  EXPECT_EQ(discretize_walls(Room{5, 5, 3}, 0.2).size(), 1500u);
}

TEST(Walls, AreaNormalsAndPlacement)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dim(2.0, 8.0), edge(0.05, 0.6);
  for (int k = 0; k < 50; ++k) {
    const Room room{dim(rng), dim(rng), dim(rng) * 0.5};
    const auto patches = discretize_walls(room, edge(rng));
    double area = 0.0;
    for (const auto& p : patches) {
      area += p.area_m2;
      EXPECT_NEAR(p.normal.norm(), 1.0, 1e-15);
      // The inward normal points towards the room center.
      const Point3 center(room.lx / 2, room.ly / 2, p.center.z());
      EXPECT_GT(p.normal.dot(center - p.center), 0.0);
      EXPECT_GE(p.center.z(), 0.0);
      EXPECT_LE(p.center.z(), room.lz);
    }
    const double analytic = 2 * (room.lx + room.ly) * room.lz;
    EXPECT_LT(rel_diff(area, analytic), 1e-9);
  }
}

TEST(Walls, Errors)
{
  EXPECT_THROW(discretize_walls(Room{5, 5, 3}, 0.0), std::invalid_argument);
  EXPECT_THROW(discretize_walls(Room{5, 5, 3}, -1.0), std::invalid_argument);
  EXPECT_THROW(discretize_walls(Room{5, 5, 3}, 3.5), std::invalid_argument);
}

TEST(Nlos, ZeroReflectance)
{
  const Scene s = preset_scene("mid", 1);
  const WallMesh mesh(discretize_walls(s.room, 0.2));
  EXPECT_EQ(nlos_gain(s.transmitters[0], s.receiver, Point3(1.2, 3.3, 0.4), mesh, 0.0), 0.0);
}

TEST(Nlos, MatchesNaiveLoops)
{
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int scene = 0; scene < 10; ++scene) {
    const double lx = 3 + 4 * u(rng), ly = 3 + 4 * u(rng);
    Scene s = variable_scene(lx, ly, scene % 2 ? 4 : 1);
    s.wall_reflectance = 0.2 + 0.8 * u(rng);
    const double edge = 0.1 + 0.3 * u(rng);
    const WallMesh mesh(discretize_walls(s.room, edge));
    for (int k = 0; k < 10; ++k) {
      const Point3 p(u(rng) * lx, u(rng) * ly, u(rng) * 1.7);
      for (const auto& tx : s.transmitters) {
        const double fast = nlos_gain(tx, s.receiver, p, mesh, s.wall_reflectance);
        const double ref =
            oracle::nlos(tx, s.receiver, s.room, p.x(), p.y(), p.z(), edge, s.wall_reflectance);
        EXPECT_LE(rel_diff(fast, ref), 1e-12) << "scene " << scene << " point " << k;
      }
    }
  }
}

TEST(Nlos, ReferenceValuesAndConvergence)
{
  const Scene s = preset_scene("mid", 1);
  const Point3 p(2.5, 2.5, 1.0);
  const double coarse =
      nlos_gain(s.transmitters[0], s.receiver, p, WallMesh(discretize_walls(s.room, 0.2)), 0.8);
  const double fine =
      nlos_gain(s.transmitters[0], s.receiver, p, WallMesh(discretize_walls(s.room, 0.05)), 0.8);
  EXPECT_LT(rel_diff(coarse, kMidCenterNlosEdge020), 1e-12);
  EXPECT_LT(rel_diff(fine, kMidCenterNlosEdge005), 1e-12);
  EXPECT_LT(rel_diff(coarse, fine), 0.02);
}

TEST(Nlos, MirrorSymmetry)
{
  const Scene s = preset_scene("mid", 1);
  const WallMesh mesh(discretize_walls(s.room, 0.2));
  const double a = nlos_gain(s.transmitters[0], s.receiver, Point3(1.0, 2.5, 1.0), mesh, 0.8);
  const double b = nlos_gain(s.transmitters[0], s.receiver, Point3(4.0, 2.5, 1.0), mesh, 0.8);
  EXPECT_LT(rel_diff(a, b), 1e-9);
}

TEST(Nlos, CoincidentPointThrows)
{
  const Scene s = preset_scene("small", 1);
  const auto patches = discretize_walls(s.room, 0.5);
  const WallMesh mesh(patches);
  EXPECT_THROW(nlos_gain(s.transmitters[0], s.receiver, patches[0].center, mesh, 0.8),
               std::invalid_argument);
}

TEST(ReceivedPower, LosOnlyUnderTheLed)
{
  const auto b = received_power(without_walls(preset_scene("mid", 1)), Point3(2.5, 2.5, 1.0));
  EXPECT_LT(rel_diff(b.p_los_mw, 1000 * kMidCenterLos), 1e-12);
  EXPECT_EQ(b.p_nlos_mw, 0.0);
  EXPECT_NEAR(rss_dbm(b.total_mw()), -17.44, 5e-3);
}

TEST(ReceivedPower, FourLedsAtCenterAreEqual)
{
  for (auto name : {"small", "mid", "big"}) {
    const Scene s = preset_scene(name, 4);
    const auto b = received_power(s, Point3(s.room.lx / 2, s.room.ly / 2, 1.0));
    ASSERT_EQ(b.per_tx.size(), 4u);
    for (const auto& t : b.per_tx) {
      EXPECT_LT(rel_diff(t.los_mw, b.per_tx[0].los_mw), 1e-12);
      EXPECT_LT(rel_diff(t.nlos_mw, b.per_tx[0].nlos_mw), 1e-9);
    }
  }
}

TEST(ReceivedPower, BookkeepingAndBounds)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto name : {"small", "mid", "big"}) {
    for (int leds : {1, 4}) {
      const ChannelModel model(preset_scene(name, leds));
      const auto& room = model.scene().room;
      for (int k = 0; k < 20; ++k) {
        const Point3 p(u(rng) * room.lx, u(rng) * room.ly, u(rng) * 1.7);
        const auto b = model.received_power(p);
        double los = 0, nlos = 0, emitted = 0;
        for (const auto& t : b.per_tx) {
          EXPECT_GE(t.los_mw, 0.0);
          EXPECT_GE(t.nlos_mw, 0.0);
          los += t.los_mw;
          nlos += t.nlos_mw;
        }
        for (const auto& tx : model.scene().transmitters)
          emitted += tx.power_mw;
        EXPECT_LE(rel_diff(los, b.p_los_mw), 1e-12);
        EXPECT_LE(rel_diff(nlos, b.p_nlos_mw), 1e-12);
        EXPECT_LT(b.total_mw(), emitted);
      }
    }
  }
}

TEST(ReceivedPower, DecaysDownTheAxis)
{
  const ChannelModel model(without_walls(preset_scene("mid", 1)));
  double previous = std::numeric_limits<double>::infinity();
  for (double z = 2.9; z >= 0.0; z -= 0.1) {
    const double p = model.received_power(Point3(2.5, 2.5, z)).total_mw();
    EXPECT_LT(p, previous);
    previous = p;
  }
}

TEST(ReceivedPower, OutsideTheRoomThrows)
{
  const ChannelModel model(preset_scene("mid", 1));
  EXPECT_THROW(model.received_power(Point3(5.5, 1.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(model.received_power(Point3(1.0, 1.0, 3.0)), std::invalid_argument);
  EXPECT_THROW(model.received_power(Point3(1.0, 1.0, -0.1)), std::invalid_argument);
}

TEST(Decibels, Conversions)
{
  EXPECT_DOUBLE_EQ(rss_dbm(1.0), 0.0);
  EXPECT_DOUBLE_EQ(rss_dbm(1000.0), 30.0);
  EXPECT_NEAR(rss_dbm(1.8043e-2), -17.44, 5e-3);
  EXPECT_THROW(rss_dbm(0.0), std::invalid_argument);
  EXPECT_THROW(rss_dbm(-1.0), std::invalid_argument);

  EXPECT_DOUBLE_EQ(path_loss_db(1.0), 0.0);
  EXPECT_NEAR(path_loss_db(1.8043e-5), 47.44, 5e-3);
  EXPECT_THROW(path_loss_db(0.0), std::invalid_argument);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> e(-12, 2);
  for (int k = 0; k < 100; ++k) {
    const double h = std::pow(10.0, e(rng));
    EXPECT_NEAR(path_loss_db(h) + 10 * std::log10(h), 0.0, 1e-12);
    EXPECT_NEAR(dbm_to_mw(rss_dbm(h)), h, 1e-12 * h);
  }
}

TEST(Symmetry, SingleLedPresets)
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto name : {"small", "mid", "big"}) {
    const ChannelModel model(preset_scene(name, 1));
    const auto& r = model.scene().room;
    for (int k = 0; k < 20; ++k) {
      const double x = u(rng) * r.lx, y = u(rng) * r.ly, z = u(rng) * 1.7;
      const double p = model.received_power(Point3(x, y, z)).total_mw();
      for (const Point3& q : {Point3(r.lx - x, y, z), Point3(x, r.ly - y, z), Point3(y, x, z)})
        EXPECT_LT(rel_diff(model.received_power(q).total_mw(), p), 1e-6);
    }
  }
}
