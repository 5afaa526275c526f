#include "lumen/scene.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace lumen {

namespace {

Receiver reference_receiver()
{
  Receiver rx;
  rx.area_m2 = 1e-4;
  rx.fov_deg = 85.0;
  rx.filter_gain = 1.0;
  rx.refractive_index = 1.5;
  rx.responsivity = 1.0;
  return rx;
}

constexpr double kReferencePowerMw = 1000.0;
constexpr double kReferenceHpaDeg = 60.0;
constexpr double kReferenceReflectance = 0.8;

Scene build_scene(const Room& room, int led_count)
{
  Scene scene;
  scene.room = room;
  for (const auto& p : led_layout(room, led_count))
    scene.transmitters.push_back({p, kReferencePowerMw, kReferenceHpaDeg});
  scene.receiver = reference_receiver();
  scene.wall_reflectance = kReferenceReflectance;
  scene.validate();
  return scene;
}

[[noreturn]] void invalid(const std::string& what)
{
  throw std::invalid_argument("scene: " + what);
}

} // namespace

void Scene::validate() const
{
  if (!(room.lx > 0.0 && room.ly > 0.0 && room.lz > 0.0))
    invalid("room dimensions must be positive");
  if (transmitters.empty())
    invalid("at least one transmitter is required");
  for (const auto& tx : transmitters) {
    if (!(tx.power_mw > 0.0))
      invalid("transmitter power must be positive");
    if (!(tx.hpa_deg > 0.0 && tx.hpa_deg < 90.0))
      invalid("half-power angle must lie in (0, 90) degrees");
    if (tx.position.z() != room.lz)
      invalid("transmitters must sit on the ceiling plane z = lz");
    if (tx.position.x() < 0.0 || tx.position.x() > room.lx || tx.position.y() < 0.0
        || tx.position.y() > room.ly)
      invalid("transmitter outside the ceiling rectangle");
  }
  if (!(receiver.area_m2 > 0.0))
    invalid("photodetector area must be positive");
  if (!(receiver.fov_deg > 0.0 && receiver.fov_deg <= 90.0))
    invalid("field of view must lie in (0, 90] degrees");
  if (!(receiver.filter_gain > 0.0))
    invalid("filter gain must be positive");
  if (!(receiver.refractive_index >= 1.0))
    invalid("refractive index must be >= 1");
  if (!(wall_reflectance >= 0.0 && wall_reflectance <= 1.0))
    invalid("wall reflectance must lie in [0, 1]");
}

ScenePreset parse_preset(std::string_view name)
{
  if (name == "small")
    return ScenePreset::small;
  if (name == "mid")
    return ScenePreset::mid;
  if (name == "big")
    return ScenePreset::big;
  invalid("unknown preset '" + std::string(name) + "'");
}

std::string_view to_string(ScenePreset preset)
{
  switch (preset) {
  case ScenePreset::small:
    return "small";
  case ScenePreset::mid:
    return "mid";
  case ScenePreset::big:
    return "big";
  }
  return "?";
}

std::vector<Point3> led_layout(const Room& room, int led_count)
{
  if (led_count == 1)
    return {Point3(room.lx / 2, room.ly / 2, room.lz)};
  if (led_count == 4) {
    const double x0 = room.lx / 4, x1 = 3 * room.lx / 4;
    const double y0 = room.ly / 4, y1 = 3 * room.ly / 4;
    return {Point3(x0, y0, room.lz), Point3(x1, y0, room.lz), Point3(x0, y1, room.lz),
            Point3(x1, y1, room.lz)};
  }
  invalid("led count must be 1 or 4");
}

Scene preset_scene(ScenePreset preset, int led_count)
{
  switch (preset) {
  case ScenePreset::small:
    return build_scene({3.0, 3.0, 2.8}, led_count);
  case ScenePreset::mid:
    return build_scene({5.0, 5.0, 3.0}, led_count);
  case ScenePreset::big:
    return build_scene({6.5, 6.5, 3.5}, led_count);
  }
  invalid("unknown preset");
}

Scene preset_scene(std::string_view name, int led_count)
{
  return preset_scene(parse_preset(name), led_count);
}

Scene variable_scene(double lx, double ly, int led_count)
{
  auto in_range = [](double v) { return v >= kVariableRoomMin && v <= kVariableRoomMax; };
  if (!in_range(lx) || !in_range(ly))
    invalid("variable room length and width must lie in [3, 7] m");
  return build_scene({lx, ly, kVariableRoomHeight}, led_count);
}

void to_json(nlohmann::json& j, const Scene& scene)
{
  nlohmann::json txs = nlohmann::json::array();
  for (const auto& tx : scene.transmitters) {
    txs.push_back({{"position", {tx.position.x(), tx.position.y(), tx.position.z()}},
                   {"power_mw", tx.power_mw},
                   {"hpa_deg", tx.hpa_deg}});
  }
  const auto& rx = scene.receiver;
  j = {{"room", {{"lx", scene.room.lx}, {"ly", scene.room.ly}, {"lz", scene.room.lz}}},
       {"transmitters", txs},
       {"receiver",
        {{"area_m2", rx.area_m2},
         {"fov_deg", rx.fov_deg},
         {"filter_gain", rx.filter_gain},
         {"refractive_index", rx.refractive_index},
         {"responsivity", rx.responsivity}}},
       {"wall_reflectance", scene.wall_reflectance}};
}

void from_json(const nlohmann::json& j, Scene& scene)
{
  const auto& room = j.at("room");
  scene.room = {room.at("lx").get<double>(), room.at("ly").get<double>(),
                room.at("lz").get<double>()};
  scene.transmitters.clear();
  for (const auto& t : j.at("transmitters")) {
    const auto& p = t.at("position");
    if (!p.is_array() || p.size() != 3)
      invalid("transmitter position must be a 3-element array");
    scene.transmitters.push_back(
        {Point3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()),
         t.at("power_mw").get<double>(), t.at("hpa_deg").get<double>()});
  }
  const auto& rx = j.at("receiver");
  scene.receiver.area_m2 = rx.at("area_m2").get<double>();
  scene.receiver.fov_deg = rx.at("fov_deg").get<double>();
  scene.receiver.filter_gain = rx.at("filter_gain").get<double>();
  scene.receiver.refractive_index = rx.at("refractive_index").get<double>();
  scene.receiver.responsivity = rx.value("responsivity", 1.0);
  scene.wall_reflectance = j.at("wall_reflectance").get<double>();
}

Scene load_scene(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open scene file " + path);
  Scene scene;
  try {
    scene = nlohmann::json::parse(in).get<Scene>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed scene file " + path + ": " + e.what());
  }
  scene.validate();
  return scene;
}

} // namespace lumen
