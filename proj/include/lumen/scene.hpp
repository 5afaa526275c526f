#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <string_view>
#include <vector>

namespace lumen {

using Point3 = Eigen::Vector3d;

/// Empty rectangular room, corner-origin frame: x in [0,lx], y in [0,ly],
/// z in [0,lz] with the floor at z = 0.
struct Room {
  double lx = 0.0;
  double ly = 0.0;
  double lz = 0.0;

  bool operator==(const Room&) const = default;
};

/// Ceiling-mounted LED. Always faces straight down (-z).
struct Transmitter {
  Point3 position = Point3::Zero();
  double power_mw = 0.0;
  double hpa_deg = 0.0;

  bool operator==(const Transmitter&) const = default;
};

/// Upward-facing photodetector (+z normal).
struct Receiver {
  double area_m2 = 0.0;
  double fov_deg = 0.0;
  double filter_gain = 0.0;
  double refractive_index = 1.0;
  double responsivity = 1.0; // carried, not applied to optical RSS

  bool operator==(const Receiver&) const = default;
};

struct Scene {
  Room room;
  std::vector<Transmitter> transmitters;
  Receiver receiver;
  double wall_reflectance = 0.0;

  bool operator==(const Scene&) const = default;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

enum class ScenePreset { small, mid, big };

/// Parses "small", "mid" or "big"; throws std::invalid_argument otherwise.
ScenePreset parse_preset(std::string_view name);
std::string_view to_string(ScenePreset preset);

/// Room sizes and optics of the reference setups with one LED at the ceiling
/// center or four LEDs at the centers of the ceiling quadrants.
Scene preset_scene(ScenePreset preset, int led_count);
Scene preset_scene(std::string_view name, int led_count);

/// Room of lx x ly x 3 m with lx, ly in [3, 7] and reference optics.
Scene variable_scene(double lx, double ly, int led_count);

inline constexpr double kVariableRoomMin = 3.0;
inline constexpr double kVariableRoomMax = 7.0;
inline constexpr double kVariableRoomHeight = 3.0;

/// LED positions for a room: center (1) or quadrant centers (4).
std::vector<Point3> led_layout(const Room& room, int led_count);

void to_json(nlohmann::json& j, const Scene& scene);
void from_json(const nlohmann::json& j, Scene& scene);

/// Loads a scene document from disk and validates it.
Scene load_scene(const std::string& path);

} // namespace lumen
