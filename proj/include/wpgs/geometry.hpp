#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wpgs {

inline constexpr double kMicron = 1e-6;

// SLM geometry and the optical train in front of it. Lengths in meters.
struct OpticalConfig {
  double wavelength = 820e-9;
  double focal_length = 4e-3;
  Eigen::Index grid_x = 256;
  Eigen::Index grid_y = 256;
  double pixel_pitch = 17e-6;
  // 0 means uniform unit illumination; > 0 selects a Gaussian beam of this waist.
  double illumination_waist = 0.0;
  // Overrides the waist when non-empty; must be grid_x x grid_y.
  Eigen::MatrixXd custom_illumination;

  void validate() const;

  Eigen::Index pixel_count() const { return grid_x * grid_y; }

  // Pixel-center coordinates, centered on the SLM: (j - (M-1)/2) * pitch.
  Eigen::VectorXd pixel_coords_x() const;
  Eigen::VectorXd pixel_coords_y() const;

  // Real amplitude per pixel, grid_x x grid_y.
  Eigen::MatrixXd illumination() const;

  bool operator==(const OpticalConfig& other) const;
};

// 256 x 256 with a 1.5 mm Gaussian beam. The apodization suppresses the sinc
// side lobes a small uniformly lit aperture throws onto neighboring sites.
OpticalConfig desk_scale_optics();
OpticalConfig full_scale_optics();

struct TrapSite {
  std::uint32_t id = 0;
  Eigen::Vector3d r = Eigen::Vector3d::Zero();

  double x() const { return r.x(); }
  double y() const { return r.y(); }
  double z() const { return r.z(); }
};

// Ordered trap positions; the order defines the trap index used everywhere else.
class TrapLayout {
 public:
  TrapLayout() = default;
  explicit TrapLayout(std::vector<TrapSite> sites);

  Eigen::Index size() const { return static_cast<Eigen::Index>(sites_.size()); }
  bool empty() const { return sites_.empty(); }
  const TrapSite& operator[](Eigen::Index n) const { return sites_[static_cast<std::size_t>(n)]; }
  const std::vector<TrapSite>& sites() const { return sites_; }

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  // N x 3 matrix of coordinates.
  Eigen::MatrixX3d positions() const;

  // Distinct z values in ascending order.
  std::vector<double> layers() const;

  // Rebuild with the same ids at new positions (N x 3).
  TrapLayout moved_to(const Eigen::MatrixX3d& positions) const;

 private:
  std::vector<TrapSite> sites_;
};

// Row-major grid (rows ascend in y, x ascends within a row) centered on `center`.
TrapLayout build_lattice(int nx, int ny, double spacing, const Eigen::Vector2d& center = Eigen::Vector2d::Zero(),
                         double z = 0.0, std::uint32_t first_id = 0);

enum class TaskKind { minimal_3x3, reconfig_2d, reconfig_3d_layers, offset_bilayer, custom };
enum class IntensityProfile { uniform, gradient_x, checkerboard };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);
std::string to_string(IntensityProfile profile);
IntensityProfile intensity_profile_from_string(const std::string& name);

struct LatticeSpec {
  int nx = 1;
  int ny = 1;
  double spacing = 5 * kMicron;
  double filling = 1.0;
  double z = 0.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();

  bool operator==(const LatticeSpec&) const = default;
};

struct TaskSpec {
  TaskKind kind = TaskKind::minimal_3x3;
  // One entry per layer. Source layers carry the filling fraction.
  std::vector<LatticeSpec> source_layers;
  std::vector<LatticeSpec> target_layers;

  IntensityProfile profile = IntensityProfile::uniform;
  double profile_contrast = 0.0;

  // minimal_3x3: total diagonal displacement of the middle row.
  double shift = 2.0 * kMicron;
  // offset_bilayer: number of sites exchanged between the two layers.
  int exchange_count = 0;

  // custom: explicit point lists. Empty intensity list means uniform.
  std::vector<Eigen::Vector3d> custom_sources;
  std::vector<Eigen::Vector3d> custom_targets;
  std::vector<double> custom_target_intensity;

  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TaskSpec& other) const;

  static TaskSpec minimal_3x3(double spacing = 5 * kMicron);
  // 36x36 -> 32x32, 79% filling (full) or 10x10 -> 8x8 (desk).
  static TaskSpec reconfig_2d(bool full_scale = false, std::uint64_t seed = 0);
  // Three layers at z = -30, 0, +30 um with mismatched source lattices.
  static TaskSpec reconfig_3d_layers(bool full_scale = false, std::uint64_t seed = 0);
  // Two laterally offset lattices separated axially by 20 um, non-uniform targets.
  static TaskSpec offset_bilayer(bool full_scale = false, std::uint64_t seed = 0);
};

// A sampled task: occupied sources, target sites, and per-target intensities.
struct Task {
  TrapLayout source;
  TrapLayout target;
  Eigen::VectorXd target_intensity;
  // Layer index of each source / target site (index into TaskSpec layers).
  std::vector<int> source_layer;
  std::vector<int> target_layer;
  // offset_bilayer: positions the exchanged atoms take in the opposite layer
  // before in-plane assignment. Equal to source positions otherwise.
  Eigen::MatrixX3d source_staging;
};

Task instantiate_task(const TaskSpec& spec);

}  // namespace wpgs
