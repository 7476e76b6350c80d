#include "wpgs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "wpgs/errors.hpp"

namespace wpgs {

namespace {

Eigen::VectorXd centered_coords(Eigen::Index count, double pitch) {
  Eigen::VectorXd u(count);
  const double mid = 0.5 * static_cast<double>(count - 1);
  for (Eigen::Index j = 0; j < count; ++j) u(j) = (static_cast<double>(j) - mid) * pitch;
  return u;
}

// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
double unit_draw(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

bool finite(const Eigen::Vector3d& r) { return r.allFinite(); }

}  // namespace

void OpticalConfig::validate() const {
  if (!(wavelength > 0) || !(focal_length > 0) || !(pixel_pitch > 0))
    throw ConfigError("wavelength, focal_length and pixel_pitch must be positive");
  if (grid_x < 1 || grid_y < 1) throw ConfigError("grid dimensions must be at least 1x1");
  if (!(illumination_waist >= 0)) throw ConfigError("illumination_waist must be non-negative");
  if (custom_illumination.size() != 0) {
    if (custom_illumination.rows() != grid_x || custom_illumination.cols() != grid_y)
      throw ConfigError("illumination map must match the SLM grid");
    if (!custom_illumination.allFinite() || (custom_illumination.array() < 0).any())
      throw ConfigError("illumination entries must be finite and non-negative");
    if ((custom_illumination.array() == 0).all()) throw ConfigError("illumination map is all zero");
  }
}

Eigen::VectorXd OpticalConfig::pixel_coords_x() const { return centered_coords(grid_x, pixel_pitch); }
Eigen::VectorXd OpticalConfig::pixel_coords_y() const { return centered_coords(grid_y, pixel_pitch); }

Eigen::MatrixXd OpticalConfig::illumination() const {
  if (custom_illumination.size() != 0) return custom_illumination;
  if (illumination_waist <= 0) return Eigen::MatrixXd::Ones(grid_x, grid_y);
  const Eigen::ArrayXd gx = (-pixel_coords_x().array().square() / (illumination_waist * illumination_waist)).exp();
  const Eigen::ArrayXd gy = (-pixel_coords_y().array().square() / (illumination_waist * illumination_waist)).exp();
  return gx.matrix() * gy.matrix().transpose();
}

bool OpticalConfig::operator==(const OpticalConfig& o) const {
  return wavelength == o.wavelength && focal_length == o.focal_length && grid_x == o.grid_x &&
         grid_y == o.grid_y && pixel_pitch == o.pixel_pitch && illumination_waist == o.illumination_waist &&
         custom_illumination.rows() == o.custom_illumination.rows() &&
         custom_illumination.cols() == o.custom_illumination.cols() &&
         custom_illumination == o.custom_illumination;
}

OpticalConfig desk_scale_optics() {
  OpticalConfig c;
  c.illumination_waist = 1.5e-3;
  return c;
}

OpticalConfig full_scale_optics() {
  OpticalConfig c;
  c.grid_x = 1024;
  c.grid_y = 1024;
  return c;
}

TrapLayout::TrapLayout(std::vector<TrapSite> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw ConfigError("a trap layout needs at least one site");
  std::set<std::uint32_t> ids;
  for (const auto& s : sites_) {
    if (!finite(s.r)) throw ConfigError("trap coordinates must be finite");
    if (!ids.insert(s.id).second) throw ConfigError("duplicate trap id " + std::to_string(s.id));
  }
}

Eigen::MatrixX3d TrapLayout::positions() const {
  Eigen::MatrixX3d p(size(), 3);
  for (Eigen::Index n = 0; n < size(); ++n) p.row(n) = (*this)[n].r.transpose();
  return p;
}

std::vector<double> TrapLayout::layers() const {
  std::vector<double> z;
  for (const auto& s : sites_) z.push_back(s.z());
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  return z;
}

TrapLayout TrapLayout::moved_to(const Eigen::MatrixX3d& p) const {
  if (p.rows() != size()) throw DimensionError("position count does not match layout");
  std::vector<TrapSite> moved = sites_;
  for (Eigen::Index n = 0; n < size(); ++n) moved[static_cast<std::size_t>(n)].r = p.row(n).transpose();
  return TrapLayout(std::move(moved));
}

TrapLayout build_lattice(int nx, int ny, double spacing, const Eigen::Vector2d& center, double z,
                         std::uint32_t first_id) {
  if (nx < 1 || ny < 1) throw ConfigError("lattice dimensions must be at least 1x1");
  if (!(spacing > 0)) throw ConfigError("lattice spacing must be positive");
  std::vector<TrapSite> sites;
  sites.reserve(static_cast<std::size_t>(nx * ny));
  const double mx = 0.5 * (nx - 1), my = 0.5 * (ny - 1);
  std::uint32_t id = first_id;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      sites.push_back({id++, {center.x() + (ix - mx) * spacing, center.y() + (iy - my) * spacing, z}});
  return TrapLayout(std::move(sites));
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::minimal_3x3: return "minimal_3x3";
    case TaskKind::reconfig_2d: return "reconfig_2d";
    case TaskKind::reconfig_3d_layers: return "reconfig_3d_layers";
    case TaskKind::offset_bilayer: return "offset_bilayer";
    case TaskKind::custom: return "custom";
  }
  return "custom";
}

TaskKind task_kind_from_string(const std::string& name) {
  for (auto k : {TaskKind::minimal_3x3, TaskKind::reconfig_2d, TaskKind::reconfig_3d_layers,
                 TaskKind::offset_bilayer, TaskKind::custom})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown task kind '" + name + "'");
}

std::string to_string(IntensityProfile p) {
  switch (p) {
    case IntensityProfile::uniform: return "uniform";
    case IntensityProfile::gradient_x: return "gradient_x";
    case IntensityProfile::checkerboard: return "checkerboard";
  }
  return "uniform";
}

IntensityProfile intensity_profile_from_string(const std::string& name) {
  for (auto p : {IntensityProfile::uniform, IntensityProfile::gradient_x, IntensityProfile::checkerboard})
    if (to_string(p) == name) return p;
  throw ConfigError("unknown intensity profile '" + name + "'");
}

void TaskSpec::validate() const {
  auto check_lattice = [](const LatticeSpec& l, bool source) {
    if (l.nx < 1 || l.ny < 1) throw ConfigError("lattice dimensions must be at least 1x1");
    if (!(l.spacing > 0)) throw ConfigError("lattice spacing must be positive");
    if (source && !(l.filling > 0 && l.filling <= 1)) throw ConfigError("filling fraction must lie in (0, 1]");
    if (!std::isfinite(l.z) || !l.center.allFinite()) throw ConfigError("lattice position must be finite");
  };
  if (!(profile_contrast >= 0 && profile_contrast < 1)) throw ConfigError("profile_contrast must lie in [0, 1)");
  if (kind == TaskKind::custom) {
    if (custom_targets.empty()) throw ConfigError("custom task needs at least one target");
    if (!custom_target_intensity.empty() && custom_target_intensity.size() != custom_targets.size())
      throw ConfigError("custom target intensity count must match target count");
    for (double v : custom_target_intensity)
      if (!(v > 0)) throw ConfigError("target intensities must be positive");
    for (const auto& r : custom_sources)
      if (!finite(r)) throw ConfigError("custom source coordinates must be finite");
    for (const auto& r : custom_targets)
      if (!finite(r)) throw ConfigError("custom target coordinates must be finite");
    return;
  }
  if (kind == TaskKind::minimal_3x3) {
    if (source_layers.size() != 1) throw ConfigError("minimal_3x3 takes a single lattice");
    check_lattice(source_layers[0], true);
    return;
  }
  if (source_layers.empty() || source_layers.size() != target_layers.size())
    throw ConfigError("source and target layer lists must be non-empty and of equal length");
  for (const auto& l : source_layers) check_lattice(l, true);
  for (const auto& l : target_layers) check_lattice(l, false);
  for (std::size_t k = 0; k < source_layers.size(); ++k) {
    if (source_layers[k].z != target_layers[k].z) throw ConfigError("source and target layers must share z");
    if (kind != TaskKind::offset_bilayer &&
        target_layers[k].nx * target_layers[k].ny > source_layers[k].nx * source_layers[k].ny)
      throw ConfigError("target layer has more sites than its source lattice");
  }
  if (kind == TaskKind::offset_bilayer) {
    if (source_layers.size() != 2) throw ConfigError("offset_bilayer takes exactly two layers");
    if (exchange_count < 0) throw ConfigError("exchange_count must be non-negative");
  }
}

bool TaskSpec::operator==(const TaskSpec& o) const {
  return kind == o.kind && source_layers == o.source_layers && target_layers == o.target_layers &&
         profile == o.profile && profile_contrast == o.profile_contrast && shift == o.shift &&
         exchange_count == o.exchange_count && custom_sources == o.custom_sources &&
         custom_targets == o.custom_targets && custom_target_intensity == o.custom_target_intensity &&
         seed == o.seed;
}

TaskSpec TaskSpec::minimal_3x3(double spacing) {
  TaskSpec s;
  s.kind = TaskKind::minimal_3x3;
  s.source_layers = {LatticeSpec{3, 3, spacing, 1.0, 0.0, Eigen::Vector2d::Zero()}};
  s.target_layers = s.source_layers;
  return s;
}

TaskSpec TaskSpec::reconfig_2d(bool full_scale, std::uint64_t seed) {
  TaskSpec s;
  s.kind = TaskKind::reconfig_2d;
  const int src = full_scale ? 36 : 10, tgt = full_scale ? 32 : 8;
  s.source_layers = {LatticeSpec{src, src, 5 * kMicron, 0.79, 0.0, Eigen::Vector2d::Zero()}};
  s.target_layers = {LatticeSpec{tgt, tgt, 5 * kMicron, 1.0, 0.0, Eigen::Vector2d::Zero()}};
  s.seed = seed;
  return s;
}

TaskSpec TaskSpec::reconfig_3d_layers(bool full_scale, std::uint64_t seed) {
  TaskSpec s;
  s.kind = TaskKind::reconfig_3d_layers;
  const int base = full_scale ? 33 : 7, tgt = full_scale ? 32 : 6;
  const Eigen::Vector2d o = Eigen::Vector2d::Zero();
  s.source_layers = {LatticeSpec{base, base, 6 * kMicron, 0.94, -30 * kMicron, o},
                     LatticeSpec{base + 1, base + 1, 5 * kMicron, 0.89, 0.0, o},
                     LatticeSpec{base + 2, base + 2, 4 * kMicron, 0.84, 30 * kMicron, o}};
  for (const auto& l : s.source_layers) s.target_layers.push_back(LatticeSpec{tgt, tgt, 5 * kMicron, 1.0, l.z, o});
  s.seed = seed;
  return s;
}

TaskSpec TaskSpec::offset_bilayer(bool full_scale, std::uint64_t seed) {
  TaskSpec s;
  s.kind = TaskKind::offset_bilayer;
  const int src = full_scale ? 10 : 7, tgt = full_scale ? 10 : 6;
  const double filling = full_scale ? 1.0 : 0.9;
  const Eigen::Vector2d lower = Eigen::Vector2d::Zero();
  const Eigen::Vector2d upper(2.5 * kMicron, 2.5 * kMicron);
  s.source_layers = {LatticeSpec{src, src, 5 * kMicron, filling, -10 * kMicron, lower},
                     LatticeSpec{src, src, 5 * kMicron, filling, 10 * kMicron, upper}};
  s.target_layers = {LatticeSpec{tgt, tgt, 5 * kMicron, 1.0, -10 * kMicron, lower},
                     LatticeSpec{tgt, tgt, 5 * kMicron, 1.0, 10 * kMicron, upper}};
  s.profile = IntensityProfile::gradient_x;
  s.profile_contrast = 0.4;
  s.exchange_count = full_scale ? 10 : 4;
  s.seed = seed;
  return s;
}

namespace {

struct SampledLayer {
  std::vector<Eigen::Vector3d> occupied;
};

double profile_value(IntensityProfile profile, double contrast, double x, double x_extent, int ix, int iy) {
  switch (profile) {
    case IntensityProfile::uniform: return 1.0;
    case IntensityProfile::gradient_x: return 1.0 + contrast * (x_extent > 0 ? x / x_extent : 0.0);
    case IntensityProfile::checkerboard: return 1.0 + contrast * (((ix + iy) % 2 == 0) ? 1.0 : -1.0);
  }
  return 1.0;
}

Eigen::MatrixX3d stack(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::MatrixX3d m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

}  // namespace

Task instantiate_task(const TaskSpec& spec) {
  spec.validate();
  Task task;
  std::mt19937_64 gen(spec.seed);

  std::vector<TrapSite> src_sites, tgt_sites;
  std::vector<Eigen::Vector3d> staging;
  std::vector<double> intensity;

  if (spec.kind == TaskKind::custom) {
    if (spec.custom_sources.size() < spec.custom_targets.size())
      throw InfeasibleError("fewer sources than targets");
    std::uint32_t id = 0;
    for (const auto& r : spec.custom_sources) {
      src_sites.push_back({id++, r});
      staging.push_back(r);
    }
    id = 0;
    for (const auto& r : spec.custom_targets) tgt_sites.push_back({id++, r});
    intensity = spec.custom_target_intensity.empty() ? std::vector<double>(spec.custom_targets.size(), 1.0)
                                                     : spec.custom_target_intensity;
    task.source_layer.assign(src_sites.size(), 0);
    task.target_layer.assign(tgt_sites.size(), 0);
  } else if (spec.kind == TaskKind::minimal_3x3) {
    const auto& l = spec.source_layers[0];
    const TrapLayout src = build_lattice(3, 3, l.spacing, l.center, l.z);
    const Eigen::Vector3d step(spec.shift / std::sqrt(2.0), -spec.shift / std::sqrt(2.0), 0.0);
    for (const auto& s : src) {
      src_sites.push_back(s);
      staging.push_back(s.r);
      const bool middle_row = s.id >= 3 && s.id < 6;
      tgt_sites.push_back({s.id, middle_row ? Eigen::Vector3d(s.r + step) : s.r});
      intensity.push_back(1.0);
    }
    task.source_layer.assign(9, 0);
    task.target_layer.assign(9, 0);
  } else {
    const std::size_t layers = spec.source_layers.size();
    std::vector<SampledLayer> sampled(layers);
    std::uint32_t tgt_id = 0;
    for (std::size_t k = 0; k < layers; ++k) {
      const auto& sl = spec.source_layers[k];
      for (const auto& s : build_lattice(sl.nx, sl.ny, sl.spacing, sl.center, sl.z))
        if (sl.filling >= 1.0 || unit_draw(gen) < sl.filling) sampled[k].occupied.push_back(s.r);

      const auto& tl = spec.target_layers[k];
      const double x_extent = 0.5 * (tl.nx - 1) * tl.spacing;
      for (const auto& s : build_lattice(tl.nx, tl.ny, tl.spacing, tl.center, tl.z)) {
        const int ix = static_cast<int>(s.id) % tl.nx, iy = static_cast<int>(s.id) / tl.nx;
        tgt_sites.push_back({tgt_id++, s.r});
        intensity.push_back(profile_value(spec.profile, spec.profile_contrast, s.x() - tl.center.x(), x_extent, ix, iy));
        task.target_layer.push_back(static_cast<int>(k));
      }
    }

    // staged position and layer of every occupied source
    std::vector<std::vector<Eigen::Vector3d>> staged(layers);
    for (std::size_t k = 0; k < layers; ++k) staged[k] = sampled[k].occupied;

    if (spec.kind == TaskKind::offset_bilayer && spec.exchange_count > 0) {
      auto& lower = sampled[0].occupied;
      const auto& ul = spec.source_layers[1];
      const TrapLayout upper_lattice = build_lattice(ul.nx, ul.ny, ul.spacing, ul.center, ul.z);
      const Eigen::Vector3d c0(spec.source_layers[0].center.x(), spec.source_layers[0].center.y(), 0.0);
      std::vector<std::size_t> order(lower.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (lower[a] - c0).head<2>().norm() < (lower[b] - c0).head<2>().norm();
      });
      const auto count = std::min<std::size_t>(static_cast<std::size_t>(spec.exchange_count), lower.size());
      std::vector<bool> used(static_cast<std::size_t>(upper_lattice.size()), false);
      for (std::size_t e = 0; e < count; ++e) {
        const Eigen::Vector3d a = lower[order[e]];
        Eigen::Index best = -1;
        double best_d = 0;
        for (Eigen::Index m = 0; m < upper_lattice.size(); ++m) {
          if (used[static_cast<std::size_t>(m)]) continue;
          const double d = (upper_lattice[m].r - a).head<2>().norm();
          if (best < 0 || d < best_d) best = m, best_d = d;
        }
        if (best < 0) break;
        used[static_cast<std::size_t>(best)] = true;
        const Eigen::Vector3d b = upper_lattice[best].r;
        // lower atom goes up; an upper atom sitting at b (if any) comes down to a
        auto& up = staged[1];
        auto& down = staged[0];
        auto it_down = std::find(down.begin(), down.end(), a);
        *it_down = b;
        auto it_up = std::find_if(up.begin(), up.end(), [&](const Eigen::Vector3d& r) { return r == b; });
        if (it_up != up.end()) *it_up = a;
      }
    }

    std::uint32_t src_id = 0;
    for (std::size_t k = 0; k < layers; ++k) {
      for (std::size_t i = 0; i < sampled[k].occupied.size(); ++i) {
        src_sites.push_back({src_id++, sampled[k].occupied[i]});
        staging.push_back(staged[k][i]);
      }
    }
    // layer used for assignment follows the staged z
    for (const auto& r : staging) {
      int layer = 0;
      for (std::size_t k = 0; k < layers; ++k)
        if (spec.source_layers[k].z == r.z()) layer = static_cast<int>(k);
      task.source_layer.push_back(layer);
    }
    for (std::size_t k = 0; k < layers; ++k) {
      const auto have = std::count(task.source_layer.begin(), task.source_layer.end(), static_cast<int>(k));
      const auto need = std::count(task.target_layer.begin(), task.target_layer.end(), static_cast<int>(k));
      if (have < need)
        throw InfeasibleError("layer " + std::to_string(k) + " has " + std::to_string(have) +
                              " occupied sources for " + std::to_string(need) + " targets; change the seed");
    }
  }

  task.source = TrapLayout(std::move(src_sites));
  task.target = TrapLayout(std::move(tgt_sites));
  task.target_intensity = Eigen::Map<const Eigen::VectorXd>(intensity.data(), static_cast<Eigen::Index>(intensity.size()));
  task.source_staging = stack(staging);
  return task;
}

}  // namespace wpgs
