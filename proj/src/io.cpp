#include "wpgs/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "wpgs/errors.hpp"

namespace wpgs {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'W', 'P', 'G', 'S', 'M', 'A', 'S', 'K'};
constexpr std::uint32_t kVersion = 1;
constexpr bool kLittle = std::endian::native == std::endian::little;

template <typename T>
T byteswap(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  std::reverse(b, b + sizeof(T));
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& in, bool swap) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError("mask file truncated");
  return swap ? byteswap(v) : v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_mask(const std::string& path, const PhaseMask<double>& mask) {
  std::ofstream out = open_out(path, std::ios::binary);
  out.write(kMagic, sizeof kMagic);
  put(out, kVersion);
  put<std::uint8_t>(out, kLittle ? 1 : 0);
  const char pad[3] = {0, 0, 0};
  out.write(pad, 3);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(mask.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(mask.cols()));
  const PhaseMask<double> c = canonical(mask);
  for (Eigen::Index jx = 0; jx < c.rows(); ++jx)
    for (Eigen::Index jy = 0; jy < c.cols(); ++jy) put(out, c(jx, jy));
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

PhaseMask<double> read_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mask file '" + path + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("'" + path + "' is not a mask file");
  char raw_version[4];
  in.read(raw_version, 4);
  const auto flag = take<std::uint8_t>(in, false);
  if (flag > 1) throw ConfigError("mask file has an invalid endianness flag");
  const bool swap = (flag == 1) != kLittle;
  std::uint32_t version;
  std::memcpy(&version, raw_version, 4);
  if (swap) version = byteswap(version);
  if (version != kVersion) throw ConfigError("unsupported mask file version " + std::to_string(version));
  in.ignore(3);
  const auto gx = take<std::uint64_t>(in, swap), gy = take<std::uint64_t>(in, swap);
  if (gx == 0 || gy == 0 || gx > (1u << 16) || gy > (1u << 16)) throw ConfigError("mask file has invalid dimensions");
  PhaseMask<double> m(static_cast<Eigen::Index>(gx), static_cast<Eigen::Index>(gy));
  for (Eigen::Index jx = 0; jx < m.rows(); ++jx)
    for (Eigen::Index jy = 0; jy < m.cols(); ++jy) m(jx, jy) = take<double>(in, swap);
  if (!m.allFinite()) throw ConfigError("mask file contains non-finite phases");
  return m;
}

void write_mask_pgm(const std::string& path, const PhaseMask<double>& mask) {
  std::ofstream out = open_out(path, std::ios::binary);
  out << "P5\n" << mask.rows() << ' ' << mask.cols() << "\n255\n";
  const PhaseMask<double> c = canonical(mask);
  const double two_pi = 2 * std::numbers::pi;
  for (Eigen::Index jy = c.cols() - 1; jy >= 0; --jy)  // top image row is the largest y
    for (Eigen::Index jx = 0; jx < c.rows(); ++jx) {
      const auto level = static_cast<int>(std::floor(256 * c(jx, jy) / two_pi));
      out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0, 255))));
    }
}

static std::uint32_t id_of(const std::vector<std::uint32_t>& ids, Eigen::Index n) {
  return ids.empty() ? static_cast<std::uint32_t>(n) : ids[static_cast<std::size_t>(n)];
}

void write_field_csv(std::ostream& out, const TrapField<double>& field, const std::vector<std::uint32_t>& ids) {
  out << "id,re,im,intensity,phase\n";
  for (Eigen::Index n = 0; n < field.size(); ++n)
    out << id_of(ids, n) << ',' << field(n).real() << ',' << field(n).imag() << ',' << std::norm(field(n)) << ','
        << std::arg(field(n)) << '\n';
}

json field_json(const TrapField<double>& field, const std::vector<std::uint32_t>& ids) {
  json arr = json::array();
  for (Eigen::Index n = 0; n < field.size(); ++n)
    arr.push_back({{"id", id_of(ids, n)},
                   {"re", field(n).real()},
                   {"im", field(n).imag()},
                   {"intensity", std::norm(field(n))},
                   {"phase", std::arg(field(n))}});
  return arr;
}

json plan_json(const TransportPlan& plan) {
  const DisplacementStats d = displacement_stats(plan);
  json traps = json::array();
  for (Eigen::Index n = 0; n < plan.traps(); ++n) {
    json wp = json::array();
    for (const auto& w : plan.waypoints) wp.push_back({w(n, 0), w(n, 1), w(n, 2)});
    const auto un = static_cast<std::size_t>(n);
    traps.push_back({{"id", id_of(plan.ids, n)},
                     {"layer", plan.layer.empty() ? 0 : plan.layer[un]},
                     {"source_index", plan.source_index.empty() ? n : plan.source_index[un]},
                     {"target_intensity", plan.target_intensity(n)},
                     {"waypoints", wp}});
  }
  return {{"frames", plan.frames},
          {"max_step", plan.max_step},
          {"displacement", {{"mean", d.mean}, {"max", d.max}}},
          {"traps", traps}};
}

void write_plan(const std::string& path, const TransportPlan& plan) {
  std::ofstream out = open_out(path);
  out << plan_json(plan).dump(1) << '\n';
}

TransportPlan read_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan '" + path + "'");
  try {
    const json j = json::parse(in);
    TransportPlan p;
    p.frames = j.at("frames").get<int>();
    p.max_step = j.at("max_step").get<double>();
    const auto& traps = j.at("traps");
    const auto n = static_cast<Eigen::Index>(traps.size());
    p.waypoints.assign(static_cast<std::size_t>(p.frames + 1), Eigen::MatrixX3d(n, 3));
    p.target_intensity.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const json& tr = traps[static_cast<std::size_t>(t)];
      p.ids.push_back(tr.at("id").get<std::uint32_t>());
      p.layer.push_back(tr.at("layer").get<int>());
      p.source_index.push_back(tr.at("source_index").get<Eigen::Index>());
      p.target_intensity(t) = tr.at("target_intensity").get<double>();
      const json& wp = tr.at("waypoints");
      if (wp.size() != p.waypoints.size()) throw ConfigError("plan waypoint count does not match frames");
      for (std::size_t l = 0; l < wp.size(); ++l)
        for (int c = 0; c < 3; ++c) p.waypoints[l](t, c) = wp[l][static_cast<std::size_t>(c)].get<double>();
    }
    return p;
  } catch (const json::exception& e) {
    throw ConfigError("malformed plan '" + path + "': " + e.what());
  }
}

void write_transients_csv(std::ostream& out, const RunRecord& rec) {
  out << "frame,trap_id,a,I_over_I0,dphi\n";
  for (const auto& t : rec.transients) {
    const Eigen::VectorXd& dphi = rec.inputs.dphi[static_cast<std::size_t>(t.from)];
    for (const auto& s : t.samples)
      for (Eigen::Index n = 0; n < s.ratio.size(); ++n)
        out << t.from << ',' << id_of(rec.ids, n) << ',' << s.a << ',' << s.ratio(n) << ',' << dphi(n) << '\n';
  }
}

void write_landscape_csv(std::ostream& out, int a_steps, int dphi_steps) {
  if (a_steps < 2 || dphi_steps < 2) throw ConfigError("landscape needs at least 2 steps per axis");
  const double pi = std::numbers::pi;
  out << "a,dphi,intensity\n";
  for (int i = 0; i < a_steps; ++i) {
    const double a = static_cast<double>(i) / (a_steps - 1);
    for (int k = 0; k < dphi_steps; ++k) {
      const double d = -pi + 2 * pi * k / (dphi_steps - 1);
      out << a << ',' << d << ',' << intensity_model(a, d) << '\n';
    }
  }
}

json metrics_json(const MetricsReport& m) {
  json j;
  j["nu"] = m.nu;
  j["nu_min"] = m.nu_min;
  j["phase"] = {{"count", m.phase.count},
                {"mean", m.phase.mean},
                {"std", m.phase.std},
                {"std_about_zero", m.phase.std_about_zero},
                {"bins", m.phase.hist.bins()}};
  json below = json::object();
  for (std::size_t k = 0; k < m.transition.thresholds.size(); ++k) {
    std::ostringstream key;
    key << m.transition.thresholds[k];
    below[key.str()] = m.transition.fraction_below[k];
  }
  j["transition"] = {{"count", m.transition.count},
                     {"min", m.transition.count ? json(m.transition.min) : json(nullptr)},
                     {"fraction_below", below},
                     {"bins", m.transition.hist.bins()}};
  j["displacement"] = {{"mean", m.displacement.mean}, {"max", m.displacement.max}};
  return j;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_left,bin_right,percent\n";
  for (std::size_t b = 0; b < h.bins(); ++b) out << h.left(b) << ',' << h.right(b) << ',' << h.percent[b] << '\n';
}

void write_timing_csv(std::ostream& out, const std::string& task, const std::vector<BenchRow>& rows) {
  out << "task,solver,iterations,phase_std,mean_ms,median_ms,std_ms,frames_timed\n";
  for (const auto& r : rows)
    out << task << ',' << to_string(r.solver) << ',' << r.iterations << ',' << r.phase_std << ',' << r.mean_ms << ','
        << r.median_ms << ',' << r.std_ms << ',' << r.frames_timed << '\n';
}

void write_run_record(const std::string& dir, const RunRecord& rec, const json& settings) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "masks", ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path root(dir);

  json snapshot = settings;
  snapshot["solver_kind"] = to_string(rec.sequence.solver);
  open_out((root / "settings.json").string()) << snapshot.dump(2) << '\n';

  const auto& frames = rec.sequence.frames;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    std::ostringstream name;
    name << "frame_" << std::setw(4) << std::setfill('0') << l << ".bin";
    write_mask((root / "masks" / name.str()).string(), frames[l].mask);
  }

  {
    auto out = open_out((root / "fields.csv").string());
    out << "frame,id,re,im,intensity,phase\n";
    for (std::size_t l = 0; l < frames.size(); ++l) {
      const auto& e = frames[l].field;
      for (Eigen::Index n = 0; n < e.size(); ++n)
        out << l << ',' << id_of(rec.ids, n) << ',' << e(n).real() << ',' << e(n).imag() << ',' << std::norm(e(n)) << ','
            << std::arg(e(n)) << '\n';
    }
  }
  {
    auto out = open_out((root / "transients.csv").string());
    write_transients_csv(out, rec);
  }
  {
    json m = metrics_json(rec.metrics);
    json layers = json::object();
    for (const auto& [z, r] : rec.layers) {
      std::ostringstream key;
      key << std::setprecision(17) << z;
      layers[key.str()] = metrics_json(r);
    }
    if (!rec.layers.empty()) m["layers"] = layers;
    m["mean_solve_ms"] = rec.mean_solve_ms(1);
    open_out((root / "metrics.json").string()) << m.dump(2) << '\n';
  }
  {
    auto out = open_out((root / "phase_hist.csv").string());
    write_histogram_csv(out, rec.metrics.phase.hist);
  }
  {
    auto out = open_out((root / "ratio_hist.csv").string());
    write_histogram_csv(out, rec.metrics.transition.hist);
  }
  {
    auto out = open_out((root / "timing.csv").string());
    out << "frame,solve_ms\n";
    for (std::size_t l = 0; l < frames.size(); ++l) out << l << ',' << 1e3 * frames[l].solve_seconds << '\n';
  }
}

}  // namespace wpgs
