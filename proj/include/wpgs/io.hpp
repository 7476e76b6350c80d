#pragma once

// File formats.
//
// Mask binary (.bin), all integers unsigned:
//   offset 0   8 bytes  magic "WPGSMASK"
//   offset 8   4 bytes  format version (1)
//   offset 12  1 byte   1 = little-endian payload, 0 = big-endian
//   offset 13  3 bytes  zero padding
//   offset 16  8 bytes  grid_x
//   offset 24  8 bytes  grid_y
//   offset 32  grid_x * grid_y float64 phases in [0, 2 pi), index jx * grid_y + jy
// Header integers use the payload byte order.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wpgs/metrics.hpp"
#include "wpgs/planner.hpp"
#include "wpgs/sequence.hpp"

namespace wpgs {

void write_mask(const std::string& path, const PhaseMask<double>& mask);
PhaseMask<double> read_mask(const std::string& path);

// 8-bit binary PGM, gray level floor(256 * phase / 2 pi); x runs along image columns.
void write_mask_pgm(const std::string& path, const PhaseMask<double>& mask);

// id,re,im,intensity,phase
void write_field_csv(std::ostream& out, const TrapField<double>& field, const std::vector<std::uint32_t>& ids);
nlohmann::json field_json(const TrapField<double>& field, const std::vector<std::uint32_t>& ids);

nlohmann::json plan_json(const TransportPlan& plan);
void write_plan(const std::string& path, const TransportPlan& plan);
TransportPlan read_plan(const std::string& path);

// frame,trap_id,a,I_over_I0,dphi
void write_transients_csv(std::ostream& out, const RunRecord& rec);

// a,dphi,intensity on an a_steps x dphi_steps grid, a in [0, 1], dphi in [-pi, pi].
void write_landscape_csv(std::ostream& out, int a_steps, int dphi_steps);

nlohmann::json metrics_json(const MetricsReport& m);
// bin_left,bin_right,percent
void write_histogram_csv(std::ostream& out, const Histogram& h);
// task,solver,iterations,phase_std,mean_ms,median_ms,std_ms,frames_timed
void write_timing_csv(std::ostream& out, const std::string& task, const std::vector<BenchRow>& rows);

// settings.json, masks/frame_NNNN.bin, fields.csv, transients.csv, metrics.json,
// phase_hist.csv, ratio_hist.csv, timing.csv. Creates `dir` if needed.
void write_run_record(const std::string& dir, const RunRecord& rec, const nlohmann::json& settings);

}  // namespace wpgs
