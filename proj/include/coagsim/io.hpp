#pragma once

#include <string>
#include <vector>

#include "coagsim/dynamics.hpp"
#include "coagsim/solver.hpp"
#include "coagsim/verify.hpp"

namespace coagsim {

// CSV columns X, x, h, g at full round-trip precision (17 significant
// digits); metadata goes to a JSON sidecar next to it.
void write_profile_csv(const Profile& p, const std::string& csv_path);
void write_profile_meta_json(const Profile& p, const std::string& json_path);

// Reads csv_path plus its sidecar (csv path with .csv replaced by
// .meta.json, or explicit meta_path).
Profile read_profile(const std::string& csv_path, const std::string& meta_path = "");

void write_solve_report_json(const SolveReport& r, const std::string& path);
void write_verification_json(const VerificationReport& r, const std::string& path);

// columns: t, cell_center, f, x_rescaled, g_candidate
void write_trajectory_csv(const std::vector<SizeDistribution>& traj,
                          const std::vector<double>& scales, const std::string& path);

std::string format_full_precision(double v);

}  // namespace coagsim
