#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "tslab/bandit.hpp"
#include "tslab/classifier.hpp"
#include "tslab/drift.hpp"
#include "tslab/engine.hpp"
#include "tslab/montecarlo.hpp"

namespace tslab {

inline constexpr const char* kToolVersion = "0.3.1";

// Problem document:
//   {"models": [[...], ...], "sigma": 1.0, "true_means": [...],
//    "sigma_true": 1.0, "prior": [...]}
// "sigma", "sigma_true" default to 1 and "prior" to uniform. Errors are
// InvalidProblem naming the offending field.
BanditProblem parse_problem(const nlohmann::json& doc);
BanditProblem load_problem(const std::string& path);
nlohmann::json to_json(const BanditProblem& problem);

// Provenance block embedded in every output file.
nlohmann::json provenance(std::uint64_t problem_hash, std::uint64_t master_seed);
std::string hex_hash(std::uint64_t hash);

nlohmann::json to_json(const DriftGeometry& geom);
nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const TwoArmRegime& regime);
nlohmann::json to_json(const RegimeNode& node);
nlohmann::json to_json(const RegimeTree& tree);
nlohmann::json to_json(const AbsorptionEstimate& est);
nlohmann::json to_json(const StationaryEstimate& est);
nlohmann::json to_json(const McSummary& summary);
nlohmann::json to_json(const TrajectoryMeta& meta);
nlohmann::json to_json(const KernelExperiment& exp);
nlohmann::json to_json(const LimitingActions& limits);

// CSV writers. Column layouts:
//   trajectory: t,action,reward,instant_regret,pi_1..pi_M   (pi blank on thinned rows)
//   mean path:  t,mean_pi_1..mean_pi_M,mean_regret
//   histogram:  bin_left,bin_right,count
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_mean_path_csv(std::ostream& os, const McSummary& summary);
void write_histogram_csv(std::ostream& os, const StationaryEstimate& est, int coordinate = 0);

// Human-readable tree rendering with margins.
std::string render_tree(const RegimeTree& tree);
std::string render_two_arm(const TwoArmRegime& regime);

}  // namespace tslab
