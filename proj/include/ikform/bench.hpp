#pragma once

/**
 * @file bench.hpp
 * @brief Scaling experiments (planar and spatial), the support-polygon toy
 *        problem, and CSV/JSON emission of per-trial records.
 */

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ikform/formulation.hpp"
#include "ikform/sampling.hpp"
#include "ikform/solver.hpp"

namespace ikform {

/// Independent re-check threshold that defines a successful trial.
inline constexpr double kSuccessTol = 1e-8;

struct TrialRecord {
  std::string experiment;
  int n_links = 0;
  int target_id = 0;
  std::string method;  ///< old | new | sampling (stability: equality | inequality)
  std::string branch;  ///< branch label; stability trials store the oracle verdict here
  std::uint64_t seed = 0;
  std::string status;
  double cost = 0.0;
  long iterations = 0;
  double max_violation = 0.0;
  double wall_time_s = 0.0;

  /// status == "solved". Records only carry "solved" after the independent re-check passed.
  bool success() const { return status == "solved"; }
  bool operator==(const TrialRecord&) const = default;
};

/// Status written when the solver reported success but the independent re-check failed.
inline constexpr const char* kRecheckFailed = "recheck-failed";

struct BenchOptions {
  SolverOptions solver;
  std::size_t sample_budget = 512;
  /// Fill wall_time_s; off by default so output is reproducible byte for byte.
  bool record_time = false;
};

enum class Mode3D { feasibility, optimality };
enum class Targets3D { fk, box };

Mode3D mode3d_from_string(const std::string& s);
Targets3D targets3d_from_string(const std::string& s);

/// Generator seeded from (seed, experiment, n, target index) so any cell can be replayed alone.
std::mt19937_64 trial_rng(std::uint64_t seed, const std::string& experiment, int n, int target);

/// Sorts by (experiment, n_links, target_id, method).
void sort_records(std::vector<TrialRecord>& records);

/// Planar chains: old, new and sampling records for each (n, target).
std::vector<TrialRecord> run_2d_scaling(const std::vector<int>& n_list, int targets_per_n, std::uint64_t seed,
                                        const BenchOptions& opts = {});

/// Spatial arms scaled_arm(n): old, new and sampling records for each (n, target).
std::vector<TrialRecord> run_3d_scaling(const std::vector<int>& n_list, int targets_per_n, std::uint64_t seed,
                                        Mode3D mode, const BenchOptions& opts = {},
                                        Targets3D targets = Targets3D::fk);

/// Boundary band of the stability toy; queries closer than this to the hull boundary are not scored.
inline constexpr double kStabilityBand = 1e-6;

/**
 * Random 8-point supports and query points; each trial is solved with the
 * equality (convex weights) and the inequality (margin >= 0) encoding.
 * The branch column holds the hull oracle verdict: inside, outside or boundary.
 */
std::vector<TrialRecord> run_stability_toy(std::uint64_t seed, int trials, const BenchOptions& opts = {});

/// Stability NLPs for one support set and query point.
NLProgram stability_equality_program(const SupportPoints& support, const Point2<double>& query);
NLProgram stability_inequality_program(const SupportPoints& support, const Point2<double>& query);

/// Whether the NLP verdict (solved = inside) matches the oracle; boundary trials count as agreeing.
bool stability_verdict_agrees(const TrialRecord& r);

struct GradientFamilyResult {
  std::string family;  ///< old-planar, new-planar, old-srs, new-srs
  int points = 0;
  double max_rel_error = 0.0;
};

/// Minimum distance kept from IK clip boundaries and angle-wrap seams when drawing check points.
inline constexpr double kGradientExclusion = 1e-3;

/**
 * Autodiff against central differences on random points of four program
 * families (planar n = 8 and scaled_arm(4), each in both formulations, with a
 * joint-centering cost). Points within kGradientExclusion of a probe boundary,
 * an angle-wrap seam or an Euler singularity are redrawn.
 */
std::vector<GradientFamilyResult> gradient_validation(int points, std::uint64_t seed, double h = 1e-6);

struct MethodSummary {
  std::string experiment;
  int n_links = 0;
  std::string method;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double median_iterations = 0.0;
  double mean_cost = 0.0;  ///< over successful trials
};

std::vector<MethodSummary> summarize(const std::vector<TrialRecord>& records);

enum class OutputFormat { csv, json };
OutputFormat output_format_from_string(const std::string& s);

inline constexpr const char* kCsvHeader =
    "experiment,n_links,target_id,method,branch,seed,status,cost,iterations,max_violation,wall_time_s";

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);
nlohmann::json records_to_json(const std::vector<TrialRecord>& records);
/// Writes to `path` ("-" means stdout); throws std::runtime_error naming the path on I/O failure.
void emit(const std::vector<TrialRecord>& records, OutputFormat format, const std::string& path);

std::vector<TrialRecord> parse_csv(std::istream& in);
std::vector<TrialRecord> records_from_json(const nlohmann::json& j);

}  // namespace ikform
