#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "calirec/confidence.hpp"
#include "calirec/data_model.hpp"
#include "calirec/evaluation.hpp"
#include "calirec/reranker.hpp"
#include "calirec/scoring.hpp"

namespace calirec {

struct ExperimentConfig {
  std::string ratings_path;
  std::string items_path;
  std::string output_dir = "out";
  double train_fraction = 0.8;
  int candidate_pool = 100;
  int top_k = 20;
  std::string scorer = "knn";  // popularity | knn | import
  int knn_neighbors = 20;
  std::string scores_path;  // required when scorer = import
  std::vector<std::string> engines = {"none", "greedy", "cl", "ccl"};
  std::string rank_weighting = "uniform";     // list distribution at evaluation time
  std::string recency_weighting = "uniform";  // profile interaction weights
  std::vector<double> lambda1_grid = {100.0};
  std::string sweep_divergence = "js";  // js | hellinger
  std::int64_t budget_max_nodes = 500000;
  double budget_max_seconds = 300.0;
  double alpha = 0.05;
  std::int64_t seed = 7;
  bool strict = false;
};

// Reads a JSON config file; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);

// Parameter sanity; throws std::invalid_argument on violations.
void validate_config(const ExperimentConfig& config);

// Everything downstream of ingest that every subcommand shares: catalog,
// split, profiles, activity groups, confidence weights, candidate pools.
struct PipelineData {
  ItemCatalog catalog;
  std::vector<std::pair<ItemId, std::string>> excluded_items;
  std::int64_t interactions_loaded = 0;
  std::int64_t interactions_dropped = 0;
  SplitDataset split;
  std::vector<UserId> dropped_users;
  std::map<UserId, UserProfile> profiles;
  std::map<UserId, CategoryDistribution> profile_dists;
  std::map<UserId, std::set<ItemId>> test_items;
  UserGroupAssignment groups;
  ConfidenceWeights confidence;
  std::map<UserId, CandidateList> candidates;  // users with a pool of at least K
  std::vector<UserId> users_no_candidates;
  std::vector<UserId> users_small_pool;  // pool below K, excluded
  std::vector<UserId> users_short_pool;  // pool below N but at least K, kept
};

PipelineData prepare_pipeline(const ExperimentConfig& config);

struct EngineSolverStats {
  int optimal = 0;
  int feasible_with_gap = 0;
  double max_bound_gap = 0.0;
  std::int64_t nodes_explored = 0;
  // users an exact solver could not close within the budget
  std::vector<std::pair<UserId, double>> exhausted;
};

struct EngineRun {
  std::map<UserId, RerankProblem> problems;
  std::map<UserId, RerankSolution> solutions;
  std::map<UserId, std::vector<ItemId>> lists;
  EngineSolverStats stats;
};

// Solves every prepared user with one engine at the given global lambda1.
EngineRun run_engine(const ExperimentConfig& config, const PipelineData& data,
                     Engine engine, double lambda1);

struct SweepRow {
  double lambda1 = 0.0;
  double ndcg = 0.0;
  double mc = 0.0;
  double ratio = 0.0;
};

struct SweepResult {
  double chosen = 0.0;
  std::vector<SweepRow> table;
};

// Runs the confidence-aware engine once per grid value and picks the lambda1
// maximizing ndcg / max(mc, 1e-6), ties to the smaller lambda1.
SweepResult lambda_sweep(const ExperimentConfig& config, const PipelineData& data,
                         const std::vector<double>& grid);

struct RunResult {
  EvalReport report;
  SweepResult sweep;  // table empty when the grid had a single value
  bool swept = false;
  double lambda1_used = 0.0;
  std::map<std::string, EngineSolverStats> solver;
  bool budget_exhausted = false;
};

// Full pipeline for every configured engine; writes report.json, report.csv,
// solutions/<engine>.csv, figures/*.csv and exclusions.txt under output_dir.
RunResult run_experiment(const ExperimentConfig& config);

// Evaluates previously exported solution files (engine name -> csv path)
// against the split derived from the config; writes report.json/report.csv.
EvalReport run_metrics(const ExperimentConfig& config,
                       const std::map<std::string, std::string>& solution_files);

// Train-vs-test miscalibration per activity group; writes the oracle CSV
// under output_dir/figures.
std::map<UserGroup, GroupOracleRow> run_oracle(const ExperimentConfig& config);

}  // namespace calirec
