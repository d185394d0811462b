#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calirec/csv.hpp"
#include "calirec/experiment.hpp"

namespace {

using calirec::ExperimentConfig;

// Flags shadow config-file values; only flags the user actually passed win.
void add_config_flags(CLI::App* cmd, ExperimentConfig& config) {
  cmd->add_option("--ratings", config.ratings_path, "ratings CSV (userId,itemId,rating,timestamp)");
  cmd->add_option("--items", config.items_path, "items CSV (movieId,title,genres)");
  cmd->add_option("--output-dir", config.output_dir, "directory for reports and exports");
  cmd->add_option("--train-fraction", config.train_fraction, "per-user temporal train share");
  cmd->add_option("--candidate-pool", config.candidate_pool, "candidates scored per user (N)");
  cmd->add_option("--top-k", config.top_k, "recommendation list length (K)");
  cmd->add_option("--scorer", config.scorer, "popularity, knn or import");
  cmd->add_option("--knn-neighbors", config.knn_neighbors, "neighborhood size for the knn scorer");
  cmd->add_option("--scores", config.scores_path, "score file for scorer=import");
  cmd->add_option("--engines", config.engines, "engines to run (none greedy cl ccl)");
  cmd->add_option("--rank-weighting", config.rank_weighting, "list distribution weights: uniform or logarithmic");
  cmd->add_option("--recency-weighting", config.recency_weighting, "profile weights: uniform or exponential:<half-life>");
  cmd->add_option("--lambda1", config.lambda1_grid, "calibration weight grid");
  cmd->add_option("--sweep-divergence", config.sweep_divergence, "divergence for the sweep ratio: js or hellinger");
  cmd->add_option("--max-nodes", config.budget_max_nodes, "solver node budget per user");
  cmd->add_option("--max-seconds", config.budget_max_seconds, "solver time budget per user");
  cmd->add_option("--alpha", config.alpha, "significance level");
  cmd->add_option("--seed", config.seed, "recorded dataset seed");
  cmd->add_flag("--strict", config.strict, "exit 3 if any user exhausts the solver budget");
}

ExperimentConfig merged_config(const CLI::App* cmd, const ExperimentConfig& flag_values,
                               const std::string& config_path) {
  if (config_path.empty()) return flag_values;
  ExperimentConfig config = calirec::load_config(config_path);
  ExperimentConfig defaults;
  auto passed = [&](const char* flag) { return cmd->count(flag) > 0; };
  if (passed("--ratings")) config.ratings_path = flag_values.ratings_path;
  if (passed("--items")) config.items_path = flag_values.items_path;
  if (passed("--output-dir")) config.output_dir = flag_values.output_dir;
  if (passed("--train-fraction")) config.train_fraction = flag_values.train_fraction;
  if (passed("--candidate-pool")) config.candidate_pool = flag_values.candidate_pool;
  if (passed("--top-k")) config.top_k = flag_values.top_k;
  if (passed("--scorer")) config.scorer = flag_values.scorer;
  if (passed("--knn-neighbors")) config.knn_neighbors = flag_values.knn_neighbors;
  if (passed("--scores")) config.scores_path = flag_values.scores_path;
  if (passed("--engines")) config.engines = flag_values.engines;
  if (passed("--rank-weighting")) config.rank_weighting = flag_values.rank_weighting;
  if (passed("--recency-weighting")) config.recency_weighting = flag_values.recency_weighting;
  if (passed("--lambda1")) config.lambda1_grid = flag_values.lambda1_grid;
  if (passed("--sweep-divergence")) config.sweep_divergence = flag_values.sweep_divergence;
  if (passed("--max-nodes")) config.budget_max_nodes = flag_values.budget_max_nodes;
  if (passed("--max-seconds")) config.budget_max_seconds = flag_values.budget_max_seconds;
  if (passed("--alpha")) config.alpha = flag_values.alpha;
  if (passed("--seed")) config.seed = flag_values.seed;
  if (passed("--strict")) config.strict = flag_values.strict;
  return config;
}

void print_solver_block(const calirec::RunResult& result) {
  for (const auto& [engine, stats] : result.solver) {
    std::printf("engine %-6s optimal=%d with_gap=%d max_gap=%s nodes=%lld\n",
                engine.c_str(), stats.optimal, stats.feasible_with_gap,
                calirec::format_double(stats.max_bound_gap).c_str(),
                static_cast<long long>(stats.nodes_explored));
    for (const auto& [user, gap] : stats.exhausted) {
      std::printf("  budget exhausted: user %lld, bound gap %s\n",
                  static_cast<long long>(user), calirec::format_double(gap).c_str());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calibrated re-ranking experiments"};
  app.require_subcommand(1);

  std::string config_path;
  ExperimentConfig flag_values;

  CLI::App* run = app.add_subcommand("run", "full pipeline: score, re-rank, evaluate, report");
  run->add_option("--config", config_path, "JSON config file");
  add_config_flags(run, flag_values);

  CLI::App* sweep = app.add_subcommand("sweep", "choose lambda1 by the ndcg/mc ratio");
  sweep->add_option("--config", config_path, "JSON config file");
  add_config_flags(sweep, flag_values);

  CLI::App* oracle = app.add_subcommand("oracle", "train-vs-test miscalibration per activity group");
  oracle->add_option("--config", config_path, "JSON config file");
  add_config_flags(oracle, flag_values);

  CLI::App* metrics = app.add_subcommand("metrics", "evaluate previously exported solution files");
  metrics->add_option("--config", config_path, "JSON config file");
  std::vector<std::string> solution_specs;
  metrics->add_option("--solutions", solution_specs, "engine=path pairs of solution CSVs")
      ->required();
  add_config_flags(metrics, flag_values);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      ExperimentConfig config = merged_config(run, flag_values, config_path);
      calirec::RunResult result = calirec::run_experiment(config);
      std::printf("lambda1 = %s%s\n", calirec::format_double(result.lambda1_used).c_str(),
                  result.swept ? " (swept)" : "");
      for (const auto& row : result.sweep.table) {
        std::printf("  lambda1=%s ndcg=%s mc=%s ratio=%s\n",
                    calirec::format_double(row.lambda1).c_str(),
                    calirec::format_double(row.ndcg).c_str(),
                    calirec::format_double(row.mc).c_str(),
                    calirec::format_double(row.ratio).c_str());
      }
      print_solver_block(result);
      std::printf("report written to %s\n", config.output_dir.c_str());
      if (config.strict && result.budget_exhausted) {
        std::fprintf(stderr, "strict mode: solver budget exhausted for at least one user\n");
        return 3;
      }
      return 0;
    }
    if (sweep->parsed()) {
      ExperimentConfig config = merged_config(sweep, flag_values, config_path);
      calirec::validate_config(config);
      calirec::PipelineData data = calirec::prepare_pipeline(config);
      calirec::SweepResult result =
          calirec::lambda_sweep(config, data, config.lambda1_grid);
      std::filesystem::create_directories(config.output_dir);
      calirec::CsvWriter out(
          (std::filesystem::path(config.output_dir) / "sweep.csv").string());
      out.write_row({"lambda1", "ndcg", "mc", "ratio"});
      for (const auto& row : result.table) {
        out.write_row({calirec::format_double(row.lambda1),
                       calirec::format_double(row.ndcg),
                       calirec::format_double(row.mc),
                       calirec::format_double(row.ratio)});
        std::printf("lambda1=%s ndcg=%s mc=%s ratio=%s\n",
                    calirec::format_double(row.lambda1).c_str(),
                    calirec::format_double(row.ndcg).c_str(),
                    calirec::format_double(row.mc).c_str(),
                    calirec::format_double(row.ratio).c_str());
      }
      out.close();
      std::printf("chosen lambda1 = %s\n", calirec::format_double(result.chosen).c_str());
      return 0;
    }
    if (oracle->parsed()) {
      ExperimentConfig config = merged_config(oracle, flag_values, config_path);
      auto analysis = calirec::run_oracle(config);
      for (auto group : {calirec::UserGroup::kActive, calirec::UserGroup::kSemiActive,
                         calirec::UserGroup::kInactive}) {
        const auto& row = analysis.at(group);
        std::printf("%-12s js=%s hellinger=%s n=%d\n", calirec::to_string(group),
                    calirec::format_double(row.js).c_str(),
                    calirec::format_double(row.hellinger).c_str(), row.n_users);
      }
      return 0;
    }
    if (metrics->parsed()) {
      ExperimentConfig config = merged_config(metrics, flag_values, config_path);
      std::map<std::string, std::string> files;
      for (const std::string& spec : solution_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
          std::fprintf(stderr, "--solutions expects engine=path, got '%s'\n",
                       spec.c_str());
          return 1;
        }
        files[spec.substr(0, eq)] = spec.substr(eq + 1);
      }
      calirec::run_metrics(config, files);
      std::printf("report written to %s\n", config.output_dir.c_str());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const calirec::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
