#include "calirec/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "calirec/csv.hpp"

namespace calirec {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw DataError(std::string(name) + ": " + e.what());
  }
}

Divergence parse_divergence(const std::string& name) {
  if (name == "js") return Divergence::kJs;
  if (name == "hellinger") return Divergence::kHellinger;
  throw std::invalid_argument("unknown divergence '" + name +
                              "' (expected js or hellinger)");
}

std::vector<Engine> requested_engines(const ExperimentConfig& config) {
  std::set<std::string> names(config.engines.begin(), config.engines.end());
  std::vector<Engine> engines;
  for (const std::string& name : kEngineOrder) {
    if (names.erase(name)) engines.push_back(parse_engine(name));
  }
  for (const std::string& name : names) parse_engine(name);  // throws on unknowns
  return engines;
}

std::unique_ptr<Scorer> make_scorer(const ExperimentConfig& config,
                                    const SplitDataset& split) {
  if (config.scorer == "popularity") return most_popular_scores(split);
  if (config.scorer == "knn") return item_knn_scores(split, config.knn_neighbors);
  if (config.scorer == "import") return import_scores(config.scores_path);
  throw std::invalid_argument("unknown scorer '" + config.scorer + "'");
}

PipelineData prepare_core(const ExperimentConfig& config) {
  PipelineData data;

  auto catalog_result = stage("load items", [&] {
    return load_item_categories(config.items_path);
  });
  data.catalog = std::move(catalog_result.catalog);
  data.excluded_items = std::move(catalog_result.excluded);

  auto filtered = stage("load ratings", [&] {
    auto interactions = load_interactions(config.ratings_path);
    data.interactions_loaded = static_cast<std::int64_t>(interactions.size());
    return filter_to_catalog(interactions, data.catalog);
  });
  data.interactions_dropped = filtered.dropped;

  auto split_result = stage("split", [&] {
    return temporal_split(filtered.kept, config.train_fraction, data.catalog);
  });
  data.split = std::move(split_result.split);
  data.dropped_users = std::move(split_result.dropped_users);

  stage("profiles", [&] {
    auto recency = RecencyWeighting::parse(config.recency_weighting);
    data.profiles = build_profiles(data.split, recency);
    for (const auto& [user, profile] : data.profiles) {
      data.profile_dists.emplace(user, profile_distribution(profile, data.catalog));
    }
    for (const auto& interaction : data.split.test) {
      data.test_items[interaction.user].insert(interaction.item);
    }
    return 0;
  });

  stage("groups", [&] {
    std::map<UserId, int> sizes;
    for (const auto& [user, profile] : data.profiles) {
      sizes[user] = static_cast<int>(profile.entries.size());
    }
    data.groups = assign_user_groups(sizes);
    data.confidence = confidence_weight(sizes);
    return 0;
  });

  return data;
}

void attach_candidates(const ExperimentConfig& config, PipelineData& data) {
  stage("candidates", [&] {
    auto scorer = make_scorer(config, data.split);
    auto result = top_n_candidates(*scorer, data.split, config.candidate_pool);
    data.users_no_candidates = std::move(result.empty_users);
    for (auto& [user, list] : result.lists) {
      if (static_cast<int>(list.candidates.size()) < config.top_k) {
        data.users_small_pool.push_back(user);
        continue;
      }
      if (list.short_pool) data.users_short_pool.push_back(user);
      data.candidates.emplace(user, std::move(list));
    }
    return 0;
  });
}

struct PerLambdaEval {
  double ndcg = 0.0;
  double mc = 0.0;
};

PerLambdaEval score_lists(const ExperimentConfig& config, const PipelineData& data,
                          const std::map<UserId, std::vector<ItemId>>& lists,
                          Divergence divergence) {
  auto rank_weighting = RankWeighting::parse(config.rank_weighting);
  PerLambdaEval out;
  std::map<UserId, double> divergences;
  double ndcg_sum = 0.0;
  for (const auto& [user, list] : lists) {
    ndcg_sum += ndcg_at_k(list, data.test_items.at(user), config.top_k);
    CategoryDistribution q = list_distribution(list, data.catalog, rank_weighting);
    const CategoryDistribution& p = data.profile_dists.at(user);
    divergences[user] = divergence == Divergence::kJs ? js_divergence(p, q)
                                                      : hellinger_distance(p, q);
  }
  out.ndcg = ndcg_sum / static_cast<double>(lists.size());
  out.mc = miscalibration(divergences);
  return out;
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  // basenames only: absolute paths would tie the report to one checkout
  j["ratings"] = std::filesystem::path(c.ratings_path).filename().string();
  j["items"] = std::filesystem::path(c.items_path).filename().string();
  j["train_fraction"] = c.train_fraction;
  j["candidate_pool"] = c.candidate_pool;
  j["top_k"] = c.top_k;
  j["scorer"] = c.scorer;
  j["knn_neighbors"] = c.knn_neighbors;
  if (!c.scores_path.empty()) j["scores_path"] = c.scores_path;
  j["engines"] = c.engines;
  j["rank_weighting"] = c.rank_weighting;
  j["recency_weighting"] = c.recency_weighting;
  j["lambda1_grid"] = c.lambda1_grid;
  j["sweep_divergence"] = c.sweep_divergence;
  j["budget_max_nodes"] = c.budget_max_nodes;
  j["budget_max_seconds"] = c.budget_max_seconds;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  j["strict"] = c.strict;
  return j;
}

ordered_json data_json(const PipelineData& d) {
  ordered_json j;
  j["catalog_items"] = d.catalog.size();
  j["excluded_items"] = d.excluded_items.size();
  j["interactions"] = d.interactions_loaded;
  j["interactions_dropped"] = d.interactions_dropped;
  j["users_split"] = d.profiles.size();
  j["users_dropped_at_split"] = d.dropped_users.size();
  j["users_evaluated"] = d.candidates.size();
  j["users_no_candidates"] = d.users_no_candidates.size();
  j["users_small_pool"] = d.users_small_pool.size();
  j["users_short_pool"] = d.users_short_pool.size();
  j["mean_profile_size"] = d.confidence.mean_profile_size;
  return j;
}

ordered_json engines_json(const EvalReport& report) {
  ordered_json j;
  auto emit = [&](const std::string& engine) {
    const EngineEval& eval = report.engines.at(engine);
    ordered_json groups;
    for (const std::string& group : kGroupOrder) {
      auto row = eval.table.find(group);
      if (row == eval.table.end()) continue;
      ordered_json metrics;
      for (const std::string& metric : kMetricOrder) {
        metrics[metric] = row->second.at(metric);
      }
      groups[group] = std::move(metrics);
    }
    j[engine] = std::move(groups);
  };
  for (const std::string& engine : kEngineOrder) {
    if (report.engines.count(engine)) emit(engine);
  }
  for (const auto& [engine, eval] : report.engines) {
    if (!j.contains(engine)) emit(engine);
  }
  return j;
}

ordered_json significance_json(const EvalReport& report) {
  ordered_json j = ordered_json::array();
  for (const auto& entry : report.significance) {
    ordered_json row;
    row["engine"] = entry.engine;
    row["reference"] = entry.reference;
    row["metric"] = entry.metric;
    row["p_value"] = entry.p;
    row["significant"] = entry.significant;
    j.push_back(std::move(row));
  }
  return j;
}

ordered_json oracle_json(const std::map<UserGroup, GroupOracleRow>& analysis) {
  ordered_json j;
  for (UserGroup group :
       {UserGroup::kActive, UserGroup::kSemiActive, UserGroup::kInactive}) {
    const GroupOracleRow& row = analysis.at(group);
    ordered_json entry;
    entry["js"] = row.js;
    entry["hellinger"] = row.hellinger;
    entry["n_users"] = row.n_users;
    j[to_string(group)] = std::move(entry);
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw DataError("failed writing " + path);
}

void write_exclusions(const std::string& path, const PipelineData& data) {
  std::string text;
  for (const auto& [item, reason] : data.excluded_items) {
    text += "item " + std::to_string(item) + ": " + reason + "\n";
  }
  for (UserId user : data.dropped_users) {
    text += "user " + std::to_string(user) +
            ": needs train and test interactions after the split\n";
  }
  for (UserId user : data.users_no_candidates) {
    text += "user " + std::to_string(user) + ": no scoreable candidates\n";
  }
  for (UserId user : data.users_small_pool) {
    text += "user " + std::to_string(user) + ": candidate pool below K, excluded\n";
  }
  for (UserId user : data.users_short_pool) {
    text += "user " + std::to_string(user) + ": candidate pool below N, kept\n";
  }
  write_text_file(path, text);
}

void write_fig2(const std::string& path, const EvalReport& report) {
  CsvWriter out(path);
  out.write_row({"engine", "group", "catalog_coverage"});
  for (const std::string& engine : kEngineOrder) {
    auto it = report.engines.find(engine);
    if (it == report.engines.end()) continue;
    for (const std::string& group : kGroupOrder) {
      auto row = it->second.table.find(group);
      if (row == it->second.table.end()) continue;
      out.write_row({engine, group, format_double(row->second.at("catalog_coverage"))});
    }
  }
  out.close();
}

void write_fig3(const std::string& path, const EvalReport& report) {
  CsvWriter out(path);
  out.write_row({"engine", "group", "metric", "relative_change"});
  auto base = report.engines.find("none");
  if (base != report.engines.end()) {
    for (const std::string& engine : {std::string("cl"), std::string("ccl")}) {
      auto it = report.engines.find(engine);
      if (it == report.engines.end()) continue;
      for (const std::string& group : kGroupOrder) {
        auto row = it->second.table.find(group);
        auto ref = base->second.table.find(group);
        if (row == it->second.table.end() || ref == base->second.table.end()) continue;
        for (const std::string& metric :
             {std::string("ndcg"), std::string("js"), std::string("diversity"),
              std::string("catalog_coverage")}) {
          double v = row->second.at(metric);
          double v0 = ref->second.at(metric);
          double change = v0 != 0.0 ? (v - v0) / v0 : 0.0;
          out.write_row({engine, group, metric, format_double(change)});
        }
      }
    }
  }
  out.close();
}

void write_fig4(const std::string& path, const EvalReport& report) {
  CsvWriter out(path);
  out.write_row({"engine", "group", "diversity"});
  for (const std::string& engine : kEngineOrder) {
    auto it = report.engines.find(engine);
    if (it == report.engines.end()) continue;
    for (const std::string& group : kGroupOrder) {
      auto row = it->second.table.find(group);
      if (row == it->second.table.end()) continue;
      out.write_row({engine, group, format_double(row->second.at("diversity"))});
    }
  }
  out.close();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!j.is_object()) throw DataError(path + ": config must be a JSON object");

  ExperimentConfig config;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "ratings") config.ratings_path = value.get<std::string>();
      else if (key == "items") config.items_path = value.get<std::string>();
      else if (key == "output_dir") config.output_dir = value.get<std::string>();
      else if (key == "train_fraction") config.train_fraction = value.get<double>();
      else if (key == "candidate_pool") config.candidate_pool = value.get<int>();
      else if (key == "top_k") config.top_k = value.get<int>();
      else if (key == "scorer") config.scorer = value.get<std::string>();
      else if (key == "knn_neighbors") config.knn_neighbors = value.get<int>();
      else if (key == "scores_path") config.scores_path = value.get<std::string>();
      else if (key == "engines") config.engines = value.get<std::vector<std::string>>();
      else if (key == "rank_weighting") config.rank_weighting = value.get<std::string>();
      else if (key == "recency_weighting")
        config.recency_weighting = value.get<std::string>();
      else if (key == "lambda1_grid")
        config.lambda1_grid = value.get<std::vector<double>>();
      else if (key == "sweep_divergence")
        config.sweep_divergence = value.get<std::string>();
      else if (key == "budget_max_nodes")
        config.budget_max_nodes = value.get<std::int64_t>();
      else if (key == "budget_max_seconds")
        config.budget_max_seconds = value.get<double>();
      else if (key == "alpha") config.alpha = value.get<double>();
      else if (key == "seed") config.seed = value.get<std::int64_t>();
      else if (key == "strict") config.strict = value.get<bool>();
      else throw DataError(path + ": unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw DataError(path + ": " + e.what());
  }
  return config;
}

void validate_config(const ExperimentConfig& config) {
  if (config.ratings_path.empty()) throw std::invalid_argument("ratings path is required");
  if (config.items_path.empty()) throw std::invalid_argument("items path is required");
  if (config.train_fraction <= 0.0 || config.train_fraction >= 1.0) {
    throw std::invalid_argument("train_fraction must be in (0,1)");
  }
  if (config.top_k < 2) throw std::invalid_argument("top_k must be at least 2");
  if (config.candidate_pool < config.top_k) {
    throw std::invalid_argument("candidate_pool must be at least top_k");
  }
  if (config.scorer != "popularity" && config.scorer != "knn" &&
      config.scorer != "import") {
    throw std::invalid_argument("scorer must be popularity, knn or import");
  }
  if (config.scorer == "import" && config.scores_path.empty()) {
    throw std::invalid_argument("scorer=import needs scores_path");
  }
  if (config.scorer == "knn" && config.knn_neighbors < 1) {
    throw std::invalid_argument("knn_neighbors must be at least 1");
  }
  if (config.engines.empty()) throw std::invalid_argument("no engines requested");
  for (const std::string& engine : config.engines) {
    try {
      parse_engine(engine);
    } catch (const DataError& e) {
      throw std::invalid_argument(e.what());
    }
  }
  if (config.lambda1_grid.empty()) {
    throw std::invalid_argument("lambda1_grid must not be empty");
  }
  for (double v : config.lambda1_grid) {
    if (v < 0.0) throw std::invalid_argument("lambda1 values must be non-negative");
  }
  parse_divergence(config.sweep_divergence);
  RankWeighting::parse(config.rank_weighting);
  RecencyWeighting::parse(config.recency_weighting);
  if (config.budget_max_nodes < 1 || config.budget_max_seconds <= 0.0) {
    throw std::invalid_argument("solver budget must be positive");
  }
  if (config.alpha <= 0.0 || config.alpha >= 1.0) {
    throw std::invalid_argument("alpha must be in (0,1)");
  }
}

PipelineData prepare_pipeline(const ExperimentConfig& config) {
  PipelineData data = prepare_core(config);
  attach_candidates(config, data);
  return data;
}

EngineRun run_engine(const ExperimentConfig& config, const PipelineData& data,
                     Engine engine, double lambda1) {
  EngineRun run;
  int n_users = static_cast<int>(data.candidates.size());
  SolverBudget budget{config.budget_max_nodes, config.budget_max_seconds};
  for (const auto& [user, list] : data.candidates) {
    double weight = 1.0;
    if (engine == Engine::kCcl || engine == Engine::kNone) {
      weight = data.confidence.weights.at(user);
    }
    run.problems.emplace(user, build_problem(user, list, data.profile_dists.at(user),
                                             data.catalog, config.top_k, weight,
                                             lambda1, n_users));
  }
  run.solutions = rerank_all(run.problems, engine, budget);
  for (const auto& [user, sol] : run.solutions) {
    run.lists.emplace(user, sol.selected);
    if (sol.status == SolveStatus::kOptimal) {
      ++run.stats.optimal;
    } else {
      ++run.stats.feasible_with_gap;
      if (engine != Engine::kGreedy) {
        run.stats.exhausted.emplace_back(user, sol.bound_gap);
      }
    }
    run.stats.max_bound_gap = std::max(run.stats.max_bound_gap, sol.bound_gap);
    run.stats.nodes_explored += sol.nodes_explored;
  }
  return run;
}

SweepResult lambda_sweep(const ExperimentConfig& config, const PipelineData& data,
                         const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("lambda sweep needs a non-empty grid");
  Divergence divergence = parse_divergence(config.sweep_divergence);
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  SweepResult result;
  double best_ratio = 0.0;
  bool first = true;
  for (double lambda : sorted) {
    EngineRun run = stage("sweep", [&] {
      return run_engine(config, data, Engine::kCcl, lambda);
    });
    PerLambdaEval eval = score_lists(config, data, run.lists, divergence);
    SweepRow row;
    row.lambda1 = lambda;
    row.ndcg = eval.ndcg;
    row.mc = eval.mc;
    row.ratio = eval.ndcg / std::max(eval.mc, 1e-6);
    result.table.push_back(row);
    if (first || row.ratio > best_ratio) {
      best_ratio = row.ratio;
      result.chosen = lambda;
      first = false;
    }
  }
  return result;
}

RunResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  std::vector<Engine> engines = requested_engines(config);
  PipelineData data = prepare_pipeline(config);
  if (data.candidates.empty()) {
    throw DataError("candidates: no user has a candidate pool of at least K items");
  }

  RunResult result;
  result.swept = config.lambda1_grid.size() > 1;
  if (result.swept) {
    result.sweep = lambda_sweep(config, data, config.lambda1_grid);
    result.lambda1_used = result.sweep.chosen;
  } else {
    result.lambda1_used = config.lambda1_grid.front();
    result.sweep.chosen = result.lambda1_used;
  }

  std::map<std::string, EngineRun> runs;
  for (Engine engine : engines) {
    std::string name = to_string(engine);
    runs.emplace(name, stage(("rerank " + name).c_str(), [&] {
                   return run_engine(config, data, engine, result.lambda1_used);
                 }));
  }

  std::map<std::string, std::map<UserId, std::vector<ItemId>>> lists;
  for (const auto& [name, run] : runs) lists.emplace(name, run.lists);
  result.report = stage("evaluate", [&] {
    auto rank_weighting = RankWeighting::parse(config.rank_weighting);
    return evaluate(lists, data.test_items, data.groups, data.profile_dists,
                    data.catalog, rank_weighting, config.top_k, config.alpha);
  });

  auto oracle = stage("oracle", [&] { return oracle_analysis(data.split, data.groups); });

  stage("write outputs", [&] {
    fs::create_directories(fs::path(config.output_dir) / "solutions");
    fs::create_directories(fs::path(config.output_dir) / "figures");
    auto out = [&](const char* rel) {
      return (fs::path(config.output_dir) / rel).string();
    };

    for (const auto& [name, run] : runs) {
      export_solutions(run.solutions, run.problems, parse_engine(name),
                       out(("solutions/" + name + ".csv").c_str()));
    }

    ordered_json j;
    j["config"] = config_json(config);
    j["data"] = data_json(data);
    ordered_json group_counts;
    for (UserGroup g :
         {UserGroup::kActive, UserGroup::kSemiActive, UserGroup::kInactive}) {
      group_counts[to_string(g)] = data.groups.count(g);
    }
    j["groups"] = std::move(group_counts);
    ordered_json lambda_block;
    lambda_block["grid"] = config.lambda1_grid;
    lambda_block["chosen"] = result.lambda1_used;
    lambda_block["swept"] = result.swept;
    j["lambda1"] = std::move(lambda_block);
    if (result.swept) {
      ordered_json sweep_rows = ordered_json::array();
      for (const SweepRow& row : result.sweep.table) {
        ordered_json r;
        r["lambda1"] = row.lambda1;
        r["ndcg"] = row.ndcg;
        r["mc"] = row.mc;
        r["ratio"] = row.ratio;
        sweep_rows.push_back(std::move(r));
      }
      j["sweep"] = std::move(sweep_rows);
    }
    j["engines"] = engines_json(result.report);
    j["significance"] = significance_json(result.report);
    ordered_json solver;
    for (const std::string& name : kEngineOrder) {
      auto it = runs.find(name);
      if (it == runs.end()) continue;
      const EngineSolverStats& stats = it->second.stats;
      ordered_json s;
      s["optimal"] = stats.optimal;
      s["feasible_with_gap"] = stats.feasible_with_gap;
      s["max_bound_gap"] = stats.max_bound_gap;
      s["nodes_explored"] = stats.nodes_explored;
      ordered_json exhausted = ordered_json::array();
      for (const auto& [user, gap] : stats.exhausted) {
        ordered_json e;
        e["user"] = user;
        e["bound_gap"] = gap;
        exhausted.push_back(std::move(e));
      }
      s["budget_exhausted_users"] = std::move(exhausted);
      solver[name] = std::move(s);
    }
    j["solver"] = std::move(solver);
    j["oracle"] = oracle_json(oracle);
    write_text_file(out("report.json"), j.dump(2) + "\n");

    write_report_csv(result.report, out("report.csv"));
    write_oracle_analysis_csv(out("figures/fig1b_oracle_miscalibration.csv"), oracle);
    write_fig2(out("figures/fig2_catalog_coverage.csv"), result.report);
    write_fig3(out("figures/fig3_group_improvement.csv"), result.report);
    write_fig4(out("figures/fig4_diversity.csv"), result.report);
    write_exclusions(out("exclusions.txt"), data);
    return 0;
  });

  for (const auto& [name, run] : runs) {
    result.solver.emplace(name, run.stats);
    if (!run.stats.exhausted.empty()) result.budget_exhausted = true;
  }
  return result;
}

EvalReport run_metrics(const ExperimentConfig& config,
                       const std::map<std::string, std::string>& solution_files) {
  validate_config(config);
  if (solution_files.empty()) throw std::invalid_argument("no solution files given");
  for (const auto& [engine, path] : solution_files) parse_engine(engine);

  PipelineData data = prepare_core(config);
  std::map<std::string, std::map<UserId, std::vector<ItemId>>> lists;
  for (const auto& [engine, path] : solution_files) {
    auto loaded = stage("load solutions", [&] { return load_solutions_csv(path); });
    std::map<UserId, std::vector<ItemId>> engine_lists;
    for (const auto& [user, sol] : loaded) engine_lists.emplace(user, sol.ranked);
    lists.emplace(engine, std::move(engine_lists));
  }

  EvalReport report = stage("evaluate", [&] {
    auto rank_weighting = RankWeighting::parse(config.rank_weighting);
    return evaluate(lists, data.test_items, data.groups, data.profile_dists,
                    data.catalog, rank_weighting, config.top_k, config.alpha);
  });

  stage("write outputs", [&] {
    fs::create_directories(config.output_dir);
    auto out = [&](const char* rel) {
      return (fs::path(config.output_dir) / rel).string();
    };
    ordered_json j;
    j["config"] = config_json(config);
    j["data"] = data_json(data);
    j["engines"] = engines_json(report);
    j["significance"] = significance_json(report);
    write_text_file(out("report.json"), j.dump(2) + "\n");
    write_report_csv(report, out("report.csv"));
    return 0;
  });
  return report;
}

std::map<UserGroup, GroupOracleRow> run_oracle(const ExperimentConfig& config) {
  if (config.ratings_path.empty() || config.items_path.empty()) {
    throw std::invalid_argument("oracle needs ratings and items paths");
  }
  PipelineData data = prepare_core(config);
  auto analysis = stage("oracle", [&] {
    return oracle_analysis(data.split, data.groups);
  });
  stage("write outputs", [&] {
    fs::create_directories(fs::path(config.output_dir) / "figures");
    write_oracle_analysis_csv(
        (fs::path(config.output_dir) / "figures/fig1b_oracle_miscalibration.csv")
            .string(),
        analysis);
    return 0;
  });
  return analysis;
}

}  // namespace calirec
