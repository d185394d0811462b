// Acceptance gate: ten end-to-end checks against frozen references and the
// bundled fixture. Prints one PASS/FAIL line per criterion and exits nonzero
// if any of them fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "calirec/confidence.hpp"
#include "calirec/distributions.hpp"
#include "calirec/evaluation.hpp"
#include "calirec/experiment.hpp"
#include "calirec/reranker.hpp"
#include "calirec/types.hpp"
#include "helpers.hpp"

using namespace calirec;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%2d] %s  %s%s%s\n", id, pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void criterion(int id, const std::string& name, Fn&& body) {
  try {
    auto [pass, detail] = body();
    report(id, name, pass, detail);
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string source_path(const std::string& rel) {
  return std::string(CALIREC_SOURCE_DIR) + "/" + rel;
}

// the committed fixture configuration with paths resolved to the source tree
ExperimentConfig fixture_config(const std::string& output_dir) {
  auto config = load_config(source_path("data/fixture/config.json"));
  config.ratings_path = source_path("data/fixture/ratings.csv");
  config.items_path = source_path("data/fixture/items.csv");
  config.output_dir = output_dir;
  validate_config(config);
  return config;
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> solver_matches_enumeration() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260823);
  const int trials = 200;
  int matched = 0;
  for (int trial = 0; trial < trials; ++trial) {
    auto p = testutil::random_problem(rng);
    auto exact = solve_exact_bruteforce(p);
    auto bnb = solve_branch_and_bound(p, SolverBudget{100000000, 60.0});
    bool ok = bnb.status == SolveStatus::kOptimal &&
              std::abs(bnb.objective - exact.objective) <= 1e-9 &&
              bnb.selected == exact.selected &&
              bnb.calibration_subset == exact.calibration_subset;
    if (!ok) {
      return {false, "instance " + std::to_string(trial) + " diverged (bnb " +
                         fmt(bnb.objective) + " vs enumeration " +
                         fmt(exact.objective) + ")"};
    }
    ++matched;
  }
  double elapsed = seconds_since(start);
  return {matched == trials && elapsed < 60.0,
          std::to_string(matched) + "/" + std::to_string(trials) +
              " instances matched, selections and tie-breaks identical, " +
              fmt(elapsed) + "s"};
}

std::pair<bool, std::string> zero_penalty_is_top_k() {
  testutil::TempDir tmp;
  auto config = fixture_config(tmp.file("unused"));
  auto data = prepare_pipeline(config);
  const std::vector<Engine> engines = {Engine::kNone, Engine::kGreedy, Engine::kCl,
                                       Engine::kCcl};
  int users_checked = 0;
  for (Engine engine : engines) {
    auto run = run_engine(config, data, engine, 0.0);
    for (const auto& [user, list] : data.candidates) {
      std::vector<ItemId> expected;
      for (int i = 0; i < config.top_k; ++i) {
        expected.push_back(list.candidates[static_cast<std::size_t>(i)].first);
      }
      if (run.lists.at(user) != expected) {
        return {false, std::string(to_string(engine)) + " deviated from the score" +
                           " ranking for user " + std::to_string(user)};
      }
    }
  }
  users_checked = static_cast<int>(data.candidates.size());
  return {users_checked > 0,
          "all 4 engines returned the pure score ranking for " +
              std::to_string(users_checked) + "/" + std::to_string(users_checked) +
              " users"};
}

std::pair<bool, std::string> full_calibration_reaches_divergence_floor() {
  std::mt19937_64 rng(31);
  const int trials = 40;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    testutil::ProblemKnobs knobs;
    knobs.max_items = 10;
    knobs.max_top_k = 4;
    knobs.full_calibration = true;
    knobs.fixed_lambda = 1e6;
    auto p = testutil::random_problem(rng, knobs);

    auto s = solve_branch_and_bound(p, SolverBudget{100000000, 60.0});
    if (s.status != SolveStatus::kOptimal) {
      return {false, "instance " + std::to_string(trial) + " not solved to optimality"};
    }

    int n = static_cast<int>(p.candidates.size());
    std::vector<int> pick(static_cast<std::size_t>(p.top_k));
    for (int i = 0; i < p.top_k; ++i) pick[static_cast<std::size_t>(i)] = i;
    double floor_div = std::numeric_limits<double>::infinity();
    while (true) {
      floor_div = std::min(floor_div, evaluate_selection(p, pick, pick).divergence);
      int i = p.top_k - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - p.top_k + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < p.top_k; ++j) {
        pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
    double gap = std::abs(s.divergence_part - floor_div);
    worst = std::max(worst, gap);
    if (gap > 1e-9) {
      return {false, "instance " + std::to_string(trial) + " missed the floor by " +
                         fmt(gap)};
    }
  }
  return {true, std::to_string(trials) +
                    " fully calibrated instances hit the minimum divergence" +
                    " (worst deviation " + fmt(worst) + ")"};
}

std::pair<bool, std::string> greedy_has_a_known_gap() {
  RerankProblem p;
  p.user = 1;
  p.top_k = 2;
  p.calib_slots = 2;
  p.lambda1 = 3.0;
  p.categories = {"A", "B"};
  p.target = {0.5, 0.5};
  auto cand = [](ItemId item, double score, std::vector<std::pair<int, double>> spread) {
    RerankCandidate c;
    c.item = item;
    c.score = score;
    c.spread = std::move(spread);
    return c;
  };
  p.candidates = {cand(2, 1.0, {{0, 1.0}}), cand(3, 0.95, {{1, 1.0}}),
                  cand(1, 0.8, {{0, 0.5}, {1, 0.5}})};

  auto greedy = greedy_calibrated(p);
  auto exact = solve_exact_bruteforce(p);
  auto bnb = solve_branch_and_bound(p, SolverBudget{});
  double gap = exact.objective - greedy.objective;
  bool pass = gap >= 1e-6 && std::abs(bnb.objective - exact.objective) <= 1e-12 &&
              bnb.selected == exact.selected;
  return {pass, "greedy " + fmt(greedy.objective) + " vs optimal " +
                    fmt(exact.objective) + ", gap " + fmt(gap)};
}

std::pair<bool, std::string> metric_hand_checks() {
  CategoryDistribution p({{"A", 0.5}, {"B", 0.5}});
  CategoryDistribution q({{"A", 1.0}});
  double js = js_divergence(p, q);
  double h = hellinger_distance(p, q);
  double tv = total_variation(CategoryDistribution({{"A", 0.7}, {"B", 0.3}}),
                              CategoryDistribution({{"A", 0.5}, {"B", 0.5}}));
  double ndcg = ndcg_at_k({10, 20, 30, 40, 50}, {20}, 5);

  std::vector<std::string> problems;
  if (std::abs(js - 0.31128) > 1e-4) problems.push_back("js=" + fmt(js));
  if (std::abs(js - 0.31127812445913283) > 1e-12) problems.push_back("js drifted");
  if (std::abs(h - 0.5412) > 1e-4) problems.push_back("hellinger=" + fmt(h));
  if (std::abs(h - std::sqrt(1.0 - std::sqrt(0.5))) > 1e-12) {
    problems.push_back("hellinger drifted");
  }
  if (std::abs(tv - 0.4) > 1e-15) problems.push_back("tv=" + fmt(tv));
  if (std::abs(ndcg - 1.0 / std::log2(3.0)) > 1e-9) problems.push_back("ndcg=" + fmt(ndcg));

  if (!problems.empty()) {
    std::string joined;
    for (const auto& s : problems) joined += (joined.empty() ? "" : ", ") + s;
    return {false, joined};
  }
  return {true, "js " + fmt(js) + ", hellinger " + fmt(h) + ", tv " + fmt(tv) +
                    ", ndcg " + fmt(ndcg) + " all on their references"};
}

std::pair<bool, std::string> beta_confidence_checks() {
  auto post = beta_posterior_from_counts(90, 10);
  if (post.alpha != 91.0 || post.beta != 11.0) {
    return {false, "posterior of (90,10) came out Beta(" + fmt(post.alpha) + "," +
                       fmt(post.beta) + ")"};
  }
  // reference from an independent 10^7-sample simulation of
  // P(X > Y), X ~ Beta(91,11), Y ~ Beta(10,2)
  const double simulated = 0.6658582;
  double integrated = prob_greater(post, BetaPosterior{10.0, 2.0});
  if (std::abs(integrated - simulated) > 1e-3) {
    return {false, "prob_greater " + fmt(integrated) + " vs simulation " +
                       fmt(simulated)};
  }
  double self = prob_greater(post, post);
  if (std::abs(self - 0.5) > 1e-6) {
    return {false, "prob_greater(x,x) = " + fmt(self)};
  }
  return {true, "Beta(91,11) posterior, P(X>Y) " + fmt(integrated) +
                    " within 1e-3 of simulation, self-comparison " + fmt(self)};
}

std::pair<bool, std::string> confidence_weights_and_groups() {
  auto w = confidence_weight({{1, 10}, {2, 20}, {3, 30}});
  if (w.weights.at(1) != 0.5 || w.weights.at(2) != 1.0 || w.weights.at(3) != 1.0) {
    return {false, "weights of sizes {10,20,30} came out {" + fmt(w.weights.at(1)) +
                       "," + fmt(w.weights.at(2)) + "," + fmt(w.weights.at(3)) + "}"};
  }

  std::map<UserId, int> ten, five;
  for (int u = 1; u <= 10; ++u) ten[u] = 100 - u;
  for (int u = 1; u <= 5; ++u) five[u] = 100 - u;
  auto g10 = assign_user_groups(ten);
  auto g5 = assign_user_groups(five);
  if (g10.count(UserGroup::kActive) != 2 || g10.count(UserGroup::kSemiActive) != 6 ||
      g10.count(UserGroup::kInactive) != 2) {
    return {false, "ten users did not split 2/6/2"};
  }
  if (g5.count(UserGroup::kActive) != 1 || g5.count(UserGroup::kSemiActive) != 3 ||
      g5.count(UserGroup::kInactive) != 1) {
    return {false, "five users did not split 1/3/1"};
  }

  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<UserId, int> sizes;
    int n = 5 + static_cast<int>(testutil::next_below(rng, 40));
    for (int u = 1; u <= n; ++u) {
      sizes[u] = 1 + static_cast<int>(testutil::next_below(rng, 300));
    }
    int scale = 2 + static_cast<int>(testutil::next_below(rng, 11));
    std::map<UserId, int> scaled;
    for (const auto& [u, s] : sizes) scaled[u] = s * scale;

    auto base = confidence_weight(sizes);
    auto big = confidence_weight(scaled);
    for (const auto& [u, value] : base.weights) {
      if (std::abs(big.weights.at(u) - value) > 1e-12) {
        return {false, "scaling population " + std::to_string(trial) + " by " +
                           std::to_string(scale) + " moved user " + std::to_string(u) +
                           " from " + fmt(value) + " to " + fmt(big.weights.at(u))};
      }
    }
    if (assign_user_groups(sizes).groups != assign_user_groups(scaled).groups) {
      return {false, "scaling changed the group assignment in population " +
                         std::to_string(trial)};
    }
  }
  return {true, "exact weights and 20/60/20 splits, scale-invariant on 100 random"
                " populations"};
}

std::pair<bool, std::string> oracle_orders_activity_groups() {
  // ten users, profile sizes strictly descending: users 1-2 active, 9-10
  // inactive. Train tastes span categories A and B; test items agree with
  // train for active users, half-agree for semi-active, and land in the
  // never-trained category C for inactive users.
  SplitDataset split;
  split.items.add({1, {"A"}});
  split.items.add({2, {"B"}});
  split.items.add({3, {"C"}});

  std::map<UserId, int> sizes;
  for (UserId u = 1; u <= 10; ++u) {
    int n_train = static_cast<int>(24 - 2 * u);
    sizes[u] = n_train;
    for (int j = 0; j < n_train; ++j) {
      split.train.push_back({u, j % 2 ? ItemId{2} : ItemId{1}, 4.0, j});
    }
    ItemId test_item;
    if (u <= 2) {
      test_item = 1;
    } else if (u <= 8) {
      test_item = u % 2 ? ItemId{1} : ItemId{2};
    } else {
      test_item = 3;
    }
    split.test.push_back({u, test_item, 4.0, 1000});
    if (u <= 2) {
      // a second test interaction keeps the active users' test distribution
      // identical to their train distribution
      split.test.push_back({u, 2, 4.0, 1001});
    }
  }

  auto groups = assign_user_groups(sizes);
  auto js = oracle_miscalibration(split, groups, Divergence::kJs);
  double active = js.at(UserGroup::kActive);
  double semi = js.at(UserGroup::kSemiActive);
  double inactive = js.at(UserGroup::kInactive);
  bool pass = inactive > semi && semi > active;
  return {pass, "oracle js active " + fmt(active) + " < semi-active " + fmt(semi) +
                    " < inactive " + fmt(inactive)};
}

struct FixtureRun {
  RunResult result;
  double seconds = 0.0;
};

FixtureRun run_fixture(const std::string& output_dir) {
  auto config = fixture_config(output_dir);
  auto start = std::chrono::steady_clock::now();
  FixtureRun run;
  run.result = run_experiment(config);
  run.seconds = seconds_since(start);
  return run;
}

std::pair<bool, std::string> fixture_end_to_end(const FixtureRun& run) {
  const auto& engines = run.result.report.engines;
  double ccl_js = engines.at("ccl").table.at("overall").at("js");
  double none_js = engines.at("none").table.at("overall").at("js");
  double ccl_cov = engines.at("ccl").table.at("overall").at("catalog_coverage");
  double cl_cov = engines.at("cl").table.at("overall").at("catalog_coverage");

  std::size_t gap_users = 0;
  for (const auto& [engine, stats] : run.result.solver) {
    for (const auto& [user, gap] : stats.exhausted) {
      if (gap < 0.0) return {false, "negative bound gap reported for user " +
                                        std::to_string(user)};
      ++gap_users;
    }
  }

  bool pass = run.result.swept && ccl_js < none_js && ccl_cov >= cl_cov &&
              run.seconds < 600.0;
  std::ostringstream detail;
  detail << "swept lambda1 " << fmt(run.result.lambda1_used) << ", ccl js "
         << fmt(ccl_js) << " < none js " << fmt(none_js) << ", ccl coverage "
         << fmt(ccl_cov) << " >= cl " << fmt(cl_cov) << ", " << gap_users
         << " budget-capped solves reported with their gaps, " << fmt(run.seconds)
         << "s";
  return {pass, detail.str()};
}

std::pair<bool, std::string> fixture_runs_are_identical(const std::string& dir_a,
                                                        const FixtureRun& first) {
  testutil::TempDir tmp;
  auto second = run_fixture(tmp.file("run2"));
  (void)second;

  const std::vector<std::string> files = {
      "report.json",         "report.csv",          "exclusions.txt",
      "solutions/none.csv",  "solutions/greedy.csv", "solutions/cl.csv",
      "solutions/ccl.csv",   "figures/fig1b_oracle_miscalibration.csv",
      "figures/fig2_catalog_coverage.csv", "figures/fig3_group_improvement.csv",
      "figures/fig4_diversity.csv"};
  for (const auto& name : files) {
    auto a = testutil::read_text(dir_a + "/" + name);
    auto b = testutil::read_text(tmp.file("run2") + "/" + name);
    if (a.empty() || a != b) {
      return {false, name + " differs between identical runs"};
    }
  }

  auto golden_path = source_path("tests/golden/report.json");
  auto golden = testutil::read_text(golden_path);
  auto produced = testutil::read_text(dir_a + "/report.json");
  if (golden.empty()) return {false, "missing golden file " + golden_path};
  if (golden != produced) {
    return {false, "report.json deviates from tests/golden/report.json"};
  }
  return {true, std::to_string(files.size()) +
                    " artifacts byte-identical across runs, report.json matches"
                    " the committed golden copy"};
}

}  // namespace

int main() {
  std::printf("acceptance checks against the bundled fixture and frozen references\n");

  criterion(1, "branch and bound matches exhaustive enumeration", solver_matches_enumeration);
  criterion(2, "zero penalty reduces every engine to the score ranking", zero_penalty_is_top_k);
  criterion(3, "full calibration with a huge penalty reaches the divergence floor",
            full_calibration_reaches_divergence_floor);
  criterion(4, "greedy baseline provably trails the exact solver", greedy_has_a_known_gap);
  criterion(5, "divergence and ranking metrics match hand-computed values", metric_hand_checks);
  criterion(6, "beta posterior and dominance probability match simulation", beta_confidence_checks);
  criterion(7, "confidence weights and activity groups behave exactly", confidence_weights_and_groups);
  criterion(8, "test-as-oracle miscalibration orders the activity groups", oracle_orders_activity_groups);

  testutil::TempDir tmp;
  std::string run_dir = tmp.file("run1");
  try {
    auto first = run_fixture(run_dir);
    criterion(9, "fixture experiment improves calibration without losing coverage",
              [&] { return fixture_end_to_end(first); });
    criterion(10, "repeated runs are byte-identical and match the golden report",
              [&] { return fixture_runs_are_identical(run_dir, first); });
  } catch (const std::exception& e) {
    report(9, "fixture experiment improves calibration without losing coverage", false,
           std::string("exception: ") + e.what());
    report(10, "repeated runs are byte-identical and match the golden report", false,
           "fixture run unavailable");
  }

  if (g_failures == 0) {
    std::printf("all 10 acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d of 10 acceptance criteria FAILED\n", g_failures);
  return 1;
}
