#include "calirec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "calirec/csv.hpp"

namespace calirec {

const std::vector<std::string> kMetricOrder = {
    "precision", "recall", "ndcg", "catalog_coverage", "diversity", "js", "hellinger"};
const std::vector<std::string> kEngineOrder = {"none", "greedy", "cl", "ccl"};
const std::vector<std::string> kGroupOrder = {"overall", "active", "semi-active",
                                              "inactive"};

namespace {

std::size_t hits_in_top_k(const std::vector<ItemId>& recommended,
                          const std::set<ItemId>& relevant, int k) {
  std::size_t limit = std::min(recommended.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < limit; ++i) {
    if (relevant.count(recommended[i])) ++hits;
  }
  return hits;
}

void require_k(int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& x : a) {
    if (b.count(x)) ++inter;
  }
  std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

double precision_at_k(const std::vector<ItemId>& recommended,
                      const std::set<ItemId>& relevant, int k) {
  require_k(k);
  if (recommended.empty()) throw std::invalid_argument("empty recommendation list");
  return static_cast<double>(hits_in_top_k(recommended, relevant, k)) /
         static_cast<double>(k);
}

double recall_at_k(const std::vector<ItemId>& recommended,
                   const std::set<ItemId>& relevant, int k) {
  require_k(k);
  if (recommended.empty()) throw std::invalid_argument("empty recommendation list");
  if (relevant.empty()) throw std::invalid_argument("empty relevant set");
  return static_cast<double>(hits_in_top_k(recommended, relevant, k)) /
         static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<ItemId>& recommended,
                 const std::set<ItemId>& relevant, int k) {
  require_k(k);
  if (recommended.empty()) throw std::invalid_argument("empty recommendation list");
  if (relevant.empty()) throw std::invalid_argument("empty relevant set");
  double dcg = 0.0;
  std::size_t limit = std::min(recommended.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < limit; ++i) {
    if (relevant.count(recommended[i])) {
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  double idcg = 0.0;
  std::size_t ideal = std::min(static_cast<std::size_t>(k), relevant.size());
  for (std::size_t i = 0; i < ideal; ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

double catalog_coverage(const std::map<UserId, std::vector<ItemId>>& lists,
                        std::size_t catalog_size) {
  if (catalog_size < 1) throw std::invalid_argument("catalog_size must be >= 1");
  std::set<ItemId> seen;
  for (const auto& [user, list] : lists) {
    seen.insert(list.begin(), list.end());
  }
  return 100.0 * static_cast<double>(seen.size()) / static_cast<double>(catalog_size);
}

double intra_list_diversity(const std::vector<ItemId>& list, const ItemCatalog& catalog) {
  if (list.size() < 2) throw std::invalid_argument("list must hold at least two items");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& cats_i = catalog.at(list[i]).categories;
    for (std::size_t j = i + 1; j < list.size(); ++j) {
      sum += 1.0 - jaccard(cats_i, catalog.at(list[j]).categories);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

TTestResult paired_t_test(const std::vector<double>& sample_a,
                          const std::vector<double>& sample_b, double alpha) {
  if (sample_a.size() != sample_b.size()) {
    throw std::invalid_argument("paired samples must have equal length");
  }
  std::size_t n = sample_a.size();
  if (n < 2) throw std::invalid_argument("paired t-test needs at least 2 pairs");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += sample_a[i] - sample_b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = sample_a[i] - sample_b[i] - mean;
    ss += d * d;
  }
  double variance = ss / static_cast<double>(n - 1);

  TTestResult result;
  if (variance <= 0.0) {
    if (mean == 0.0) {
      result.t = 0.0;
      result.p = 1.0;
    } else {
      result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      result.p = 0.0;
    }
  } else {
    result.t = mean / std::sqrt(variance / static_cast<double>(n));
    boost::math::students_t dist(static_cast<double>(n - 1));
    result.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t)));
  }
  result.significant = result.p < alpha;
  return result;
}

EvalReport evaluate(const std::map<std::string, std::map<UserId, std::vector<ItemId>>>& lists,
                    const std::map<UserId, std::set<ItemId>>& test_items,
                    const UserGroupAssignment& groups,
                    const std::map<UserId, CategoryDistribution>& profile_dists,
                    const ItemCatalog& catalog, const RankWeighting& rank_weighting,
                    int top_k, double alpha) {
  require_k(top_k);
  if (lists.empty()) throw std::invalid_argument("no engines to evaluate");

  std::vector<UserId> users;
  for (const auto& [user, list] : lists.begin()->second) users.push_back(user);
  for (const auto& [engine, engine_lists] : lists) {
    if (engine_lists.size() != users.size()) {
      throw std::invalid_argument("engine '" + engine +
                                  "' evaluated on a mismatched user set");
    }
    for (UserId user : users) {
      if (!engine_lists.count(user)) {
        throw std::invalid_argument("engine '" + engine + "' is missing user " +
                                    std::to_string(user));
      }
    }
  }
  if (users.empty()) throw std::invalid_argument("no users to evaluate");
  for (UserId user : users) {
    if (!test_items.count(user) || test_items.at(user).empty()) {
      throw std::invalid_argument("user " + std::to_string(user) +
                                  " has no test items");
    }
    if (!profile_dists.count(user)) {
      throw std::invalid_argument("user " + std::to_string(user) +
                                  " has no profile distribution");
    }
    if (!groups.groups.count(user)) {
      throw std::invalid_argument("user " + std::to_string(user) +
                                  " has no activity group");
    }
  }

  EvalReport report;
  report.alpha = alpha;
  report.users = users;

  for (const auto& [engine, engine_lists] : lists) {
    EngineEval eval;
    for (UserId user : users) {
      const auto& list = engine_lists.at(user);
      const auto& relevant = test_items.at(user);
      eval.precision[user] = precision_at_k(list, relevant, top_k);
      eval.recall[user] = recall_at_k(list, relevant, top_k);
      eval.ndcg[user] = ndcg_at_k(list, relevant, top_k);
      CategoryDistribution q = list_distribution(list, catalog, rank_weighting);
      const CategoryDistribution& p = profile_dists.at(user);
      eval.js[user] = js_divergence(p, q);
      eval.hellinger[user] = hellinger_distance(p, q);
      eval.diversity[user] = intra_list_diversity(list, catalog);
    }

    // group labels -> member users ("overall" spans everyone)
    std::map<std::string, std::vector<UserId>> members;
    members["overall"] = users;
    for (UserId user : users) {
      members[to_string(groups.groups.at(user))].push_back(user);
    }
    for (const auto& [group, group_users] : members) {
      if (group_users.empty()) continue;
      std::map<std::string, double> row;
      auto average = [&](const std::map<UserId, double>& series) {
        double sum = 0.0;
        for (UserId user : group_users) sum += series.at(user);
        return sum / static_cast<double>(group_users.size());
      };
      row["precision"] = average(eval.precision);
      row["recall"] = average(eval.recall);
      row["ndcg"] = average(eval.ndcg);
      row["js"] = average(eval.js);
      row["hellinger"] = average(eval.hellinger);
      row["diversity"] = average(eval.diversity);
      std::map<UserId, std::vector<ItemId>> group_lists;
      for (UserId user : group_users) group_lists.emplace(user, engine_lists.at(user));
      row["catalog_coverage"] = catalog_coverage(group_lists, catalog.size());
      eval.table[group] = std::move(row);
    }
    report.engines.emplace(engine, std::move(eval));
  }

  if (report.engines.count("ccl")) {
    const EngineEval& ccl = report.engines.at("ccl");
    for (const std::string& reference : {std::string("none"), std::string("cl")}) {
      if (!report.engines.count(reference)) continue;
      const EngineEval& ref = report.engines.at(reference);
      for (const std::string& metric : {std::string("precision"), std::string("recall"),
                                        std::string("ndcg")}) {
        auto series_of = [&](const EngineEval& e) -> const std::map<UserId, double>& {
          if (metric == "precision") return e.precision;
          if (metric == "recall") return e.recall;
          return e.ndcg;
        };
        std::vector<double> a, b;
        for (UserId user : users) {
          a.push_back(series_of(ccl).at(user));
          b.push_back(series_of(ref).at(user));
        }
        TTestResult t = paired_t_test(a, b, alpha);
        report.significance.push_back({"ccl", reference, metric, t.p, t.significant});
      }
    }
  }
  return report;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  CsvWriter out(path);
  out.write_row({"engine", "group", "metric", "value"});
  auto emit_engine = [&](const std::string& engine) {
    const EngineEval& eval = report.engines.at(engine);
    for (const std::string& group : kGroupOrder) {
      auto row = eval.table.find(group);
      if (row == eval.table.end()) continue;
      for (const std::string& metric : kMetricOrder) {
        out.write_row({engine, group, metric, format_double(row->second.at(metric))});
      }
    }
  };
  for (const std::string& engine : kEngineOrder) {
    if (report.engines.count(engine)) emit_engine(engine);
  }
  for (const auto& [engine, eval] : report.engines) {
    if (std::find(kEngineOrder.begin(), kEngineOrder.end(), engine) == kEngineOrder.end()) {
      emit_engine(engine);
    }
  }
  out.close();
}

}  // namespace calirec
