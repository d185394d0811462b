#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "calirec/confidence.hpp"
#include "calirec/distributions.hpp"
#include "calirec/types.hpp"

namespace calirec {

// Fraction of the top-k recommendations that appear in `relevant`.
double precision_at_k(const std::vector<ItemId>& recommended,
                      const std::set<ItemId>& relevant, int k);

// Fraction of `relevant` recovered by the top-k recommendations.
double recall_at_k(const std::vector<ItemId>& recommended,
                   const std::set<ItemId>& relevant, int k);

// Normalized discounted cumulative gain with binary gains and a 1/log2(r+1)
// discount; the ideal ranking places all relevant items first.
double ndcg_at_k(const std::vector<ItemId>& recommended,
                 const std::set<ItemId>& relevant, int k);

// Percentage of the catalog reached by the union of the given lists.
double catalog_coverage(const std::map<UserId, std::vector<ItemId>>& lists,
                        std::size_t catalog_size);

// Mean pairwise category-set dissimilarity (1 - Jaccard) within one list.
double intra_list_diversity(const std::vector<ItemId>& list, const ItemCatalog& catalog);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool significant = false;
};

// Two-sided paired t-test on per-user value pairs. Zero-variance differences
// collapse to p=1 when the mean difference is zero and p=0 otherwise.
TTestResult paired_t_test(const std::vector<double>& sample_a,
                          const std::vector<double>& sample_b, double alpha);

struct SignificanceEntry {
  std::string engine;
  std::string reference;
  std::string metric;
  double p = 1.0;
  bool significant = false;
};

struct EngineEval {
  // group name ("overall", "active", "semi-active", "inactive") -> metric -> value
  std::map<std::string, std::map<std::string, double>> table;
  // per-user series, kept for significance testing and figure emission
  std::map<UserId, double> precision, recall, ndcg, js, hellinger, diversity;
};

struct EvalReport {
  std::map<std::string, EngineEval> engines;
  std::vector<SignificanceEntry> significance;
  double alpha = 0.05;
  std::vector<UserId> users;
};

extern const std::vector<std::string> kMetricOrder;
extern const std::vector<std::string> kEngineOrder;
extern const std::vector<std::string> kGroupOrder;

// Scores every engine's ranked lists against the held-out test items, with
// calibration measured between each user's train-profile distribution and the
// recommended-list distribution. All engines must cover the identical user
// set. Adds paired significance tests of ccl against none and cl when those
// engines are present.
EvalReport evaluate(const std::map<std::string, std::map<UserId, std::vector<ItemId>>>& lists,
                    const std::map<UserId, std::set<ItemId>>& test_items,
                    const UserGroupAssignment& groups,
                    const std::map<UserId, CategoryDistribution>& profile_dists,
                    const ItemCatalog& catalog, const RankWeighting& rank_weighting,
                    int top_k, double alpha = 0.05);

// Flat export, one row per (engine, group, metric) in canonical order.
void write_report_csv(const EvalReport& report, const std::string& path);

}  // namespace calirec
