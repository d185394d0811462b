#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "calirec/confidence.hpp"
#include "calirec/csv.hpp"
#include "calirec/distributions.hpp"
#include "calirec/evaluation.hpp"
#include "calirec/types.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace calirec;

TEST_CASE("precision and recall count hits in the top k") {
  std::vector<ItemId> recommended = {10, 20, 30, 40, 50};
  std::set<ItemId> relevant = {20, 99};

  CHECK(precision_at_k(recommended, relevant, 5) == doctest::Approx(0.2));
  CHECK(recall_at_k(recommended, relevant, 5) == doctest::Approx(0.5));
  CHECK(precision_at_k(recommended, relevant, 1) == 0.0);
  CHECK(recall_at_k(recommended, {20}, 2) == 1.0);

  // k beyond the list length counts only what exists but still divides by k
  CHECK(precision_at_k({20}, relevant, 4) == doctest::Approx(0.25));
  CHECK(recall_at_k({20, 99}, relevant, 4) == 1.0);

  CHECK_THROWS_AS(precision_at_k(recommended, relevant, 0), std::invalid_argument);
}

TEST_CASE("ndcg discounts hits logarithmically and normalizes by the ideal") {
  std::set<ItemId> one = {20};
  CHECK(ndcg_at_k({10, 20, 30, 40, 50}, one, 5) ==
        doctest::Approx(0.6309297535714575).epsilon(1e-12));  // 1/log2(3)
  CHECK(ndcg_at_k({20, 10, 30}, one, 3) == doctest::Approx(1.0));

  // hits at ranks 1 and 3 with two relevant items
  std::set<ItemId> two = {10, 30};
  double ideal = 1.0 + 1.0 / std::log2(3.0);
  CHECK(ndcg_at_k({10, 20, 30}, two, 3) ==
        doctest::Approx((1.0 + 0.5) / ideal).epsilon(1e-12));

  CHECK_THROWS_AS(ndcg_at_k({}, one, 3), std::invalid_argument);
  CHECK_THROWS_AS(ndcg_at_k({10}, {}, 3), std::invalid_argument);
}

TEST_CASE("recall never drops when k grows") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ItemId> recommended;
    for (int i = 0; i < 12; ++i) {
      recommended.push_back(static_cast<ItemId>(testutil::next_below(rng, 30)) + 1);
    }
    std::sort(recommended.begin(), recommended.end());
    recommended.erase(std::unique(recommended.begin(), recommended.end()),
                      recommended.end());
    std::set<ItemId> relevant;
    while (relevant.size() < 4) {
      relevant.insert(static_cast<ItemId>(testutil::next_below(rng, 30)) + 1);
    }
    double last = 0.0;
    for (int k = 1; k <= 12; ++k) {
      double r = recall_at_k(recommended, relevant, k);
      CHECK(r >= last - 1e-15);
      CHECK(ndcg_at_k(recommended, relevant, k) <= 1.0 + 1e-12);
      last = r;
    }
  }
}

TEST_CASE("catalog coverage is the reached percentage of the catalog") {
  std::map<UserId, std::vector<ItemId>> lists = {{1, {1, 2}}, {2, {2, 3}}};
  CHECK(catalog_coverage(lists, 4) == doctest::Approx(75.0));
  CHECK(catalog_coverage(lists, 3) == doctest::Approx(100.0));
  CHECK(catalog_coverage({}, 10) == 0.0);
  CHECK_THROWS_AS(catalog_coverage(lists, 0), std::invalid_argument);
}

TEST_CASE("intra-list diversity averages pairwise category dissimilarity") {
  ItemCatalog catalog;
  catalog.add({1, {"A"}});
  catalog.add({2, {"A"}});
  catalog.add({3, {"B"}});
  catalog.add({4, {"A", "B"}});

  CHECK(intra_list_diversity({1, 2}, catalog) == 0.0);  // identical category sets
  CHECK(intra_list_diversity({1, 3}, catalog) == 1.0);  // disjoint
  CHECK(intra_list_diversity({1, 4}, catalog) == doctest::Approx(0.5));
  // pairs (1,2), (1,3), (2,3): 0 + 1 + 1 over 3
  CHECK(intra_list_diversity({1, 2, 3}, catalog) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(intra_list_diversity({1}, catalog), std::invalid_argument);
}

TEST_CASE("paired t-test matches a worked reference and edge conventions") {
  std::vector<double> a = {0.62, 0.55, 0.71, 0.48, 0.66,
                           0.59, 0.73, 0.51, 0.64, 0.58};
  std::vector<double> b = {0.60, 0.57, 0.65, 0.47, 0.60,
                           0.61, 0.70, 0.46, 0.60, 0.55};
  auto result = paired_t_test(a, b, 0.05);
  CHECK(result.t == doctest::Approx(2.8219409606404464).epsilon(1e-10));
  CHECK(result.p == doctest::Approx(0.01998358142026881).epsilon(1e-9));
  CHECK(result.significant);

  auto same = paired_t_test(a, a, 0.05);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  CHECK_FALSE(same.significant);

  std::vector<double> shifted;
  for (double x : a) shifted.push_back(x + 0.1);
  auto constant = paired_t_test(shifted, a, 0.05);
  CHECK(constant.p == 0.0);
  CHECK(constant.significant);

  CHECK_THROWS_AS(paired_t_test({1.0}, {2.0}, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(paired_t_test(a, {1.0}, 0.05), std::invalid_argument);
}

namespace {

struct Scenario {
  std::map<std::string, std::map<UserId, std::vector<ItemId>>> lists;
  std::map<UserId, std::set<ItemId>> test_items;
  UserGroupAssignment groups;
  std::map<UserId, CategoryDistribution> profile_dists;
  ItemCatalog catalog;
};

// six users; the "sharp" engine hits every test item, "blunt" hits none.
// each sharp list pairs an odd item u with an even item u+7.
Scenario make_scenario() {
  Scenario s;
  for (int i = 1; i <= 14; ++i) {
    s.catalog.add({i, {i % 2 ? std::string("Odd") : std::string("Even")}});
  }
  std::map<UserId, int> sizes;
  for (UserId u = 1; u <= 6; ++u) {
    sizes[u] = static_cast<int>(10 * (7 - u));
    s.test_items[u] = {static_cast<ItemId>(u), static_cast<ItemId>(u + 7)};
    s.profile_dists.emplace(u, CategoryDistribution({{"Odd", 0.5}, {"Even", 0.5}}));
    s.lists["sharp"][u] = {static_cast<ItemId>(u), static_cast<ItemId>(u + 7)};
    ItemId other = (u % 6) + 1;
    s.lists["blunt"][u] = {static_cast<ItemId>(other), static_cast<ItemId>(other + 7)};
  }
  s.groups = assign_user_groups(sizes);
  return s;
}

}  // namespace

TEST_CASE("evaluate assembles per-group tables over all engines") {
  auto s = make_scenario();
  auto report = evaluate(s.lists, s.test_items, s.groups, s.profile_dists, s.catalog,
                         RankWeighting::parse("uniform"), 2, 0.05);

  REQUIRE(report.engines.count("sharp") == 1);
  REQUIRE(report.engines.count("blunt") == 1);
  CHECK(report.users.size() == 6);

  const auto& sharp = report.engines.at("sharp").table;
  const auto& blunt = report.engines.at("blunt").table;
  for (const auto& group : {"overall", "active", "semi-active", "inactive"}) {
    REQUIRE(sharp.count(group) == 1);
    for (const auto& metric : kMetricOrder) {
      REQUIRE(sharp.at(group).count(metric) == 1);
    }
  }
  CHECK(sharp.at("overall").at("precision") == doctest::Approx(1.0));
  CHECK(sharp.at("overall").at("recall") == doctest::Approx(1.0));
  CHECK(sharp.at("overall").at("ndcg") == doctest::Approx(1.0));
  CHECK(blunt.at("overall").at("precision") == doctest::Approx(0.0).scale(1.0));

  // every list holds one odd and one even item
  CHECK(sharp.at("overall").at("diversity") == doctest::Approx(1.0));
  CHECK(sharp.at("overall").at("js") == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // sharp reaches items 1..6 and 8..13, twelve of the fourteen
  CHECK(sharp.at("overall").at("catalog_coverage") ==
        doctest::Approx(100.0 * 12.0 / 14.0).epsilon(1e-12));

  // six users partition 1 active / 4 semi-active / 1 inactive; the group
  // means recombine into the overall mean
  double weighted = (1.0 * sharp.at("active").at("precision") +
                     4.0 * sharp.at("semi-active").at("precision") +
                     1.0 * sharp.at("inactive").at("precision")) /
                    6.0;
  CHECK(sharp.at("overall").at("precision") == doctest::Approx(weighted));

  // per-user series align with the users vector
  const auto& eval = report.engines.at("sharp");
  for (UserId u : report.users) {
    CHECK(eval.precision.count(u) == 1);
    CHECK(eval.ndcg.count(u) == 1);
    CHECK(eval.js.count(u) == 1);
  }
}

TEST_CASE("evaluate adds significance entries for ccl comparisons") {
  auto s = make_scenario();
  // rename engines so the ccl-vs-none comparison triggers
  std::map<std::string, std::map<UserId, std::vector<ItemId>>> lists;
  lists["ccl"] = s.lists.at("sharp");
  lists["none"] = s.lists.at("blunt");
  auto report = evaluate(lists, s.test_items, s.groups, s.profile_dists, s.catalog,
                         RankWeighting::parse("uniform"), 2, 0.05);

  REQUIRE(report.significance.size() == 3);  // precision, recall, ndcg vs none
  for (const auto& entry : report.significance) {
    CHECK(entry.engine == "ccl");
    CHECK(entry.reference == "none");
    CHECK(entry.p <= 1.0);
  }
}

TEST_CASE("evaluate rejects mismatched user sets") {
  auto s = make_scenario();
  s.lists["blunt"].erase(3);
  CHECK_THROWS_WITH_AS(evaluate(s.lists, s.test_items, s.groups, s.profile_dists,
                                s.catalog, RankWeighting::parse("uniform"), 2, 0.05),
                       doctest::Contains("mismatched"), std::invalid_argument);
}

TEST_CASE("report csv lists engines, groups and metrics in canonical order") {
  auto s = make_scenario();
  std::map<std::string, std::map<UserId, std::vector<ItemId>>> lists;
  lists["none"] = s.lists.at("blunt");
  lists["ccl"] = s.lists.at("sharp");
  auto report = evaluate(lists, s.test_items, s.groups, s.profile_dists, s.catalog,
                         RankWeighting::parse("uniform"), 2, 0.05);

  testutil::TempDir dir;
  auto path = dir.file("report.csv");
  write_report_csv(report, path);

  std::vector<std::vector<std::string>> rows;
  for_each_csv_row(path, {"engine", "group", "metric", "value"},
                   [&](const std::vector<std::string>& f, std::size_t) { rows.push_back(f); });
  REQUIRE(rows.size() == 2 * 4 * kMetricOrder.size());
  CHECK(rows[0][0] == "none");  // canonical engine order puts none first
  CHECK(rows[0][1] == "overall");
  CHECK(rows[0][2] == "precision");
  CHECK(rows[kMetricOrder.size()][1] == "active");
  CHECK(rows[4 * kMetricOrder.size()][0] == "ccl");
  for (const auto& row : rows) {
    CHECK_NOTHROW(std::stod(row[3]));
  }
}
