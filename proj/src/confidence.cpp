#include "calirec/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "calirec/csv.hpp"
#include "calirec/distributions.hpp"

namespace calirec {

ConfidenceWeights confidence_weight(const std::map<UserId, int>& profile_sizes) {
  if (profile_sizes.empty()) {
    throw std::invalid_argument("confidence_weight of an empty user set");
  }
  double total = 0.0;
  for (const auto& [user, size] : profile_sizes) {
    if (size < 1) {
      throw std::invalid_argument("profile size of user " + std::to_string(user) +
                                  " must be >= 1");
    }
    total += static_cast<double>(size);
  }
  ConfidenceWeights result;
  result.mean_profile_size = total / static_cast<double>(profile_sizes.size());
  for (const auto& [user, size] : profile_sizes) {
    result.weights[user] =
        std::min(static_cast<double>(size) / result.mean_profile_size, 1.0);
  }
  return result;
}

const char* to_string(UserGroup group) {
  switch (group) {
    case UserGroup::kActive: return "active";
    case UserGroup::kSemiActive: return "semi-active";
    case UserGroup::kInactive: return "inactive";
  }
  return "?";
}

int UserGroupAssignment::count(UserGroup group) const {
  int n = 0;
  for (const auto& [user, g] : groups) {
    if (g == group) ++n;
  }
  return n;
}

UserGroupAssignment assign_user_groups(const std::map<UserId, int>& profile_sizes) {
  std::size_t n = profile_sizes.size();
  if (n < 5) {
    throw std::invalid_argument("user groups need at least 5 users, got " +
                                std::to_string(n));
  }
  std::vector<std::pair<UserId, int>> order(profile_sizes.begin(), profile_sizes.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::size_t tail = n / 5;  // floor(0.2 n)
  UserGroupAssignment result;
  for (std::size_t i = 0; i < n; ++i) {
    UserGroup g = UserGroup::kSemiActive;
    if (i < tail) g = UserGroup::kActive;
    else if (i >= n - tail) g = UserGroup::kInactive;
    result.groups.emplace(order[i].first, g);
  }
  return result;
}

BetaPosterior beta_posterior_from_counts(std::int64_t successes, std::int64_t failures,
                                         const BetaPosterior& prior) {
  if (prior.alpha <= 0.0 || prior.beta <= 0.0) {
    throw std::invalid_argument("Beta prior parameters must be positive");
  }
  if (successes < 0 || failures < 0) {
    throw std::invalid_argument("counts must be non-negative");
  }
  return {prior.alpha + static_cast<double>(successes),
          prior.beta + static_cast<double>(failures)};
}

double prob_greater(const BetaPosterior& a, const BetaPosterior& b) {
  if (a.alpha <= 0.0 || a.beta <= 0.0 || b.alpha <= 0.0 || b.beta <= 0.0) {
    throw std::invalid_argument("Beta parameters must be positive");
  }
  boost::math::beta_distribution<double> da(a.alpha, a.beta);
  boost::math::beta_distribution<double> db(b.alpha, b.beta);
  auto integrand = [&](double x) { return pdf(da, x) * cdf(db, x); };
  double error = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, 1.0, 15, 1e-10, &error);
  return std::clamp(value, 0.0, 1.0);
}

namespace {

UserProfile uniform_profile(UserId user, const std::vector<ItemId>& items) {
  UserProfile profile;
  profile.user = user;
  for (ItemId item : items) profile.entries.push_back({item, 1.0, 0});
  return profile;
}

std::map<UserGroup, double> group_average(
    const std::map<UserId, double>& per_user, const UserGroupAssignment& groups) {
  std::map<UserGroup, double> sums;
  std::map<UserGroup, int> counts;
  for (const auto& [user, value] : per_user) {
    UserGroup g = groups.groups.at(user);
    sums[g] += value;
    counts[g] += 1;
  }
  std::map<UserGroup, double> result;
  for (const auto& [g, sum] : sums) result[g] = sum / counts.at(g);
  return result;
}

// Train-side and test-side category distributions per grouped user.
std::map<UserId, std::pair<CategoryDistribution, CategoryDistribution>>
per_user_oracle_pairs(const SplitDataset& split, const UserGroupAssignment& groups) {
  std::map<UserId, std::vector<ItemId>> train_items, test_items;
  for (const auto& it : split.train) {
    if (split.items.contains(it.item)) train_items[it.user].push_back(it.item);
  }
  for (const auto& it : split.test) {
    if (split.items.contains(it.item)) test_items[it.user].push_back(it.item);
  }
  std::map<UserId, std::pair<CategoryDistribution, CategoryDistribution>> result;
  for (const auto& [user, group] : groups.groups) {
    auto tr = train_items.find(user);
    auto te = test_items.find(user);
    if (tr == train_items.end() || te == test_items.end()) {
      throw std::invalid_argument("user " + std::to_string(user) +
                                  " lacks train or test items for the oracle analysis");
    }
    result.emplace(user, std::make_pair(
        profile_distribution(uniform_profile(user, tr->second), split.items),
        profile_distribution(uniform_profile(user, te->second), split.items)));
  }
  return result;
}

}  // namespace

std::map<UserGroup, double> oracle_miscalibration(const SplitDataset& split,
                                                  const UserGroupAssignment& groups,
                                                  Divergence divergence) {
  auto pairs = per_user_oracle_pairs(split, groups);
  std::map<UserId, double> per_user;
  for (const auto& [user, pq] : pairs) {
    per_user[user] = divergence == Divergence::kJs
                         ? js_divergence(pq.first, pq.second)
                         : hellinger_distance(pq.first, pq.second);
  }
  return group_average(per_user, groups);
}

std::map<UserGroup, GroupOracleRow> oracle_analysis(const SplitDataset& split,
                                                    const UserGroupAssignment& groups) {
  auto pairs = per_user_oracle_pairs(split, groups);
  std::map<UserId, double> js, hellinger;
  for (const auto& [user, pq] : pairs) {
    js[user] = js_divergence(pq.first, pq.second);
    hellinger[user] = hellinger_distance(pq.first, pq.second);
  }
  auto js_avg = group_average(js, groups);
  auto h_avg = group_average(hellinger, groups);
  std::map<UserGroup, GroupOracleRow> result;
  for (const auto& [g, value] : js_avg) {
    result[g] = {value, h_avg.at(g), groups.count(g)};
  }
  return result;
}

void write_oracle_analysis_csv(const std::string& path,
                               const std::map<UserGroup, GroupOracleRow>& analysis) {
  CsvWriter out(path);
  out.write_row({"group", "js", "hellinger", "n_users"});
  for (UserGroup g : {UserGroup::kActive, UserGroup::kSemiActive, UserGroup::kInactive}) {
    auto it = analysis.find(g);
    if (it == analysis.end()) continue;
    out.write_row({to_string(g), format_double(it->second.js),
                   format_double(it->second.hellinger),
                   std::to_string(it->second.n_users)});
  }
  out.close();
}

}  // namespace calirec
