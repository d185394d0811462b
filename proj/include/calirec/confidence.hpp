#pragma once

#include <map>
#include <string>

#include "calirec/types.hpp"

namespace calirec {

/// Per-user calibration confidence: W(I_u) = min(|I_u| / mean profile size, 1).
struct ConfidenceWeights {
  std::map<UserId, double> weights;
  double mean_profile_size = 0.0;
};

ConfidenceWeights confidence_weight(const std::map<UserId, int>& profile_sizes);

enum class UserGroup { kActive, kSemiActive, kInactive };

const char* to_string(UserGroup group);

/// 20/60/20 activity partition: users sorted by profile size descending
/// (ties by user id ascending); the first floor(0.2n) are active, the last
/// floor(0.2n) inactive, the remainder semi-active.
struct UserGroupAssignment {
  std::map<UserId, UserGroup> groups;

  int count(UserGroup group) const;
};

/// Requires at least 5 users.
UserGroupAssignment assign_user_groups(const std::map<UserId, int>& profile_sizes);

/// Beta(alpha, beta) belief over a per-user category preference probability.
struct BetaPosterior {
  double alpha = 1.0;
  double beta = 1.0;
};

BetaPosterior beta_posterior_from_counts(std::int64_t successes, std::int64_t failures,
                                         const BetaPosterior& prior = {});

/// P(X > Y) for independent X ~ a, Y ~ b, by adaptive quadrature of
/// f_a(x) * F_b(x) over [0,1]. Absolute error below 1e-6.
double prob_greater(const BetaPosterior& a, const BetaPosterior& b);

enum class Divergence { kJs, kHellinger };

/// Test-as-oracle analysis: per user, the divergence between the train-side
/// and test-side profile distributions (uniform weights on both), averaged
/// within each activity group.
std::map<UserGroup, double> oracle_miscalibration(const SplitDataset& split,
                                                  const UserGroupAssignment& groups,
                                                  Divergence divergence);

struct GroupOracleRow {
  double js = 0.0;
  double hellinger = 0.0;
  int n_users = 0;
};

/// Both divergences plus group sizes, the payload of the oracle CSV.
std::map<UserGroup, GroupOracleRow> oracle_analysis(const SplitDataset& split,
                                                    const UserGroupAssignment& groups);

/// Writes `group,js,hellinger,n_users` rows in active, semi-active,
/// inactive order.
void write_oracle_analysis_csv(const std::string& path,
                               const std::map<UserGroup, GroupOracleRow>& analysis);

}  // namespace calirec
