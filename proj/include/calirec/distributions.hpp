#pragma once

#include <map>
#include <string>
#include <vector>

#include "calirec/types.hpp"

namespace calirec {

/// A normalized mapping category -> probability. Construction validates
/// non-negativity and that the mass sums to 1 within 1e-9.
class CategoryDistribution {
 public:
  explicit CategoryDistribution(std::map<std::string, double> probs);

  /// Normalizes arbitrary non-negative weights (total must be positive).
  static CategoryDistribution from_weights(const std::map<std::string, double>& weights);

  /// 0 for categories outside the support.
  double prob(const std::string& category) const;

  const std::map<std::string, double>& probs() const { return probs_; }

 private:
  struct AlreadyNormalized {};
  CategoryDistribution(AlreadyNormalized, std::map<std::string, double> probs)
      : probs_(std::move(probs)) {}

  std::map<std::string, double> probs_;
};

/// Rank-position weighting for recommendation-list distributions.
/// Logarithmic uses w_r = 1 / log2(r + 1) with 1-based rank r.
struct RankWeighting {
  enum class Scheme { kUniform, kLogarithmic };
  Scheme scheme = Scheme::kUniform;

  double weight(std::size_t rank_1based) const;

  /// Accepts "uniform" or "logarithmic".
  static RankWeighting parse(const std::string& spec);
};

/// Uniform mass 1/|categories| on each of the item's categories, so that
/// every item contributes one unit of probability mass in total.
CategoryDistribution item_category_spread(const Item& item);

/// p(c|u): the weight-averaged category spread of the profile items.
CategoryDistribution profile_distribution(const UserProfile& profile,
                                          const ItemCatalog& catalog);

/// q(c|u): the rank-weight-averaged category spread of a ranked list.
CategoryDistribution list_distribution(const std::vector<ItemId>& ranked_items,
                                       const ItemCatalog& catalog,
                                       const RankWeighting& weighting);

/// Jensen-Shannon divergence with base-2 logarithms, range [0,1].
double js_divergence(const CategoryDistribution& p, const CategoryDistribution& q);

/// Hellinger distance ||sqrt(p) - sqrt(q)||_2 / sqrt(2), range [0,1].
double hellinger_distance(const CategoryDistribution& p, const CategoryDistribution& q);

/// Full l1 distance sum_c |p(c) - q(c)|, range [0,2].
double total_variation(const CategoryDistribution& p, const CategoryDistribution& q);

/// MC: arithmetic mean of per-user divergence values.
double miscalibration(const std::map<UserId, double>& per_user_divergences);

}  // namespace calirec
