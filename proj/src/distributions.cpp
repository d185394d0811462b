#include "calirec/distributions.hpp"

#include <cmath>
#include <functional>

namespace calirec {
namespace {

constexpr double kSumTolerance = 1e-9;

// Walks the union of two ordered supports, feeding (p_c, q_c) pairs with 0
// for absent categories.
void for_each_union(const CategoryDistribution& p, const CategoryDistribution& q,
                    const std::function<void(double, double)>& fn) {
  auto ip = p.probs().begin(), ep = p.probs().end();
  auto iq = q.probs().begin(), eq = q.probs().end();
  while (ip != ep || iq != eq) {
    if (iq == eq || (ip != ep && ip->first < iq->first)) {
      fn(ip->second, 0.0);
      ++ip;
    } else if (ip == ep || iq->first < ip->first) {
      fn(0.0, iq->second);
      ++iq;
    } else {
      fn(ip->second, iq->second);
      ++ip;
      ++iq;
    }
  }
}

}  // namespace

CategoryDistribution::CategoryDistribution(std::map<std::string, double> probs)
    : probs_(std::move(probs)) {
  double sum = 0.0;
  for (const auto& [category, prob] : probs_) {
    if (prob < 0.0) {
      throw std::invalid_argument("negative probability for category " + category);
    }
    sum += prob;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("category probabilities sum to " +
                                std::to_string(sum) + ", expected 1");
  }
}

CategoryDistribution CategoryDistribution::from_weights(
    const std::map<std::string, double>& weights) {
  double total = 0.0;
  for (const auto& [category, weight] : weights) {
    if (weight < 0.0) {
      throw std::invalid_argument("negative weight for category " + category);
    }
    total += weight;
  }
  if (total <= 0.0) throw std::invalid_argument("total category weight must be positive");
  std::map<std::string, double> probs;
  for (const auto& [category, weight] : weights) {
    if (weight > 0.0) probs.emplace(category, weight / total);
  }
  return CategoryDistribution(AlreadyNormalized{}, std::move(probs));
}

double CategoryDistribution::prob(const std::string& category) const {
  auto it = probs_.find(category);
  return it == probs_.end() ? 0.0 : it->second;
}

double RankWeighting::weight(std::size_t rank_1based) const {
  switch (scheme) {
    case Scheme::kUniform:
      return 1.0;
    case Scheme::kLogarithmic:
      return 1.0 / std::log2(static_cast<double>(rank_1based) + 1.0);
  }
  return 1.0;
}

RankWeighting RankWeighting::parse(const std::string& spec) {
  if (spec == "uniform") return {Scheme::kUniform};
  if (spec == "logarithmic") return {Scheme::kLogarithmic};
  throw std::invalid_argument("unknown rank weighting '" + spec +
                  "' (expected 'uniform' or 'logarithmic')");
}

CategoryDistribution item_category_spread(const Item& item) {
  if (item.categories.empty()) {
    throw std::invalid_argument("item " + std::to_string(item.id) + " has no categories");
  }
  std::map<std::string, double> probs;
  double mass = 1.0 / static_cast<double>(item.categories.size());
  for (const auto& category : item.categories) probs.emplace(category, mass);
  return CategoryDistribution(std::move(probs));
}

CategoryDistribution profile_distribution(const UserProfile& profile,
                                          const ItemCatalog& catalog) {
  if (profile.entries.empty()) {
    throw std::invalid_argument("profile of user " + std::to_string(profile.user) +
                                " is empty");
  }
  std::map<std::string, double> weights;
  for (const auto& entry : profile.entries) {
    const Item& item = catalog.at(entry.item);  // DataError when missing
    double per_category = entry.weight / static_cast<double>(item.categories.size());
    for (const auto& category : item.categories) weights[category] += per_category;
  }
  return CategoryDistribution::from_weights(weights);
}

CategoryDistribution list_distribution(const std::vector<ItemId>& ranked_items,
                                       const ItemCatalog& catalog,
                                       const RankWeighting& weighting) {
  if (ranked_items.empty()) {
    throw std::invalid_argument("list_distribution of an empty list");
  }
  std::map<std::string, double> weights;
  for (std::size_t r = 0; r < ranked_items.size(); ++r) {
    const Item& item = catalog.at(ranked_items[r]);
    double w = weighting.weight(r + 1) / static_cast<double>(item.categories.size());
    for (const auto& category : item.categories) weights[category] += w;
  }
  return CategoryDistribution::from_weights(weights);
}

double js_divergence(const CategoryDistribution& p, const CategoryDistribution& q) {
  double js = 0.0;
  for_each_union(p, q, [&](double pc, double qc) {
    double mc = 0.5 * (pc + qc);
    if (pc > 0.0) js += 0.5 * pc * std::log2(pc / mc);
    if (qc > 0.0) js += 0.5 * qc * std::log2(qc / mc);
  });
  return js;
}

double hellinger_distance(const CategoryDistribution& p, const CategoryDistribution& q) {
  double sum_sq = 0.0;
  for_each_union(p, q, [&](double pc, double qc) {
    double d = std::sqrt(pc) - std::sqrt(qc);
    sum_sq += d * d;
  });
  return std::sqrt(sum_sq / 2.0);
}

double total_variation(const CategoryDistribution& p, const CategoryDistribution& q) {
  double tv = 0.0;
  for_each_union(p, q, [&](double pc, double qc) { tv += std::abs(pc - qc); });
  return tv;
}

double miscalibration(const std::map<UserId, double>& per_user_divergences) {
  if (per_user_divergences.empty()) {
    throw std::invalid_argument("miscalibration of an empty user set");
  }
  double sum = 0.0;
  for (const auto& [user, value] : per_user_divergences) sum += value;
  return sum / static_cast<double>(per_user_divergences.size());
}

}  // namespace calirec
