#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "calirec/types.hpp"

namespace calirec {

/// Relevance-score source standing in for an externally trained model.
/// Scorers are immutable once built; queries are const.
class Scorer {
 public:
  virtual ~Scorer() = default;

  /// nullopt when the scorer defines no score for the pair.
  virtual std::optional<double> score(UserId user, ItemId item) const = 0;

  /// Items with a defined score for the user, id-ascending.
  virtual std::vector<ItemId> scoreable_items(UserId user) const = 0;

  virtual std::string name() const = 0;
};

/// score(u,i) = number of train interactions of item i, identical across
/// users. Items absent from train score 0.
std::unique_ptr<Scorer> most_popular_scores(const SplitDataset& split);

/// Item-item cosine over binary "rated" user vectors;
/// score(u,i) = sum of sim(i,j) over the k most similar profile items j.
std::unique_ptr<Scorer> item_knn_scores(const SplitDataset& split, int k_neighbors);

/// Reads `userId,itemId,score` rows (an optional trailing `rank` column is
/// ignored, so exported candidate files can be re-imported).
std::unique_ptr<Scorer> import_scores(const std::string& path);

struct CandidateList {
  UserId user = 0;
  std::vector<std::pair<ItemId, double>> candidates;  // score desc, ties id asc
  bool short_pool = false;  // fewer than N scoreable items were available
};

struct CandidateResult {
  std::map<UserId, CandidateList> lists;
  std::vector<UserId> short_users;  // got fewer than N candidates
  std::vector<UserId> empty_users;  // zero scoreable items, excluded
};

/// Per train user, the N highest-scored catalog items outside their train
/// profile.
CandidateResult top_n_candidates(const Scorer& scorer, const SplitDataset& split,
                                 int top_n);

/// Writes `userId,itemId,score,rank` rows, users ascending, rank ascending.
void export_candidates(const std::map<UserId, CandidateList>& lists,
                       const std::string& path);

}  // namespace calirec
