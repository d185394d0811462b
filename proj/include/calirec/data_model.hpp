#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "calirec/types.hpp"

namespace calirec {

/// Per-item profile weighting scheme. Uniform assigns weight 1 to every
/// train interaction; exponential halves the weight every `half_life` steps
/// of recency rank (rank 0 = most recent).
struct RecencyWeighting {
  enum class Scheme { kUniform, kExponential };
  Scheme scheme = Scheme::kUniform;
  double half_life = 1.0;

  double weight_for_rank(std::size_t recency_rank) const;

  /// Accepts "uniform" or "exponential:<half_life>".
  static RecencyWeighting parse(const std::string& spec);
};

/// Reads a ratings CSV with header userId,itemId,rating,timestamp.
/// Row order is preserved. Malformed rows and out-of-range ratings raise
/// DataError naming the line.
std::vector<Interaction> load_interactions(const std::string& path);

struct CatalogLoadResult {
  ItemCatalog catalog;
  // (item id, reason) for rows excluded at ingest, in file order.
  std::vector<std::pair<ItemId, std::string>> excluded;
};

/// Reads an items CSV with header movieId,title,genres (genres
/// pipe-separated). Items with an empty genre field or the MovieLens
/// "(no genres listed)" marker are excluded and reported.
CatalogLoadResult load_item_categories(const std::string& path);

struct CatalogFilterResult {
  std::vector<Interaction> kept;
  std::int64_t dropped = 0;
};

/// Drops interactions whose item is not in the catalog (unknown id or
/// excluded at ingest).
CatalogFilterResult filter_to_catalog(const std::vector<Interaction>& interactions,
                                      const ItemCatalog& catalog);

struct SplitResult {
  SplitDataset split;
  std::vector<UserId> dropped_users;  // empty train or empty test after split
};

/// Per-user temporal split: each user's interactions are sorted ascending by
/// timestamp (ties by item id), the earliest ceil(train_fraction * n) go to
/// train and the rest to test. Users left without both sides are dropped.
SplitResult temporal_split(const std::vector<Interaction>& interactions,
                           double train_fraction, ItemCatalog catalog);

/// One profile per user present in train. Interactions whose item is missing
/// from the split's catalog are skipped; users with no remaining entries are
/// omitted.
std::map<UserId, UserProfile> build_profiles(const SplitDataset& split,
                                             const RecencyWeighting& recency);

}  // namespace calirec
