#include "calirec/data_model.hpp"

#include <algorithm>
#include <cmath>

#include "calirec/csv.hpp"

namespace calirec {

double RecencyWeighting::weight_for_rank(std::size_t recency_rank) const {
  switch (scheme) {
    case Scheme::kUniform:
      return 1.0;
    case Scheme::kExponential:
      return std::exp2(-static_cast<double>(recency_rank) / half_life);
  }
  return 1.0;
}

RecencyWeighting RecencyWeighting::parse(const std::string& spec) {
  if (spec == "uniform") return {};
  if (spec.rfind("exponential:", 0) == 0) {
    RecencyWeighting w;
    w.scheme = Scheme::kExponential;
    try {
      w.half_life = parse_double_field(spec.substr(12), "half-life", 0);
    } catch (const DataError& e) {
      throw std::invalid_argument(e.what());
    }
    if (w.half_life <= 0.0) {
      throw std::invalid_argument("half-life must be positive: " + spec);
    }
    return w;
  }
  throw std::invalid_argument("unknown recency weighting '" + spec +
                              "' (expected 'uniform' or 'exponential:<half_life>')");
}

std::vector<Interaction> load_interactions(const std::string& path) {
  std::vector<Interaction> out;
  // MovieLens ships the item column as movieId; either spelling is accepted
  for_each_csv_row_any_header(
      path,
      {{"userId", "itemId", "rating", "timestamp"},
       {"userId", "movieId", "rating", "timestamp"}},
      [&](const std::vector<std::string>& f, std::size_t line_no) {
        Interaction it;
        it.user = parse_int_field(f[0], "userId", line_no);
        it.item = parse_int_field(f[1], "itemId", line_no);
        it.rating = parse_double_field(f[2], "rating", line_no);
        it.timestamp = parse_int_field(f[3], "timestamp", line_no);
        if (it.rating < 1.0 || it.rating > 5.0) {
          throw DataError(path + ": line " + std::to_string(line_no) +
                          ": rating " + f[2] + " outside [1,5]");
        }
        if (it.timestamp < 0) {
          throw DataError(path + ": line " + std::to_string(line_no) +
                          ": negative timestamp");
        }
        out.push_back(it);
      });
  return out;
}

CatalogLoadResult load_item_categories(const std::string& path) {
  CatalogLoadResult result;
  for_each_csv_row(
      path, {"movieId", "title", "genres"},
      [&](const std::vector<std::string>& f, std::size_t line_no) {
        ItemId id = parse_int_field(f[0], "movieId", line_no);
        const std::string& genres = f[2];
        if (genres.empty() || genres == "(no genres listed)") {
          result.excluded.emplace_back(id, "no genres");
          return;
        }
        Item item;
        item.id = id;
        std::size_t start = 0;
        while (start <= genres.size()) {
          std::size_t bar = genres.find('|', start);
          std::string genre = genres.substr(
              start, bar == std::string::npos ? std::string::npos : bar - start);
          if (genre.empty()) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": empty genre label");
          }
          item.categories.insert(std::move(genre));
          if (bar == std::string::npos) break;
          start = bar + 1;
        }
        result.catalog.add(std::move(item));  // throws on duplicate id
      });
  return result;
}

CatalogFilterResult filter_to_catalog(const std::vector<Interaction>& interactions,
                                      const ItemCatalog& catalog) {
  CatalogFilterResult result;
  result.kept.reserve(interactions.size());
  for (const auto& it : interactions) {
    if (catalog.contains(it.item)) {
      result.kept.push_back(it);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

SplitResult temporal_split(const std::vector<Interaction>& interactions,
                           double train_fraction, ItemCatalog catalog) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must be in (0,1)");
  }
  std::map<UserId, std::vector<Interaction>> by_user;
  for (const auto& it : interactions) by_user[it.user].push_back(it);

  SplitResult result;
  result.split.items = std::move(catalog);
  for (auto& [user, rows] : by_user) {
    std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.item < b.item;
    });
    auto n_train = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(rows.size())));
    if (n_train == 0 || n_train >= rows.size()) {
      result.dropped_users.push_back(user);
      continue;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      (i < n_train ? result.split.train : result.split.test).push_back(rows[i]);
    }
  }
  return result;
}

std::map<UserId, UserProfile> build_profiles(const SplitDataset& split,
                                             const RecencyWeighting& recency) {
  std::map<UserId, std::vector<Interaction>> by_user;
  for (const auto& it : split.train) {
    if (!split.items.contains(it.item)) continue;  // excluded at ingest
    by_user[it.user].push_back(it);
  }
  std::map<UserId, UserProfile> profiles;
  for (auto& [user, rows] : by_user) {
    std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.item < b.item;
    });
    UserProfile profile;
    profile.user = user;
    profile.entries.reserve(rows.size());
    // recency rank 0 = most recent = last in timestamp order
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::size_t rank = rows.size() - 1 - i;
      profile.entries.push_back(
          {rows[i].item, recency.weight_for_rank(rank), rows[i].timestamp});
    }
    profiles.emplace(user, std::move(profile));
  }
  return profiles;
}

}  // namespace calirec
