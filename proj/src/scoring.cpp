#include "calirec/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "calirec/csv.hpp"

namespace calirec {
namespace {

std::vector<ItemId> catalog_ids(const ItemCatalog& catalog) {
  std::vector<ItemId> ids;
  ids.reserve(catalog.size());
  for (const auto& [id, item] : catalog.items()) ids.push_back(id);
  return ids;
}

// Train items per user, restricted to the catalog.
std::map<UserId, std::vector<ItemId>> train_items_by_user(const SplitDataset& split) {
  std::map<UserId, std::set<ItemId>> sets;
  for (const auto& it : split.train) {
    if (split.items.contains(it.item)) sets[it.user].insert(it.item);
  }
  std::map<UserId, std::vector<ItemId>> out;
  for (auto& [user, items] : sets) out.emplace(user, std::vector<ItemId>(items.begin(), items.end()));
  return out;
}

class MostPopularScorer final : public Scorer {
 public:
  explicit MostPopularScorer(const SplitDataset& split)
      : items_(catalog_ids(split.items)) {
    if (split.train.empty()) throw std::invalid_argument("train set is empty");
    for (const auto& it : split.train) {
      if (split.items.contains(it.item)) counts_[it.item] += 1.0;
    }
  }

  std::optional<double> score(UserId, ItemId item) const override {
    auto it = counts_.find(item);
    return it == counts_.end() ? 0.0 : it->second;
  }

  std::vector<ItemId> scoreable_items(UserId) const override { return items_; }

  std::string name() const override { return "popularity"; }

 private:
  std::vector<ItemId> items_;
  std::map<ItemId, double> counts_;
};

class ItemKnnScorer final : public Scorer {
 public:
  ItemKnnScorer(const SplitDataset& split, int k_neighbors)
      : k_(k_neighbors), items_(catalog_ids(split.items)) {
    if (k_neighbors < 1) throw std::invalid_argument("k_neighbors must be >= 1");
    if (split.train.empty()) throw std::invalid_argument("train set is empty");

    profiles_ = train_items_by_user(split);
    std::map<ItemId, int> raters;
    for (const auto& [user, items] : profiles_) {
      for (ItemId i : items) raters[i] += 1;
    }
    // co-occurrence counts over unordered item pairs, via per-user pairs
    std::unordered_map<std::uint64_t, int> cooc;
    for (const auto& [user, items] : profiles_) {
      for (std::size_t a = 0; a < items.size(); ++a) {
        for (std::size_t b = a + 1; b < items.size(); ++b) {
          cooc[pair_key(items[a], items[b])] += 1;
        }
      }
    }
    for (const auto& [key, count] : cooc) {
      auto [i, j] = unpack(key);
      double sim = static_cast<double>(count) /
                   std::sqrt(static_cast<double>(raters.at(i)) *
                             static_cast<double>(raters.at(j)));
      sims_[i].emplace_back(j, sim);
      sims_[j].emplace_back(i, sim);
    }
    for (auto& [item, row] : sims_) {
      std::sort(row.begin(), row.end());
    }
  }

  std::optional<double> score(UserId user, ItemId item) const override {
    auto prof = profiles_.find(user);
    if (prof == profiles_.end()) return 0.0;
    auto row = sims_.find(item);
    if (row == sims_.end()) return 0.0;
    // sims of `item` to the user's profile items
    std::vector<std::pair<double, ItemId>> hits;
    for (const auto& [j, sim] : row->second) {
      if (std::binary_search(prof->second.begin(), prof->second.end(), j)) {
        hits.emplace_back(sim, j);
      }
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    double total = 0.0;
    for (std::size_t n = 0; n < hits.size() && n < static_cast<std::size_t>(k_); ++n) {
      total += hits[n].first;
    }
    return total;
  }

  std::vector<ItemId> scoreable_items(UserId) const override { return items_; }

  std::string name() const override { return "knn"; }

 private:
  static std::uint64_t pair_key(ItemId a, ItemId b) {
    if (a < 0 || b < 0 || a > 0xffffffffll || b > 0xffffffffll) {
      throw DataError("item ids must fit in 32 bits for the knn scorer");
    }
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  }
  static std::pair<ItemId, ItemId> unpack(std::uint64_t key) {
    return {static_cast<ItemId>(key >> 32), static_cast<ItemId>(key & 0xffffffffu)};
  }

  int k_;
  std::vector<ItemId> items_;
  std::map<UserId, std::vector<ItemId>> profiles_;            // id ascending
  std::map<ItemId, std::vector<std::pair<ItemId, double>>> sims_;
};

class ImportedScorer final : public Scorer {
 public:
  explicit ImportedScorer(const std::string& path) : name_("import:" + path) {
    for_each_csv_row_any_header(
        path,
        {{"userId", "itemId", "score"}, {"userId", "itemId", "score", "rank"}},
        [&](const std::vector<std::string>& f, std::size_t line_no) {
          UserId user = parse_int_field(f[0], "userId", line_no);
          ItemId item = parse_int_field(f[1], "itemId", line_no);
          double value = parse_double_field(f[2], "score", line_no);
          auto [it, inserted] = scores_[user].emplace(item, value);
          if (!inserted) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": duplicate score for user " + std::to_string(user) +
                            ", item " + std::to_string(item));
          }
        });
  }

  std::optional<double> score(UserId user, ItemId item) const override {
    auto u = scores_.find(user);
    if (u == scores_.end()) return std::nullopt;
    auto it = u->second.find(item);
    if (it == u->second.end()) return std::nullopt;
    return it->second;
  }

  std::vector<ItemId> scoreable_items(UserId user) const override {
    std::vector<ItemId> ids;
    auto u = scores_.find(user);
    if (u != scores_.end()) {
      for (const auto& [item, value] : u->second) ids.push_back(item);
    }
    return ids;
  }

  std::string name() const override { return name_; }

 private:
  std::string name_;
  std::map<UserId, std::map<ItemId, double>> scores_;
};

}  // namespace

std::unique_ptr<Scorer> most_popular_scores(const SplitDataset& split) {
  return std::make_unique<MostPopularScorer>(split);
}

std::unique_ptr<Scorer> item_knn_scores(const SplitDataset& split, int k_neighbors) {
  return std::make_unique<ItemKnnScorer>(split, k_neighbors);
}

std::unique_ptr<Scorer> import_scores(const std::string& path) {
  return std::make_unique<ImportedScorer>(path);
}

CandidateResult top_n_candidates(const Scorer& scorer, const SplitDataset& split,
                                 int top_n) {
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
  CandidateResult result;
  for (const auto& [user, train_items] : train_items_by_user(split)) {
    std::vector<std::pair<ItemId, double>> scored;
    for (ItemId item : scorer.scoreable_items(user)) {
      if (std::binary_search(train_items.begin(), train_items.end(), item)) continue;
      auto s = scorer.score(user, item);
      if (s) scored.emplace_back(item, *s);
    }
    if (scored.empty()) {
      result.empty_users.push_back(user);
      continue;
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    CandidateList list;
    list.user = user;
    if (scored.size() > static_cast<std::size_t>(top_n)) {
      scored.resize(static_cast<std::size_t>(top_n));
    } else if (scored.size() < static_cast<std::size_t>(top_n)) {
      list.short_pool = true;
      result.short_users.push_back(user);
    }
    list.candidates = std::move(scored);
    result.lists.emplace(user, std::move(list));
  }
  return result;
}

void export_candidates(const std::map<UserId, CandidateList>& lists,
                       const std::string& path) {
  CsvWriter out(path);
  out.write_row({"userId", "itemId", "score", "rank"});
  for (const auto& [user, list] : lists) {
    for (std::size_t rank = 0; rank < list.candidates.size(); ++rank) {
      const auto& [item, score] = list.candidates[rank];
      out.write_row({std::to_string(user), std::to_string(item),
                     format_double(score), std::to_string(rank + 1)});
    }
  }
  out.close();
}

}  // namespace calirec
