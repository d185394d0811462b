#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace calirec {

using UserId = std::int64_t;
using ItemId = std::int64_t;

/// Raised for malformed or inconsistent input data (files, rows, ids).
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& message) : std::runtime_error(message) {}
};

/// One explicit rating event. Ratings are constrained to [1,5].
struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

/// An item together with its non-empty category (genre) set.
struct Item {
  ItemId id = 0;
  std::set<std::string> categories;
};

/// Catalog keyed by item id. Iteration order is id-ascending, which keeps
/// every downstream computation deterministic.
class ItemCatalog {
 public:
  void add(Item item) {
    if (item.categories.empty()) {
      throw DataError("item " + std::to_string(item.id) + " has no categories");
    }
    auto [it, inserted] = items_.emplace(item.id, std::move(item));
    if (!inserted) {
      throw DataError("duplicate item id " + std::to_string(it->first));
    }
  }

  bool contains(ItemId id) const { return items_.count(id) > 0; }

  const Item& at(ItemId id) const {
    auto it = items_.find(id);
    if (it == items_.end()) {
      throw DataError("item " + std::to_string(id) + " not in catalog");
    }
    return it->second;
  }

  std::size_t size() const { return items_.size(); }
  const std::map<ItemId, Item>& items() const { return items_; }

 private:
  std::map<ItemId, Item> items_;
};

struct ProfileEntry {
  ItemId item = 0;
  double weight = 1.0;
  std::int64_t timestamp = 0;
};

/// A user's train-time interactions with per-item weights, the source of
/// the profile category distribution.
struct UserProfile {
  UserId user = 0;
  std::vector<ProfileEntry> entries;  // ascending by timestamp, ties by item id
};

struct SplitDataset {
  std::vector<Interaction> train;
  std::vector<Interaction> test;
  ItemCatalog items;
};

}  // namespace calirec
