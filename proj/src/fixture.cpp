#include "calirec/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "calirec/csv.hpp"
#include "calirec/types.hpp"

namespace calirec {
namespace {

// mt19937_64 output is bit-exact everywhere; the helpers below keep the
// mapping to bounded draws bit-exact too.
double next_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

int next_below(std::mt19937_64& rng, int bound) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(bound));
}

int pick_weighted(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  double u = next_real(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<int>(it - cumulative.begin());
}

const std::vector<std::vector<std::string>> kCommunities = {
    {"Action", "Adventure", "Sci-Fi"},
    {"Comedy", "Romance", "Musical"},
    {"Crime", "Thriller", "Mystery"},
    {"Drama", "Documentary", "War"},
};

struct FixtureItem {
  ItemId id = 0;
  int community = 0;
  std::vector<std::string> genres;
};

}  // namespace

void write_fixture(const FixtureSpec& spec, const std::string& ratings_path,
                   const std::string& items_path) {
  if (spec.n_users < 5) throw std::invalid_argument("fixture needs at least 5 users");
  if (spec.n_items < 40) throw std::invalid_argument("fixture needs at least 40 items");
  if (spec.min_profile < 4 || spec.max_profile <= spec.min_profile) {
    throw std::invalid_argument("bad profile size range");
  }
  std::mt19937_64 rng(spec.seed);
  int n_comm = static_cast<int>(kCommunities.size());

  std::vector<FixtureItem> items;
  std::vector<std::vector<int>> community_items(static_cast<std::size_t>(n_comm));
  for (int i = 0; i < spec.n_items; ++i) {
    FixtureItem item;
    item.id = i + 1;
    item.community = i % n_comm;
    const auto& genres = kCommunities[static_cast<std::size_t>(item.community)];
    item.genres.push_back(genres[static_cast<std::size_t>(next_below(rng, 3))]);
    if (next_real(rng) < 0.5) {
      const std::string& extra = genres[static_cast<std::size_t>(next_below(rng, 3))];
      if (extra != item.genres[0]) item.genres.push_back(extra);
    }
    if (next_real(rng) < 0.25) {
      const auto& other =
          kCommunities[static_cast<std::size_t>((item.community + 1) % n_comm)];
      item.genres.push_back(other[static_cast<std::size_t>(next_below(rng, 3))]);
    }
    std::sort(item.genres.begin(), item.genres.end());
    item.genres.erase(std::unique(item.genres.begin(), item.genres.end()),
                      item.genres.end());
    community_items[static_cast<std::size_t>(item.community)].push_back(
        static_cast<int>(items.size()));
    items.push_back(std::move(item));
  }

  // Zipf-ish popularity inside each community.
  std::vector<std::vector<double>> community_cumulative;
  for (const auto& members : community_items) {
    std::vector<double> cumulative;
    double run = 0.0;
    for (std::size_t r = 0; r < members.size(); ++r) {
      run += 1.0 / (4.0 + static_cast<double>(r));
      cumulative.push_back(run);
    }
    community_cumulative.push_back(std::move(cumulative));
  }

  struct Row {
    UserId user;
    ItemId item;
    int rating;
    std::int64_t timestamp;
  };
  std::vector<Row> rows;
  const std::vector<double> rating_cumulative = {0.03, 0.10, 0.35, 0.75, 1.0};

  for (int u = 1; u <= spec.n_users; ++u) {
    double span = std::log(static_cast<double>(spec.max_profile)) -
                  std::log(static_cast<double>(spec.min_profile));
    int size = static_cast<int>(std::lround(
        std::exp(std::log(static_cast<double>(spec.min_profile)) + next_real(rng) * span)));
    size = std::clamp(size, spec.min_profile, spec.max_profile);
    if (u == spec.n_users) size = 3;  // too small to split, exercises user dropping

    int primary = (u - 1) % n_comm;
    int secondary = ((u - 1) / n_comm) % n_comm;
    double primary_share = 0.6 + 0.3 * next_real(rng);
    // smaller profiles drift away from their own communities near the end,
    // mirroring the harder-to-trust taste signal of inactive users
    double drift = std::clamp(0.7 - static_cast<double>(size) / 120.0, 0.0, 0.7);

    std::set<int> chosen;
    std::vector<int> order;
    int attempts = 0;
    while (static_cast<int>(chosen.size()) < size) {
      bool tail = static_cast<int>(chosen.size()) >=
                  static_cast<int>(std::ceil(0.8 * static_cast<double>(size)));
      int community;
      if (tail && next_real(rng) < drift) {
        community = (primary + 2) % n_comm;
      } else {
        community = next_real(rng) < primary_share ? primary : secondary;
      }
      int index;
      if (++attempts > 4 * spec.n_items) {
        index = next_below(rng, spec.n_items);
      } else {
        const auto& members = community_items[static_cast<std::size_t>(community)];
        index = members[static_cast<std::size_t>(
            pick_weighted(rng, community_cumulative[static_cast<std::size_t>(community)]))];
      }
      if (chosen.insert(index).second) order.push_back(index);
    }

    std::int64_t base = 1500000000LL + static_cast<std::int64_t>(u) * 10000;
    for (std::size_t j = 0; j < order.size(); ++j) {
      Row row;
      row.user = u;
      row.item = items[static_cast<std::size_t>(order[j])].id;
      row.rating = pick_weighted(rng, rating_cumulative) + 1;
      row.timestamp = base + static_cast<std::int64_t>(j) * 86400 +
                      static_cast<std::int64_t>(next_below(rng, 3600));
      rows.push_back(row);
    }
  }

  // a handful of ratings for an item that carries no genres; the pipeline
  // must exclude the item and drop these rows
  ItemId orphan = spec.n_items + 777;
  for (int u = 1; u <= 3; ++u) {
    Row row;
    row.user = u;
    row.item = orphan;
    row.rating = 4;
    row.timestamp = 1500000000LL + u * 1000;
    rows.push_back(row);
  }

  {
    CsvWriter out(items_path);
    out.write_row({"movieId", "title", "genres"});
    for (const auto& item : items) {
      std::string genres;
      for (std::size_t g = 0; g < item.genres.size(); ++g) {
        if (g) genres += "|";
        genres += item.genres[g];
      }
      out.write_row({std::to_string(item.id), "Movie " + std::to_string(item.id),
                     genres});
    }
    out.write_row({std::to_string(orphan), "Movie " + std::to_string(orphan),
                   "(no genres listed)"});
    out.close();
  }
  {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.user != b.user) return a.user < b.user;
      return a.timestamp < b.timestamp;
    });
    CsvWriter out(ratings_path);
    out.write_row({"userId", "itemId", "rating", "timestamp"});
    for (const auto& row : rows) {
      out.write_row({std::to_string(row.user), std::to_string(row.item),
                     std::to_string(row.rating), std::to_string(row.timestamp)});
    }
    out.close();
  }
}

}  // namespace calirec
