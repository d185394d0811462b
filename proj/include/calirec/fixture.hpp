#pragma once

#include <cstdint>
#include <string>

namespace calirec {

/// Knobs for the bundled synthetic dataset: a small MovieLens-shaped corpus
/// with genre communities, long-tailed user activity and a few deliberately
/// dirty rows (an item without genres, a user too small to split).
struct FixtureSpec {
  int n_users = 50;
  int n_items = 600;
  std::uint64_t seed = 7;
  int min_profile = 10;
  int max_profile = 110;
};

/// Writes ratings and items CSVs. Output is a pure function of the knobs;
/// the generator avoids std::random distributions so the bytes do not
/// depend on the standard library build.
void write_fixture(const FixtureSpec& spec, const std::string& ratings_path,
                   const std::string& items_path);

}  // namespace calirec
