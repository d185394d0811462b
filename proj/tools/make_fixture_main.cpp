#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "calirec/fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate the bundled synthetic ratings corpus"};
  calirec::FixtureSpec spec;
  std::string ratings_path = "ratings.csv";
  std::string items_path = "items.csv";
  app.add_option("--ratings", ratings_path, "output ratings CSV");
  app.add_option("--items", items_path, "output items CSV");
  app.add_option("--users", spec.n_users, "number of users");
  app.add_option("--catalog", spec.n_items, "number of items");
  app.add_option("--seed", spec.seed, "generator seed");
  app.add_option("--min-profile", spec.min_profile, "smallest profile size");
  app.add_option("--max-profile", spec.max_profile, "largest profile size");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    calirec::write_fixture(spec, ratings_path, items_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::printf("wrote %s and %s\n", ratings_path.c_str(), items_path.c_str());
  return 0;
}
