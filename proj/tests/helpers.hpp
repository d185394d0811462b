#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "calirec/reranker.hpp"
#include "calirec/types.hpp"

namespace testutil {

// Raw engine draws keep generated fixtures identical across standard library
// builds; std:: distributions do not guarantee that.
inline double next_real(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t next_below(std::mt19937_64& rng, std::uint64_t bound) {
  return rng() % bound;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    std::random_device rd;
    auto tag = std::to_string(rd()) + "-" + std::to_string(counter++);
    path_ = std::filesystem::temp_directory_path() / ("calirec-test-" + tag);
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ProblemKnobs {
  int max_items = 12;
  int max_top_k = 5;
  int min_categories = 2;
  int max_categories = 5;
  double max_lambda = 5.0;
  // forces K1 = K when set, for studying the fully calibrated regime
  bool full_calibration = false;
  double fixed_lambda = -1.0;  // used instead of a draw when >= 0
};

// Small instances with deliberate score ties and occasional zero-mass target
// categories, the stress cases for tie-break and bound logic.
inline calirec::RerankProblem random_problem(std::mt19937_64& rng,
                                             const ProblemKnobs& knobs = {}) {
  calirec::RerankProblem p;
  p.user = 1;
  p.top_k = 1 + static_cast<int>(next_below(rng, static_cast<std::uint64_t>(knobs.max_top_k)));
  int n = p.top_k +
          static_cast<int>(next_below(
              rng, static_cast<std::uint64_t>(knobs.max_items - p.top_k + 1)));
  int n_cats = knobs.min_categories +
               static_cast<int>(next_below(
                   rng, static_cast<std::uint64_t>(knobs.max_categories -
                                                   knobs.min_categories + 1)));
  if (knobs.full_calibration) {
    p.calib_slots = p.top_k;
  } else {
    p.calib_slots = static_cast<int>(next_below(rng, static_cast<std::uint64_t>(p.top_k + 1)));
  }
  if (knobs.fixed_lambda >= 0.0) {
    p.lambda1 = knobs.fixed_lambda;
  } else if (next_below(rng, 10) == 0) {
    p.lambda1 = 0.0;
  } else {
    p.lambda1 = next_real(rng) * knobs.max_lambda;
  }

  for (int c = 0; c < n_cats; ++c) p.categories.push_back(std::string(1, static_cast<char>('A' + c)));
  std::vector<double> weights(static_cast<std::size_t>(n_cats));
  double total = 0.0;
  for (auto& w : weights) {
    w = next_below(rng, 5) == 0 ? 0.0 : 0.05 + next_real(rng);
    total += w;
  }
  if (total == 0.0) {
    weights[0] = 1.0;
    total = 1.0;
  }
  for (double w : weights) p.target.push_back(w / total);

  std::vector<double> scores(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (i > 0 && next_below(rng, 10) < 3) {
      scores[static_cast<std::size_t>(i)] =
          scores[next_below(rng, static_cast<std::uint64_t>(i))];
    } else {
      scores[static_cast<std::size_t>(i)] = next_real(rng);
    }
  }
  for (int i = 0; i < n; ++i) {
    calirec::RerankCandidate c;
    c.item = i + 1;
    c.score = scores[static_cast<std::size_t>(i)];
    int k = 1 + static_cast<int>(next_below(rng, static_cast<std::uint64_t>(std::min(3, n_cats))));
    std::vector<int> cats;
    while (static_cast<int>(cats.size()) < k) {
      int cat = static_cast<int>(next_below(rng, static_cast<std::uint64_t>(n_cats)));
      if (std::find(cats.begin(), cats.end(), cat) == cats.end()) cats.push_back(cat);
    }
    std::sort(cats.begin(), cats.end());
    for (int cat : cats) c.spread.emplace_back(cat, 1.0 / static_cast<double>(k));
    p.candidates.push_back(std::move(c));
  }
  std::sort(p.candidates.begin(), p.candidates.end(),
            [](const calirec::RerankCandidate& a, const calirec::RerankCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item < b.item;
            });
  return p;
}

}  // namespace testutil
