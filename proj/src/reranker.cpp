#include "calirec/reranker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

#include "calirec/csv.hpp"

namespace calirec {
namespace {

// Absolute tolerance for objective comparisons, applied before tie-breaks.
constexpr double kObjTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_problem(const RerankProblem& p) {
  int n = static_cast<int>(p.candidates.size());
  if (p.top_k < 1 || p.top_k > n) {
    throw std::invalid_argument("K must be in [1, |candidates|]");
  }
  if (p.calib_slots < 0 || p.calib_slots > p.top_k) {
    throw std::invalid_argument("K1 must be in [0, K]");
  }
  if (p.lambda1 < 0.0) throw std::invalid_argument("lambda1 must be non-negative");
  if (p.target.size() != p.categories.size()) {
    throw std::invalid_argument("target size does not match category count");
  }
}

std::vector<ItemId> ids_of(const RerankProblem& p, std::span<const int> indices) {
  std::vector<ItemId> ids;
  ids.reserve(indices.size());
  for (int i : indices) ids.push_back(p.candidates[static_cast<std::size_t>(i)].item);
  return ids;
}

std::vector<ItemId> sorted_ids_of(const RerankProblem& p, std::span<const int> indices) {
  auto ids = ids_of(p, indices);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Comparator-max state shared by the exact solvers.
struct Incumbent {
  bool has = false;
  SelectionEval eval;
  std::vector<int> selected_idx;  // ascending = rank order
  std::vector<int> calib_idx;     // ascending
  std::vector<ItemId> selected_ids_sorted;
  std::vector<ItemId> calib_ids_sorted;

  // Ties on objective fall back to higher relevance, then the
  // lexicographically smaller selected id set, then calibration id set.
  bool offer(const RerankProblem& p, const SelectionEval& eval,
             std::span<const int> selected, std::span<const int> calib) {
    bool take = false;
    if (!has || eval.objective > this->eval.objective + kObjTol) {
      take = true;
    } else if (eval.objective >= this->eval.objective - kObjTol) {
      if (eval.relevance > this->eval.relevance + kObjTol) {
        take = true;
      } else if (eval.relevance >= this->eval.relevance - kObjTol) {
        auto sel_ids = sorted_ids_of(p, selected);
        if (sel_ids != selected_ids_sorted) {
          take = sel_ids < selected_ids_sorted;
        } else {
          take = sorted_ids_of(p, calib) < calib_ids_sorted;
        }
      }
    }
    if (take) {
      has = true;
      this->eval = eval;
      selected_idx.assign(selected.begin(), selected.end());
      calib_idx.assign(calib.begin(), calib.end());
      selected_ids_sorted = sorted_ids_of(p, selected);
      calib_ids_sorted = sorted_ids_of(p, calib);
    }
    return take;
  }
};

RerankSolution make_solution(const RerankProblem& p, const Incumbent& inc,
                             SolveStatus status, double bound_gap,
                             std::int64_t nodes) {
  RerankSolution sol;
  sol.selected = ids_of(p, inc.selected_idx);  // index order = rank order
  sol.calibration_subset = inc.calib_ids_sorted;
  sol.objective = inc.eval.objective;
  sol.relevance_part = inc.eval.relevance;
  sol.divergence_part = inc.eval.divergence;
  sol.status = status;
  sol.bound_gap = bound_gap;
  sol.nodes_explored = nodes;
  return sol;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double value = 1.0;
  for (int i = 1; i <= k; ++i) {
    value *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (value > 1e18) return value;
  }
  return value;
}

bool next_combination(std::vector<int>& comb, int n) {
  int k = static_cast<int>(comb.size());
  for (int i = k - 1; i >= 0; --i) {
    if (comb[static_cast<std::size_t>(i)] < n - k + i) {
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) {
        comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
      }
      return true;
    }
  }
  return false;
}

// Plain top-K by score: the solution whenever the divergence term is inert
// (lambda1 = 0 or K1 = 0). The calibration subset is the tie-break winner,
// the K1 smallest selected ids.
RerankSolution solve_topk(const RerankProblem& p) {
  std::vector<int> selected(static_cast<std::size_t>(p.top_k));
  for (int i = 0; i < p.top_k; ++i) selected[static_cast<std::size_t>(i)] = i;
  std::vector<std::pair<ItemId, int>> by_id;
  for (int i : selected) by_id.emplace_back(p.candidates[static_cast<std::size_t>(i)].item, i);
  std::sort(by_id.begin(), by_id.end());
  std::vector<int> calib;
  for (int j = 0; j < p.calib_slots; ++j) calib.push_back(by_id[static_cast<std::size_t>(j)].second);
  std::sort(calib.begin(), calib.end());
  Incumbent inc;
  inc.offer(p, evaluate_selection(p, selected, calib), selected, calib);
  return make_solution(p, inc, SolveStatus::kOptimal, 0.0, 0);
}

// Greedy core over candidate indices, in pick order.
std::vector<int> greedy_pick_order(const RerankProblem& p) {
  int n = static_cast<int>(p.candidates.size());
  int n_cats = static_cast<int>(p.categories.size());
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<double> calib_sum(static_cast<std::size_t>(n_cats), 0.0);
  std::vector<int> picks;
  double current_div = 0.0;  // TV of the current (possibly partial) calib subset

  for (int step = 0; step < p.top_k; ++step) {
    bool calib_slot = step < p.calib_slots;
    int best = -1;
    double best_obj = -kInf;
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const auto& cand = p.candidates[static_cast<std::size_t>(j)];
      double div = current_div;
      if (calib_slot) {
        double denom = static_cast<double>(step + 1);
        double tv = 0.0;
        // spreads are sparse; walk the dense category axis with the sparse
        // entries merged in
        std::size_t s = 0;
        for (int c = 0; c < n_cats; ++c) {
          double extra = 0.0;
          if (s < cand.spread.size() && cand.spread[s].first == c) {
            extra = cand.spread[s].second;
            ++s;
          }
          tv += std::abs(p.target[static_cast<std::size_t>(c)] -
                         (calib_sum[static_cast<std::size_t>(c)] + extra) / denom);
        }
        div = tv;
      }
      double obj = cand.score - p.lambda1 * div;
      bool take = obj > best_obj + kObjTol;
      if (!take && best >= 0 && obj >= best_obj - kObjTol) {
        take = cand.item < p.candidates[static_cast<std::size_t>(best)].item;
      }
      if (take) {
        best = j;
        best_obj = obj;
      }
    }
    used[static_cast<std::size_t>(best)] = 1;
    picks.push_back(best);
    if (calib_slot) {
      for (const auto& [c, mass] : p.candidates[static_cast<std::size_t>(best)].spread) {
        calib_sum[static_cast<std::size_t>(c)] += mass;
      }
      double denom = static_cast<double>(step + 1);
      current_div = 0.0;
      for (int c = 0; c < n_cats; ++c) {
        current_div += std::abs(p.target[static_cast<std::size_t>(c)] -
                                calib_sum[static_cast<std::size_t>(c)] / denom);
      }
    }
  }
  return picks;
}

double top_k_relevance(const RerankProblem& p) {
  double sum = 0.0;
  for (int i = 0; i < p.top_k; ++i) sum += p.candidates[static_cast<std::size_t>(i)].score;
  return sum;
}

}  // namespace

SelectionEval evaluate_selection(const RerankProblem& p, std::span<const int> selected,
                                 std::span<const int> calib) {
  SelectionEval eval;
  for (int i : selected) eval.relevance += p.candidates[static_cast<std::size_t>(i)].score;
  if (!calib.empty()) {
    std::vector<double> q(p.categories.size(), 0.0);
    for (int i : calib) {
      for (const auto& [c, mass] : p.candidates[static_cast<std::size_t>(i)].spread) {
        q[static_cast<std::size_t>(c)] += mass;
      }
    }
    double denom = static_cast<double>(calib.size());
    for (std::size_t c = 0; c < q.size(); ++c) {
      eval.divergence += std::abs(p.target[c] - q[c] / denom);
    }
  }
  eval.objective = eval.relevance - p.lambda1 * eval.divergence;
  return eval;
}

RerankSolution solve_exact_bruteforce(const RerankProblem& p) {
  validate_problem(p);
  int n = static_cast<int>(p.candidates.size());
  double pairs = binomial(n, p.top_k) * binomial(p.top_k, p.calib_slots);
  if (pairs > 1e7) {
    throw std::invalid_argument(
        "instance too large for exhaustive enumeration; use solve_branch_and_bound");
  }

  Incumbent inc;
  std::int64_t evaluated = 0;
  std::vector<int> sel(static_cast<std::size_t>(p.top_k));
  for (int i = 0; i < p.top_k; ++i) sel[static_cast<std::size_t>(i)] = i;
  do {
    std::vector<int> positions(static_cast<std::size_t>(p.calib_slots));
    for (int i = 0; i < p.calib_slots; ++i) positions[static_cast<std::size_t>(i)] = i;
    std::vector<int> calib(static_cast<std::size_t>(p.calib_slots));
    do {
      for (std::size_t i = 0; i < positions.size(); ++i) {
        calib[i] = sel[static_cast<std::size_t>(positions[i])];
      }
      inc.offer(p, evaluate_selection(p, sel, calib), sel, calib);
      ++evaluated;
    } while (next_combination(positions, p.top_k));
  } while (next_combination(sel, n));

  return make_solution(p, inc, SolveStatus::kOptimal, 0.0, evaluated);
}

RerankSolution greedy_calibrated(const RerankProblem& p) {
  validate_problem(p);
  auto picks = greedy_pick_order(p);
  std::vector<int> selected = picks;
  std::sort(selected.begin(), selected.end());
  std::vector<int> calib(picks.begin(), picks.begin() + p.calib_slots);
  std::sort(calib.begin(), calib.end());
  Incumbent inc;
  inc.offer(p, evaluate_selection(p, selected, calib), selected, calib);
  double gap = std::max(0.0, top_k_relevance(p) - inc.eval.objective);
  return make_solution(p, inc, SolveStatus::kFeasibleWithGap, gap, 0);
}

namespace {

// One decision per tree edge: candidate (depth-1) joins the calibration
// subset or is barred from it (it may still be selected on relevance).
struct BnbNode {
  std::int32_t parent = -1;
  std::int32_t depth = 0;
  bool in_calib = false;
};

struct PqEntry {
  double bound = 0.0;
  std::int32_t node = 0;
};

struct PqOrder {
  bool operator()(const PqEntry& a, const PqEntry& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.node > b.node;  // FIFO among equal bounds
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const RerankProblem& p, const SolverBudget& budget)
      : p_(p), budget_(budget), n_(static_cast<int>(p.candidates.size())),
        n_cats_(static_cast<int>(p.categories.size())) {
    if (budget.max_nodes <= 0 || budget.max_seconds <= 0.0) {
      throw std::invalid_argument("solver budget must be positive");
    }
    build_topsum_table();
    score_prefix_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
    for (int i = 0; i < n_; ++i) {
      score_prefix_[static_cast<std::size_t>(i) + 1] =
          score_prefix_[static_cast<std::size_t>(i)] +
          p_.candidates[static_cast<std::size_t>(i)].score;
    }
  }

  RerankSolution run() {
    auto started = std::chrono::steady_clock::now();

    {  // greedy seed: guarantees an anytime-feasible incumbent
      auto picks = greedy_pick_order(p_);
      std::vector<int> selected = picks;
      std::sort(selected.begin(), selected.end());
      std::vector<int> calib(picks.begin(), picks.begin() + p_.calib_slots);
      std::sort(calib.begin(), calib.end());
      incumbent_.offer(p_, evaluate_selection(p_, selected, calib), selected, calib);
    }

    nodes_.push_back({-1, 0, false});  // root
    state_.assign(static_cast<std::size_t>(n_cats_), 0.0);
    double root_bound = child_bound(0, 0.0, {}, 0);
    if (root_bound > -kInf) pq_.push({root_bound, 0});

    bool exhausted = false;
    while (!pq_.empty()) {
      if (nodes_explored_ >= budget_.max_nodes) {
        exhausted = true;
        break;
      }
      if ((nodes_explored_ & 127) == 0) {
        auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - started)
                           .count();
        if (elapsed > budget_.max_seconds) {
          exhausted = true;
          break;
        }
      }
      PqEntry top = pq_.top();
      pq_.pop();
      ++nodes_explored_;
      if (top.bound < incumbent_.eval.objective - kObjTol) continue;
      expand(top.node);
    }

    if (!incumbent_.has) {
      throw std::runtime_error("no incumbent formed within solver budget");
    }
    if (exhausted) {
      double best_bound = incumbent_.eval.objective;
      if (!pq_.empty()) best_bound = std::max(best_bound, pq_.top().bound);
      return make_solution(p_, incumbent_, SolveStatus::kFeasibleWithGap,
                           best_bound - incumbent_.eval.objective, nodes_explored_);
    }
    return make_solution(p_, incumbent_, SolveStatus::kOptimal, 0.0, nodes_explored_);
  }

 private:
  // Sum of the j largest spread masses of category c among candidates d..n-1.
  double topsum(int c, int d, int j) const {
    j = std::min(j, std::min(p_.calib_slots, n_ - d));
    return topsum_[static_cast<std::size_t>((c * (n_ + 1) + d) * (p_.calib_slots + 1) + j)];
  }

  void build_topsum_table() {
    int k1 = p_.calib_slots;
    topsum_.assign(static_cast<std::size_t>(n_cats_ * (n_ + 1) * (k1 + 1)), 0.0);
    std::vector<double> dense(static_cast<std::size_t>(n_), 0.0);
    std::vector<double> top;  // descending, capped at k1
    for (int c = 0; c < n_cats_; ++c) {
      std::fill(dense.begin(), dense.end(), 0.0);
      for (int i = 0; i < n_; ++i) {
        for (const auto& [cat, mass] : p_.candidates[static_cast<std::size_t>(i)].spread) {
          if (cat == c) dense[static_cast<std::size_t>(i)] = mass;
        }
      }
      top.clear();
      for (int d = n_ - 1; d >= 0; --d) {
        double v = dense[static_cast<std::size_t>(d)];
        auto pos = std::upper_bound(top.begin(), top.end(), v, std::greater<double>());
        top.insert(pos, v);
        if (static_cast<int>(top.size()) > k1) top.pop_back();
        double run = 0.0;
        std::size_t base = static_cast<std::size_t>((c * (n_ + 1) + d) * (k1 + 1));
        for (int j = 0; j <= k1; ++j) {
          topsum_[base + static_cast<std::size_t>(j)] = run;
          if (j < static_cast<int>(top.size())) run += top[static_cast<std::size_t>(j)];
        }
      }
    }
  }

  // Admissible upper bound for the subtree where `t` calibration slots are
  // fixed (their spread sums live in state_), candidates in out_ cannot take
  // calibration slots, and candidates d.. are undecided.
  //
  // Relevance side: the K-t open positions take the best mix of barred and
  // undecided scores subject to at least `needed` of them coming from the
  // undecided suffix (future calibration picks live there).
  //
  // Divergence side: both p and the completed q sum to 1, so
  // TV = 2 * sum_c max(0, p_c - q_c) = 2 * sum_c max(0, q_c - p_c).
  // The `needed` future picks add exactly needed/K1 of total mass. Deficit
  // coverage is capped per category by the top spread masses available in
  // the suffix and globally by that mass budget; mass the deficits cannot
  // absorb is forced overflow on the surplus side.
  double child_bound(int t, double rel_fixed, std::span<const int> out, int d) const {
    int needed = p_.calib_slots - t;
    int open = p_.top_k - t;
    if (n_ - d < needed) return -kInf;

    double best_tail = -kInf;
    double out_sum = 0.0;
    std::size_t out_used = 0;
    // j = number of open positions filled from the suffix, the rest from out
    int j_min = std::max(needed, open - static_cast<int>(out.size()));
    for (int j = open; j >= j_min; --j) {
      if (j > n_ - d) continue;
      std::size_t from_out = static_cast<std::size_t>(open - j);
      while (out_used < from_out) {
        out_sum += p_.candidates[static_cast<std::size_t>(out[out_used])].score;
        ++out_used;
      }
      double tail = score_prefix_[static_cast<std::size_t>(d + j)] -
                    score_prefix_[static_cast<std::size_t>(d)] + out_sum;
      best_tail = std::max(best_tail, tail);
    }
    if (best_tail == -kInf) return -kInf;
    double rel = rel_fixed + best_tail;

    double k1 = static_cast<double>(p_.calib_slots);
    double total_deficit = 0.0, absorbable = 0.0, over_now = 0.0;
    for (int c = 0; c < n_cats_; ++c) {
      double fixed = state_[static_cast<std::size_t>(c)] / k1;
      double target = p_.target[static_cast<std::size_t>(c)];
      double deficit = std::max(0.0, target - fixed);
      total_deficit += deficit;
      absorbable += std::min(topsum(c, d, needed) / k1, deficit);
      over_now += std::max(0.0, fixed - target);
    }
    double budget = static_cast<double>(needed) / k1;
    double under = total_deficit - std::min(absorbable, budget);
    double over = over_now + std::max(0.0, budget - absorbable);
    double tv_lb = 2.0 * std::max(under, over);
    return rel - p_.lambda1 * tv_lb;
  }

  void reconstruct(std::int32_t node, std::vector<int>& calib, std::vector<int>& out) const {
    calib.clear();
    out.clear();
    std::int32_t cur = node;
    while (cur > 0) {
      const BnbNode& n = nodes_[static_cast<std::size_t>(cur)];
      (n.in_calib ? calib : out).push_back(n.depth - 1);
      cur = n.parent;
    }
    std::reverse(calib.begin(), calib.end());
    std::reverse(out.begin(), out.end());
  }

  void evaluate_leaf(const std::vector<int>& calib) {
    std::vector<char> in_calib(static_cast<std::size_t>(n_), 0);
    for (int i : calib) in_calib[static_cast<std::size_t>(i)] = 1;
    std::vector<int> selected = calib;
    int remaining = p_.top_k - p_.calib_slots;
    for (int i = 0; i < n_ && remaining > 0; ++i) {
      if (!in_calib[static_cast<std::size_t>(i)]) {
        selected.push_back(i);
        --remaining;
      }
    }
    std::sort(selected.begin(), selected.end());
    ++nodes_explored_;
    incumbent_.offer(p_, evaluate_selection(p_, selected, calib), selected, calib);
  }

  void expand(std::int32_t node_id) {
    reconstruct(node_id, calib_buf_, out_buf_);
    int depth = nodes_[static_cast<std::size_t>(node_id)].depth;
    int t = static_cast<int>(calib_buf_.size());

    std::fill(state_.begin(), state_.end(), 0.0);
    double rel_fixed = 0.0;
    for (int i : calib_buf_) {
      const auto& cand = p_.candidates[static_cast<std::size_t>(i)];
      rel_fixed += cand.score;
      for (const auto& [c, mass] : cand.spread) {
        state_[static_cast<std::size_t>(c)] += mass;
      }
    }

    // candidate `depth` joins the calibration subset
    {
      const auto& cand = p_.candidates[static_cast<std::size_t>(depth)];
      if (t + 1 == p_.calib_slots) {
        calib_buf_.push_back(depth);
        evaluate_leaf(calib_buf_);
        calib_buf_.pop_back();
      } else {
        for (const auto& [c, mass] : cand.spread) {
          state_[static_cast<std::size_t>(c)] += mass;
        }
        double bound = child_bound(t + 1, rel_fixed + cand.score, out_buf_, depth + 1);
        for (const auto& [c, mass] : cand.spread) {
          state_[static_cast<std::size_t>(c)] -= mass;
        }
        push_child(node_id, depth + 1, true, bound);
      }
    }

    // candidate `depth` is barred from the calibration subset
    {
      out_buf_.push_back(depth);
      double bound = child_bound(t, rel_fixed, out_buf_, depth + 1);
      out_buf_.pop_back();
      push_child(node_id, depth + 1, false, bound);
    }
  }

  void push_child(std::int32_t parent, int depth, bool in_calib, double bound) {
    if (bound == -kInf) return;
    if (incumbent_.has && bound < incumbent_.eval.objective - kObjTol) return;
    nodes_.push_back({parent, depth, in_calib});
    pq_.push({bound, static_cast<std::int32_t>(nodes_.size() - 1)});
  }

  const RerankProblem& p_;
  SolverBudget budget_;
  int n_ = 0;
  int n_cats_ = 0;
  std::vector<double> topsum_;
  std::vector<double> score_prefix_;  // cumulative candidate scores, index order
  std::vector<BnbNode> nodes_;
  std::priority_queue<PqEntry, std::vector<PqEntry>, PqOrder> pq_;
  Incumbent incumbent_;
  std::vector<double> state_;  // spread sums of the fixed calibration picks
  std::vector<int> calib_buf_, out_buf_;
  std::int64_t nodes_explored_ = 0;
};

}  // namespace

RerankSolution solve_branch_and_bound(const RerankProblem& p, const SolverBudget& budget) {
  validate_problem(p);
  if (p.calib_slots == 0 || p.lambda1 == 0.0) {
    return solve_topk(p);  // divergence term inert
  }
  return BranchAndBound(p, budget).run();
}

RerankProblem build_problem(UserId user, const CandidateList& candidates,
                            const CategoryDistribution& profile_dist,
                            const ItemCatalog& catalog, int top_k, double confidence,
                            double lambda1_global, int n_users) {
  if (top_k < 1) throw std::invalid_argument("K must be >= 1");
  if (candidates.candidates.size() < static_cast<std::size_t>(top_k)) {
    throw std::invalid_argument("user " + std::to_string(user) + ": candidate pool (" +
                                std::to_string(candidates.candidates.size()) +
                                ") smaller than K=" + std::to_string(top_k));
  }
  if (confidence < 0.0 || confidence > 1.0) {
    throw std::invalid_argument("confidence weight must be in [0,1]");
  }
  if (lambda1_global < 0.0) throw std::invalid_argument("lambda1 must be non-negative");
  if (n_users < 1) throw std::invalid_argument("n_users must be >= 1");

  RerankProblem p;
  p.user = user;
  p.top_k = top_k;
  // int(W * K) with round half up
  p.calib_slots = static_cast<int>(std::floor(confidence * top_k + 0.5));
  p.lambda1 = lambda1_global / static_cast<double>(n_users);

  std::map<std::string, int> category_index;
  for (const auto& [category, prob] : profile_dist.probs()) {
    category_index.emplace(category, 0);
  }
  for (const auto& [item, score] : candidates.candidates) {
    for (const auto& category : catalog.at(item).categories) {
      category_index.emplace(category, 0);
    }
  }
  for (auto& [category, index] : category_index) {
    index = static_cast<int>(p.categories.size());
    p.categories.push_back(category);
  }
  p.target.assign(p.categories.size(), 0.0);
  for (const auto& [category, prob] : profile_dist.probs()) {
    p.target[static_cast<std::size_t>(category_index.at(category))] = prob;
  }

  for (const auto& [item, score] : candidates.candidates) {
    RerankCandidate cand;
    cand.item = item;
    cand.score = score;
    const auto& cats = catalog.at(item).categories;
    double mass = 1.0 / static_cast<double>(cats.size());
    for (const auto& category : cats) {
      cand.spread.emplace_back(category_index.at(category), mass);
    }
    std::sort(cand.spread.begin(), cand.spread.end());
    p.candidates.push_back(std::move(cand));
  }
  std::sort(p.candidates.begin(), p.candidates.end(),
            [](const RerankCandidate& a, const RerankCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item < b.item;
            });
  return p;
}

Engine parse_engine(const std::string& name) {
  if (name == "none") return Engine::kNone;
  if (name == "greedy") return Engine::kGreedy;
  if (name == "cl") return Engine::kCl;
  if (name == "ccl") return Engine::kCcl;
  throw std::invalid_argument("unknown engine '" + name +
                              "' (expected none, greedy, cl, ccl)");
}

const char* to_string(Engine engine) {
  switch (engine) {
    case Engine::kNone: return "none";
    case Engine::kGreedy: return "greedy";
    case Engine::kCl: return "cl";
    case Engine::kCcl: return "ccl";
  }
  return "?";
}

std::map<UserId, RerankSolution> rerank_all(const std::map<UserId, RerankProblem>& problems,
                                            Engine engine, const SolverBudget& budget) {
  std::map<UserId, RerankSolution> solutions;
  for (const auto& [user, problem] : problems) {
    try {
      RerankSolution sol;
      switch (engine) {
        case Engine::kNone: {
          RerankProblem plain = problem;
          plain.lambda1 = 0.0;
          plain.calib_slots = 0;
          sol = solve_branch_and_bound(plain, budget);
          break;
        }
        case Engine::kGreedy:
          sol = greedy_calibrated(problem);
          break;
        case Engine::kCl:
        case Engine::kCcl:
          sol = solve_branch_and_bound(problem, budget);
          break;
      }
      solutions.emplace(user, std::move(sol));
    } catch (const std::exception& e) {
      throw std::runtime_error("re-ranking user " + std::to_string(user) + ": " +
                               e.what());
    }
  }
  return solutions;
}

void export_solutions(const std::map<UserId, RerankSolution>& solutions,
                      const std::map<UserId, RerankProblem>& problems, Engine engine,
                      const std::string& path) {
  CsvWriter out(path);
  out.write_row({"userId", "itemId", "rank", "score", "inCalibrationSubset", "engine"});
  for (const auto& [user, sol] : solutions) {
    const RerankProblem& problem = problems.at(user);
    for (std::size_t rank = 0; rank < sol.selected.size(); ++rank) {
      ItemId item = sol.selected[rank];
      double score = 0.0;
      for (const auto& cand : problem.candidates) {
        if (cand.item == item) {
          score = cand.score;
          break;
        }
      }
      bool in_calib = std::binary_search(sol.calibration_subset.begin(),
                                         sol.calibration_subset.end(), item);
      out.write_row({std::to_string(user), std::to_string(item),
                     std::to_string(rank + 1), format_double(score),
                     in_calib ? "1" : "0", to_string(engine)});
    }
  }
  out.close();
}

std::map<UserId, LoadedSolution> load_solutions_csv(const std::string& path) {
  std::map<UserId, std::vector<std::tuple<std::int64_t, ItemId, bool>>> rows;
  for_each_csv_row(
      path, {"userId", "itemId", "rank", "score", "inCalibrationSubset", "engine"},
      [&](const std::vector<std::string>& f, std::size_t line_no) {
        UserId user = parse_int_field(f[0], "userId", line_no);
        ItemId item = parse_int_field(f[1], "itemId", line_no);
        std::int64_t rank = parse_int_field(f[2], "rank", line_no);
        std::int64_t calib = parse_int_field(f[4], "inCalibrationSubset", line_no);
        rows[user].emplace_back(rank, item, calib != 0);
      });
  std::map<UserId, LoadedSolution> out;
  for (auto& [user, entries] : rows) {
    std::sort(entries.begin(), entries.end());
    LoadedSolution sol;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto [rank, item, in_calib] = entries[i];
      if (rank != static_cast<std::int64_t>(i + 1)) {
        throw DataError(path + ": user " + std::to_string(user) +
                        " has non-contiguous ranks");
      }
      sol.ranked.push_back(item);
      if (in_calib) sol.calibration_subset.push_back(item);
    }
    std::sort(sol.calibration_subset.begin(), sol.calibration_subset.end());
    out.emplace(user, std::move(sol));
  }
  return out;
}

}  // namespace calirec
