#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "calirec/distributions.hpp"
#include "calirec/scoring.hpp"
#include "calirec/types.hpp"

namespace calirec {

struct RerankCandidate {
  ItemId item = 0;
  double score = 0.0;
  // (category index, mass) pairs of the item's uniform category spread;
  // masses sum to 1.
  std::vector<std::pair<int, double>> spread;
};

/// One user's re-ranking instance: pick K of the candidates maximizing
/// relevance minus lambda1-weighted total variation between the target
/// distribution and the mean spread of a K1-sized calibration subset.
struct RerankProblem {
  UserId user = 0;
  std::vector<RerankCandidate> candidates;  // score desc, ties id asc
  std::vector<std::string> categories;      // index -> label
  std::vector<double> target;               // p(c|u) over `categories`
  int top_k = 0;                            // K
  int calib_slots = 0;                      // K1 = int(W(I_u) * K)
  double lambda1 = 0.0;                     // per-user effective weight
};

enum class SolveStatus { kOptimal, kFeasibleWithGap };

struct RerankSolution {
  std::vector<ItemId> selected;            // final ranking: score desc, ties id asc
  std::vector<ItemId> calibration_subset;  // id ascending, subset of selected
  double objective = 0.0;
  double relevance_part = 0.0;
  double divergence_part = 0.0;  // TV(target, mean spread of calibration subset)
  SolveStatus status = SolveStatus::kOptimal;
  double bound_gap = 0.0;
  std::int64_t nodes_explored = 0;
};

// The node budget is the working limit; the time budget is a last-resort
// valve set high enough that it does not bind on ordinary instances, since a
// binding wall clock would make solver output load-dependent.
struct SolverBudget {
  std::int64_t max_nodes = 500000;
  double max_seconds = 300.0;
};

/// Builds a per-user problem. K1 is round-half-up(confidence * K); the
/// per-user weight is lambda1_global / n_users, which is what makes the
/// user-coupled objective decompose into independent problems.
RerankProblem build_problem(UserId user, const CandidateList& candidates,
                            const CategoryDistribution& profile_dist,
                            const ItemCatalog& catalog, int top_k, double confidence,
                            double lambda1_global, int n_users);

struct SelectionEval {
  double objective = 0.0;
  double relevance = 0.0;
  double divergence = 0.0;
};

/// Shared arithmetic path for scoring a (selected, calibration) index pair;
/// every solver reports numbers produced here. An empty calibration subset
/// contributes divergence 0.
SelectionEval evaluate_selection(const RerankProblem& p, std::span<const int> selected,
                                 std::span<const int> calib);

/// Reference oracle: enumerates every (selected set, calibration subset)
/// pair. Refuses instances with more than 10^7 pairs.
RerankSolution solve_exact_bruteforce(const RerankProblem& p);

/// Best-first branch and bound over per-candidate calibration-membership
/// decisions, seeded with the greedy solution. Proves optimality when the
/// search completes within budget; otherwise returns the incumbent with a
/// bound gap.
RerankSolution solve_branch_and_bound(const RerankProblem& p,
                                      const SolverBudget& budget);

/// Iterative baseline: adds the item with the best marginal objective one
/// slot at a time; the first K1 picks fill calibration slots.
RerankSolution greedy_calibrated(const RerankProblem& p);

enum class Engine { kNone, kGreedy, kCl, kCcl };

Engine parse_engine(const std::string& name);
const char* to_string(Engine engine);

/// Per-user independent solves. engine=none forces lambda1 to 0 (plain
/// top-K); cl and ccl run branch and bound; greedy runs the baseline.
/// Solver errors are rethrown with the failing user attached.
std::map<UserId, RerankSolution> rerank_all(const std::map<UserId, RerankProblem>& problems,
                                            Engine engine, const SolverBudget& budget);

/// Writes `userId,itemId,rank,score,inCalibrationSubset,engine` rows.
void export_solutions(const std::map<UserId, RerankSolution>& solutions,
                      const std::map<UserId, RerankProblem>& problems, Engine engine,
                      const std::string& path);

struct LoadedSolution {
  std::vector<ItemId> ranked;
  std::vector<ItemId> calibration_subset;  // id ascending
};

/// Reads a solutions export back; ranks must be 1..n per user.
std::map<UserId, LoadedSolution> load_solutions_csv(const std::string& path);

}  // namespace calirec
