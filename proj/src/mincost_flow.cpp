#include "mplace/mincost_flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>

#include "mplace/types.hpp"

namespace mplace {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Edge {
  int to;
  int rev;
  int cap;
  std::int64_t cost;
};

class FlowGraph {
 public:
  explicit FlowGraph(int n) : adj_(n) {}

  int add(int u, int v, std::int64_t cost) {
    adj_[u].push_back({v, static_cast<int>(adj_[v].size()), 1, cost});
    adj_[v].push_back({u, static_cast<int>(adj_[u].size()) - 1, 0, -cost});
    return static_cast<int>(adj_[u].size()) - 1;
  }

  std::vector<std::vector<Edge>>& adj() { return adj_; }

  /// One unit along a shortest s-t path under reduced costs; false when t is unreachable.
  bool augment(int s, int t, std::vector<std::int64_t>& pot) {
    const int n = static_cast<int>(adj_.size());
    std::vector<std::int64_t> dist(n, kInf);
    std::vector<std::pair<int, int>> parent(n, {-1, -1});
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0;
    heap.push({0, s});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (int e = 0; e < static_cast<int>(adj_[u].size()); ++e) {
        const Edge& ed = adj_[u][e];
        if (ed.cap == 0) continue;
        const std::int64_t nd = d + ed.cost + pot[u] - pot[ed.to];
        if (nd < dist[ed.to]) {
          dist[ed.to] = nd;
          parent[ed.to] = {u, e};
          heap.push({nd, ed.to});
        }
      }
    }
    if (dist[t] >= kInf) return false;
    // unreachable nodes keep valid reduced costs when raised by the largest finite distance
    std::int64_t reach = 0;
    for (auto d : dist) {
      if (d < kInf) reach = std::max(reach, d);
    }
    for (int v = 0; v < n; ++v) pot[v] += dist[v] < kInf ? dist[v] : reach;
    for (int v = t; v != s; v = parent[v].first) {
      Edge& ed = adj_[parent[v].first][parent[v].second];
      ed.cap -= 1;
      adj_[v][ed.rev].cap += 1;
    }
    return true;
  }

 private:
  std::vector<std::vector<Edge>> adj_;
};

void check_problem(const AssignmentProblem& p) {
  if (p.num_left < 0 || p.num_right < 0) throw ValidationError("negative problem size");
  for (const auto& a : p.arcs) {
    if (a.left < 0 || a.left >= p.num_left || a.right < 0 || a.right >= p.num_right)
      throw ValidationError("arc endpoint out of range");
    if (a.cost < 0) throw ValidationError("negative arc cost");
  }
}

/**
 * Walks the optimal matching towards the lexicographically smallest optimal one.
 *
 * With d = shortest distances from a virtual root in the final residual graph, a matching is
 * optimal iff it uses only arcs with zero reduced cost, only rights with d(j) <= d(t), and covers
 * every right with d(j) < d(t). Left items are settled in index order; each tries smaller rights
 * and repairs the rest of the matching with at most two alternating paths.
 */
class TieBreaker {
 public:
  TieBreaker(int nl, std::vector<std::vector<int>> tight, std::vector<bool> forced, std::vector<int> match_l,
             int nr)
      : nl_(nl), tight_(std::move(tight)), forced_(std::move(forced)), ml_(std::move(match_l)), mr_(nr, -1),
        fixed_(nl, false) {
    for (int l = 0; l < nl_; ++l) mr_[ml_[l]] = l;
    lefts_of_.resize(nr);
    for (int l = 0; l < nl_; ++l) {
      for (int r : tight_[l]) lefts_of_[r].push_back(l);
    }
  }

  std::vector<int> run() {
    for (int i = 0; i < nl_; ++i) {
      fixed_[i] = true;
      const int j0 = ml_[i];
      for (int j : tight_[i]) {
        if (j >= j0) break;
        if (mr_[j] >= 0 && fixed_[mr_[j]]) continue;
        if (try_move(i, j, j0)) break;
      }
    }
    return ml_;
  }

 private:
  bool try_move(int i, int j, int j0) {
    const auto saved_l = ml_;
    const auto saved_r = mr_;
    const int displaced = mr_[j];
    ml_[i] = j;
    mr_[j] = i;
    mr_[j0] = -1;
    bool ok = true;
    if (displaced >= 0) {
      ml_[displaced] = -1;
      ok = rematch_left(displaced);
    }
    if (ok && forced_[j0] && mr_[j0] < 0) ok = recover_right(j0);
    if (!ok) {
      ml_ = saved_l;
      mr_ = saved_r;
    }
    return ok;
  }

  // augmenting path from a free left to a free right
  bool rematch_left(int start) {
    std::vector<int> parent_left(mr_.size(), -1);
    std::vector<bool> seen(mr_.size(), false);
    std::queue<int> q;
    q.push(start);
    while (!q.empty()) {
      const int l = q.front();
      q.pop();
      for (int r : tight_[l]) {
        if (seen[r]) continue;
        const int owner = mr_[r];
        if (owner >= 0 && fixed_[owner]) continue;
        seen[r] = true;
        parent_left[r] = l;
        if (owner < 0) {
          for (int cur = r; cur >= 0;) {
            const int pl = parent_left[cur];
            const int prev = ml_[pl];
            ml_[pl] = cur;
            mr_[cur] = pl;
            cur = pl == start ? -1 : prev;
          }
          return true;
        }
        q.push(owner);
      }
    }
    return false;
  }

  // alternating path from an uncovered forced right to a left that can give up a free-to-drop right
  bool recover_right(int start) {
    std::vector<int> parent_right(nl_, -1);
    std::vector<bool> seen(nl_, false);
    std::queue<int> q;
    q.push(start);
    while (!q.empty()) {
      const int r = q.front();
      q.pop();
      for (int l : lefts_of_[r]) {
        if (seen[l] || fixed_[l]) continue;
        seen[l] = true;
        parent_right[l] = r;
        const int held = ml_[l];
        if (!forced_[held]) {
          for (int cur = l; cur >= 0;) {
            const int want = parent_right[cur];
            const int next = mr_[want];
            mr_[ml_[cur]] = mr_[ml_[cur]] == cur ? -1 : mr_[ml_[cur]];
            ml_[cur] = want;
            mr_[want] = cur;
            cur = want == start ? -1 : next;
          }
          return true;
        }
        q.push(held);
      }
    }
    return false;
  }

  int nl_;
  std::vector<std::vector<int>> tight_;
  std::vector<bool> forced_;
  std::vector<int> ml_, mr_;
  std::vector<bool> fixed_;
  std::vector<std::vector<int>> lefts_of_;
};

}  // namespace

std::int64_t integer_cost(double cost) { return static_cast<std::int64_t>(std::nearbyint(std::ldexp(cost, 10))); }

AssignmentResult solve_assignment(const AssignmentProblem& problem) {
  check_problem(problem);
  const int nl = problem.num_left, nr = problem.num_right;
  AssignmentResult out;
  if (nl == 0) return out;

  // parallel arcs collapse to the cheapest
  std::vector<std::vector<std::pair<int, std::int64_t>>> arcs(nl);
  {
    std::vector<Arc> sorted = problem.arcs;
    std::sort(sorted.begin(), sorted.end(), [](const Arc& a, const Arc& b) {
      return std::tie(a.left, a.right, a.cost) < std::tie(b.left, b.right, b.cost);
    });
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (k > 0 && sorted[k].left == sorted[k - 1].left && sorted[k].right == sorted[k - 1].right) continue;
      arcs[sorted[k].left].push_back({sorted[k].right, sorted[k].cost});
    }
  }

  const int t = nl + nr;
  FlowGraph g(nl + nr + 1);
  for (int l = 0; l < nl; ++l) {
    if (arcs[l].empty()) throw InfeasibleError("left item " + std::to_string(l) + " has no arc");
    for (auto [r, c] : arcs[l]) g.add(l, nl + r, c);
  }
  for (int r = 0; r < nr; ++r) g.add(nl + r, t, 0);

  std::vector<std::int64_t> pot(nl + nr + 1, 0);
  for (int l = 0; l < nl; ++l) {
    // the new left node starts with a potential that keeps its outgoing reduced costs nonnegative
    pot[l] = std::numeric_limits<std::int64_t>::min();
    for (auto [r, c] : arcs[l]) pot[l] = std::max(pot[l], pot[nl + r] - c);
    if (!g.augment(l, t, pot))
      throw InfeasibleError("left item " + std::to_string(l) + " cannot be matched to a free slot");
  }

  auto& adj = g.adj();
  std::vector<int> match(nl, -1);
  for (int l = 0; l < nl; ++l) {
    for (const Edge& e : adj[l]) {
      if (e.to >= nl && e.to < nl + nr && e.cap == 0) match[l] = e.to - nl;
    }
  }

  // root distances over the residual graph (Bellman-Ford queue variant)
  const int n = nl + nr + 1;
  std::vector<std::int64_t> d(n, 0);
  {
    std::queue<int> q;
    std::vector<bool> queued(n, true);
    for (int v = 0; v < n; ++v) q.push(v);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      queued[u] = false;
      for (const Edge& e : adj[u]) {
        if (e.cap == 0 || d[u] + e.cost >= d[e.to]) continue;
        d[e.to] = d[u] + e.cost;
        if (!queued[e.to]) {
          queued[e.to] = true;
          q.push(e.to);
        }
      }
    }
  }
  std::vector<bool> forced(nr);
  std::vector<std::vector<int>> tight(nl);
  for (int r = 0; r < nr; ++r) forced[r] = d[nl + r] < d[t];
  for (int l = 0; l < nl; ++l) {
    for (auto [r, c] : arcs[l]) {
      if (d[nl + r] <= d[t] && c + d[l] - d[nl + r] == 0) tight[l].push_back(r);
    }
  }

  out.match = TieBreaker(nl, std::move(tight), std::move(forced), std::move(match), nr).run();
  for (int l = 0; l < nl; ++l) {
    auto it = std::lower_bound(arcs[l].begin(), arcs[l].end(), std::pair{out.match[l], std::int64_t{-1}});
    out.total_cost += it->second;
  }
  return out;
}

std::int64_t assignment_oracle(const AssignmentProblem& problem) {
  check_problem(problem);
  if (problem.num_left > 9) throw ValidationError("oracle supports at most 9 left items");
  if (problem.num_right > 64) throw ValidationError("oracle supports at most 64 right slots");
  const int nl = problem.num_left;
  std::vector<std::vector<std::pair<int, std::int64_t>>> arcs(nl);
  for (const auto& a : problem.arcs) arcs[a.left].push_back({a.right, a.cost});

  // every injection is visited; states (item, used slots) are memoized
  std::vector<std::unordered_map<std::uint64_t, std::int64_t>> memo(nl);
  std::function<std::int64_t(int, std::uint64_t)> best = [&](int l, std::uint64_t used) -> std::int64_t {
    if (l == nl) return 0;
    if (auto it = memo[l].find(used); it != memo[l].end()) return it->second;
    std::int64_t b = kInf;
    for (auto [r, c] : arcs[l]) {
      const std::uint64_t bit = std::uint64_t{1} << r;
      if (used & bit) continue;
      const std::int64_t rest = best(l + 1, used | bit);
      if (rest < kInf) b = std::min(b, c + rest);
    }
    memo[l][used] = b;
    return b;
  };
  const std::int64_t cost = best(0, 0);
  if (cost >= kInf) throw InfeasibleError("no perfect matching of the left items");
  return cost;
}

}  // namespace mplace
