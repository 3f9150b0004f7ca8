#pragma once

/*
  Ordered ternary expansion trees.

  Repeatedly substituting the equation of motion into the cubic nonlinearity
  produces iterated sums indexed by rooted ternary trees.  A tree of
  generation J records J substitution steps: step 1 creates the root together
  with its three children, and each later step expands one terminal node into
  three children.  A generation-J tree therefore has 3J + 1 nodes, J of them
  non-terminal and 2J + 1 terminal, and the number of distinct trees of
  generation J is 1 * 3 * 5 * ... * (2J - 1).

  The `chronicle` stores which node was expanded at each step, so the same
  rooted tree reached through different expansion histories counts as a
  different object.  That distinction matters because the phase weights
  attached to a tree depend on the order of expansion.

  Each node carries a parity.  The root is plain; the children of a node of
  parity p get parities (p, flip(p), p), mirroring how the middle factor of
  the cubic term is conjugated.  A terminal of plain parity contributes v_n,
  a conjugated terminal contributes conj(v_n), and the phase created by
  expanding a conjugated node enters with the opposite sign.

  An index assignment attaches an integer frequency to every node subject to
  the local constraints

      n_parent = n_child1 - n_child2 + n_child3,
      {n_parent, n_child2} disjoint from {n_child1, n_child3}.

  The two conditions make the expansion phase of every step non-zero.  The
  enumeration below walks assignments in chronicle order: per step the first
  and third child frequencies range freely over the window and the middle one
  is solved from the constraint; the walk order is lexicographic in those
  free pairs, which fixes the reduction order of every operator sum built on
  top of it.
*/

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlsnf {

enum class Parity : std::uint8_t { Plain = 0, Conjugated = 1 };

inline Parity flip(Parity p) {
  return p == Parity::Plain ? Parity::Conjugated : Parity::Plain;
}

inline int parity_sign(Parity p) { return p == Parity::Plain ? 1 : -1; }

inline const char* parity_name(Parity p) {
  return p == Parity::Plain ? "plain" : "conjugated";
}

struct TreeNode {
  int parent = -1;      // -1 for the root
  int child_rank = -1;  // 0..2 position below the parent, -1 for the root
  Parity parity = Parity::Plain;
  std::array<int, 3> children = {-1, -1, -1};

  bool is_terminal() const { return children[0] < 0; }
};

class OrderedTree {
 public:
  // The unique generation-1 tree: a plain root with children
  // (plain, conjugated, plain).
  static OrderedTree first_generation() {
    OrderedTree t;
    TreeNode root;
    t.nodes_.push_back(root);
    t.chronicle_.push_back(0);
    t.attach_children(0);
    return t;
  }

  int generations() const { return static_cast<int>(chronicle_.size()); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const TreeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<int>& chronicle() const { return chronicle_; }

  // New tree with `terminal_id` expanded into three children.
  OrderedTree extended(int terminal_id) const {
    if (terminal_id < 0 || terminal_id >= node_count()) {
      throw std::invalid_argument("OrderedTree::extended: node id " +
                                  std::to_string(terminal_id) + " out of range");
    }
    if (!node(terminal_id).is_terminal()) {
      throw std::invalid_argument("OrderedTree::extended: node " +
                                  std::to_string(terminal_id) + " is not terminal");
    }
    OrderedTree t(*this);
    t.chronicle_.push_back(terminal_id);
    t.attach_children(terminal_id);
    return t;
  }

  // Terminal node ids in increasing id order.
  std::vector<int> terminals() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(2 * generations() + 1));
    for (int id = 0; id < node_count(); ++id) {
      if (nodes_[static_cast<std::size_t>(id)].is_terminal()) out.push_back(id);
    }
    return out;
  }

 private:
  void attach_children(int id) {
    const int base = node_count();
    const Parity p = nodes_[static_cast<std::size_t>(id)].parity;
    const std::array<Parity, 3> child_parity = {p, flip(p), p};
    for (int r = 0; r < 3; ++r) {
      TreeNode child;
      child.parent = id;
      child.child_rank = r;
      child.parity = child_parity[static_cast<std::size_t>(r)];
      nodes_.push_back(child);
    }
    nodes_[static_cast<std::size_t>(id)].children = {base, base + 1, base + 2};
  }

  std::vector<TreeNode> nodes_;
  std::vector<int> chronicle_;
};

// All trees of generation J.  Order: depth-first over expansion histories,
// expanding terminals in increasing node id, so the list is reproducible.
inline std::vector<OrderedTree> enumerate_trees(int J) {
  if (J < 1) throw std::invalid_argument("enumerate_trees: generation must be >= 1");
  std::vector<OrderedTree> current;
  current.push_back(OrderedTree::first_generation());
  for (int g = 2; g <= J; ++g) {
    std::vector<OrderedTree> next;
    next.reserve(current.size() * static_cast<std::size_t>(2 * g - 1));
    for (const OrderedTree& t : current) {
      for (int id : t.terminals()) next.push_back(t.extended(id));
    }
    current = std::move(next);
  }
  return current;
}

inline std::uint64_t double_factorial_odd(int J) {
  // 1 * 3 * 5 * ... * (2J - 1)
  std::uint64_t out = 1;
  for (int j = 1; j <= J; ++j) out *= static_cast<std::uint64_t>(2 * j - 1);
  return out;
}

// Phase created by one expansion step with parent frequency n and children
// (n1, n2, n3): parity_sign * (n^2 - n1^2 + n2^2 - n3^2).  The constraint
// n = n1 - n2 + n3 is required; under it the quadratic equals
// 2 (n - n1)(n - n3) = 2 (n2 - n1)(n2 - n3).
inline std::int64_t phase_of_generation(int n, int n1, int n2, int n3, Parity p) {
  if (n != n1 - n2 + n3) {
    throw std::invalid_argument("phase_of_generation: frequencies violate n = n1 - n2 + n3");
  }
  const auto sq = [](int k) {
    return static_cast<std::int64_t>(k) * static_cast<std::int64_t>(k);
  };
  const std::int64_t phi = sq(n) - sq(n1) + sq(n2) - sq(n3);
  return parity_sign(p) * phi;
}

// Per-step phases of a fully assigned tree: mu[j] is the phase of step j + 1,
// mu_tilde[j] the running sum, mu_hat the product of the running sums.
struct PhaseProfile {
  std::vector<std::int64_t> mu;
  std::vector<std::int64_t> mu_tilde;
  __int128 mu_hat = 1;
};

inline std::string int128_to_string(__int128 x) {
  if (x == 0) return "0";
  const bool neg = x < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(x + 1)) + 1
                            : static_cast<unsigned __int128>(x);
  std::string digits;
  while (u > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) digits.push_back('-');
  return {digits.rbegin(), digits.rend()};
}

namespace detail {
inline __int128 checked_mul_i128(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw std::overflow_error("PhaseProfile: phase product exceeds 128 bits");
  }
  return r;
}
}  // namespace detail

// Frequencies for every node of a tree, in node id order.
struct IndexAssignment {
  std::vector<int> freq;
};

inline PhaseProfile phase_profile(const OrderedTree& tree, const IndexAssignment& a) {
  if (a.freq.size() != static_cast<std::size_t>(tree.node_count())) {
    throw std::invalid_argument("phase_profile: assignment length != node count");
  }
  PhaseProfile p;
  const int J = tree.generations();
  p.mu.reserve(static_cast<std::size_t>(J));
  p.mu_tilde.reserve(static_cast<std::size_t>(J));
  std::int64_t running = 0;
  for (int j = 0; j < J; ++j) {
    const int e = tree.chronicle()[static_cast<std::size_t>(j)];
    const TreeNode& en = tree.node(e);
    const std::int64_t mu =
        phase_of_generation(a.freq[static_cast<std::size_t>(e)],
                            a.freq[static_cast<std::size_t>(en.children[0])],
                            a.freq[static_cast<std::size_t>(en.children[1])],
                            a.freq[static_cast<std::size_t>(en.children[2])], en.parity);
    running += mu;
    p.mu.push_back(mu);
    p.mu_tilde.push_back(running);
    p.mu_hat = detail::checked_mul_i128(p.mu_hat, running);
  }
  return p;
}

/*
  Assignment walk.

  `gate(j, mu_tilde_j, mu_tilde_prev, mu_1)` is called once the phases of
  generation j (1-based) are known; returning false prunes every assignment
  extending the current partial one.  `visit(freq, mu, mu_tilde)` receives the
  complete assignment.  Free pairs are walked lexicographically: step order is
  chronicle order, and within a step (first child, third child) run in
  increasing frequency.
*/
template <class Gate, class Visit>
void for_each_assignment(const OrderedTree& tree, int root_freq, int M, Gate&& gate,
                         Visit&& visit) {
  if (M < 0) throw std::invalid_argument("for_each_assignment: window must be >= 0");
  if (root_freq < -M || root_freq > M) return;
  const int J = tree.generations();
  std::vector<int> freq(static_cast<std::size_t>(tree.node_count()), 0);
  std::vector<std::int64_t> mu(static_cast<std::size_t>(J), 0);
  std::vector<std::int64_t> mu_tilde(static_cast<std::size_t>(J), 0);
  freq[0] = root_freq;

  auto step = [&](auto&& self, int j) -> void {  // j: 0-based step index
    if (j == J) {
      visit(freq, mu, mu_tilde);
      return;
    }
    const int e = tree.chronicle()[static_cast<std::size_t>(j)];
    const TreeNode& en = tree.node(e);
    const int ne = freq[static_cast<std::size_t>(e)];
    const int sign = parity_sign(en.parity);
    const std::int64_t prev = (j == 0) ? 0 : mu_tilde[static_cast<std::size_t>(j - 1)];
    for (int a = -M; a <= M; ++a) {
      const std::int64_t da = ne - a;
      for (int b = -M; b <= M; ++b) {
        const int c = a + b - ne;  // middle child from the constraint
        if (c < -M || c > M) continue;
        if (c == a || c == b) continue;  // zero-phase steps are excluded
        const std::int64_t phi = 2 * da * static_cast<std::int64_t>(ne - b);
        const std::int64_t m = sign > 0 ? phi : -phi;
        const std::int64_t mt = prev + m;
        const std::int64_t mu1 = (j == 0) ? mt : mu_tilde[0];
        if (!gate(j + 1, mt, prev, mu1)) continue;
        mu[static_cast<std::size_t>(j)] = m;
        mu_tilde[static_cast<std::size_t>(j)] = mt;
        freq[static_cast<std::size_t>(en.children[0])] = a;
        freq[static_cast<std::size_t>(en.children[1])] = c;
        freq[static_cast<std::size_t>(en.children[2])] = b;
        self(self, j + 1);
      }
    }
  };
  step(step, 0);
}

struct AcceptAllGate {
  bool operator()(int, std::int64_t, std::int64_t, std::int64_t) const { return true; }
};

// Materialised assignment list (intended for small windows and dumps).
inline std::vector<IndexAssignment> enumerate_assignments(const OrderedTree& tree,
                                                          int root_freq, int M) {
  std::vector<IndexAssignment> out;
  for_each_assignment(
      tree, root_freq, M, AcceptAllGate{},
      [&](const std::vector<int>& freq, const std::vector<std::int64_t>&,
          const std::vector<std::int64_t>&) { out.push_back(IndexAssignment{freq}); });
  return out;
}

inline std::uint64_t count_assignments(const OrderedTree& tree, int root_freq, int M) {
  std::uint64_t n = 0;
  for_each_assignment(tree, root_freq, M, AcceptAllGate{},
                      [&](const std::vector<int>&, const std::vector<std::int64_t>&,
                          const std::vector<std::int64_t>&) { ++n; });
  return n;
}

template <class Gate>
std::uint64_t count_assignments_gated(const OrderedTree& tree, int root_freq, int M,
                                      Gate gate) {
  std::uint64_t n = 0;
  for_each_assignment(tree, root_freq, M, gate,
                      [&](const std::vector<int>&, const std::vector<std::int64_t>&,
                          const std::vector<std::int64_t>&) { ++n; });
  return n;
}

}  // namespace nlsnf
