#pragma once

#include <vector>

#include "lognn/mec.hpp"

namespace lognn {

// Bipartite-graph encoding of an instance. Users occupy node indices
// [0, N), servers [N, N+M). Node features carry the scalar quantity plus a
// two-bit type one-hot so one parameter set can process both node types.
struct ProblemGraph {
  int n_users = 0;
  int n_servers = 0;
  Mat node_features;  // (N+M) x 3: user i -> [d_i, 1, 0], server j -> [f_j^s, 0, 1]
  Mat adjacency;      // (N+M) x (N+M), h across the bipartition, 0 elsewhere

  int n_nodes() const { return n_users + n_servers; }
  int user_node(int i) const { return i; }
  int server_node(int j) const { return n_users + j; }
};

// Raw per-link model outputs. user_links row i*M+j holds [x, p] logits for the
// user i -> server j link; server_links(j, i) holds the f logit for the
// server j -> user i link.
struct LinkWeights {
  int n_users = 0;
  int n_servers = 0;
  Mat user_links;    // (N*M) x 2, columns [x, p]
  Mat server_links;  // M x N
};

ProblemGraph encode_graph(const McInstance& inst);

// Routes raw link logits plus the per-user power-scale logits through
// project_to_feasible.
Allocation decode_allocation(const LinkWeights& links, const std::vector<double>& scale_logits,
                             const McInstance& inst);

// Directed links both ways across every user-server pair.
inline int link_count(const ProblemGraph& g) { return 2 * g.n_users * g.n_servers; }

}  // namespace lognn
