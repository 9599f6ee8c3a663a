#include "lognn/graph.hpp"

#include <stdexcept>

namespace lognn {

ProblemGraph encode_graph(const McInstance& inst) {
  const int n = inst.n_users, m = inst.n_servers;
  ProblemGraph g;
  g.n_users = n;
  g.n_servers = m;
  g.node_features = Mat(n + m, 3);
  for (int i = 0; i < n; ++i) {
    g.node_features(i, 0) = inst.task_size[i];
    g.node_features(i, 1) = 1.0;
  }
  for (int j = 0; j < m; ++j) {
    g.node_features(n + j, 0) = inst.server_compute[j];
    g.node_features(n + j, 2) = 1.0;
  }
  g.adjacency = Mat(n + m, n + m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double h = inst.channel_gain(i, j);
      g.adjacency(i, n + j) = h;
      g.adjacency(n + j, i) = h;
    }
  return g;
}

Allocation decode_allocation(const LinkWeights& links, const std::vector<double>& scale_logits,
                             const McInstance& inst) {
  const int n = inst.n_users, m = inst.n_servers;
  if (links.n_users != n || links.n_servers != m || links.user_links.rows != n * m ||
      links.user_links.cols != 2 || links.server_links.rows != m || links.server_links.cols != n)
    throw std::invalid_argument("decode_allocation: link shapes do not match instance");

  Mat x_logits(n, m), p_logits(n, m), f_logits(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      x_logits(i, j) = links.user_links(i * m + j, 0);
      p_logits(i, j) = links.user_links(i * m + j, 1);
      f_logits(i, j) = links.server_links(j, i);
    }
  return project_to_feasible(x_logits, p_logits, f_logits, scale_logits, inst);
}

}  // namespace lognn
