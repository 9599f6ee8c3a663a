#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lognn/graph.hpp"
#include "lognn/objective.hpp"

namespace lognn {

// One message-passing layer. Attention for layer l is computed from the
// layer-(l-1) embeddings, which resolves the mutual recursion between the
// attention and update equations.
struct LognnLayer {
  Mat agg_w;    // (2*in_dim + 1) x hidden: AGG over [sender, receiver, h]
  Mat agg_b;    // 1 x hidden
  Mat attn_w1;  // in_dim x hidden, receiver projection
  Mat attn_w2;  // in_dim x hidden, sender projection
  Mat attn_a;   // 2*hidden x 1, scalar score head
  Mat upd_w1;   // (in_dim + hidden) x hidden
  Mat upd_b1;   // 1 x hidden
  Mat upd_w2;   // hidden x hidden
  Mat upd_b2;   // 1 x hidden
};

// Link-output graph attention network. The parameter count depends only on
// hidden_dim and n_layers, never on the graph size, which is what lets one
// trained model serve any (N, M).
struct LognnModel {
  int hidden_dim = 64;
  int n_layers = 2;
  uint64_t seed = 0;
  std::string train_config_hash;  // set by training drivers, rides with the artifact
  std::vector<LognnLayer> layers;
  Mat readout_user;    // W3: 2*hidden x 2, producing [p, x] logits per user link
  Mat readout_server;  // W4: 2*hidden x 1, producing the f logit per server link
  Mat readout_scale;   // hidden x 1, per-user power-scale head

  std::vector<Mat*> parameters();
  std::vector<std::pair<std::string, Mat*>> named_parameters();
  size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases, deterministic per seed.
LognnModel init_model(uint64_t seed, int hidden_dim = 64, int n_layers = 2);

// Full forward pass through tensor ops. `params` must come from
// watch_parameters over model.parameters(); with a null tape there the pass
// runs in value-only inference mode.
ModelLogits lognn_forward(const LognnModel& model, const std::vector<Tensor>& params,
                          const ProblemGraph& graph);

// Value-mode forward producing the link-weight layout plus scale logits.
struct LognnOutput {
  LinkWeights links;
  std::vector<double> scale_logits;
};
LognnOutput lognn_forward(const LognnModel& model, const ProblemGraph& graph);

// encode -> forward -> decode in one call.
Allocation lognn_allocate(const LognnModel& model, const McInstance& inst);

// Output dimensionality of the link readouts for this graph next to the
// problem's decision-space dimensionality. Equal for all sizes: both count
// 3*N*M + N.
std::pair<int, int> count_decision_dims(const ProblemGraph& graph);

}  // namespace lognn
