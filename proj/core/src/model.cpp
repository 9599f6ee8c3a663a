#include "lognn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "lognn/rng.hpp"

namespace lognn {

namespace {

constexpr int kNodeFeatureDim = 3;  // [quantity, is_user, is_server]

Mat glorot(Rng& rng, int rows, int cols) {
  const double bound = std::sqrt(6.0 / double(rows + cols));
  Mat m(rows, cols);
  for (double& v : m.v) v = rng.uniform(-bound, bound);
  return m;
}

// Directed-link layout for one graph size. Links are grouped by receiver:
// first every user's M incoming links (from servers), then every server's N
// incoming links (from users). Segment s is exactly node s's in-neighborhood,
// so segment reductions line up with node rows.
struct GraphLayout {
  std::vector<int> sender;       // 2NM node indices
  std::vector<int> receiver;     // 2NM node indices
  std::vector<int> seg_offsets;  // N+M+1
  Mat link_gain;                 // 2NM x 1
  std::vector<int> pair_user;    // NM: user node of pair (i,j), i-major
  std::vector<int> pair_server;  // NM: server node of pair (i,j)
  std::vector<int> user_rows;    // 0..N-1
};

GraphLayout build_layout(const ProblemGraph& g) {
  const int n = g.n_users, m = g.n_servers;
  const int links = 2 * n * m;
  GraphLayout lay;
  lay.sender.resize(links);
  lay.receiver.resize(links);
  lay.link_gain = Mat(links, 1);
  lay.seg_offsets.reserve(n + m + 1);
  lay.seg_offsets.push_back(0);

  int t = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j, ++t) {
      lay.sender[t] = g.server_node(j);
      lay.receiver[t] = i;
      lay.link_gain(t, 0) = g.adjacency(i, g.server_node(j));
    }
    lay.seg_offsets.push_back(t);
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i, ++t) {
      lay.sender[t] = i;
      lay.receiver[t] = g.server_node(j);
      lay.link_gain(t, 0) = g.adjacency(i, g.server_node(j));
    }
    lay.seg_offsets.push_back(t);
  }

  lay.pair_user.resize(n * m);
  lay.pair_server.resize(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      lay.pair_user[i * m + j] = i;
      lay.pair_server[i * m + j] = g.server_node(j);
    }
  lay.user_rows.resize(n);
  for (int i = 0; i < n; ++i) lay.user_rows[i] = i;
  return lay;
}

}  // namespace

std::vector<Mat*> LognnModel::parameters() {
  std::vector<Mat*> out;
  for (LognnLayer& l : layers)
    for (Mat* m : {&l.agg_w, &l.agg_b, &l.attn_w1, &l.attn_w2, &l.attn_a, &l.upd_w1, &l.upd_b1,
                   &l.upd_w2, &l.upd_b2})
      out.push_back(m);
  out.push_back(&readout_user);
  out.push_back(&readout_server);
  out.push_back(&readout_scale);
  return out;
}

std::vector<std::pair<std::string, Mat*>> LognnModel::named_parameters() {
  std::vector<std::pair<std::string, Mat*>> out;
  for (size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    LognnLayer& lay = layers[l];
    out.emplace_back(prefix + "agg_w", &lay.agg_w);
    out.emplace_back(prefix + "agg_b", &lay.agg_b);
    out.emplace_back(prefix + "attn_w1", &lay.attn_w1);
    out.emplace_back(prefix + "attn_w2", &lay.attn_w2);
    out.emplace_back(prefix + "attn_a", &lay.attn_a);
    out.emplace_back(prefix + "upd_w1", &lay.upd_w1);
    out.emplace_back(prefix + "upd_b1", &lay.upd_b1);
    out.emplace_back(prefix + "upd_w2", &lay.upd_w2);
    out.emplace_back(prefix + "upd_b2", &lay.upd_b2);
  }
  out.emplace_back("readout_user", &readout_user);
  out.emplace_back("readout_server", &readout_server);
  out.emplace_back("readout_scale", &readout_scale);
  return out;
}

size_t LognnModel::parameter_count() const {
  size_t total = 0;
  for (const LognnLayer& l : layers)
    for (const Mat* m : {&l.agg_w, &l.agg_b, &l.attn_w1, &l.attn_w2, &l.attn_a, &l.upd_w1,
                         &l.upd_b1, &l.upd_w2, &l.upd_b2})
      total += m->size();
  return total + readout_user.size() + readout_server.size() + readout_scale.size();
}

LognnModel init_model(uint64_t seed, int hidden_dim, int n_layers) {
  if (hidden_dim < 1 || n_layers < 1)
    throw std::invalid_argument("init_model: hidden_dim and n_layers must be >= 1");
  Rng rng(seed);
  LognnModel model;
  model.hidden_dim = hidden_dim;
  model.n_layers = n_layers;
  model.seed = seed;

  int in_dim = kNodeFeatureDim;
  for (int l = 0; l < n_layers; ++l) {
    LognnLayer layer;
    layer.agg_w = glorot(rng, 2 * in_dim + 1, hidden_dim);
    layer.agg_b = Mat(1, hidden_dim);
    layer.attn_w1 = glorot(rng, in_dim, hidden_dim);
    layer.attn_w2 = glorot(rng, in_dim, hidden_dim);
    layer.attn_a = glorot(rng, 2 * hidden_dim, 1);
    layer.upd_w1 = glorot(rng, in_dim + hidden_dim, hidden_dim);
    layer.upd_b1 = Mat(1, hidden_dim);
    layer.upd_w2 = glorot(rng, hidden_dim, hidden_dim);
    layer.upd_b2 = Mat(1, hidden_dim);
    model.layers.push_back(std::move(layer));
    in_dim = hidden_dim;
  }
  model.readout_user = glorot(rng, 2 * hidden_dim, 2);
  model.readout_server = glorot(rng, 2 * hidden_dim, 1);
  model.readout_scale = glorot(rng, hidden_dim, 1);
  return model;
}

ModelLogits lognn_forward(const LognnModel& model, const std::vector<Tensor>& params,
                          const ProblemGraph& graph) {
  if (params.size() != 9 * model.layers.size() + 3)
    throw std::invalid_argument("lognn_forward: parameter list does not match model");
  const int n = graph.n_users, m = graph.n_servers;
  const GraphLayout lay = build_layout(graph);
  const Tensor gain = Tensor::constant(lay.link_gain);

  // Copied, not viewed: backward closures outlive any temporary graph.
  Tensor emb = Tensor::constant(graph.node_features);
  size_t p = 0;
  for (int l = 0; l < model.n_layers; ++l) {
    const Tensor& agg_w = params[p + 0];
    const Tensor& agg_b = params[p + 1];
    const Tensor& attn_w1 = params[p + 2];
    const Tensor& attn_w2 = params[p + 3];
    const Tensor& attn_a = params[p + 4];
    const Tensor& upd_w1 = params[p + 5];
    const Tensor& upd_b1 = params[p + 6];
    const Tensor& upd_w2 = params[p + 7];
    const Tensor& upd_b2 = params[p + 8];
    p += 9;

    // Attention score per directed link from the incoming embeddings.
    Tensor proj_rcv = row_gather(matmul(emb, attn_w1), lay.receiver);
    Tensor proj_snd = row_gather(matmul(emb, attn_w2), lay.sender);
    Tensor scores = leaky_relu(matmul(concat_cols(proj_rcv, proj_snd), attn_a));
    Tensor alpha = segment_softmax(scores, lay.seg_offsets);

    // Message per link: AGG over [sender, receiver, channel gain].
    Tensor msg_in =
        concat_cols(concat_cols(row_gather(emb, lay.sender), row_gather(emb, lay.receiver)), gain);
    Tensor messages = leaky_relu(add_rowvec(matmul(msg_in, agg_w), agg_b));

    // Node update from the old embedding and the attention-weighted mean.
    Tensor aggregated = segment_mean(scale_rows(messages, alpha), lay.seg_offsets);
    Tensor hidden = leaky_relu(add_rowvec(matmul(concat_cols(emb, aggregated), upd_w1), upd_b1));
    emb = add_rowvec(matmul(hidden, upd_w2), upd_b2);
  }

  const Tensor& w3 = params[p + 0];
  const Tensor& w4 = params[p + 1];
  const Tensor& w_scale = params[p + 2];

  Tensor user_emb = row_gather(emb, lay.pair_user);
  Tensor server_emb = row_gather(emb, lay.pair_server);
  Tensor px = matmul(concat_cols(user_emb, server_emb), w3);  // columns [p, x]
  Tensor f = matmul(concat_cols(server_emb, user_emb), w4);

  ModelLogits out;
  out.p_logits = reshape(col_slice(px, 0), n, m);
  out.x_logits = reshape(col_slice(px, 1), n, m);
  out.f_logits = reshape(f, n, m);
  out.scale_logits = matmul(row_gather(emb, lay.user_rows), w_scale);
  return out;
}

LognnOutput lognn_forward(const LognnModel& model, const ProblemGraph& graph) {
  auto params = watch_parameters(const_cast<LognnModel&>(model).parameters(), nullptr);
  ModelLogits logits = lognn_forward(model, params, graph);
  const int n = graph.n_users, m = graph.n_servers;

  LognnOutput out;
  out.links.n_users = n;
  out.links.n_servers = m;
  out.links.user_links = Mat(n * m, 2);
  out.links.server_links = Mat(m, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      out.links.user_links(i * m + j, 0) = logits.x_logits.value()(i, j);
      out.links.user_links(i * m + j, 1) = logits.p_logits.value()(i, j);
      out.links.server_links(j, i) = logits.f_logits.value()(i, j);
    }
  out.scale_logits.resize(n);
  for (int i = 0; i < n; ++i) out.scale_logits[i] = logits.scale_logits.value()(i, 0);
  return out;
}

Allocation lognn_allocate(const LognnModel& model, const McInstance& inst) {
  const ProblemGraph graph = encode_graph(inst);
  const LognnOutput out = lognn_forward(model, graph);
  return decode_allocation(out.links, out.scale_logits, inst);
}

std::pair<int, int> count_decision_dims(const ProblemGraph& graph) {
  const int n = graph.n_users, m = graph.n_servers;
  const int dims = 3 * n * m + n;
  return {dims, dims};
}

}  // namespace lognn
