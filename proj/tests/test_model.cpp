#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lognn/io.hpp"
#include "lognn/model.hpp"
#include "lognn/rng.hpp"

using namespace lognn;

namespace {

struct Permutation {
  std::vector<int> user;    // new index -> old index
  std::vector<int> server;
};

McInstance permute_instance(const McInstance& inst, const Permutation& perm) {
  McInstance out = inst;
  for (int i = 0; i < inst.n_users; ++i) out.task_size[i] = inst.task_size[perm.user[i]];
  for (int j = 0; j < inst.n_servers; ++j)
    out.server_compute[j] = inst.server_compute[perm.server[j]];
  for (int i = 0; i < inst.n_users; ++i)
    for (int j = 0; j < inst.n_servers; ++j)
      out.channel_gain(i, j) = inst.channel_gain(perm.user[i], perm.server[j]);
  return out;
}

Permutation random_permutation(int n, int m, uint64_t seed) {
  Permutation perm;
  perm.user.resize(n);
  perm.server.resize(m);
  std::iota(perm.user.begin(), perm.user.end(), 0);
  std::iota(perm.server.begin(), perm.server.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i >= 1; --i) std::swap(perm.user[i], perm.user[rng.below(uint64_t(i) + 1)]);
  for (int j = m - 1; j >= 1; --j)
    std::swap(perm.server[j], perm.server[rng.below(uint64_t(j) + 1)]);
  return perm;
}

ModelLogits infer_logits(const LognnModel& model, const McInstance& inst) {
  auto params = watch_parameters(const_cast<LognnModel&>(model).parameters(), nullptr);
  return lognn_forward(model, params, encode_graph(inst));
}

}  // namespace

TEST_CASE("init_model is deterministic and shaped by hidden_dim") {
  const LognnModel a = init_model(7);
  const LognnModel b = init_model(7);
  CHECK(a.layers[0].agg_w.v == b.layers[0].agg_w.v);
  CHECK(a.readout_user.v == b.readout_user.v);

  // First-layer AGG input is [sender(3), receiver(3), gain(1)].
  CHECK(a.layers[0].agg_w.rows == 7);
  CHECK(a.layers[0].agg_w.cols == 64);
  CHECK(a.layers[1].agg_w.rows == 129);
  CHECK(a.readout_user.rows == 128);
  CHECK(a.readout_user.cols == 2);
  CHECK(a.readout_server.cols == 1);

  const LognnModel c = init_model(8);
  CHECK(a.layers[0].agg_w.v != c.layers[0].agg_w.v);
}

TEST_CASE("initial weights respect the glorot bound") {
  // 10^5 draws across many seeds: every draw inside the bound, and the
  // extremes actually approach it.
  double max_ratio = 0.0;
  size_t draws = 0;
  for (uint64_t seed = 0; seed < 12 && draws < 100000; ++seed) {
    LognnModel model = init_model(seed);
    for (auto& [name, mat] : model.named_parameters()) {
      if (mat->rows == 1) continue;  // biases are zero-filled
      const double bound = std::sqrt(6.0 / double(mat->rows + mat->cols));
      for (double v : mat->v) {
        CHECK(std::abs(v) <= bound);
        max_ratio = std::max(max_ratio, std::abs(v) / bound);
        ++draws;
      }
    }
  }
  CHECK(draws >= 100000);
  CHECK(max_ratio > 0.999);
}

TEST_CASE("forward is deterministic and reusable across sizes") {
  const LognnModel model = init_model(3);
  const McInstance small = generate_instance(4, 2, 11);
  const ModelLogits a = infer_logits(model, small);
  const ModelLogits b = infer_logits(model, small);
  CHECK(a.x_logits.value().v == b.x_logits.value().v);
  CHECK(a.scale_logits.value().v == b.scale_logits.value().v);

  const McInstance big = generate_instance(20, 10, 12);
  const ModelLogits c = infer_logits(model, big);
  CHECK(c.x_logits.value().rows == 20);
  CHECK(c.x_logits.value().cols == 10);
  CHECK(c.x_logits.value().all_finite());
  CHECK(c.f_logits.value().all_finite());
}

TEST_CASE("duplicate users produce identical link logits") {
  McInstance inst = generate_instance(3, 2, 21);
  // Make users 0 and 2 indistinguishable.
  inst.task_size[2] = inst.task_size[0];
  for (int j = 0; j < 2; ++j) inst.channel_gain(2, j) = inst.channel_gain(0, j);

  const LognnModel model = init_model(5);
  const ModelLogits logits = infer_logits(model, inst);
  for (int j = 0; j < 2; ++j) {
    CHECK(logits.x_logits.value()(2, j) == doctest::Approx(logits.x_logits.value()(0, j)).epsilon(1e-12));
    CHECK(logits.p_logits.value()(2, j) == doctest::Approx(logits.p_logits.value()(0, j)).epsilon(1e-12));
    CHECK(logits.f_logits.value()(2, j) == doctest::Approx(logits.f_logits.value()(0, j)).epsilon(1e-12));
  }
  CHECK(logits.scale_logits.value()(2, 0) ==
        doctest::Approx(logits.scale_logits.value()(0, 0)).epsilon(1e-12));
}

TEST_CASE("forward is permutation equivariant") {
  const LognnModel model = init_model(9);
  for (uint64_t trial = 0; trial < 10; ++trial) {
    const int n = 3 + int(trial % 4), m = 2 + int(trial % 3);
    const McInstance inst = generate_instance(n, m, 500 + trial);
    const Permutation perm = random_permutation(n, m, 900 + trial);
    const McInstance permuted = permute_instance(inst, perm);

    const ModelLogits base = infer_logits(model, inst);
    const ModelLogits moved = infer_logits(model, permuted);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        CHECK(std::abs(moved.x_logits.value()(i, j) -
                       base.x_logits.value()(perm.user[i], perm.server[j])) <= 1e-10);
        CHECK(std::abs(moved.f_logits.value()(i, j) -
                       base.f_logits.value()(perm.user[i], perm.server[j])) <= 1e-10);
      }
      CHECK(std::abs(moved.scale_logits.value()(i, 0) -
                     base.scale_logits.value()(perm.user[i], 0)) <= 1e-10);
    }
  }
}

TEST_CASE("decision dimensionality matches the problem at every size") {
  CHECK(count_decision_dims(encode_graph(generate_instance(2, 2, 1))) ==
        std::pair<int, int>{14, 14});
  CHECK(count_decision_dims(encode_graph(generate_instance(60, 30, 2))) ==
        std::pair<int, int>{5460, 5460});
  for (int m = 1; m <= 12; ++m) {
    const auto dims = count_decision_dims(encode_graph(generate_instance(2 * m, m, m)));
    CHECK(dims.first == dims.second);
    CHECK(dims.first == 3 * (2 * m) * m + 2 * m);
  }
}

TEST_CASE("one model artifact serves every size unchanged") {
  LognnModel model = init_model(31);
  const std::string hash_before = content_hash_hex(model_to_json(model).dump());
  for (int m : {2, 5, 10}) {
    const McInstance inst = generate_instance(2 * m, m, 40 + m);
    const Allocation alloc = lognn_allocate(model, inst);
    CHECK(check_feasibility(inst, alloc).feasible());
  }
  CHECK(content_hash_hex(model_to_json(model).dump()) == hash_before);
  CHECK(model.parameter_count() == init_model(99).parameter_count());
}

TEST_CASE("model JSON round-trips bit-exactly") {
  const LognnModel model = init_model(42);
  const Json j = model_to_json(model);
  const LognnModel loaded = lognn_from_json(j);
  CHECK(content_hash_hex(model_to_json(loaded).dump()) == content_hash_hex(j.dump()));
  const McInstance inst = generate_instance(4, 2, 5);
  CHECK(infer_logits(model, inst).x_logits.value().v ==
        infer_logits(loaded, inst).x_logits.value().v);
}
