// Acceptance suite. Each criterion prints exactly one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails. Trained artifacts are
// shared across criteria so the whole run stays within desk-scale budgets.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "lognn/gradcheck.hpp"
#include "lognn/graph.hpp"
#include "lognn/harness.hpp"
#include "lognn/io.hpp"
#include "lognn/rng.hpp"

using namespace lognn;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Criterion> g_results;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double t0) {
  Criterion c{id, name, pass, detail, now_seconds() - t0};
  std::printf("[%s] criterion %d (%s): %s  [%.1fs]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), c.seconds);
  std::fflush(stdout);
  g_results.push_back(std::move(c));
}

void note(const std::string& message) {
  std::fprintf(stderr, "... %s\n", message.c_str());
  std::fflush(stderr);
}

std::string fmt(const char* f, ...) {
  va_list args;
  va_start(args, f);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Criterion 3: total_delay against an independent scalar-loop oracle.
// The oracle restates the objective directly from the rate and latency
// formulas, sharing no code with the library.

double oracle_total_delay(const McInstance& inst, const Allocation& alloc) {
  double total = 0.0;
  for (int i = 0; i < inst.n_users; ++i)
    for (int j = 0; j < inst.n_servers; ++j) {
      const double x = alloc.offload(i, j);
      if (x < 1e-12) continue;
      double interference = 0.0;
      for (int k = 0; k < inst.n_users; ++k)
        if (k != i) interference += alloc.power(k, j) * inst.channel_gain(k, j);
      const double sinr =
          alloc.power(i, j) * inst.channel_gain(i, j) / (interference + inst.noise_power);
      const double rate = inst.bandwidth * std::log2(1.0 + sinr);
      total += inst.task_size[i] * x / std::max(rate, 1e-6);
      total += x * inst.task_size[i] * inst.compute_factor / std::max(alloc.compute(i, j), 1e-6);
    }
  return total;
}

void criterion_objective_oracle() {
  const double t0 = now_seconds();
  Rng rng(300);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + int(rng.below(8));
    const int m = 1 + int(rng.below(4));
    const McInstance inst = generate_instance(n, m, 9000 + trial);
    const Allocation alloc = random_allocation(inst, 5000 + trial);
    const double got = total_delay(inst, alloc);
    const double want = oracle_total_delay(inst, alloc);
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  report(3, "objective-oracle", worst < 1e-9,
         fmt("max relative deviation %.2e over 100 feasible points (tol 1e-9)", worst), t0);
}

// ---------------------------------------------------------------------------
// Criterion 2: decoded allocations satisfy every constraint family.

void criterion_feasibility() {
  const double t0 = now_seconds();
  Rng rng(200);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + int(rng.below(20));
    const int m = 1 + int(rng.below(10));
    const McInstance inst = generate_instance(n, m, 20000 + trial);
    LinkWeights links;
    links.n_users = n;
    links.n_servers = m;
    links.user_links = Mat(n * m, 2);
    links.server_links = Mat(m, n);
    const double spread = (trial % 7 == 0) ? 40.0 : 6.0;  // occasional extreme logits
    for (double& v : links.user_links.v) v = spread * rng.normal();
    for (double& v : links.server_links.v) v = spread * rng.normal();
    std::vector<double> scale(n);
    for (double& v : scale) v = spread * rng.normal();
    const Allocation alloc = decode_allocation(links, scale, inst);
    worst = std::max(worst, check_feasibility(inst, alloc).max_violation());
  }
  report(2, "feasibility", worst <= 1e-6,
         fmt("max constraint violation %.2e over 1000 decoded pairs (tol 1e-6)", worst), t0);
}

// ---------------------------------------------------------------------------
// Criterion 9: permutation equivariance of encode_graph and the forward pass.

struct Permutation {
  std::vector<int> user;
  std::vector<int> server;
};

Permutation random_permutation(int n, int m, Rng& rng) {
  Permutation perm;
  perm.user.resize(n);
  perm.server.resize(m);
  for (int i = 0; i < n; ++i) perm.user[i] = i;
  for (int j = 0; j < m; ++j) perm.server[j] = j;
  for (int i = n - 1; i >= 1; --i) std::swap(perm.user[i], perm.user[rng.below(uint64_t(i) + 1)]);
  for (int j = m - 1; j >= 1; --j)
    std::swap(perm.server[j], perm.server[rng.below(uint64_t(j) + 1)]);
  return perm;
}

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

void criterion_equivariance() {
  const double t0 = now_seconds();
  const LognnModel model = init_model(901);
  Rng rng(900);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + int(rng.below(10));
    const int m = 1 + int(rng.below(6));
    const McInstance inst = generate_instance(n, m, 30000 + trial);
    const Permutation perm = random_permutation(n, m, rng);
    const McInstance permuted = permute_instance(inst, perm);

    // encode_graph equivariance: the permuted encoding must be the base
    // encoding with rows/columns relabeled.
    const ProblemGraph gb = encode_graph(inst);
    const ProblemGraph gp = encode_graph(permuted);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c)
        worst = std::max(worst,
                         std::abs(gp.node_features(i, c) - gb.node_features(perm.user[i], c)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        worst = std::max(worst, std::abs(gp.adjacency(i, gp.server_node(j)) -
                                         gb.adjacency(perm.user[i], gb.server_node(perm.server[j]))));

    auto params = watch_parameters(const_cast<LognnModel&>(model).parameters(), nullptr);
    const ModelLogits base = lognn_forward(model, params, gb);
    const ModelLogits moved = lognn_forward(model, params, gp);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        worst = std::max(worst, std::abs(moved.x_logits.value()(i, j) -
                                         base.x_logits.value()(perm.user[i], perm.server[j])));
        worst = std::max(worst, std::abs(moved.p_logits.value()(i, j) -
                                         base.p_logits.value()(perm.user[i], perm.server[j])));
        worst = std::max(worst, std::abs(moved.f_logits.value()(i, j) -
                                         base.f_logits.value()(perm.user[i], perm.server[j])));
      }
      worst = std::max(worst, std::abs(moved.scale_logits.value()(i, 0) -
                                       base.scale_logits.value()(perm.user[i], 0)));
    }
  }
  report(9, "equivariance", worst <= 1e-10,
         fmt("max deviation %.2e over 50 permuted cases (tol 1e-10)", worst), t0);
}

// ---------------------------------------------------------------------------
// Criterion 1: every parameter gradient against central finite differences.

void criterion_gradcheck() {
  const double t0 = now_seconds();
  double worst = 0.0;
  std::string worst_param;
  size_t checked = 0;
  for (uint64_t k = 0; k < 5; ++k) {
    LognnModel model = init_model(Rng::mix(1, 0x90d + k));
    const McInstance inst = generate_instance(4, 2, Rng::mix(1, k + 1));
    const GradcheckReport rep = gradcheck_model(model, inst, 1e-5);
    checked += rep.entries_checked;
    if (rep.max_rel_error > worst) {
      worst = rep.max_rel_error;
      worst_param = rep.worst_param;
    }
  }
  report(1, "gradient-correctness", worst < 1e-4,
         fmt("max relative error %.2e over %zu gradient entries, worst %s (tol 1e-4)", worst,
             checked, worst_param.c_str()),
         t0);
}

// ---------------------------------------------------------------------------
// Criterion 4: GA and an unsupervised-trained model against the analytic
// single-pair optimum.

void criterion_analytic_optimum() {
  const double t0 = now_seconds();

  double ga_worst_ratio = 0.0;
  for (uint64_t k = 0; k < 5; ++k) {
    const McInstance inst = generate_instance(1, 1, 40000 + k);
    GaConfig ga;
    ga.generations = 500;
    ga.seed = 41000 + k;
    const double got = ga_solve(inst, ga).best_delay;
    ga_worst_ratio = std::max(ga_worst_ratio, got / optimal_delay_single(inst) - 1.0);
  }
  const bool ga_ok = ga_worst_ratio <= 0.01;

  note("criterion 4: training a single-pair model");
  TrainConfig cfg;
  cfg.method = TrainMethod::kUnsupervised;
  cfg.epochs = 2000;
  cfg.batch_size = 32;
  cfg.n_train_samples = 128;
  cfg.held_out_samples = 16;
  cfg.lr = 1e-4;
  cfg.seed = 404;
  cfg.size_distribution = {{1, 1}};
  LognnModel model = init_model(cfg.seed);
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  const TrainLog log = train_unsupervised(model, data, cfg);

  double model_sum = 0.0, opt_sum = 0.0;
  for (uint64_t k = 0; k < 64; ++k) {
    const McInstance inst = generate_instance(1, 1, 42000 + k);
    model_sum += total_delay(inst, lognn_allocate(model, inst));
    opt_sum += optimal_delay_single(inst);
  }
  const double model_ratio = model_sum / opt_sum - 1.0;
  const bool model_ok = !log.aborted() && model_ratio <= 0.05;

  report(4, "analytic-optimum", ga_ok && model_ok,
         fmt("GA-500 excess %.2f%% (tol 1%%), trained model excess %.2f%% (tol 5%%)",
             100.0 * ga_worst_ratio, 100.0 * model_ratio),
         t0);
}

// ---------------------------------------------------------------------------
// Shared mixed-size training used by criteria 5, 7, and 8.

struct SharedTraining {
  LognnModel model;
  TrainLog log;
  TrainConfig config;
};

SharedTraining train_shared_model() {
  note("training the shared mixed-size model (criteria 5, 7, 8)");
  SharedTraining shared;
  shared.config.method = TrainMethod::kUnsupervised;
  shared.config.epochs = 500;
  shared.config.batch_size = 32;
  shared.config.n_train_samples = 256;
  shared.config.held_out_samples = 256;
  shared.config.lr = 1e-4;
  shared.config.seed = 7000;
  shared.config.size_distribution = TrainConfig::default_size_distribution();
  shared.model = init_model(shared.config.seed);
  const auto data = make_dataset(shared.config.n_train_samples, shared.config.size_distribution,
                                 shared.config.seed, shared.config.constants);
  shared.log = train_unsupervised(shared.model, data, shared.config);
  return shared;
}

// Criterion 7: convergence of the shared run.
void criterion_convergence(const SharedTraining& shared) {
  const double t0 = now_seconds();
  const auto& epochs = shared.log.epochs;
  if (shared.log.aborted() || epochs.size() != 500) {
    report(7, "convergence", false, "training aborted: " + shared.log.aborted_reason, t0);
    return;
  }
  auto window_mean = [&](size_t end, auto accessor) {
    double total = 0.0;
    for (size_t e = end - 10; e < end; ++e) total += accessor(epochs[e]);
    return total / 10.0;
  };
  const double first = epochs.front().train_objective;
  const double smoothed_final =
      window_mean(epochs.size(), [](const EpochRecord& r) { return r.train_objective; });
  const double smoothed_test =
      window_mean(epochs.size(), [](const EpochRecord& r) { return r.test_objective; });
  const bool halved = smoothed_final <= 0.5 * first;
  const double gap = std::abs(smoothed_test - smoothed_final) / smoothed_final;
  const bool tracks = gap <= 0.20;
  report(7, "convergence", halved && tracks,
         fmt("train %.3f -> %.3f (need <= %.3f), held-out gap %.1f%% (tol 20%%)", first,
             smoothed_final, 0.5 * first, 100.0 * gap),
         t0);
}

// Criterion 5: one model across sizes; at M=10 beats GA-100 and random by 30%.
void criterion_scalability(const SharedTraining& shared) {
  const double t0 = now_seconds();
  const std::string hash_before = content_hash_hex(model_to_json(shared.model).dump());

  SweepSpec spec;
  spec.server_counts = {2, 4, 8, 10};
  spec.instances_per_size = 64;
  spec.methods = {Method::kLognn, Method::kGa, Method::kRandom};
  spec.seed = 505;
  spec.ga.generations = 100;
  SweepArtifacts artifacts;
  artifacts.lognn = &shared.model;

  note("criterion 5: sweeping M in {2,4,8,10} with GA-100 and random");
  const SweepResult result = run_sweep(spec, artifacts);

  // The same model object, unmodified, at M=30 (N=60).
  SweepSpec big;
  big.server_counts = {30};
  big.instances_per_size = 64;
  big.methods = {Method::kLognn};
  big.seed = 505;
  const SweepResult result30 = run_sweep(big, artifacts);
  const std::string hash_after = content_hash_hex(model_to_json(shared.model).dump());

  int lognn_rows = 0;
  double lognn10 = 0.0, ga10 = 0.0, random10 = 0.0;
  bool all_finite = true;
  for (const SweepRow& row : result.rows) {
    if (row.method == "lognn") {
      ++lognn_rows;
      all_finite = all_finite && std::isfinite(row.mean_delay) && row.mean_delay > 0.0;
    }
    if (row.server_count == 10) {
      if (row.method == "lognn") lognn10 = row.mean_delay;
      if (row.method == "ga") ga10 = row.mean_delay;
      if (row.method == "random") random10 = row.mean_delay;
    }
  }
  const double lognn30 = result30.rows.front().mean_delay;
  const bool runs_everywhere = lognn_rows == 4 && all_finite && std::isfinite(lognn30) &&
                               lognn30 > 0.0 && hash_before == hash_after;
  const bool beats_ga = lognn10 < ga10;
  const bool beats_random = lognn10 <= 0.7 * random10;

  report(5, "scalability", runs_everywhere && beats_ga && beats_random,
         fmt("M=10 mean delay: lognn %.3f vs ga-100 %.3f, random %.3f (need < ga and <= %.3f); "
             "M=30 delay %.3f, model hash stable %s",
             lognn10, ga10, random10, 0.7 * random10, lognn30,
             hash_before == hash_after ? "yes" : "no"),
         t0);
}

// Criterion 8: inference-time dominance at M=10.
void criterion_inference_time(const SharedTraining& shared) {
  const double t0 = now_seconds();
  const McInstance inst = generate_instance(20, 10, 808);
  GaConfig ga;
  ga.generations = 100;
  ga.seed = 809;

  const double lognn_time =
      measure_inference([&] { lognn_allocate(shared.model, inst); }, 9);
  const double ga_time = measure_inference([&] { ga_solve(inst, ga); }, 5);
  const bool pass = lognn_time >= 0.0 && ga_time >= 10.0 * lognn_time;
  report(8, "inference-dominance", pass,
         fmt("median lognn %.4f ms vs ga-100 %.1f ms (need >= 10x)", 1e3 * lognn_time,
             1e3 * ga_time),
         t0);
}

// ---------------------------------------------------------------------------
// Criterion 6: per-epoch wall-clock ordering and held-out quality of the
// three training methods at a fixed size.

void criterion_training_methods() {
  const double t0 = now_seconds();
  TrainConfig base;
  base.batch_size = 32;
  base.n_train_samples = 256;
  base.held_out_samples = 128;
  base.epochs = 40;
  base.lr = 1e-4;
  base.seed = 606;
  base.ga_label_generations = 100;
  base.size_distribution = {{8, 4}};
  const auto data =
      make_dataset(base.n_train_samples, base.size_distribution, base.seed, base.constants);

  auto mean_epoch_seconds = [](const TrainLog& log) {
    double total = 0.0;
    for (const EpochRecord& r : log.epochs) total += r.seconds;
    return total / double(log.epochs.size());
  };

  note("criterion 6: unsupervised run");
  LognnModel unsup_model = init_model(base.seed);
  TrainConfig cfg = base;
  cfg.method = TrainMethod::kUnsupervised;
  const TrainLog unsup = train_unsupervised(unsup_model, data, cfg);

  note("criterion 6: actor-critic run");
  LognnModel ac_model = init_model(base.seed);
  cfg.method = TrainMethod::kActorCritic;
  const TrainLog ac = train_actor_critic(ac_model, data, cfg);

  note("criterion 6: supervised run (GA labels inside the epoch clock)");
  LognnModel sup_model = init_model(base.seed);
  cfg.method = TrainMethod::kSupervised;
  const TrainLog sup = train_supervised(sup_model, data, cfg);

  const double t_unsup = mean_epoch_seconds(unsup);
  const double t_ac = mean_epoch_seconds(ac);
  const double t_sup = mean_epoch_seconds(sup);
  const bool order_ok = t_unsup < t_ac && t_ac < t_sup && t_sup >= 20.0 * t_unsup;

  const double unsup_test = unsup.epochs.back().test_objective;
  const double sup_test = sup.epochs.back().test_objective;
  const bool quality_ok = !unsup.aborted() && !sup.aborted() && unsup_test <= sup_test;

  report(6, "training-method-ordering", order_ok && quality_ok,
         fmt("epoch seconds: unsup %.3f < ac %.3f < sup %.3f (sup/unsup %.0fx, need >= 20x); "
             "final held-out: unsup %.3f <= sup %.3f",
             t_unsup, t_ac, t_sup, t_sup / t_unsup, unsup_test, sup_test),
         t0);
}

}  // namespace

int main() {
  const double t0 = now_seconds();
  criterion_objective_oracle();
  criterion_feasibility();
  criterion_equivariance();
  criterion_gradcheck();
  criterion_analytic_optimum();

  const SharedTraining shared = train_shared_model();
  criterion_convergence(shared);
  criterion_scalability(shared);
  criterion_inference_time(shared);
  criterion_training_methods();

  std::sort(g_results.begin(), g_results.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int failed = 0;
  std::printf("\n=== acceptance summary (%.1f min) ===\n", (now_seconds() - t0) / 60.0);
  for (const Criterion& c : g_results) {
    std::printf("[%s] criterion %d: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str());
    if (!c.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", int(g_results.size()) - failed, g_results.size());
  return failed == 0 ? 0 : 1;
}
