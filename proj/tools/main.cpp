// Command-line driver: data generation, training, evaluation, scalability
// sweeps, inference timing, and gradient self-checks.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lognn/errors.hpp"
#include "lognn/gradcheck.hpp"
#include "lognn/io.hpp"
#include "lognn/rng.hpp"

namespace fs = std::filesystem;
using namespace lognn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<int64_t> seed_override;
  bool desk_scale = false;
  bool full_grid = false;
};

Json load_config(const CliOptions& opt) {
  if (opt.config_path.empty()) return Json::object();
  Json j = Json::parse(read_text_file(opt.config_path));
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return j;
}

// Rejects keys outside the allowlist so typos fail loudly.
void check_keys(const Json& section, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = section.begin(); it != section.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "' in section " + where);
}

Json section_of(const Json& config, const std::string& name) {
  static const std::set<std::string> kSections = {"constants", "gen_data", "train",  "eval",
                                                  "sweep",     "bench",    "gradcheck"};
  check_keys(config, kSections, "top level");
  if (!config.contains(name)) return Json::object();
  if (!config.at(name).is_object()) throw ConfigError("config section " + name + " must be an object");
  return config.at(name);
}

PhysicalConstants constants_of(const Json& config) {
  const Json c = section_of(config, "constants");
  check_keys(c, {"bandwidth", "noise_power", "compute_factor", "p_max"}, "constants");
  PhysicalConstants k;
  k.bandwidth = c.value("bandwidth", k.bandwidth);
  k.noise_power = c.value("noise_power", k.noise_power);
  k.compute_factor = c.value("compute_factor", k.compute_factor);
  k.p_max = c.value("p_max", k.p_max);
  if (k.bandwidth <= 0 || k.noise_power <= 0 || k.compute_factor <= 0 || k.p_max <= 0)
    throw ConfigError("constants must all be > 0");
  return k;
}

uint64_t seed_of(const Json& section, const CliOptions& opt, uint64_t fallback) {
  if (opt.seed_override) return uint64_t(*opt.seed_override);
  return section.value("seed", fallback);
}

std::vector<std::pair<int, int>> sizes_of(const Json& section) {
  if (!section.contains("sizes")) return TrainConfig::default_size_distribution();
  std::vector<std::pair<int, int>> sizes;
  for (const Json& pair : section.at("sizes")) {
    if (!pair.is_array() || pair.size() != 2) throw ConfigError("sizes entries must be [N, M]");
    sizes.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
  }
  if (sizes.empty()) throw ConfigError("sizes must be non-empty");
  return sizes;
}

fs::path ensure_out_dir(const CliOptions& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const Json& effective,
                    const Json& outputs) {
  Json manifest;
  manifest["subcommand"] = subcommand;
  manifest["config"] = effective;
  manifest["outputs"] = outputs;
  write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const Json& config, const CliOptions& opt) {
  const Json sec = section_of(config, "gen_data");
  check_keys(sec, {"n_samples", "sizes", "seed"}, "gen_data");
  const int n_samples = sec.value("n_samples", 2048);
  if (n_samples < 1) throw ConfigError("gen_data.n_samples must be >= 1");
  const uint64_t seed = seed_of(sec, opt, 1);
  const auto sizes = sizes_of(sec);
  const PhysicalConstants constants = constants_of(config);

  const fs::path dir = ensure_out_dir(opt);
  const fs::path data_dir = dir / "instances";
  fs::create_directories(data_dir);

  const auto dataset = make_dataset(n_samples, sizes, seed, constants);
  std::string all_bytes;
  for (int k = 0; k < n_samples; ++k) {
    const std::string body = instance_to_json(dataset[k]).dump();
    char name[32];
    std::snprintf(name, sizeof(name), "instance_%05d.json", k);
    write_text_file((data_dir / name).string(), body + "\n");
    all_bytes += body;
  }

  Json effective;
  effective["n_samples"] = n_samples;
  effective["seed"] = seed;
  Json outputs;
  outputs["dataset_hash"] = content_hash_hex(all_bytes);
  outputs["directory"] = data_dir.string();
  write_manifest(dir, "gen-data", effective, outputs);
  std::cout << "wrote " << n_samples << " instances to " << data_dir.string()
            << " (hash " << outputs["dataset_hash"].get<std::string>() << ")\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

std::vector<McInstance> load_dataset_dir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("dataset directory has no instance files: " + dir);
  std::vector<McInstance> data;
  data.reserve(files.size());
  for (const auto& f : files) data.push_back(instance_from_json(Json::parse(read_text_file(f.string()))));
  return data;
}

int cmd_train(const Json& config, const CliOptions& opt) {
  const Json sec = section_of(config, "train");
  check_keys(sec,
             {"method", "backbone", "epochs", "batch_size", "n_train_samples", "lr", "seed",
              "sizes", "held_out_samples", "ga_label_generations", "hidden_dim", "n_layers",
              "dataset_dir"},
             "train");

  TrainConfig cfg;
  cfg.method = train_method_from_string(sec.value("method", "unsupervised"));
  cfg.epochs = sec.value("epochs", cfg.epochs);
  cfg.batch_size = sec.value("batch_size", cfg.batch_size);
  cfg.n_train_samples = sec.value("n_train_samples", cfg.n_train_samples);
  cfg.lr = sec.value("lr", cfg.lr);
  cfg.seed = seed_of(sec, opt, 1);
  cfg.size_distribution = sizes_of(sec);
  cfg.held_out_samples = sec.value("held_out_samples", cfg.held_out_samples);
  cfg.ga_label_generations = sec.value("ga_label_generations", cfg.ga_label_generations);
  cfg.constants = constants_of(config);
  cfg.validate();

  const std::string backbone = sec.value("backbone", "lognn");
  const int hidden_dim = sec.value("hidden_dim", 64);
  const int n_layers = sec.value("n_layers", backbone == "lognn" ? 2 : 4);

  std::vector<McInstance> train_data;
  if (sec.contains("dataset_dir")) {
    train_data = load_dataset_dir(sec.at("dataset_dir").get<std::string>());
  } else {
    train_data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, cfg.constants);
  }
  std::string dataset_bytes;
  for (const McInstance& inst : train_data) dataset_bytes += instance_to_json(inst).dump();
  const std::string dataset_hash = content_hash_hex(dataset_bytes);

  Json effective;
  effective["method"] = to_string(cfg.method);
  effective["backbone"] = backbone;
  effective["epochs"] = cfg.epochs;
  effective["batch_size"] = cfg.batch_size;
  effective["n_train_samples"] = int(train_data.size());
  effective["lr"] = cfg.lr;
  effective["seed"] = cfg.seed;
  effective["held_out_samples"] = cfg.held_out_samples;
  effective["ga_label_generations"] = cfg.ga_label_generations;
  effective["hidden_dim"] = hidden_dim;
  effective["n_layers"] = n_layers;
  const std::string config_hash = content_hash_hex(effective.dump());

  auto run = [&](auto& model) {
    switch (cfg.method) {
      case TrainMethod::kUnsupervised: return train_unsupervised(model, train_data, cfg);
      case TrainMethod::kSupervised: return train_supervised(model, train_data, cfg);
      case TrainMethod::kActorCritic: return train_actor_critic(model, train_data, cfg);
    }
    throw ConfigError("train: bad method");
  };

  TrainLog log;
  Json model_json;
  if (backbone == "lognn") {
    LognnModel model = init_model(cfg.seed, hidden_dim, n_layers);
    log = run(model);
    model.train_config_hash = config_hash;
    model_json = model_to_json(model);
  } else if (backbone == "mlp") {
    if (cfg.size_distribution.size() != 1)
      throw ConfigError("train: mlp backbone requires a single [N, M] size");
    MlpModel model = init_mlp(cfg.seed, cfg.size_distribution[0].first,
                              cfg.size_distribution[0].second, hidden_dim, n_layers);
    log = run(model);
    model.train_config_hash = config_hash;
    model_json = model_to_json(model);
  } else {
    throw ConfigError("train: unknown backbone " + backbone);
  }

  const fs::path dir = ensure_out_dir(opt);
  const std::string model_bytes = model_json.dump();
  write_text_file((dir / "model.json").string(), model_bytes + "\n");
  write_text_file((dir / "train_log.csv").string(), train_log_csv(log));

  Json outputs;
  outputs["model_hash"] = content_hash_hex(model_bytes);
  outputs["dataset_hash"] = dataset_hash;
  outputs["train_config_hash"] = config_hash;
  outputs["epochs_completed"] = log.epochs.size();
  if (log.aborted()) outputs["aborted_reason"] = log.aborted_reason;
  write_manifest(dir, "train", effective, outputs);

  if (log.aborted()) {
    std::cerr << "training aborted: " << log.aborted_reason << "\n";
    return kExitNumeric;
  }
  std::cout << "trained " << backbone << " (" << to_string(cfg.method) << ", "
            << log.epochs.size() << " epochs), final train obj "
            << log.epochs.back().train_objective << ", model hash "
            << outputs["model_hash"].get<std::string>() << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- eval

int cmd_eval(const Json& config, const CliOptions& opt) {
  const Json sec = section_of(config, "eval");
  check_keys(sec, {"model", "n_users", "n_servers", "n_instances", "seed"}, "eval");
  if (!sec.contains("model")) throw ConfigError("eval.model path is required");
  const int n = sec.value("n_users", 8);
  const int m = sec.value("n_servers", 4);
  const int count = sec.value("n_instances", 64);
  if (n < 1 || m < 1 || count < 1) throw ConfigError("eval: sizes and count must be >= 1");
  const uint64_t seed = seed_of(sec, opt, 1);
  const PhysicalConstants constants = constants_of(config);

  const Json mj = Json::parse(read_text_file(sec.at("model").get<std::string>()));
  const std::string type = mj.at("type").get<std::string>();
  std::optional<LognnModel> gnn;
  std::optional<MlpModel> mlp;
  if (type == "lognn")
    gnn = lognn_from_json(mj);
  else
    mlp = mlp_from_json(mj);

  double total = 0.0;
  for (int k = 0; k < count; ++k) {
    const McInstance inst =
        generate_instance(n, m, Rng::mix(seed, uint64_t(k) + 1), constants);
    const Allocation alloc = gnn ? lognn_allocate(*gnn, inst)
                                 : mlp_forward(*mlp, inst, MlpMode::kDirectInference);
    total += total_delay(inst, alloc);
  }
  std::cout << "mean delay over " << count << " instances at N=" << n << " M=" << m << ": "
            << total / count << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- sweep

SweepArtifacts load_artifacts(const Json& sec, LognnModel& lognn_storage, MlpModel& di_storage,
                              bool& has_lognn, bool& has_di) {
  SweepArtifacts artifacts;
  if (sec.contains("lognn_model")) {
    lognn_storage = lognn_from_json(Json::parse(read_text_file(sec.at("lognn_model").get<std::string>())));
    artifacts.lognn = &lognn_storage;
    has_lognn = true;
  }
  if (sec.contains("mlp_di_model")) {
    di_storage = mlp_from_json(Json::parse(read_text_file(sec.at("mlp_di_model").get<std::string>())));
    artifacts.mlp_di = &di_storage;
    has_di = true;
  }
  if (sec.contains("mlp_tr_models")) {
    for (auto it = sec.at("mlp_tr_models").begin(); it != sec.at("mlp_tr_models").end(); ++it)
      artifacts.mlp_tr.emplace(std::stoi(it.key()),
                               mlp_from_json(Json::parse(read_text_file(it.value().get<std::string>()))));
  }
  return artifacts;
}

int cmd_sweep(const Json& config, const CliOptions& opt) {
  const Json sec = section_of(config, "sweep");
  check_keys(sec,
             {"server_counts", "instances_per_size", "methods", "seed", "ga_generations",
              "lognn_model", "mlp_di_model", "mlp_tr_models"},
             "sweep");

  SweepSpec spec;
  if (sec.contains("server_counts"))
    spec.server_counts = sec.at("server_counts").get<std::vector<int>>();
  else
    spec.server_counts = opt.full_grid ? SweepSpec::full_grid() : SweepSpec::desk_grid();
  spec.instances_per_size = sec.value("instances_per_size", spec.instances_per_size);
  spec.seed = seed_of(sec, opt, 1);
  spec.ga.generations = sec.value("ga_generations", opt.desk_scale ? 100 : spec.ga.generations);
  spec.constants = constants_of(config);
  if (sec.contains("methods")) {
    spec.methods.clear();
    for (const Json& name : sec.at("methods"))
      spec.methods.push_back(method_from_string(name.get<std::string>()));
  }

  LognnModel lognn_storage;
  MlpModel di_storage;
  bool has_lognn = false, has_di = false;
  SweepArtifacts artifacts = load_artifacts(sec, lognn_storage, di_storage, has_lognn, has_di);

  const SweepResult result = run_sweep(spec, artifacts);
  const fs::path dir = ensure_out_dir(opt);
  const std::string csv = sweep_csv(result);
  write_text_file((dir / "sweep.csv").string(), csv);

  Json effective;
  effective["server_counts"] = spec.server_counts;
  effective["instances_per_size"] = spec.instances_per_size;
  effective["seed"] = spec.seed;
  effective["ga_generations"] = spec.ga.generations;
  Json outputs;
  outputs["sweep_hash"] = content_hash_hex(csv);
  if (has_lognn) outputs["lognn_model_hash"] = content_hash_hex(model_to_json(lognn_storage).dump());
  write_manifest(dir, "sweep", effective, outputs);

  std::printf("%-8s %4s %4s %14s %16s\n", "method", "M", "N", "mean_delay", "mean_infer_sec");
  for (const SweepRow& r : result.rows)
    std::printf("%-8s %4d %4d %14.4f %16.6f\n", r.method.c_str(), r.server_count, r.user_count,
                r.mean_delay, r.mean_inference_seconds);
  return kExitOk;
}

// ------------------------------------------------------------------- bench

int cmd_bench(const Json& config, const CliOptions& opt) {
  const Json sec = section_of(config, "bench");
  check_keys(sec,
             {"methods", "server_count", "repetitions", "seed", "ga_generations", "lognn_model",
              "mlp_di_model", "mlp_tr_models"},
             "bench");
  const int m = sec.value("server_count", 10);
  const int n = 2 * m;
  const int reps = sec.value("repetitions", 5);
  const uint64_t seed = seed_of(sec, opt, 1);
  const PhysicalConstants constants = constants_of(config);
  const McInstance inst = generate_instance(n, m, Rng::mix(seed, 0xbeec), constants);

  LognnModel lognn_storage;
  MlpModel di_storage;
  bool has_lognn = false, has_di = false;
  SweepArtifacts artifacts = load_artifacts(sec, lognn_storage, di_storage, has_lognn, has_di);

  std::vector<Method> methods = {Method::kLognn, Method::kGa, Method::kRandom};
  if (sec.contains("methods")) {
    methods.clear();
    for (const Json& name : sec.at("methods")) methods.push_back(method_from_string(name.get<std::string>()));
  }

  GaConfig ga;
  ga.generations = sec.value("ga_generations", 100);
  ga.seed = Rng::mix(seed, 0x9a);

  std::string csv = "method,M,N,seed,median_inference_seconds\n";
  for (Method method : methods) {
    std::function<void()> solve;
    switch (method) {
      case Method::kLognn:
        if (!has_lognn) throw ConfigError("bench: method lognn requires lognn_model");
        solve = [&] { lognn_allocate(*artifacts.lognn, inst); };
        break;
      case Method::kMlpDi:
        if (!has_di) throw ConfigError("bench: method mlp_di requires mlp_di_model");
        solve = [&] { mlp_forward(*artifacts.mlp_di, inst, MlpMode::kDirectInference); };
        break;
      case Method::kMlpTr:
        if (!artifacts.mlp_tr.count(m)) throw ConfigError("bench: method mlp_tr missing model");
        solve = [&] { mlp_forward(artifacts.mlp_tr.at(m), inst, MlpMode::kExact); };
        break;
      case Method::kGa:
        solve = [&] { ga_solve(inst, ga); };
        break;
      case Method::kRandom:
        solve = [&] { random_allocation(inst, Rng::mix(seed, 0x4a)); };
        break;
    }
    const double t = measure_inference(solve, reps);
    csv += to_string(method) + "," + std::to_string(m) + "," + std::to_string(n) + "," +
           std::to_string(seed) + "," + std::to_string(t) + "\n";
    std::printf("%-8s median over %d reps: %.6f s\n", to_string(method).c_str(), reps, t);
  }
  const fs::path dir = ensure_out_dir(opt);
  write_text_file((dir / "bench.csv").string(), csv);
  write_manifest(dir, "bench", Json{{"server_count", m}, {"repetitions", reps}, {"seed", seed}},
                 Json{{"bench_hash", content_hash_hex(csv)}});
  return kExitOk;
}

// --------------------------------------------------------------- gradcheck

int cmd_gradcheck(const Json& config, const CliOptions& opt) {
  const Json sec = section_of(config, "gradcheck");
  check_keys(sec,
             {"instances", "n_users", "n_servers", "step", "tolerance", "seed", "hidden_dim",
              "n_layers"},
             "gradcheck");
  const int count = sec.value("instances", 5);
  const int n = sec.value("n_users", 4);
  const int m = sec.value("n_servers", 2);
  const double step = sec.value("step", 1e-5);
  const double tol = sec.value("tolerance", 1e-4);
  const int hidden_dim = sec.value("hidden_dim", 64);
  const int n_layers = sec.value("n_layers", 2);
  if (count < 1 || n < 1 || m < 1) throw ConfigError("gradcheck: counts must be >= 1");
  const uint64_t seed = seed_of(sec, opt, 1);
  const PhysicalConstants constants = constants_of(config);

  double worst = 0.0;
  std::string worst_param;
  for (int k = 0; k < count; ++k) {
    LognnModel model = init_model(Rng::mix(seed, 0x90d + uint64_t(k)), hidden_dim, n_layers);
    const McInstance inst = generate_instance(n, m, Rng::mix(seed, uint64_t(k) + 1), constants);
    const GradcheckReport report = gradcheck_model(model, inst, step);
    std::printf("instance %d: max rel error %.3e over %zu entries (%s)\n", k,
                report.max_rel_error, report.entries_checked, report.worst_param.c_str());
    if (report.max_rel_error > worst) {
      worst = report.max_rel_error;
      worst_param = report.worst_param;
    }
  }
  std::printf("gradcheck max relative error: %.6e (tolerance %.1e)\n", worst, tol);
  if (worst >= tol) {
    std::printf("FAIL: worst parameter %s\n", worst_param.c_str());
    return kExitNumeric;
  }
  std::printf("PASS\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-output GNN toolkit for MEC task offloading and resource allocation"};
  app.require_subcommand(1);

  CliOptions opt;
  auto* gen = app.add_subcommand("gen-data", "generate instance files");
  auto* train = app.add_subcommand("train", "train a model");
  auto* eval = app.add_subcommand("eval", "evaluate a model file");
  auto* sweep = app.add_subcommand("sweep", "scalability sweep");
  auto* bench = app.add_subcommand("bench", "inference timing");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");

  for (CLI::App* sub : {gen, train, eval, sweep, bench, gradcheck}) {
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed_override, "seed override");
    sub->add_flag("--desk-scale", opt.desk_scale, "desk-scale grids and budgets");
    sub->add_flag("--full", opt.full_grid, "full-scale sweep grid up to M=30");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const Json config = load_config(opt);
    if (gen->parsed()) return cmd_gen_data(config, opt);
    if (train->parsed()) return cmd_train(config, opt);
    if (eval->parsed()) return cmd_eval(config, opt);
    if (sweep->parsed()) return cmd_sweep(config, opt);
    if (bench->parsed()) return cmd_bench(config, opt);
    if (gradcheck->parsed()) return cmd_gradcheck(config, opt);
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
