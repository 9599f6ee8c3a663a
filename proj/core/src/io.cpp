#include "lognn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lognn/errors.hpp"

namespace lognn {

namespace {

Json mat_rows_to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows; ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_rows_from_json(const Json& j) {
  const int rows = int(j.size());
  if (rows == 0) throw ConfigError("matrix JSON has no rows");
  const int cols = int(j.at(0).size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (int(j.at(i).size()) != cols) throw ConfigError("ragged matrix JSON");
    for (int c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

Json named_params_json(std::vector<std::pair<std::string, Mat*>> params) {
  Json arr = Json::array();
  for (auto& [name, mat] : params) {
    Json entry;
    entry["name"] = name;
    entry["shape"] = {mat->rows, mat->cols};
    entry["data"] = mat->v;
    arr.push_back(std::move(entry));
  }
  return arr;
}

void load_named_params(const Json& arr, std::vector<std::pair<std::string, Mat*>> params) {
  if (arr.size() != params.size()) throw ConfigError("model JSON: parameter count mismatch");
  size_t k = 0;
  for (auto& [name, mat] : params) {
    const Json& entry = arr.at(k++);
    if (entry.at("name").get<std::string>() != name)
      throw ConfigError("model JSON: unexpected parameter " +
                        entry.at("name").get<std::string>() + ", wanted " + name);
    const auto shape = entry.at("shape").get<std::vector<int>>();
    if (shape.size() != 2 || shape[0] != mat->rows || shape[1] != mat->cols)
      throw ConfigError("model JSON: shape mismatch for " + name);
    const auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != mat->size()) throw ConfigError("model JSON: data size mismatch for " + name);
    mat->v = data;
  }
}

}  // namespace

Json instance_to_json(const McInstance& inst) {
  Json j;
  j["n_users"] = inst.n_users;
  j["n_servers"] = inst.n_servers;
  j["task_size"] = inst.task_size;
  j["server_compute"] = inst.server_compute;
  j["channel_gain"] = mat_rows_to_json(inst.channel_gain);
  j["bandwidth"] = inst.bandwidth;
  j["noise_power"] = inst.noise_power;
  j["compute_factor"] = inst.compute_factor;
  j["p_max"] = inst.p_max;
  j["seed"] = inst.seed;
  return j;
}

McInstance instance_from_json(const Json& j) {
  McInstance inst;
  inst.n_users = j.at("n_users").get<int>();
  inst.n_servers = j.at("n_servers").get<int>();
  inst.task_size = j.at("task_size").get<std::vector<double>>();
  inst.server_compute = j.at("server_compute").get<std::vector<double>>();
  inst.channel_gain = mat_rows_from_json(j.at("channel_gain"));
  inst.bandwidth = j.at("bandwidth").get<double>();
  inst.noise_power = j.at("noise_power").get<double>();
  inst.compute_factor = j.at("compute_factor").get<double>();
  inst.p_max = j.at("p_max").get<double>();
  inst.seed = j.at("seed").get<uint64_t>();
  if (int(inst.task_size.size()) != inst.n_users ||
      int(inst.server_compute.size()) != inst.n_servers ||
      inst.channel_gain.rows != inst.n_users || inst.channel_gain.cols != inst.n_servers)
    throw ConfigError("instance JSON: inconsistent shapes");
  return inst;
}

Json allocation_to_json(const Allocation& alloc) {
  Json j;
  j["offload"] = mat_rows_to_json(alloc.offload);
  j["power"] = mat_rows_to_json(alloc.power);
  j["compute"] = mat_rows_to_json(alloc.compute);
  return j;
}

Allocation allocation_from_json(const Json& j) {
  Allocation alloc;
  alloc.offload = mat_rows_from_json(j.at("offload"));
  alloc.power = mat_rows_from_json(j.at("power"));
  alloc.compute = mat_rows_from_json(j.at("compute"));
  return alloc;
}

Json model_to_json(const LognnModel& model) {
  Json j;
  j["type"] = "lognn";
  j["hidden_dim"] = model.hidden_dim;
  j["n_layers"] = model.n_layers;
  j["seed"] = model.seed;
  j["train_config_hash"] = model.train_config_hash;
  j["params"] = named_params_json(const_cast<LognnModel&>(model).named_parameters());
  return j;
}

LognnModel lognn_from_json(const Json& j) {
  if (j.at("type").get<std::string>() != "lognn")
    throw ConfigError("model JSON: expected type lognn");
  LognnModel model = init_model(j.at("seed").get<uint64_t>(), j.at("hidden_dim").get<int>(),
                                j.at("n_layers").get<int>());
  model.train_config_hash = j.value("train_config_hash", std::string());
  load_named_params(j.at("params"), model.named_parameters());
  return model;
}

Json model_to_json(const MlpModel& model) {
  Json j;
  j["type"] = "mlp";
  j["n_users"] = model.n0;
  j["n_servers"] = model.m0;
  j["hidden_dim"] = model.hidden_dim;
  j["n_layers"] = model.n_layers;
  j["seed"] = model.seed;
  j["train_config_hash"] = model.train_config_hash;
  j["params"] = named_params_json(const_cast<MlpModel&>(model).named_parameters());
  return j;
}

MlpModel mlp_from_json(const Json& j) {
  if (j.at("type").get<std::string>() != "mlp") throw ConfigError("model JSON: expected type mlp");
  MlpModel model =
      init_mlp(j.at("seed").get<uint64_t>(), j.at("n_users").get<int>(),
               j.at("n_servers").get<int>(), j.at("hidden_dim").get<int>(),
               j.at("n_layers").get<int>());
  model.train_config_hash = j.value("train_config_hash", std::string());
  load_named_params(j.at("params"), model.named_parameters());
  return model;
}

std::string train_log_csv(const TrainLog& log) {
  std::ostringstream out;
  out << "epoch,train_obj,test_obj,seconds\n";
  out.precision(17);
  for (size_t e = 0; e < log.epochs.size(); ++e) {
    const EpochRecord& r = log.epochs[e];
    out << (e + 1) << ',' << r.train_objective << ',' << r.test_objective << ',' << r.seconds
        << '\n';
  }
  return out.str();
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "method,M,N,seed,mean_delay,mean_inference_seconds,mean_delay_plus_inference\n";
  out.precision(17);
  for (const SweepRow& r : result.rows)
    out << r.method << ',' << r.server_count << ',' << r.user_count << ',' << r.seed << ','
        << r.mean_delay << ',' << r.mean_inference_seconds << ',' << r.mean_delay_plus_inference
        << '\n';
  return out.str();
}

std::string content_hash_hex(const std::string& bytes) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace lognn
