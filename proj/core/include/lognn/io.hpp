#pragma once

#include <string>

#include <json.hpp>

#include "lognn/harness.hpp"

namespace lognn {

using Json = nlohmann::json;

Json instance_to_json(const McInstance& inst);
McInstance instance_from_json(const Json& j);

Json allocation_to_json(const Allocation& alloc);
Allocation allocation_from_json(const Json& j);

// Models serialize as a named-tensor list plus metadata, so a file can be
// hashed and reloaded bit-exactly.
Json model_to_json(const LognnModel& model);
LognnModel lognn_from_json(const Json& j);
Json model_to_json(const MlpModel& model);
MlpModel mlp_from_json(const Json& j);

// epoch,train_obj,test_obj,seconds
std::string train_log_csv(const TrainLog& log);
// method,M,N,seed,mean_delay,mean_inference_seconds,mean_delay_plus_inference
std::string sweep_csv(const SweepResult& result);

// FNV-1a 64-bit over the bytes, hex-encoded. Used for run manifests and the
// single-model-across-sizes assertion.
std::string content_hash_hex(const std::string& bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace lognn
