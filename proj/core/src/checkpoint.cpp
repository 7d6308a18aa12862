// Copyright 2026 the fermr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fermr/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fermr/config.hpp"
#include "fermr/formats.hpp"

namespace fermr {

namespace fs = std::filesystem;
using nlohmann::json;

NamedTensors named_tensors(nn::SEResNet<float>& model) {
  NamedTensors out;
  for (auto* p : model.parameters()) out.emplace_back(p->name, &p->value);
  for (auto* b : model.buffers()) out.emplace_back(b->name, &b->value);
  return out;
}

void write_weights_dir(const fs::path& dir, const NamedTensors& tensors) {
  fs::create_directories(dir);
  std::ofstream bin(dir / "weights.bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + (dir / "weights.bin").string());

  json manifest;
  manifest["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : tensors) {
    const auto nbytes = static_cast<std::uint64_t>(tensor->numel()) * sizeof(float);
    bin.write(reinterpret_cast<const char*>(tensor->data()),
              static_cast<std::streamsize>(nbytes));
    json entry;
    entry["name"] = name;
    entry["shape"] = tensor->shape();
    entry["dtype"] = "f32";
    entry["byte_offset"] = offset;
    entry["byte_size"] = nbytes;
    manifest["tensors"].push_back(std::move(entry));
    offset += nbytes;
  }
  manifest["total_bytes"] = offset;
  if (!bin) throw std::runtime_error("short write to " + (dir / "weights.bin").string());
  bin.close();

  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  mf << manifest.dump(2) << "\n";
}

std::vector<TensorEntry> read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
  json j;
  in >> j;
  std::vector<TensorEntry> entries;
  for (const auto& item : j.at("tensors")) {
    TensorEntry e;
    e.name = item.at("name").get<std::string>();
    e.shape = item.at("shape").get<std::vector<std::int64_t>>();
    e.dtype = item.at("dtype").get<std::string>();
    e.byte_offset = item.at("byte_offset").get<std::uint64_t>();
    e.byte_size = item.at("byte_size").get<std::uint64_t>();
    entries.push_back(std::move(e));
  }
  return entries;
}

Tensor<float> read_tensor(const fs::path& dir, const TensorEntry& entry) {
  if (entry.dtype != "f32") {
    throw std::runtime_error("tensor '" + entry.name + "': unsupported dtype " + entry.dtype);
  }
  Tensor<float> t(entry.shape);
  if (static_cast<std::uint64_t>(t.numel()) * sizeof(float) != entry.byte_size) {
    throw std::runtime_error("tensor '" + entry.name + "': byte_size does not match shape");
  }
  std::ifstream bin(dir / "weights.bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + (dir / "weights.bin").string());
  bin.seekg(static_cast<std::streamoff>(entry.byte_offset));
  bin.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(entry.byte_size));
  if (bin.gcount() != static_cast<std::streamsize>(entry.byte_size)) {
    throw std::runtime_error("truncated weights.bin while reading tensor '" + entry.name + "'");
  }
  return t;
}

std::string LoadReport::summary() const {
  if (from_scratch) return "from scratch (no pretrained weights)";
  std::ostringstream out;
  out << loaded.size() << " tensors loaded, " << reinitialized.size() << " reinitialized, "
      << skipped.size() << " skipped";
  return out.str();
}

LoadReport load_pretrained(nn::SEResNet<float>& model, const fs::path& weights_dir,
                           bool strict_head) {
  LoadReport report;
  const auto entries = read_manifest(weights_dir);

  std::map<std::string, const TensorEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;

  std::vector<std::string> used;
  for (auto& [name, tensor] : named_tensors(model)) {
    const bool is_head = name.rfind("fc.", 0) == 0;
    if (is_head && !strict_head) {
      report.reinitialized.push_back(name);
      continue;
    }
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::runtime_error("pretrained weights: missing tensor '" + name + "'");
    }
    const TensorEntry& entry = *it->second;
    if (entry.shape != tensor->shape()) {
      std::ostringstream msg;
      msg << "pretrained weights: shape mismatch for '" << name << "' (file";
      for (auto d : entry.shape) msg << " " << d;
      msg << ", model";
      for (auto d : tensor->shape()) msg << " " << d;
      msg << ")";
      throw std::runtime_error(msg.str());
    }
    Tensor<float> loaded = read_tensor(weights_dir, entry);
    std::memcpy(const_cast<float*>(tensor->data()), loaded.data(),
                static_cast<std::size_t>(loaded.numel()) * sizeof(float));
    report.loaded.push_back(name);
    used.push_back(name);
  }

  std::sort(used.begin(), used.end());
  for (const auto& e : entries) {
    if (!std::binary_search(used.begin(), used.end(), e.name)) report.skipped.push_back(e.name);
  }
  return report;
}

namespace {

json metadata_to_json(const CheckpointMetadata& meta) {
  json j;
  j["epoch"] = meta.epoch;
  j["seed"] = meta.seed;
  j["config_digest"] = meta.config_digest;
  j["config_toml"] = meta.config_toml;
  if (meta.selection_metrics) {
    j["selection_metrics"] = json::parse(metrics_report_to_json(*meta.selection_metrics));
  } else {
    j["selection_metrics"] = nullptr;
  }
  return j;
}

CheckpointMetadata metadata_from_json(const json& j) {
  CheckpointMetadata meta;
  meta.epoch = j.at("epoch").get<int>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.config_digest = j.at("config_digest").get<std::string>();
  meta.config_toml = j.at("config_toml").get<std::string>();
  if (!j.at("selection_metrics").is_null()) {
    meta.selection_metrics = metrics_report_from_json(j.at("selection_metrics").dump());
  }
  return meta;
}

}  // namespace

void save_checkpoint(const fs::path& dir, nn::SEResNet<float>& model,
                     const CheckpointMetadata& meta) {
  write_weights_dir(dir, named_tensors(model));
  std::ofstream out(dir / "metadata.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "metadata.json").string());
  out << metadata_to_json(meta).dump(2) << "\n";
}

CheckpointMetadata read_checkpoint_metadata(const fs::path& dir) {
  std::ifstream in(dir / "metadata.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "metadata.json").string());
  json j;
  in >> j;
  return metadata_from_json(j);
}

void load_checkpoint_weights(nn::SEResNet<float>& model, const fs::path& dir) {
  const auto entries = read_manifest(dir);
  std::map<std::string, const TensorEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;

  for (auto& [name, tensor] : named_tensors(model)) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
    }
    if (it->second->shape != tensor->shape()) {
      throw std::runtime_error("checkpoint: shape mismatch for tensor '" + name + "'");
    }
    Tensor<float> loaded = read_tensor(dir, *it->second);
    std::memcpy(const_cast<float*>(tensor->data()), loaded.data(),
                static_cast<std::size_t>(loaded.numel()) * sizeof(float));
  }
}

std::pair<std::unique_ptr<nn::SEResNet<float>>, CheckpointMetadata> load_checkpoint(
    const fs::path& dir, const std::optional<std::string>& expected_config_digest, bool force) {
  CheckpointMetadata meta = read_checkpoint_metadata(dir);
  if (expected_config_digest && *expected_config_digest != meta.config_digest) {
    const std::string msg = "checkpoint " + dir.string() + ": config digest mismatch (expected " +
                            *expected_config_digest + ", stored " + meta.config_digest + ")";
    if (!force) throw std::runtime_error(msg + "; pass --force to load anyway");
    std::cerr << "warning: " << msg << "\n";
  }
  const TrainConfig config = train_config_from_toml(toml::parse(meta.config_toml));
  auto model = build_model<float>(config.model, meta.seed);
  load_checkpoint_weights(*model, dir);
  return {std::move(model), std::move(meta)};
}

}  // namespace fermr
