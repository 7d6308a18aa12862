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

#include "fermr/config.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fermr {

void TrainConfig::validate() const {
  if (optimizer != "adam") {
    throw std::invalid_argument("TrainConfig: unsupported optimizer '" + optimizer + "'");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(selection_fraction > 0.0) || selection_fraction > 1.0) {
    throw std::invalid_argument("TrainConfig: selection_fraction outside (0,1]");
  }
  if (checkpoint_every < 1) throw std::invalid_argument("TrainConfig: checkpoint_every must be >= 1");
  if (freeze_stages < 0) throw std::invalid_argument("TrainConfig: freeze_stages must be >= 0");
  augment.validate();
  model.validate();
}

namespace {

std::array<double, 3> triple(const toml::Table& t, const std::string& key,
                             const std::array<double, 3>& fallback) {
  const auto v = t.get_double_array(key, {fallback[0], fallback[1], fallback[2]});
  if (v.size() != 3) throw std::runtime_error("config: '" + key + "' must have 3 elements");
  return {v[0], v[1], v[2]};
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainConfig train_config_from_toml(const toml::Table& t) {
  TrainConfig c;
  c.optimizer = t.get_string("optimizer", c.optimizer);
  c.learning_rate = t.get_double("learning_rate", c.learning_rate);
  c.batch_size = static_cast<int>(t.get_int("batch_size", c.batch_size));
  c.epochs = static_cast<int>(t.get_int("epochs", c.epochs));
  c.weight_scheme =
      weight_scheme_from_name(t.get_string("weight_scheme", std::string(weight_scheme_name(c.weight_scheme))));
  c.seed = static_cast<std::uint64_t>(t.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.selection_fraction = t.get_double("selection_fraction", c.selection_fraction);
  c.checkpoint_every = static_cast<int>(t.get_int("checkpoint_every", c.checkpoint_every));
  c.adam_beta1 = t.get_double("adam_beta1", c.adam_beta1);
  c.adam_beta2 = t.get_double("adam_beta2", c.adam_beta2);
  c.adam_eps = t.get_double("adam_eps", c.adam_eps);
  c.freeze_stages = static_cast<int>(t.get_int("freeze_stages", c.freeze_stages));

  auto& a = c.augment;
  a.resize_shorter_side =
      static_cast<int>(t.get_int("augment.resize_shorter_side", a.resize_shorter_side));
  a.crop_size = static_cast<int>(t.get_int("augment.crop_size", a.crop_size));
  a.grayscale_probability = t.get_double("augment.grayscale_probability", a.grayscale_probability);
  a.channel_mean = triple(t, "augment.channel_mean", a.channel_mean);
  a.channel_std = triple(t, "augment.channel_std", a.channel_std);
  const auto interp = t.get_string("augment.interpolation", "bilinear");
  if (interp != "bilinear") {
    throw std::runtime_error("config: unsupported interpolation '" + interp + "'");
  }
  a.resolution_policy.apply_probability =
      t.get_double("augment.resolution_policy.apply_probability",
                   a.resolution_policy.apply_probability);
  a.resolution_policy.min_resolution = static_cast<int>(
      t.get_int("augment.resolution_policy.min_resolution", a.resolution_policy.min_resolution));
  a.resolution_policy.max_resolution = static_cast<int>(
      t.get_int("augment.resolution_policy.max_resolution", a.resolution_policy.max_resolution));

  auto& m = c.model;
  m.depth = depth_from_name(t.get_string("model.depth", std::string(depth_name(m.depth))));
  m.se_reduction = static_cast<int>(t.get_int("model.se_reduction", m.se_reduction));
  m.num_classes = static_cast<int>(t.get_int("model.num_classes", m.num_classes));
  m.use_se = t.get_bool("model.use_se", m.use_se);
  const auto pretrained = t.get_string("model.pretrained_weights", "");
  if (!pretrained.empty()) m.pretrained_weights_path = pretrained;

  c.validate();
  return c;
}

DataPaths data_paths_from_toml(const toml::Table& t) {
  DataPaths p;
  p.annotation_dir = t.get_string("data.annotation_dir", "");
  p.image_root = t.get_string("data.image_root", "");
  return p;
}

std::string to_toml(const TrainConfig& c) {
  std::ostringstream out;
  out << "optimizer = \"" << c.optimizer << "\"\n";
  out << "learning_rate = " << fmt_double(c.learning_rate) << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "epochs = " << c.epochs << "\n";
  out << "weight_scheme = \"" << weight_scheme_name(c.weight_scheme) << "\"\n";
  out << "seed = " << c.seed << "\n";
  out << "selection_fraction = " << fmt_double(c.selection_fraction) << "\n";
  out << "checkpoint_every = " << c.checkpoint_every << "\n";
  out << "adam_beta1 = " << fmt_double(c.adam_beta1) << "\n";
  out << "adam_beta2 = " << fmt_double(c.adam_beta2) << "\n";
  out << "adam_eps = " << fmt_double(c.adam_eps) << "\n";
  out << "freeze_stages = " << c.freeze_stages << "\n";
  out << "\n[augment]\n";
  out << "resize_shorter_side = " << c.augment.resize_shorter_side << "\n";
  out << "crop_size = " << c.augment.crop_size << "\n";
  out << "grayscale_probability = " << fmt_double(c.augment.grayscale_probability) << "\n";
  out << "channel_mean = [" << fmt_double(c.augment.channel_mean[0]) << ", "
      << fmt_double(c.augment.channel_mean[1]) << ", " << fmt_double(c.augment.channel_mean[2])
      << "]\n";
  out << "channel_std = [" << fmt_double(c.augment.channel_std[0]) << ", "
      << fmt_double(c.augment.channel_std[1]) << ", " << fmt_double(c.augment.channel_std[2])
      << "]\n";
  out << "interpolation = \"bilinear\"\n";
  out << "\n[augment.resolution_policy]\n";
  out << "apply_probability = " << fmt_double(c.augment.resolution_policy.apply_probability)
      << "\n";
  out << "min_resolution = " << c.augment.resolution_policy.min_resolution << "\n";
  out << "max_resolution = " << c.augment.resolution_policy.max_resolution << "\n";
  out << "\n[model]\n";
  out << "depth = \"" << depth_name(c.model.depth) << "\"\n";
  out << "se_reduction = " << c.model.se_reduction << "\n";
  out << "num_classes = " << c.model.num_classes << "\n";
  out << "use_se = " << (c.model.use_se ? "true" : "false") << "\n";
  if (c.model.pretrained_weights_path) {
    out << "pretrained_weights = \"" << c.model.pretrained_weights_path->string() << "\"\n";
  }
  return out.str();
}

std::string config_digest(const TrainConfig& config) {
  const std::string text = to_toml(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace fermr
