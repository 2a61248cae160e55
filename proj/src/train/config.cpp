// Copyright 2026 The hivae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "train/config.hpp"

#include <cmath>
#include <cstdio>

#include "common/errors.hpp"

namespace hivae {

using nlohmann::json;

std::string to_string(EncoderKind k) { return k == EncoderKind::kGcn ? "gcn" : "mlp"; }
std::string to_string(DecoderKind k) { return k == DecoderKind::kInnerProduct ? "inner_product" : "mlp"; }
std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::kCoattention: return "coattention";
    case FusionMode::kMeanpoolConcat: return "meanpool_concat";
    case FusionMode::kSeparateAttentions: return "separate_attentions";
  }
  return "?";
}

std::string to_string(BatchScaling s) { return s == BatchScaling::kSum ? "sum" : "batch_mean"; }

namespace {

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

json Config::to_json() const {
  json j;
  j["encoder"] = to_string(encoder);
  j["decoder"] = to_string(decoder);
  j["embed_dim"] = embed_dim;
  j["hidden_dims"] = hidden_dims;
  j["activation"] = to_string(activation);
  j["beta"] = beta;
  j["nonedge_exact_max_users"] = nonedge_exact_max_users;
  j["nonedge_samples_per_user"] = nonedge_samples_per_user;
  j["lambda_s"] = lambda_s;
  j["lambda_r"] = lambda_r;
  j["lambda_p"] = lambda_p;
  j["eta"] = eta ? json(*eta) : json("balanced");
  j["fusion"] = to_string(fusion);
  j["tie_sender_receiver"] = tie_sender_receiver;
  j["init_scale"] = init_scale;
  j["negative_cap"] = negative_cap;
  j["max_episodes_per_cascade"] = max_episodes_per_cascade;
  j["lr"] = lr;
  j["pretrain_lr"] = pretrain_lr;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_eps"] = adam_eps;
  j["user_batch"] = user_batch;
  j["episode_batch"] = episode_batch;
  j["epochs"] = epochs;
  j["pretrain_epochs"] = pretrain_epochs;
  j["patience"] = patience;
  j["static_pretrain"] = static_pretrain;
  j["batch_scaling"] = to_string(batch_scaling);
  j["seed"] = seed;
  j["split"] = split;
  j["val_seed_pct"] = val_seed_pct;
  j["seed_pcts"] = seed_pcts;
  j["ks"] = ks;
  j["top_k"] = top_k;
  j["threads"] = threads;
  return j;
}

Config Config::from_json(const json& j) {
  Config c;
  c.merge(j);
  return c;
}

void Config::merge(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "encoder") {
      const auto s = as<std::string>(v, key);
      if (s == "gcn") encoder = EncoderKind::kGcn;
      else if (s == "mlp") encoder = EncoderKind::kMlp;
      else throw ConfigError("config key 'encoder': unknown value '" + s + "'");
    } else if (key == "decoder") {
      const auto s = as<std::string>(v, key);
      if (s == "inner_product") decoder = DecoderKind::kInnerProduct;
      else if (s == "mlp") decoder = DecoderKind::kMlp;
      else throw ConfigError("config key 'decoder': unknown value '" + s + "'");
    } else if (key == "activation") {
      const auto s = as<std::string>(v, key);
      if (s == "relu") activation = Activation::kRelu;
      else if (s == "tanh") activation = Activation::kTanh;
      else throw ConfigError("config key 'activation': unknown value '" + s + "'");
    } else if (key == "fusion") {
      const auto s = as<std::string>(v, key);
      if (s == "coattention") fusion = FusionMode::kCoattention;
      else if (s == "meanpool_concat") fusion = FusionMode::kMeanpoolConcat;
      else if (s == "separate_attentions") fusion = FusionMode::kSeparateAttentions;
      else throw ConfigError("config key 'fusion': unknown mode '" + s + "'");
    } else if (key == "eta") {
      if (v.is_string() && v.get<std::string>() == "balanced") eta.reset();
      else if (v.is_number()) eta = v.get<double>();
      else throw ConfigError("config key 'eta' must be a number or \"balanced\"");
    } else if (key == "embed_dim") {
      embed_dim = as_count(v, key);
    } else if (key == "hidden_dims") {
      if (!v.is_array()) throw ConfigError("config key 'hidden_dims' must be an array");
      hidden_dims.clear();
      for (const auto& d : v) hidden_dims.push_back(as_count(d, key));
    } else if (key == "beta") {
      beta = as<double>(v, key);
    } else if (key == "nonedge_exact_max_users") {
      nonedge_exact_max_users = as_count(v, key);
    } else if (key == "nonedge_samples_per_user") {
      nonedge_samples_per_user = as_count(v, key);
    } else if (key == "lambda_s") {
      lambda_s = as<double>(v, key);
    } else if (key == "lambda_r") {
      lambda_r = as<double>(v, key);
    } else if (key == "lambda_p") {
      lambda_p = as<double>(v, key);
    } else if (key == "tie_sender_receiver") {
      tie_sender_receiver = as<bool>(v, key);
    } else if (key == "init_scale") {
      init_scale = as<double>(v, key);
    } else if (key == "negative_cap") {
      negative_cap = as_count(v, key);
    } else if (key == "max_episodes_per_cascade") {
      max_episodes_per_cascade = as_count(v, key);
    } else if (key == "lr") {
      lr = as<double>(v, key);
    } else if (key == "pretrain_lr") {
      pretrain_lr = as<double>(v, key);
    } else if (key == "adam_beta1") {
      adam_beta1 = as<double>(v, key);
    } else if (key == "adam_beta2") {
      adam_beta2 = as<double>(v, key);
    } else if (key == "adam_eps") {
      adam_eps = as<double>(v, key);
    } else if (key == "user_batch") {
      user_batch = as_count(v, key);
    } else if (key == "episode_batch") {
      episode_batch = as_count(v, key);
    } else if (key == "epochs") {
      epochs = as_count(v, key);
    } else if (key == "pretrain_epochs") {
      pretrain_epochs = as_count(v, key);
    } else if (key == "patience") {
      patience = as_count(v, key);
    } else if (key == "batch_scaling") {
      const auto s = as<std::string>(v, key);
      if (s == "sum") batch_scaling = BatchScaling::kSum;
      else if (s == "batch_mean") batch_scaling = BatchScaling::kBatchMean;
      else throw ConfigError("config key 'batch_scaling': unknown value '" + s + "'");
    } else if (key == "static_pretrain") {
      static_pretrain = as<bool>(v, key);
    } else if (key == "seed") {
      if (!v.is_number_integer()) throw ConfigError("config key 'seed' must be an integer");
      seed = v.get<std::uint64_t>();
    } else if (key == "split") {
      if (!v.is_array() || v.size() != 3) throw ConfigError("config key 'split' must hold 3 fractions");
      for (std::size_t i = 0; i < 3; ++i) split[i] = as<double>(v[i], key);
    } else if (key == "val_seed_pct") {
      val_seed_pct = as<double>(v, key);
    } else if (key == "seed_pcts") {
      if (!v.is_array()) throw ConfigError("config key 'seed_pcts' must be an array");
      seed_pcts.clear();
      for (const auto& p : v) seed_pcts.push_back(as<double>(p, key));
    } else if (key == "ks") {
      if (!v.is_array()) throw ConfigError("config key 'ks' must be an array");
      ks.clear();
      for (const auto& k : v) ks.push_back(as_count(k, key));
    } else if (key == "top_k") {
      top_k = as_count(v, key);
    } else if (key == "threads") {
      threads = as_count(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

void Config::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (embed_dim == 0 || embed_dim % 2 != 0) fail("embed_dim", "must be positive and even");
  for (std::size_t d : hidden_dims)
    if (d == 0) fail("hidden_dims", "layer widths must be positive");
  const bool mlp_pair = encoder == EncoderKind::kMlp && decoder == DecoderKind::kMlp;
  const bool gcn_pair = encoder == EncoderKind::kGcn && decoder == DecoderKind::kInnerProduct;
  if (!mlp_pair && !gcn_pair) fail("encoder", "allowed pairings are mlp+mlp and gcn+inner_product");
  if (!(beta >= 1.0)) fail("beta", "must be >= 1");
  if (lambda_s < 0) fail("lambda_s", "must be non-negative");
  if (lambda_r < 0) fail("lambda_r", "must be non-negative");
  if (lambda_p < 0) fail("lambda_p", "must be non-negative");
  if (eta && *eta < 0) fail("eta", "must be non-negative");
  if (!(init_scale > 0)) fail("init_scale", "must be positive");
  if (!(lr > 0)) fail("lr", "must be positive");
  if (!(pretrain_lr > 0)) fail("pretrain_lr", "must be positive");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1)) fail("adam_beta1", "must lie in [0, 1)");
  if (!(adam_beta2 >= 0 && adam_beta2 < 1)) fail("adam_beta2", "must lie in [0, 1)");
  if (!(adam_eps > 0)) fail("adam_eps", "must be positive");
  if (user_batch == 0) fail("user_batch", "must be positive");
  if (episode_batch == 0) fail("episode_batch", "must be positive");
  if (nonedge_samples_per_user == 0) fail("nonedge_samples_per_user", "must be positive");
  const double total = split[0] + split[1] + split[2];
  if (split[0] <= 0 || split[1] < 0 || split[2] < 0 || std::abs(total - 1.0) > 1e-9)
    fail("split", "fractions must be non-negative and sum to 1");
  if (!(val_seed_pct > 0 && val_seed_pct < 1)) fail("val_seed_pct", "must lie in (0, 1)");
  if (seed_pcts.empty()) fail("seed_pcts", "must not be empty");
  for (double p : seed_pcts)
    if (!(p > 0 && p < 1)) fail("seed_pcts", "each percentage must lie in (0, 1)");
  if (ks.empty()) fail("ks", "must not be empty");
  for (std::size_t k : ks)
    if (k == 0) fail("ks", "cutoffs must be >= 1");
  if (top_k == 0) fail("top_k", "must be >= 1");
  if (threads == 0) fail("threads", "must be >= 1");
}

std::string Config::hash() const {
  const std::string s = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hivae
