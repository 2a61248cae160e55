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

#include "hivae/hivae.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "common/errors.hpp"
#include "json.hpp"
#include "synth/synth.hpp"
#include "train/config.hpp"
#include "train/evaluate.hpp"
#include "train/gradcheck.hpp"
#include "train/model.hpp"
#include "train/trainer.hpp"

struct hivae_config {
  hivae::Config cfg;
};

struct hivae_dataset {
  hivae::Dataset data;
};

struct hivae_model {
  std::unique_ptr<hivae::Model> model;
};

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

thread_local std::string g_last_error;

hivae_status fail(hivae_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
hivae_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return HIVAE_OK;
  } catch (const hivae::IoError& e) {
    return fail(HIVAE_ERR_IO, e.what());
  } catch (const hivae::ConfigError& e) {
    return fail(HIVAE_ERR_CONFIG, e.what());
  } catch (const hivae::NumericError& e) {
    return fail(HIVAE_ERR_NUMERIC, e.what());
  } catch (const hivae::ContractError& e) {
    return fail(HIVAE_ERR_ARGUMENT, e.what());
  } catch (const json::exception& e) {
    return fail(HIVAE_ERR_CONFIG, std::string("malformed JSON: ") + e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(HIVAE_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HIVAE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HIVAE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HIVAE_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw hivae::ContractError(what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw hivae::IoError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw hivae::ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw hivae::IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw hivae::IoError("cannot write " + path.string());
  return out;
}

// First line of every text artifact, so outputs can be traced to a config
// and build.
std::string provenance_line(const hivae::Config& cfg) {
  return std::string("# hivae ") + hivae::kVersion + " build " + hivae::build_id() + " config " + cfg.hash();
}

std::function<void(const hivae::EpochLog&)> logger(std::ofstream& log, hivae_epoch_callback cb, void* user) {
  return [&log, cb, user](const hivae::EpochLog& row) {
    log << hivae::format_log_row(row) << '\n';
    log.flush();
    if (cb)
      cb(row.epoch, row.phase.c_str(), row.loss, row.val_map.value_or(std::numeric_limits<double>::quiet_NaN()),
         row.seconds, user);
  };
}

}  // namespace

extern "C" {

const char* hivae_version(void) { return hivae::kVersion; }

const char* hivae_build_id(void) { return hivae::build_id(); }

const char* hivae_last_error(void) { return g_last_error.c_str(); }

void hivae_string_free(char* s) { std::free(s); }

hivae_status hivae_config_default(hivae_config** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new hivae_config{};
  });
}

hivae_status hivae_config_load(const char* path, hivae_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto cfg = std::make_unique<hivae_config>();
    cfg->cfg.merge(read_json_file(path));
    cfg->cfg.validate();
    *out = cfg.release();
  });
}

hivae_status hivae_config_merge_json(hivae_config* cfg, const char* text) {
  return guarded([&] {
    require(cfg && text, "null argument");
    hivae::Config next = cfg->cfg;
    next.merge(json::parse(text));
    next.validate();
    cfg->cfg = next;
  });
}

hivae_status hivae_config_set(hivae_config* cfg, const char* key, const char* json_value) {
  return guarded([&] {
    require(cfg && key && json_value, "null argument");
    json value;
    try {
      value = json::parse(json_value);
    } catch (const json::exception&) {
      // Bare words such as `mlp` are taken as strings.
      value = std::string(json_value);
    }
    hivae::Config next = cfg->cfg;
    next.merge(json{{key, value}});
    next.validate();
    cfg->cfg = next;
  });
}

hivae_status hivae_config_to_json(const hivae_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = dup_string(cfg->cfg.to_json().dump(2));
  });
}

hivae_status hivae_config_hash(const hivae_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = dup_string(cfg->cfg.hash());
  });
}

void hivae_config_destroy(hivae_config* cfg) { delete cfg; }

hivae_status hivae_dataset_load(const char* graph_path, const char* cascades_path, hivae_dataset** out) {
  return guarded([&] {
    require(graph_path && out, "null argument");
    auto d = std::make_unique<hivae_dataset>();
    if (cascades_path) {
      d->data = hivae::load_dataset(graph_path, cascades_path);
    } else {
      d->data.net = hivae::load_edge_file(graph_path, d->data.vocab);
    }
    *out = d.release();
  });
}

size_t hivae_dataset_num_users(const hivae_dataset* d) { return d ? d->data.net.num_users() : 0; }

size_t hivae_dataset_num_edges(const hivae_dataset* d) { return d ? d->data.net.num_edges() : 0; }

size_t hivae_dataset_num_cascades(const hivae_dataset* d) { return d ? d->data.cascades.size() : 0; }

void hivae_dataset_destroy(hivae_dataset* d) { delete d; }

hivae_status hivae_model_create(const hivae_config* cfg, const hivae_dataset* d, hivae_model** out) {
  return guarded([&] {
    require(cfg && d && out, "null argument");
    auto m = std::make_unique<hivae_model>();
    m->model = std::make_unique<hivae::Model>(cfg->cfg, d->data.net, d->data.vocab);
    m->model->init_params();
    *out = m.release();
  });
}

hivae_status hivae_model_load(const char* dir, hivae_model** out) {
  return guarded([&] {
    require(dir && out, "null argument");
    auto m = std::make_unique<hivae_model>();
    m->model = hivae::Model::load(dir);
    *out = m.release();
  });
}

hivae_status hivae_model_save(const hivae_model* m, const char* dir) {
  return guarded([&] {
    require(m && dir, "null argument");
    ensure_dir(dir);
    m->model->save(dir);
  });
}

size_t hivae_model_num_users(const hivae_model* m) { return m ? m->model->network().num_users() : 0; }

hivae_status hivae_model_config(const hivae_model* m, char** out_json) {
  return guarded([&] {
    require(m && out_json, "null argument");
    *out_json = dup_string(m->model->config().to_json().dump(2));
  });
}

void hivae_model_destroy(hivae_model* m) { delete m; }

hivae_status hivae_model_pretrain(hivae_model* m, const char* out_dir, hivae_epoch_callback cb, void* user) {
  return guarded([&] {
    require(m && out_dir, "null argument");
    const fs::path dir(out_dir);
    ensure_dir(dir);
    hivae::Model& model = *m->model;
    std::ofstream log = open_out(dir / "pretrain_log.tsv");
    log << provenance_line(model.config()) << '\n' << hivae::format_log_header() << '\n';
    hivae::TrainOptions opts;
    opts.on_epoch = logger(log, cb, user);
    const hivae::ParamStore before = model.params();
    try {
      hivae::pretrain(model, model.config().pretrain_epochs, opts);
    } catch (const hivae::NumericError&) {
      model.params() = before;
      model.save(dir / "abort");
      throw;
    }
    model.save(dir);
  });
}

hivae_status hivae_model_train(hivae_model* m, const hivae_dataset* d, const char* out_dir, int skip_pretrain,
                               hivae_epoch_callback cb, void* user) {
  return guarded([&] {
    require(m && d && out_dir, "null argument");
    const fs::path dir(out_dir);
    ensure_dir(dir);
    hivae::Model& model = *m->model;
    const hivae::Config& cfg = model.config();
    if (d->data.vocab.size() != model.vocab().size())
      throw hivae::ConfigError("dataset and model disagree on the number of users");
    const hivae::DatasetSplit split = hivae::split_dataset(d->data.cascades, cfg.split, cfg.seed);
    hivae::save_cascades(split.train, d->data.vocab, dir / "train.tsv");
    hivae::save_cascades(split.val, d->data.vocab, dir / "val.tsv");
    hivae::save_cascades(split.test, d->data.vocab, dir / "test.tsv");

    std::ofstream log = open_out(dir / "train_log.tsv");
    log << provenance_line(cfg) << '\n' << hivae::format_log_header() << '\n';
    hivae::TrainOptions opts;
    opts.run_pretrain = skip_pretrain == 0;
    opts.on_epoch = logger(log, cb, user);
    opts.abort_dir = dir / "abort";
    hivae::train(model, split, opts);
    model.save(dir);
  });
}

hivae_status hivae_model_predict(const hivae_model* m, const char* cascades_path, double seed_pct, size_t top_k,
                                 size_t threads, const char* out_path) {
  return guarded([&] {
    require(m && cascades_path && out_path, "null argument");
    if (!(seed_pct > 0.0 && seed_pct < 1.0)) throw hivae::ConfigError("seed_pct must lie in (0, 1)");
    const hivae::Model& model = *m->model;
    if (top_k == 0) top_k = model.config().top_k;
    const auto cascades = hivae::load_cascades(cascades_path, model.vocab());
    const auto episodes = hivae::slice_episodes(cascades, seed_pct);
    const auto results = hivae::rank_episodes(hivae::model_scorer(model), episodes, threads == 0 ? 1 : threads);
    std::ofstream out = open_out(out_path);
    out << provenance_line(model.config()) << '\n';
    out.precision(17);
    for (const hivae::RankResult& r : results) {
      out << r.cascade_id << '\t';
      const std::size_t n = std::min(top_k, r.ranked.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out << ';';
        out << (i + 1) << ',' << model.vocab().id(r.ranked[i].user) << ',' << r.ranked[i].score;
      }
      out << '\n';
    }
    if (!out) throw hivae::IoError(std::string("failed writing ") + out_path);
  });
}

hivae_status hivae_model_evaluate(const hivae_model* m, const char* scorer, const char* test_cascades_path,
                                  const char* train_cascades_path, const double* seed_pcts, size_t num_seed_pcts,
                                  const size_t* ks, size_t num_ks, size_t threads, uint64_t seed, char** out_json) {
  return guarded([&] {
    require(m && scorer && test_cascades_path && out_json, "null argument");
    require(seed_pcts || num_seed_pcts == 0, "seed_pcts is null");
    require(ks || num_ks == 0, "ks is null");
    const hivae::Model& model = *m->model;
    const hivae::Config& cfg = model.config();
    const std::string kind(scorer);
    hivae::Scorer score;
    if (kind == "model") {
      score = hivae::model_scorer(model);
    } else if (kind == "degree") {
      score = hivae::degree_scorer(model.network());
    } else if (kind == "random") {
      score = hivae::random_scorer(model.network().num_users(), seed);
    } else {
      throw hivae::ConfigError("unknown scorer '" + kind + "' (model, degree, random)");
    }
    std::vector<double> pcts(seed_pcts, seed_pcts + num_seed_pcts);
    std::vector<std::size_t> k_list(ks, ks + num_ks);
    if (pcts.empty()) pcts = cfg.seed_pcts;
    if (k_list.empty()) k_list = cfg.ks;
    for (double p : pcts)
      if (!(p > 0.0 && p < 1.0)) throw hivae::ConfigError("seed percentages must lie in (0, 1)");
    for (std::size_t k : k_list)
      if (k == 0) throw hivae::ConfigError("K must be >= 1");

    const auto test = hivae::load_cascades(test_cascades_path, model.vocab());
    std::vector<hivae::Cascade> train;
    if (train_cascades_path) train = hivae::load_cascades(train_cascades_path, model.vocab());
    const hivae::EvalReport report =
        hivae::evaluate(score, model.network(), test, train, pcts, k_list, threads == 0 ? 1 : threads);
    json j = report.to_json();
    j["scorer"] = kind;
    j["test_cascades"] = test.size();
    j["version"] = hivae::kVersion;
    j["build_id"] = hivae::build_id();
    j["config_hash"] = cfg.hash();
    j["config"] = cfg.to_json();
    *out_json = dup_string(j.dump(2));
  });
}

hivae_status hivae_synth(size_t nodes, size_t m, double p, size_t length, size_t cascades, uint64_t seed,
                         const char* out_dir, char** out_summary) {
  return guarded([&] {
    require(out_dir, "null argument");
    if (!(p > 0.0 && p <= 1.0)) throw hivae::ConfigError("p must lie in (0, 1]");
    if (length < 2) throw hivae::ConfigError("cascade length must be >= 2");
    if (cascades == 0) throw hivae::ConfigError("cascades must be >= 1");
    const hivae::SocialNetwork net = hivae::generate_ba({nodes, m, seed});
    hivae::IcParams ic;
    ic.p = p;
    ic.length = length;
    ic.cascades = cascades;
    ic.seed = seed + 1;
    const hivae::IcResult result = hivae::simulate_ic(net, ic);
    ensure_dir(out_dir);
    hivae::write_synthetic(net, result.cascades, out_dir);
    if (out_summary) {
      double total = 0.0;
      for (const auto& c : result.cascades) total += static_cast<double>(c.length());
      json j{{"nodes", net.num_users()},
             {"edges", net.num_edges()},
             {"cascades", result.cascades.size()},
             {"truncated", result.truncated},
             {"rejected", result.rejected},
             {"mean_length", result.cascades.empty() ? 0.0 : total / static_cast<double>(result.cascades.size())}};
      *out_summary = dup_string(j.dump());
    }
  });
}

hivae_status hivae_gradcheck(const hivae_config* cfg, uint64_t seed, const char* tensor, hivae_gradcheck_callback cb,
                             void* user, double* out_max_rel_error) {
  return guarded([&] {
    require(cfg && tensor, "null argument");
    hivae::GradcheckProblem problem = hivae::make_gradcheck_problem(cfg->cfg, seed);
    const auto checks = hivae::run_gradcheck(
        problem, tensor,
        {hivae::Objective::kVae, hivae::Objective::kDiffusion, hivae::Objective::kSocialReg, hivae::Objective::kFull});
    double worst = 0.0;
    for (const hivae::TensorCheck& c : checks) {
      worst = std::max(worst, c.max_rel_error);
      if (cb) cb(hivae::to_string(c.objective).c_str(), c.tensor.c_str(), c.entries, c.max_rel_error, user);
    }
    if (out_max_rel_error) *out_max_rel_error = worst;
  });
}

}  // extern "C"
