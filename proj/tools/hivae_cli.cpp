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

// Command-line front end over the C API.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hivae/hivae.h"

namespace {

constexpr int kExitGradcheckFailed = 1;
constexpr double kGradcheckTolerance = 1e-4;

struct CliError {
  int code;
  std::string message;
};

void check(hivae_status s) {
  if (s != HIVAE_OK) throw CliError{static_cast<int>(s), hivae_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  hivae_string_free(s);
  return out;
}

// Options shared by every command that builds a configuration.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--set", sets, "Override one key: key=value (value is JSON)")->take_all();
    cmd->add_option("--seed", seed, "Master random seed");
    cmd->add_option("--threads", threads, "Worker threads (1 is the deterministic path)");
  }

  bool any() const { return !config_path.empty() || !sets.empty() || seed || threads; }

  // Defaults, then the file, then --set, then --seed/--threads.
  hivae_config* build() const {
    hivae_config* cfg = nullptr;
    if (config_path.empty()) {
      check(hivae_config_default(&cfg));
    } else {
      check(hivae_config_load(config_path.c_str(), &cfg));
    }
    try {
      for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw CliError{HIVAE_ERR_CONFIG, "--set expects key=value, got '" + kv + "'"};
        check(hivae_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
      }
      if (seed) check(hivae_config_set(cfg, "seed", std::to_string(*seed).c_str()));
      if (threads) check(hivae_config_set(cfg, "threads", std::to_string(*threads).c_str()));
    } catch (...) {
      hivae_config_destroy(cfg);
      throw;
    }
    return cfg;
  }
};

// Accepts "0.1,0.3" or a range "0.1..0.5" (step 0.1) or "0.1..0.5:0.05".
std::vector<double> parse_seed_pcts(const std::string& text) {
  std::vector<double> out;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const double lo = std::stod(text.substr(0, dots));
      std::string rest = text.substr(dots + 2);
      double step = 0.1;
      if (const auto colon = rest.find(':'); colon != std::string::npos) {
        step = std::stod(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
      const double hi = std::stod(rest);
      if (!(step > 0.0) || hi < lo) throw std::invalid_argument("range");
      const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
      for (std::size_t i = 0; i <= n; ++i) out.push_back(std::round((lo + step * static_cast<double>(i)) * 1e9) / 1e9);
      return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      out.push_back(std::stod(text.substr(pos, comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  } catch (const std::invalid_argument&) {
    throw CliError{HIVAE_ERR_CONFIG, "cannot parse seed percentages '" + text + "'"};
  } catch (const std::out_of_range&) {
    throw CliError{HIVAE_ERR_CONFIG, "cannot parse seed percentages '" + text + "'"};
  }
  return out;
}

void print_epoch(size_t epoch, const char* phase, double loss, double val_map, double seconds, void*) {
  if (std::isnan(val_map)) {
    std::fprintf(stderr, "epoch %zu %-9s loss %.6g  %.2fs\n", epoch, phase, loss, seconds);
  } else {
    std::fprintf(stderr, "epoch %zu %-9s loss %.6g  val MAP@10 %.4f  %.2fs\n", epoch, phase, loss, val_map, seconds);
  }
}

void print_check(const char* objective, const char* tensor, size_t entries, double err, void*) {
  std::printf("%s\t%s\t%zu\t%.3e\t%s\n", objective, tensor, entries, err,
              err < kGradcheckTolerance ? "ok" : "FAIL");
}

struct ModelHandle {
  hivae_model* m = nullptr;
  ~ModelHandle() { hivae_model_destroy(m); }
};
struct DatasetHandle {
  hivae_dataset* d = nullptr;
  ~DatasetHandle() { hivae_dataset_destroy(d); }
};
struct ConfigHandle {
  hivae_config* c = nullptr;
  ~ConfigHandle() { hivae_config_destroy(c); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hivae: social-homophily and temporal-influence diffusion prediction"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print version and default config");

  // pretrain
  ConfigFlags pre_flags;
  std::string pre_graph, pre_out;
  CLI::App* pre = app.add_subcommand("pretrain", "Pretrain the social autoencoder on a graph");
  pre->add_option("--graph", pre_graph, "Edge list (src<TAB>dst)")->required();
  pre->add_option("--out", pre_out, "Output directory")->required();
  pre_flags.attach(pre);

  // train
  ConfigFlags train_flags;
  std::string train_graph, train_cascades, train_out, train_init;
  CLI::App* train = app.add_subcommand("train", "Train the full model with early stopping");
  train->add_option("--graph", train_graph, "Edge list (src<TAB>dst)")->required();
  train->add_option("--cascades", train_cascades, "Cascade file")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--init", train_init, "Start from a pretrain checkpoint directory (skips pretraining)");
  train_flags.attach(train);

  // predict
  std::string pred_ckpt, pred_cascades, pred_out;
  double pred_pct = 0.3;
  std::optional<std::size_t> pred_top_k;
  std::size_t pred_threads = 1;
  CLI::App* pred = app.add_subcommand("predict", "Rank inactive users for each cascade's seed prefix");
  pred->add_option("--checkpoint", pred_ckpt, "Model directory")->required();
  pred->add_option("--cascades", pred_cascades, "Cascade file")->required();
  pred->add_option("--out", pred_out, "Prediction file")->required();
  pred->add_option("--seed-pct", pred_pct, "Fraction of each cascade revealed as seeds")->capture_default_str();
  pred->add_option("--top-k", pred_top_k, "Users listed per cascade (default: config top_k)");
  pred->add_option("--threads", pred_threads, "Worker threads")->capture_default_str();

  // evaluate
  std::string eval_ckpt, eval_cascades, eval_train, eval_report, eval_pcts, eval_ks, eval_scorer = "model";
  std::size_t eval_threads = 1;
  std::uint64_t eval_seed = 0;
  CLI::App* eval = app.add_subcommand("evaluate", "MAP@K / Recall@K report on test cascades");
  eval->add_option("--checkpoint", eval_ckpt, "Model directory")->required();
  eval->add_option("--cascades", eval_cascades, "Test cascade file")->required();
  eval->add_option("--train-cascades", eval_train, "Training cascades (enables quartile tables)");
  eval->add_option("--seed-pct", eval_pcts, "List (0.1,0.3) or range (0.1..0.5[:step])");
  eval->add_option("--k", eval_ks, "Comma-separated cutoffs, e.g. 10,50,100");
  eval->add_option("--scorer", eval_scorer, "model, degree or random")->capture_default_str();
  eval->add_option("--seed", eval_seed, "Seed for the random scorer")->capture_default_str();
  eval->add_option("--report", eval_report, "Write the JSON report here instead of stdout");
  eval->add_option("--threads", eval_threads, "Worker threads")->capture_default_str();

  // synth
  std::size_t syn_nodes = 500, syn_m = 2, syn_len = 20, syn_cascades = 500;
  double syn_p = 0.1;
  std::uint64_t syn_seed = 0;
  std::string syn_out;
  CLI::App* syn = app.add_subcommand("synth", "Preferential-attachment graph with Independent Cascade runs");
  syn->add_option("--nodes", syn_nodes, "Number of users")->capture_default_str();
  syn->add_option("--m", syn_m, "Edges per new node")->capture_default_str();
  syn->add_option("--p", syn_p, "Activation probability")->capture_default_str();
  syn->add_option("--len", syn_len, "Target cascade length")->capture_default_str();
  syn->add_option("--cascades", syn_cascades, "Number of cascades")->capture_default_str();
  syn->add_option("--seed", syn_seed, "Random seed")->capture_default_str();
  syn->add_option("--out-dir", syn_out, "Output directory")->required();

  // gradcheck
  ConfigFlags gc_flags;
  std::string gc_tensor = "all";
  CLI::App* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gc->add_option("--tensor", gc_tensor, "Parameter name or 'all'")->capture_default_str();
  gc_flags.attach(gc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : HIVAE_ERR_ARGUMENT;
  }

  try {
    if (show_version) {
      ConfigHandle cfg;
      check(hivae_config_default(&cfg.c));
      char* json = nullptr;
      check(hivae_config_to_json(cfg.c, &json));
      std::printf("hivae %s (build %s)\n%s\n", hivae_version(), hivae_build_id(), take(json).c_str());
      return 0;
    }

    if (*pre) {
      ConfigHandle cfg{pre_flags.build()};
      DatasetHandle data;
      check(hivae_dataset_load(pre_graph.c_str(), nullptr, &data.d));
      ModelHandle model;
      check(hivae_model_create(cfg.c, data.d, &model.m));
      check(hivae_model_pretrain(model.m, pre_out.c_str(), print_epoch, nullptr));
      std::printf("pretrained checkpoint written to %s\n", pre_out.c_str());
      return 0;
    }

    if (*train) {
      DatasetHandle data;
      check(hivae_dataset_load(train_graph.c_str(), train_cascades.c_str(), &data.d));
      ModelHandle model;
      if (!train_init.empty()) {
        if (train_flags.any())
          throw CliError{HIVAE_ERR_CONFIG, "--init uses the checkpoint's config; drop --config/--set/--seed/--threads"};
        check(hivae_model_load(train_init.c_str(), &model.m));
      } else {
        ConfigHandle cfg{train_flags.build()};
        check(hivae_model_create(cfg.c, data.d, &model.m));
      }
      std::fprintf(stderr, "%zu users, %zu edges, %zu cascades\n", hivae_dataset_num_users(data.d),
                   hivae_dataset_num_edges(data.d), hivae_dataset_num_cascades(data.d));
      check(hivae_model_train(model.m, data.d, train_out.c_str(), train_init.empty() ? 0 : 1, print_epoch, nullptr));
      std::printf("model written to %s\n", train_out.c_str());
      return 0;
    }

    if (*pred) {
      ModelHandle model;
      check(hivae_model_load(pred_ckpt.c_str(), &model.m));
      check(hivae_model_predict(model.m, pred_cascades.c_str(), pred_pct, pred_top_k.value_or(0), pred_threads, pred_out.c_str()));
      return 0;
    }

    if (*eval) {
      ModelHandle model;
      check(hivae_model_load(eval_ckpt.c_str(), &model.m));
      std::vector<double> pcts;
      if (!eval_pcts.empty()) pcts = parse_seed_pcts(eval_pcts);
      std::vector<std::size_t> ks;
      for (std::size_t pos = 0; pos < eval_ks.size();) {
        const auto comma = eval_ks.find(',', pos);
        const std::string item = eval_ks.substr(pos, comma - pos);
        try {
          ks.push_back(std::stoul(item));
        } catch (const std::exception&) {
          throw CliError{HIVAE_ERR_CONFIG, "cannot parse K value '" + item + "'"};
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      char* report = nullptr;
      check(hivae_model_evaluate(model.m, eval_scorer.c_str(), eval_cascades.c_str(),
                                 eval_train.empty() ? nullptr : eval_train.c_str(), pcts.data(), pcts.size(),
                                 ks.data(), ks.size(), eval_threads, eval_seed, &report));
      const std::string json = take(report);
      if (eval_report.empty()) {
        std::printf("%s\n", json.c_str());
      } else {
        std::ofstream out(eval_report);
        out << json << '\n';
        if (!out) throw CliError{HIVAE_ERR_IO, "cannot write " + eval_report};
      }
      return 0;
    }

    if (*syn) {
      char* summary = nullptr;
      check(hivae_synth(syn_nodes, syn_m, syn_p, syn_len, syn_cascades, syn_seed, syn_out.c_str(), &summary));
      std::printf("%s\n", take(summary).c_str());
      return 0;
    }

    if (*gc) {
      ConfigHandle cfg{gc_flags.build()};
      std::uint64_t seed = gc_flags.seed.value_or(0);
      double worst = 0.0;
      std::printf("objective\ttensor\tentries\tmax_rel_error\tstatus\n");
      check(hivae_gradcheck(cfg.c, seed, gc_tensor.c_str(), print_check, nullptr, &worst));
      std::printf("max relative error %.3e (tolerance %.0e)\n", worst, kGradcheckTolerance);
      return worst < kGradcheckTolerance ? 0 : kExitGradcheckFailed;
    }

    std::cout << app.help();
    return 0;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  }
}
