#pragma once

// One JSON document configures every subcommand. All keys are optional, so
// `{}` is a valid config; unknown keys are rejected. `to_json` echoes the fully
// resolved document, seeds included.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gad/trainer.hpp"
#include "gad/zero_shot.hpp"

namespace gad {

struct RunPaths {
  std::vector<std::string> datasets;
  std::string checkpoint;
};

struct RunConfig {
  TrainConfig train;
  ModelConfig model;
  ZeroShotConfig zero_shot;
  RunPaths paths;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::Config, where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::Config, "unknown config key '" + where + "." + key + "'");
  }
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Config, "bad value for '" + where + "." + key + "'");
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::read_opt;
  RunConfig c;
  detail::reject_unknown(j, {"train", "encoder", "align", "zero_shot", "paths"}, "config");
  if (j.contains("train")) {
    const auto& t = j["train"];
    detail::reject_unknown(t, {"epochs", "learning_rate", "n_k", "queries_per_class", "epsilon", "seed", "eval_every"},
                           "train");
    read_opt(t, "epochs", c.train.epochs, "train");
    read_opt(t, "learning_rate", c.train.learning_rate, "train");
    read_opt(t, "n_k", c.train.context_size, "train");
    read_opt(t, "queries_per_class", c.train.queries_per_class, "train");
    read_opt(t, "epsilon", c.train.margin, "train");
    read_opt(t, "seed", c.train.seed, "train");
    read_opt(t, "eval_every", c.train.eval_every, "train");
  }
  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    detail::reject_unknown(e, {"hops", "hidden", "mlp_depth"}, "encoder");
    read_opt(e, "hops", c.model.encoder.hops, "encoder");
    read_opt(e, "hidden", c.model.encoder.hidden, "encoder");
    read_opt(e, "mlp_depth", c.model.encoder.mlp_depth, "encoder");
  }
  if (j.contains("align")) {
    const auto& a = j["align"];
    detail::reject_unknown(a, {"unified_dim", "mode", "seed"}, "align");
    read_opt(a, "unified_dim", c.model.align.unified_dim, "align");
    std::string mode = to_string(c.model.align.mode);
    read_opt(a, "mode", mode, "align");
    c.model.align.mode = align_mode_from_string(mode);
    read_opt(a, "seed", c.model.align.seed, "align");
  }
  if (j.contains("zero_shot")) {
    const auto& z = j["zero_shot"];
    detail::reject_unknown(z, {"n_k", "rounds", "init_strategy", "seed", "kmeans"}, "zero_shot");
    read_opt(z, "n_k", c.zero_shot.context_size, "zero_shot");
    read_opt(z, "rounds", c.zero_shot.rounds, "zero_shot");
    std::string init = to_string(c.zero_shot.init);
    read_opt(z, "init_strategy", init, "zero_shot");
    c.zero_shot.init = init_strategy_from_string(init);
    read_opt(z, "seed", c.zero_shot.seed, "zero_shot");
    if (z.contains("kmeans")) {
      const auto& k = z["kmeans"];
      detail::reject_unknown(k, {"max_iters", "restarts", "seed"}, "zero_shot.kmeans");
      read_opt(k, "max_iters", c.zero_shot.kmeans.max_iters, "zero_shot.kmeans");
      read_opt(k, "restarts", c.zero_shot.kmeans.restarts, "zero_shot.kmeans");
      read_opt(k, "seed", c.zero_shot.kmeans.seed, "zero_shot.kmeans");
    }
  }
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    detail::reject_unknown(p, {"datasets", "checkpoint"}, "paths");
    read_opt(p, "datasets", c.paths.datasets, "paths");
    read_opt(p, "checkpoint", c.paths.checkpoint, "paths");
  }
  c.train.validate();
  c.model.encoder.validate();
  require(c.model.align.unified_dim >= 1, ErrorCode::Config, "align.unified_dim must be >= 1");
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["train"] = c.train;
  j["encoder"] = {{"hops", c.model.encoder.hops}, {"hidden", c.model.encoder.hidden}, {"mlp_depth", c.model.encoder.mlp_depth}};
  j["align"] = {{"unified_dim", c.model.align.unified_dim}, {"mode", to_string(c.model.align.mode)}, {"seed", c.model.align.seed}};
  j["zero_shot"] = {{"n_k", c.zero_shot.context_size},
                    {"rounds", c.zero_shot.rounds},
                    {"init_strategy", to_string(c.zero_shot.init)},
                    {"seed", c.zero_shot.seed},
                    {"kmeans",
                     {{"max_iters", c.zero_shot.kmeans.max_iters},
                      {"restarts", c.zero_shot.kmeans.restarts},
                      {"seed", c.zero_shot.kmeans.seed}}}};
  j["paths"] = {{"datasets", c.paths.datasets}, {"checkpoint", c.paths.checkpoint}};
  return j;
}

}  // namespace gad
