#pragma once

// Generalist training across a collection of labelled graphs. Each epoch
// visits the datasets round-robin with one episode apiece: n_k random normals
// form the context, and an equal number of normals and anomalies (disjoint
// from the context) form the query batch scored by the margin cosine loss.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gad/metrics.hpp"
#include "gad/optim.hpp"
#include "gad/pipeline.hpp"

namespace gad {

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::size_t context_size = 10;       // n_k
  std::size_t queries_per_class = 64;  // capped by what each graph has
  double margin = 0.0;                 // epsilon
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;          // 0 disables the periodic training-set eval

  void validate() const {
    require(context_size >= 1, ErrorCode::Config, "train n_k must be >= 1");
    require(queries_per_class >= 1, ErrorCode::Config, "queries_per_class must be >= 1");
    require(margin >= -1.0 && margin < 1.0, ErrorCode::Config, "margin must lie in [-1, 1)");
    require(learning_rate > 0.0, ErrorCode::Config, "learning rate must be positive");
  }
};

struct Episode {
  ContextSplit split;
  std::vector<std::uint8_t> query_labels;  // aligned with split.query
};

/// Context: n_k uniformly drawn normals. Queries: q normals + q anomalies from
/// the rest, q = min(queries_per_class, anomalies, normals - n_k).
/// Isolated nodes are never sampled: their residual embedding is zero for any
/// parameters, so the cosine loss is undefined on them.
inline Episode sample_episode(const Graph& g, const TrainConfig& cfg, Rng& rng) {
  const auto& labels = g.labels();
  std::vector<NodeId> normals, anomalies;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) == 0) continue;
    (labels[v] ? anomalies : normals).push_back(v);
  }
  if (normals.size() <= cfg.context_size) {
    throw Error(ErrorCode::InsufficientNormals, "graph '" + g.name() + "' has " + std::to_string(normals.size()) +
                                                    " normals, needs more than n_k=" + std::to_string(cfg.context_size));
  }
  if (anomalies.empty()) throw Error(ErrorCode::InsufficientAnomalies, "graph '" + g.name() + "' has no anomalies");

  Episode ep;
  ep.split.context = rng.sample(std::span<const NodeId>(normals), cfg.context_size);
  std::vector<char> in_context(g.node_count(), 0);
  for (NodeId v : ep.split.context) in_context[v] = 1;
  std::vector<NodeId> rest;
  for (NodeId v : normals)
    if (!in_context[v]) rest.push_back(v);

  const std::size_t q = std::min({cfg.queries_per_class, anomalies.size(), rest.size()});
  ep.split.query = rng.sample(std::span<const NodeId>(rest), q);
  ep.query_labels.assign(q, 0);
  for (NodeId v : rng.sample(std::span<const NodeId>(anomalies), q)) {
    ep.split.query.push_back(v);
    ep.query_labels.push_back(1);
  }
  return ep;
}

/// Loss of one episode, recorded on `tape`.
inline Var episode_loss(Tape& tape, const ModelVars& vars, const PropagatedFeatures& x, const Episode& ep,
                        double margin) {
  const Var hk = encode_rows(tape, vars, x, ep.split.context);
  const Var hq = encode_rows(tape, vars, x, ep.split.query);
  const Var reconstructed = cross_attend(tape, vars, hq, hk);
  return tape.mean(tape.margin_hinge(tape.row_cosine(hq, reconstructed), ep.query_labels, margin));
}

struct LossRecord {
  std::size_t epoch = 0;
  std::size_t dataset = 0;
  double loss = 0.0;
};

struct Checkpoint {
  Model model;
  TrainConfig train;
  std::size_t epoch = 0;
  std::vector<LossRecord> loss_trace;
  nlohmann::json config_echo = nlohmann::json::object();
};

struct EvalRecord {
  std::size_t epoch = 0;
  std::size_t dataset = 0;
  double auroc = 0.0;
};

struct TrainCallbacks {
  std::function<void(const LossRecord&, const std::string& dataset_name)> on_step;
  // Few-shot AUROC on each training graph, every eval_every epochs, against a
  // context fixed for the whole run.
  std::function<void(const EvalRecord&, const std::string& dataset_name)> on_eval;
};

inline Checkpoint train(const std::vector<Graph>& datasets, const TrainConfig& cfg, const ModelConfig& model_cfg,
                        const TrainCallbacks& callbacks = {}) {
  cfg.validate();
  model_cfg.encoder.validate();
  require(!datasets.empty(), ErrorCode::Config, "no training datasets");

  std::vector<PreparedGraph> prepared;
  prepared.reserve(datasets.size());
  for (const Graph& g : datasets) {
    require_both_classes(g);
    prepared.push_back(prepare(g, model_cfg));
  }

  Checkpoint ckpt;
  ckpt.train = cfg;
  ckpt.model.config = model_cfg;
  ckpt.model.params = init_params(model_cfg.align.unified_dim, model_cfg.encoder, derive_seed(cfg.seed, 0));
  Adam optimizer(ckpt.model.params, AdamOptions{cfg.learning_rate});
  Rng rng(derive_seed(cfg.seed, 1));

  std::vector<std::vector<NodeId>> eval_context;
  if (cfg.eval_every > 0 && callbacks.on_eval) {
    Rng eval_rng(derive_seed(cfg.seed, 2));
    for (const Graph& g : datasets) eval_context.push_back(sample_episode(g, cfg, eval_rng).split.context);
  }

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      const Episode ep = sample_episode(datasets[d], cfg, rng);
      Tape tape;
      double loss = 0.0;
      try {
        const ModelVars vars = bind_model(tape, ckpt.model.params, model_cfg.encoder);
        const Var l = episode_loss(tape, vars, prepared[d].propagated, ep, cfg.margin);
        loss = tape.value(l)(0, 0);
        if (!std::isfinite(loss)) throw Error(ErrorCode::NonFinite, "loss");
        optimizer.step(ckpt.model.params, tape.gradient(l, ckpt.model.params));
      } catch (const Error& e) {
        if (e.category() != ErrorCategory::Numeric) throw;
        double norm = 0.0;
        for (double v : ckpt.model.params.values()) norm += v * v;
        throw Error(e.code(), std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", dataset '" +
                                  datasets[d].name() + "', param-norm " + std::to_string(std::sqrt(norm)) + ")");
      }
      LossRecord rec{epoch, d, loss};
      ckpt.loss_trace.push_back(rec);
      if (callbacks.on_step) callbacks.on_step(rec, datasets[d].name());
    }
    ckpt.epoch = epoch;
    if (!eval_context.empty() && epoch % cfg.eval_every == 0) {
      for (std::size_t d = 0; d < datasets.size(); ++d) {
        const ScoreVector s = score_few_shot(embed(prepared[d], ckpt.model), ckpt.model.params, eval_context[d]);
        std::vector<std::uint8_t> y;
        y.reserve(s.size());
        for (NodeId v : s.nodes) y.push_back(datasets[d].labels()[v]);
        callbacks.on_eval(EvalRecord{epoch, d, auroc(s.values, y)}, datasets[d].name());
      }
    }
  }
  return ckpt;
}

// ---- checkpoint files -----------------------------------------------------

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"learning_rate", c.learning_rate},
       {"n_k", c.context_size},
       {"queries_per_class", c.queries_per_class},
       {"epsilon", c.margin},
       {"seed", c.seed},
       {"eval_every", c.eval_every}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.context_size = j.at("n_k").get<std::size_t>();
  c.queries_per_class = j.at("queries_per_class").get<std::size_t>();
  c.margin = j.at("epsilon").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.eval_every = j.at("eval_every").get<std::size_t>();
}

inline void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& r : ckpt.loss_trace) trace.push_back({r.epoch, r.dataset, r.loss});
  const nlohmann::json meta = {{"model", ckpt.model.config},
                               {"train", ckpt.train},
                               {"epoch", ckpt.epoch},
                               {"loss_trace", trace},
                               {"config", ckpt.config_echo}};
  write_params(out, ckpt.model.params, meta.dump());
}

inline Checkpoint read_checkpoint(std::istream& in) {
  std::string meta_text;
  Checkpoint ckpt;
  ckpt.model.params = read_params(in, &meta_text);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_text);
    ckpt.model.config = meta.at("model").get<ModelConfig>();
    ckpt.train = meta.at("train").get<TrainConfig>();
    ckpt.epoch = meta.at("epoch").get<std::size_t>();
    for (const auto& r : meta.at("loss_trace")) {
      ckpt.loss_trace.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>(), r.at(2).get<double>()});
    }
    ckpt.config_echo = meta.value("config", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("checkpoint metadata: ") + e.what());
  }
  require_architecture(ckpt.model.params, ckpt.model.config.align.unified_dim, ckpt.model.config.encoder);
  return ckpt;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_checkpoint(out, ckpt);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace gad
