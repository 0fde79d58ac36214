#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "gad/gad.hpp"

namespace gad::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig resolve_config(const std::string& path) {
  if (path.empty()) return parse_run_config(json::object());
  return load_run_config(path);
}

std::vector<NodeId> parse_id_list(const std::string& text) {
  std::vector<NodeId> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      ids.push_back(static_cast<NodeId>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "bad node id '" + item + "'");
    }
  }
  return ids;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::string scores_csv(const ScoreVector& s) {
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.nodes[a] < s.nodes[b]; });
  std::string csv = "node_id,score\n";
  for (std::size_t i : idx) csv += std::to_string(s.nodes[i]) + "," + format_double(s.values[i]) + "\n";
  return csv;
}

ScoreVector read_scores_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "node_id,score") {
    throw Error(ErrorCode::MalformedHeader, "scores CSV must start with 'node_id,score'");
  }
  ScoreVector s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::MalformedHeader, "line " + std::to_string(lineno) + ": missing comma");
    try {
      s.nodes.push_back(static_cast<NodeId>(std::stoull(line.substr(0, comma))));
      s.values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedHeader, "line " + std::to_string(lineno) + ": unparsable entry");
    }
  }
  return s;
}

Checkpoint run_training(const std::vector<std::string>& paths, const RunConfig& cfg, std::ostream* log) {
  std::vector<Graph> graphs;
  for (const auto& p : paths) graphs.push_back(load_graph(p));
  TrainCallbacks cb;
  if (log) {
    cb.on_step = [log](const LossRecord& r, const std::string& name) {
      *log << json{{"epoch", r.epoch}, {"dataset", name}, {"loss", r.loss}}.dump() << '\n';
    };
    cb.on_eval = [log](const EvalRecord& r, const std::string& name) {
      *log << json{{"epoch", r.epoch}, {"dataset", name}, {"train_auroc", r.auroc}}.dump() << '\n';
    };
  }
  Checkpoint ckpt = train(graphs, cfg.train, cfg.model, cb);
  ckpt.config_echo = to_json(cfg);
  return ckpt;
}

/// Evaluation labels for the scored ids; rejects unknown or repeated ids.
std::vector<std::uint8_t> labels_for(const Graph& g, std::span<const NodeId> ids) {
  const auto& labels = g.labels();
  std::vector<char> seen(g.node_count(), 0);
  std::vector<std::uint8_t> out;
  out.reserve(ids.size());
  for (NodeId v : ids) {
    if (v >= g.node_count()) throw Error(ErrorCode::IndexOutOfRange, "scored node " + std::to_string(v) + " not in graph", v);
    if (seen[v]) throw Error(ErrorCode::Contract, "node " + std::to_string(v) + " scored twice", v);
    seen[v] = 1;
    out.push_back(labels[v]);
  }
  return out;
}

/// n_k normal nodes drawn from the labels (sweep / acceptance helper).
std::vector<NodeId> sample_normals(const Graph& g, std::size_t k, std::uint64_t seed) {
  std::vector<NodeId> normals;
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (!g.labels()[v]) normals.push_back(v);
  require(normals.size() >= k, ErrorCode::InsufficientNormals, "not enough normals for the requested context");
  Rng rng(seed);
  auto ids = rng.sample(std::span<const NodeId>(normals), k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---- subcommands ----------------------------------------------------------

struct InjectArgs {
  std::string input, output, spec_path;
  InjectionSpec spec;
};

int cmd_inject(const InjectArgs& a, std::ostream& out) {
  InjectionSpec spec = a.spec;
  if (!a.spec_path.empty()) {
    std::ifstream in(a.spec_path);
    if (!in) throw Error(ErrorCode::Config, "cannot open spec " + a.spec_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Config, std::string("spec is not valid JSON: ") + e.what());
    }
    spec = j.get<InjectionSpec>();
  }
  const Graph g = inject(load_graph(a.input), spec);
  save_graph(a.output, g);
  out << json{{"output", a.output}, {"spec", spec}, {"meta", graph_meta(g)}}.dump() << '\n';
  return kExitOk;
}

struct SynthArgs {
  std::string preset, output;
  std::uint64_t seed = 0;
  std::size_t nodes = 1000;
  DomainSpec domain;
  double anomaly_fraction = 0.05;
};

int cmd_synth(SynthArgs a, std::ostream& out) {
  json written = json::array();
  if (!a.preset.empty()) {
    if (a.preset != "acceptance") throw Error(ErrorCode::Config, "unknown preset '" + a.preset + "'");
    fs::create_directories(a.output);
    const BenchmarkSuite suite = acceptance_suite(a.seed, a.nodes);
    auto emit = [&](const DomainSpec& spec, const char* role) {
      const fs::path path = fs::path(a.output) / (spec.name + ".gadg");
      const Graph g = generate(spec);
      save_graph(path, g);
      written.push_back({{"role", role}, {"path", path.string()}, {"spec", spec}, {"meta", graph_meta(g)}});
    };
    for (const auto& s : suite.train) emit(s, "train");
    for (const auto& s : suite.test) emit(s, "test");
  } else {
    DomainSpec spec = a.domain;
    spec.nodes = a.nodes;
    spec.seed = a.seed;
    if (spec.name == "domain") spec.name = fs::path(a.output).stem().string();
    spec.injection = InjectionSpec::for_fraction(spec.nodes, a.anomaly_fraction, derive_seed(a.seed, 500));
    const Graph g = generate(spec);
    save_graph(a.output, g);
    written.push_back({{"role", "single"}, {"path", a.output}, {"spec", spec}, {"meta", graph_meta(g)}});
  }
  out << written.dump(2) << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string config, output;
  std::vector<std::string> datasets;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const RunConfig cfg = resolve_config(a.config);
  std::vector<std::string> datasets = a.datasets.empty() ? cfg.paths.datasets : a.datasets;
  require(!datasets.empty(), ErrorCode::Config, "train needs at least one dataset");
  const std::string output = a.output.empty() ? cfg.paths.checkpoint : a.output;
  require(!output.empty(), ErrorCode::Config, "train needs --out or paths.checkpoint");
  const Checkpoint ckpt = run_training(datasets, cfg, &out);
  save_checkpoint(output, ckpt);
  return kExitOk;
}

struct ScoreArgs {
  std::string mode, checkpoint, graph, output, trace, config, normal_ids;
  bool normal_ids_given = false;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  if (a.mode == "fewshot") {
    require(a.normal_ids_given && !parse_id_list(a.normal_ids).empty(), ErrorCode::Contract,
            "fewshot scoring requires --normal-ids with at least one id");
  } else if (a.mode == "zeroshot") {
    require(!a.normal_ids_given, ErrorCode::Contract, "zeroshot scoring does not accept --normal-ids");
  } else {
    throw Error(ErrorCode::Config, "mode must be fewshot or zeroshot");
  }
  const RunConfig cfg = resolve_config(a.config);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const Graph g = load_graph(a.graph);
  const PreparedGraph p = prepare(g, ckpt.model.config);
  const Embeddings emb = embed(p, ckpt.model);

  ScoreVector scores;
  json summary = {{"mode", a.mode}, {"graph", g.name()}, {"output", a.output}};
  if (a.mode == "fewshot") {
    const auto ids = parse_id_list(a.normal_ids);
    scores = score_few_shot(emb, ckpt.model.params, ids);
    summary["context"] = ids;
  } else {
    const ZeroShotOutput z = score_zero_shot(p, emb, ckpt.model, cfg.zero_shot);
    scores = z.scores;
    if (!a.trace.empty()) write_text(a.trace, trace_to_json(z.trace, z.scores).dump(1) + "\n");
    summary["zero_shot"] = to_json(cfg)["zero_shot"];
  }
  write_text(a.output, scores_csv(scores));
  out << summary.dump() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string scores, graph, output;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const ScoreVector s = read_scores_csv(a.scores);
  const Graph g = load_graph(a.graph);
  require(g.has_labels(), ErrorCode::Contract, "eval needs a labelled graph");
  const auto labels = labels_for(g, s.nodes);
  const MetricReport r = evaluate(s.values, labels);
  json row = r;
  row["dataset"] = g.name();
  row["scored"] = s.size();
  if (!a.output.empty()) write_text(a.output, row.dump(2) + "\n");
  out << row.dump() << '\n';
  return kExitOk;
}

struct BenchArgs {
  std::string checkpoint, output;
  std::size_t nodes = 5000;
  std::vector<std::size_t> edges{20000, 80000};
  std::size_t dim = 128;
  std::size_t repeats = 5;
  std::size_t context = 10;
  std::uint64_t seed = 0;
};

template <class Fn>
double elapsed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

/// Wall time of alignment, encoding and scoring on random graphs of fixed n
/// and increasing m, best of `repeats`. Repeats cycle through the sizes so a
/// noisy stretch on the machine hits every size alike. Shared by `bench` and
/// the acceptance suite.
json run_bench(const Model& model, std::size_t nodes, const std::vector<std::size_t>& edge_counts, std::size_t dim,
               std::size_t repeats, std::size_t context, std::uint64_t seed) {
  require(edge_counts.size() >= 2, ErrorCode::Config, "bench needs at least two graph sizes");
  require(context >= 1 && context < nodes, ErrorCode::Config, "bench context must be in [1, nodes)");
  std::vector<Graph> graphs;
  for (std::size_t i = 0; i < edge_counts.size(); ++i)
    graphs.push_back(random_graph(nodes, edge_counts[i], dim, derive_seed(seed, i)));
  std::vector<NodeId> ctx(context);
  std::iota(ctx.begin(), ctx.end(), NodeId{0});

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::array<double, 3>> best(graphs.size(), {inf, inf, inf});
  for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      AlignedFeatures aligned;
      Embeddings emb;
      const double t[3] = {
          elapsed([&] { aligned = align(graphs[i], model.config.align); }),
          elapsed([&] { emb = encode(normalize_adjacency(graphs[i]), aligned.matrix, model.params, model.config.encoder); }),
          elapsed([&] { (void)score_few_shot(emb, model.params, ctx); })};
      for (int k = 0; k < 3; ++k) best[i][k] = std::min(best[i][k], t[k]);
    }
  }
  json rows = json::array();
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const char* phases[3] = {"alignment", "encoding", "scoring"};
    for (int k = 0; k < 3; ++k)
      rows.push_back({{"n", nodes}, {"m", graphs[i].edge_count()}, {"phase", phases[k]}, {"seconds", best[i][k]}});
  }
  return rows;
}

namespace {

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const json rows = run_bench(ckpt.model, a.nodes, a.edges, a.dim, a.repeats, a.context, a.seed);
  if (!a.output.empty()) write_text(a.output, rows.dump(2) + "\n");
  out << rows.dump() << '\n';
  return kExitOk;
}

struct SweepArgs {
  std::string config, checkpoint, param, mode = "fewshot", output;
  std::vector<std::size_t> values;
  std::vector<std::string> graphs, train_graphs;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
};

struct Stats {
  double mean = 0.0, std = 0.0;
};

Stats mean_std(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(s.std / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

/// One sweep value, fully isolated: its own config copy, model and RNG streams.
json sweep_value(const SweepArgs& a, const RunConfig& base, const Checkpoint* shared, const std::vector<Graph>& graphs,
                 std::size_t value) {
  RunConfig cfg = base;
  std::size_t context = a.mode == "fewshot" ? cfg.train.context_size : cfg.zero_shot.context_size;
  if (a.param == "n_k") {
    context = value;
  } else if (a.param == "rounds") {
    cfg.zero_shot.rounds = value;
  } else if (a.param == "hops") {
    cfg.model.encoder.hops = value;
  } else if (a.param == "hidden") {
    cfg.model.encoder.hidden = value;
  }
  Checkpoint trained;
  const Checkpoint* ckpt = shared;
  if (a.param == "hops" || a.param == "hidden") {
    trained = run_training(a.train_graphs, cfg, nullptr);
    ckpt = &trained;
  }
  cfg.zero_shot.context_size = context;

  json rows = json::array();
  for (const Graph& g : graphs) {
    const PreparedGraph p = prepare(g, ckpt->model.config);
    const Embeddings emb = embed(p, ckpt->model);
    std::vector<double> aurocs, auprcs;
    std::vector<std::uint64_t> seeds;
    for (std::size_t r = 0; r < a.repeats; ++r) {
      const std::uint64_t seed = derive_seed(a.seed, r);
      seeds.push_back(seed);
      ScoreVector s;
      if (a.mode == "fewshot") {
        s = score_few_shot(emb, ckpt->model.params, sample_normals(g, context, seed));
      } else {
        ZeroShotConfig z = cfg.zero_shot;
        z.kmeans.seed = seed;
        z.seed = seed;
        s = score_zero_shot(p, emb, ckpt->model, z).scores;
      }
      const MetricReport m = evaluate(s.values, labels_for(g, s.nodes));
      aurocs.push_back(m.auroc);
      auprcs.push_back(m.auprc);
    }
    const Stats roc = mean_std(aurocs), pr = mean_std(auprcs);
    rows.push_back({{"param", a.param},     {"value", value},       {"mode", a.mode},
                    {"dataset", g.name()},  {"auroc_mean", roc.mean}, {"auroc_std", roc.std},
                    {"auprc_mean", pr.mean}, {"auprc_std", pr.std},  {"seeds", seeds}});
  }
  return rows;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  static const std::vector<std::string> params{"n_k", "hops", "rounds", "hidden"};
  require(std::find(params.begin(), params.end(), a.param) != params.end(), ErrorCode::Config,
          "sweep param must be one of n_k, hops, rounds, hidden");
  require(a.mode == "fewshot" || a.mode == "zeroshot", ErrorCode::Config, "mode must be fewshot or zeroshot");
  require(!a.values.empty(), ErrorCode::Config, "sweep needs --values");
  require(!a.graphs.empty(), ErrorCode::Config, "sweep needs --graphs");
  const bool retrains = a.param == "hops" || a.param == "hidden";
  require(!retrains || !a.train_graphs.empty(), ErrorCode::Config, "sweeping " + a.param + " needs --train graphs");
  require(retrains || !a.checkpoint.empty(), ErrorCode::Config, "sweep needs --checkpoint");

  const RunConfig cfg = resolve_config(a.config);
  std::optional<Checkpoint> shared;
  if (!a.checkpoint.empty()) shared = load_checkpoint(a.checkpoint);
  std::vector<Graph> graphs;
  for (const auto& p : a.graphs) graphs.push_back(load_graph(p));

  std::vector<std::size_t> values = a.values;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Values are independent; evaluate them concurrently, collect in value order.
  std::vector<json> results(values.size());
  const std::size_t width = std::max<std::size_t>(1, thread_count());
  for (std::size_t start = 0; start < values.size(); start += width) {
    std::vector<std::future<json>> jobs;
    for (std::size_t i = start; i < std::min(values.size(), start + width); ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return sweep_value(a, cfg, shared ? &*shared : nullptr, graphs, values[i]);
      }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) results[start + i] = jobs[i].get();
  }
  json table = json::array();
  for (const auto& rows : results)
    for (const auto& r : rows) table.push_back(r);
  if (!a.output.empty()) write_text(a.output, table.dump(2) + "\n");
  out << table.dump() << '\n';
  return kExitOk;
}

struct ExportArgs {
  std::string graph, checkpoint, config, output, normal_ids;
  bool aligned = false, embeddings = false, attention = false, edges = false;
};

std::string matrix_csv(const Matrix& m, const std::string& prefix, std::span<const NodeId> ids) {
  std::string csv = "node_id";
  for (std::size_t c = 0; c < m.cols(); ++c) csv += "," + prefix + std::to_string(c);
  csv += "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    csv += std::to_string(ids.empty() ? r : ids[r]);
    for (double v : m.row(r)) csv += "," + format_double(v);
    csv += "\n";
  }
  return csv;
}

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const int chosen = int(a.aligned) + int(a.embeddings) + int(a.attention) + int(a.edges);
  require(chosen == 1, ErrorCode::Config, "choose exactly one of --aligned, --embeddings, --attention, --edges");
  const Graph g = load_graph(a.graph);
  std::string csv;
  if (a.edges) {
    csv = "source,target\n";
    for (const auto& [u, v] : g.edges()) csv += std::to_string(u) + "," + std::to_string(v) + "\n";
  } else if (a.aligned && a.checkpoint.empty()) {
    const RunConfig cfg = resolve_config(a.config);
    csv = matrix_csv(align(g, cfg.model.align).matrix, "f", {});
  } else {
    require(!a.checkpoint.empty(), ErrorCode::Config, "--embeddings/--attention need --checkpoint");
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const PreparedGraph p = prepare(g, ckpt.model.config);
    if (a.aligned) {
      csv = matrix_csv(p.aligned.matrix, "f", {});
    } else {
      const Embeddings emb = embed(p, ckpt.model);
      if (a.embeddings) {
        csv = matrix_csv(emb.h, "h", {});
      } else {
        const auto ids = parse_id_list(a.normal_ids);
        require(!ids.empty(), ErrorCode::Contract, "--attention needs --normal-ids");
        const ContextSplit split = ContextSplit::complement(g.node_count(), ids);
        const AttentionResult att =
            cross_attend(gather_rows(emb.h, split.query), gather_rows(emb.h, split.context), ckpt.model.params);
        csv = "query_id";
        for (NodeId c : split.context) csv += ",ctx_" + std::to_string(c);
        csv += "\n";
        for (std::size_t r = 0; r < split.query.size(); ++r) {
          csv += std::to_string(split.query[r]);
          for (double v : att.weights.row(r)) csv += "," + format_double(v);
          csv += "\n";
        }
      }
    }
  }
  write_text(a.output, csv);
  out << json{{"output", a.output}}.dump() << '\n';
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalist graph anomaly detection: train once, score unseen graphs few-shot or zero-shot."};
  app.name("gad");
  app.require_subcommand(1);

  InjectArgs inject_args;
  auto* inject_cmd = app.add_subcommand("inject", "Inject clique and feature-swap anomalies into a graph");
  inject_cmd->add_option("input", inject_args.input, "Input graph (.gadg)")->required();
  inject_cmd->add_option("output", inject_args.output, "Output graph (.gadg)")->required();
  inject_cmd->add_option("--spec", inject_args.spec_path, "Injection spec JSON (overrides the flags)");
  inject_cmd->add_option("--clique-size", inject_args.spec.clique_size, "Nodes per clique")->capture_default_str();
  inject_cmd->add_option("--clique-count", inject_args.spec.clique_count, "Number of cliques")->capture_default_str();
  inject_cmd->add_option("--attribute-count", inject_args.spec.attribute_count, "Attribute anomalies")->capture_default_str();
  inject_cmd->add_option("--candidates", inject_args.spec.candidate_pool, "Candidate pool size")->capture_default_str();
  inject_cmd->add_option("--seed", inject_args.spec.seed, "Random seed")->capture_default_str();

  SynthArgs synth_args;
  std::string synth_dim_note;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic SBM graphs with injected anomalies");
  synth_cmd->add_option("--preset", synth_args.preset, "Named collection (acceptance)");
  synth_cmd->add_option("--out", synth_args.output, "Output directory (preset) or file")->required();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--nodes", synth_args.nodes, "Nodes per graph")->capture_default_str();
  synth_cmd->add_option("--dim", synth_args.domain.raw_dim, "Raw feature width")->capture_default_str();
  synth_cmd->add_option("--clusters", synth_args.domain.clusters, "Blocks / mixture components")->capture_default_str();
  synth_cmd->add_option("--p-intra", synth_args.domain.p_intra, "Within-block edge probability")->capture_default_str();
  synth_cmd->add_option("--p-inter", synth_args.domain.p_inter, "Between-block edge probability")->capture_default_str();
  synth_cmd->add_option("--separation", synth_args.domain.separation, "Centre std-dev")->capture_default_str();
  synth_cmd->add_option("--anomaly-fraction", synth_args.anomaly_fraction, "Injected fraction")->capture_default_str();
  synth_cmd->add_option("--name", synth_args.domain.name, "Dataset name");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one model on a collection of labelled graphs");
  train_cmd->add_option("--config", train_args.config, "Run config JSON");
  train_cmd->add_option("--out", train_args.output, "Checkpoint path (.gadp)");
  train_cmd->add_option("datasets", train_args.datasets, "Training graphs (.gadg)");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score every node of an unseen graph");
  score_cmd->add_option("--mode", score_args.mode, "fewshot or zeroshot")->required();
  score_cmd->add_option("--checkpoint", score_args.checkpoint, "Trained checkpoint")->required();
  score_cmd->add_option("--graph", score_args.graph, "Graph to score")->required();
  score_cmd->add_option("--out", score_args.output, "Scores CSV")->required();
  auto* ids_opt = score_cmd->add_option("--normal-ids", score_args.normal_ids, "Comma-separated labelled normals (fewshot)");
  score_cmd->add_option("--trace", score_args.trace, "Zero-shot trace JSON");
  score_cmd->add_option("--config", score_args.config, "Run config JSON (zero_shot section)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "AUROC / AUPRC of a scores CSV against graph labels");
  eval_cmd->add_option("--scores", eval_args.scores, "Scores CSV")->required();
  eval_cmd->add_option("--graph", eval_args.graph, "Labelled graph")->required();
  eval_cmd->add_option("--out", eval_args.output, "Report JSON");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Time alignment, encoding and scoring as m grows");
  bench_cmd->add_option("--checkpoint", bench_args.checkpoint, "Trained checkpoint")->required();
  bench_cmd->add_option("--nodes", bench_args.nodes, "Nodes per generated graph")->capture_default_str();
  bench_cmd->add_option("--edges", bench_args.edges, "Edge counts, one graph each")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--dim", bench_args.dim, "Raw feature width")->capture_default_str();
  bench_cmd->add_option("--repeats", bench_args.repeats, "Timing repeats (best kept)")->capture_default_str();
  bench_cmd->add_option("--context", bench_args.context, "Context size for scoring")->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_args.output, "Timing JSON");

  SweepArgs sweep_args;
  std::string sweep_graphs, sweep_train;
  auto* sweep_cmd = app.add_subcommand("sweep", "Metric versus one hyperparameter");
  sweep_cmd->add_option("--param", sweep_args.param, "n_k, hops, rounds or hidden")->required();
  sweep_cmd->add_option("--values", sweep_args.values, "Values to try")->delimiter(',')->required();
  sweep_cmd->add_option("--graphs", sweep_graphs, "Comma-separated labelled test graphs")->required();
  sweep_cmd->add_option("--train", sweep_train, "Comma-separated training graphs (hops/hidden)");
  sweep_cmd->add_option("--checkpoint", sweep_args.checkpoint, "Trained checkpoint (n_k/rounds)");
  sweep_cmd->add_option("--mode", sweep_args.mode, "fewshot or zeroshot")->capture_default_str();
  sweep_cmd->add_option("--repeats", sweep_args.repeats, "Repeats per value")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_args.seed, "Base seed")->capture_default_str();
  sweep_cmd->add_option("--config", sweep_args.config, "Run config JSON");
  sweep_cmd->add_option("--out", sweep_args.output, "Table JSON");

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "Write aligned features, embeddings, attention or edges as CSV");
  export_cmd->add_option("--graph", export_args.graph, "Graph")->required();
  export_cmd->add_option("--out", export_args.output, "CSV path")->required();
  export_cmd->add_option("--checkpoint", export_args.checkpoint, "Trained checkpoint");
  export_cmd->add_option("--config", export_args.config, "Run config JSON");
  export_cmd->add_option("--normal-ids", export_args.normal_ids, "Context ids for --attention");
  export_cmd->add_flag("--aligned", export_args.aligned, "Aligned feature matrix");
  export_cmd->add_flag("--embeddings", export_args.embeddings, "Encoder representations H");
  export_cmd->add_flag("--attention", export_args.attention, "Query x context attention weights");
  export_cmd->add_flag("--edges", export_args.edges, "Undirected edge list");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*inject_cmd) return cmd_inject(inject_args, out);
    if (*synth_cmd) return cmd_synth(synth_args, out);
    if (*train_cmd) return cmd_train(train_args, out);
    if (*score_cmd) {
      score_args.normal_ids_given = ids_opt->count() > 0;
      return cmd_score(score_args, out);
    }
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*bench_cmd) return cmd_bench(bench_args, out);
    if (*sweep_cmd) {
      sweep_args.graphs = split_list(sweep_graphs);
      sweep_args.train_graphs = split_list(sweep_train);
      return cmd_sweep(sweep_args, out);
    }
    if (*export_cmd) return cmd_export(export_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.category()) {
      case ErrorCategory::Config: return kExitConfig;
      case ErrorCategory::Data: return kExitData;
      case ErrorCategory::Numeric: return kExitNumeric;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace gad::cli
