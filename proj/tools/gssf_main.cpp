// Experiment CLI: graph/dataset generation, training, evaluation, gradient
// checks and stability diagnostics. Every command is a pure function of its
// flags, input files and seed; outputs embed the resolved configuration.
//
// Exit codes: 0 success, 1 usage/validation, 2 generation failure,
// 3 numerical abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gssf/data.hpp"
#include "gssf/diagnostics.hpp"
#include "gssf/errors.hpp"
#include "gssf/graph.hpp"
#include "gssf/models.hpp"
#include "gssf/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gssf;

namespace {

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("config: " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: " + path + ": expected a JSON object");
  return doc;
}

// Precedence: command-line flag > config-file value > built-in default.
template <typename T>
void overlay(const json& cfg, const CLI::Option* opt, const std::string& key, T& value) {
  if (opt->count() == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw std::invalid_argument(what + " path is required");
  if (!fs::exists(path)) throw std::invalid_argument(what + " file not found: " + path);
}

struct GenGraphArgs {
  long n = 50;
  int c = 5;
  double p = 0.8, q = 0.2;
  std::uint64_t seed = 0;
  std::string out = "graph.json";
  std::string config;
};

int cmd_gen_graph(const GenGraphArgs& a) {
  Rng rng = Rng(a.seed).child(seed_stage::kGraph);
  Graph g = sbm_generate(a.n, a.c, a.p, a.q, rng);
  const double rho = spectral_radius(g.adjacency);
  const json resolved{{"command", "gen-graph"}, {"n", a.n},       {"c", a.c},
                      {"p", a.p},               {"q", a.q},       {"seed", a.seed},
                      {"rng", Rng::algorithm()}};
  save_graph(g, a.out, resolved.dump());
  std::printf("wrote %s (n=%ld, communities=%d)\n", a.out.c_str(), a.n, a.c);
  std::printf("spectral_radius: %.12g\n", rho);
  return 0;
}

struct GenDataArgs {
  std::string graph;
  long n_train = 10240, n_val = 2560, n_test = 2560;
  int t_max = 50;
  std::uint64_t seed = 0;
  std::string out = "dataset.json";
  std::string config;
};

int cmd_gen_data(const GenDataArgs& a) {
  require_file(a.graph, "graph");
  const Graph g = load_graph(a.graph);
  if (!g.communities) {
    throw std::invalid_argument("gen-data: graph has no community labels");
  }
  const ShiftOperator s = normalize_shift(g);
  Rng rng = Rng(a.seed).child(seed_stage::kData);
  Dataset d = make_source_loc_dataset(g, s, a.n_train, a.n_val, a.n_test, a.t_max, rng);
  const json resolved{{"command", "gen-data"}, {"graph", a.graph},
                      {"train", a.n_train},    {"val", a.n_val},
                      {"test", a.n_test},      {"t_max", a.t_max},
                      {"seed", a.seed},        {"rng", Rng::algorithm()},
                      {"spectral_radius_raw", s.spectral_radius_estimate}};
  d.provenance = resolved.dump();
  save_dataset(d, a.out);
  std::printf("wrote %s (%zu samples, %ld/%ld/%ld split)\n", a.out.c_str(),
              d.samples.size(), a.n_train, a.n_val, a.n_test);
  return 0;
}

struct TrainArgs {
  std::string graph, data;
  std::string kind = "gcnn";
  int layers = 1;
  int features = 4;
  int order = 4;
  std::string activation = "relu";
  std::string state_activation = "relu";
  std::string output_activation = "relu";
  TrainConfig train_cfg;
  std::string outdir = "run";
  std::string config;
};

json resolved_train_config(const TrainArgs& a) {
  return json{{"command", "train"},
              {"graph", a.graph},
              {"data", a.data},
              {"kind", a.kind},
              {"layers", a.layers},
              {"features", a.features},
              {"order", a.order},
              {"activation", a.activation},
              {"state_activation", a.state_activation},
              {"output_activation", a.output_activation},
              {"epochs", a.train_cfg.epochs},
              {"batch_size", a.train_cfg.batch_size},
              {"learning_rate", a.train_cfg.learning_rate},
              {"beta1", a.train_cfg.beta1},
              {"beta2", a.train_cfg.beta2},
              {"epsilon", a.train_cfg.epsilon},
              {"seed", a.train_cfg.seed},
              {"rng", Rng::algorithm()},
              {"outdir", a.outdir}};
}

int cmd_train(const TrainArgs& a) {
  require_file(a.graph, "graph");
  require_file(a.data, "dataset");
  const Graph g = load_graph(a.graph);
  const ShiftOperator s = normalize_shift(g);
  const Dataset dataset = load_dataset(a.data);
  if (dataset.n != g.n) {
    throw std::invalid_argument("train: dataset signals do not match graph size");
  }

  std::vector<LayerSpec> specs;
  for (int l = 0; l < a.layers; ++l) {
    LayerSpec spec;
    spec.kind = filter_kind_from_string(a.kind);
    spec.in_features = l == 0 ? 1 : a.features;
    spec.out_features = a.features;
    spec.order = a.order;
    spec.sigma = activation_from_string(a.activation);
    spec.sigma_w = activation_from_string(a.state_activation);
    spec.sigma_y = activation_from_string(a.output_activation);
    specs.push_back(spec);
  }
  Rng init_rng = Rng(a.train_cfg.seed).child(seed_stage::kInit);
  Model model = init_model(specs, g.n, dataset.classes, init_rng);

  const TrainReport report = train(model, s, dataset, a.train_cfg);

  fs::create_directories(a.outdir);
  const json resolved = resolved_train_config(a);
  json meta = resolved;
  meta["spectral_radius_raw"] = spectral_radius(g.adjacency);
  save_report_json(report, a.outdir + "/report.json", meta);
  save_report_csv(report, a.outdir + "/report.csv");
  save_checkpoint(model, a.outdir + "/checkpoint.json", meta);

  std::printf("epochs=%d best_epoch=%d best_val=%.4f test_accuracy=%.4f\n",
              a.train_cfg.epochs, report.best_epoch, report.best_val_accuracy,
              report.test_accuracy);
  std::printf("wall_seconds: %.2f\n", report.wall_seconds);
  std::printf("wrote %s/{report.json,report.csv,checkpoint.json}\n", a.outdir.c_str());
  return 0;
}

struct EvalArgs {
  std::string checkpoint, graph, data;
  std::string split = "test";
  std::string out;
  std::string config;
};

int cmd_eval(const EvalArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  require_file(a.graph, "graph");
  require_file(a.data, "dataset");
  const auto [model, meta] = load_checkpoint(a.checkpoint);
  const Graph g = load_graph(a.graph);
  if (g.n != model.n_nodes) {
    throw std::invalid_argument("eval: checkpoint was built for n=" +
                                std::to_string(model.n_nodes) + ", graph has n=" +
                                std::to_string(g.n));
  }
  const ShiftOperator s = normalize_shift(g);
  const Dataset dataset = load_dataset(a.data);
  if (dataset.n != g.n || dataset.classes != model.classes) {
    throw std::invalid_argument("eval: dataset shape does not match checkpoint");
  }
  const std::vector<Index>* split = nullptr;
  if (a.split == "train") split = &dataset.train;
  else if (a.split == "val") split = &dataset.val;
  else if (a.split == "test") split = &dataset.test;
  else throw std::invalid_argument("eval: split must be train/val/test");

  const EvalResult r = evaluate(model, s, dataset, *split);
  std::printf("accuracy: %.17g\n", r.accuracy);
  std::string csv = "true_class";
  for (int c = 0; c < model.classes; ++c) csv += ",pred_" + std::to_string(c);
  csv += "\n";
  for (int t = 0; t < model.classes; ++t) {
    csv += std::to_string(t);
    for (int c = 0; c < model.classes; ++c) csv += "," + std::to_string(r.confusion[t][c]);
    csv += "\n";
  }
  std::fputs(csv.c_str(), stdout);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw ParseError("eval: cannot open " + a.out);
    out << csv;
  }
  return 0;
}

struct GradCheckArgs {
  std::string kind = "all";
  int order = 0;  // 0: suite defaults
  int instances = 20;
  double step = 1e-5;
  double tolerance = 1e-5;
  std::uint64_t seed = 7;
  std::string config;
};

int cmd_gradcheck(const GradCheckArgs& a) {
  GradCheckOptions opts;
  if (a.kind != "all") opts.kinds = {filter_kind_from_string(a.kind)};
  if (a.order > 0) opts.orders = {a.order};
  opts.instances = a.instances;
  opts.step = a.step;
  opts.tolerance = a.tolerance;
  opts.seed = a.seed;
  const GradCheckReport report = run_gradient_checks(opts);
  std::printf("cases: %d\nworst_rel_error: %.3e\ntolerance: %.3e\n%s\n", report.cases,
              report.worst_rel_error, a.tolerance, report.passed ? "PASS" : "FAIL");
  return report.passed ? 0 : 1;
}

struct DiagnoseArgs {
  std::string graph;
  int order = 30;
  bool unnormalized = false;
  std::string input = "delta";  // delta | dominant | random
  long node = 0;
  std::string state_activation = "tanh";
  std::string output_activation = "tanh";
  std::uint64_t seed = 0;
  std::string outdir = "diagnostics";
  std::string config;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  require_file(a.graph, "graph");
  const Graph g = load_graph(a.graph);
  const ShiftOperator s = a.unnormalized ? make_shift(g.adjacency) : normalize_shift(g);

  Vector x;
  if (a.input == "delta") {
    if (a.node < 0 || a.node >= g.n) throw std::invalid_argument("diagnose: node out of range");
    x = Vector::Zero(g.n);
    x[a.node] = 1.0;
  } else if (a.input == "dominant") {
    x = power_iteration(s.matrix).vector;
  } else if (a.input == "random") {
    Rng rng = Rng(a.seed).child(seed_stage::kData);
    x = rng.uniform_vector(g.n, -1.0, 1.0).normalized();
  } else {
    throw std::invalid_argument("diagnose: input must be delta/dominant/random");
  }

  const StabilityReport report = state_norm_trace(s, x, a.order);

  Rng param_rng = Rng(a.seed).child(seed_stage::kInit);
  const auto gcnn = std::get<GcnnFilterParams>(
      init_filter_params(FilterKind::Gcnn, a.order, param_rng));
  const auto rsn = std::get<RsnFilterParams>(
      init_filter_params(FilterKind::Rsn, a.order, param_rng));
  const auto lssm = std::get<LssmFilterParams>(
      init_filter_params(FilterKind::Lssm, a.order, param_rng));
  const FilterTraceComparison cmp = compare_filter_traces(
      s, x, a.order, gcnn, rsn, lssm, activation_from_string(a.state_activation),
      activation_from_string(a.output_activation));

  fs::create_directories(a.outdir);
  save_stability_csv(report, a.outdir + "/trace.csv");
  const json resolved{{"command", "diagnose"},
                      {"graph", a.graph},
                      {"order", a.order},
                      {"normalized", !a.unnormalized},
                      {"input", a.input},
                      {"node", a.node},
                      {"state_activation", a.state_activation},
                      {"output_activation", a.output_activation},
                      {"seed", a.seed},
                      {"rng", Rng::algorithm()}};
  save_stability_json(report, a.outdir + "/trace.json", resolved);
  save_comparison_csv(cmp, a.outdir + "/compare.csv");
  std::printf("classification: %s\ngrowth_rate: %.12g\nspectral_radius: %.12g\n"
              "alignment: %.12g\n",
              to_string(report.classification).c_str(), report.growth_rate,
              report.spectral_radius, report.alignment);
  std::printf("wrote %s/{trace.csv,trace.json,compare.csv}\n", a.outdir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph state-space filters: generation, training and diagnostics"};
  app.require_subcommand(1);

  GenGraphArgs gg;
  GenDataArgs gd;
  TrainArgs tr;
  EvalArgs ev;
  GradCheckArgs gc;
  DiagnoseArgs dg;

  CLI::App* gen_graph = app.add_subcommand("gen-graph", "generate an SBM graph file");
  auto* gg_n = gen_graph->add_option("--n", gg.n, "node count");
  auto* gg_c = gen_graph->add_option("--c", gg.c, "community count (must divide n)");
  auto* gg_p = gen_graph->add_option("--p", gg.p, "intra-community edge probability");
  auto* gg_q = gen_graph->add_option("--q", gg.q, "inter-community edge probability");
  auto* gg_seed = gen_graph->add_option("--seed", gg.seed, "root seed");
  auto* gg_out = gen_graph->add_option("--out", gg.out, "output graph JSON");
  gen_graph->add_option("--config", gg.config, "flat JSON config file");

  CLI::App* gen_data = app.add_subcommand("gen-data", "generate a source-localization dataset");
  auto* gd_graph = gen_data->add_option("--graph", gd.graph, "graph JSON (with communities)");
  auto* gd_train = gen_data->add_option("--train", gd.n_train, "training samples");
  auto* gd_val = gen_data->add_option("--val", gd.n_val, "validation samples");
  auto* gd_test = gen_data->add_option("--test", gd.n_test, "test samples");
  auto* gd_tmax = gen_data->add_option("--t-max", gd.t_max, "max diffusion time");
  auto* gd_seed = gen_data->add_option("--seed", gd.seed, "root seed");
  auto* gd_out = gen_data->add_option("--out", gd.out, "output dataset JSON");
  gen_data->add_option("--config", gd.config, "flat JSON config file");

  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write report + checkpoint");
  auto* tr_graph = train_cmd->add_option("--graph", tr.graph, "graph JSON");
  auto* tr_data = train_cmd->add_option("--data", tr.data, "dataset JSON");
  auto* tr_kind = train_cmd->add_option("--kind", tr.kind, "gcnn|rsn|lssm");
  auto* tr_layers = train_cmd->add_option("--layers", tr.layers, "layer count");
  auto* tr_features = train_cmd->add_option("--features", tr.features, "features per layer");
  auto* tr_order = train_cmd->add_option("--order", tr.order, "filter order K");
  auto* tr_act = train_cmd->add_option("--activation", tr.activation, "layer nonlinearity");
  auto* tr_sact = train_cmd->add_option("--state-activation", tr.state_activation,
                                        "rsn state nonlinearity");
  auto* tr_oact = train_cmd->add_option("--output-activation", tr.output_activation,
                                        "rsn/lssm output nonlinearity");
  auto* tr_epochs = train_cmd->add_option("--epochs", tr.train_cfg.epochs, "epochs");
  auto* tr_batch = train_cmd->add_option("--batch-size", tr.train_cfg.batch_size, "batch size");
  auto* tr_lr = train_cmd->add_option("--lr", tr.train_cfg.learning_rate, "learning rate");
  auto* tr_b1 = train_cmd->add_option("--beta1", tr.train_cfg.beta1, "ADAM beta1");
  auto* tr_b2 = train_cmd->add_option("--beta2", tr.train_cfg.beta2, "ADAM beta2");
  auto* tr_eps = train_cmd->add_option("--epsilon", tr.train_cfg.epsilon, "ADAM epsilon");
  auto* tr_seed = train_cmd->add_option("--seed", tr.train_cfg.seed, "root seed");
  auto* tr_outdir = train_cmd->add_option("--outdir", tr.outdir, "output directory");
  train_cmd->add_option("--config", tr.config, "flat JSON config file");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  auto* ev_ckpt = eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint JSON");
  auto* ev_graph = eval_cmd->add_option("--graph", ev.graph, "graph JSON");
  auto* ev_data = eval_cmd->add_option("--data", ev.data, "dataset JSON");
  auto* ev_split = eval_cmd->add_option("--split", ev.split, "train|val|test");
  auto* ev_out = eval_cmd->add_option("--out", ev.out, "confusion CSV path");
  eval_cmd->add_option("--config", ev.config, "flat JSON config file");

  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient verification");
  auto* gc_kind = gradcheck_cmd->add_option("--kind", gc.kind, "gcnn|rsn|lssm|all");
  auto* gc_order = gradcheck_cmd->add_option("--order", gc.order, "filter order (0 = suite)");
  auto* gc_inst = gradcheck_cmd->add_option("--instances", gc.instances, "instances per case");
  auto* gc_step = gradcheck_cmd->add_option("--step", gc.step, "finite-difference step");
  auto* gc_tol = gradcheck_cmd->add_option("--tolerance", gc.tolerance, "pass threshold");
  auto* gc_seed = gradcheck_cmd->add_option("--seed", gc.seed, "root seed");
  gradcheck_cmd->add_option("--config", gc.config, "flat JSON config file");

  CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "state-norm stability traces");
  auto* dg_graph = diagnose_cmd->add_option("--graph", dg.graph, "graph JSON");
  auto* dg_order = diagnose_cmd->add_option("--order", dg.order, "trace length K");
  auto* dg_unnorm = diagnose_cmd->add_flag("--unnormalized", dg.unnormalized,
                                           "use the raw adjacency as shift");
  auto* dg_input = diagnose_cmd->add_option("--input", dg.input, "delta|dominant|random");
  auto* dg_node = diagnose_cmd->add_option("--node", dg.node, "delta location");
  auto* dg_sact = diagnose_cmd->add_option("--state-activation", dg.state_activation,
                                           "rsn state nonlinearity");
  auto* dg_oact = diagnose_cmd->add_option("--output-activation", dg.output_activation,
                                           "rsn/lssm output nonlinearity");
  auto* dg_seed = diagnose_cmd->add_option("--seed", dg.seed, "root seed");
  auto* dg_outdir = diagnose_cmd->add_option("--outdir", dg.outdir, "output directory");
  diagnose_cmd->add_option("--config", dg.config, "flat JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen_graph->parsed()) {
      const json cfg = load_config_file(gg.config);
      overlay(cfg, gg_n, "n", gg.n);
      overlay(cfg, gg_c, "c", gg.c);
      overlay(cfg, gg_p, "p", gg.p);
      overlay(cfg, gg_q, "q", gg.q);
      overlay(cfg, gg_seed, "seed", gg.seed);
      overlay(cfg, gg_out, "out", gg.out);
      return cmd_gen_graph(gg);
    }
    if (gen_data->parsed()) {
      const json cfg = load_config_file(gd.config);
      overlay(cfg, gd_graph, "graph", gd.graph);
      overlay(cfg, gd_train, "train", gd.n_train);
      overlay(cfg, gd_val, "val", gd.n_val);
      overlay(cfg, gd_test, "test", gd.n_test);
      overlay(cfg, gd_tmax, "t_max", gd.t_max);
      overlay(cfg, gd_seed, "seed", gd.seed);
      overlay(cfg, gd_out, "out", gd.out);
      return cmd_gen_data(gd);
    }
    if (train_cmd->parsed()) {
      const json cfg = load_config_file(tr.config);
      overlay(cfg, tr_graph, "graph", tr.graph);
      overlay(cfg, tr_data, "data", tr.data);
      overlay(cfg, tr_kind, "kind", tr.kind);
      overlay(cfg, tr_layers, "layers", tr.layers);
      overlay(cfg, tr_features, "features", tr.features);
      overlay(cfg, tr_order, "order", tr.order);
      overlay(cfg, tr_act, "activation", tr.activation);
      overlay(cfg, tr_sact, "state_activation", tr.state_activation);
      overlay(cfg, tr_oact, "output_activation", tr.output_activation);
      overlay(cfg, tr_epochs, "epochs", tr.train_cfg.epochs);
      overlay(cfg, tr_batch, "batch_size", tr.train_cfg.batch_size);
      overlay(cfg, tr_lr, "learning_rate", tr.train_cfg.learning_rate);
      overlay(cfg, tr_b1, "beta1", tr.train_cfg.beta1);
      overlay(cfg, tr_b2, "beta2", tr.train_cfg.beta2);
      overlay(cfg, tr_eps, "epsilon", tr.train_cfg.epsilon);
      overlay(cfg, tr_seed, "seed", tr.train_cfg.seed);
      overlay(cfg, tr_outdir, "outdir", tr.outdir);
      return cmd_train(tr);
    }
    if (eval_cmd->parsed()) {
      const json cfg = load_config_file(ev.config);
      overlay(cfg, ev_ckpt, "checkpoint", ev.checkpoint);
      overlay(cfg, ev_graph, "graph", ev.graph);
      overlay(cfg, ev_data, "data", ev.data);
      overlay(cfg, ev_split, "split", ev.split);
      overlay(cfg, ev_out, "out", ev.out);
      return cmd_eval(ev);
    }
    if (gradcheck_cmd->parsed()) {
      const json cfg = load_config_file(gc.config);
      overlay(cfg, gc_kind, "kind", gc.kind);
      overlay(cfg, gc_order, "order", gc.order);
      overlay(cfg, gc_inst, "instances", gc.instances);
      overlay(cfg, gc_step, "step", gc.step);
      overlay(cfg, gc_tol, "tolerance", gc.tolerance);
      overlay(cfg, gc_seed, "seed", gc.seed);
      return cmd_gradcheck(gc);
    }
    if (diagnose_cmd->parsed()) {
      const json cfg = load_config_file(dg.config);
      overlay(cfg, dg_graph, "graph", dg.graph);
      overlay(cfg, dg_order, "order", dg.order);
      overlay(cfg, dg_unnorm, "unnormalized", dg.unnormalized);
      overlay(cfg, dg_input, "input", dg.input);
      overlay(cfg, dg_node, "node", dg.node);
      overlay(cfg, dg_sact, "state_activation", dg.state_activation);
      overlay(cfg, dg_oact, "output_activation", dg.output_activation);
      overlay(cfg, dg_seed, "seed", dg.seed);
      overlay(cfg, dg_outdir, "outdir", dg.outdir);
      return cmd_diagnose(dg);
    }
  } catch (const GenerationError& e) {
    std::cerr << "generation failure: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
