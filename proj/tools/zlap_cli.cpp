// Copyright 2026 The zlap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// zlap: command-line pipeline for zero-shot label propagation over
// precomputed embeddings.
//
//   synth -> normalize -> build-graph -> transductive
//                                     -> precompute -> sparsify -> predict
//   eval, baseline, average-prompts

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zlap/zlap.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kIo = 2, kNumerical = 3 };

int exit_code_for(zlap::ErrorKind kind) {
  using zlap::ErrorKind;
  switch (kind) {
    case ErrorKind::io:
    case ErrorKind::format:
    case ErrorKind::size:
    case ErrorKind::data:
      return kIo;
    case ErrorKind::numerical:
      return kNumerical;
    default:
      return kValidation;
  }
}

struct GraphFlags {
  std::size_t k = 5;
  std::optional<std::size_t> k_class;
  std::optional<double> gamma;
  std::optional<double> alpha;
  bool proxy_mode = false;
  std::string knn_mode = "separate";

  void add(CLI::App& cmd, bool with_search) {
    if (with_search) {
      cmd.add_option("--k", k, "image neighbors per node (proxy mode default 10)");
      cmd.add_option("--k-class", k_class, "class neighbors per image (defaults to --k)");
      cmd.add_option("--gamma", gamma, "power applied to cross-modal similarities");
      cmd.add_flag("--proxy-mode", proxy_mode,
                   "class file holds proxies: min-max scale edges, k=10, gamma=3");
      cmd.add_option("--knn-mode", knn_mode, "separate|joint")
          ->check(CLI::IsMember({"separate", "joint"}));
    }
    cmd.add_option("--alpha", alpha, "propagation weight in (0, 1)");
  }

  zlap::GraphConfig resolve(const CLI::App& cmd) const {
    zlap::GraphConfig cfg =
        proxy_mode ? zlap::GraphConfig::proxy_defaults() : zlap::GraphConfig::text_defaults();
    if (!proxy_mode || cmd.count("--k") > 0) cfg.k_image = k;
    cfg.k_class = k_class.value_or(cfg.k_image);
    if (gamma) cfg.gamma = *gamma;
    if (alpha) cfg.alpha = *alpha;
    cfg.knn_mode = knn_mode == "joint" ? zlap::KnnMode::joint : zlap::KnnMode::separate;
    cfg.validate();
    return cfg;
  }
};

struct SolveFlags {
  double tol = 1e-6;
  std::size_t max_iters = 1000;

  void add(CLI::App& cmd) {
    cmd.add_option("--tol", tol, "relative residual tolerance for CG");
    cmd.add_option("--max-iters", max_iters, "CG iteration cap");
  }

  zlap::SolveConfig resolve() const {
    zlap::SolveConfig cfg{tol, max_iters};
    cfg.validate();
    return cfg;
  }
};

void print_report(const zlap::EvalReport& r, const std::vector<std::string>& names) {
  std::printf("accuracy: %.2f%%\n", r.overall);
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const std::string name = c < names.size() ? names[c] : std::to_string(c);
    std::printf("  class %-24s %.2f%%\n", name.c_str(), r.per_class[c]);
  }
}

std::vector<std::string> maybe_names(const std::string& path) {
  return path.empty() ? std::vector<std::string>{} : zlap::load_class_names(path);
}

zlap::LabelVector labels_of(const std::vector<zlap::Prediction>& predictions) {
  zlap::LabelVector out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) out.push_back(p.label);
  return out;
}

zlap::LabelVector read_prediction_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw zlap::Error(zlap::ErrorKind::io, "cannot open '" + path + "'");
  zlap::LabelVector out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t q = 0;
    long long label = -1;
    if (!(ss >> q >> label) || label < 0)
      throw zlap::Error(zlap::ErrorKind::data, "'" + path + "' has a malformed line");
    out.push_back(static_cast<zlap::ClassIndex>(label));
  }
  return out;
}

// Appends "--key value" for every key=value line of the config file whose
// flag is not already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw zlap::Error(zlap::ErrorKind::io, "cannot open config '" + config_path + "'");
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw zlap::Error(zlap::ErrorKind::validation, "config line '" + line + "' has no '='");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) != 0) key = "--" + key;
    bool present = false;
    for (const auto& a : args) present = present || a == key || a.rfind(key + "=", 0) == 0;
    if (present) continue;
    if (value == "true" || value == "on") {
      args.push_back(key);
    } else if (value == "false" || value == "off") {
      continue;
    } else {
      args.push_back(key);
      args.push_back(value);
    }
  }
  return args;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zlap: zero-shot classification by label propagation over embeddings"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: ZLAP_THREADS or all cores)");
  app.set_help_all_flag("--help-all");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic bimodal dataset");
  zlap::SynthConfig synth_cfg;
  std::string synth_images, synth_classes, synth_labels;
  synth->add_option("--images", synth_images, "output image feature file")->required();
  synth->add_option("--classes", synth_classes, "output class feature file")->required();
  synth->add_option("--labels", synth_labels, "output label file")->required();
  synth->add_option("--num-classes", synth_cfg.classes, "number of classes");
  synth->add_option("--per-class", synth_cfg.images_per_class, "images per class");
  synth->add_option("--dim", synth_cfg.dim, "embedding dimension");
  synth->add_option("--spread", synth_cfg.cluster_spread, "per-image noise scale");
  synth->add_option("--gap", synth_cfg.modality_gap, "image-side modality shift");
  synth->add_option("--seed", synth_cfg.seed, "random seed");

  // normalize
  auto* normalize = app.add_subcommand("normalize", "L2-normalize the rows of a feature file");
  std::string norm_in, norm_out;
  normalize->add_option("--images", norm_in, "input feature file")->required();
  normalize->add_option("--out", norm_out, "output feature file")->required();

  // average-prompts
  auto* prompts = app.add_subcommand("average-prompts",
                                     "average per-class prompt embeddings into class vectors");
  std::string prompts_in, prompts_out;
  std::size_t prompts_per_class = 0;
  prompts->add_option("--prompts", prompts_in, "C*P prompt feature file")->required();
  prompts->add_option("--prompts-per-class", prompts_per_class, "P")->required();
  prompts->add_option("--out", prompts_out, "output class feature file")->required();

  // build-graph
  auto* build = app.add_subcommand("build-graph", "build the normalized bimodal kNN graph");
  GraphFlags build_flags;
  std::string build_images, build_classes, build_out, build_labels;
  std::size_t diagnose = 0;
  build->add_option("--images", build_images, "image features")->required();
  build->add_option("--classes", build_classes, "class features")->required();
  build->add_option("--out", build_out, "output graph file")->required();
  build->add_option("--labels", build_labels, "image labels (for --diagnose-paths)");
  build->add_option("--diagnose-paths", diagnose,
                    "report label-path coverage for path lengths 1..N (needs --labels)");
  build_flags.add(*build, true);

  // transductive
  auto* trans = app.add_subcommand("transductive", "label every image node of the graph");
  GraphFlags trans_flags;
  SolveFlags trans_solve;
  std::string trans_graph, trans_out, trans_labels, trans_names;
  bool trans_oracle = false;
  trans->add_option("--graph", trans_graph, "graph file")->required();
  trans->add_option("--out", trans_out, "output predictions (TSV)")->required();
  trans->add_option("--labels", trans_labels, "image labels for an accuracy report");
  trans->add_option("--class-names", trans_names, "class names for the report");
  trans->add_flag("--oracle", trans_oracle, "solve densely instead of CG (small graphs)");
  trans->add_flag("--proxy-mode", trans_flags.proxy_mode, "proxy-mode defaults");
  trans_flags.add(*trans, false);
  trans_solve.add(*trans);

  // precompute
  auto* pre = app.add_subcommand("precompute", "solve for the dense propagated score matrix");
  GraphFlags pre_flags;
  SolveFlags pre_solve;
  std::string pre_graph, pre_out;
  pre->add_option("--graph", pre_graph, "graph file")->required();
  pre->add_option("--out", pre_out, "output score file")->required();
  pre->add_flag("--proxy-mode", pre_flags.proxy_mode, "proxy-mode defaults");
  pre_flags.add(*pre, false);
  pre_solve.add(*pre);

  // sparsify
  auto* sparsify = app.add_subcommand("sparsify", "keep only the largest propagated scores");
  std::string sp_in, sp_out, sp_mode = "row";
  long long sp_xi = 1;
  sparsify->add_option("--yhat", sp_in, "dense score file")->required();
  sparsify->add_option("--out", sp_out, "output sparse score file")->required();
  sparsify->add_option("--sparsify-mode", sp_mode, "row|column|global")
      ->check(CLI::IsMember({"row", "column", "global"}));
  sparsify->add_option("--xi", sp_xi, "entries kept per row/column, or xi*N globally");

  // predict
  auto* predict = app.add_subcommand("predict", "inductive prediction for new queries");
  GraphFlags pred_flags;
  SolveFlags pred_solve;
  std::string pred_queries, pred_images, pred_classes, pred_yhat, pred_graph, pred_out,
      pred_labels, pred_names, pred_method;
  bool timing = false;
  predict->add_option("--queries", pred_queries, "query features")->required();
  predict->add_option("--images", pred_images, "image features the graph was built on")
      ->required();
  predict->add_option("--classes", pred_classes, "class features")->required();
  predict->add_option("--yhat", pred_yhat, "score file (fast path)");
  predict->add_option("--graph", pred_graph, "graph file (dual/primal paths)");
  predict->add_option("--method", pred_method, "fast|dual|primal (default: fast with --yhat)")
      ->check(CLI::IsMember({"fast", "dual", "primal"}));
  predict->add_option("--out", pred_out, "output predictions (TSV)")->required();
  predict->add_option("--labels", pred_labels, "query labels for an accuracy report");
  predict->add_option("--class-names", pred_names, "class names for the report");
  predict->add_flag("--timing", timing, "report per-query latency");
  pred_flags.add(*predict, true);
  pred_solve.add(*predict);

  // eval
  auto* eval = app.add_subcommand("eval", "accuracy of a predictions file");
  std::string eval_pred, eval_labels, eval_names;
  std::size_t eval_classes = 0;
  eval->add_option("--predictions", eval_pred, "predictions TSV")->required();
  eval->add_option("--labels", eval_labels, "ground-truth labels")->required();
  eval->add_option("--num-classes", eval_classes, "class count (default: inferred)");
  eval->add_option("--class-names", eval_names, "class names");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "nearest-class zero-shot predictions");
  std::string base_images, base_classes, base_out, base_labels;
  baseline->add_option("--images", base_images, "image features")->required();
  baseline->add_option("--classes", base_classes, "class features")->required();
  baseline->add_option("--out", base_out, "output predictions (TSV)")->required();
  baseline->add_option("--labels", base_labels, "labels for an accuracy report");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  } catch (const zlap::Error& e) {
    std::cerr << "zlap: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }

  try {
    zlap::set_thread_count(threads);

    if (*synth) {
      const auto data = zlap::generate_bimodal(synth_cfg);
      zlap::write_features(synth_images, data.images);
      zlap::write_features(synth_classes, data.classes);
      zlap::write_labels(synth_labels, data.labels);
      std::printf("wrote %zu images, %zu classes, dim %zu\n", data.images.rows(),
                  data.classes.rows(), data.images.dim());
    } else if (*normalize) {
      zlap::write_features(norm_out, zlap::l2_normalize(zlap::load_features(norm_in)));
    } else if (*prompts) {
      auto group = zlap::make_prompt_group(zlap::load_features(prompts_in), prompts_per_class);
      zlap::write_features(prompts_out, zlap::average_class_prompts(group));
    } else if (*build) {
      const auto cfg = build_flags.resolve(*build);
      const auto images = zlap::load_features(build_images);
      const auto classes = zlap::load_features(build_classes);
      const auto g = zlap::build_graph(images, classes, cfg);
      zlap::write_graph(build_out, g.normalized);
      std::printf("nodes: %zu (%zu classes, %zu images)\n", g.normalized.node_count(),
                  classes.rows(), images.rows());
      std::printf("directed edges: %zu\n", g.directed.nnz());
      std::printf("image-to-text edges: %zu\n", zlap::count_image_to_text_edges(g.directed));
      std::printf("symmetric entries: %zu\n", g.symmetric.nnz());
      std::printf("images linked to a class node: %.2f%%\n",
                  zlap::class_link_coverage(g.symmetric));
      if (diagnose > 0) {
        if (build_labels.empty())
          throw zlap::Error(zlap::ErrorKind::validation, "--diagnose-paths needs --labels");
        const auto labels = zlap::load_labels(build_labels);
        const auto pct = zlap::shortest_path_coverage(g.symmetric, labels, diagnose);
        std::printf("path length\timages reaching their class (%%)\n");
        for (std::size_t n = 0; n < pct.size(); ++n) std::printf("%zu\t%.2f\n", n + 1, pct[n]);
      }
    } else if (*trans) {
      const auto cfg = trans_flags.resolve(*trans);
      const auto solve = trans_solve.resolve();
      const auto graph = zlap::load_graph(trans_graph);
      const zlap::LaplacianOperator op(graph, cfg.alpha);
      const std::size_t C = graph.class_count();
      std::vector<zlap::Prediction> predictions;
      bool converged = true;
      if (trans_oracle) {
        for (std::size_t j = C; j < graph.node_count(); ++j) {
          std::vector<double> e(graph.node_count(), 0.0);
          e[j] = 1.0;
          auto z = zlap::dense_solve_oracle(graph, cfg.alpha, e);
          z.resize(C);
          predictions.push_back(zlap::make_prediction(std::move(z), true));
        }
      } else {
        auto result = zlap::transductive_predict(op, C, solve);
        converged = result.propagated.all_converged();
        predictions = std::move(result.predictions);
      }
      zlap::write_predictions(trans_out, predictions, !converged);
      if (!converged)
        std::fprintf(stderr, "zlap: warning: some class systems did not converge\n");
      if (!trans_labels.empty()) {
        const auto labels = zlap::load_labels(trans_labels);
        print_report(zlap::accuracy(labels_of(predictions), labels, C), maybe_names(trans_names));
      }
    } else if (*pre) {
      const auto cfg = pre_flags.resolve(*pre);
      const auto graph = zlap::load_graph(pre_graph);
      const zlap::LaplacianOperator op(graph, cfg.alpha);
      const auto result = zlap::precompute_Y(op, graph.class_count(), pre_solve.resolve());
      zlap::write_scores(pre_out, result.scores);
      if (!result.all_converged())
        std::fprintf(stderr, "zlap: warning: some class systems did not converge\n");
      std::printf("scores: %zu x %zu\n", result.scores.node_count(), result.scores.class_count());
    } else if (*sparsify) {
      if (sp_xi < 1) throw zlap::Error(zlap::ErrorKind::validation, "--xi must be at least 1");
      const zlap::SparsifyMode mode = sp_mode == "row"      ? zlap::SparsifyMode::row
                                      : sp_mode == "column" ? zlap::SparsifyMode::column
                                                            : zlap::SparsifyMode::global;
      const auto dense = zlap::load_scores(sp_in);
      const auto sparse = zlap::sparsify_Y(dense, mode, static_cast<std::size_t>(sp_xi));
      zlap::write_scores(sp_out, sparse);
      std::printf("kept %zu of %zu entries (%.3f%%)\n", sparse.stored(),
                  dense.node_count() * dense.class_count(),
                  100.0 * static_cast<double>(sparse.stored()) /
                      static_cast<double>(dense.node_count() * dense.class_count()));
    } else if (*predict) {
      const auto cfg = pred_flags.resolve(*predict);
      const auto solve = pred_solve.resolve();
      std::string method = pred_method;
      if (method.empty()) method = pred_yhat.empty() ? "dual" : "fast";
      if (method == "fast" && pred_yhat.empty())
        throw zlap::Error(zlap::ErrorKind::validation, "--method fast needs --yhat");
      if (method != "fast" && pred_graph.empty())
        throw zlap::Error(zlap::ErrorKind::validation, "--method " + method + " needs --graph");
      const auto queries = zlap::load_features(pred_queries);
      const auto images = zlap::load_features(pred_images);
      const auto classes = zlap::load_features(pred_classes);
      const auto start = std::chrono::steady_clock::now();
      const auto indicators = zlap::build_indicators(queries, images, classes, cfg);
      const double search_ms = elapsed_ms(start);
      std::vector<zlap::Prediction> predictions(indicators.size());
      bool converged = true;
      if (method == "fast") {
        const auto Y = zlap::load_scores(pred_yhat);
        const auto t0 = std::chrono::steady_clock::now();
        zlap::parallel_for(indicators.size(), [&](std::size_t q) {
          predictions[q] = zlap::fast_inductive_predict(indicators[q], Y);
        });
        if (timing)
          std::printf("fast path (%s scores): %.4f ms per query\n",
                      Y.layout() == zlap::ScoreLayout::dense ? "dense" : "sparse",
                      elapsed_ms(t0) / static_cast<double>(indicators.size()));
      } else {
        const auto graph = zlap::load_graph(pred_graph);
        const zlap::LaplacianOperator op(graph, cfg.alpha);
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t q = 0; q < indicators.size(); ++q) {
          predictions[q] = method == "dual"
                               ? zlap::dual_inductive_predict(op, indicators[q], solve)
                               : zlap::primal_inductive_predict(op, indicators[q], solve);
          converged = converged && predictions[q].converged;
        }
        if (timing)
          std::printf("%s path: %.4f ms per query\n", method.c_str(),
                      elapsed_ms(t0) / static_cast<double>(indicators.size()));
      }
      if (timing)
        std::printf("neighbor search: %.4f ms per query\n",
                    search_ms / static_cast<double>(indicators.size()));
      zlap::write_predictions(pred_out, predictions, !converged);
      if (!converged) std::fprintf(stderr, "zlap: warning: some solves did not converge\n");
      if (!pred_labels.empty()) {
        const auto labels = zlap::load_labels(pred_labels);
        print_report(zlap::accuracy(labels_of(predictions), labels, classes.rows()),
                     maybe_names(pred_names));
      }
    } else if (*eval) {
      const auto predicted = read_prediction_labels(eval_pred);
      const auto labels = zlap::load_labels(eval_labels);
      std::size_t C = eval_classes;
      if (C == 0) {
        for (auto l : labels) C = std::max<std::size_t>(C, l + 1);
        for (auto l : predicted) C = std::max<std::size_t>(C, l + 1);
      }
      print_report(zlap::accuracy(predicted, labels, C), maybe_names(eval_names));
    } else if (*baseline) {
      const auto images = zlap::load_features(base_images);
      const auto classes = zlap::load_features(base_classes);
      const auto labels = zlap::nearest_class_baseline(images, classes);
      std::vector<zlap::Prediction> predictions;
      predictions.reserve(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) {
        zlap::Prediction p;
        p.label = labels[i];
        p.scores.assign(classes.rows(), 0.0);
        p.scores[p.label] = zlap::dot(images.row(i), classes.row(p.label));
        predictions.push_back(std::move(p));
      }
      zlap::write_predictions(base_out, predictions, false);
      if (!base_labels.empty())
        print_report(zlap::accuracy(labels, zlap::load_labels(base_labels), classes.rows()), {});
    }
  } catch (const zlap::Error& e) {
    std::cerr << "zlap: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "zlap: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
