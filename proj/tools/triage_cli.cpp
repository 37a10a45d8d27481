#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "json.hpp"
#include "triage/attributes.hpp"
#include "triage/classifiers.hpp"
#include "triage/experiment.hpp"
#include "triage/io.hpp"
#include "triage/metrics.hpp"
#include "triage/order_prediction.hpp"
#include "triage/parallel.hpp"
#include "triage/reduction.hpp"

namespace {

using namespace triage;
using nlohmann::json;

int g_verbosity = 0;

std::ostream& info() { return std::cerr; }

json report_to_json(const RawBugReport& r) {
  json j = {{"id", r.id},
            {"summary", r.summary},
            {"description", r.description},
            {"status", r.status},
            {"resolution", r.resolution},
            {"assigned_to", r.assigned_to},
            {"reporter", r.reporter},
            {"product", r.product},
            {"component", r.component},
            {"severity", r.severity},
            {"priority", r.priority},
            {"opened_at", r.opened_at},
            {"duplicate_of", nullptr}};
  if (r.duplicate_of) j["duplicate_of"] = *r.duplicate_of;
  return j;
}

void write_reports_file(const std::vector<RawBugReport>& reports,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& r : reports) out << report_to_json(r).dump() << "\n";
}

StopWords stop_words_for(const std::string& path) {
  return path.empty() ? bundled_stop_words() : load_stop_words_file(path);
}

struct IngestArgs {
  std::string input, output, stopwords, audit, resolutions = "FIXED,DUPLICATE";
  int min_fixes = 10;
};

int run_ingest(const IngestArgs& args) {
  const ParsedReports parsed = parse_reports_file(args.input);
  for (const auto& e : parsed.errors) {
    info() << "line " << e.line << ": " << e.message << "\n";
  }
  FilterPolicy policy;
  policy.min_fixes_per_developer = args.min_fixes;
  policy.keep_resolutions.clear();
  std::stringstream ss(args.resolutions);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) policy.keep_resolutions.insert(item);
  }
  const auto filtered = filter_reports(parsed.reports, policy);
  const CorpusBuild build = build_corpus(filtered, stop_words_for(args.stopwords));
  save_corpus_file(build.corpus, args.output);
  if (!args.audit.empty()) {
    std::ofstream out(args.audit);
    if (!out) throw DataError("cannot open for writing: " + args.audit);
    write_audit_jsonl(build.audit, out);
  }
  std::cout << "reports=" << build.corpus.doc_count()
            << " words=" << build.corpus.word_count()
            << " developers=" << build.corpus.present_classes().size() << "\n";
  return 0;
}

struct SynthArgs {
  std::string output, format = "corpus";
  SyntheticSpec spec;
};

int run_synth(const SynthArgs& args) {
  const auto reports = generate_synthetic_corpus(args.spec);
  if (args.format == "reports") {
    write_reports_file(reports, args.output);
    std::cout << "reports=" << reports.size() << "\n";
    return 0;
  }
  if (args.format != "corpus") throw DataError("synth format must be corpus or reports");
  const CorpusBuild build = build_corpus(reports, bundled_stop_words());
  save_corpus_file(build.corpus, args.output);
  std::cout << "reports=" << build.corpus.doc_count()
            << " words=" << build.corpus.word_count()
            << " developers=" << build.corpus.present_classes().size() << "\n";
  return 0;
}

struct ReduceArgs {
  std::string corpus, output, order = "fs_is", fs = "ch", is = "icf";
  std::string report, removals, blanks;
  double word_rate = 0.30, bug_rate = 0.50;
  std::uint64_t seed = 0;
};

int run_reduce(const ReduceArgs& args) {
  const Corpus corpus = load_corpus_file(args.corpus);
  ReductionPlan plan;
  plan.order = order_from_string(args.order);
  plan.fs = fs_from_string(args.fs);
  plan.is = is_from_string(args.is);
  plan.word_rate = args.word_rate;
  plan.bug_rate = args.bug_rate;
  plan.seed = args.seed;
  const ReducedCorpus reduced = reduce(corpus, plan);
  save_corpus_file(reduced.corpus, args.output);
  if (!args.report.empty()) {
    std::ofstream out(args.report);
    if (!out) throw DataError("cannot open for writing: " + args.report);
    write_reduction_report(reduced.audit, out);
  }
  if (!args.removals.empty()) {
    std::ofstream out(args.removals);
    if (!out) throw DataError("cannot open for writing: " + args.removals);
    write_removals_csv(reduced.audit.removed_instances, out);
  }
  if (!args.blanks.empty()) {
    std::ofstream out(args.blanks);
    if (!out) throw DataError("cannot open for writing: " + args.blanks);
    write_audit_jsonl(reduced.audit.blank_reports, out);
  }
  write_reduction_report(reduced.audit, std::cout);
  return 0;
}

struct TriageArgs {
  std::string corpus, model_out, classifier = "nb", recommend_input, stopwords;
  int k = 5;
  ClassifierParams params;
  std::string model_in;
};

int run_triage(const TriageArgs& args) {
  TriageModel model;
  if (!args.model_in.empty()) {
    model = load_model_file(args.model_in);
  } else {
    const Corpus corpus = load_corpus_file(args.corpus);
    model = train_classifier(corpus, classifier_from_string(args.classifier), args.params);
    if (!args.model_out.empty()) save_model_file(model, args.model_out);
    info() << "trained " << to_string(model.kind) << " on " << corpus.doc_count()
           << " reports, " << model.class_count() << " developers\n";
  }
  if (!args.recommend_input.empty()) {
    const StopWords& stops = stop_words_for(args.stopwords);
    const ParsedReports parsed = parse_reports_file(args.recommend_input);
    for (const auto& e : parsed.errors) {
      info() << "line " << e.line << ": " << e.message << "\n";
    }
    for (const auto& r : parsed.reports) {
      const auto counts = tokenize(r.summary + " " + r.description, stops);
      SparseRow query(static_cast<Eigen::Index>(model.word_count()));
      std::vector<std::pair<int, double>> cells;
      std::unordered_map<std::string, int> index;
      for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
        index.emplace(model.vocabulary[i], static_cast<int>(i));
      }
      for (const auto& [word, tf] : counts) {
        auto it = index.find(word);
        if (it != index.end()) cells.emplace_back(it->second, tf);
      }
      std::sort(cells.begin(), cells.end());
      for (const auto& [col, tf] : cells) query.insertBack(col) = tf;
      const RecommendationList list = recommend(model, query, args.k);
      std::cout << r.id << "\t";
      for (std::size_t i = 0; i < list.entries.size(); ++i) {
        std::cout << (i ? "," : "") << list.entries[i].developer;
      }
      std::cout << "\n";
    }
  }
  return 0;
}

struct EvalArgs {
  std::string model, test, origin_model;
  int k_max = 5;
};

int run_eval(const EvalArgs& args) {
  const TriageModel model = load_model_file(args.model);
  const Corpus test = load_corpus_file(args.test);
  const AccuracyCurve curve = evaluate_curve(model, test, args.k_max);
  AccuracyCurve origin;
  const bool with_loss = !args.origin_model.empty();
  if (with_loss) {
    origin = evaluate_curve(load_model_file(args.origin_model), test, args.k_max);
  }
  std::cout << "k,accuracy" << (with_loss ? ",origin_accuracy,loss" : "") << "\n";
  for (int k = 0; k < args.k_max; ++k) {
    const auto i = static_cast<std::size_t>(k);
    std::cout << (k + 1) << "," << format_double(curve.accuracy[i]);
    if (with_loss) {
      std::cout << "," << format_double(origin.accuracy[i]) << ","
                << format_double(origin.accuracy[i] > 0.0
                                     ? loss_k(origin.accuracy[i], curve.accuracy[i])
                                     : 0.0);
    }
    std::cout << "\n";
  }
  return 0;
}

struct AttrsArgs {
  std::string corpus, reports, output;
  std::size_t unit_size = 5000;
  std::int64_t max_window = -1;
  int min_fixes = 10;
};

int run_attrs(const AttrsArgs& args) {
  AttributeTable table;
  if (!args.corpus.empty()) {
    table.dataset_ids.push_back("corpus");
    table.rows.push_back(extract_attributes(load_corpus_file(args.corpus)));
  } else if (!args.reports.empty()) {
    const ParsedReports parsed = parse_reports_file(args.reports);
    auto units = split_bug_units(parsed.reports, args.unit_size);
    const auto max_window = args.max_window < 0
                                ? units.size()
                                : static_cast<std::size_t>(args.max_window);
    const auto datasets = enumerate_window_datasets(units, max_window);
    FilterPolicy policy;
    policy.min_fixes_per_developer = args.min_fixes;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      const std::string id = "w" + std::to_string(d / units.size() + 1) + "_s" +
                             std::to_string(d % units.size());
      try {
        const auto filtered = filter_reports(datasets[d], policy);
        const CorpusBuild build = build_corpus(filtered, bundled_stop_words());
        table.rows.push_back(extract_attributes(build.corpus));
        table.dataset_ids.push_back(id);
      } catch (const DataError& e) {
        info() << "skipping " << id << ": " << e.what() << "\n";
      }
    }
    if (table.rows.empty()) throw DataError("every window dataset was skipped");
  } else {
    throw DataError("attrs: need --corpus or --reports");
  }
  if (args.output.empty()) {
    save_attribute_table(table, std::cout);
  } else {
    save_attribute_table_file(table, args.output);
    info() << "wrote " << table.rows.size() << " rows to " << args.output << "\n";
  }
  return 0;
}

struct LabelArgs {
  std::string reports, output;
  std::size_t unit_size = 5000;
  std::int64_t max_window = -1;
  int min_fixes = 10;
  std::string fs = "ch", is = "icf", classifier = "nb";
  double word_rate = 0.30, bug_rate = 0.50;
  int k_max = 5;
  std::uint64_t seed = 0;
};

int run_label_orders(const LabelArgs& args) {
  const ParsedReports parsed = parse_reports_file(args.reports);
  auto units = split_bug_units(parsed.reports, args.unit_size);
  const auto max_window =
      args.max_window < 0 ? units.size() : static_cast<std::size_t>(args.max_window);
  const auto datasets = enumerate_window_datasets(units, max_window);

  FilterPolicy policy;
  policy.min_fixes_per_developer = args.min_fixes;
  ReductionPlan plan;
  plan.fs = fs_from_string(args.fs);
  plan.is = is_from_string(args.is);
  plan.word_rate = args.word_rate;
  plan.bug_rate = args.bug_rate;
  plan.seed = args.seed;
  const auto classifier = classifier_from_string(args.classifier);

  AttributeTable table;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const std::string id = "w" + std::to_string(d / units.size() + 1) + "_s" +
                           std::to_string(d % units.size());
    try {
      const auto filtered = filter_reports(datasets[d], policy);
      const CorpusBuild build = build_corpus(filtered, bundled_stop_words());
      table.rows.push_back(extract_attributes(build.corpus));
      table.labels.push_back(
          label_reduction_order(build.corpus, plan, classifier, args.k_max));
      table.dataset_ids.push_back(id);
    } catch (const DataError& e) {
      info() << "skipping " << id << ": " << e.what() << "\n";
    }
  }
  if (table.rows.empty()) throw DataError("every window dataset was skipped");
  if (args.output.empty()) {
    save_attribute_table(table, std::cout);
  } else {
    save_attribute_table_file(table, args.output);
    info() << "labeled " << table.rows.size() << " datasets\n";
  }
  return 0;
}

struct TrainOrderArgs {
  std::string table, output, classifier = "c45";
  int folds = 0;  // 0: no cross validation, train on everything
  int rounds = 10;
  std::uint64_t seed = 0;
};

int run_train_order(const TrainOrderArgs& args) {
  const AttributeTable table = load_attribute_table_file(args.table);
  if (table.labels.empty()) throw DataError("attribute table has no label column");
  const NormalizedAttributes norm = normalize_attributes(table.rows);
  const auto kind = order_classifier_from_string(args.classifier);

  if (args.folds > 1) {
    CvConfig cv;
    cv.kind = kind;
    cv.folds = args.folds;
    cv.rounds = args.rounds;
    cv.seed = args.seed;
    const CvResult result = cross_validate(norm.rows, table.labels, norm.bounds, cv);
    std::cout << "class,precision,recall,f1,accuracy\n";
    for (int cls = 0; cls < 2; ++cls) {
      const auto i = static_cast<std::size_t>(cls);
      std::cout << to_string(static_cast<OrderLabel>(cls)) << ","
                << format_double(result.metrics.precision[i]) << ","
                << format_double(result.metrics.recall[i]) << ","
                << format_double(result.metrics.f1[i]) << ","
                << format_double(result.metrics.accuracy) << "\n";
    }
    for (const auto& w : result.warnings) info() << w << "\n";
  }
  if (!args.output.empty()) {
    const OrderModel model = train_order_model(norm.rows, table.labels, norm.bounds,
                                               kind, args.rounds, args.seed);
    save_order_model_file(model, args.output);
    info() << "wrote order model to " << args.output << "\n";
  }
  return 0;
}

struct PredictOrderArgs {
  std::string model, corpus;
};

int run_predict_order(const PredictOrderArgs& args) {
  const OrderModel model = load_order_model_file(args.model);
  const Corpus corpus = load_corpus_file(args.corpus);
  const DatasetAttributes attrs = extract_attributes(corpus);
  const OrderLabel label = model.predict(attrs);
  if (g_verbosity > 0) {
    const Eigen::VectorXd x = apply_bounds(attrs, model.bounds);
    Eigen::VectorXd votes;
    if (model.tree) {
      votes = model.tree->leaf_weights(x);
    } else if (model.ensemble) {
      votes = model.ensemble->vote_scores(x);
    }
    info() << "votes: FS->IS=" << votes(0) << " IS->FS=" << votes(1) << "\n";
  }
  std::cout << to_string(label) << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::vector<std::string> overrides;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  std::string path = args.config;
  if (const char* env = std::getenv("TRIAGE_CONFIG"); env && *env) path = env;
  if (path.empty()) throw ConfigError("experiment: no config file given");
  Config config = Config::from_file(path);
  for (const auto& o : args.overrides) config.apply_override(o);
  const ExperimentReport report = run_experiment(config);
  for (const auto& t : report.tables) info() << "wrote " << t << "\n";
  std::cout << report.manifest_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bug triage data reduction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--seed", seed, "seed for every randomized step");
  app.add_option("--threads", threads, "worker thread budget (0: hardware)");
  app.add_flag("-v,--verbose", g_verbosity, "more diagnostics on stderr");

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "build a corpus from a report dump");
  cmd_ingest->add_option("--input", ingest.input, "JSON Lines report dump")->required();
  cmd_ingest->add_option("--output", ingest.output, "corpus file to write")->required();
  cmd_ingest->add_option("--stopwords", ingest.stopwords, "stop-word list override");
  cmd_ingest->add_option("--min-fixes", ingest.min_fixes, "minimum fixed reports per developer");
  cmd_ingest->add_option("--resolutions", ingest.resolutions, "resolutions to keep");
  cmd_ingest->add_option("--audit", ingest.audit, "blank-report audit JSONL");

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic corpus");
  cmd_synth->add_option("--output", synth.output, "file to write")->required();
  cmd_synth->add_option("--format", synth.format, "corpus or reports");
  cmd_synth->add_option("--classes", synth.spec.n_classes, "developer count");
  cmd_synth->add_option("--docs-per-class", synth.spec.docs_per_class, "reports per developer");
  cmd_synth->add_option("--vocab-per-class", synth.spec.vocab_per_class, "signature words per developer");
  cmd_synth->add_option("--noise", synth.spec.noise_rate, "noise token rate in [0,1]");

  ReduceArgs reduce_args;
  auto* cmd_reduce = app.add_subcommand("reduce", "reduce a training corpus");
  cmd_reduce->add_option("--corpus", reduce_args.corpus, "input corpus")->required();
  cmd_reduce->add_option("--output", reduce_args.output, "reduced corpus")->required();
  cmd_reduce->add_option("--order", reduce_args.order, "fs_is or is_fs");
  cmd_reduce->add_option("--fs", reduce_args.fs, "ig, ch, su, or rf");
  cmd_reduce->add_option("--is", reduce_args.is, "icf, lvq, drop, or pop");
  cmd_reduce->add_option("--word-rate", reduce_args.word_rate, "kept word fraction");
  cmd_reduce->add_option("--bug-rate", reduce_args.bug_rate, "kept report fraction");
  cmd_reduce->add_option("--report", reduce_args.report, "reduction report JSON");
  cmd_reduce->add_option("--audit-removals", reduce_args.removals, "removal CSV");
  cmd_reduce->add_option("--audit-blanks", reduce_args.blanks, "blank-report JSONL");

  TriageArgs triage_args;
  auto* cmd_triage = app.add_subcommand("triage", "train a recommender or recommend developers");
  cmd_triage->add_option("--corpus", triage_args.corpus, "training corpus");
  cmd_triage->add_option("--model-out", triage_args.model_out, "model file to write");
  cmd_triage->add_option("--model-in", triage_args.model_in, "trained model to reuse");
  cmd_triage->add_option("--classifier", triage_args.classifier, "nb, knn, or svm");
  cmd_triage->add_option("--recommend", triage_args.recommend_input, "reports to triage");
  cmd_triage->add_option("--stopwords", triage_args.stopwords, "stop-word list override");
  cmd_triage->add_option("-k", triage_args.k, "recommendation list size");
  cmd_triage->add_option("--nb-smoothing", triage_args.params.smoothing, "Laplace smoothing");
  cmd_triage->add_option("--knn-neighbors", triage_args.params.neighbors, "KNN neighbor count");
  cmd_triage->add_option("--svm-reg", triage_args.params.reg, "SVM regularization");
  cmd_triage->add_option("--svm-epochs", triage_args.params.epochs, "SVM epochs");

  EvalArgs eval_args;
  auto* cmd_eval = app.add_subcommand("eval", "accuracy of a model on a test corpus");
  cmd_eval->add_option("--model", eval_args.model, "model file")->required();
  cmd_eval->add_option("--test", eval_args.test, "test corpus")->required();
  cmd_eval->add_option("--k-max", eval_args.k_max, "largest recommendation list");
  cmd_eval->add_option("--origin-model", eval_args.origin_model, "baseline for loss");

  AttrsArgs attrs_args;
  auto* cmd_attrs = app.add_subcommand("attrs", "extract the 18 dataset attributes");
  cmd_attrs->add_option("--corpus", attrs_args.corpus, "corpus file");
  cmd_attrs->add_option("--reports", attrs_args.reports, "report dump for window datasets");
  cmd_attrs->add_option("--unit-size", attrs_args.unit_size, "bug unit size");
  cmd_attrs->add_option("--max-window", attrs_args.max_window, "largest window");
  cmd_attrs->add_option("--min-fixes", attrs_args.min_fixes, "minimum fixed reports per developer");
  cmd_attrs->add_option("--output", attrs_args.output, "CSV file (default stdout)");

  LabelArgs label_args;
  auto* cmd_label = app.add_subcommand("label-orders", "label window datasets with the better order");
  cmd_label->add_option("--reports", label_args.reports, "report dump")->required();
  cmd_label->add_option("--unit-size", label_args.unit_size, "bug unit size");
  cmd_label->add_option("--max-window", label_args.max_window, "largest window");
  cmd_label->add_option("--min-fixes", label_args.min_fixes, "minimum fixed reports per developer");
  cmd_label->add_option("--fs", label_args.fs, "feature selection algorithm");
  cmd_label->add_option("--is", label_args.is, "instance selection algorithm");
  cmd_label->add_option("--classifier", label_args.classifier, "triage classifier");
  cmd_label->add_option("--word-rate", label_args.word_rate, "kept word fraction");
  cmd_label->add_option("--bug-rate", label_args.bug_rate, "kept report fraction");
  cmd_label->add_option("--k-max", label_args.k_max, "accuracy list depth");
  cmd_label->add_option("--output", label_args.output, "labeled CSV (default stdout)");

  TrainOrderArgs train_order_args;
  auto* cmd_train_order = app.add_subcommand("train-order", "train the order predictor");
  cmd_train_order->add_option("--table", train_order_args.table, "labeled attribute CSV")->required();
  cmd_train_order->add_option("--classifier", train_order_args.classifier,
                              "c45, ada_resampling, or ada_reweighting");
  cmd_train_order->add_option("--output", train_order_args.output, "order model file");
  cmd_train_order->add_option("--folds", train_order_args.folds, "cross-validation folds");
  cmd_train_order->add_option("--rounds", train_order_args.rounds, "boosting rounds");

  PredictOrderArgs predict_args;
  auto* cmd_predict = app.add_subcommand("predict-order", "predict the better reduction order");
  cmd_predict->add_option("--model", predict_args.model, "order model file")->required();
  cmd_predict->add_option("--corpus", predict_args.corpus, "corpus to predict for")->required();

  ExperimentArgs exp_args;
  auto* cmd_exp = app.add_subcommand("experiment", "run a configured experiment");
  cmd_exp->add_option("--config", exp_args.config, "key=value config file");
  cmd_exp->add_option("--set", exp_args.overrides, "config overrides (key=value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (threads > 0) set_thread_budget(threads);

  try {
    if (*cmd_ingest) return run_ingest(ingest);
    if (*cmd_synth) {
      synth.spec.seed = seed;
      return run_synth(synth);
    }
    if (*cmd_reduce) {
      reduce_args.seed = seed;
      return run_reduce(reduce_args);
    }
    if (*cmd_triage) {
      triage_args.params.seed = seed;
      if (triage_args.model_in.empty() && triage_args.corpus.empty()) {
        info() << "triage: need --corpus or --model-in\n";
        return 1;
      }
      return run_triage(triage_args);
    }
    if (*cmd_eval) return run_eval(eval_args);
    if (*cmd_attrs) return run_attrs(attrs_args);
    if (*cmd_label) {
      label_args.seed = seed;
      return run_label_orders(label_args);
    }
    if (*cmd_train_order) {
      train_order_args.seed = seed;
      return run_train_order(train_order_args);
    }
    if (*cmd_predict) return run_predict_order(predict_args);
    if (*cmd_exp) return run_experiment_cmd(exp_args);
  } catch (const ConfigError& e) {
    info() << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    info() << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    info() << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
