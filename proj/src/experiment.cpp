#include "triage/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "triage/attributes.hpp"
#include "triage/classifiers.hpp"
#include "triage/io.hpp"
#include "triage/metrics.hpp"
#include "triage/order_prediction.hpp"
#include "triage/reduction.hpp"

namespace triage {

namespace fs = std::filesystem;
using nlohmann::json;

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    config.entries_[key] = trim(stripped.substr(eq + 1));
  }
  return config;
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must be key=value: " + assignment);
  }
  entries_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::str(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::str_or(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::real_or(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + it->second);
  }
}

std::int64_t Config::int_or(const std::string& key, std::int64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + it->second);
  }
}

bool Config::bool_or(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key '" + key + "': not a boolean: " + it->second);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += "=";
    out += v;
    out += "\n";
  }
  return out;
}

std::string Config::hash() const {
  // FNV-1a, 64 bit.
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

struct StageTimer {
  std::map<std::string, double>& sink;
  std::string stage;
  Clock::time_point start = Clock::now();
  StageTimer(std::map<std::string, double>& s, std::string name)
      : sink(s), stage(std::move(name)) {}
  ~StageTimer() {
    sink[stage] += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  }
};

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : parse_list(text)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not a number: " + item);
    }
  }
  return out;
}

ReductionPlan plan_from_config(const Config& config, std::uint64_t seed) {
  ReductionPlan plan;
  plan.order = order_from_string(config.str_or("reduce.order", "fs_is"));
  plan.fs = fs_from_string(config.str_or("reduce.fs", "ch"));
  plan.is = is_from_string(config.str_or("reduce.is", "icf"));
  plan.word_rate = config.real_or("reduce.word_rate", 0.30);
  plan.bug_rate = config.real_or("reduce.bug_rate", 0.50);
  plan.seed = seed;
  plan.relief.neighbors = static_cast<int>(config.int_or("relief.neighbors", 5));
  plan.relief.samples = static_cast<int>(config.int_or("relief.samples", 0));
  plan.lvq.passes = static_cast<int>(config.int_or("lvq.passes", 10));
  plan.lvq.initial_rate = config.real_or("lvq.rate", 0.3);
  return plan;
}

ClassifierParams classifier_params_from_config(const Config& config, std::uint64_t seed) {
  ClassifierParams params;
  params.smoothing = config.real_or("nb.smoothing", 1.0);
  params.neighbors = static_cast<int>(config.int_or("knn.neighbors", 10));
  params.reg = config.real_or("svm.reg", 1e-4);
  params.epochs = static_cast<int>(config.int_or("svm.epochs", 10));
  params.learning_rate = config.real_or("svm.learning_rate", 0.5);
  params.seed = seed;
  return params;
}

std::string curve_row(const AccuracyCurve& curve, std::size_t k) {
  return format_double(curve.accuracy[k]);
}

struct Context {
  const Config& config;
  std::string out_dir;
  std::uint64_t seed;
  std::map<std::string, double>& wall;
  std::vector<std::string>& tables;
  json& manifest;
};

std::string table_path(Context& ctx, const std::string& name) {
  const std::string path = (fs::path(ctx.out_dir) / name).string();
  ctx.tables.push_back(path);
  return path;
}

SplitCorpus load_and_split(Context& ctx) {
  StageTimer timer(ctx.wall, "preprocessing");
  const Corpus corpus = load_corpus_file(ctx.config.str("corpus.path"));
  return chronological_split(corpus, ctx.config.real_or("split.fraction", 0.8));
}

void run_rate_sweep(Context& ctx) {
  const SplitCorpus split = load_and_split(ctx);
  const auto word_rates =
      parse_real_list(ctx.config.str_or("sweep.word_rates", "0.3,0.5,0.7"),
                      "sweep.word_rates");
  const auto bug_rates = parse_real_list(
      ctx.config.str_or("sweep.bug_rates", "0.1,0.3,0.5"), "sweep.bug_rates");
  const int k_max = static_cast<int>(ctx.config.int_or("triage.k_max", 5));
  const auto classifier =
      classifier_from_string(ctx.config.str_or("triage.classifier", "nb"));
  const auto params = classifier_params_from_config(ctx.config, ctx.seed);

  std::vector<std::vector<std::string>> rows;
  {
    StageTimer timer(ctx.wall, "classification");
    const TriageModel origin = train_classifier(split.train, classifier, params);
    const AccuracyCurve curve = evaluate_curve(origin, split.test, k_max);
    for (int k = 0; k < k_max; ++k) {
      rows.push_back({"1", "1", std::to_string(k + 1),
                      curve_row(curve, static_cast<std::size_t>(k))});
    }
  }
  for (double wr : word_rates) {
    for (double br : bug_rates) {
      ReductionPlan plan = plan_from_config(ctx.config, ctx.seed);
      plan.word_rate = wr;
      plan.bug_rate = br;
      ReducedCorpus reduced = [&] {
        StageTimer timer(ctx.wall, "reduction");
        return reduce(split.train, plan);
      }();
      StageTimer timer(ctx.wall, "classification");
      const TriageModel model = train_classifier(reduced.corpus, classifier, params);
      const AccuracyCurve curve = evaluate_curve(model, split.test, k_max);
      for (int k = 0; k < k_max; ++k) {
        rows.push_back({format_double(wr), format_double(br), std::to_string(k + 1),
                        curve_row(curve, static_cast<std::size_t>(k))});
      }
    }
  }
  std::ofstream out(table_path(ctx, "rate_sweep.csv"));
  write_csv(out, {"word_rate", "bug_rate", "k", "accuracy"}, rows);
}

void run_algorithm_matrix(Context& ctx) {
  const SplitCorpus split = load_and_split(ctx);
  const int k_max = static_cast<int>(ctx.config.int_or("triage.k_max", 5));
  const auto classifier =
      classifier_from_string(ctx.config.str_or("triage.classifier", "nb"));
  const auto params = classifier_params_from_config(ctx.config, ctx.seed);
  const double word_rate = ctx.config.real_or("reduce.word_rate", 0.30);
  const double bug_rate = ctx.config.real_or("reduce.bug_rate", 0.50);

  std::vector<std::vector<std::string>> rows;
  auto append = [&](const std::string& technique, const std::string& kind,
                    const Corpus& train) {
    StageTimer timer(ctx.wall, "classification");
    const TriageModel model = train_classifier(train, classifier, params);
    const AccuracyCurve curve = evaluate_curve(model, split.test, k_max);
    for (int k = 0; k < k_max; ++k) {
      rows.push_back({technique, kind, std::to_string(k + 1),
                      curve_row(curve, static_cast<std::size_t>(k))});
    }
  };

  append("origin", "none", split.train);
  for (const auto& name :
       parse_list(ctx.config.str_or("matrix.fs_list", "ig,ch,su,rf"))) {
    ReductionPlan plan = plan_from_config(ctx.config, ctx.seed);
    plan.order = ReductionOrder::FsThenIs;
    plan.fs = fs_from_string(name);
    plan.word_rate = word_rate;
    plan.bug_rate = 1.0;
    ReducedCorpus reduced = [&] {
      StageTimer timer(ctx.wall, "reduction");
      return reduce(split.train, plan);
    }();
    append(name, "fs", reduced.corpus);
  }
  for (const auto& name :
       parse_list(ctx.config.str_or("matrix.is_list", "icf,lvq,drop,pop"))) {
    ReductionPlan plan = plan_from_config(ctx.config, ctx.seed);
    plan.order = ReductionOrder::IsThenFs;
    plan.is = is_from_string(name);
    plan.word_rate = 1.0;
    plan.bug_rate = bug_rate;
    ReducedCorpus reduced = [&] {
      StageTimer timer(ctx.wall, "reduction");
      return reduce(split.train, plan);
    }();
    append(name, "is", reduced.corpus);
  }
  std::ofstream out(table_path(ctx, "algorithm_matrix.csv"));
  write_csv(out, {"technique", "kind", "k", "accuracy"}, rows);
}

void run_order_compare(Context& ctx) {
  const SplitCorpus split = load_and_split(ctx);
  const int k_max = static_cast<int>(ctx.config.int_or("triage.k_max", 5));
  const auto classifier =
      classifier_from_string(ctx.config.str_or("triage.classifier", "nb"));
  const auto params = classifier_params_from_config(ctx.config, ctx.seed);

  std::vector<std::vector<std::string>> rows;
  for (const auto& fs_name :
       parse_list(ctx.config.str_or("order.fs_list", "ig,ch,su,rf"))) {
    for (const auto& is_name :
         parse_list(ctx.config.str_or("order.is_list", "icf,lvq,drop,pop"))) {
      ReductionPlan plan = plan_from_config(ctx.config, ctx.seed);
      plan.fs = fs_from_string(fs_name);
      plan.is = is_from_string(is_name);
      StageTimer timer(ctx.wall, "reduction");
      const OrderComparison cmp =
          compare_orders(split.train, split.test, plan, classifier, k_max, params);
      for (int k = 0; k < k_max; ++k) {
        rows.push_back({fs_name, is_name, "fs_is", std::to_string(k + 1),
                        curve_row(cmp.fs_then_is, static_cast<std::size_t>(k))});
        rows.push_back({fs_name, is_name, "is_fs", std::to_string(k + 1),
                        curve_row(cmp.is_then_fs, static_cast<std::size_t>(k))});
      }
    }
  }
  std::ofstream out(table_path(ctx, "order_compare.csv"));
  write_csv(out, {"fs", "is", "order", "k", "accuracy"}, rows);
}

void run_loss_curve(Context& ctx) {
  Corpus corpus = [&] {
    StageTimer timer(ctx.wall, "preprocessing");
    return load_corpus_file(ctx.config.str("corpus.path"));
  }();
  const int k_max = static_cast<int>(ctx.config.int_or("triage.k_max", 3));
  const auto classifier =
      classifier_from_string(ctx.config.str_or("triage.classifier", "nb"));
  const auto params = classifier_params_from_config(ctx.config, ctx.seed);
  const auto k_list = parse_real_list(ctx.config.str_or("loss.k_list", "1,3"), "loss.k_list");
  const auto dev_count = corpus.present_classes().size();
  const auto s_max = std::min<std::int64_t>(
      ctx.config.int_or("loss.s_max", 30), static_cast<std::int64_t>(dev_count));

  std::vector<std::vector<std::string>> rows;
  for (std::int64_t s = 2; s <= s_max; ++s) {
    const Corpus subset = top_s_developer_subset(corpus, static_cast<int>(s));
    SplitCorpus split;
    try {
      split = chronological_split(subset, ctx.config.real_or("split.fraction", 0.8));
    } catch (const DataError&) {
      continue;
    }
    ReductionPlan plan = plan_from_config(ctx.config, ctx.seed);
    ReducedCorpus reduced = [&] {
      StageTimer timer(ctx.wall, "reduction");
      return reduce(split.train, plan);
    }();
    StageTimer timer(ctx.wall, "classification");
    const TriageModel origin = train_classifier(split.train, classifier, params);
    const TriageModel model = train_classifier(reduced.corpus, classifier, params);
    const AccuracyCurve origin_curve = evaluate_curve(origin, split.test, k_max);
    const AccuracyCurve reduced_curve = evaluate_curve(model, split.test, k_max);
    for (double kd : k_list) {
      const auto k = static_cast<std::size_t>(kd);
      if (k < 1 || k > static_cast<std::size_t>(k_max)) continue;
      const double o = origin_curve.accuracy[k - 1];
      const double r = reduced_curve.accuracy[k - 1];
      rows.push_back({std::to_string(s), std::to_string(k), format_double(o),
                      format_double(r),
                      format_double(o > 0.0 ? loss_k(o, r) : 0.0)});
    }
  }
  std::ofstream out(table_path(ctx, "loss_curve.csv"));
  write_csv(out, {"s", "k", "origin_accuracy", "reduced_accuracy", "loss"}, rows);
}

void run_timing(Context& ctx) {
  const SplitCorpus split = load_and_split(ctx);
  ReductionPlan plan = plan_from_config(ctx.config, ctx.seed);
  const auto params = classifier_params_from_config(ctx.config, ctx.seed);
  const int k_max = static_cast<int>(ctx.config.int_or("triage.k_max", 5));

  ReducedCorpus reduced = [&] {
    StageTimer timer(ctx.wall, "reduction");
    return reduce(split.train, plan);
  }();
  for (const auto& name : parse_list(ctx.config.str_or("timing.classifiers", "nb"))) {
    StageTimer timer(ctx.wall, "classification_" + name);
    const TriageModel model =
        train_classifier(reduced.corpus, classifier_from_string(name), params);
    evaluate_curve(model, split.test, k_max);
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& [stage, ms] : ctx.wall) {
    rows.push_back({stage, format_double(ms)});
  }
  std::ofstream out(table_path(ctx, "timing.csv"));
  write_csv(out, {"stage", "milliseconds"}, rows);
}

struct WindowData {
  AttributeTable table;
  Eigen::MatrixXd normalized;
  NormalizationBounds bounds;
  std::vector<std::string> skipped;
};

WindowData build_window_table(Context& ctx) {
  WindowData data;
  StageTimer timer(ctx.wall, "preprocessing");
  const ParsedReports parsed = parse_reports_file(ctx.config.str("reports.path"));
  if (parsed.reports.empty()) throw DataError("no parseable reports");

  FilterPolicy policy;
  policy.min_fixes_per_developer =
      static_cast<int>(ctx.config.int_or("filter.min_fixes", 10));
  const auto unit_size =
      static_cast<std::size_t>(ctx.config.int_or("units.size", 5000));
  auto units = split_bug_units(parsed.reports, unit_size);
  const auto max_window = static_cast<std::size_t>(
      ctx.config.int_or("units.max_window", static_cast<std::int64_t>(units.size())));
  const auto datasets = enumerate_window_datasets(units, max_window);

  ReductionPlan plan = plan_from_config(ctx.config, ctx.seed);
  const auto classifier =
      classifier_from_string(ctx.config.str_or("triage.classifier", "nb"));
  const auto params = classifier_params_from_config(ctx.config, ctx.seed);
  const int k_max = static_cast<int>(ctx.config.int_or("order.k_max", 5));

  const auto unit_count = units.size();
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const std::size_t window = d / unit_count + 1;
    const std::size_t start = d % unit_count;
    const std::string id = "w" + std::to_string(window) + "_s" + std::to_string(start);
    try {
      const auto filtered = filter_reports(datasets[d], policy);
      const CorpusBuild build = build_corpus(filtered, bundled_stop_words());
      data.table.rows.push_back(extract_attributes(build.corpus));
      data.table.labels.push_back(
          label_reduction_order(build.corpus, plan, classifier, k_max, params));
      data.table.dataset_ids.push_back(id);
    } catch (const DataError& e) {
      data.skipped.push_back(id + ": " + e.what());
    }
  }
  if (data.table.rows.empty()) throw DataError("every window dataset was skipped");
  NormalizedAttributes norm = normalize_attributes(data.table.rows);
  data.normalized = std::move(norm.rows);
  data.bounds = std::move(norm.bounds);
  return data;
}

void run_order_cv(Context& ctx) {
  WindowData data = build_window_table(ctx);
  {
    std::ofstream out(table_path(ctx, "attributes.csv"));
    save_attribute_table(data.table, out);
  }
  std::vector<std::vector<std::string>> rows;
  StageTimer timer(ctx.wall, "classification");
  for (const auto& name : parse_list(ctx.config.str_or(
           "order.variants", "c45,ada_resampling,ada_reweighting"))) {
    CvConfig cv;
    cv.kind = order_classifier_from_string(name);
    cv.folds = static_cast<int>(ctx.config.int_or("order.folds", 10));
    cv.rounds = static_cast<int>(ctx.config.int_or("order.rounds", 10));
    cv.seed = ctx.seed;
    const CvResult result = cross_validate(data.normalized, data.table.labels,
                                           data.bounds, cv);
    for (int cls = 0; cls < 2; ++cls) {
      rows.push_back({name, to_string(static_cast<OrderLabel>(cls)),
                      format_double(result.metrics.precision[static_cast<std::size_t>(cls)]),
                      format_double(result.metrics.recall[static_cast<std::size_t>(cls)]),
                      format_double(result.metrics.f1[static_cast<std::size_t>(cls)]),
                      format_double(result.metrics.accuracy)});
    }
    for (const auto& warning : result.warnings) {
      ctx.manifest["warnings"].push_back(name + ": " + warning);
    }
  }
  std::ofstream out(table_path(ctx, "order_cv.csv"));
  write_csv(out, {"classifier", "class", "precision", "recall", "f1", "accuracy"}, rows);
  for (const auto& s : data.skipped) ctx.manifest["skipped_datasets"].push_back(s);
}

void run_top_node(Context& ctx) {
  WindowData data = build_window_table(ctx);
  {
    std::ofstream out(table_path(ctx, "attributes.csv"));
    save_attribute_table(data.table, out);
  }
  StageTimer timer(ctx.wall, "classification");
  CvConfig cv;
  cv.kind = order_classifier_from_string(ctx.config.str_or("order.variant", "c45"));
  cv.folds = static_cast<int>(ctx.config.int_or("order.folds", 10));
  cv.rounds = static_cast<int>(ctx.config.int_or("order.rounds", 10));
  cv.seed = ctx.seed;
  const CvResult result =
      cross_validate(data.normalized, data.table.labels, data.bounds, cv);
  const auto rows_raw = top_node_analysis(
      collect_trees(result.fold_models),
      static_cast<int>(ctx.config.int_or("top_node.max_level", 2)),
      static_cast<int>(ctx.config.int_or("top_node.min_frequency", 2)));
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rows_raw) {
    rows.push_back({std::to_string(r.level), std::to_string(r.frequency), r.code, r.name});
  }
  std::ofstream out(table_path(ctx, "top_node.csv"));
  write_csv(out, {"level", "frequency", "index", "name"}, rows);
  for (const auto& s : data.skipped) ctx.manifest["skipped_datasets"].push_back(s);
}

}  // namespace

ExperimentReport run_experiment(const Config& config) {
  ExperimentReport report;
  report.kind = config.str("experiment");
  report.out_dir = config.str("out.dir");
  fs::create_directories(report.out_dir);

  json manifest;
  manifest["experiment"] = report.kind;
  manifest["seed"] = config.int_or("seed", 0);
  manifest["config_hash"] = config.hash();
  manifest["config"] = config.entries();
  manifest["warnings"] = json::array();
  manifest["skipped_datasets"] = json::array();

  Context ctx{config,
              report.out_dir,
              static_cast<std::uint64_t>(config.int_or("seed", 0)),
              report.wall_clock_ms,
              report.tables,
              manifest};

  if (report.kind == "rate_sweep") {
    run_rate_sweep(ctx);
  } else if (report.kind == "algorithm_matrix") {
    run_algorithm_matrix(ctx);
  } else if (report.kind == "order_compare") {
    run_order_compare(ctx);
  } else if (report.kind == "loss_curve") {
    run_loss_curve(ctx);
  } else if (report.kind == "timing") {
    run_timing(ctx);
  } else if (report.kind == "order_cv") {
    run_order_cv(ctx);
  } else if (report.kind == "top_node") {
    run_top_node(ctx);
  } else {
    throw ConfigError("config key 'experiment': unknown kind: " + report.kind);
  }

  manifest["tables"] = report.tables;
  json wall;
  for (const auto& [stage, ms] : report.wall_clock_ms) wall[stage] = ms;
  manifest["wall_clock_ms"] = std::move(wall);

  report.manifest_path = (fs::path(report.out_dir) / "manifest.json").string();
  std::ofstream out(report.manifest_path);
  if (!out) throw DataError("cannot write manifest: " + report.manifest_path);
  out << manifest.dump(2) << "\n";
  return report;
}

}  // namespace triage
