#include "triage/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace triage {

using nlohmann::json;

namespace {

json corpus_to_json(const Corpus& corpus) {
  json docs = json::array();
  for (Eigen::Index i = 0; i < corpus.matrix.rows(); ++i) {
    json row = json::array();
    for (TermMatrix::InnerIterator it(corpus.matrix, i); it; ++it) {
      row.push_back({it.col(), it.value()});
    }
    docs.push_back(std::move(row));
  }
  json meta = json::array();
  for (const auto& d : corpus.meta) {
    json entry = {{"bug_id", d.bug_id},       {"reporter", d.reporter},
                  {"product", d.product},     {"component", d.component},
                  {"severity", d.severity},   {"priority", d.priority},
                  {"opened_at", d.opened_at}, {"duplicate_of", nullptr}};
    if (d.duplicate_of) entry["duplicate_of"] = *d.duplicate_of;
    meta.push_back(std::move(entry));
  }
  return {{"format", "triage.corpus"}, {"version", 1},
          {"vocabulary", corpus.vocabulary}, {"developers", corpus.developers},
          {"labels", corpus.labels},         {"docs", std::move(docs)},
          {"meta", std::move(meta)}};
}

void expect_format(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format || j.value("version", 0) != 1) {
    throw DataError(std::string("unrecognized file format, expected ") + format);
  }
}

Corpus corpus_from_json(const json& j) {
  expect_format(j, "triage.corpus");
  Corpus corpus;
  corpus.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  corpus.developers = j.at("developers").get<std::vector<std::string>>();
  corpus.labels = j.at("labels").get<std::vector<int>>();
  for (std::size_t i = 0; i < corpus.vocabulary.size(); ++i) {
    corpus.word_index.emplace(corpus.vocabulary[i], static_cast<int>(i));
  }
  const auto& docs = j.at("docs");
  std::vector<Eigen::Triplet<double>> cells;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& cell : docs[i]) {
      cells.emplace_back(static_cast<int>(i), cell.at(0).get<int>(),
                         cell.at(1).get<double>());
    }
  }
  corpus.matrix.resize(static_cast<Eigen::Index>(docs.size()),
                       static_cast<Eigen::Index>(corpus.vocabulary.size()));
  corpus.matrix.setFromTriplets(cells.begin(), cells.end());
  corpus.matrix.makeCompressed();
  for (const auto& entry : j.at("meta")) {
    DocMeta d;
    d.bug_id = entry.at("bug_id").get<std::int64_t>();
    d.reporter = entry.at("reporter").get<std::string>();
    d.product = entry.at("product").get<std::string>();
    d.component = entry.at("component").get<std::string>();
    d.severity = entry.at("severity").get<std::string>();
    d.priority = entry.at("priority").get<std::string>();
    d.opened_at = entry.at("opened_at").get<std::int64_t>();
    if (!entry.at("duplicate_of").is_null()) {
      d.duplicate_of = entry.at("duplicate_of").get<std::int64_t>();
    }
    corpus.meta.push_back(std::move(d));
  }
  corpus.check_invariants();
  return corpus;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols_hint = -1) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = cols_hint;
  if (rows > 0) cols = static_cast<Eigen::Index>(j[0].size());
  if (cols < 0) cols = 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json sparse_to_json(const TermMatrix& m) {
  json docs = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (TermMatrix::InnerIterator it(m, i); it; ++it) {
      row.push_back({it.col(), it.value()});
    }
    docs.push_back(std::move(row));
  }
  return docs;
}

TermMatrix sparse_from_json(const json& j, Eigen::Index cols) {
  std::vector<Eigen::Triplet<double>> cells;
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (const auto& cell : j[i]) {
      cells.emplace_back(static_cast<int>(i), cell.at(0).get<int>(),
                         cell.at(1).get<double>());
    }
  }
  TermMatrix m(static_cast<Eigen::Index>(j.size()), cols);
  m.setFromTriplets(cells.begin(), cells.end());
  m.makeCompressed();
  return m;
}

}  // namespace

void save_corpus(const Corpus& corpus, std::ostream& out) {
  out << corpus_to_json(corpus).dump() << "\n";
  if (!out) throw DataError("corpus write failed");
}

void save_corpus_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_corpus(corpus, out);
}

Corpus load_corpus(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("corpus file is not valid JSON");
  return corpus_from_json(j);
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return load_corpus(in);
}

void save_model(const TriageModel& model, std::ostream& out) {
  json j = {{"format", "triage.model"},
            {"version", 1},
            {"kind", to_string(model.kind)},
            {"vocabulary", model.vocabulary},
            {"class_devs", model.class_devs}};
  switch (model.kind) {
    case ClassifierKind::NaiveBayes:
      j["smoothing"] = model.smoothing;
      j["log_prior"] = vector_to_json(model.log_prior);
      j["log_likelihood"] = matrix_to_json(model.log_likelihood);
      break;
    case ClassifierKind::Knn:
      j["neighbors"] = model.neighbors;
      j["train_labels"] = model.train_labels;
      j["train_docs"] = sparse_to_json(model.train_matrix);
      break;
    case ClassifierKind::LinearSvm:
      j["weights"] = matrix_to_json(model.weights);
      j["bias"] = vector_to_json(model.bias);
      break;
  }
  out << j.dump() << "\n";
  if (!out) throw DataError("model write failed");
}

void save_model_file(const TriageModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_model(model, out);
}

TriageModel load_model(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("model file is not valid JSON");
  expect_format(j, "triage.model");
  TriageModel model;
  model.kind = classifier_from_string(j.at("kind").get<std::string>());
  model.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  model.class_devs = j.at("class_devs").get<std::vector<std::string>>();
  switch (model.kind) {
    case ClassifierKind::NaiveBayes:
      model.smoothing = j.at("smoothing").get<double>();
      model.log_prior = vector_from_json(j.at("log_prior"));
      model.log_likelihood = matrix_from_json(j.at("log_likelihood"));
      break;
    case ClassifierKind::Knn: {
      model.neighbors = j.at("neighbors").get<int>();
      model.train_labels = j.at("train_labels").get<std::vector<int>>();
      model.train_matrix = sparse_from_json(
          j.at("train_docs"), static_cast<Eigen::Index>(model.vocabulary.size()));
      model.train_norms.resize(model.train_matrix.rows());
      for (Eigen::Index i = 0; i < model.train_matrix.rows(); ++i) {
        double sq = 0.0;
        for (TermMatrix::InnerIterator it(model.train_matrix, i); it; ++it) {
          sq += it.value() * it.value();
        }
        model.train_norms(i) = std::sqrt(sq);
      }
      break;
    }
    case ClassifierKind::LinearSvm:
      model.weights = matrix_from_json(j.at("weights"));
      model.bias = vector_from_json(j.at("bias"));
      break;
  }
  return model;
}

TriageModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  return load_model(in);
}

namespace {

json tree_node_to_json(const TreeNode* node) {
  json j;
  j["w"] = vector_to_json(node->class_weights);
  if (!node->is_leaf()) {
    j["a"] = node->attribute;
    j["t"] = node->threshold;
    j["l"] = tree_node_to_json(node->left.get());
    j["r"] = tree_node_to_json(node->right.get());
  }
  return j;
}

std::unique_ptr<TreeNode> tree_node_from_json(const json& j) {
  auto node = std::make_unique<TreeNode>();
  node->class_weights = vector_from_json(j.at("w"));
  if (j.contains("a")) {
    node->attribute = j.at("a").get<int>();
    node->threshold = j.at("t").get<double>();
    node->left = tree_node_from_json(j.at("l"));
    node->right = tree_node_from_json(j.at("r"));
  }
  return node;
}

}  // namespace

void save_order_model(const OrderModel& model, std::ostream& out) {
  json j = {{"format", "triage.order_model"},
            {"version", 1},
            {"kind", to_string(model.kind)},
            {"bounds",
             {{"min", vector_to_json(model.bounds.min)},
              {"max", vector_to_json(model.bounds.max)}}}};
  if (model.tree) {
    j["tree"] = tree_node_to_json(model.tree->root());
    j["classes"] = model.tree->class_count();
  } else if (model.ensemble) {
    json members = json::array();
    for (const auto& member : model.ensemble->members()) {
      members.push_back(
          {{"vote", member.vote}, {"tree", tree_node_to_json(member.tree.root())}});
    }
    j["ensemble"] = std::move(members);
    j["classes"] = model.ensemble->class_count();
  } else {
    throw DataError("order model: nothing to save");
  }
  out << j.dump() << "\n";
  if (!out) throw DataError("order model write failed");
}

void save_order_model_file(const OrderModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_order_model(model, out);
}

OrderModel load_order_model(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("order model file is not valid JSON");
  expect_format(j, "triage.order_model");
  OrderModel model;
  model.kind = order_classifier_from_string(j.at("kind").get<std::string>());
  model.bounds.min = vector_from_json(j.at("bounds").at("min"));
  model.bounds.max = vector_from_json(j.at("bounds").at("max"));
  const int classes = j.at("classes").get<int>();
  if (j.contains("tree")) {
    DecisionTree tree;
    tree.reset(tree_node_from_json(j.at("tree")), classes);
    model.tree = std::move(tree);
  } else {
    AdaBoostEnsemble ensemble;
    ensemble.set_class_count(classes);
    for (const auto& member : j.at("ensemble")) {
      DecisionTree tree;
      tree.reset(tree_node_from_json(member.at("tree")), classes);
      ensemble.mutable_members().push_back(
          {std::move(tree), member.at("vote").get<double>()});
    }
    model.ensemble = std::move(ensemble);
  }
  return model;
}

OrderModel load_order_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open order model file: " + path);
  return load_order_model(in);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void save_attribute_table(const AttributeTable& table, std::ostream& out) {
  if (!table.labels.empty() && table.labels.size() != table.rows.size()) {
    throw DataError("attribute table: label count mismatch");
  }
  out << "dataset";
  for (const auto& code : attribute_codes()) out << "," << code;
  if (!table.labels.empty()) out << ",label";
  out << "\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    out << (i < table.dataset_ids.size() ? table.dataset_ids[i] : std::to_string(i));
    const Eigen::VectorXd v = table.rows[i].to_vector();
    for (Eigen::Index c = 0; c < v.size(); ++c) out << "," << format_double(v(c));
    if (!table.labels.empty()) out << "," << to_string(table.labels[i]);
    out << "\n";
  }
  if (!out) throw DataError("attribute table write failed");
}

void save_attribute_table_file(const AttributeTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_attribute_table(table, out);
}

AttributeTable load_attribute_table(std::istream& in) {
  AttributeTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("attribute table: empty file");
  const bool labeled = line.find(",label") != std::string::npos;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::size_t expected = 1 + kAttributeCount + (labeled ? 1 : 0);
    if (cells.size() != expected) {
      throw DataError("attribute table: malformed row: " + line);
    }
    table.dataset_ids.push_back(cells[0]);
    Eigen::VectorXd v(kAttributeCount);
    for (int c = 0; c < kAttributeCount; ++c) {
      try {
        v(c) = std::stod(cells[static_cast<std::size_t>(c) + 1]);
      } catch (const std::exception&) {
        throw DataError("attribute table: bad number in row: " + line);
      }
    }
    table.rows.push_back(DatasetAttributes::from_vector(v));
    if (labeled) {
      const std::string& lab = cells.back();
      if (lab == "FS->IS") {
        table.labels.push_back(OrderLabel::FsThenIs);
      } else if (lab == "IS->FS") {
        table.labels.push_back(OrderLabel::IsThenFs);
      } else {
        throw DataError("attribute table: unknown label: " + lab);
      }
    }
  }
  return table;
}

AttributeTable load_attribute_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open attribute table: " + path);
  return load_attribute_table(in);
}

void write_audit_jsonl(const std::vector<AuditEntry>& entries, std::ostream& out) {
  for (const auto& e : entries) {
    out << json{{"bug_id", e.bug_id}, {"reason", e.reason}}.dump() << "\n";
  }
}

void write_removals_csv(const std::vector<RemovalRecord>& removals, std::ostream& out) {
  out << "bug_id,removed_by,iteration\n";
  for (const auto& r : removals) {
    out << r.bug_id << "," << r.removed_by << "," << r.iteration << "\n";
  }
}

void write_reduction_report(const ReductionAudit& audit, std::ostream& out) {
  json j = {{"word_target", audit.n_f},
            {"instance_target", audit.m_i},
            {"removed_words", audit.removed_words.size()},
            {"removed_instances", audit.removed_instances.size()},
            {"blank_reports", audit.blank_reports.size()},
            {"duplicate_reports_removed", audit.duplicate_reports_removed},
            {"instance_target_hit", audit.is_hit_target}};
  out << j.dump(2) << "\n";
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << row[c];
    }
    out << "\n";
  }
}

}  // namespace triage
