#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "triage/attributes.hpp"
#include "triage/classifiers.hpp"
#include "triage/corpus.hpp"
#include "triage/instance_selection.hpp"
#include "triage/order_prediction.hpp"
#include "triage/reduction.hpp"

namespace triage {

// Corpus files (JSON, format "triage.corpus" v1).
void save_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus_file(const Corpus& corpus, const std::string& path);
Corpus load_corpus(std::istream& in);
Corpus load_corpus_file(const std::string& path);

// Recommender models (JSON, format "triage.model" v1). Loading restores
// scores bit for bit.
void save_model(const TriageModel& model, std::ostream& out);
void save_model_file(const TriageModel& model, const std::string& path);
TriageModel load_model(std::istream& in);
TriageModel load_model_file(const std::string& path);

// Order-prediction models (JSON, format "triage.order_model" v1).
void save_order_model(const OrderModel& model, std::ostream& out);
void save_order_model_file(const OrderModel& model, const std::string& path);
OrderModel load_order_model(std::istream& in);
OrderModel load_order_model_file(const std::string& path);

// Attribute tables (CSV with a header: dataset,B1..D8[,label]).
struct AttributeTable {
  std::vector<std::string> dataset_ids;
  std::vector<DatasetAttributes> rows;
  std::vector<OrderLabel> labels;  // empty when unlabeled
};

void save_attribute_table(const AttributeTable& table, std::ostream& out);
void save_attribute_table_file(const AttributeTable& table, const std::string& path);
AttributeTable load_attribute_table(std::istream& in);
AttributeTable load_attribute_table_file(const std::string& path);

// Audit trails.
void write_audit_jsonl(const std::vector<AuditEntry>& entries, std::ostream& out);
void write_removals_csv(const std::vector<RemovalRecord>& removals, std::ostream& out);
void write_reduction_report(const ReductionAudit& audit, std::ostream& out);

// Generic CSV table helper used by the experiment runner.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double value);

}  // namespace triage
