#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gdsrec/dataset.hpp"
#include "gdsrec/model.hpp"
#include "gdsrec/social_graph.hpp"

namespace gdsrec::eval {

enum class Task { rating, ranking };

std::string task_name(Task task);
Task parse_task(const std::string& name);

struct EvalReport {
  Task task = Task::rating;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> auc;  // ranking only
  int n_examples = 0;
  int cold_users = 0;  // distinct test users without training ratings
  int cold_items = 0;
};

double mae(const std::vector<double>& preds, const std::vector<double>& targets);
double rmse(const std::vector<double>& preds, const std::vector<double>& targets);

// Probability that a random positive outranks a random negative; ties count
// one half (rank form of the Mann-Whitney statistic). Throws DataError when
// only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

double sigmoid(double x);

// Predicts every test pair with full neighbor lists (no dropout) and computes
// the task's metrics. MAE/RMSE always refer to the predicted rating; AUC is
// added for the ranking task using labels rating >= rank_threshold.
EvalReport evaluate(model::ModelParams& params, const Statistics& stats,
                    const InteractionTables& tables, const RelationshipGraph& graph,
                    const std::vector<RatingRecord>& test, Task task,
                    double rank_threshold = 3.0);

// Flat key=value record, one pair per line.
std::string to_key_values(const EvalReport& report);

// One-line human summary.
std::string to_summary(const EvalReport& report);

}  // namespace gdsrec::eval
