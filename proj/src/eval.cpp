#include "gdsrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "gdsrec/errors.hpp"

namespace gdsrec::eval {

std::string task_name(Task task) { return task == Task::rating ? "rating" : "ranking"; }

Task parse_task(const std::string& name) {
  if (name == "rating") return Task::rating;
  if (name == "ranking") return Task::ranking;
  throw ConfigError("unknown task `" + name + "` (expected rating or ranking)");
}

namespace {

void check_pairs(std::size_t a, std::size_t b, const char* what) {
  if (a == 0 || a != b) {
    throw InternalError(std::string(what) + " needs equal non-empty lists");
  }
}

}  // namespace

double mae(const std::vector<double>& preds, const std::vector<double>& targets) {
  check_pairs(preds.size(), targets.size(), "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) acc += std::abs(preds[i] - targets[i]);
  return acc / static_cast<double>(preds.size());
}

double rmse(const std::vector<double>& preds, const std::vector<double>& targets) {
  check_pairs(preds.size(), targets.size(), "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - targets[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(preds.size()));
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_pairs(scores.size(), labels.size(), "auc");
  const auto n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("auc requires both classes in the labels");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average 1-based ranks over tie groups, accumulate positive ranks.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

EvalReport evaluate(model::ModelParams& params, const Statistics& stats,
                    const InteractionTables& tables, const RelationshipGraph& graph,
                    const std::vector<RatingRecord>& test, Task task,
                    double rank_threshold) {
  if (test.empty()) throw DataError("cannot evaluate on an empty test set");

  std::vector<double> preds, targets;
  preds.reserve(test.size());
  targets.reserve(test.size());
  std::unordered_set<int> cold_users, cold_items;

  diff::Tape tape;
  for (const auto& rec : test) {
    tape.reset();
    const auto sample = model::full_neighbor_sample(tables, graph, rec.user, rec.item);
    const auto rhat = model::predict_rating(tape, params, stats, rec.user, rec.item, sample);
    preds.push_back(tape.scalar(rhat));
    targets.push_back(rec.rating);
    if (!stats.has_user(rec.user)) cold_users.insert(rec.user);
    if (!stats.has_item(rec.item)) cold_items.insert(rec.item);
  }

  EvalReport report;
  report.task = task;
  report.n_examples = static_cast<int>(test.size());
  report.cold_users = static_cast<int>(cold_users.size());
  report.cold_items = static_cast<int>(cold_items.size());
  report.mae = mae(preds, targets);
  report.rmse = rmse(preds, targets);
  if (task == Task::ranking) {
    std::vector<double> scores(preds.size());
    std::vector<int> labels(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      scores[i] = sigmoid(preds[i]);
      labels[i] = targets[i] >= rank_threshold ? 1 : 0;
    }
    report.auc = auc(scores, labels);
  }
  return report;
}

std::string to_key_values(const EvalReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "task=" << task_name(report.task) << '\n';
  out << "n_examples=" << report.n_examples << '\n';
  out << "mae=" << report.mae << '\n';
  out << "rmse=" << report.rmse << '\n';
  if (report.auc) out << "auc=" << *report.auc << '\n';
  out << "cold_users=" << report.cold_users << '\n';
  out << "cold_items=" << report.cold_items << '\n';
  return out.str();
}

std::string to_summary(const EvalReport& report) {
  std::ostringstream out;
  out.precision(4);
  out << task_name(report.task) << " task over " << report.n_examples
      << " test ratings: MAE " << report.mae << ", RMSE " << report.rmse;
  if (report.auc) out << ", AUC " << *report.auc;
  out << " (" << report.cold_users << " cold users, " << report.cold_items
      << " cold items)";
  return out.str();
}

}  // namespace gdsrec::eval
