#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rankbo/bo.hpp"
#include "rankbo/meta_dataset.hpp"

namespace rankbo {

// Meta-dataset JSON: { space_id: { task_id: { "X": [[...], ...], "y": [...] } } }.
// "y" may also be a list of single-element lists.

std::vector<MetaDataset> parse_meta_datasets(const std::string& json_text);
std::vector<MetaDataset> load_meta_datasets(const std::string& path);

/// The search space `space_id`, or the only one in the file when empty.
MetaDataset load_meta_dataset(const std::string& path, const std::string& space_id = "");

std::string dump_meta_datasets(const std::vector<MetaDataset>& datasets);
void save_meta_datasets(const std::string& path, const std::vector<MetaDataset>& datasets);

/// y = amplitude * sin((x + pi) / 2 + beta)
double sinusoid(double x, double beta, double amplitude = 1.0);

/// Grid lo, lo + step, ... up to hi (inclusive within half a step).
Task make_sinusoid_task(double beta, double lo = -10.0, double hi = 10.0, double step = 0.1, double amplitude = 1.0);

/// Evaluates the oracle on the whole pool; X holds `task.features()`.
TaskData tabulate(const Task& task);
MetaDataset to_meta_dataset(const std::string& space_id, const std::vector<Task>& tasks);

/// One value per BO step; step 0 is the state after initialization.
struct MetricCurve {
    std::string method;
    std::vector<double> values;
    std::size_t cells = 0;
};

/// Incumbent after initialization and after each BO iteration.
std::vector<double> incumbent_by_step(const BoHistory& history);

/// Histories of every method must be aligned cell by cell (same task and
/// seed at the same position). Per step and cell, methods are ranked by
/// incumbent (higher is better, ties share the average rank), then the ranks
/// are averaged over cells.
std::map<std::string, MetricCurve> average_rank_metric(const std::map<std::string, std::vector<BoHistory>>& histories);

/// (y_max - incumbent) / (y_max - y_min) per step.
MetricCurve normalized_regret(const BoHistory& history, double y_min, double y_max);

/// `step,value`
void write_metric_csv(std::ostream& out, const MetricCurve& curve);
/// `step,<method>,<method>,...`
void write_wide_metric_csv(std::ostream& out, const std::map<std::string, MetricCurve>& curves);

}  // namespace rankbo
