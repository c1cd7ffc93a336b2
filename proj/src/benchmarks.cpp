#include "rankbo/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "json.hpp"
#include "rankbo/error.hpp"
#include "rankbo/io.hpp"

namespace rankbo {

using nlohmann::json;

std::size_t MetaDataset::dim() const {
    if (tasks.empty()) throw SchemaError("meta-dataset '" + search_space_id + "' has no tasks");
    const std::size_t d = tasks.begin()->second.dim();
    for (const auto& [id, t] : tasks)
        if (t.dim() != d)
            throw SchemaError("task '" + id + "' has dimension " + std::to_string(t.dim()) + ", expected " +
                              std::to_string(d));
    return d;
}

namespace {

double finite_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(where + ": non-finite value");
    return d;
}

TaskData parse_task(const std::string& task_id, const json& j) {
    const std::string where = "task '" + task_id + "'";
    if (!j.is_object()) throw SchemaError(where + ": expected an object with X and y");
    if (!j.contains("X") || !j.contains("y")) throw SchemaError(where + ": missing X or y");
    const json& jx = j.at("X");
    const json& jy = j.at("y");
    if (!jx.is_array() || jx.empty()) throw SchemaError(where + ": X must be a non-empty list of rows");
    if (!jy.is_array()) throw SchemaError(where + ": y must be a list");

    TaskData t;
    const std::size_t rows = jx.size();
    if (!jx.front().is_array() || jx.front().empty()) throw SchemaError(where + ": X rows must be non-empty lists");
    const std::size_t cols = jx.front().size();
    t.x = Matrix(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = jx[r];
        if (!row.is_array() || row.size() != cols)
            throw SchemaError(where + ": ragged X (row " + std::to_string(r) + " has " +
                              std::to_string(row.is_array() ? row.size() : 0) + " entries, expected " +
                              std::to_string(cols) + ")");
        for (std::size_t c = 0; c < cols; ++c) t.x(r, c) = finite_number(row[c], where + " X");
    }
    for (const json& v : jy) {
        if (v.is_array()) {
            if (v.size() != 1) throw SchemaError(where + ": nested y entries must hold exactly one value");
            t.y.push_back(finite_number(v.front(), where + " y"));
        } else {
            t.y.push_back(finite_number(v, where + " y"));
        }
    }
    if (t.y.size() != rows)
        throw SchemaError(where + ": |y| = " + std::to_string(t.y.size()) + " but X has " + std::to_string(rows) +
                          " rows");
    return t;
}

}  // namespace

std::vector<MetaDataset> parse_meta_datasets(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("meta-dataset is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw SchemaError("meta-dataset: top level must map search-space ids to tasks");
    std::vector<MetaDataset> out;
    for (const auto& [space_id, space] : root.items()) {
        if (!space.is_object()) throw SchemaError("search space '" + space_id + "': expected an object of tasks");
        MetaDataset ds;
        ds.search_space_id = space_id;
        for (const auto& [task_id, task] : space.items()) ds.tasks.emplace(task_id, parse_task(task_id, task));
        ds.dim();
        out.push_back(std::move(ds));
    }
    return out;
}

std::vector<MetaDataset> load_meta_datasets(const std::string& path) { return parse_meta_datasets(read_text_file(path)); }

MetaDataset load_meta_dataset(const std::string& path, const std::string& space_id) {
    auto all = load_meta_datasets(path);
    if (space_id.empty()) {
        if (all.size() != 1)
            throw SchemaError("'" + path + "' holds " + std::to_string(all.size()) +
                              " search spaces; name the one to use");
        return std::move(all.front());
    }
    for (auto& ds : all)
        if (ds.search_space_id == space_id) return std::move(ds);
    throw SchemaError("search space '" + space_id + "' not found in '" + path + "'");
}

std::string dump_meta_datasets(const std::vector<MetaDataset>& datasets) {
    json root = json::object();
    for (const auto& ds : datasets) {
        json space = json::object();
        for (const auto& [id, t] : ds.tasks) {
            json rows = json::array();
            for (std::size_t r = 0; r < t.x.rows; ++r) {
                const auto row = t.x.row(r);
                rows.push_back(std::vector<double>(row.begin(), row.end()));
            }
            space[id] = json{{"X", rows}, {"y", t.y}};
        }
        root[ds.search_space_id] = std::move(space);
    }
    return root.dump();
}

void save_meta_datasets(const std::string& path, const std::vector<MetaDataset>& datasets) {
    const std::string text = dump_meta_datasets(datasets);
    write_file_atomic(path, [&](std::ostream& out) { out << text << '\n'; });
}

double sinusoid(double x, double beta, double amplitude) {
    return amplitude * std::sin((x + std::numbers::pi) / 2.0 + beta);
}

Task make_sinusoid_task(double beta, double lo, double hi, double step, double amplitude) {
    if (!(lo < hi) || !(step > 0.0)) throw DomainError("make_sinusoid_task: need lo < hi and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    if (count < 2) throw DomainError("make_sinusoid_task: grid has fewer than two points");
    Task t;
    t.id = "sin_b" + format_double(beta) + (amplitude == 1.0 ? "" : "_a" + format_double(amplitude));
    t.candidates = Matrix(count, 1);
    for (std::size_t i = 0; i < count; ++i) t.candidates(i, 0) = lo + static_cast<double>(i) * step;
    t.lower = {lo};
    t.upper = {hi};
    t.oracle = [grid = t.candidates.data, beta, amplitude](std::size_t i) { return sinusoid(grid.at(i), beta, amplitude); };
    return t;
}

TaskData tabulate(const Task& task) {
    TaskData d;
    d.x = task.features();
    d.y.reserve(task.size());
    for (std::size_t i = 0; i < task.size(); ++i) d.y.push_back(task.oracle(i));
    return d;
}

MetaDataset to_meta_dataset(const std::string& space_id, const std::vector<Task>& tasks) {
    MetaDataset ds;
    ds.search_space_id = space_id;
    for (const auto& t : tasks)
        if (!ds.tasks.emplace(t.id, tabulate(t)).second) throw SchemaError("duplicate task id '" + t.id + "'");
    return ds;
}

std::vector<double> incumbent_by_step(const BoHistory& history) {
    std::vector<double> out;
    for (std::size_t k = 0; k < history.steps.size(); ++k) {
        const std::size_t step = history.steps[k].step;
        if (step >= out.size()) out.resize(step + 1);
        out[step] = history.incumbent[k];
    }
    return out;
}

std::map<std::string, MetricCurve> average_rank_metric(const std::map<std::string, std::vector<BoHistory>>& histories) {
    if (histories.empty()) throw AlignmentError("average_rank_metric: no methods");
    const std::size_t cells = histories.begin()->second.size();
    if (cells == 0) throw AlignmentError("average_rank_metric: no (task, seed) cells");
    std::vector<std::string> methods;
    std::vector<std::vector<std::vector<double>>> curves;  // method -> cell -> step
    for (const auto& [name, hs] : histories) {
        if (hs.size() != cells)
            throw AlignmentError("method '" + name + "' has " + std::to_string(hs.size()) + " cells, expected " +
                                 std::to_string(cells));
        methods.push_back(name);
        auto& c = curves.emplace_back();
        for (const auto& h : hs) c.push_back(incumbent_by_step(h));
    }
    const std::size_t steps = curves.front().front().size();
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (std::size_t c = 0; c < cells; ++c)
            if (curves[m][c].size() != steps)
                throw AlignmentError("method '" + methods[m] + "' cell " + std::to_string(c) + " has " +
                                     std::to_string(curves[m][c].size()) + " steps, expected " + std::to_string(steps));

    std::map<std::string, MetricCurve> out;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        MetricCurve curve{methods[m], std::vector<double>(steps, 0.0), cells};
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t c = 0; c < cells; ++c) {
                const double mine = curves[m][c][t];
                double rank = 1.0;
                for (std::size_t o = 0; o < methods.size(); ++o) {
                    if (o == m) continue;
                    const double theirs = curves[o][c][t];
                    if (theirs > mine)
                        rank += 1.0;
                    else if (theirs == mine)
                        rank += 0.5;
                }
                curve.values[t] += rank;
            }
            curve.values[t] /= static_cast<double>(cells);
        }
        out.emplace(methods[m], std::move(curve));
    }
    return out;
}

MetricCurve normalized_regret(const BoHistory& history, double y_min, double y_max) {
    if (!(y_max > y_min)) throw DomainError("normalized_regret: degenerate range (y_max must exceed y_min)");
    MetricCurve curve{"regret", {}, 1};
    for (double inc : incumbent_by_step(history)) {
        if (inc < y_min || inc > y_max) throw DomainError("normalized_regret: incumbent outside [y_min, y_max]");
        curve.values.push_back((y_max - inc) / (y_max - y_min));
    }
    return curve;
}

void write_metric_csv(std::ostream& out, const MetricCurve& curve) {
    out << "step,value\n";
    for (std::size_t t = 0; t < curve.values.size(); ++t) out << t << ',' << format_double(curve.values[t]) << '\n';
}

void write_wide_metric_csv(std::ostream& out, const std::map<std::string, MetricCurve>& curves) {
    out << "step";
    std::size_t steps = 0;
    for (const auto& [name, c] : curves) {
        out << ',' << name;
        steps = std::max(steps, c.values.size());
    }
    out << '\n';
    for (std::size_t t = 0; t < steps; ++t) {
        out << t;
        for (const auto& [name, c] : curves) out << ',' << (t < c.values.size() ? format_double(c.values[t]) : "");
        out << '\n';
    }
}

}  // namespace rankbo
