#include "rankbo/bo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rankbo/error.hpp"
#include "rankbo/io.hpp"
#include "rankbo/random.hpp"

namespace rankbo {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kRandomSearchStream = 0x7A5D;

void validate_init(const Task& task, std::span<const std::size_t> init) {
    if (task.size() == 0) throw ExhaustedPoolError("task '" + task.id + "' has an empty candidate pool");
    if (!task.oracle) throw DomainError("task '" + task.id + "' has no oracle");
    if (init.empty()) throw DomainError("at least one initial observation is required");
    std::vector<bool> seen(task.size(), false);
    for (std::size_t i : init) {
        if (i >= task.size()) throw DomainError("initial index " + std::to_string(i) + " is outside the pool");
        if (seen[i]) throw DomainError("initial index " + std::to_string(i) + " is repeated");
        seen[i] = true;
    }
}

// Appends one evaluation; returns false (and marks the history) if the
// oracle throws or returns a non-finite value.
bool observe(const Task& task, std::size_t index, std::size_t step, double alpha, BoHistory& history) {
    double y = 0.0;
    try {
        y = task.oracle(index);
    } catch (const std::exception& e) {
        history.status = BoStatus::oracle_failed;
        history.message = "oracle failed on candidate " + std::to_string(index) + ": " + e.what();
        return false;
    }
    if (!std::isfinite(y)) {
        history.status = BoStatus::oracle_failed;
        history.message = "oracle returned a non-finite value for candidate " + std::to_string(index);
        return false;
    }
    const auto row = task.candidates.row(index);
    history.steps.push_back({step, index, std::vector<double>(row.begin(), row.end()), y, alpha});
    const double prev = history.incumbent.empty() ? -std::numeric_limits<double>::infinity() : history.incumbent.back();
    history.incumbent.push_back(std::max(prev, y));
    return true;
}

std::vector<std::size_t> pending_indices(const Task& task, const BoHistory& history) {
    std::vector<bool> done(task.size(), false);
    for (const auto& s : history.steps) done[s.candidate_index] = true;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < task.size(); ++i)
        if (!done[i]) pending.push_back(i);
    return pending;
}

SupportSet observed_support(const Matrix& features, const BoHistory& history) {
    SupportSet s;
    s.x = Matrix(history.steps.size(), features.cols);
    for (std::size_t k = 0; k < history.steps.size(); ++k) {
        const auto src = features.row(history.steps[k].candidate_index);
        std::copy(src.begin(), src.end(), s.x.row(k).begin());
        s.y.push_back(history.steps[k].y);
    }
    return s;
}

}  // namespace

Matrix Task::features() const {
    if (lower.empty() && upper.empty()) return candidates;
    if (lower.size() != dim() || upper.size() != dim()) throw ShapeError("task '" + id + "': bounds do not match dimension");
    Matrix f(candidates.rows, candidates.cols);
    for (std::size_t r = 0; r < candidates.rows; ++r) {
        for (std::size_t c = 0; c < candidates.cols; ++c) {
            const double span = upper[c] - lower[c];
            f(r, c) = span > 0.0 ? 2.0 * (candidates(r, c) - lower[c]) / span - 1.0 : 0.0;
        }
    }
    return f;
}

Task Task::tabular(std::string id, Matrix x, std::vector<double> y) {
    if (x.rows != y.size()) throw ShapeError("Task::tabular: X rows and y length differ");
    Task t;
    t.id = std::move(id);
    t.candidates = std::move(x);
    t.oracle = [table = std::move(y)](std::size_t i) { return table.at(i); };
    return t;
}

std::size_t BoHistory::best_step() const {
    if (steps.empty()) throw DomainError("BoHistory::best_step: empty history");
    std::size_t best = 0;
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (steps[k].y > steps[best].y) best = k;
    return best;
}

BoHistory run_bo(const DreModel& model, const Task& task, std::span<const std::size_t> init_indices,
                 std::size_t iterations, const BoOptions& options) {
    validate_init(task, init_indices);
    if (task.dim() != model.input_dim) throw ShapeError("run_bo: task dimension does not match model");
    const Matrix features = task.features();

    BoHistory history;
    history.seed = options.seed;
    for (std::size_t i : init_indices)
        if (!observe(task, i, 0, std::numeric_limits<double>::quiet_NaN(), history)) return history;

    DreModel current = model;
    for (std::size_t it = 1; it <= iterations; ++it) {
        const auto pending = pending_indices(task, history);
        if (pending.empty()) {
            history.status = BoStatus::pool_exhausted;
            history.message = "pool exhausted after " + std::to_string(it - 1) + " iterations";
            return history;
        }
        const SupportSet observed = observed_support(features, history);
        if (options.fine_tune) {
            const FineTuneOptions ft{options.fine_tune_settings.epochs, options.fine_tune_settings.lr, false,
                                     split_seed(options.seed, it)};
            current = fine_tune(options.reset_each_step ? model : current, observed, ft).model;
        }
        const auto pred = predict(current, observed, features);
        const std::size_t best = history.steps[history.best_step()].candidate_index;
        std::vector<double> mu, sigma;
        mu.reserve(pending.size());
        sigma.reserve(pending.size());
        for (std::size_t i : pending) {
            mu.push_back(pred.mu[i]);
            sigma.push_back(pred.sigma[i]);
        }
        const auto alphas = evaluate_acquisition(options.acquisition, mu, sigma, pred.mu[best]);
        const std::size_t pick = select_candidate(options.acquisition, mu, sigma, pred.mu[best]);
        if (!observe(task, pending[pick], it, alphas[pick], history)) return history;
    }
    return history;
}

BoHistory run_random_search(const Task& task, std::span<const std::size_t> init_indices, std::size_t iterations,
                            std::uint64_t seed) {
    validate_init(task, init_indices);
    BoHistory history;
    history.seed = seed;
    for (std::size_t i : init_indices)
        if (!observe(task, i, 0, std::numeric_limits<double>::quiet_NaN(), history)) return history;
    Rng rng(split_seed(seed, kRandomSearchStream));
    for (std::size_t it = 1; it <= iterations; ++it) {
        const auto pending = pending_indices(task, history);
        if (pending.empty()) {
            history.status = BoStatus::pool_exhausted;
            history.message = "pool exhausted after " + std::to_string(it - 1) + " iterations";
            return history;
        }
        const std::size_t pick = pending[uniform_index(rng, pending.size())];
        if (!observe(task, pick, it, std::numeric_limits<double>::quiet_NaN(), history)) return history;
    }
    return history;
}

std::vector<std::size_t> draw_initial_indices(std::size_t pool_size, std::size_t count, std::uint64_t seed) {
    if (count > pool_size) throw ExhaustedPoolError("cannot draw " + std::to_string(count) + " initial points from a pool of " +
                                                    std::to_string(pool_size));
    Rng rng(split_seed(seed, kInitStream));
    return sample_without_replacement(rng, pool_size, count);
}

void write_history_csv(std::ostream& out, const BoHistory& history) {
    out << "step,candidate_index,y,incumbent,alpha\n";
    for (std::size_t k = 0; k < history.steps.size(); ++k) {
        const auto& s = history.steps[k];
        out << s.step << ',' << s.candidate_index << ',' << format_double(s.y) << ','
            << format_double(history.incumbent[k]) << ',' << format_double(s.alpha) << '\n';
    }
}

BoHistory read_history_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "step,candidate_index,y,incumbent,alpha")
        throw SchemaError("history CSV: unexpected header");
    BoHistory h;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 5) throw SchemaError("history CSV line " + std::to_string(lineno) + ": expected 5 fields");
        try {
            BoStep s;
            s.step = std::stoull(f[0]);
            s.candidate_index = std::stoull(f[1]);
            s.y = std::stod(f[2]);
            s.alpha = f[4] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[4]);
            h.steps.push_back(s);
            h.incumbent.push_back(std::stod(f[3]));
        } catch (const std::logic_error&) {
            throw SchemaError("history CSV line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return h;
}

std::string to_string(BoStatus status) {
    switch (status) {
        case BoStatus::completed: return "completed";
        case BoStatus::pool_exhausted: return "pool_exhausted";
        case BoStatus::oracle_failed: return "oracle_failed";
    }
    return "?";
}

}  // namespace rankbo
