#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rankbo/acquisition.hpp"
#include "rankbo/matrix.hpp"
#include "rankbo/surrogate.hpp"

namespace rankbo {

/// A finite candidate pool with a black-box objective to maximize.
///
/// The surrogate sees `features()`: each coordinate mapped from
/// [lower, upper] onto [-1, 1]. With empty bounds the candidates are used
/// as stored.
struct Task {
    std::string id;
    Matrix candidates;
    std::vector<double> lower;
    std::vector<double> upper;
    std::function<double(std::size_t)> oracle;

    std::size_t size() const { return candidates.rows; }
    std::size_t dim() const { return candidates.cols; }
    Matrix features() const;

    /// Lookup-table task without bounds, so `features()` returns `x` as
    /// stored, matching how meta-datasets are fed to meta-training.
    static Task tabular(std::string id, Matrix x, std::vector<double> y);
};

struct BoStep {
    std::size_t step = 0;  // 0 for initial observations
    std::size_t candidate_index = 0;
    std::vector<double> x;  // raw candidate coordinates
    double y = 0.0;
    double alpha = 0.0;  // NaN for initial observations
};

enum class BoStatus { completed, pool_exhausted, oracle_failed };

struct BoHistory {
    std::vector<BoStep> steps;
    /// Best y after each entry of `steps`.
    std::vector<double> incumbent;
    std::uint64_t seed = 0;
    BoStatus status = BoStatus::completed;
    std::string message;

    /// Position in `steps` of the best observation (first on ties).
    std::size_t best_step() const;
};

struct BoOptions {
    Acquisition acquisition;
    bool fine_tune = true;
    TrainSettings fine_tune_settings;
    /// Restart every fine-tuning round from the model passed to run_bo.
    bool reset_each_step = false;
    std::uint64_t seed = 0;
};

/// Per iteration: optionally fine-tune on the history, rank the whole pool
/// (observed and pending), score pending candidates with the acquisition,
/// evaluate the argmin and append it.
BoHistory run_bo(const DreModel& model, const Task& task, std::span<const std::size_t> init_indices,
                 std::size_t iterations, const BoOptions& options);

BoHistory run_random_search(const Task& task, std::span<const std::size_t> init_indices, std::size_t iterations,
                            std::uint64_t seed);

/// `count` distinct pool indices drawn with the run seed.
std::vector<std::size_t> draw_initial_indices(std::size_t pool_size, std::size_t count, std::uint64_t seed);

/// CSV with header `step,candidate_index,y,incumbent,alpha`.
void write_history_csv(std::ostream& out, const BoHistory& history);
BoHistory read_history_csv(std::istream& in);

std::string to_string(BoStatus status);

}  // namespace rankbo
