#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "rankbo/matrix.hpp"

namespace rankbo {

/// Evaluations of one task: rows of X with their targets (higher is better).
struct TaskData {
    Matrix x;
    std::vector<double> y;

    std::size_t size() const { return y.size(); }
    std::size_t dim() const { return x.cols; }

    friend bool operator==(const TaskData&, const TaskData&) = default;
};

/// Auxiliary tasks from one search space, keyed by task id. Keys iterate in
/// sorted order, which fixes task indexing during training.
struct MetaDataset {
    std::string search_space_id;
    std::map<std::string, TaskData> tasks;

    /// Shared configuration dimension; throws SchemaError if tasks disagree.
    std::size_t dim() const;

    friend bool operator==(const MetaDataset&, const MetaDataset&) = default;
};

}  // namespace rankbo
