#pragma once

// JSON mapping for configuration types. Missing keys keep their defaults;
// unknown keys are rejected so typos in config files surface as errors.

#include "json.hpp"
#include "rankbo/surrogate.hpp"

namespace rankbo {

void to_json(nlohmann::json& j, const DeepSetLayout& layout);
void from_json(const nlohmann::json& j, DeepSetLayout& layout);
void to_json(nlohmann::json& j, const TrainSettings& settings);
void from_json(const nlohmann::json& j, TrainSettings& settings);
void to_json(nlohmann::json& j, const MetaTrainSettings& settings);
void from_json(const nlohmann::json& j, MetaTrainSettings& settings);
void to_json(nlohmann::json& j, const DreConfig& config);
void from_json(const nlohmann::json& j, DreConfig& config);

/// Throws ConfigError naming the first key of `j` not listed in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* context);

}  // namespace rankbo
