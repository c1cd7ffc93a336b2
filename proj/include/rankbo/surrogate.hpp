#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rankbo/deepset.hpp"
#include "rankbo/meta_dataset.hpp"
#include "rankbo/nn.hpp"
#include "rankbo/ranking.hpp"

namespace rankbo {

struct TrainSettings {
    std::size_t epochs = 1000;
    double lr = 0.001;

    friend bool operator==(const TrainSettings&, const TrainSettings&) = default;
};

struct MetaTrainSettings {
    std::size_t epochs = 5000;
    double lr = 0.001;
    std::size_t batch_lists = 100;
    std::size_t list_size = 100;
    double support_fraction = 0.2;

    friend bool operator==(const MetaTrainSettings&, const MetaTrainSettings&) = default;
};

struct DreConfig {
    std::size_t ensemble_size = 10;
    std::vector<std::size_t> scorer_hidden{32, 32, 32, 32};
    DeepSetLayout deepset;
    Activation activation = Activation::relu;
    bool use_meta_features = true;
    LossKind loss = LossKind::listwise_weighted;
    WeightKind weights = WeightKind::inverse_log;
    MetaTrainSettings meta_train;
    TrainSettings fine_tune{1000, 0.001};
    TrainSettings random_init_train{1000, 0.02};
    std::uint64_t seed = 0;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;

    friend bool operator==(const DreConfig&, const DreConfig&) = default;
};

/// Shared Deep Set plus N independent scorers.
struct DreModel {
    DreConfig config;
    std::size_t input_dim = 0;
    DeepSetParams deepset;  // unused when !config.use_meta_features
    std::vector<MlpParams> scorers;
    std::vector<std::uint64_t> member_seeds;

    std::size_t ensemble_size() const { return scorers.size(); }
    std::size_t meta_dim() const { return config.use_meta_features ? deepset.output_dim() : 0; }
    std::size_t scorer_input_dim() const { return input_dim + meta_dim(); }

    friend bool operator==(const DreModel&, const DreModel&) = default;
};

/// Per-query rank statistics over ensemble members.
struct RankPrediction {
    std::vector<double> mu;
    std::vector<double> sigma;
    /// member_ranks[i][q]: rank of query q under member i.
    std::vector<std::vector<std::size_t>> member_ranks;
};

/// Seeded initialization. Member i uses seed split_seed(config.seed, i).
DreModel make_model(const DreConfig& config, std::size_t input_dim);

/// Meta-features of `support`; empty when the model does not use them.
MetaFeatures encode_support(const DreModel& model, const SupportSet& support);

/// Scorer input rows x_j ++ z.
Matrix concat_features(const Matrix& queries, std::span<const double> z);

std::vector<double> score_query(const DreModel& model, std::size_t member, const SupportSet& support,
                                const Matrix& queries);

struct ListGradients {
    double loss = 0.0;
    GradBundle scorer;
    /// Zero-sized when the model does not use meta-features.
    DeepSetGrads deepset;
};

/// Training loss of member `member` on one query list with targets, plus its
/// gradients with respect to that scorer and the Deep Set.
ListGradients list_loss_gradients(const DreModel& model, std::size_t member, const SupportSet& support,
                                  const Matrix& queries, std::span<const double> targets);

/// Ranks each member's scores over its score set and aggregates the ranks of
/// `query_indices` into mean and population standard deviation.
RankPrediction aggregate_ranks(const std::vector<std::vector<double>>& member_scores,
                               std::span<const std::size_t> query_indices);

/// Ranks are computed over all rows of `rank_universe`; statistics are
/// reported for the rows listed in `query_indices`.
RankPrediction predict(const DreModel& model, const SupportSet& support, const Matrix& rank_universe,
                       std::span<const std::size_t> query_indices);
RankPrediction predict(const DreModel& model, const SupportSet& support, const Matrix& rank_universe);

struct MetaTrainResult {
    DreModel model;
    /// Mean list loss of every iteration.
    std::vector<double> loss_history;
};

/// Each iteration samples one member, then `batch_lists` (task, query list,
/// disjoint support) triples from that member's stream, and applies one Adam
/// step to the member's scorer and to the shared Deep Set.
MetaTrainResult meta_train(const DreConfig& config, const MetaDataset& tasks);

struct FineTuneOptions {
    std::size_t epochs = 1000;
    double lr = 0.001;
    bool freeze_deepset = false;
    /// Mixed with each member's seed to drive support subsampling.
    std::uint64_t seed = 0;
};

struct FineTuneResult {
    DreModel model;
    bool skipped = false;
    /// Mean member loss per epoch.
    std::vector<double> loss_history;
};

/// Fits every member to the observed history. Each epoch takes one Adam step
/// per member scorer, in index order, then one step on the shared Deep Set
/// with the member-averaged gradient. Support sets are the full history below
/// 5 observations and a fresh per-member subsample otherwise. Fewer than 2
/// observations is a flagged no-op.
FineTuneResult fine_tune(const DreModel& model, const SupportSet& observations, const FineTuneOptions& options);

/// Support size used for a history of `n` observations.
std::size_t support_size_for(std::size_t n, double fraction);

void save_model(std::ostream& out, const DreModel& model);
DreModel load_model(std::istream& in);
void save_model_file(const std::string& path, const DreModel& model);
DreModel load_model_file(const std::string& path);

std::string config_to_json(const DreConfig& config);
DreConfig config_from_json(const std::string& text);

}  // namespace rankbo
