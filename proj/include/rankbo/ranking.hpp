#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rankbo {

/// Item indices sorted by descending target; `order[0]` is the best item.
/// Equal targets keep ascending original index.
struct RankPermutation {
    std::vector<std::size_t> order;

    std::size_t size() const { return order.size(); }
};

enum class WeightKind { inverse_log, inverse_linear, position_dependent_attention, uniform };

struct WeightScheme {
    WeightKind kind = WeightKind::inverse_log;
    /// List length k; only position-dependent attention reads it.
    std::size_t list_length = 0;
};

enum class LossKind { listwise_weighted, listwise_unweighted, pairwise, pointwise, regression_mse };

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;
};

RankPermutation true_rank_permutation(std::span<const double> targets);

/// Weight of 1-based list position `position`.
///   inverse_log:   1 / ln(position + 1)
///   inverse_linear: 1 / position
///   PDA:           (k - position + 1) / (k (k + 1) / 2)
///   uniform:       1
double list_weight(std::size_t position, const WeightScheme& scheme);

/// Plackett-Luce probability of `perm` under `scores`.
double listwise_permutation_prob(std::span<const double> scores, const RankPermutation& perm);

/// Weighted negative log-likelihood of the true permutation:
///   sum_j -w(j) * log( exp(s[o_j]) / sum_{k >= j} exp(s[o_k]) ).
/// Suffix log-sum-exps are accumulated with a running max, so scores up to
/// roughly 700 in magnitude are safe. Linear in the list length.
LossResult listwise_loss(std::span<const double> scores, const RankPermutation& perm, WeightKind weights);

/// Logistic pairwise loss: sum over ordered pairs (a before b in perm) of
/// -log sigmoid(s[a] - s[b]).
LossResult pairwise_loss(std::span<const double> scores, const RankPermutation& perm);

/// Squared error to the normalized rank target 1 - 2 (rank - 1) / (M - 1).
LossResult pointwise_loss(std::span<const double> scores, const RankPermutation& perm);

/// Mean squared error.
LossResult regression_mse(std::span<const double> predictions, std::span<const double> targets);

/// Loss of `kind` for scores against raw targets. Ranking losses derive the
/// true permutation from the targets; regression compares values directly.
LossResult rank_loss(LossKind kind, WeightKind weights, std::span<const double> scores, std::span<const double> targets);

/// rank(s_j) = #{ s in scores : s >= s_j }. Rank 1 is the best (largest) score.
std::vector<std::size_t> rank_scores(std::span<const double> scores);

std::string to_string(WeightKind kind);
std::string to_string(LossKind kind);
WeightKind parse_weight_kind(const std::string& name);
LossKind parse_loss_kind(const std::string& name);

}  // namespace rankbo
