#include "rankbo/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rankbo/error.hpp"

namespace rankbo {

namespace {

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

void require_finite(std::span<const double> xs, const char* what) {
    for (double v : xs)
        if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
}

void require_perm(std::span<const double> scores, const RankPermutation& perm) {
    if (perm.size() != scores.size()) throw ShapeError("permutation length does not match score count");
    if (scores.empty()) throw DegenerateListError("empty list");
}

// Suffix log-sum-exp over scores taken in permutation order.
std::vector<double> suffix_lse(std::span<const double> scores, const RankPermutation& perm) {
    const std::size_t m = perm.size();
    std::vector<double> lse(m);
    lse[m - 1] = scores[perm.order[m - 1]];
    for (std::size_t j = m - 1; j-- > 0;) lse[j] = log_add_exp(scores[perm.order[j]], lse[j + 1]);
    return lse;
}

}  // namespace

RankPermutation true_rank_permutation(std::span<const double> targets) {
    if (targets.empty()) throw DegenerateListError("true_rank_permutation: empty target list");
    require_finite(targets, "true_rank_permutation");
    RankPermutation perm;
    perm.order.resize(targets.size());
    std::iota(perm.order.begin(), perm.order.end(), std::size_t{0});
    std::stable_sort(perm.order.begin(), perm.order.end(),
                     [&](std::size_t a, std::size_t b) { return targets[a] > targets[b]; });
    return perm;
}

double list_weight(std::size_t position, const WeightScheme& scheme) {
    if (position < 1) throw DomainError("list_weight: positions are 1-based");
    const double j = static_cast<double>(position);
    switch (scheme.kind) {
        case WeightKind::inverse_log: return 1.0 / std::log(j + 1.0);
        case WeightKind::inverse_linear: return 1.0 / j;
        case WeightKind::position_dependent_attention: {
            if (position > scheme.list_length) throw DomainError("list_weight: position beyond list length");
            const double k = static_cast<double>(scheme.list_length);
            return (k - j + 1.0) / (k * (k + 1.0) / 2.0);
        }
        case WeightKind::uniform: return 1.0;
    }
    throw DomainError("list_weight: unknown scheme");
}

double listwise_permutation_prob(std::span<const double> scores, const RankPermutation& perm) {
    require_perm(scores, perm);
    require_finite(scores, "listwise_permutation_prob");
    const auto lse = suffix_lse(scores, perm);
    double log_prob = 0.0;
    for (std::size_t j = 0; j < perm.size(); ++j) log_prob += scores[perm.order[j]] - lse[j];
    return std::exp(log_prob);
}

LossResult listwise_loss(std::span<const double> scores, const RankPermutation& perm, WeightKind weights) {
    require_perm(scores, perm);
    require_finite(scores, "listwise_loss");
    const std::size_t m = perm.size();
    LossResult result;
    result.grad.assign(m, 0.0);
    if (m == 1) return result;

    const WeightScheme scheme{weights, m};
    std::vector<double> w(m);
    for (std::size_t j = 0; j < m; ++j) w[j] = list_weight(j + 1, scheme);

    const auto lse = suffix_lse(scores, perm);
    for (std::size_t j = 0; j < m; ++j) result.loss += w[j] * (lse[j] - scores[perm.order[j]]);

    // d/ds[o_k] = -w_k + sum_{j<=k} w_j softmax_j(o_k); the sum is carried in
    // log space as log sum_{j<=k} w_j exp(s[o_k] - lse_j).
    double log_acc = -std::numeric_limits<double>::infinity();
    double prev = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double t = scores[perm.order[k]];
        if (k > 0) log_acc += t - prev;
        log_acc = log_add_exp(log_acc, std::log(w[k]) + (t - lse[k]));
        result.grad[perm.order[k]] = std::exp(log_acc) - w[k];
        prev = t;
    }
    return result;
}

LossResult pairwise_loss(std::span<const double> scores, const RankPermutation& perm) {
    require_perm(scores, perm);
    if (perm.size() < 2) throw DegenerateListError("pairwise_loss needs at least two items");
    require_finite(scores, "pairwise_loss");
    const std::size_t m = perm.size();
    LossResult result;
    result.grad.assign(m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const std::size_t hi = perm.order[a];
            const std::size_t lo = perm.order[b];
            const double margin = scores[hi] - scores[lo];
            // softplus(-margin), stable for either sign
            result.loss += margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
            const double sig_neg = 1.0 / (1.0 + std::exp(margin));
            result.grad[hi] -= sig_neg;
            result.grad[lo] += sig_neg;
        }
    }
    return result;
}

LossResult pointwise_loss(std::span<const double> scores, const RankPermutation& perm) {
    require_perm(scores, perm);
    if (perm.size() < 2) throw DegenerateListError("pointwise_loss needs at least two items");
    require_finite(scores, "pointwise_loss");
    const std::size_t m = perm.size();
    const double denom = static_cast<double>(m - 1);
    LossResult result;
    result.grad.assign(m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
        const std::size_t i = perm.order[p];
        const double target = 1.0 - 2.0 * static_cast<double>(p) / denom;
        const double r = scores[i] - target;
        result.loss += r * r;
        result.grad[i] = 2.0 * r;
    }
    return result;
}

LossResult regression_mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw ShapeError("regression_mse: length mismatch");
    if (predictions.empty()) throw DegenerateListError("regression_mse: empty list");
    require_finite(predictions, "regression_mse");
    require_finite(targets, "regression_mse");
    const double m = static_cast<double>(predictions.size());
    LossResult result;
    result.grad.resize(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double r = predictions[i] - targets[i];
        result.loss += r * r;
        result.grad[i] = 2.0 * r / m;
    }
    result.loss /= m;
    return result;
}

LossResult rank_loss(LossKind kind, WeightKind weights, std::span<const double> scores, std::span<const double> targets) {
    if (scores.size() != targets.size()) throw ShapeError("rank_loss: scores and targets differ in length");
    switch (kind) {
        case LossKind::listwise_weighted: return listwise_loss(scores, true_rank_permutation(targets), weights);
        case LossKind::listwise_unweighted:
            return listwise_loss(scores, true_rank_permutation(targets), WeightKind::uniform);
        case LossKind::pairwise: return pairwise_loss(scores, true_rank_permutation(targets));
        case LossKind::pointwise: return pointwise_loss(scores, true_rank_permutation(targets));
        case LossKind::regression_mse: return regression_mse(scores, targets);
    }
    throw DomainError("rank_loss: unknown loss kind");
}

std::vector<std::size_t> rank_scores(std::span<const double> scores) {
    if (scores.empty()) throw DegenerateListError("rank_scores: empty score set");
    for (double s : scores)
        if (std::isnan(s)) throw NumericError("rank_scores: NaN score");
    const std::size_t m = scores.size();
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::size_t> ranks(m);
    std::size_t start = 0;
    while (start < m) {
        std::size_t end = start + 1;
        while (end < m && scores[idx[end]] == scores[idx[start]]) ++end;
        // every member of the tie group is beaten-or-matched by `end` scores
        for (std::size_t k = start; k < end; ++k) ranks[idx[k]] = end;
        start = end;
    }
    return ranks;
}

std::string to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::inverse_log: return "inv-log";
        case WeightKind::inverse_linear: return "inv-linear";
        case WeightKind::position_dependent_attention: return "pda";
        case WeightKind::uniform: return "uniform";
    }
    return "?";
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::listwise_weighted: return "listwise-weighted";
        case LossKind::listwise_unweighted: return "listwise";
        case LossKind::pairwise: return "pairwise";
        case LossKind::pointwise: return "pointwise";
        case LossKind::regression_mse: return "mse";
    }
    return "?";
}

WeightKind parse_weight_kind(const std::string& name) {
    if (name == "inv-log") return WeightKind::inverse_log;
    if (name == "inv-linear") return WeightKind::inverse_linear;
    if (name == "pda") return WeightKind::position_dependent_attention;
    if (name == "uniform") return WeightKind::uniform;
    throw ConfigError("unknown weight scheme '" + name + "' (expected inv-log, inv-linear, pda, uniform)");
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "listwise-weighted") return LossKind::listwise_weighted;
    if (name == "listwise") return LossKind::listwise_unweighted;
    if (name == "pairwise") return LossKind::pairwise;
    if (name == "pointwise") return LossKind::pointwise;
    if (name == "mse") return LossKind::regression_mse;
    throw ConfigError("unknown loss '" + name + "' (expected listwise-weighted, listwise, pairwise, pointwise, mse)");
}

}  // namespace rankbo
