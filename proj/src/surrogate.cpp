#include "rankbo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "rankbo/config_json.hpp"
#include "rankbo/error.hpp"
#include "rankbo/io.hpp"
#include "rankbo/random.hpp"

namespace rankbo {

namespace {

constexpr std::uint64_t kDeepSetStream = 0xD5E7;
constexpr std::uint64_t kMemberSelectStream = 0x5E1EC7;
constexpr std::uint64_t kMemberDataStream = 1;
constexpr std::uint64_t kFineTuneStream = 2;
constexpr std::size_t kFullSupportBelow = 5;

std::vector<std::size_t> scorer_dims(const DreConfig& config, std::size_t input_dim) {
    std::vector<std::size_t> dims{input_dim + (config.use_meta_features ? config.deepset.output_dim : 0)};
    dims.insert(dims.end(), config.scorer_hidden.begin(), config.scorer_hidden.end());
    dims.push_back(1);
    return dims;
}

struct PsiAdam {
    AdamState inner;
    AdamState outer;
};

// Loss of one (support, query list) pair for one member. Adds `scale` times
// the gradients into `phi` and, when `psi` is non-null, into the Deep Set.
double accumulate_list(const DreModel& model, std::size_t member, const SupportSet* support, const Matrix& qx,
                       std::span<const double> qy, double scale, GradBundle& phi, DeepSetGrads* psi) {
    DeepSetEncoding enc;
    if (model.config.use_meta_features) enc = deepset_encode(model.deepset, *support);
    const auto& scorer = model.scorers[member];
    auto fwd = mlp_forward(scorer, concat_features(qx, enc.features.z));
    const auto loss = rank_loss(model.config.loss, model.config.weights, fwd.output.data, qy);

    Matrix out_grad(qx.rows, 1);
    for (std::size_t r = 0; r < qx.rows; ++r) out_grad(r, 0) = loss.grad[r] * scale;
    auto g = mlp_backward(scorer, fwd.cache, out_grad);
    phi.accumulate(g);

    if (model.config.use_meta_features && psi != nullptr) {
        const std::size_t d = model.input_dim;
        std::vector<double> z_grad(model.meta_dim(), 0.0);
        for (std::size_t r = 0; r < qx.rows; ++r)
            for (std::size_t c = 0; c < z_grad.size(); ++c) z_grad[c] += g.input_grad(r, d + c);
        auto dg = deepset_backward(model.deepset, enc.cache, z_grad);
        psi->inner.accumulate(dg.inner);
        psi->outer.accumulate(dg.outer);
    }
    return loss.loss;
}

DeepSetGrads zero_psi(const DreModel& model) {
    return {GradBundle::zeros_like(model.deepset.inner), GradBundle::zeros_like(model.deepset.outer)};
}

}  // namespace

void DreConfig::validate() const {
    if (ensemble_size < 1) throw ConfigError("ensemble_size must be at least 1");
    for (std::size_t h : scorer_hidden)
        if (h == 0) throw ConfigError("scorer_hidden entries must be positive");
    if (use_meta_features) {
        if (deepset.inner_output == 0 || deepset.output_dim == 0) throw ConfigError("deepset dimensions must be positive");
        for (std::size_t h : deepset.inner_hidden)
            if (h == 0) throw ConfigError("deepset.inner_hidden entries must be positive");
        for (std::size_t h : deepset.outer_hidden)
            if (h == 0) throw ConfigError("deepset.outer_hidden entries must be positive");
    }
    if (meta_train.list_size < 2) throw ConfigError("meta_train.list_size must be at least 2");
    if (meta_train.batch_lists < 1) throw ConfigError("meta_train.batch_lists must be at least 1");
    if (!(meta_train.support_fraction > 0.0 && meta_train.support_fraction < 1.0))
        throw ConfigError("meta_train.support_fraction must lie in (0, 1)");
    if (!(meta_train.lr > 0.0) || !(fine_tune.lr > 0.0) || !(random_init_train.lr > 0.0))
        throw ConfigError("learning rates must be positive");
}

DreModel make_model(const DreConfig& config, std::size_t input_dim) {
    config.validate();
    if (input_dim == 0) throw InvalidArchitectureError("make_model: input dimension must be positive");
    DreModel model;
    model.config = config;
    model.input_dim = input_dim;
    if (config.use_meta_features)
        model.deepset = deepset_init(input_dim, config.deepset, config.activation, split_seed(config.seed, kDeepSetStream));
    const auto dims = scorer_dims(config, input_dim);
    for (std::size_t i = 0; i < config.ensemble_size; ++i) {
        const std::uint64_t s = split_seed(config.seed, i);
        model.member_seeds.push_back(s);
        model.scorers.push_back(mlp_init(dims, config.activation, split_seed(s, 0)));
    }
    return model;
}

Matrix concat_features(const Matrix& queries, std::span<const double> z) {
    Matrix out(queries.rows, queries.cols + z.size());
    for (std::size_t r = 0; r < queries.rows; ++r) {
        auto dst = out.row(r);
        const auto src = queries.row(r);
        std::copy(src.begin(), src.end(), dst.begin());
        std::copy(z.begin(), z.end(), dst.begin() + static_cast<std::ptrdiff_t>(queries.cols));
    }
    return out;
}

MetaFeatures encode_support(const DreModel& model, const SupportSet& support) {
    if (!model.config.use_meta_features) return {};
    return deepset_encode(model.deepset, support).features;
}

std::vector<double> score_query(const DreModel& model, std::size_t member, const SupportSet& support,
                                const Matrix& queries) {
    if (member >= model.ensemble_size()) throw DomainError("score_query: member index out of range");
    if (queries.cols != model.input_dim) throw ShapeError("score_query: query dimension does not match model");
    const auto z = encode_support(model, support);
    return mlp_forward(model.scorers[member], concat_features(queries, z.z)).output.data;
}

ListGradients list_loss_gradients(const DreModel& model, std::size_t member, const SupportSet& support,
                                  const Matrix& queries, std::span<const double> targets) {
    if (member >= model.ensemble_size()) throw DomainError("list_loss_gradients: member index out of range");
    if (queries.cols != model.input_dim) throw ShapeError("list_loss_gradients: query dimension does not match model");
    if (targets.size() != queries.rows) throw ShapeError("list_loss_gradients: one target per query row expected");
    ListGradients out;
    out.scorer = GradBundle::zeros_like(model.scorers[member]);
    DeepSetGrads* psi = nullptr;
    if (model.config.use_meta_features) {
        out.deepset = zero_psi(model);
        psi = &out.deepset;
    }
    out.loss = accumulate_list(model, member, &support, queries, targets, 1.0, out.scorer, psi);
    return out;
}

RankPrediction aggregate_ranks(const std::vector<std::vector<double>>& member_scores,
                               std::span<const std::size_t> query_indices) {
    if (member_scores.empty()) throw DomainError("aggregate_ranks: no ensemble members");
    const std::size_t universe = member_scores.front().size();
    if (universe == 0) throw DomainError("aggregate_ranks: empty rank universe");
    for (std::size_t q : query_indices)
        if (q >= universe) throw DomainError("aggregate_ranks: query index outside the rank universe");

    const std::size_t n = member_scores.size();
    RankPrediction pred;
    pred.member_ranks.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (member_scores[i].size() != universe) throw ShapeError("aggregate_ranks: members scored different sets");
        const auto ranks = rank_scores(member_scores[i]);
        pred.member_ranks[i].reserve(query_indices.size());
        for (std::size_t q : query_indices) pred.member_ranks[i].push_back(ranks[q]);
    }
    pred.mu.resize(query_indices.size());
    pred.sigma.resize(query_indices.size());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t q = 0; q < query_indices.size(); ++q) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += static_cast<double>(pred.member_ranks[i][q]);
        const double mu = sum * inv_n;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dlt = static_cast<double>(pred.member_ranks[i][q]) - mu;
            ss += dlt * dlt;
        }
        pred.mu[q] = mu;
        pred.sigma[q] = std::sqrt(ss * inv_n);
    }
    return pred;
}

RankPrediction predict(const DreModel& model, const SupportSet& support, const Matrix& rank_universe,
                       std::span<const std::size_t> query_indices) {
    if (rank_universe.rows == 0) throw DomainError("predict: empty rank universe");
    if (rank_universe.cols != model.input_dim) throw ShapeError("predict: universe dimension does not match model");
    const auto z = encode_support(model, support);
    const Matrix inputs = concat_features(rank_universe, z.z);
    std::vector<std::vector<double>> scores;
    scores.reserve(model.ensemble_size());
    for (const auto& scorer : model.scorers) scores.push_back(mlp_forward(scorer, inputs).output.data);
    return aggregate_ranks(scores, query_indices);
}

RankPrediction predict(const DreModel& model, const SupportSet& support, const Matrix& rank_universe) {
    std::vector<std::size_t> all(rank_universe.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return predict(model, support, rank_universe, all);
}

MetaTrainResult meta_train(const DreConfig& config, const MetaDataset& tasks) {
    config.validate();
    if (tasks.tasks.empty()) throw DomainError("meta_train: empty meta-dataset");
    const std::size_t dim = tasks.dim();
    const std::size_t min_size = config.use_meta_features ? 3 : 2;
    std::vector<const TaskData*> pool;
    for (const auto& [id, task] : tasks.tasks) {
        if (task.size() < min_size)
            throw DomainError("meta_train: task '" + id + "' has fewer than " + std::to_string(min_size) +
                              " observations");
        pool.push_back(&task);
    }

    MetaTrainResult result{make_model(config, dim), {}};
    DreModel& model = result.model;
    const std::size_t n_members = model.ensemble_size();
    const auto& mt = config.meta_train;

    Rng selector(split_seed(config.seed, kMemberSelectStream));
    std::vector<Rng> member_rngs;
    std::vector<AdamState> phi_adam;
    for (std::size_t i = 0; i < n_members; ++i) {
        member_rngs.emplace_back(split_seed(model.member_seeds[i], kMemberDataStream));
        phi_adam.push_back(AdamState::for_params(model.scorers[i]));
    }
    PsiAdam psi_adam;
    if (config.use_meta_features)
        psi_adam = {AdamState::for_params(model.deepset.inner), AdamState::for_params(model.deepset.outer)};

    const double scale = 1.0 / static_cast<double>(mt.batch_lists);
    result.loss_history.reserve(mt.epochs);
    for (std::size_t epoch = 0; epoch < mt.epochs; ++epoch) {
        const std::size_t m = uniform_index(selector, n_members);
        Rng& rng = member_rngs[m];
        GradBundle phi = GradBundle::zeros_like(model.scorers[m]);
        DeepSetGrads psi;
        if (config.use_meta_features) psi = zero_psi(model);
        double loss = 0.0;
        for (std::size_t b = 0; b < mt.batch_lists; ++b) {
            const TaskData& task = *pool[uniform_index(rng, pool.size())];
            const std::size_t n = task.size();
            std::size_t s = 0;
            if (config.use_meta_features) {
                const double want = mt.support_fraction * static_cast<double>(std::min(mt.list_size, n));
                s = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(want)), 1, n - 2);
            }
            const std::size_t q = std::min(mt.list_size, n - s);
            const auto idx = sample_without_replacement(rng, n, q + s);

            Matrix qx(q, dim);
            std::vector<double> qy(q);
            for (std::size_t k = 0; k < q; ++k) {
                const auto src = task.x.row(idx[k]);
                std::copy(src.begin(), src.end(), qx.row(k).begin());
                qy[k] = task.y[idx[k]];
            }
            SupportSet support;
            if (s > 0) {
                support.x = Matrix(s, dim);
                for (std::size_t k = 0; k < s; ++k) {
                    const auto src = task.x.row(idx[q + k]);
                    std::copy(src.begin(), src.end(), support.x.row(k).begin());
                    support.y.push_back(task.y[idx[q + k]]);
                }
            }
            loss += accumulate_list(model, m, &support, qx, qy, scale, phi,
                                    config.use_meta_features ? &psi : nullptr);
        }
        adam_step(model.scorers[m], phi, phi_adam[m], mt.lr);
        if (config.use_meta_features) {
            adam_step(model.deepset.inner, psi.inner, psi_adam.inner, mt.lr);
            adam_step(model.deepset.outer, psi.outer, psi_adam.outer, mt.lr);
        }
        result.loss_history.push_back(loss * scale);
    }
    return result;
}

std::size_t support_size_for(std::size_t n, double fraction) {
    if (n < kFullSupportBelow) return n;
    const auto s = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(s, 1, n);
}

FineTuneResult fine_tune(const DreModel& model, const SupportSet& observations, const FineTuneOptions& options) {
    FineTuneResult result{model, false, {}};
    const std::size_t n = observations.size();
    if (n < 2) {
        result.skipped = true;
        return result;
    }
    if (observations.dim() != model.input_dim) throw ShapeError("fine_tune: observation dimension does not match model");
    if (!(options.lr > 0.0)) throw DomainError("fine_tune: learning rate must be positive");

    DreModel& m = result.model;
    const bool meta = m.config.use_meta_features;
    const bool train_psi = meta && !options.freeze_deepset;
    const std::size_t n_members = m.ensemble_size();
    const std::size_t s = support_size_for(n, m.config.meta_train.support_fraction);

    std::vector<Rng> rngs;
    std::vector<AdamState> phi_adam;
    for (std::size_t i = 0; i < n_members; ++i) {
        rngs.emplace_back(split_seed(split_seed(m.member_seeds[i], kFineTuneStream), options.seed));
        phi_adam.push_back(AdamState::for_params(m.scorers[i]));
    }
    PsiAdam psi_adam;
    if (train_psi) psi_adam = {AdamState::for_params(m.deepset.inner), AdamState::for_params(m.deepset.outer)};

    result.loss_history.reserve(options.epochs);
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        double loss = 0.0;
        DeepSetGrads psi;
        if (train_psi) psi = zero_psi(m);
        for (std::size_t i = 0; i < n_members; ++i) {
            SupportSet sub;
            const SupportSet* support = &observations;
            if (meta && s < n) {
                const auto idx = sample_without_replacement(rngs[i], n, s);
                sub = observations.subset(idx);
                support = &sub;
            }
            GradBundle phi = GradBundle::zeros_like(m.scorers[i]);
            DeepSetGrads member_psi;
            if (train_psi) member_psi = zero_psi(m);
            loss += accumulate_list(m, i, support, observations.x, observations.y, 1.0, phi,
                                    train_psi ? &member_psi : nullptr);
            adam_step(m.scorers[i], phi, phi_adam[i], options.lr);
            if (train_psi) {
                psi.inner.accumulate(member_psi.inner, 1.0 / static_cast<double>(n_members));
                psi.outer.accumulate(member_psi.outer, 1.0 / static_cast<double>(n_members));
            }
        }
        // The Deep Set is shared: one step on the member-averaged gradient,
        // taken after every member has seen the same parameters.
        if (train_psi) {
            adam_step(m.deepset.inner, psi.inner, psi_adam.inner, options.lr);
            adam_step(m.deepset.outer, psi.outer, psi_adam.outer, options.lr);
        }
        result.loss_history.push_back(loss / static_cast<double>(n_members));
    }
    return result;
}

void save_model(std::ostream& out, const DreModel& model) {
    nlohmann::json header{{"config", model.config}, {"input_dim", model.input_dim}, {"member_seeds", model.member_seeds}};
    const std::string text = header.dump();
    out.write("DREM1", 5);
    detail::write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (model.config.use_meta_features) {
        write_mlp(out, model.deepset.inner);
        write_mlp(out, model.deepset.outer);
    }
    detail::write_u32(out, static_cast<std::uint32_t>(model.scorers.size()));
    for (const auto& s : model.scorers) write_mlp(out, s);
}

DreModel load_model(std::istream& in) {
    char magic[5];
    if (!in.read(magic, 5) || std::string(magic, 5) != "DREM1") throw IoError("load_model: missing DREM1 header");
    const std::uint64_t len = detail::read_u64(in);
    if (len > (1u << 24)) throw IoError("load_model: implausible header length");
    std::string text(len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw IoError("load_model: truncated header");

    DreModel model;
    try {
        const auto header = nlohmann::json::parse(text);
        from_json(header.at("config"), model.config);
        model.input_dim = header.at("input_dim").get<std::size_t>();
        model.member_seeds = header.at("member_seeds").get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("load_model: bad header: ") + e.what());
    }
    if (model.config.use_meta_features) {
        model.deepset.inner = read_mlp(in);
        model.deepset.outer = read_mlp(in);
    }
    const std::uint32_t n = detail::read_u32(in);
    if (n != model.member_seeds.size()) throw IoError("load_model: member count disagrees with header");
    const auto dims = scorer_dims(model.config, model.input_dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        model.scorers.push_back(read_mlp(in));
        if (model.scorers.back().layer_dims != dims) throw IoError("load_model: scorer shape disagrees with config");
    }
    if (model.config.use_meta_features &&
        (model.deepset.input_dim() != model.input_dim || model.deepset.output_dim() != model.config.deepset.output_dim))
        throw IoError("load_model: deep set shape disagrees with config");
    return model;
}

void save_model_file(const std::string& path, const DreModel& model) {
    write_file_atomic(path, [&](std::ostream& out) { save_model(out, model); }, true);
}

DreModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    return load_model(in);
}

}  // namespace rankbo
