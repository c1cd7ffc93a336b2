#include "rankbo/config_json.hpp"

#include <string>

#include "rankbo/error.hpp"

namespace rankbo {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* context) {
    if (!j.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
    }
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
    }
}

}  // namespace

void to_json(json& j, const DeepSetLayout& layout) {
    j = json{{"inner_hidden", layout.inner_hidden},
             {"inner_output", layout.inner_output},
             {"outer_hidden", layout.outer_hidden},
             {"output_dim", layout.output_dim}};
}

void from_json(const json& j, DeepSetLayout& layout) {
    reject_unknown_keys(j, {"inner_hidden", "inner_output", "outer_hidden", "output_dim"}, "deepset");
    read_opt(j, "inner_hidden", layout.inner_hidden);
    read_opt(j, "inner_output", layout.inner_output);
    read_opt(j, "outer_hidden", layout.outer_hidden);
    read_opt(j, "output_dim", layout.output_dim);
}

void to_json(json& j, const TrainSettings& s) { j = json{{"epochs", s.epochs}, {"lr", s.lr}}; }

void from_json(const json& j, TrainSettings& s) {
    reject_unknown_keys(j, {"epochs", "lr"}, "train settings");
    read_opt(j, "epochs", s.epochs);
    read_opt(j, "lr", s.lr);
}

void to_json(json& j, const MetaTrainSettings& s) {
    j = json{{"epochs", s.epochs},
             {"lr", s.lr},
             {"batch_lists", s.batch_lists},
             {"list_size", s.list_size},
             {"support_fraction", s.support_fraction}};
}

void from_json(const json& j, MetaTrainSettings& s) {
    reject_unknown_keys(j, {"epochs", "lr", "batch_lists", "list_size", "support_fraction"}, "meta_train");
    read_opt(j, "epochs", s.epochs);
    read_opt(j, "lr", s.lr);
    read_opt(j, "batch_lists", s.batch_lists);
    read_opt(j, "list_size", s.list_size);
    read_opt(j, "support_fraction", s.support_fraction);
}

void to_json(json& j, const DreConfig& c) {
    j = json{{"ensemble_size", c.ensemble_size},
             {"scorer_hidden", c.scorer_hidden},
             {"deepset", c.deepset},
             {"activation", c.activation == Activation::relu ? "relu" : "tanh"},
             {"use_meta_features", c.use_meta_features},
             {"loss", to_string(c.loss)},
             {"weights", to_string(c.weights)},
             {"meta_train", c.meta_train},
             {"fine_tune", c.fine_tune},
             {"random_init_train", c.random_init_train},
             {"seed", c.seed}};
}

void from_json(const json& j, DreConfig& c) {
    reject_unknown_keys(j,
                        {"ensemble_size", "scorer_hidden", "deepset", "activation", "use_meta_features", "loss",
                         "weights", "meta_train", "fine_tune", "random_init_train", "seed"},
                        "dre");
    read_opt(j, "ensemble_size", c.ensemble_size);
    read_opt(j, "scorer_hidden", c.scorer_hidden);
    if (j.contains("deepset")) from_json(j.at("deepset"), c.deepset);
    if (j.contains("activation")) {
        const auto name = j.at("activation").get<std::string>();
        if (name == "relu")
            c.activation = Activation::relu;
        else if (name == "tanh")
            c.activation = Activation::tanh;
        else
            throw ConfigError("unknown activation '" + name + "'");
    }
    read_opt(j, "use_meta_features", c.use_meta_features);
    if (j.contains("loss")) c.loss = parse_loss_kind(j.at("loss").get<std::string>());
    if (j.contains("weights")) c.weights = parse_weight_kind(j.at("weights").get<std::string>());
    if (j.contains("meta_train")) from_json(j.at("meta_train"), c.meta_train);
    if (j.contains("fine_tune")) from_json(j.at("fine_tune"), c.fine_tune);
    if (j.contains("random_init_train")) from_json(j.at("random_init_train"), c.random_init_train);
    read_opt(j, "seed", c.seed);
}

std::string config_to_json(const DreConfig& config) { return json(config).dump(); }

DreConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    DreConfig c;
    from_json(j, c);
    return c;
}

}  // namespace rankbo
