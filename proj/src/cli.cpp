#include "rankbo/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rankbo/benchmarks.hpp"
#include "rankbo/bo.hpp"
#include "rankbo/config_json.hpp"
#include "rankbo/error.hpp"
#include "rankbo/io.hpp"
#include "rankbo/random.hpp"

namespace rankbo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::uint64_t> RunConfig::run_seeds() const {
    if (!seeds.empty()) return seeds;
    if (!master_seed) return {0};
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < num_seeds; ++i) out.push_back(split_seed(*master_seed, i));
    return out;
}

namespace {

struct Extras {
    std::optional<TrainSettings> bo_train;
};

template <class T>
T get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void apply_json(const json& j, RunConfig& c, Extras& x) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(j,
                        {"meta_dataset", "tasks", "search_space", "sinusoids", "model", "output", "histories", "dre",
                         "acquisition", "beta", "method", "random_init", "fine_tune", "reset_each_step", "bo_train",
                         "iterations", "inits", "seeds", "master_seed", "num_seeds", "variants", "jobs"},
                        "config");
    auto str = [&](const char* k, std::string& dst) {
        if (j.contains(k)) dst = get_as<std::string>(j, k);
    };
    str("meta_dataset", c.meta_dataset);
    str("tasks", c.tasks);
    str("search_space", c.search_space);
    str("model", c.model);
    str("output", c.output);
    str("histories", c.histories);
    str("method", c.method);
    if (j.contains("sinusoids")) {
        const json& s = j.at("sinusoids");
        if (!s.is_array()) throw ConfigError("config key 'sinusoids': expected a list");
        for (const json& e : s) {
            if (!e.is_object()) throw ConfigError("config key 'sinusoids': entries must be objects");
            reject_unknown_keys(e, {"beta", "amplitude"}, "sinusoids");
            SinusoidSpec spec;
            spec.beta = get_as<double>(e, "beta");
            if (e.contains("amplitude")) spec.amplitude = get_as<double>(e, "amplitude");
            c.sinusoids.push_back(spec);
        }
    }
    if (j.contains("dre")) {
        try {
            c.dre = j.at("dre").get<DreConfig>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key 'dre': ") + e.what());
        }
    }
    if (j.contains("acquisition")) c.acquisition.kind = parse_acq_kind(get_as<std::string>(j, "acquisition"));
    if (j.contains("beta")) c.acquisition.beta = get_as<double>(j, "beta");
    if (j.contains("random_init")) c.random_init = get_as<bool>(j, "random_init");
    if (j.contains("fine_tune")) c.fine_tune = get_as<bool>(j, "fine_tune");
    if (j.contains("reset_each_step")) c.reset_each_step = get_as<bool>(j, "reset_each_step");
    if (j.contains("bo_train")) {
        try {
            x.bo_train = j.at("bo_train").get<TrainSettings>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key 'bo_train': ") + e.what());
        }
    }
    if (j.contains("iterations")) c.iterations = get_as<std::size_t>(j, "iterations");
    if (j.contains("inits")) c.inits = get_as<std::size_t>(j, "inits");
    if (j.contains("seeds")) c.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds");
    if (j.contains("master_seed")) c.master_seed = get_as<std::uint64_t>(j, "master_seed");
    if (j.contains("num_seeds")) c.num_seeds = get_as<std::size_t>(j, "num_seeds");
    if (j.contains("variants")) c.variants = get_as<std::vector<std::string>>(j, "variants");
    if (j.contains("jobs")) c.jobs = get_as<std::size_t>(j, "jobs");
}

json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + " is not valid JSON: " + e.what());
    }
}

// Paths inside a config file are relative to that file.
void rebase_paths(RunConfig& c, const fs::path& base) {
    for (std::string* p : {&c.meta_dataset, &c.tasks, &c.model, &c.output, &c.histories})
        if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
}

void setup_logging() {
    static const bool once = [] {
        auto logger = spdlog::stderr_color_mt("rankbo");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
        spdlog::set_level(spdlog::level::warn);
        if (const char* level = std::getenv("RANKBO_LOG"))
            spdlog::set_level(spdlog::level::from_str(level));
        return true;
    }();
    (void)once;
}

std::string safe_name(const std::string& s) {
    std::string out = s;
    for (char& ch : out)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-' && ch != '_') ch = '_';
    return out;
}

std::string cell_file(const std::string& task_id, std::uint64_t seed) {
    return safe_name(task_id) + "__seed" + std::to_string(seed) + ".csv";
}

std::vector<Task> build_tasks(const RunConfig& c) {
    std::vector<Task> tasks;
    if (!c.tasks.empty()) {
        for (auto& ds : load_meta_datasets(c.tasks)) {
            if (!c.search_space.empty() && ds.search_space_id != c.search_space) continue;
            for (auto& [id, t] : ds.tasks) {
                tasks.push_back(Task::tabular(id, std::move(t.x), std::move(t.y)));
            }
        }
    }
    for (const auto& s : c.sinusoids) tasks.push_back(make_sinusoid_task(s.beta, -10.0, 10.0, 0.1, s.amplitude));
    if (tasks.empty()) throw ConfigError("no tasks: give --tasks or sinusoid tasks");
    std::set<std::string> ids;
    for (const auto& t : tasks)
        if (!ids.insert(safe_name(t.id)).second) throw ConfigError("duplicate task id '" + t.id + "'");
    return tasks;
}

struct Cell {
    const Task* task = nullptr;
    std::uint64_t seed = 0;
};

struct Variant {
    std::string label;
    std::string method = "dre";
    bool random_init = false;
    const DreModel* model = nullptr;  // meta-trained or loaded
    DreConfig dre;                    // random-init configuration
    BoOptions options;
};

struct CellResult {
    BoHistory history;
    std::string error;
};

BoHistory run_cell(const Variant& v, const Cell& cell, std::size_t inits, std::size_t iterations) {
    const auto init = draw_initial_indices(cell.task->size(), inits, cell.seed);
    if (v.method == "random") return run_random_search(*cell.task, init, iterations, cell.seed);
    BoOptions options = v.options;
    options.seed = cell.seed;
    if (v.random_init) {
        DreConfig dre = v.dre;
        dre.seed = cell.seed;
        return run_bo(make_model(dre, cell.task->dim()), *cell.task, init, iterations, options);
    }
    return run_bo(*v.model, *cell.task, init, iterations, options);
}

// Runs every (variant, cell) pair on up to `jobs` threads. Results are
// indexed by position, so output does not depend on scheduling.
std::vector<std::vector<CellResult>> run_campaign(const std::vector<Variant>& variants, const std::vector<Cell>& cells,
                                                  const RunConfig& c) {
    std::vector<std::vector<CellResult>> results(variants.size(), std::vector<CellResult>(cells.size()));
    const std::size_t total = variants.size() * cells.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            const std::size_t vi = k / cells.size();
            const std::size_t ci = k % cells.size();
            auto& r = results[vi][ci];
            spdlog::info("{} / {} seed {}: start", variants[vi].label, cells[ci].task->id, cells[ci].seed);
            try {
                r.history = run_cell(variants[vi], cells[ci], c.inits, c.iterations);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
            spdlog::info("{} / {} seed {}: done", variants[vi].label, cells[ci].task->id, cells[ci].seed);
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(c.jobs, total));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    }
    return results;
}

// Writes histories and the summary; returns the number of failed cells.
std::size_t write_campaign(const std::vector<Variant>& variants, const std::vector<Cell>& cells,
                           const std::vector<std::vector<CellResult>>& results, const fs::path& outdir,
                           std::ostream& err) {
    std::size_t failures = 0;
    std::ostringstream summary;
    summary << "method,task,seed,status,observations,final_incumbent\n";
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const auto& r = results[vi][ci];
            const auto& cell = cells[ci];
            std::string status = r.error.empty() ? to_string(r.history.status) : "error";
            if (r.error.empty()) {
                write_file_atomic((outdir / variants[vi].label / cell_file(cell.task->id, cell.seed)).string(),
                                  [&](std::ostream& o) { write_history_csv(o, r.history); });
            }
            if (status != "completed") {
                ++failures;
                err << "failed: " << variants[vi].label << " task=" << cell.task->id << " seed=" << cell.seed << ": "
                    << (r.error.empty() ? r.history.message : r.error) << '\n';
            }
            summary << variants[vi].label << ',' << cell.task->id << ',' << cell.seed << ',' << status << ','
                    << r.history.steps.size() << ','
                    << (r.history.incumbent.empty() ? "nan" : format_double(r.history.incumbent.back())) << '\n';
        }
    }
    write_file_atomic((outdir / "summary.csv").string(), [&](std::ostream& o) { o << summary.str(); });
    return failures;
}

void write_average_rank(const std::map<std::string, std::vector<BoHistory>>& histories, const fs::path& outdir) {
    const auto curves = average_rank_metric(histories);
    for (const auto& [name, curve] : curves)
        write_file_atomic((outdir / "average_rank" / (safe_name(name) + ".csv")).string(),
                          [&](std::ostream& o) { write_metric_csv(o, curve); });
    write_file_atomic((outdir / "average_rank.csv").string(), [&](std::ostream& o) { write_wide_metric_csv(o, curves); });
}

void check_cells(const std::vector<Task>& tasks, const RunConfig& c) {
    for (const auto& t : tasks)
        if (c.inits > t.size())
            throw ConfigError("task '" + t.id + "' has " + std::to_string(t.size()) + " candidates, fewer than " +
                              std::to_string(c.inits) + " initial points");
    if (c.inits == 0) throw ConfigError("inits must be at least 1");
    if (c.jobs == 0) throw ConfigError("jobs must be at least 1");
    if (c.method != "dre" && c.method != "random") throw ConfigError("unknown method '" + c.method + "'");
}

BoOptions bo_options(const RunConfig& c, const Extras& x, const DreConfig& trained) {
    BoOptions o;
    o.acquisition = c.acquisition;
    o.fine_tune = c.fine_tune;
    o.reset_each_step = c.reset_each_step;
    o.fine_tune_settings = x.bo_train ? *x.bo_train : (c.random_init ? trained.random_init_train : trained.fine_tune);
    if (o.fine_tune_settings.epochs == 0 || !(o.fine_tune_settings.lr > 0.0))
        throw ConfigError("BO fine-tuning needs epochs >= 1 and lr > 0");
    return o;
}

std::vector<Cell> make_cells(const std::vector<Task>& tasks, const RunConfig& c) {
    std::vector<Cell> cells;
    for (const auto& t : tasks)
        for (std::uint64_t s : c.run_seeds()) cells.push_back({&t, s});
    return cells;
}

void check_model(const DreModel& m, const std::vector<Task>& tasks) {
    for (const auto& t : tasks)
        if (t.dim() != m.input_dim)
            throw ShapeError("task '" + t.id + "' has dimension " + std::to_string(t.dim()) + " but the model expects " +
                             std::to_string(m.input_dim));
}

int cmd_meta_train(const RunConfig& c, std::ostream& out, std::ostream&) {
    if (c.meta_dataset.empty()) throw ConfigError("meta-train needs --meta-dataset");
    c.dre.validate();
    const MetaDataset ds = load_meta_dataset(c.meta_dataset, c.search_space);
    const fs::path outdir(c.output);
    const std::string model_path = c.model.empty() ? (outdir / "model.drem").string() : c.model;
    spdlog::info("meta-training on {} tasks of '{}'", ds.tasks.size(), ds.search_space_id);
    const auto result = meta_train(c.dre, ds);
    save_model_file(model_path, result.model);
    write_file_atomic((outdir / "meta_train_loss.csv").string(), [&](std::ostream& o) {
        o << "epoch,loss\n";
        for (std::size_t e = 0; e < result.loss_history.size(); ++e)
            o << e + 1 << ',' << format_double(result.loss_history[e]) << '\n';
    });
    out << "model written to " << model_path << '\n';
    return 0;
}

std::string default_label(const RunConfig& c) {
    if (c.method == "random") return "random";
    return c.random_init ? "dre-ri" : "dre";
}

int cmd_run_bo(const RunConfig& c, const Extras& x, std::ostream& out, std::ostream& err) {
    check_cells({}, c);
    const auto tasks = build_tasks(c);
    check_cells(tasks, c);
    std::optional<DreModel> model;
    Variant v;
    v.label = default_label(c);
    v.method = c.method;
    v.random_init = c.random_init;
    if (c.method == "dre") {
        if (c.random_init) {
            c.dre.validate();
            v.dre = c.dre;
            v.options = bo_options(c, x, c.dre);
        } else {
            if (c.model.empty()) throw ConfigError("run-bo needs --model (or --random-init)");
            model = load_model_file(c.model);
            check_model(*model, tasks);
            v.model = &*model;
            v.options = bo_options(c, x, model->config);
        }
    }
    const auto cells = make_cells(tasks, c);
    const std::vector<Variant> variants{v};
    const auto results = run_campaign(variants, cells, c);
    const std::size_t failures = write_campaign(variants, cells, results, fs::path(c.output), err);
    out << cells.size() - failures << "/" << cells.size() << " runs completed\n";
    return failures == 0 ? 0 : 1;
}

bool is_acq_variant(const std::string& v) { return v == "ei" || v == "lcb" || v == "avg"; }

int cmd_ablate(const RunConfig& c, const Extras& x, std::ostream& out, std::ostream& err) {
    if (c.variants.empty()) throw ConfigError("ablate needs --variants");
    check_cells({}, c);
    const auto tasks = build_tasks(c);
    check_cells(tasks, c);
    std::set<std::string> seen;
    for (const auto& name : c.variants)
        if (!seen.insert(name).second) throw ConfigError("variant '" + name + "' listed twice");

    // Resolve every variant before training anything.
    std::vector<Variant> variants;
    std::vector<std::string> train_keys;
    std::map<std::string, DreConfig> to_train;
    std::optional<DreModel> loaded;
    for (const auto& name : c.variants) {
        Variant v;
        v.label = name;
        v.random_init = c.random_init;
        DreConfig dre = c.dre;
        Acquisition acq = c.acquisition;
        if (name == "random") {
            v.method = "random";
        } else if (is_acq_variant(name)) {
            acq.kind = parse_acq_kind(name);
        } else if (name == "meta-features" || name == "no-meta-features") {
            dre.use_meta_features = name == "meta-features";
        } else {
            try {
                dre.loss = parse_loss_kind(name);
            } catch (const ConfigError&) {
                throw ConfigError("unknown variant '" + name + "'");
            }
        }
        dre.validate();
        v.dre = dre;
        const bool changes_model = dre != c.dre;
        if (v.method == "dre" && !c.random_init) {
            if (!c.meta_dataset.empty()) {
                to_train.emplace(config_to_json(dre), dre);
            } else if (changes_model) {
                throw ConfigError("variant '" + name + "' changes the surrogate; give --meta-dataset or --random-init");
            } else if (c.model.empty()) {
                throw ConfigError("ablate needs --model, --meta-dataset or --random-init");
            }
        }
        RunConfig vc = c;
        vc.acquisition = acq;
        v.options = bo_options(vc, x, dre);
        variants.push_back(std::move(v));
    }
    std::optional<MetaDataset> meta;
    if (!to_train.empty()) meta = load_meta_dataset(c.meta_dataset, c.search_space);
    if (!c.random_init && c.meta_dataset.empty() && !c.model.empty()) {
        loaded = load_model_file(c.model);
        check_model(*loaded, tasks);
    }
    if (meta && meta->dim() != tasks.front().dim()) throw ShapeError("meta-dataset and task dimensions differ");
    for (const auto& t : tasks)
        if (t.dim() != tasks.front().dim()) throw ShapeError("ablation tasks must share one dimension");

    std::map<std::string, DreModel> trained;
    for (const auto& [key, dre] : to_train) {
        spdlog::info("meta-training surrogate for an ablation variant");
        trained.emplace(key, meta_train(dre, *meta).model);
    }
    for (auto& v : variants) {
        if (v.method != "dre" || v.random_init) continue;
        if (loaded) {
            v.model = &*loaded;
            if (!x.bo_train) v.options.fine_tune_settings = loaded->config.fine_tune;
        } else {
            v.model = &trained.at(config_to_json(v.dre));
        }
    }

    const auto cells = make_cells(tasks, c);
    const auto results = run_campaign(variants, cells, c);
    const fs::path outdir(c.output);
    const std::size_t failures = write_campaign(variants, cells, results, outdir, err);
    if (failures > 0) {
        out << failures << " runs failed; average-rank curves not written\n";
        return 1;
    }
    std::map<std::string, std::vector<BoHistory>> histories;
    for (std::size_t vi = 0; vi < variants.size(); ++vi)
        for (const auto& r : results[vi]) histories[variants[vi].label].push_back(r.history);
    write_average_rank(histories, outdir);
    out << variants.size() << " variants x " << cells.size() << " runs completed\n";
    return 0;
}

int cmd_metrics(const RunConfig& c, std::ostream& out, std::ostream&) {
    if (c.histories.empty()) throw ConfigError("metrics needs --histories");
    const fs::path root(c.histories);
    if (!fs::is_directory(root)) throw IoError("'" + c.histories + "' is not a directory");
    std::map<std::string, std::map<std::string, BoHistory>> by_method;
    for (const auto& dir : fs::directory_iterator(root)) {
        if (!dir.is_directory()) continue;
        const std::string method = dir.path().filename().string();
        if (method == "average_rank") continue;
        for (const auto& f : fs::directory_iterator(dir.path())) {
            if (f.path().extension() != ".csv") continue;
            std::ifstream in(f.path());
            if (!in) throw IoError("cannot read '" + f.path().string() + "'");
            try {
                by_method[method][f.path().filename().string()] = read_history_csv(in);
            } catch (const SchemaError& e) {
                throw SchemaError(f.path().string() + ": " + e.what());
            }
        }
    }
    if (by_method.empty()) throw AlignmentError("no method directories with history CSVs under '" + c.histories + "'");
    const auto& reference = by_method.begin()->second;
    std::map<std::string, std::vector<BoHistory>> histories;
    for (const auto& [method, files] : by_method) {
        for (const auto& [name, _] : reference)
            if (!files.contains(name)) throw AlignmentError("method '" + method + "' is missing cell '" + name + "'");
        for (const auto& [name, _] : files)
            if (!reference.contains(name))
                throw AlignmentError("cell '" + name + "' of method '" + method + "' is missing elsewhere");
        for (const auto& [name, h] : files) histories[method].push_back(h);
    }
    write_average_rank(histories, fs::path(c.output));
    out << "average ranks of " << histories.size() << " methods over " << reference.size() << " cells written to "
        << c.output << '\n';
    return 0;
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
    RunConfig c;
    Extras x;
    apply_json(parse_json_text(text, "config"), c, x);
    return c;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    setup_logging();
    CLI::App app{"Deep ranking ensembles for Bayesian optimization"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, meta_dataset, tasks, search_space, model, output, histories, acq, loss, weights, method;
    std::vector<std::uint64_t> seeds;
    std::uint64_t master_seed = 0;
    std::size_t num_seeds = 0, jobs = 0, iterations = 0, inits = 0, epochs = 0, ft_epochs = 0;
    double beta = 0.0, ft_lr = 0.0;
    std::vector<std::string> sinusoids, variants;
    bool no_meta = false, no_ft = false, random_init = false, reset = false;

    auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
    auto* o_meta = app.add_option("--meta-dataset", meta_dataset, "meta-training tasks (JSON)");
    auto* o_tasks = app.add_option("--tasks", tasks, "BO tasks (meta-dataset JSON)");
    auto* o_space = app.add_option("--search-space", search_space, "search space id inside the JSON files");
    auto* o_sin = app.add_option("--sinusoid", sinusoids, "analytic task beta[:amplitude]; repeatable");
    auto* o_model = app.add_option("--model", model, "model file");
    auto* o_output = app.add_option("--output", output, "output directory");
    auto* o_hist = app.add_option("--histories", histories, "directory of per-method history CSVs");
    auto* o_seed = app.add_option("--seed", seeds, "run seed; repeatable");
    auto* o_master = app.add_option("--master-seed", master_seed, "derive run seeds from one integer");
    auto* o_nseeds = app.add_option("--num-seeds", num_seeds, "number of seeds derived from --master-seed");
    auto* o_jobs = app.add_option("--jobs", jobs, "parallel runs");
    auto* o_acq = app.add_option("--acq", acq, "acquisition")->check(CLI::IsMember({"avg", "lcb", "ei"}));
    auto* o_beta = app.add_option("--beta", beta, "LCB exploration weight");
    auto* o_loss = app.add_option("--loss", loss, "training loss")
                       ->check(CLI::IsMember({"listwise-weighted", "listwise", "pairwise", "pointwise", "mse"}));
    auto* o_weights =
        app.add_option("--weights", weights, "list weights")->check(CLI::IsMember({"inv-log", "inv-linear", "pda", "uniform"}));
    auto* o_nometa = app.add_flag("--no-meta-features", no_meta, "disable the Deep Set");
    auto* o_noft = app.add_flag("--no-fine-tune", no_ft, "skip fine-tuning during BO");
    auto* o_ri = app.add_flag("--random-init", random_init, "fresh random surrogate per run");
    auto* o_reset = app.add_flag("--reset-each-step", reset, "fine-tune from the initial model every step");
    auto* o_iter = app.add_option("--iterations", iterations, "BO iterations K");
    auto* o_inits = app.add_option("--inits", inits, "initial random observations");
    auto* o_method = app.add_option("--method", method, "dre or random")->check(CLI::IsMember({"dre", "random"}));
    auto* o_epochs = app.add_option("--epochs", epochs, "meta-training iterations");
    auto* o_ftep = app.add_option("--fine-tune-epochs", ft_epochs, "fine-tuning epochs per BO step");
    auto* o_ftlr = app.add_option("--fine-tune-lr", ft_lr, "fine-tuning learning rate");
    auto* o_var = app.add_option("--variants", variants, "ablation variants")->delimiter(',');

    auto* c_meta = app.add_subcommand("meta-train", "meta-train a DRE on a meta-dataset");
    auto* c_bo = app.add_subcommand("run-bo", "run BO campaigns");
    auto* c_ablate = app.add_subcommand("ablate", "compare variants by average rank");
    auto* c_metrics = app.add_subcommand("metrics", "average-rank curves from history CSVs");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        RunConfig c;
        Extras x;
        if (*o_config) {
            apply_json(parse_json_text(read_text_file(config_path), "config '" + config_path + "'"), c, x);
            rebase_paths(c, fs::path(config_path).parent_path());
        }
        if (*o_meta) c.meta_dataset = meta_dataset;
        if (*o_tasks) c.tasks = tasks;
        if (*o_space) c.search_space = search_space;
        for (const auto& s : sinusoids) {
            SinusoidSpec spec;
            const auto colon = s.find(':');
            try {
                std::size_t used = 0;
                const std::string b = s.substr(0, colon);
                spec.beta = std::stod(b, &used);
                if (used != b.size()) throw std::invalid_argument(s);
                if (colon != std::string::npos) {
                    const std::string a = s.substr(colon + 1);
                    spec.amplitude = std::stod(a, &used);
                    if (used != a.size()) throw std::invalid_argument(s);
                }
            } catch (const std::logic_error&) {
                throw ConfigError("--sinusoid expects beta[:amplitude], got '" + s + "'");
            }
            c.sinusoids.push_back(spec);
        }
        (void)o_sin;
        if (*o_model) c.model = model;
        if (*o_output) c.output = output;
        if (*o_hist) c.histories = histories;
        if (*o_seed) c.seeds = seeds;
        if (*o_master) {
            c.master_seed = master_seed;
            c.seeds.clear();
        }
        if (*o_nseeds) c.num_seeds = num_seeds;
        if (*o_jobs) c.jobs = jobs;
        if (*o_acq) c.acquisition.kind = parse_acq_kind(acq);
        if (*o_beta) c.acquisition.beta = beta;
        if (*o_loss) c.dre.loss = parse_loss_kind(loss);
        if (*o_weights) c.dre.weights = parse_weight_kind(weights);
        if (*o_nometa) c.dre.use_meta_features = false;
        if (*o_noft) c.fine_tune = false;
        if (*o_ri) c.random_init = true;
        if (*o_reset) c.reset_each_step = true;
        if (*o_iter) c.iterations = iterations;
        if (*o_inits) c.inits = inits;
        if (*o_method) c.method = method;
        if (*o_epochs) c.dre.meta_train.epochs = epochs;
        if (*o_ftep || *o_ftlr) {
            if (!x.bo_train) x.bo_train = c.random_init ? c.dre.random_init_train : c.dre.fine_tune;
            if (*o_ftep) x.bo_train->epochs = ft_epochs;
            if (*o_ftlr) x.bo_train->lr = ft_lr;
        }
        if (*o_var) c.variants = variants;
        if (c.master_seed && c.num_seeds == 0) throw ConfigError("num_seeds must be at least 1");
        if (c.acquisition.beta < 0.0) throw ConfigError("beta must be non-negative");
        if (!c.variants.empty() && !c_ablate->parsed()) throw ConfigError("--variants only applies to ablate");
        if (c_meta->parsed() && !c.seeds.empty()) c.dre.seed = c.seeds.front();

        if (c_meta->parsed()) return cmd_meta_train(c, out, err);
        if (c_bo->parsed()) return cmd_run_bo(c, x, out, err);
        if (c_ablate->parsed()) return cmd_ablate(c, x, out, err);
        if (c_metrics->parsed()) return cmd_metrics(c, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace rankbo::cli
