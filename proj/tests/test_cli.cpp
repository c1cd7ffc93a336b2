#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rankbo/benchmarks.hpp"
#include "rankbo/cli.hpp"
#include "rankbo/error.hpp"
#include "rankbo/random.hpp"

using namespace rankbo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rankbo_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& path) {
    const auto t = read_text(path);
    return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
}

std::string tiny_dre_json(std::size_t epochs) {
    DreConfig c;
    c.ensemble_size = 2;
    c.scorer_hidden = {6};
    c.deepset.inner_hidden = {6};
    c.deepset.inner_output = 6;
    c.deepset.outer_hidden = {6};
    c.deepset.output_dim = 3;
    c.meta_train.epochs = epochs;
    c.meta_train.batch_lists = 2;
    c.meta_train.list_size = 20;
    c.fine_tune = {5, 0.01};
    c.random_init_train = {5, 0.02};
    return config_to_json(c);
}

}  // namespace

TEST_CASE("run_config_from_json") {
    const auto defaults = cli::run_config_from_json("{}");
    CHECK(defaults.output == "out");
    CHECK(defaults.iterations == 10);
    CHECK(defaults.run_seeds() == std::vector<std::uint64_t>{0});

    const auto c = cli::run_config_from_json(R"({
        "sinusoids": [{"beta": 8}, {"beta": 2, "amplitude": 3}],
        "acquisition": "lcb", "beta": 2.5, "method": "random",
        "iterations": 4, "inits": 2, "master_seed": 9, "num_seeds": 3,
        "random_init": true, "fine_tune": false, "reset_each_step": true,
        "variants": ["ei", "avg"], "jobs": 2, "dre": {"ensemble_size": 4}
    })");
    REQUIRE(c.sinusoids.size() == 2);
    CHECK(c.sinusoids[1].amplitude == 3.0);
    CHECK(c.acquisition.kind == AcqKind::lcb);
    CHECK(c.acquisition.beta == 2.5);
    CHECK(c.method == "random");
    CHECK(c.dre.ensemble_size == 4);
    CHECK(c.random_init);
    CHECK_FALSE(c.fine_tune);
    CHECK(c.run_seeds() == std::vector<std::uint64_t>{split_seed(9, 0), split_seed(9, 1), split_seed(9, 2)});

    const auto explicit_seeds = cli::run_config_from_json(R"({"seeds": [4, 5], "master_seed": 1})");
    CHECK(explicit_seeds.run_seeds() == std::vector<std::uint64_t>{4, 5});

    CHECK_THROWS_AS(cli::run_config_from_json(R"({"iteration": 3})"), ConfigError);
    CHECK_THROWS_AS(cli::run_config_from_json(R"({"iterations": "three"})"), ConfigError);
    CHECK_THROWS_AS(cli::run_config_from_json(R"({"sinusoids": [{"beta": 1, "phase": 2}]})"), ConfigError);
    CHECK_THROWS_AS(cli::run_config_from_json(R"({"dre": {"depth": 2}})"), ConfigError);
    CHECK_THROWS_AS(cli::run_config_from_json("[1]"), ConfigError);
    CHECK_THROWS_AS(cli::run_config_from_json("{"), ConfigError);
}

TEST_CASE("command line errors exit with code 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"bogus"}).code == 2);
    CHECK(invoke({"run-bo", "--acq", "pi"}).code == 2);
    const auto no_meta = invoke({"meta-train"});
    CHECK(no_meta.code == 2);
    CHECK(no_meta.err.find("--meta-dataset") != std::string::npos);
    CHECK(invoke({"run-bo", "--sinusoid", "x:1"}).code == 2);
    CHECK(invoke({"run-bo", "--sinusoid", "0", "--variants", "ei"}).code == 2);
    CHECK(invoke({"run-bo", "--sinusoid", "0"}).err.find("--model") != std::string::npos);
    CHECK(invoke({"run-bo", "--sinusoid", "0", "--model", "/nonexistent/model.drem"}).code == 2);
    CHECK(invoke({"ablate", "--sinusoid", "0", "--random-init"}).code == 2);
    CHECK(invoke({"ablate", "--sinusoid", "0", "--random-init", "--variants", "ei,unknown"}).code == 2);
    CHECK(invoke({"ablate", "--sinusoid", "0", "--model", "m.drem", "--variants", "pairwise"}).code == 2);
    CHECK(invoke({"metrics"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("meta-train, run-bo and metrics end to end") {
    TempDir dir("e2e");
    save_meta_datasets(dir / "meta.json",
                       {to_meta_dataset("sin", {make_sinusoid_task(11), make_sinusoid_task(12), make_sinusoid_task(13)})});
    write_text(dir / "config.json", R"({"dre": )" + tiny_dre_json(6) + R"(, "meta_dataset": "meta.json", "output": "run"})");

    const auto trained = invoke({"meta-train", "--config", dir / "config.json", "--seed", "3"});
    REQUIRE(trained.code == 0);
    CHECK(fs::exists(dir / "run/model.drem"));
    CHECK(count_lines(dir / "run/meta_train_loss.csv") == 7);
    CHECK(load_model_file(dir / "run/model.drem").config.seed == 3);

    const auto again = invoke({"meta-train", "--config", dir / "config.json", "--seed", "3", "--model", dir / "again.drem"});
    REQUIRE(again.code == 0);
    CHECK(read_text(dir / "again.drem") == read_text(dir / "run/model.drem"));

    const auto one = invoke({"meta-train", "--config", dir / "config.json", "--epochs", "1", "--output", dir / "one"});
    REQUIRE(one.code == 0);
    CHECK(count_lines(dir / "one/meta_train_loss.csv") == 2);

    const auto ten = invoke({"run-bo", "--model", dir / "run/model.drem", "--sinusoid", "8", "--master-seed", "4",
                             "--num-seeds", "3", "--iterations", "10", "--inits", "3", "--output", dir / "ten"});
    REQUIRE(ten.code == 0);
    std::size_t files = 0;
    for (const auto& f : fs::directory_iterator(dir / "ten/dre")) {
        ++files;
        CHECK(count_lines(f.path().string()) == 14);
    }
    CHECK(files == 3);

    const auto bo = invoke({"run-bo", "--model", dir / "run/model.drem", "--sinusoid", "8", "--sinusoid", "0:2",
                            "--seed", "1", "--seed", "2", "--iterations", "3", "--inits", "3", "--jobs", "2",
                            "--output", dir / "bo"});
    CHECK(bo.code == 0);
    CHECK(bo.out.find("4/4 runs completed") != std::string::npos);
    CHECK(count_lines(dir / "bo/summary.csv") == 5);
    CHECK(fs::exists(dir / "bo/dre/sin_b8__seed1.csv"));
    CHECK(fs::exists(dir / "bo/dre/sin_b0_a2__seed2.csv"));
    CHECK(count_lines(dir / "bo/dre/sin_b8__seed1.csv") == 1 + 3 + 3);

    const auto serial = invoke({"run-bo", "--model", dir / "run/model.drem", "--sinusoid", "8", "--sinusoid", "0:2",
                                "--seed", "1", "--seed", "2", "--iterations", "3", "--inits", "3", "--output",
                                dir / "serial"});
    CHECK(serial.code == 0);
    CHECK(read_text(dir / "serial/dre/sin_b0_a2__seed2.csv") == read_text(dir / "bo/dre/sin_b0_a2__seed2.csv"));

    const auto rs = invoke({"run-bo", "--method", "random", "--sinusoid", "8", "--sinusoid", "0:2", "--seed", "1",
                            "--seed", "2", "--iterations", "3", "--inits", "3", "--output", dir / "bo"});
    CHECK(rs.code == 0);
    CHECK(fs::exists(dir / "bo/random/sin_b8__seed2.csv"));

    const auto metrics = invoke({"metrics", "--histories", dir / "bo", "--output", dir / "metrics"});
    CHECK(metrics.code == 0);
    const auto wide = read_text(dir / "metrics/average_rank.csv");
    CHECK(wide.rfind("step,dre,random\n", 0) == 0);
    CHECK(count_lines(dir / "metrics/average_rank.csv") == 5);
    CHECK(fs::exists(dir / "metrics/average_rank/dre.csv"));

    fs::remove(dir / "bo/random/sin_b8__seed2.csv");
    const auto misaligned = invoke({"metrics", "--histories", dir / "bo", "--output", dir / "metrics2"});
    CHECK(misaligned.code == 2);
    CHECK(misaligned.err.find("sin_b8__seed2.csv") != std::string::npos);
}

TEST_CASE("lcb with beta 0 reproduces average rank") {
    TempDir dir("lcb");
    write_text(dir / "config.json", R"({"dre": )" + tiny_dre_json(4) + "}");
    const std::vector<std::string> common{"--config", dir / "config.json", "--random-init", "--sinusoid", "5",
                                          "--seed", "7", "--seed", "8", "--iterations", "4"};
    auto lcb = std::vector<std::string>{"run-bo", "--acq", "lcb", "--beta", "0", "--output", dir / "lcb"};
    auto avg = std::vector<std::string>{"run-bo", "--acq", "avg", "--output", dir / "avg"};
    lcb.insert(lcb.end(), common.begin(), common.end());
    avg.insert(avg.end(), common.begin(), common.end());
    REQUIRE(invoke(lcb).code == 0);
    REQUIRE(invoke(avg).code == 0);
    for (const char* f : {"/dre-ri/sin_b5__seed7.csv", "/dre-ri/sin_b5__seed8.csv"})
        CHECK(read_text(dir / (std::string("lcb") + f)) == read_text(dir / (std::string("avg") + f)));
}

TEST_CASE("run-bo rejects a pool smaller than the initial design") {
    TempDir dir("small");
    write_text(dir / "tasks.json", R"({"s": {"tiny": {"X": [[0.0], [1.0]], "y": [1, 2]}}})");
    const auto r = invoke({"run-bo", "--method", "random", "--tasks", dir / "tasks.json", "--inits", "3", "--output",
                           dir / "out"});
    CHECK(r.code == 2);
    CHECK(r.err.find("tiny") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("ablate") {
    TempDir dir("ablate");
    write_text(dir / "config.json", R"({"dre": )" + tiny_dre_json(4) + "}");
    const auto r = invoke({"ablate", "--config", dir / "config.json", "--random-init", "--sinusoid", "3", "--seed", "1",
                        "--iterations", "2", "--variants", "random,ei,avg,pairwise", "--output", dir / "out"});
    CHECK(r.code == 0);
    for (const char* v : {"random", "ei", "avg", "pairwise"}) {
        CHECK(fs::exists(dir / (std::string("out/average_rank/") + v + ".csv")));
        CHECK(fs::exists(dir / (std::string("out/") + v + "/sin_b3__seed1.csv")));
    }
    CHECK(read_text(dir / "out/average_rank.csv").rfind("step,avg,ei,pairwise,random\n", 0) == 0);

    const auto acqs = invoke({"ablate", "--config", dir / "config.json", "--random-init", "--sinusoid", "3",
                              "--sinusoid", "9", "--seed", "1", "--seed", "2", "--iterations", "3", "--variants",
                              "ei,lcb,avg,random", "--output", dir / "acq"});
    CHECK(acqs.code == 0);
    for (const char* v : {"ei", "lcb", "avg", "random"}) {
        std::ifstream in(dir / (std::string("acq/average_rank/") + v + ".csv"));
        std::string line;
        std::getline(in, line);
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            const double value = std::stod(line.substr(line.find(',') + 1));
            CHECK(value >= 1.0);
            CHECK(value <= 4.0);
            ++rows;
        }
        CHECK(rows == 4);
    }

    const auto losses = invoke({"ablate", "--config", dir / "config.json", "--random-init", "--sinusoid", "3", "--seed",
                                "1", "--iterations", "2", "--variants", "listwise-weighted,mse", "--output",
                                dir / "loss"});
    CHECK(losses.code == 0);
    CHECK(fs::exists(dir / "loss/average_rank/listwise-weighted.csv"));
    CHECK(fs::exists(dir / "loss/average_rank/mse.csv"));

    const auto single = invoke({"ablate", "--config", dir / "config.json", "--random-init", "--sinusoid", "3", "--seed",
                                "1", "--iterations", "2", "--variants", "ei", "--output", dir / "single"});
    CHECK(single.code == 0);
    CHECK(read_text(dir / "single/average_rank/ei.csv") == "step,value\n0,1\n1,1\n2,1\n");

    save_meta_datasets(dir / "meta.json", {to_meta_dataset("sin", {make_sinusoid_task(11), make_sinusoid_task(12)})});
    const auto meta = invoke({"ablate", "--config", dir / "config.json", "--meta-dataset", dir / "meta.json", "--sinusoid",
                           "3", "--iterations", "1", "--variants", "no-meta-features,meta-features", "--output",
                           dir / "meta_out"});
    CHECK(meta.code == 0);
    CHECK(fs::exists(dir / "meta_out/average_rank.csv"));
}

TEST_CASE("failed runs give exit code 1 and no curves") {
    TempDir dir("fail");
    write_text(dir / "config.json", R"({"dre": )" + tiny_dre_json(4) + "}");
    write_text(dir / "tasks.json", R"({"s": {"tiny": {"X": [[0.0], [1.0], [2.0]], "y": [1, 2, 3]}}})");
    const auto r = invoke({"ablate", "--config", dir / "config.json", "--random-init", "--tasks", dir / "tasks.json",
                        "--inits", "2", "--iterations", "5", "--variants", "ei,random", "--output", dir / "out"});
    CHECK(r.code == 1);
    CHECK(r.err.find("pool exhausted") != std::string::npos);
    CHECK(r.err.find("task=tiny seed=0") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out/average_rank.csv"));
    CHECK(read_text(dir / "out/summary.csv").find("pool_exhausted") != std::string::npos);
}
