#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rankbo/acquisition.hpp"
#include "rankbo/surrogate.hpp"

namespace rankbo::cli {

struct SinusoidSpec {
    double beta = 0.0;
    double amplitude = 1.0;
};

/// Settings shared by every command. Loaded from `--config` and then
/// overridden by flags.
struct RunConfig {
    std::string meta_dataset;  // meta-train input
    std::string tasks;         // run-bo / ablate tabular tasks (meta-dataset JSON)
    std::string search_space;  // selects a space in multi-space files
    std::vector<SinusoidSpec> sinusoids;  // analytic tasks on the [-10, 10] grid
    std::string model;
    std::string output = "out";
    std::string histories;  // metrics input directory

    DreConfig dre;
    Acquisition acquisition;
    std::string method = "dre";  // dre | random
    bool random_init = false;
    bool fine_tune = true;
    bool reset_each_step = false;
    std::size_t iterations = 10;
    std::size_t inits = 5;

    std::vector<std::uint64_t> seeds;
    std::optional<std::uint64_t> master_seed;
    std::size_t num_seeds = 1;

    std::vector<std::string> variants;
    std::size_t jobs = 1;

    /// Explicit seeds, or `num_seeds` streams of the master seed.
    std::vector<std::uint64_t> run_seeds() const;
};

RunConfig run_config_from_json(const std::string& text);

/// Runs one command line (argv without the program name) in-process.
/// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rankbo::cli
