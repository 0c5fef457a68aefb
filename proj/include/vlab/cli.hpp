#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vlab::cli {

/// Seed used when --seed is not given.
inline constexpr std::uint64_t kDefaultSeed = 20170101;

/// Everything a subcommand needs, filled from the command line.
///
/// Per-stage seeds are derived from `seed` with mix_seed: stream 1 for LSTM
/// weights (training shuffles and dropout derive from that), stream 2 for
/// Monte-Carlo forecasts, stream 3 for the simulate subcommand.
struct RunConfig {
    std::string input;
    std::string column = "Close";
    std::optional<std::string> split;
    std::string model = "garch";
    std::string dist = "skewt";
    std::size_t window = 10;
    int horizon = 10;
    std::uint64_t seed = kDefaultSeed;
    std::string out = "out";

    std::optional<int> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<double> learning_rate;
    std::string target = "return";
    std::vector<std::size_t> layers;  // empty = default architecture

    std::string fit_file;
    std::string model_file;
    std::string sector = "sector";
    int paths = 1000;
    std::size_t length = 1500;
    std::vector<std::string> reports;
};

/// Entry point. Returns 0 on success; on failure prints a one-line
/// diagnostic (plus usage for bad arguments) to `err` and returns nonzero.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// argv wrapper writing to stdout / stderr.
int run(int argc, char** argv);

}  // namespace vlab::cli
