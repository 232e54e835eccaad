#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evgrad/trainer.hpp"

namespace evgrad {

// Inclusive seed range parsed from "a..b" or a single "a".
struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

SeedRange parse_seed_range(std::string_view text);

// Saved policy and baseline parameters: "# evgrad-params v1", then seed, epoch,
// theta and phi lines. Reals use the metrics 17-digit format.
void write_params(std::ostream& out, const TrainState& state);
TrainState read_params(std::istream& in);

// Subcommands: train, probe, gradcheck, oracle. args excludes the program name.
// Returns the process exit status; diagnostics go to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evgrad
