#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "evgrad/trainer.hpp"

namespace evgrad {

// Experiment config files are INI-like: `[section]` headers followed by one
// `key = value` per line; `#` starts a comment. A key may also be written fully
// qualified (`training.criterion = evm`) outside any section. Keys:
//
//   [env]       name horizon states actions rewards transitions terminal
//   [policy]    layers activation seed
//   [baseline]  layers activation seed
//   [training]  criterion batch_size gamma epochs
//               alpha alpha_decay alpha_half_life beta beta_decay beta_half_life
//               update probe_every probe_pool seed record_wall_time
//
// Lists (layers, rewards, transitions, terminal) are comma or space separated.
// Missing keys take the defaults of TrainConfig; for a chain env without tables
// the built-in four-state test chain is used, and network input/output sizes
// follow the environment when layers are not given. Unknown keys are errors.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);

// Effective config in the same format; parse_config(format_config(c)) == c.
std::string format_config(const TrainConfig& cfg);

bool same_config(const TrainConfig& a, const TrainConfig& b);

}  // namespace evgrad
