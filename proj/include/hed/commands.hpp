#pragma once

#include <string>
#include <vector>

#include "hed/config.hpp"

namespace hed {

// Command bodies behind the CLI, callable in-process. Each returns a process
// exit code: 0 success, 2 config/input error, 3 IO error, 4 divergence.
int run_build_graph(const RunConfig& config);
int run_train(const RunConfig& config);
int run_evaluate(const RunConfig& config, const std::string& checkpoint_path);
int run_sweep(const RunConfig& config, const std::string& param,
              const std::vector<double>& values);

}  // namespace hed
