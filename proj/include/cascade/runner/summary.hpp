#pragma once

#include <filesystem>
#include <string>

namespace cascade::runner {

// Signed percentage change with one decimal, e.g. "-73.1%"; "n/a" when the
// initial value is 0.
std::string format_delta(double attacked, double initial);

// summary.md content rebuilt from the files of an experiment directory.
std::string render_summary(const std::filesystem::path& experiment_dir);

}  // namespace cascade::runner
