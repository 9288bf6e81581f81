#pragma once

#include "vbr/cli/config.hpp"

#include <Eigen/Dense>
#include <iosfwd>

namespace vbr::cli {

enum ExitCode : int { kConverged = 0, kInputError = 1, kNotConverged = 2, kUsage = 64 };

/// Reads a comma-separated numeric matrix. `columns` < 0 accepts any width as long as
/// every row agrees with the first. Blank lines and '#' comments are skipped.
Eigen::MatrixXd read_csv(const std::filesystem::path &path, int columns);

ModelSpec build_model(const RunConfig &config);

/// One JSON object per line: {"iter","elbo","residual"} records, then {"final": ...}.
void write_trace(std::ostream &out, const RunConfig &config, const FitTrace &trace);

/// Fits, writes the trace to config.output_path (or `fallback` when unset) and returns
/// kConverged or kNotConverged. Input problems throw InputError.
int run_fit(const RunConfig &config, std::ostream &fallback);

} // namespace vbr::cli
