#pragma once

#include "vbr/engine.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace vbr::cli {

enum class ModelKind { SimpleMixture, TwoLevel, GMM2, MatFacVMP, MatFacPPCA, MatFacALS, LogitNormal };

std::string to_string(ModelKind kind);

/// Input or configuration problem; the CLI reports it with exit status 1.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ModelKind model = ModelKind::SimpleMixture;
  Schedule schedule;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path data_path;
  std::filesystem::path output_path; // empty: stdout

  double pi0 = 0.5, pa = 1.0, pb = 1.0;
  double alpha0 = 1.0, beta0 = 1.0;
  BaseMeasure base_measure = BaseMeasure::Unit;
  double gamma0 = 1.0;
  std::optional<double> nu0; // default D + 1
  double w0 = 1.0;           // W0 = w0 * I
  int K = 1;
  double delta_u = 1.0, delta_v = 1.0;
  double m = 0.0;
};

/// Parses flat `key = value` text, '#' starts a comment. Unknown keys, keys the chosen
/// model does not use and malformed values throw InputError. Relative data and output
/// paths are resolved against `base_dir`.
RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir = {});

RunConfig load_config(const std::filesystem::path &path);

} // namespace vbr::cli
