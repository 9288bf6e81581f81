#include "vbr/cli/run.hpp"

#include "vbr/error.hpp"
#include "vbr/models/gmm.hpp"
#include "vbr/models/logit_normal.hpp"
#include "vbr/models/matfac.hpp"
#include "vbr/models/simple_mixture.hpp"
#include "vbr/models/two_level.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

namespace vbr::cli {

namespace {

std::string number(double v) {
  if (!std::isfinite(v)) {
    return "null";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string array(const Vector &v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += (i ? "," : "") + number(v[i]);
  }
  return out + "]";
}

std::string quoted(const std::string &s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
    }
    out += c;
  }
  return out + "\"";
}

} // namespace

Eigen::MatrixXd read_csv(const std::filesystem::path &path, int columns) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open data file '" + path.string() + "'");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  int expected = columns;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (field.find_first_not_of(" \t\r", used) != std::string::npos) {
          throw std::invalid_argument(field);
        }
        row.push_back(v);
      } catch (const std::exception &) {
        throw InputError(path.string() + ": data row " + std::to_string(lineno) + ": '" + field +
                         "' is not a number");
      }
    }
    if (!line.empty() && line.back() == ',') {
      row.push_back(std::nan("")); // forces the arity error below
    }
    if (expected < 0) {
      expected = static_cast<int>(row.size());
    }
    if (static_cast<int>(row.size()) != expected) {
      throw InputError(path.string() + ": data row " + std::to_string(lineno) + ": expected " +
                       std::to_string(expected) + " values, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw InputError("data file '" + path.string() + "' has no rows");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), expected);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < expected; ++c) {
      out(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
  }
  return out;
}

ModelSpec build_model(const RunConfig &config) {
  try {
    switch (config.model) {
    case ModelKind::SimpleMixture:
      return models::make_simple_mixture({config.pi0, config.pa, config.pb}, config.seed);
    case ModelKind::TwoLevel: {
      const Eigen::MatrixXd y = read_csv(config.data_path, 2);
      return models::make_two_level({y.col(0), y.col(1), config.alpha0, config.beta0}, config.seed,
                                    config.base_measure);
    }
    case ModelKind::GMM2: {
      GMMData data;
      data.Y = read_csv(config.data_path, -1);
      const auto d = data.Y.cols();
      data.alpha0 = config.alpha0;
      data.beta0 = config.beta0;
      data.gamma0 = config.gamma0;
      data.nu0 = config.nu0.value_or(static_cast<double>(d) + 1.0);
      data.W0 = config.w0 * Eigen::MatrixXd::Identity(d, d);
      return models::make_gmm(data, config.seed);
    }
    case ModelKind::MatFacVMP:
    case ModelKind::MatFacPPCA:
    case ModelKind::MatFacALS: {
      const auto variant = config.model == ModelKind::MatFacVMP    ? models::MatFacVariant::VMP
                           : config.model == ModelKind::MatFacPPCA ? models::MatFacVariant::PPCA
                                                                   : models::MatFacVariant::ALS;
      return models::make_matfac({read_csv(config.data_path, -1), config.K, config.delta_u, config.delta_v},
                                 variant, config.seed);
    }
    case ModelKind::LogitNormal: {
      const Eigen::MatrixXd y = read_csv(config.data_path, 2);
      return models::make_logit_normal({y.col(0), y.col(1), config.m}, config.seed);
    }
    }
  } catch (const DomainError &e) {
    throw InputError(e.what());
  }
  throw InputError("unsupported model");
}

void write_trace(std::ostream &out, const RunConfig &config, const FitTrace &trace) {
  for (const auto &r : trace.records) {
    out << "{\"iter\":" << r.iteration << ",\"elbo\":" << number(r.elbo) << ",\"residual\":" << number(r.residual)
        << "}\n";
  }
  out << "{\"final\":{\"model\":" << quoted(to_string(config.model))
      << ",\"converged\":" << (trace.converged ? "true" : "false")
      << ",\"iterations\":" << (trace.records.empty() ? 0 : trace.records.back().iteration) << ",\"nodes\":[";
  for (std::size_t i = 0; i < trace.final_state.size(); ++i) {
    const auto &node = trace.final_state[i];
    out << (i ? "," : "") << "{\"id\":" << quoted(node.id()) << ",\"family\":" << quoted(to_string(node.family()))
        << ",\"lambda\":" << array(node.lambda().values()) << ",\"mu\":" << array(node.mu().values()) << "}";
  }
  out << "]}}\n";
}

int run_fit(const RunConfig &config, std::ostream &fallback) {
  const ModelSpec model = build_model(config);
  FitTrace trace;
  try {
    trace = fit(model, config.schedule, {config.tol, config.max_iter, false});
  } catch (const ConfigError &e) {
    throw InputError(e.what());
  }
  if (config.output_path.empty()) {
    write_trace(fallback, config, trace);
  } else {
    std::ofstream out(config.output_path, std::ios::binary);
    if (!out) {
      throw InputError("cannot write output file '" + config.output_path.string() + "'");
    }
    write_trace(out, config, trace);
  }
  return trace.converged ? kConverged : kNotConverged;
}

} // namespace vbr::cli
