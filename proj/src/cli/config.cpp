#include "vbr/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace vbr::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string &key, const std::string &value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) {
      return v;
    }
  } catch (const std::exception &) {
  }
  throw InputError("config key '" + key + "' expects a number, got '" + value + "'");
}

std::uint64_t to_unsigned(const std::string &key, const std::string &value) {
  std::uint64_t v = 0;
  const auto *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InputError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "yes") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no") {
    return false;
  }
  throw InputError("config key '" + key + "' expects true/false, got '" + value + "'");
}

ModelKind to_model(const std::string &value) {
  static const std::map<std::string, ModelKind> kinds{
      {"simple_mixture", ModelKind::SimpleMixture}, {"two_level", ModelKind::TwoLevel},
      {"gmm2", ModelKind::GMM2},                    {"matfac_vmp", ModelKind::MatFacVMP},
      {"matfac_ppca", ModelKind::MatFacPPCA},       {"matfac_als", ModelKind::MatFacALS},
      {"logitnormal", ModelKind::LogitNormal}};
  const auto it = kinds.find(value);
  if (it == kinds.end()) {
    throw InputError("unknown model '" + value + "'");
  }
  return it->second;
}

std::set<std::string> model_keys(ModelKind kind) {
  switch (kind) {
  case ModelKind::SimpleMixture:
    return {"pi0", "pa", "pb"};
  case ModelKind::TwoLevel:
    return {"alpha0", "beta0", "base_measure"};
  case ModelKind::GMM2:
    return {"alpha0", "beta0", "gamma0", "nu0", "w0"};
  case ModelKind::MatFacVMP:
  case ModelKind::MatFacPPCA:
  case ModelKind::MatFacALS:
    return {"K", "delta_u", "delta_v"};
  case ModelKind::LogitNormal:
    return {"m"};
  }
  return {};
}

const std::set<std::string> kModelSpecific{"pi0",    "pa",  "pb", "alpha0", "beta0",   "base_measure", "gamma0",
                                           "nu0",    "w0",  "K",  "delta_u", "delta_v", "m"};

} // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::SimpleMixture:
    return "simple_mixture";
  case ModelKind::TwoLevel:
    return "two_level";
  case ModelKind::GMM2:
    return "gmm2";
  case ModelKind::MatFacVMP:
    return "matfac_vmp";
  case ModelKind::MatFacPPCA:
    return "matfac_ppca";
  case ModelKind::MatFacALS:
    return "matfac_als";
  case ModelKind::LogitNormal:
    return "logitnormal";
  }
  return "unknown";
}

RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
  std::map<std::string, std::pair<std::string, int>> entries;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string body = trim(line);
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw InputError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (!entries.emplace(key, std::pair{value, lineno}).second) {
      throw InputError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }

  RunConfig cfg;
  const auto model_it = entries.find("model");
  if (model_it == entries.end()) {
    throw InputError("config is missing the 'model' key");
  }
  cfg.model = to_model(model_it->second.first);
  if (cfg.model == ModelKind::LogitNormal) {
    // CAVI cannot run a non-conjugate node
    cfg.schedule.kind = ScheduleKind::ParallelBLR;
    cfg.schedule.rho_local = 0.5;
  }

  using Setter = std::function<void(const std::string &, const std::string &)>;
  const std::map<std::string, Setter> setters{
      {"model", [](const std::string &, const std::string &) {}},
      {"schedule",
       [&](const std::string &k, const std::string &v) {
         if (v == "cavi") {
           cfg.schedule.kind = ScheduleKind::CAVI;
         } else if (v == "svi") {
           cfg.schedule.kind = ScheduleKind::SVI;
         } else if (v == "parallel") {
           cfg.schedule.kind = ScheduleKind::ParallelBLR;
         } else {
           throw InputError("config key '" + k + "' must be cavi, svi or parallel, got '" + v + "'");
         }
       }},
      {"rho", [&](const std::string &k, const std::string &v) { cfg.schedule.rho_local = to_double(k, v); }},
      {"kappa",
       [&](const std::string &k, const std::string &v) { cfg.schedule.global_rate.kappa = to_double(k, v); }},
      {"tau", [&](const std::string &k, const std::string &v) { cfg.schedule.global_rate.tau = to_double(k, v); }},
      {"shuffle",
       [&](const std::string &k, const std::string &v) {
         if (to_bool(k, v)) {
           cfg.schedule.shuffle_seed = cfg.seed;
         }
       }},
      {"threads",
       [&](const std::string &k, const std::string &v) {
         cfg.schedule.threads = static_cast<unsigned>(to_unsigned(k, v));
       }},
      {"tol", [&](const std::string &k, const std::string &v) { cfg.tol = to_double(k, v); }},
      {"max_iter", [&](const std::string &k, const std::string &v) { cfg.max_iter = to_unsigned(k, v); }},
      {"seed",
       [&](const std::string &k, const std::string &v) {
         cfg.seed = to_unsigned(k, v);
         cfg.schedule.seed = cfg.seed;
       }},
      {"data", [&](const std::string &, const std::string &v) { cfg.data_path = base_dir / v; }},
      {"output", [&](const std::string &, const std::string &v) { cfg.output_path = base_dir / v; }},
      {"pi0", [&](const std::string &k, const std::string &v) { cfg.pi0 = to_double(k, v); }},
      {"pa", [&](const std::string &k, const std::string &v) { cfg.pa = to_double(k, v); }},
      {"pb", [&](const std::string &k, const std::string &v) { cfg.pb = to_double(k, v); }},
      {"alpha0", [&](const std::string &k, const std::string &v) { cfg.alpha0 = to_double(k, v); }},
      {"beta0", [&](const std::string &k, const std::string &v) { cfg.beta0 = to_double(k, v); }},
      {"base_measure",
       [&](const std::string &k, const std::string &v) {
         if (v == "unit") {
           cfg.base_measure = BaseMeasure::Unit;
         } else if (v == "haldane") {
           cfg.base_measure = BaseMeasure::Haldane;
         } else {
           throw InputError("config key '" + k + "' must be unit or haldane, got '" + v + "'");
         }
       }},
      {"gamma0", [&](const std::string &k, const std::string &v) { cfg.gamma0 = to_double(k, v); }},
      {"nu0", [&](const std::string &k, const std::string &v) { cfg.nu0 = to_double(k, v); }},
      {"w0", [&](const std::string &k, const std::string &v) { cfg.w0 = to_double(k, v); }},
      {"K", [&](const std::string &k, const std::string &v) { cfg.K = static_cast<int>(to_unsigned(k, v)); }},
      {"delta_u", [&](const std::string &k, const std::string &v) { cfg.delta_u = to_double(k, v); }},
      {"delta_v", [&](const std::string &k, const std::string &v) { cfg.delta_v = to_double(k, v); }},
      {"m", [&](const std::string &k, const std::string &v) { cfg.m = to_double(k, v); }},
  };

  const auto allowed = model_keys(cfg.model);
  // seed goes first so that `shuffle` picks it up regardless of line order
  std::vector<std::pair<std::string, std::pair<std::string, int>>> ordered(entries.begin(), entries.end());
  std::stable_partition(ordered.begin(), ordered.end(), [](const auto &e) { return e.first == "seed"; });
  for (const auto &[key, entry] : ordered) {
    const auto &[value, lineno] = entry;
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (kModelSpecific.contains(key) && !allowed.contains(key)) {
      throw InputError("config line " + std::to_string(lineno) + ": key '" + key + "' is not used by model " +
                       to_string(cfg.model));
    }
    it->second(key, value);
  }

  if (!(cfg.tol > 0.0)) {
    throw InputError("config key 'tol' must be > 0");
  }
  try {
    cfg.schedule.validate();
  } catch (const std::exception &e) {
    throw InputError(e.what());
  }
  if (cfg.model == ModelKind::SimpleMixture && !cfg.data_path.empty()) {
    throw InputError("model simple_mixture takes pi0, pa and pb from the config, not a data file");
  }
  if (cfg.model != ModelKind::SimpleMixture && cfg.data_path.empty()) {
    throw InputError("model " + to_string(cfg.model) + " needs a 'data' file");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open config file '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

} // namespace vbr::cli
