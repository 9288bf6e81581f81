#include "vbr/checks.hpp"
#include "vbr/cli/run.hpp"
#include "vbr/error.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("vbr");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char *level = std::getenv("VBR_LOG_LEVEL")) {
    const auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to off
    if (parsed != spdlog::level::off || std::string_view(level) == "off") {
      spdlog::set_level(parsed);
    } else {
      spdlog::warn("ignoring unknown VBR_LOG_LEVEL '{}'", level);
    }
  }
}

void print_suite(const vbr::checks::SuiteResult &r) {
  for (const auto &f : r.failures) {
    spdlog::error("[{}] {}", r.name, f);
  }
  std::cout << "{\"suite\":\"" << r.name << "\",\"passed\":" << r.passed << ",\"failed\":" << r.failed
            << ",\"status\":\"" << (r.ok() ? "pass" : "fail") << "\"}\n";
}

int run_check(const std::string &suite) {
  using namespace vbr;
  if (suite == "all") {
    checks::SuiteResult total{"all"};
    for (const auto &name : checks::suite_names()) {
      const auto r = *checks::run_suite(name);
      print_suite(r);
      total.passed += r.passed;
      total.failed += r.failed;
    }
    print_suite(total);
    return total.ok() ? 0 : 1;
  }
  const auto r = checks::run_suite(suite);
  if (!r) {
    std::cerr << "vbr check: unknown suite '" << suite << "' (expected one of:";
    for (const auto &name : checks::suite_names()) {
      std::cerr << ' ' << name;
    }
    std::cerr << " all)\n";
    return cli::kUsage;
  }
  print_suite(*r);
  return r->ok() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  configure_logging();

  CLI::App app{"Variational inference by reading off natural-parameter coefficients"};
  app.require_subcommand(1);

  std::string config_path;
  auto *fit_cmd = app.add_subcommand("fit", "Fit a model described by a key=value config file");
  fit_cmd->add_option("--config", config_path, "Config file")->required();

  std::string suite;
  auto *check_cmd = app.add_subcommand("check", "Run an invariant suite");
  check_cmd->add_option("suite", suite, "Suite name, or 'all'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vbr::cli::kUsage;
  }

  try {
    if (*fit_cmd) {
      return vbr::cli::run_fit(vbr::cli::load_config(config_path), std::cout);
    }
    return run_check(suite);
  } catch (const vbr::cli::InputError &e) {
    std::cerr << "vbr: " << e.what() << '\n';
    return vbr::cli::kInputError;
  } catch (const vbr::DomainError &e) {
    std::cerr << "vbr: " << e.what() << '\n';
    return vbr::cli::kInputError;
  } catch (const std::exception &e) {
    std::cerr << "vbr: internal error: " << e.what() << '\n';
    return 3;
  }
}
