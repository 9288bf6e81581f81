#include "vbr/checks.hpp"
#include "vbr/cli/config.hpp"
#include "vbr/cli/run.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

using namespace vbr;
using namespace vbr::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("vbr_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path &path() const { return path_; }

  fs::path write(const std::string &name, const std::string &text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

private:
  fs::path path_;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> column(const std::string &trace, const std::string &field) {
  std::vector<double> out;
  const std::regex re("\"" + field + "\":([-0-9.eE+]+)");
  std::istringstream in(trace);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (line.rfind("{\"iter\"", 0) == 0 && std::regex_search(line, m, re)) {
      out.push_back(std::stod(m[1]));
    }
  }
  return out;
}

std::string two_level_csv(std::size_t n, std::uint64_t seed) {
  const auto d = checks::random_two_level(n, seed);
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    out << d.log_pa[i] << "," << d.log_pb[i] << "\n";
  }
  return out.str();
}

int run_binary(const std::string &args) {
  const std::string cmd = std::string(VBR_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, ParsesKeysCommentsAndDefaults) {
  const auto cfg = parse_config("# example\nmodel = two_level\ndata = y.csv  # trailing\nalpha0=2\nschedule = svi\n"
                                "kappa = 0.9\nseed = 12\nmax_iter = 0\n",
                                "/base");
  EXPECT_EQ(cfg.model, ModelKind::TwoLevel);
  EXPECT_EQ(cfg.data_path, fs::path("/base/y.csv"));
  EXPECT_DOUBLE_EQ(cfg.alpha0, 2.0);
  EXPECT_EQ(cfg.schedule.kind, ScheduleKind::SVI);
  EXPECT_DOUBLE_EQ(cfg.schedule.global_rate.kappa, 0.9);
  EXPECT_EQ(cfg.schedule.seed, 12u);
  EXPECT_EQ(cfg.max_iter, 0u);
  EXPECT_DOUBLE_EQ(cfg.tol, 1e-8);
}

TEST(Config, LogitNormalDefaultsToDampedParallel) {
  const auto cfg = parse_config("model = logitnormal\ndata = y.csv\n");
  EXPECT_EQ(cfg.schedule.kind, ScheduleKind::ParallelBLR);
  EXPECT_DOUBLE_EQ(cfg.schedule.rho_local, 0.5);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("pi0 = 0.3\n"), InputError);                                  // no model
  EXPECT_THROW(parse_config("model = simple_mixture\ncolour = red\n"), InputError);       // unknown key
  EXPECT_THROW(parse_config("model = simple_mixture\nK = 2\n"), InputError);              // wrong model
  EXPECT_THROW(parse_config("model = simple_mixture\npi0 = 0.3x\n"), InputError);         // malformed
  EXPECT_THROW(parse_config("model = simple_mixture\npi0 = 0.3\npi0 = 0.4\n"), InputError); // duplicate
  EXPECT_THROW(parse_config("model = simple_mixture\ntol = 0\n"), InputError);
  EXPECT_THROW(parse_config("model = simple_mixture\nmax_iter = -1\n"), InputError);
  EXPECT_THROW(parse_config("model = gmm2\n"), InputError); // no data
  EXPECT_THROW(parse_config("model = nope\n"), InputError);
  EXPECT_THROW(parse_config("model = simple_mixture\njust text\n"), InputError);
  EXPECT_THROW(parse_config("model = two_level\ndata = y\nschedule = svi\nkappa = 0.2\n"), InputError);
}

TEST(Csv, MalformedRowNamesRowAndArity) {
  TempDir dir;
  const auto path = dir.write("y.csv", "0.1,0.2\n0.3,0.4\n0.5\n");
  try {
    read_csv(path, 2);
    FAIL() << "expected InputError";
  } catch (const InputError &e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("row 3"), std::string::npos) << what;
    EXPECT_NE(what.find("expected 2"), std::string::npos) << what;
  }
  EXPECT_THROW(read_csv(dir.write("z.csv", "1,2\n1,abc\n"), 2), InputError);
  EXPECT_THROW(read_csv(dir.write("w.csv", "1,2,3\n4,5\n"), -1), InputError);
  EXPECT_THROW(read_csv(dir.path() / "missing.csv", 2), InputError);
}

TEST(Csv, ReadsMatrix) {
  TempDir dir;
  const auto y = read_csv(dir.write("y.csv", "# header comment\n1, 2, 3\n\n4,5,6\n"), -1);
  ASSERT_EQ(y.rows(), 2);
  ASSERT_EQ(y.cols(), 3);
  EXPECT_DOUBLE_EQ(y(1, 2), 6.0);
}

TEST(Run, SimpleMixtureRecoversPosterior) {
  TempDir dir;
  const auto cfg_path = dir.write("run.cfg", "model = simple_mixture\npi0 = 0.3\npa = 0.8\npb = 0.2\noutput = trace.jsonl\n");
  std::ostringstream unused;
  EXPECT_EQ(run_fit(load_config(cfg_path), unused), kConverged);
  const std::string trace = slurp(dir.path() / "trace.jsonl");
  EXPECT_EQ(column(trace, "iter"), (std::vector<double>{0, 1}));
  const std::regex mu("\"mu\":\\[([-0-9.eE+]+)\\]");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(trace, m, mu));
  EXPECT_NEAR(std::stod(m[1]), 0.24 / 0.38, 1e-15);
  EXPECT_NE(trace.find("\"converged\":true,\"iterations\":1"), std::string::npos);
}

TEST(Run, ZeroIterationsExitsNotConverged) {
  std::ostringstream out;
  EXPECT_EQ(run_fit(parse_config("model = simple_mixture\npi0 = 0.3\npa = 0.8\npb = 0.2\nmax_iter = 0\n"), out),
            kNotConverged);
  EXPECT_EQ(column(out.str(), "iter"), std::vector<double>{0});
}

TEST(Run, TwoLevelElboColumnIsMonotone) {
  TempDir dir;
  dir.write("y.csv", two_level_csv(10, 77));
  std::ostringstream out;
  EXPECT_EQ(run_fit(load_config(dir.write("c.cfg", "model = two_level\ndata = y.csv\ntol = 1e-8\n")), out), kConverged);
  const auto elbo = column(out.str(), "elbo");
  ASSERT_GT(elbo.size(), 2u);
  for (std::size_t t = 1; t < elbo.size(); ++t) {
    EXPECT_GE(elbo[t], elbo[t - 1] - 1e-10 * std::abs(elbo[t - 1]));
  }
  EXPECT_LT(column(out.str(), "residual").back(), 1e-8);
}

TEST(Run, TracesAreByteIdentical) {
  TempDir dir;
  std::ostringstream y;
  y.precision(17);
  const auto g = checks::separated_gmm(30, 2, 5);
  for (Eigen::Index i = 0; i < g.Y.rows(); ++i) {
    y << g.Y(i, 0) << "," << g.Y(i, 1) << "\n";
  }
  dir.write("g.csv", y.str());
  dir.write("y.csv", two_level_csv(12, 3));
  for (const std::string body : {"model = gmm2\ndata = g.csv\nseed = 9\n",
                                 "model = two_level\ndata = y.csv\nschedule = svi\nseed = 4\nmax_iter = 300\n",
                                 "model = logitnormal\ndata = y.csv\nm = 0.3\n"}) {
    const auto cfg = load_config(dir.write("c.cfg", body));
    std::ostringstream a, b;
    run_fit(cfg, a);
    run_fit(cfg, b);
    EXPECT_EQ(a.str(), b.str()) << body;
    EXPECT_GT(a.str().size(), 0u);
  }
}

TEST(Run, EveryModelRunsFromConfig) {
  TempDir dir;
  dir.write("y.csv", two_level_csv(8, 1));
  dir.write("m.csv", "1.0,0.5,-0.3\n0.2,-1.1,0.8\n0.4,0.3,0.1\n-0.7,0.9,0.0\n");
  for (const std::string model : {"matfac_vmp", "matfac_ppca", "matfac_als"}) {
    std::ostringstream out;
    EXPECT_EQ(run_fit(load_config(dir.write("c.cfg", "model = " + model + "\ndata = m.csv\nK = 2\nmax_iter = 5000\n")),
                      out),
              kConverged)
        << model;
    EXPECT_NE(out.str().find("\"final\":{\"model\":\"" + model + "\""), std::string::npos);
  }
  std::ostringstream out;
  EXPECT_EQ(run_fit(load_config(dir.write("c.cfg", "model = two_level\ndata = y.csv\nbase_measure = haldane\n")), out),
            kConverged);
}

TEST(Binary, ExitCodes) {
  TempDir dir;
  const auto ok = dir.write("ok.cfg", "model = simple_mixture\npi0 = 0.3\npa = 0.8\npb = 0.2\noutput = t.jsonl\n");
  const auto capped = dir.write("cap.cfg", "model = simple_mixture\nmax_iter = 0\noutput = t.jsonl\n");
  const auto bad = dir.write("bad.cfg", "model = simple_mixture\nbogus = 1\n");
  dir.write("short.csv", "0.1,0.2\n0.3\n");
  const auto bad_data = dir.write("bd.cfg", "model = two_level\ndata = short.csv\n");
  EXPECT_EQ(run_binary("fit --config " + ok.string()), 0);
  EXPECT_EQ(run_binary("fit --config " + capped.string()), 2);
  EXPECT_EQ(run_binary("fit --config " + bad.string()), 1);
  EXPECT_EQ(run_binary("fit --config " + bad_data.string()), 1);
  EXPECT_EQ(run_binary("fit --config " + (dir.path() / "missing.cfg").string()), 1);
  EXPECT_EQ(run_binary("check unknown-name"), 64);
  EXPECT_EQ(run_binary("frobnicate"), 64);
  EXPECT_EQ(run_binary(""), 64);
  EXPECT_EQ(run_binary("check multilinearity"), 0);
}
