#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "mfgc/cli.hpp"
#include "support.hpp"

using namespace mfgc;
using namespace testsup;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mfgc_test_" + std::to_string(Catch::rngSeed()) + "_" + std::to_string(counter()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter() {
    static int c = 0;
    return c++;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

MfgModel zero_k_model() {
  MfgModel m = random_affine_model(3, 2, 3, 2);
  for (int i = 0; i < 2; ++i) {
    auto& k = m.pop(i).kernel.mixture;
    k.epsilon = 0.0;
    for (int x = 0; x < 3; ++x)
      for (int a = 0; a < 2; ++a)
        for (int y = 0; y < 3; ++y) k.p0[static_cast<std::size_t>((x * 2 + a) * 3 + y)] = (y == 0) ? 0.4 : 0.3;
  }
  return m;
}

MfgModel certified_model(std::uint64_t seed) {
  for (std::uint64_t s = seed;; ++s) {
    MfgModel m = random_affine_model(s, 2, 3, 2);
    LipschitzProfile p = estimate_lipschitz(m);
    VariationalResult v = minimize_V(p, Variant::A);
    if (v.certified && v.t_o > 1.0 && stationary_certificate(p).certified) return m;
  }
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("certify: zero-coupling model certifies with zero sum") {
  TempDir dir;
  save_model(zero_k_model(), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "certify";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.mode = "stationary";
  REQUIRE(cli::run(cfg) == cli::kOk);
  nlohmann::json rep = read_json(dir.file("out") + "/report.json");
  CHECK(rep["schema"] == "mfgc-report/1");
  CHECK(rep["stationary"]["closed_form_sum"].get<double>() == 0.0);
  CHECK(rep["stationary"]["certified"].get<bool>());
}

TEST_CASE("certify: finite mode reports both variants and the regime") {
  TempDir dir;
  save_model(certified_model(5), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "certify";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.mode = "finite";
  cfg.variant = "both";
  REQUIRE(cli::run(cfg) == cli::kOk);
  nlohmann::json rep = read_json(dir.file("out") + "/report.json");
  const auto& fh = rep["finite_horizon"];
  CHECK(fh.contains("A"));
  CHECK(fh.contains("B"));
  CHECK(fh["A"].contains("r_star"));
  CHECK(fh["A"].contains("V_star"));
  CHECK(fh["A"].contains("regime"));
  CHECK(fh.contains("variant_disagreement"));
}

TEST_CASE("certify: malformed file exits with an error") {
  TempDir dir;
  std::ofstream(dir.file("broken.json")) << "{ not json";
  cli::RunConfig cfg;
  cfg.command = "certify";
  cfg.model_path = dir.file("broken.json");
  cfg.out_dir = dir.file("out");
  CHECK(cli::run(cfg) == cli::kError);
}

TEST_CASE("solve: certified model converges and writes traces") {
  TempDir dir;
  save_model(certified_model(7), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "solve";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.mode = "stationary";
  cfg.tol = 1e-9;
  REQUIRE(cli::run(cfg) == cli::kOk);
  std::ifstream trace(dir.file("out") + "/stationary_trace.csv");
  REQUIRE(trace.good());
  std::string header, last, line;
  std::getline(trace, header);
  CHECK(header == "iteration,residual,rate");
  while (std::getline(trace, line))
    if (!line.empty()) last = line;
  double residual = std::stod(last.substr(last.find(',') + 1));
  CHECK(residual <= cfg.tol);
}

TEST_CASE("solve: horizon flag controls the written slices") {
  TempDir dir;
  save_model(certified_model(11), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "solve";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.mode = "finite";
  cfg.horizon = 8;
  REQUIRE(cli::run(cfg) == cli::kOk);
  std::ifstream flow(dir.file("out") + "/finite_flow.csv");
  REQUIRE(flow.good());
  std::string line;
  std::getline(flow, line);  // header
  double tmax = -1.0;
  while (std::getline(flow, line))
    if (!line.empty()) tmax = std::max(tmax, std::stod(line.substr(0, line.find(','))));
  CHECK(tmax == 7.0);  // slices t = 0..7
}

TEST_CASE("solve: iteration limit exits 3 with the best iterate persisted") {
  TempDir dir;
  save_model(certified_model(13), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "solve";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.mode = "stationary";
  cfg.tol = 1e-13;
  cfg.max_iter = 2;
  REQUIRE(cli::run(cfg) == cli::kIterationLimit);
  CHECK(fs::exists(dir.file("out") + "/stationary_measure.csv"));
  CHECK(fs::exists(dir.file("out") + "/stationary_trace.csv"));
}

TEST_CASE("scan: rho_ST column is monotone and the report carries samples") {
  TempDir dir;
  save_model(certified_model(17), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "scan";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.T_list = {5, 10, 20, 40};
  cfg.grid = 256;
  REQUIRE(cli::run(cfg) == cli::kOk);
  std::ifstream csv(dir.file("out") + "/scan_T.csv");
  REQUIRE(csv.good());
  std::string line;
  std::getline(csv, line);
  double prev = -1.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::size_t c1 = line.find(',');
    std::size_t c2 = line.find(',', c1 + 1);
    double rho = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    REQUIRE(rho >= prev);
    prev = rho;
    ++rows;
  }
  CHECK(rows == 4);
  nlohmann::json rep = read_json(dir.file("out") + "/scan_report.json");
  CHECK(rep["diagnostics"]["rho_ST"].size() == 4);
}

TEST_CASE("scan: empty interval exits 2 with the reason on stderr") {
  TempDir dir;
  // enormous coupling relative to the regularizer: Kbar_inf >= 1/beta_max
  MfgModel m = random_affine_model(19, 2, 3, 2, [] {
    ModelKnobs kn;
    kn.delta_p = 1.5;
    kn.eps = 0.45;
    kn.w_scale = 4.0;
    kn.beta_lo = 0.93;
    kn.beta_hi = 0.95;
    kn.rho_lo = 0.05;
    kn.rho_hi = 0.08;
    return kn;
  }());
  REQUIRE(r_interval(estimate_lipschitz(m)).empty());
  save_model(m, dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "scan";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  CHECK(cli::run(cfg) == cli::kNotCertified);
}

TEST_CASE("slowfast: small campaign has no disagreements") {
  TempDir dir;
  cli::RunConfig cfg;
  cfg.command = "slowfast";
  cfg.campaign = 100;
  cfg.seed = 42;
  cfg.out_dir = dir.file("out");
  CHECK(cli::run(cfg) == cli::kOk);
  CHECK(fs::exists(dir.file("out") + "/slowfast_campaign.csv"));
}

TEST_CASE("slowfast: split out of range errors") {
  TempDir dir;
  save_model(certified_model(23), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "slowfast";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.split = 2;  // N = 2 requires 1 <= split < 2
  CHECK(cli::run(cfg) == cli::kError);
}

TEST_CASE("slowfast: verdict matches certify on the same model") {
  TempDir dir;
  save_model(certified_model(29), dir.file("model.json"));
  cli::RunConfig certify_cfg;
  certify_cfg.command = "certify";
  certify_cfg.model_path = dir.file("model.json");
  certify_cfg.out_dir = dir.file("c");
  certify_cfg.mode = "stationary";
  int certify_exit = cli::run(certify_cfg);
  cli::RunConfig sf_cfg;
  sf_cfg.command = "slowfast";
  sf_cfg.model_path = dir.file("model.json");
  sf_cfg.out_dir = dir.file("s");
  sf_cfg.mode = "stationary";
  sf_cfg.split = 1;
  int sf_exit = cli::run(sf_cfg);
  CHECK(certify_exit == sf_exit);
  nlohmann::json rep = read_json(dir.file("s") + "/slowfast_report.json");
  CHECK(rep["slowfast"][0]["agree"].get<bool>());
}

TEST_CASE("rates: stable model writes the decay table") {
  TempDir dir;
  save_model(certified_model(31), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "rates";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.T_list = {8, 10, 12};
  cfg.T_ref = 52;
  cfg.horizon = 20;
  REQUIRE(cli::run(cfg) == cli::kOk);
  CHECK(fs::exists(dir.file("out") + "/decay.csv"));
  nlohmann::json rep = read_json(dir.file("out") + "/rates_report.json");
  CHECK(rep.contains("slope"));
  CHECK(rep.contains("predicted"));
  CHECK(rep["t_o"].get<double>() > 1.0);
}

TEST_CASE("rates: non-stable model exits 2") {
  TempDir dir;
  MfgModel m = random_affine_model(37, 2, 3, 2, [] {
    ModelKnobs kn;
    kn.delta_p = 0.8;
    kn.eps = 0.5;
    kn.w_scale = 1.5;
    kn.rho_lo = 0.2;
    kn.rho_hi = 0.4;
    return kn;
  }());
  REQUIRE_FALSE(minimize_V(estimate_lipschitz(m), Variant::A).t_o > 1.0);
  save_model(m, dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "rates";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  CHECK(cli::run(cfg) == cli::kNotCertified);
}

TEST_CASE("rates: t_star override outside the interval errors") {
  TempDir dir;
  save_model(certified_model(41), dir.file("model.json"));
  cli::RunConfig cfg;
  cfg.command = "rates";
  cfg.model_path = dir.file("model.json");
  cfg.out_dir = dir.file("out");
  cfg.t_star = 50.0;
  CHECK(cli::run(cfg) == cli::kError);
}
