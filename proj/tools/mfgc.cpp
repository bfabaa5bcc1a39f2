#include <CLI11.hpp>

#include "mfgc/cli.hpp"

namespace {

std::vector<std::size_t> parse_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(static_cast<std::size_t>(std::stoul(csv.substr(pos, comma - pos))));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfgc: multi-population mean-field game solver and contraction certification"};
  app.require_subcommand(1);
  mfgc::cli::RunConfig cfg;
  std::string tlist_csv, klist_csv;

  auto add_model = [&](CLI::App* sub, bool required = true) {
    auto* opt = sub->add_option("model", cfg.model_path, "model file (mfgc-model/1 JSON)");
    if (required) opt->required();
  };

  CLI::App* certify = app.add_subcommand("certify", "contraction certificates for a model");
  add_model(certify);
  certify->add_option("--mode", cfg.mode, "stationary | finite | both")->default_val("both");
  certify->add_option("--variant", cfg.variant, "A | B | both")->default_val("both");
  certify->add_option("--grid", cfg.grid, "r-grid size for the variational scan")->default_val(2048);
  certify->add_option("--out", cfg.out_dir, "output directory")->default_val(".");

  CLI::App* solve = app.add_subcommand("solve", "compute a mean-field equilibrium");
  add_model(solve);
  solve->add_option("--mode", cfg.mode, "stationary | finite | both")->default_val("both");
  solve->add_option("--horizon,-T", cfg.horizon, "finite horizon length")->default_val(8);
  solve->add_option("--tol", cfg.tol, "outer residual tolerance")->default_val(1e-9);
  solve->add_option("--max-iter", cfg.max_iter, "outer iteration cap")->default_val(10000);
  solve->add_option("--out", cfg.out_dir, "output directory")->default_val(".");

  CLI::App* scan = app.add_subcommand("scan", "V/rho_B grids, rho(S_T) limits, Perron ratios");
  add_model(scan);
  scan->add_option("--tlist", tlist_csv, "comma-separated horizon list");
  scan->add_option("--grid", cfg.grid, "r-grid size")->default_val(2048);
  scan->add_option("--ratio-T", cfg.ratio_T, "Perron-ratio diagnostic horizon (>= 50, 0 = off)")->default_val(0);
  scan->add_option("--out", cfg.out_dir, "output directory")->default_val(".");

  CLI::App* slowfast = app.add_subcommand("slowfast", "Schur-reduction certificates and equivalence campaign");
  add_model(slowfast, false);
  slowfast->add_option("--split", cfg.split, "slow block size N_1")->default_val(1);
  slowfast->add_option("--mode", cfg.mode, "stationary | finite | both")->default_val("both");
  slowfast->add_option("--horizon,-T", cfg.horizon, "horizon for finite mode")->default_val(8);
  slowfast->add_option("--campaign", cfg.campaign, "run a random-matrix equivalence campaign of this size")
      ->default_val(0);
  slowfast->add_option("--seed", cfg.seed, "campaign seed")->default_val(1);
  slowfast->add_option("--out", cfg.out_dir, "output directory")->default_val(".");

  CLI::App* rates = app.add_subcommand("rates", "Lyapunov weights, horizon decay, stationary gap");
  add_model(rates);
  rates->add_option("--tlist", tlist_csv, "horizon list for the decay fit");
  rates->add_option("--tref", cfg.T_ref, "reference horizon (infinite-horizon proxy)")->default_val(70);
  rates->add_option("--tprobe", cfg.t_probe, "probe time slice")->default_val(3);
  rates->add_option("--klist", klist_csv, "k list for the stationary gap");
  rates->add_option("--tbig", cfg.T_big, "long horizon for the gap experiment")->default_val(120);
  rates->add_option("--tstar", cfg.t_star, "Lyapunov t* override (0 = use the V minimizer)")->default_val(0.0);
  rates->add_option("--horizon,-T", cfg.horizon, "horizon for the weight check")->default_val(40);
  rates->add_option("--tol", cfg.tol, "solver tolerance")->default_val(1e-11);
  rates->add_option("--out", cfg.out_dir, "output directory")->default_val(".");

  CLI11_PARSE(app, argc, argv);

  if (!tlist_csv.empty()) cfg.T_list = parse_list(tlist_csv);
  if (!klist_csv.empty()) cfg.k_list = parse_list(klist_csv);
  if (certify->parsed()) cfg.command = "certify";
  if (solve->parsed()) cfg.command = "solve";
  if (scan->parsed()) cfg.command = "scan";
  if (slowfast->parsed()) cfg.command = "slowfast";
  if (rates->parsed()) cfg.command = "rates";
  if (cfg.command == "slowfast" && cfg.campaign == 0 && cfg.model_path.empty()) {
    std::cerr << "slowfast: either a model file or --campaign is required\n";
    return mfgc::cli::kError;
  }
  return mfgc::cli::run(cfg);
}
