// Command-line front end: Monte Carlo runs, code dumps and self checks.

#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"

#include "ura/config.hpp"
#include "ura/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous MIMO-OFDM unsourced random access simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Monte Carlo sweep, one CSV row per point");
  std::string config_path, out_path, sweep_text, records_path;
  int trials = 100;
  int workers = 1;
  std::uint64_t seed = 1;
  bool trace = false, timing = false;
  run->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--trials", trials, "trials per sweep point")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "master seed");
  run->add_option("--sweep", sweep_text, "<param>:<v1>,<v2>,... (ebn0, power_db, active_users, antennas, noise_var)");
  run->add_option("--out", out_path, "CSV output path")->required();
  run->add_flag("--trace", trace, "write the path-extraction log to <out>.trace");
  run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--timing", timing, "fill runtime_s (makes the CSV non-reproducible)");
  run->add_option("--records", records_path, "per-trial JSON lines");

  auto* dump = app.add_subcommand("dump-codes", "write the LDPC and tree-code matrices");
  std::string dump_dir;
  std::string dump_config;
  dump->add_option("--out", dump_dir, "output directory")->required();
  dump->add_option("--config", dump_config, "JSON config file")->check(CLI::ExistingFile);

  app.add_subcommand("selftest", "run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ura::SystemConfig cfg = config_path.empty() ? ura::SystemConfig{} : ura::load_config(config_path);
      cfg.validate();
      const auto sweep = sweep_text.empty() ? ura::Sweep::none() : ura::Sweep::parse(sweep_text);
      std::ofstream csv(out_path);
      if (!csv) throw std::runtime_error("cannot open " + out_path);
      std::unique_ptr<std::ofstream> rec, tr;
      ura::MonteCarloOptions opt;
      opt.trials = trials;
      opt.seed = seed;
      opt.workers = workers;
      opt.timing = timing;
      opt.csv = &csv;
      if (!records_path.empty()) {
        rec = std::make_unique<std::ofstream>(records_path);
        opt.records = rec.get();
      }
      if (trace) {
        tr = std::make_unique<std::ofstream>(out_path + ".trace");
        opt.trace = tr.get();
      }
      ura::monte_carlo(cfg, sweep, opt);
      return 0;
    }
    if (app.got_subcommand("dump-codes")) {
      const ura::SystemConfig cfg = dump_config.empty() ? ura::SystemConfig{} : ura::load_config(dump_config);
      ura::dump_codes(cfg, dump_dir);
      return 0;
    }
    return ura::selftest(std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
