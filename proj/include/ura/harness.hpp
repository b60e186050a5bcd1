#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ura/collision_graph.hpp"
#include "ura/config.hpp"
#include "ura/phy_model.hpp"

namespace ura {

/// A recovered path that equals some true user's tuple.
struct MatchedUser {
  int truth = 0;          // index into the trial's user list
  Path path{};
  TfoPoint true_tfo;
  TfoPoint coarse;        // grid minimiser of the path MSE
  TfoPoint refined;       // after constellation-aided selection
};

struct TrialResult {
  std::uint64_t seed = 0;
  int ka = 0;
  int ka_hat = 0;         // accepted paths
  int decoded = 0;        // distinct messages in the output list
  int initial_paths = 0;
  bool degenerate = false;  // some stage detected no active row
  double nmse = 0.0;        // after re-estimation with refined TFO
  double nmse_coarse = 0.0; // straight from the grid search
  double nmse_genie = 0.0;  // true TFO revealed; NaN unless cfg.genie_tfo
  double pmd = 0.0;
  double pfa = 0.0;
  double bler = 0.0;        // min(1, pmd + pfa)
  std::vector<MatchedUser> matched;
  double runtime_s = 0.0;
  std::string trace;        // path-extraction log when requested
};

struct TrialOptions {
  bool trace = false;
};

/// Full chain for one slot: draw users, encode, pass through the channel,
/// recover paths, refine TFO, re-estimate channels, decode and score.
/// Deterministic in (cfg, seed).
TrialResult run_trial(const SystemConfig& cfg, std::uint64_t seed, const TrialOptions& options = {});

/// Seed of trial `index` of a run with master seed `master`.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// "<param>:<v1>,<v2>,..." with param one of ebn0 (dB), power_db,
/// active_users, antennas, noise_var.
struct Sweep {
  std::string param;
  std::vector<double> values;

  static Sweep parse(const std::string& text);
  static Sweep none();
  std::size_t size() const { return values.empty() ? 1 : values.size(); }
  std::string label(std::size_t point) const;
  SystemConfig apply(const SystemConfig& base, std::size_t point) const;
};

struct PointSummary {
  std::size_t point = 0;
  std::string param;
  int trials = 0;
  double nmse_db = 0.0;
  double nmse_se = 0.0;   // standard error of nmse_db
  double pmd = 0.0;
  double pfa = 0.0;
  double bler = 0.0;
  double to_err_mean = 0.0;
  double fo_err_mean = 0.0;
  double runtime_s = 0.0;
};

struct MonteCarloOptions {
  int trials = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  bool timing = false;            // runtime_s column; "nan" otherwise
  std::ostream* csv = nullptr;
  std::ostream* records = nullptr;  // one JSON object per trial
  std::ostream* trace = nullptr;
};

inline constexpr const char* kCsvHeader =
    "point,param,trials,nmse_db,nmse_se,pmd,pfa,bler,to_err_mean,fo_err_mean,runtime_s";

/// Runs every sweep point in order. Trial k of every point uses
/// trial_seed(seed, k), so points share their random draws and the output
/// does not depend on the number of workers. Each CSV row is flushed as
/// soon as its point completes.
std::vector<PointSummary> monte_carlo(const SystemConfig& cfg, const Sweep& sweep, const MonteCarloOptions& options);

PointSummary summarize(const std::vector<TrialResult>& trials);
std::string csv_row(const PointSummary& s, bool timing);

/// Writes ldpc.txt, tree.txt and config.json into `dir`.
void dump_codes(const SystemConfig& cfg, const std::string& dir);

/// Quick invariant checks; prints one line per check and returns the
/// number of failures.
int selftest(std::ostream& out);

}  // namespace ura
