#include "ura/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "ura/gbcr2.hpp"
#include "ura/ldpc.hpp"
#include "ura/metrics.hpp"
#include "ura/rx_frontend.hpp"
#include "ura/tfo_refine.hpp"
#include "ura/tx_chain.hpp"

namespace ura {

namespace {

constexpr int kMaxCollisionFreeDraws = 10000;

struct DrawnUser {
  ActiveUser user;
  EncodedUser enc;
};

bool collision_free(const std::vector<DrawnUser>& users) {
  for (int t = 0; t < kStages; ++t) {
    std::vector<int> idx;
    for (const auto& u : users) idx.push_back(u.user.indices[t]);
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) return false;
  }
  return true;
}

std::vector<DrawnUser> draw_users(const SystemConfig& cfg, const PhaseGrid& grid, const TreeCode& tree,
                                  const LdpcCode& code, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> delay(1, cfg.max_timing_offset);
  std::uniform_real_distribution<double> freq(-cfg.max_freq_offset, cfg.max_freq_offset);
  std::uniform_int_distribution<std::size_t> freq_idx(0, grid.freqs.size() - 1);

  for (int attempt = 0; attempt < kMaxCollisionFreeDraws; ++attempt) {
    std::vector<DrawnUser> users(cfg.active_users);
    for (auto& d : users) {
      d.user.payload.resize(cfg.message_bits);
      for (auto& b : d.user.payload) b = coin(rng) ? 1 : 0;
      d.enc = encode_user(d.user.payload, tree, code, cfg);
      d.user.indices = d.enc.indices;
      d.user.tau = delay(rng);
      d.user.eps = cfg.on_grid_tfo ? grid.freqs[freq_idx(rng)] : freq(rng);
      d.user.channel = draw_channel(cfg, rng);
    }
    if (!cfg.collision_free || collision_free(users)) return users;
  }
  throw std::runtime_error("could not draw a collision-free user set");
}

std::vector<CVector> channels_of(const std::vector<RecoveredUser>& users) {
  std::vector<CVector> h;
  for (const auto& u : users) h.push_back(u.h_hat);
  return h;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) { return derive_seed({master, index}); }

TrialResult run_trial(const SystemConfig& cfg, std::uint64_t seed, const TrialOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  TrialResult res;
  res.seed = seed;
  res.nmse_genie = std::numeric_limits<double>::quiet_NaN();

  Rng rng(seed);
  const auto& code = default_ldpc_code(cfg.coded_bits, cfg.payload_bits, cfg.code_seed);
  const TreeCode tree = TreeCode::generate(cfg.preamble_bits, cfg.code_seed);
  const PhaseGrid grid = PhaseGrid::from_config(cfg);

  const auto drawn = draw_users(cfg, grid, tree, code, rng);
  std::vector<ActiveUser> users;
  for (const auto& d : drawn) users.push_back(d.user);
  res.ka = static_cast<int>(users.size());

  // Pilot phase.
  PilotObservationSet obs;
  obs.noise_var = mmse_pilot_noise_var(cfg.pilot_power(), cfg.noise_var);
  NodeLists nodes;
  for (int t = 1; t <= kStages; ++t) {
    std::vector<int> cw;
    for (const auto& u : users) cw.push_back(u.indices[t - 1]);
    const CMatrix y = simulate_pilot_symbol(users, t, cw, cfg, rng, cfg.channel_mode);
    obs.g[t - 1] = mmse_pilot_estimate(y, cfg.pilot_power(), cfg.noise_var);
    nodes[t - 1] = detect_active_rows(obs.g[t - 1], activity_threshold(cfg, obs.noise_var));
  }
  const CollisionGraph graph = build_graph(nodes, tree);
  res.degenerate = graph.degenerate();
  res.initial_paths = static_cast<int>(graph.paths.size());
  const PilotObservationSet original = obs;

  std::ostringstream trace;
  GbcrOptions gopt;
  if (options.trace) gopt.trace = &trace;
  const GbcrResult coarse = run_gbcr2(obs, graph.paths, grid, cfg, gopt);
  res.ka_hat = static_cast<int>(coarse.users.size());

  // Data phase.
  std::vector<UserRotation> rot;
  for (const auto& u : users) rot.emplace_back(u.tau, u.eps, cfg);
  std::vector<CMatrix> y_data;
  for (int d = 0; d < cfg.data_symbols; ++d) {
    std::vector<CVector> sym;
    for (const auto& du : drawn) sym.push_back(du.enc.frame.slice(d, cfg.subcarriers_per_user));
    y_data.push_back(simulate_data_symbol(users, rot, sym, cfg.pilot_symbols + 1 + d, cfg, rng, cfg.channel_mode));
  }

  const auto& rec = coarse.users;
  std::vector<std::vector<int>> positions;
  for (const auto& u : rec) {
    auto perm = build_interleaver(u.path, cfg.data_channel_uses(), cfg.code_seed);
    perm.resize(cfg.coded_bits);
    positions.push_back(std::move(perm));
  }
  const auto coarse_h = channels_of(rec);
  const auto sep = separate_data(y_data, coarse_h, positions, cfg.symbol_power(), cfg.noise_var);

  std::vector<TfoPoint> refined;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const auto cands = candidate_list(rec[k].path, rec[k].rows, grid, cfg, cfg.tfo_candidates);
    refined.push_back(cands[select_tfo(cands, sep[k].symbols, positions[k], cfg)].tfo);
  }
  const auto final_h = reestimate_channels(original, rec, refined, grid, cfg);

  // Decoding with the re-estimated channels and refined offsets.
  const auto sep2 = separate_data(y_data, final_h, positions, cfg.symbol_power(), cfg.noise_var);
  std::vector<Bits> recovered;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const auto s = derotate_data(sep2[k].symbols, positions[k], refined[k], cfg);
    const auto bp = code.decode_bp(bpsk_llr(s, sep2[k].bias), cfg.ldpc_max_iter);
    if (!bp.converged) continue;
    MessageSplit parts;
    parts.v1 = index_to_segment(rec[k].path[0], cfg.preamble_bits);
    parts.v2 = index_to_segment(rec[k].path[1], cfg.preamble_bits);
    parts.vc.assign(bp.bits.begin(), bp.bits.begin() + cfg.payload_bits);
    Bits msg = join_message(parts);
    if (std::find(recovered.begin(), recovered.end(), msg) == recovered.end()) recovered.push_back(std::move(msg));
  }
  res.decoded = static_cast<int>(recovered.size());

  // Scoring.
  std::vector<CVector> truth_h;
  std::vector<Bits> truth_msg;
  for (const auto& u : users) {
    truth_h.push_back(u.channel);
    truth_msg.push_back(u.payload);
  }
  res.nmse = nmse(truth_h, final_h);
  res.nmse_coarse = nmse(truth_h, coarse_h);
  std::tie(res.pmd, res.pfa) = pmd_pfa(recovered, truth_msg);
  res.bler = std::min(1.0, res.pmd + res.pfa);

  for (std::size_t k = 0; k < rec.size(); ++k)
    for (std::size_t i = 0; i < users.size(); ++i)
      if (users[i].indices == rec[k].path) {
        res.matched.push_back({static_cast<int>(i), rec[k].path, {users[i].tau, users[i].eps},
                               {rec[k].tau, rec[k].eps}, refined[k]});
        break;
      }

  if (cfg.genie_tfo) {
    TfoOverrides genie;
    for (const auto& u : users) genie.emplace(u.indices, TfoPoint{u.tau, u.eps});
    PilotObservationSet gobs = original;
    GbcrOptions o;
    o.fixed = &genie;
    const auto g = run_gbcr2(gobs, graph.paths, grid, cfg, o);
    res.nmse_genie = nmse(truth_h, channels_of(g.users));
  }

  res.trace = trace.str();
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

Sweep Sweep::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("sweep must look like <param>:<v1>,<v2>,...");
  Sweep s;
  s.param = text.substr(0, colon);
  static const std::vector<std::string> known = {"ebn0", "power_db", "active_users", "antennas", "noise_var"};
  if (std::find(known.begin(), known.end(), s.param) == known.end())
    throw std::invalid_argument("unknown sweep parameter: " + s.param);
  std::stringstream list(text.substr(colon + 1));
  std::string item;
  while (std::getline(list, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad sweep value: " + item);
    s.values.push_back(v);
  }
  if (s.values.empty()) throw std::invalid_argument("sweep has no values");
  return s;
}

Sweep Sweep::none() { return {}; }

std::string Sweep::label(std::size_t point) const {
  if (values.empty()) return "none";
  std::ostringstream o;
  o << param << '=' << values.at(point);
  return o.str();
}

SystemConfig Sweep::apply(const SystemConfig& base, std::size_t point) const {
  SystemConfig cfg = base;
  if (values.empty()) return cfg;
  const double v = values.at(point);
  auto as_int = [&](double x) {
    if (x != std::round(x)) throw std::invalid_argument(param + " must be an integer");
    return static_cast<int>(x);
  };
  if (param == "ebn0")
    cfg.power = ebn0_to_power(v, cfg);
  else if (param == "power_db")
    cfg.power = std::pow(10.0, v / 10.0);
  else if (param == "active_users")
    cfg.active_users = as_int(v);
  else if (param == "antennas")
    cfg.antennas = as_int(v);
  else if (param == "noise_var")
    cfg.noise_var = v;
  cfg.validate();
  return cfg;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

PointSummary summarize(const std::vector<TrialResult>& trials) {
  PointSummary s;
  s.trials = static_cast<int>(trials.size());
  if (trials.empty()) return s;
  const double n = static_cast<double>(trials.size());
  double nmse_sum = 0.0, nmse_sq = 0.0, to_sum = 0.0, fo_sum = 0.0;
  std::size_t matched = 0;
  for (const auto& t : trials) {
    nmse_sum += t.nmse;
    nmse_sq += t.nmse * t.nmse;
    s.pmd += t.pmd;
    s.pfa += t.pfa;
    s.bler += t.bler;
    s.runtime_s += t.runtime_s;
    for (const auto& m : t.matched) {
      to_sum += std::abs(m.refined.tau - m.true_tfo.tau);
      fo_sum += std::abs(m.refined.eps - m.true_tfo.eps);
      ++matched;
    }
  }
  const double mean = nmse_sum / n;
  s.nmse_db = to_db(mean);
  if (trials.size() > 1 && mean > 0.0) {
    const double var = std::max(0.0, (nmse_sq - n * mean * mean) / (n - 1.0));
    // Delta method: d(10 log10 x) = 10 / (x ln 10) dx.
    s.nmse_se = 10.0 / std::numbers::ln10 * std::sqrt(var / n) / mean;
  }
  s.pmd /= n;
  s.pfa /= n;
  s.bler /= n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.to_err_mean = matched ? to_sum / static_cast<double>(matched) : nan;
  s.fo_err_mean = matched ? fo_sum / static_cast<double>(matched) : nan;
  return s;
}

std::string csv_row(const PointSummary& s, bool timing) {
  std::ostringstream o;
  o << s.point << ',' << s.param << ',' << s.trials << ',' << num(s.nmse_db) << ',' << num(s.nmse_se) << ','
    << num(s.pmd) << ',' << num(s.pfa) << ',' << num(s.bler) << ',' << num(s.to_err_mean) << ','
    << num(s.fo_err_mean) << ',' << (timing ? num(s.runtime_s) : "nan");
  return o.str();
}

std::vector<PointSummary> monte_carlo(const SystemConfig& cfg, const Sweep& sweep, const MonteCarloOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be positive");
  const int workers = std::max(1, options.workers);
  if (options.csv) *options.csv << kCsvHeader << '\n' << std::flush;

  std::vector<PointSummary> out;
  for (std::size_t p = 0; p < sweep.size(); ++p) {
    const SystemConfig point_cfg = sweep.apply(cfg, p);
    std::vector<TrialResult> results(options.trials);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    TrialOptions topt;
    topt.trace = options.trace != nullptr;

    auto work = [&] {
      for (int k = next++; k < options.trials && !failed; k = next++) {
        try {
          results[k] = run_trial(point_cfg, trial_seed(options.seed, static_cast<std::uint64_t>(k)), topt);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    PointSummary s = summarize(results);
    s.point = p;
    s.param = sweep.label(p);
    out.push_back(s);
    if (options.csv) *options.csv << csv_row(s, options.timing) << '\n' << std::flush;

    for (int k = 0; k < options.trials; ++k) {
      const auto& r = results[k];
      if (options.records) {
        nlohmann::json j = {{"point", p},         {"param", s.param},   {"trial", k},
                            {"seed", r.seed},      {"ka", r.ka},         {"ka_hat", r.ka_hat},
                            {"decoded", r.decoded}, {"paths", r.initial_paths}, {"degenerate", r.degenerate},
                            {"nmse", r.nmse},      {"nmse_coarse", r.nmse_coarse}, {"pmd", r.pmd},
                            {"pfa", r.pfa},        {"bler", r.bler}};
        if (!std::isnan(r.nmse_genie)) j["nmse_genie"] = r.nmse_genie;
        if (options.timing) j["runtime_s"] = r.runtime_s;
        *options.records << j.dump() << '\n';
      }
      if (options.trace) *options.trace << "# point=" << p << " trial=" << k << '\n' << r.trace;
    }
    if (options.records) options.records->flush();
    if (options.trace) options.trace->flush();
  }
  return out;
}

void dump_codes(const SystemConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw std::runtime_error(std::string("cannot write ") + name);
    return f;
  };
  {
    auto f = open("ldpc.txt");
    default_ldpc_code(cfg.coded_bits, cfg.payload_bits, cfg.code_seed).write(f);
  }
  {
    auto f = open("tree.txt");
    TreeCode::generate(cfg.preamble_bits, cfg.code_seed).write(f);
  }
  {
    auto f = open("config.json");
    write_config(f, cfg);
  }
}

int selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, auto&& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      out << "error in " << name << ": " << e.what() << '\n';
    }
    out << (ok ? "PASS " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };

  check("fo matrix matches DFT conjugation", [] {
    SystemConfig cfg;
    cfg.num_subcarriers = 16;
    cfg.cp_length = 4;
    cfg.subcarriers_per_user = 4;
    cfg.subcarrier_indices = {1, 3, 6, 11};
    const int n = cfg.num_subcarriers;
    const double eps = 0.23;
    CMatrix f(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) f(a, b) = std::polar(1.0 / std::sqrt(n), -2.0 * std::numbers::pi * a * b / n);
    CVector d(n);
    for (int m = 0; m < n; ++m) d(m) = std::polar(1.0, 2.0 * std::numbers::pi * eps * m / n);
    const CMatrix full = f * d.asDiagonal() * f.adjoint();
    CMatrix sub(4, 4);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) sub(a, b) = full(cfg.subcarrier_indices[a] - 1, cfg.subcarrier_indices[b] - 1);
    // fo_matrix_exact carries the per-symbol factor phi^t; symbol 1 has phi = omega^N_cp.
    const cplx phi = std::polar(1.0, 2.0 * std::numbers::pi * eps * cfg.cp_length / n);
    return (fo_matrix_exact(eps, 1, cfg) - phi * sub).norm() < 1e-10;
  });

  check("ldpc round trip", [] {
    SystemConfig cfg;
    const auto& code = default_ldpc_code(cfg.coded_bits, cfg.payload_bits, cfg.code_seed);
    Rng rng(7);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 20; ++i) {
      Bits info(cfg.payload_bits);
      for (auto& b : info) b = coin(rng) ? 1 : 0;
      const Bits word = code.encode(info);
      std::vector<double> llr(word.size());
      for (std::size_t j = 0; j < word.size(); ++j) llr[j] = word[j] ? -10.0 : 10.0;
      const auto r = code.decode_bp(llr, cfg.ldpc_max_iter);
      if (!r.converged || r.bits != word) return false;
    }
    return true;
  });

  check("true tuples survive tree decoding", [] {
    SystemConfig cfg;
    const TreeCode tree = TreeCode::generate(cfg.preamble_bits, cfg.code_seed);
    Rng rng(11);
    std::uniform_int_distribution<int> idx(1, cfg.codebook_size());
    NodeLists nodes;
    std::vector<Path> truth;
    for (int k = 0; k < 8; ++k) {
      const int a = idx(rng), b = idx(rng);
      const auto [c, d] = tree.parity_indices(a, b);
      truth.push_back({a, b, c, d});
      for (int i = 0; i < kStages; ++i) nodes[i].push_back(truth.back()[i]);
    }
    const auto g = build_graph(nodes, tree);
    return std::all_of(truth.begin(), truth.end(), [&](const Path& p) { return g.paths.count(p) == 1; });
  });

  check("noiseless trial recovers every user", [] {
    SystemConfig cfg;
    cfg.active_users = 4;
    cfg.antennas = 4;
    cfg.noise_var = 1e-12;
    cfg.channel_mode = ChannelMode::simplified;
    cfg.on_grid_tfo = true;
    cfg.collision_free = true;
    const auto r = run_trial(cfg, 3);
    return r.pmd == 0.0 && r.pfa == 0.0 && r.nmse < 1e-10;
  });

  return failures;
}

}  // namespace ura
