#include "ura/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace ura {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid config: " + what);
}

}  // namespace

std::vector<int> SystemConfig::default_subcarriers(int count) {
  std::vector<int> s(count);
  for (int k = 0; k < count; ++k) s[k] = 2 * k + 1;
  return s;
}

void SystemConfig::validate() const {
  require(num_subcarriers >= 2, "num_subcarriers must be >= 2");
  require(cp_length >= 0, "cp_length must be >= 0");
  require(subcarriers_per_user >= 1 && subcarriers_per_user <= num_subcarriers,
          "subcarriers_per_user must lie in [1, num_subcarriers]");
  require(static_cast<int>(subcarrier_indices.size()) == subcarriers_per_user,
          "subcarrier_indices must have subcarriers_per_user entries");
  for (std::size_t k = 0; k < subcarrier_indices.size(); ++k) {
    require(subcarrier_indices[k] >= 1 && subcarrier_indices[k] <= num_subcarriers,
            "subcarrier index out of [1, num_subcarriers]");
    if (k > 0) require(subcarrier_indices[k] > subcarrier_indices[k - 1], "subcarrier_indices must be strictly increasing");
  }
  require(pilot_symbols == kStages, "pilot_symbols must be 4 (two data + two parity segments)");
  require(data_symbols >= 1, "data_symbols must be >= 1");
  require(antennas >= 1, "antennas must be >= 1");
  require(active_users >= 0, "active_users must be >= 0");
  require(preamble_bits >= 1 && preamble_bits <= 20, "preamble_bits must lie in [1, 20]");
  require(codebook_size() == subcarriers_per_user, "2^preamble_bits must equal subcarriers_per_user (square ESOP codebook)");
  require(payload_bits >= 1, "payload_bits must be >= 1");
  require(2 * preamble_bits + payload_bits == message_bits, "message_bits must equal 2 preamble_bits + payload_bits");
  require(coded_bits > payload_bits, "coded_bits must exceed payload_bits");
  require(coded_bits <= data_channel_uses(), "coded_bits must fit in data_symbols * subcarriers_per_user");
  require(max_timing_offset >= 1 && max_timing_offset <= cp_length, "max_timing_offset must lie in [1, cp_length]");
  require(max_freq_offset >= 0.0 && std::isfinite(max_freq_offset), "max_freq_offset must be finite and >= 0");
  require(freq_grid_size >= 1, "freq_grid_size must be >= 1");
  require(noise_var >= 0.0, "noise_var must be >= 0");
  require(power > 0.0, "power must be > 0");
  require(channel_var > 0.0, "channel_var must be > 0");
  require(gamma_coeff >= 0.0, "gamma_coeff must be >= 0");
  require(act_thresh_coeff >= 0.0, "act_thresh_coeff must be >= 0");
  require(tfo_candidates >= 1 && tfo_candidates <= max_timing_offset * freq_grid_size,
          "tfo_candidates must lie in [1, D * Q]");
  require(ldpc_max_iter >= 1, "ldpc_max_iter must be >= 1");
}

std::string to_string(ChannelMode mode) {
  return mode == ChannelMode::exact ? "exact" : "simplified";
}

ChannelMode channel_mode_from_string(const std::string& text) {
  if (text == "exact") return ChannelMode::exact;
  if (text == "simplified") return ChannelMode::simplified;
  throw std::invalid_argument("unknown channel_mode '" + text + "'");
}

namespace {

using Json = nlohmann::json;

template <typename T>
std::function<void(SystemConfig&, const Json&)> setter(T SystemConfig::*field) {
  return [field](SystemConfig& cfg, const Json& value) { cfg.*field = value.get<T>(); };
}

const std::map<std::string, std::function<void(SystemConfig&, const Json&)>>& setters() {
  static const std::map<std::string, std::function<void(SystemConfig&, const Json&)>> table = {
      {"num_subcarriers", setter(&SystemConfig::num_subcarriers)},
      {"cp_length", setter(&SystemConfig::cp_length)},
      {"subcarriers_per_user", setter(&SystemConfig::subcarriers_per_user)},
      {"subcarrier_indices", setter(&SystemConfig::subcarrier_indices)},
      {"pilot_symbols", setter(&SystemConfig::pilot_symbols)},
      {"data_symbols", setter(&SystemConfig::data_symbols)},
      {"antennas", setter(&SystemConfig::antennas)},
      {"active_users", setter(&SystemConfig::active_users)},
      {"message_bits", setter(&SystemConfig::message_bits)},
      {"preamble_bits", setter(&SystemConfig::preamble_bits)},
      {"payload_bits", setter(&SystemConfig::payload_bits)},
      {"coded_bits", setter(&SystemConfig::coded_bits)},
      {"max_timing_offset", setter(&SystemConfig::max_timing_offset)},
      {"max_freq_offset", setter(&SystemConfig::max_freq_offset)},
      {"freq_grid_size", setter(&SystemConfig::freq_grid_size)},
      {"noise_var", setter(&SystemConfig::noise_var)},
      {"power", setter(&SystemConfig::power)},
      {"channel_var", setter(&SystemConfig::channel_var)},
      {"seed", setter(&SystemConfig::seed)},
      {"code_seed", setter(&SystemConfig::code_seed)},
      {"gamma_coeff", setter(&SystemConfig::gamma_coeff)},
      {"act_thresh_coeff", setter(&SystemConfig::act_thresh_coeff)},
      {"tfo_candidates", setter(&SystemConfig::tfo_candidates)},
      {"ldpc_max_iter", setter(&SystemConfig::ldpc_max_iter)},
      {"channel_mode",
       [](SystemConfig& cfg, const Json& v) { cfg.channel_mode = channel_mode_from_string(v.get<std::string>()); }},
      {"on_grid_tfo", setter(&SystemConfig::on_grid_tfo)},
      {"collision_free", setter(&SystemConfig::collision_free)},
      {"genie_tfo", setter(&SystemConfig::genie_tfo)},
  };
  return table;
}

}  // namespace

SystemConfig parse_config(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");

  SystemConfig cfg;
  bool explicit_indices = false;
  for (const auto& [key, value] : doc.items()) {
    auto it = setters().find(key);
    if (it == setters().end()) throw std::invalid_argument("unknown config key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const Json::exception& e) {
      throw std::invalid_argument("bad value for '" + key + "': " + e.what());
    }
    explicit_indices |= key == "subcarrier_indices";
  }
  if (!explicit_indices && static_cast<int>(cfg.subcarrier_indices.size()) != cfg.subcarriers_per_user)
    cfg.subcarrier_indices = SystemConfig::default_subcarriers(cfg.subcarriers_per_user);
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  return parse_config(in);
}

void write_config(std::ostream& out, const SystemConfig& cfg) {
  Json doc = {
      {"num_subcarriers", cfg.num_subcarriers},
      {"cp_length", cfg.cp_length},
      {"subcarriers_per_user", cfg.subcarriers_per_user},
      {"subcarrier_indices", cfg.subcarrier_indices},
      {"pilot_symbols", cfg.pilot_symbols},
      {"data_symbols", cfg.data_symbols},
      {"antennas", cfg.antennas},
      {"active_users", cfg.active_users},
      {"message_bits", cfg.message_bits},
      {"preamble_bits", cfg.preamble_bits},
      {"payload_bits", cfg.payload_bits},
      {"coded_bits", cfg.coded_bits},
      {"max_timing_offset", cfg.max_timing_offset},
      {"max_freq_offset", cfg.max_freq_offset},
      {"freq_grid_size", cfg.freq_grid_size},
      {"noise_var", cfg.noise_var},
      {"power", cfg.power},
      {"channel_var", cfg.channel_var},
      {"seed", cfg.seed},
      {"code_seed", cfg.code_seed},
      {"gamma_coeff", cfg.gamma_coeff},
      {"act_thresh_coeff", cfg.act_thresh_coeff},
      {"tfo_candidates", cfg.tfo_candidates},
      {"ldpc_max_iter", cfg.ldpc_max_iter},
      {"channel_mode", to_string(cfg.channel_mode)},
      {"on_grid_tfo", cfg.on_grid_tfo},
      {"collision_free", cfg.collision_free},
      {"genie_tfo", cfg.genie_tfo},
  };
  out << doc.dump(2) << '\n';
}

}  // namespace ura
