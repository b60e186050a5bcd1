#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ura {

/// How the channel applies timing/frequency offsets to the transmitted grid.
/// `exact` keeps the inter-carrier leakage of the full DFT-conjugated
/// matrices, `simplified` keeps only their diagonal phase.
enum class ChannelMode { exact, simplified };

/// Number of pilot stages. The tree code carries two information segments
/// and two parity segments, so the graph always has four stages.
inline constexpr int kStages = 4;

/// Every scalar parameter of the link. Defaults reproduce the reference
/// setup: 1024-point OFDM, 128 user subcarriers, 4 pilot + 21 data symbols,
/// B = 100 = 7 + 7 + 86, a (200, 86) LDPC code and a 9 x 9 TFO grid.
///
/// `power` is the average transmit power per channel use (the P of
/// Eb/N0 = L P / (B N0)). The ESOP pilot places the whole codeword energy
/// L_p P on its single nonzero entry and the data phase spreads L_c P over
/// the coded bits, see pilot_power() and symbol_power().
struct SystemConfig {
  int num_subcarriers = 1024;       // N_c
  int cp_length = 72;               // N_cp
  int subcarriers_per_user = 128;   // S = L_p = N
  std::vector<int> subcarrier_indices = default_subcarriers(128);  // 1-based
  int pilot_symbols = kStages;      // T_p
  int data_symbols = 21;            // T_d
  int antennas = 16;                // M
  int active_users = 20;            // K_a
  int message_bits = 100;           // B
  int preamble_bits = 7;            // B_p
  int payload_bits = 86;            // B_c
  int coded_bits = 200;             // LDPC block length
  int max_timing_offset = 9;        // D
  double max_freq_offset = 0.0133;  // eps_max, fraction of subcarrier spacing
  int freq_grid_size = 9;           // Q
  double noise_var = 1.0;           // sigma_n^2 per complex entry
  double power = 0.3125;            // P, i.e. Eb/N0 = 10 dB with N0 = 1
  double channel_var = 1.0;         // sigma_h^2
  std::uint64_t seed = 1;           // master seed for trials
  std::uint64_t code_seed = 0x75726173696d31ULL;  // public seed for codes and interleavers
  double gamma_coeff = 3.0;
  double act_thresh_coeff = 4.0;
  int tfo_candidates = 5;           // N_cand
  int ldpc_max_iter = 50;
  ChannelMode channel_mode = ChannelMode::exact;
  bool on_grid_tfo = false;         // draw eps from the receiver grid
  bool collision_free = false;      // redraw until no stage index is shared
  bool genie_tfo = false;           // also run the perfect-TFO reference

  static std::vector<int> default_subcarriers(int count);

  int codebook_size() const { return 1 << preamble_bits; }
  int total_channel_uses() const { return (pilot_symbols + data_symbols) * subcarriers_per_user; }
  int data_channel_uses() const { return data_symbols * subcarriers_per_user; }
  double pilot_power() const { return subcarriers_per_user * power; }
  double symbol_power() const { return data_channel_uses() * power / coded_bits; }

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

std::string to_string(ChannelMode mode);
ChannelMode channel_mode_from_string(const std::string& text);

/// JSON config files. Every key is optional; unknown keys are rejected.
SystemConfig load_config(const std::string& path);
SystemConfig parse_config(std::istream& in);
void write_config(std::ostream& out, const SystemConfig& cfg);

}  // namespace ura
