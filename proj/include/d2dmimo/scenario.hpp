#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace d2dmimo {

/// Raised for malformed or inconsistent configuration. `key` names the
/// offending field when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SystemDimensions {
  int num_cells = 9;          // B
  int antennas_per_bs = 200;  // M
  int cus_per_cell = 5;       // K
  int num_d2d_pairs = 10;     // L
  int num_d2d_pilots = 5;     // N
  int coherence_len = 200;    // tau_c

  int pilot_len() const { return cus_per_cell + num_d2d_pilots; }
  int num_cus() const { return num_cells * cus_per_cell; }
  int num_users() const { return num_cus() + num_d2d_pairs; }
  /// Fraction of the coherence block left for data, 1 - tau/tau_c.
  double prelog() const {
    return 1.0 - static_cast<double>(pilot_len()) / coherence_len;
  }
  /// M - (K + N), the ZF array gain.
  int zf_gain() const { return antennas_per_bs - pilot_len(); }
  bool supports_zf() const { return zf_gain() > 0; }

  /// Throws ConfigError. L = N = 0 is accepted (cellular-only network).
  void validate() const;

  friend bool operator==(const SystemDimensions&, const SystemDimensions&) = default;
};

/// Three-slope model: flat below d0, `slopes_db[1]` dB/decade between d0
/// and d1, `slopes_db[2]` dB/decade beyond d1. Distances enter in km.
struct PathlossModel {
  double d0_m = 10.0;
  double d1_m = 50.0;
  double fixed_loss_db = 0.0;
  std::array<double, 3> slopes_db = {0.0, 20.0, 35.0};

  /// Hata/COST-231 style constant term for the given carrier and heights.
  static double hata_fixed_loss_db(double carrier_mhz, double bs_height_m,
                                   double user_height_m);
  /// 2 GHz carrier, 15 m BS antenna, 1.65 m user antenna.
  static PathlossModel default_2ghz();

  void validate() const;
};

/// Channel gain in dB (negative) at distance d meters. Throws on d <= 0.
double pathloss_db(double distance_m, const PathlossModel& model);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Minimum distance over the 9 torus images of q around p.
double wrap_distance(const Point& p, const Point& q, double area_side);
double euclidean_distance(const Point& p, const Point& q);

struct GeometryParams {
  double area_side_m = 1000.0;
  double d2d_link_distance_m = 10.0;
  bool wraparound = true;
  /// Placements closer than this to a relevant node are redrawn.
  double min_distance_m = 1.0e-3;
};

struct Geometry {
  double area_side = 0.0;
  int grid_rows = 0;
  int grid_cols = 0;
  std::vector<Point> bs_positions;      // B
  std::vector<Point> cu_positions;      // B*K, index b*K + k
  std::vector<Point> d2d_tx_positions;  // L
  std::vector<Point> d2d_rx_positions;  // L
  double d2d_link_distance = 0.0;
  bool wraparound = true;

  double distance(const Point& p, const Point& q) const;
  /// Index of the grid cell containing p.
  int cell_of(const Point& p) const;
};

/// Large-scale fading, stored pre-divided by the noise power so every
/// signal model sees unit-variance noise. Powers are in mW.
class LargeScaleGains {
 public:
  LargeScaleGains() = default;
  LargeScaleGains(int num_cells, int cus_per_cell, int num_d2d);

  int num_cells() const { return B_; }
  int cus_per_cell() const { return K_; }
  int num_d2d() const { return L_; }

  /// beta^{b,c}_{b',k}: CU k of cell `from_cell` to BS `bs`.
  double& cu_bs(int bs, int from_cell, int k) { return cu_bs_[(bs * B_ + from_cell) * K_ + k]; }
  double cu_bs(int bs, int from_cell, int k) const { return cu_bs_[(bs * B_ + from_cell) * K_ + k]; }
  /// beta^{b,d}_l: D2D transmitter l to BS b.
  double& d2d_bs(int bs, int l) { return d2d_bs_[bs * L_ + l]; }
  double d2d_bs(int bs, int l) const { return d2d_bs_[bs * L_ + l]; }
  /// beta^{l,c}_{b,k}: CU k of cell b to D2D receiver l.
  double& cu_d2d(int rx, int cell, int k) { return cu_d2d_[(rx * B_ + cell) * K_ + k]; }
  double cu_d2d(int rx, int cell, int k) const { return cu_d2d_[(rx * B_ + cell) * K_ + k]; }
  /// beta^{l,d}_{l'}: D2D transmitter l' to D2D receiver l.
  double& d2d_d2d(int rx, int tx) { return d2d_d2d_[rx * L_ + tx]; }
  double d2d_d2d(int rx, int tx) const { return d2d_d2d_[rx * L_ + tx]; }

  /// Throws std::invalid_argument if any entry is non-positive or non-finite.
  void validate() const;

  friend bool operator==(const LargeScaleGains&, const LargeScaleGains&) = default;

 private:
  int B_ = 0, K_ = 0, L_ = 0;
  std::vector<double> cu_bs_, d2d_bs_, cu_d2d_, d2d_d2d_;
};

/// CU k uses cellular pilot k in every cell; D2D pair l uses D2D pilot
/// d2d_pilot[l]. `sets[i]` lists the pairs on D2D pilot i.
struct PilotAllocation {
  std::vector<int> d2d_pilot;
  std::vector<std::vector<int>> sets;

  static PilotAllocation from_assignment(std::vector<int> d2d_pilot, int num_pilots);
  const std::vector<int>& set_of(int l) const { return sets[d2d_pilot[l]]; }
  /// Partition check: every pair in exactly one non-empty set.
  void validate(int num_d2d, int num_pilots) const;

  friend bool operator==(const PilotAllocation&, const PilotAllocation&) = default;
};

/// Everything the SE formulas and optimizers need about one drop.
struct Network {
  SystemDimensions dims;
  LargeScaleGains gains;
  PilotAllocation pilots;
  double p_max = 200.0;  // mW

  void validate() const;
  /// Same cellular layout with every D2D pair removed (L = N = 0, tau = K).
  Network without_d2d() const;
};

struct ScenarioConfig {
  SystemDimensions dims;
  GeometryParams geometry;
  PathlossModel pathloss = PathlossModel::default_2ghz();
  double noise_dbm = -94.0;
  double p_max_mw = 200.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Drop {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  Geometry geometry;
  Network network;
};

/// Deterministic in (config, seed). CUs are uniform in their serving cell
/// (3x3-style rectangular grid), D2D transmitters uniform over the area,
/// receivers at fixed distance and uniform angle. Pilots: a random subset of
/// N pairs get distinct pilots, the rest reuse one uniformly at random.
Drop build_scenario(const ScenarioConfig& config, std::uint64_t seed);

LargeScaleGains compute_gains(const Geometry& geometry, const PathlossModel& model,
                              double noise_dbm);

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const nlohmann::json& j);

void to_json(nlohmann::json& j, const SystemDimensions& d);
void to_json(nlohmann::json& j, const PathlossModel& m);
void to_json(nlohmann::json& j, const ScenarioConfig& c);
void to_json(nlohmann::json& j, const Point& p);
void to_json(nlohmann::json& j, const Geometry& g);
void to_json(nlohmann::json& j, const LargeScaleGains& g);
void to_json(nlohmann::json& j, const PilotAllocation& p);
void to_json(nlohmann::json& j, const Network& n);
void to_json(nlohmann::json& j, const Drop& d);

/// Replays a serialized drop without re-sampling.
Drop drop_from_json(const nlohmann::json& j);

}  // namespace d2dmimo
