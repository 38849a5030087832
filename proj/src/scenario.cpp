#include "d2dmimo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "d2dmimo/rng.hpp"

namespace d2dmimo {

void SystemDimensions::validate() const {
  if (num_cells < 1) throw ConfigError("num_cells", "must be >= 1");
  if (antennas_per_bs < 1) throw ConfigError("antennas_per_bs", "must be >= 1");
  if (cus_per_cell < 1) throw ConfigError("cus_per_cell", "must be >= 1");
  if (num_d2d_pairs < 0) throw ConfigError("num_d2d_pairs", "must be >= 0");
  if (num_d2d_pilots < 0) throw ConfigError("num_d2d_pilots", "must be >= 0");
  if ((num_d2d_pairs == 0) != (num_d2d_pilots == 0)) {
    throw ConfigError("num_d2d_pilots", "must be 0 exactly when num_d2d_pairs is 0");
  }
  if (num_d2d_pairs < num_d2d_pilots) {
    throw ConfigError("num_d2d_pilots", "cannot exceed num_d2d_pairs");
  }
  if (pilot_len() >= coherence_len) {
    throw ConfigError("coherence_len", "pilot length K+N must be shorter than the coherence block");
  }
}

double PathlossModel::hata_fixed_loss_db(double carrier_mhz, double bs_height_m,
                                         double user_height_m) {
  const double lf = std::log10(carrier_mhz);
  return 46.3 + 33.9 * lf - 13.82 * std::log10(bs_height_m) -
         (1.1 * lf - 0.7) * user_height_m + (1.56 * lf - 0.8);
}

PathlossModel PathlossModel::default_2ghz() {
  PathlossModel m;
  m.fixed_loss_db = hata_fixed_loss_db(2000.0, 15.0, 1.65);
  return m;
}

void PathlossModel::validate() const {
  if (!(d0_m > 0.0)) throw ConfigError("pathloss.d0_m", "must be positive");
  if (!(d1_m > d0_m)) throw ConfigError("pathloss.d1_m", "must exceed d0_m");
  if (!std::isfinite(fixed_loss_db)) throw ConfigError("pathloss.fixed_loss_db", "must be finite");
  for (double s : slopes_db) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw ConfigError("pathloss.slopes_db", "slopes must be finite and non-negative");
    }
  }
}

double pathloss_db(double distance_m, const PathlossModel& model) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("pathloss_db: distance must be positive");
  const double d = std::log10(distance_m / 1000.0);
  const double d0 = std::log10(model.d0_m / 1000.0);
  const double d1 = std::log10(model.d1_m / 1000.0);
  const auto& s = model.slopes_db;
  if (distance_m > model.d1_m) return -model.fixed_loss_db - s[2] * d;
  if (distance_m > model.d0_m) return -model.fixed_loss_db - (s[2] - s[1]) * d1 - s[1] * d;
  return -model.fixed_loss_db - (s[2] - s[1]) * d1 - (s[1] - s[0]) * d0 - s[0] * d;
}

double euclidean_distance(const Point& p, const Point& q) {
  return std::hypot(p.x - q.x, p.y - q.y);
}

double wrap_distance(const Point& p, const Point& q, double area_side) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      best = std::min(best, std::hypot(p.x - q.x - i * area_side, p.y - q.y - j * area_side));
    }
  }
  return best;
}

double Geometry::distance(const Point& p, const Point& q) const {
  return wraparound ? wrap_distance(p, q, area_side) : euclidean_distance(p, q);
}

int Geometry::cell_of(const Point& p) const {
  const double w = area_side / grid_cols;
  const double h = area_side / grid_rows;
  const int col = std::clamp(static_cast<int>(p.x / w), 0, grid_cols - 1);
  const int row = std::clamp(static_cast<int>(p.y / h), 0, grid_rows - 1);
  return row * grid_cols + col;
}

LargeScaleGains::LargeScaleGains(int num_cells, int cus_per_cell, int num_d2d)
    : B_(num_cells),
      K_(cus_per_cell),
      L_(num_d2d),
      cu_bs_(static_cast<std::size_t>(B_ * B_ * K_), 0.0),
      d2d_bs_(static_cast<std::size_t>(B_ * L_), 0.0),
      cu_d2d_(static_cast<std::size_t>(L_ * B_ * K_), 0.0),
      d2d_d2d_(static_cast<std::size_t>(L_ * L_), 0.0) {}

void LargeScaleGains::validate() const {
  auto check = [](const std::vector<double>& v, const char* name) {
    for (double x : v) {
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string("LargeScaleGains: non-positive or non-finite entry in ") + name);
      }
    }
  };
  check(cu_bs_, "cu_bs");
  check(d2d_bs_, "d2d_bs");
  check(cu_d2d_, "cu_d2d");
  check(d2d_d2d_, "d2d_d2d");
}

PilotAllocation PilotAllocation::from_assignment(std::vector<int> d2d_pilot, int num_pilots) {
  PilotAllocation a;
  a.sets.assign(static_cast<std::size_t>(num_pilots), {});
  for (std::size_t l = 0; l < d2d_pilot.size(); ++l) {
    const int i = d2d_pilot[l];
    if (i < 0 || i >= num_pilots) throw std::invalid_argument("PilotAllocation: pilot index out of range");
    a.sets[static_cast<std::size_t>(i)].push_back(static_cast<int>(l));
  }
  a.d2d_pilot = std::move(d2d_pilot);
  return a;
}

void PilotAllocation::validate(int num_d2d, int num_pilots) const {
  if (static_cast<int>(d2d_pilot.size()) != num_d2d || static_cast<int>(sets.size()) != num_pilots) {
    throw std::invalid_argument("PilotAllocation: size mismatch with dimensions");
  }
  std::vector<int> seen(static_cast<std::size_t>(num_d2d), 0);
  for (int i = 0; i < num_pilots; ++i) {
    if (sets[i].empty()) throw std::invalid_argument("PilotAllocation: empty pilot set");
    for (int l : sets[i]) {
      if (l < 0 || l >= num_d2d || d2d_pilot[l] != i) {
        throw std::invalid_argument("PilotAllocation: sets disagree with per-pair assignment");
      }
      ++seen[l];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw std::invalid_argument("PilotAllocation: sets do not partition the D2D pairs");
  }
}

void Network::validate() const {
  dims.validate();
  if (gains.num_cells() != dims.num_cells || gains.cus_per_cell() != dims.cus_per_cell ||
      gains.num_d2d() != dims.num_d2d_pairs) {
    throw std::invalid_argument("Network: gains do not match dimensions");
  }
  gains.validate();
  pilots.validate(dims.num_d2d_pairs, dims.num_d2d_pilots);
  if (!(p_max > 0.0)) throw std::invalid_argument("Network: p_max must be positive");
}

Network Network::without_d2d() const {
  Network out;
  out.dims = dims;
  out.dims.num_d2d_pairs = 0;
  out.dims.num_d2d_pilots = 0;
  out.gains = LargeScaleGains(dims.num_cells, dims.cus_per_cell, 0);
  for (int b = 0; b < dims.num_cells; ++b)
    for (int bp = 0; bp < dims.num_cells; ++bp)
      for (int k = 0; k < dims.cus_per_cell; ++k) out.gains.cu_bs(b, bp, k) = gains.cu_bs(b, bp, k);
  out.p_max = p_max;
  return out;
}

void ScenarioConfig::validate() const {
  dims.validate();
  pathloss.validate();
  if (!(geometry.area_side_m > 0.0)) throw ConfigError("area_side_m", "must be positive");
  if (!(geometry.d2d_link_distance_m > 0.0)) throw ConfigError("d2d_link_distance_m", "must be positive");
  if (geometry.d2d_link_distance_m > geometry.area_side_m) {
    throw ConfigError("d2d_link_distance_m", "geometry infeasible: exceeds area side");
  }
  if (geometry.wraparound && geometry.d2d_link_distance_m > geometry.area_side_m / 2) {
    throw ConfigError("d2d_link_distance_m", "must not exceed half the area side under wrap-around");
  }
  if (!(p_max_mw > 0.0)) throw ConfigError("p_max_mw", "must be positive");
  if (!std::isfinite(noise_dbm)) throw ConfigError("noise_dbm", "must be finite");
}

namespace {

void grid_shape(int num_cells, int& rows, int& cols) {
  rows = 1;
  for (int r = 1; r * r <= num_cells; ++r) {
    if (num_cells % r == 0) rows = r;
  }
  cols = num_cells / rows;
}

Point wrap_into(Point p, double side) {
  p.x = std::fmod(p.x, side);
  p.y = std::fmod(p.y, side);
  if (p.x < 0) p.x += side;
  if (p.y < 0) p.y += side;
  return p;
}

bool placement_ok(const Geometry& g, double min_d) {
  for (const Point& bs : g.bs_positions) {
    for (const Point& cu : g.cu_positions)
      if (g.distance(bs, cu) < min_d) return false;
    for (const Point& tx : g.d2d_tx_positions)
      if (g.distance(bs, tx) < min_d) return false;
  }
  for (const Point& rx : g.d2d_rx_positions) {
    for (const Point& cu : g.cu_positions)
      if (g.distance(rx, cu) < min_d) return false;
    for (const Point& tx : g.d2d_tx_positions)
      if (g.distance(rx, tx) < min_d) return false;
  }
  return true;
}

Geometry place_nodes(const ScenarioConfig& cfg, Rng& rng) {
  const auto& d = cfg.dims;
  Geometry g;
  g.area_side = cfg.geometry.area_side_m;
  g.wraparound = cfg.geometry.wraparound;
  g.d2d_link_distance = cfg.geometry.d2d_link_distance_m;
  grid_shape(d.num_cells, g.grid_rows, g.grid_cols);
  const double w = g.area_side / g.grid_cols;
  const double h = g.area_side / g.grid_rows;
  for (int b = 0; b < d.num_cells; ++b) {
    const int row = b / g.grid_cols;
    const int col = b % g.grid_cols;
    g.bs_positions.push_back({(col + 0.5) * w, (row + 0.5) * h});
  }
  for (int b = 0; b < d.num_cells; ++b) {
    const int row = b / g.grid_cols;
    const int col = b % g.grid_cols;
    for (int k = 0; k < d.cus_per_cell; ++k) {
      g.cu_positions.push_back({rng.uniform(col * w, (col + 1) * w), rng.uniform(row * h, (row + 1) * h)});
    }
  }
  for (int l = 0; l < d.num_d2d_pairs; ++l) {
    Point tx{rng.uniform(0.0, g.area_side), rng.uniform(0.0, g.area_side)};
    Point rx;
    for (;;) {
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      rx = {tx.x + g.d2d_link_distance * std::cos(theta), tx.y + g.d2d_link_distance * std::sin(theta)};
      if (g.wraparound) {
        rx = wrap_into(rx, g.area_side);
        break;
      }
      if (rx.x >= 0 && rx.x < g.area_side && rx.y >= 0 && rx.y < g.area_side) break;
    }
    g.d2d_tx_positions.push_back(tx);
    g.d2d_rx_positions.push_back(rx);
  }
  return g;
}

PilotAllocation assign_pilots(int num_d2d, int num_pilots, Rng& rng) {
  if (num_d2d == 0) return PilotAllocation::from_assignment({}, 0);
  std::vector<int> order(static_cast<std::size_t>(num_d2d));
  std::iota(order.begin(), order.end(), 0);
  for (int i = num_d2d - 1; i > 0; --i) {
    std::swap(order[i], order[rng.index(static_cast<std::size_t>(i) + 1)]);
  }
  std::vector<int> pilot_perm(static_cast<std::size_t>(num_pilots));
  std::iota(pilot_perm.begin(), pilot_perm.end(), 0);
  for (int i = num_pilots - 1; i > 0; --i) {
    std::swap(pilot_perm[i], pilot_perm[rng.index(static_cast<std::size_t>(i) + 1)]);
  }
  std::vector<int> assignment(static_cast<std::size_t>(num_d2d), -1);
  for (int j = 0; j < num_d2d; ++j) {
    assignment[order[j]] = j < num_pilots ? pilot_perm[j]
                                          : static_cast<int>(rng.index(static_cast<std::size_t>(num_pilots)));
  }
  return PilotAllocation::from_assignment(std::move(assignment), num_pilots);
}

}  // namespace

LargeScaleGains compute_gains(const Geometry& g, const PathlossModel& model, double noise_dbm) {
  const int B = static_cast<int>(g.bs_positions.size());
  const int K = B == 0 ? 0 : static_cast<int>(g.cu_positions.size()) / B;
  const int L = static_cast<int>(g.d2d_tx_positions.size());
  auto gain = [&](const Point& a, const Point& b) {
    return std::pow(10.0, (pathloss_db(g.distance(a, b), model) - noise_dbm) / 10.0);
  };
  LargeScaleGains out(B, K, L);
  for (int b = 0; b < B; ++b) {
    for (int bp = 0; bp < B; ++bp)
      for (int k = 0; k < K; ++k) out.cu_bs(b, bp, k) = gain(g.bs_positions[b], g.cu_positions[bp * K + k]);
    for (int l = 0; l < L; ++l) out.d2d_bs(b, l) = gain(g.bs_positions[b], g.d2d_tx_positions[l]);
  }
  for (int l = 0; l < L; ++l) {
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k) out.cu_d2d(l, b, k) = gain(g.d2d_rx_positions[l], g.cu_positions[b * K + k]);
    for (int lp = 0; lp < L; ++lp) out.d2d_d2d(l, lp) = gain(g.d2d_rx_positions[l], g.d2d_tx_positions[lp]);
  }
  return out;
}

Drop build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Drop drop;
  drop.config = config;
  drop.seed = seed;
  constexpr int kMaxRedraws = 10000;
  int attempt = 0;
  for (;; ++attempt) {
    if (attempt == kMaxRedraws) throw std::runtime_error("build_scenario: could not place nodes apart");
    drop.geometry = place_nodes(config, rng);
    if (placement_ok(drop.geometry, config.geometry.min_distance_m)) break;
  }
  drop.network.dims = config.dims;
  drop.network.p_max = config.p_max_mw;
  drop.network.gains = compute_gains(drop.geometry, config.pathloss, config.noise_dbm);
  drop.network.pilots = assign_pilots(config.dims.num_d2d_pairs, config.dims.num_d2d_pilots, rng);
  drop.network.validate();
  return drop;
}

// ---- JSON ---------------------------------------------------------------

namespace {

using nlohmann::json;

template <typename T>
T read_key(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

const std::set<std::string> kConfigKeys = {
    "num_cells", "antennas_per_bs", "cus_per_cell", "num_d2d_pairs", "num_d2d_pilots",
    "coherence_len", "area_side_m", "d2d_link_distance_m", "wraparound", "min_distance_m",
    "pathloss", "noise_dbm", "p_max_mw", "seed"};

}  // namespace

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config root must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.contains(key)) throw ConfigError(key, "unknown key");
  }
  ScenarioConfig c;
  c.dims.num_cells = read_key(j, "num_cells", c.dims.num_cells);
  c.dims.antennas_per_bs = read_key(j, "antennas_per_bs", c.dims.antennas_per_bs);
  c.dims.cus_per_cell = read_key(j, "cus_per_cell", c.dims.cus_per_cell);
  c.dims.num_d2d_pairs = read_key(j, "num_d2d_pairs", c.dims.num_d2d_pairs);
  c.dims.num_d2d_pilots = read_key(j, "num_d2d_pilots", c.dims.num_d2d_pilots);
  c.dims.coherence_len = read_key(j, "coherence_len", c.dims.coherence_len);
  c.geometry.area_side_m = read_key(j, "area_side_m", c.geometry.area_side_m);
  c.geometry.d2d_link_distance_m = read_key(j, "d2d_link_distance_m", c.geometry.d2d_link_distance_m);
  c.geometry.wraparound = read_key(j, "wraparound", c.geometry.wraparound);
  c.geometry.min_distance_m = read_key(j, "min_distance_m", c.geometry.min_distance_m);
  c.noise_dbm = read_key(j, "noise_dbm", c.noise_dbm);
  c.p_max_mw = read_key(j, "p_max_mw", c.p_max_mw);
  c.seed = read_key<std::uint64_t>(j, "seed", c.seed);
  if (auto it = j.find("pathloss"); it != j.end()) {
    const json& pl = *it;
    if (!pl.is_object()) throw ConfigError("pathloss", "must be an object");
    for (const auto& [key, _] : pl.items()) {
      if (key != "d0_m" && key != "d1_m" && key != "fixed_loss_db" && key != "slopes_db") {
        throw ConfigError("pathloss." + key, "unknown key");
      }
    }
    c.pathloss.d0_m = read_key(pl, "d0_m", c.pathloss.d0_m);
    c.pathloss.d1_m = read_key(pl, "d1_m", c.pathloss.d1_m);
    c.pathloss.fixed_loss_db = read_key(pl, "fixed_loss_db", c.pathloss.fixed_loss_db);
    c.pathloss.slopes_db = read_key(pl, "slopes_db", c.pathloss.slopes_db);
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

void to_json(json& j, const SystemDimensions& d) {
  j = json{{"num_cells", d.num_cells},         {"antennas_per_bs", d.antennas_per_bs},
           {"cus_per_cell", d.cus_per_cell},   {"num_d2d_pairs", d.num_d2d_pairs},
           {"num_d2d_pilots", d.num_d2d_pilots}, {"coherence_len", d.coherence_len}};
}

void to_json(json& j, const PathlossModel& m) {
  j = json{{"d0_m", m.d0_m}, {"d1_m", m.d1_m}, {"fixed_loss_db", m.fixed_loss_db}, {"slopes_db", m.slopes_db}};
}

void to_json(json& j, const ScenarioConfig& c) {
  to_json(j, c.dims);
  j["area_side_m"] = c.geometry.area_side_m;
  j["d2d_link_distance_m"] = c.geometry.d2d_link_distance_m;
  j["wraparound"] = c.geometry.wraparound;
  j["min_distance_m"] = c.geometry.min_distance_m;
  j["pathloss"] = c.pathloss;
  j["noise_dbm"] = c.noise_dbm;
  j["p_max_mw"] = c.p_max_mw;
  j["seed"] = c.seed;
}

void to_json(json& j, const Point& p) { j = json::array({p.x, p.y}); }

void to_json(json& j, const Geometry& g) {
  j = json{{"area_side", g.area_side},
           {"grid_rows", g.grid_rows},
           {"grid_cols", g.grid_cols},
           {"bs_positions", g.bs_positions},
           {"cu_positions", g.cu_positions},
           {"d2d_tx_positions", g.d2d_tx_positions},
           {"d2d_rx_positions", g.d2d_rx_positions},
           {"d2d_link_distance", g.d2d_link_distance},
           {"wraparound", g.wraparound}};
}

void to_json(json& j, const LargeScaleGains& g) {
  const int B = g.num_cells(), K = g.cus_per_cell(), L = g.num_d2d();
  json cu_bs = json::array(), d2d_bs = json::array(), cu_d2d = json::array(), d2d_d2d = json::array();
  for (int b = 0; b < B; ++b) {
    json per_bs = json::array();
    for (int bp = 0; bp < B; ++bp) {
      json row = json::array();
      for (int k = 0; k < K; ++k) row.push_back(g.cu_bs(b, bp, k));
      per_bs.push_back(row);
    }
    cu_bs.push_back(per_bs);
    json row = json::array();
    for (int l = 0; l < L; ++l) row.push_back(g.d2d_bs(b, l));
    d2d_bs.push_back(row);
  }
  for (int l = 0; l < L; ++l) {
    json per_rx = json::array();
    for (int b = 0; b < B; ++b) {
      json row = json::array();
      for (int k = 0; k < K; ++k) row.push_back(g.cu_d2d(l, b, k));
      per_rx.push_back(row);
    }
    cu_d2d.push_back(per_rx);
    json row = json::array();
    for (int lp = 0; lp < L; ++lp) row.push_back(g.d2d_d2d(l, lp));
    d2d_d2d.push_back(row);
  }
  j = json{{"beta_cu_bs", cu_bs}, {"beta_d2dtx_bs", d2d_bs}, {"beta_cu_d2drx", cu_d2d}, {"beta_d2dtx_d2drx", d2d_d2d}};
}

void to_json(json& j, const PilotAllocation& p) { j = json{{"d2d_pilot", p.d2d_pilot}, {"sets", p.sets}}; }

void to_json(json& j, const Network& n) {
  j = json{{"dims", n.dims}, {"gains", n.gains}, {"pilots", n.pilots}, {"p_max_mw", n.p_max}};
}

void to_json(json& j, const Drop& d) {
  j = json{{"config", d.config}, {"seed", d.seed}, {"geometry", d.geometry}, {"network", d.network}};
}

namespace {

Point point_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::vector<Point> points_from_json(const json& j) {
  std::vector<Point> out;
  for (const auto& p : j) out.push_back(point_from_json(p));
  return out;
}

}  // namespace

Drop drop_from_json(const json& j) {
  Drop d;
  d.config = parse_config(j.at("config"));
  d.seed = j.at("seed").get<std::uint64_t>();
  const json& g = j.at("geometry");
  d.geometry.area_side = g.at("area_side").get<double>();
  d.geometry.grid_rows = g.at("grid_rows").get<int>();
  d.geometry.grid_cols = g.at("grid_cols").get<int>();
  d.geometry.bs_positions = points_from_json(g.at("bs_positions"));
  d.geometry.cu_positions = points_from_json(g.at("cu_positions"));
  d.geometry.d2d_tx_positions = points_from_json(g.at("d2d_tx_positions"));
  d.geometry.d2d_rx_positions = points_from_json(g.at("d2d_rx_positions"));
  d.geometry.d2d_link_distance = g.at("d2d_link_distance").get<double>();
  d.geometry.wraparound = g.at("wraparound").get<bool>();

  const json& n = j.at("network");
  const json& dims = n.at("dims");
  d.network.dims.num_cells = dims.at("num_cells").get<int>();
  d.network.dims.antennas_per_bs = dims.at("antennas_per_bs").get<int>();
  d.network.dims.cus_per_cell = dims.at("cus_per_cell").get<int>();
  d.network.dims.num_d2d_pairs = dims.at("num_d2d_pairs").get<int>();
  d.network.dims.num_d2d_pilots = dims.at("num_d2d_pilots").get<int>();
  d.network.dims.coherence_len = dims.at("coherence_len").get<int>();
  const int B = d.network.dims.num_cells, K = d.network.dims.cus_per_cell, L = d.network.dims.num_d2d_pairs;
  LargeScaleGains gains(B, K, L);
  const json& gj = n.at("gains");
  for (int b = 0; b < B; ++b) {
    for (int bp = 0; bp < B; ++bp)
      for (int k = 0; k < K; ++k) gains.cu_bs(b, bp, k) = gj.at("beta_cu_bs").at(b).at(bp).at(k).get<double>();
    for (int l = 0; l < L; ++l) gains.d2d_bs(b, l) = gj.at("beta_d2dtx_bs").at(b).at(l).get<double>();
  }
  for (int l = 0; l < L; ++l) {
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k) gains.cu_d2d(l, b, k) = gj.at("beta_cu_d2drx").at(l).at(b).at(k).get<double>();
    for (int lp = 0; lp < L; ++lp) gains.d2d_d2d(l, lp) = gj.at("beta_d2dtx_d2drx").at(l).at(lp).get<double>();
  }
  d.network.gains = std::move(gains);
  d.network.pilots = PilotAllocation::from_assignment(n.at("pilots").at("d2d_pilot").get<std::vector<int>>(),
                                                      d.network.dims.num_d2d_pilots);
  d.network.p_max = n.at("p_max_mw").get<double>();
  d.network.validate();
  return d;
}

}  // namespace d2dmimo
