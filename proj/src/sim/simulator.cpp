// SPDX-License-Identifier: Apache-2.0

#include "dpp/sim/simulator.hpp"

#include <cstdio>
#include <numeric>

#include "dpp/common/errors.hpp"
#include "dpp/common/hash.hpp"
#include "dpp/common/io.hpp"
#include "dpp/sim/reduction.hpp"

namespace dpp::sim {

using nlohmann::json;

namespace {

json grid_to_json(const GridSpec& g) {
  return {{"rows", g.n_rows},
          {"cols", g.n_cols},
          {"R", g.cell.resistance_ohm},
          {"L", g.cell.inductance_henry},
          {"G", g.cell.conductance_siemens},
          {"C", g.cell.capacitance_farad},
          {"W", g.cell.width_meter}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.n_rows = j.at("rows").get<int>();
  g.n_cols = j.at("cols").get<int>();
  g.cell.resistance_ohm = j.at("R").get<double>();
  g.cell.inductance_henry = j.at("L").get<double>();
  g.cell.conductance_siemens = j.at("G").get<double>();
  g.cell.capacitance_farad = j.at("C").get<double>();
  g.cell.width_meter = j.at("W").get<double>();
  return g;
}

}  // namespace

void PdnConfig::validate() const {
  stack.validate();
  decap.validate();
  (void)grid();
}

PdnConfig PdnConfig::with_chip_dims(int rows, int cols) const {
  PdnConfig out = *this;
  out.stack.chip.n_rows = rows;
  out.stack.chip.n_cols = cols;
  return out;
}

PdnConfig PdnConfig::reference() {
  PdnConfig c;
  c.stack.chip = {10, 10, UnitCellParams::chip_default()};
  c.stack.package = GridSpec{40, 40, UnitCellParams::package_default()};
  c.stack.via_inductance_henry = 0.0;
  return c;
}

PdnConfig PdnConfig::chip_only(int rows, int cols) {
  PdnConfig c;
  c.stack.chip = {rows, cols, UnitCellParams::chip_default()};
  return c;
}

json PdnConfig::to_json() const {
  json j;
  j["chip"] = grid_to_json(stack.chip);
  if (stack.package) j["package"] = grid_to_json(*stack.package);
  j["via_l"] = stack.via_inductance_henry;
  j["decap"] = {{"r", decap.r_ohm}, {"l", decap.l_henry}, {"c", decap.c_farad}};
  j["freq"] = {{"n", freq_points}, {"fmin", f_min_hz}, {"fmax", f_max_hz}};
  return j;
}

PdnConfig PdnConfig::from_json(const json& j) {
  try {
    PdnConfig c;
    c.stack.chip = grid_from_json(j.at("chip"));
    if (j.contains("package") && !j.at("package").is_null()) c.stack.package = grid_from_json(j.at("package"));
    c.stack.via_inductance_henry = j.value("via_l", 0.0);
    if (j.contains("decap")) {
      const json& d = j.at("decap");
      c.decap.r_ohm = d.at("r").get<double>();
      c.decap.l_henry = d.at("l").get<double>();
      c.decap.c_farad = d.at("c").get<double>();
    }
    if (j.contains("freq")) {
      const json& f = j.at("freq");
      c.freq_points = f.at("n").get<int>();
      c.f_min_hz = f.at("fmin").get<double>();
      c.f_max_hz = f.at("fmax").get<double>();
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("PDN config: ") + e.what());
  }
}

PdnConfig PdnConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("malformed PDN config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::uint64_t PdnConfig::hash() const { return fnv1a64(to_json().dump()); }

Simulator::Simulator(PdnConfig base) : base_(std::move(base)) { base_.validate(); }

Simulator::Entry& Simulator::entry(int rows, int cols) const {
  std::unique_lock lock(mutex_);
  auto& slot = cache_[{rows, cols}];
  if (!slot) slot = std::make_unique<Entry>();
  Entry& e = *slot;
  lock.unlock();
  std::call_once(e.once, [&] {
    const PdnConfig cfg = base_.with_chip_dims(rows, cols);
    cfg.validate();
    std::vector<int> ports(static_cast<std::size_t>(rows * cols));
    std::iota(ports.begin(), ports.end(), 0);
    e.sweep = solve_z_ports(cfg.stack, ports, cfg.grid());
  });
  return e;
}

const FrequencySweepZ& Simulator::bare_sweep(int rows, int cols) const { return entry(rows, cols).sweep; }

std::vector<double> Simulator::initial_profile(int rows, int cols, int probe) const {
  return probe_profile(bare_sweep(rows, cols), probe);
}

std::vector<double> Simulator::final_profile(int rows, int cols, int probe, std::span<const int> decaps) const {
  return attach_decaps(bare_sweep(rows, cols), probe, decaps, base_.decap);
}

double Simulator::score(int rows, int cols, int probe, std::span<const int> decaps) const {
  const FrequencySweepZ& z = bare_sweep(rows, cols);
  const auto z_init = probe_profile(z, probe);
  const auto z_final = attach_decaps(z, probe, decaps, base_.decap);
  evaluations_.fetch_add(1);
  return objective(z_init, z_final, z.grid);
}

void write_profile_csv(const std::filesystem::path& path, const FreqGrid& grid, std::span<const double> z) {
  require(z.size() == grid.size(), "write_profile_csv: profile length does not match the grid");
  std::string text = "frequency_hz,z_ohm\n";
  char buf[64];
  for (std::size_t i = 0; i < z.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid.points_hz[i], z[i]);
    text += buf;
  }
  write_text_file(path, text);
}

}  // namespace dpp::sim
