// SPDX-License-Identifier: Apache-2.0
#include "sfpc/perf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sfpc::perf {

void HardwareConfig::validate() const {
  if (!(peak_macs > 0) || !std::isfinite(peak_macs))
    throw std::invalid_argument("peak_macs must be positive");
  if (!(dram_bandwidth > 0) || !std::isfinite(dram_bandwidth))
    throw std::invalid_argument("dram_bandwidth must be positive");
  for (double e : {e_dram_bit, e_mac, e_buffer_bit, e_codec_bit})
    if (e < 0 || !std::isfinite(e))
      throw std::invalid_argument("energy terms must be non-negative");
}

LayerCost layer_cost(std::string name, double macs, double bytes, const HardwareConfig& hw) {
  hw.validate();
  if (macs < 0 || !std::isfinite(macs)) throw std::invalid_argument("macs must be non-negative");
  if (bytes < 0 || !std::isfinite(bytes)) throw std::invalid_argument("bytes must be non-negative");
  LayerCost c;
  c.name = std::move(name);
  c.macs = macs;
  c.bytes = bytes;
  c.t_compute = macs / hw.peak_macs;
  c.t_memory = bytes / hw.dram_bandwidth;
  c.t_total = std::max(c.t_compute, c.t_memory);
  c.bound = c.t_memory > c.t_compute ? Bound::Memory : Bound::Compute;
  c.energy = 8.0 * bytes * (hw.e_dram_bit + hw.e_buffer_bit) + macs * hw.e_mac;
  return c;
}

RunReport run_report(std::span<const LayerTraffic> layers, const HardwareConfig& hw) {
  hw.validate();
  if (layers.empty()) throw std::invalid_argument("no layers to model");
  std::string gaps;
  for (const auto& l : layers) {
    if (l.bytes_raw < 0 || !std::isfinite(l.bytes_raw) || l.macs < 0 || !std::isfinite(l.macs))
      throw std::invalid_argument("negative or non-finite traffic for layer " + l.name);
    if (l.bytes_compressed < 0 || !std::isfinite(l.bytes_compressed))
      gaps += gaps.empty() ? l.name : ", " + l.name;
  }
  if (!gaps.empty())
    throw std::invalid_argument("layers lack compressed traffic: " + gaps);

  RunReport r;
  double raw_total = 0, shipped_total = 0;
  for (const auto& l : layers) {
    LayerCost base = layer_cost(l.name, l.macs, l.bytes_raw, hw);
    const double shipped = std::min(l.bytes_compressed, l.bytes_raw);
    LayerCost comp = layer_cost(l.name, l.macs, shipped, hw);
    // DRAM moves the compressed stream but the buffer still holds the
    // decompressed data, and the codec touches every shipped bit.
    comp.energy = 8.0 * shipped * (hw.e_dram_bit + hw.e_codec_bit) +
                  8.0 * l.bytes_raw * hw.e_buffer_bit + l.macs * hw.e_mac;
    r.t_baseline += base.t_total;
    r.t_compressed += comp.t_total;
    r.e_baseline += base.energy;
    r.e_compressed += comp.energy;
    raw_total += l.bytes_raw;
    shipped_total += shipped;
    if (base.bound != comp.bound) ++r.flipped;
    r.baseline.push_back(std::move(base));
    r.compressed.push_back(std::move(comp));
  }
  r.speedup = r.t_compressed > 0 ? r.t_baseline / r.t_compressed : 1.0;
  r.energy_ratio = r.e_baseline > 0 ? r.e_compressed / r.e_baseline : 1.0;
  r.traffic_ratio = raw_total > 0 ? shipped_total / raw_total : 1.0;
  r.flipped_fraction = static_cast<double>(r.flipped) / static_cast<double>(layers.size());
  return r;
}

std::vector<LayerTraffic> read_layers_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open layer file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("layer file is empty: " + path);
  if (line.ends_with('\r')) line.pop_back();
  if (line != "layer,macs,bytes_raw,bytes_compressed")
    throw std::invalid_argument("layer file needs header layer,macs,bytes_raw,bytes_compressed");
  std::vector<LayerTraffic> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.ends_with('\r')) line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.ends_with(',')) cells.push_back("");
    if (cells.size() != 4)
      throw std::invalid_argument("expected 4 columns at line " + std::to_string(lineno));
    LayerTraffic t;
    t.name = cells[0];
    auto num = [&](const std::string& s, double missing) {
      if (s.find_first_not_of(" \t") == std::string::npos) return missing;
      try {
        return std::stod(s);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric cell at line " + std::to_string(lineno));
      }
    };
    t.macs = num(cells[1], -1);
    t.bytes_raw = num(cells[2], -1);
    t.bytes_compressed = num(cells[3], -1);
    if (t.macs < 0 || t.bytes_raw < 0)
      throw std::invalid_argument("macs and bytes_raw are required at line " +
                                  std::to_string(lineno));
    rows.push_back(std::move(t));
  }
  if (rows.empty()) throw std::invalid_argument("layer file has no rows: " + path);
  return rows;
}

} // namespace sfpc::perf
