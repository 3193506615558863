// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

namespace sfpc::perf {

// Roofline-style time and energy model for a dense accelerator with a
// bandwidth-limited DRAM link and an inline (de)compressor on that link.
// Layer time is max(compute, memory); the codec runs at line rate, so it
// shows up as energy overhead per compressed bit, not as time. DRAM carries
// the compressed stream while the on-chip buffer always carries the
// decompressed full-width data, so buffer energy scales with raw traffic.
// A layer never transfers more than its raw bytes: if compression expands
// a stream the raw form ships instead.

struct HardwareConfig {
  double peak_macs = 8192.0 * 4.0 * 500e6; // units x MACs/unit/cycle x clock
  double dram_bandwidth = 51.2e9;          // bytes/s
  double e_dram_bit = 15e-12;              // J per bit moved over DRAM
  double e_mac = 0;                        // J per MAC
  double e_buffer_bit = 0;                 // J per decompressed bit buffered
  double e_codec_bit = 0;                  // J per compressed bit through the codec

  void validate() const; // rates must be positive, energies non-negative
};

enum class Bound { Compute, Memory };

struct LayerCost {
  std::string name;
  double macs = 0;
  double bytes = 0; // bytes actually moved over DRAM
  double t_compute = 0;
  double t_memory = 0;
  double t_total = 0;
  double energy = 0;
  Bound bound = Bound::Compute; // Memory when t_memory strictly dominates
};

// Cost of one layer moving `bytes` of uncompressed data.
LayerCost layer_cost(std::string name, double macs, double bytes,
                     const HardwareConfig& hw);

struct LayerTraffic {
  std::string name;
  double macs = 0;
  double bytes_raw = 0;
  double bytes_compressed = -1; // negative marks a gap in the trace
};

struct RunReport {
  double t_baseline = 0;
  double t_compressed = 0;
  double speedup = 1;
  double e_baseline = 0;
  double e_compressed = 0;
  double energy_ratio = 1;
  double traffic_ratio = 1; // shipped bytes / raw bytes, min guard applied
  std::size_t flipped = 0;  // layers whose boundness changed
  double flipped_fraction = 0;
  std::vector<LayerCost> baseline;
  std::vector<LayerCost> compressed;
};

// Whole-run comparison of the raw and compressed executions. Throws
// invalid_argument when any layer lacks compressed traffic, listing the
// offending layers.
RunReport run_report(std::span<const LayerTraffic> layers, const HardwareConfig& hw);

// "layer,macs,bytes_raw,bytes_compressed" rows; an empty last cell marks a
// gap that run_report will then reject.
std::vector<LayerTraffic> read_layers_csv(const std::string& path);

} // namespace sfpc::perf
