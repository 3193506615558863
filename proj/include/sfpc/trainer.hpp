// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sfpc/bitchop.hpp"
#include "sfpc/bitlearn.hpp"
#include "sfpc/float_format.hpp"
#include "sfpc/gecko.hpp"
#include "sfpc/mlp.hpp"

namespace sfpc::train {

// Desk-scale training harness: a small dense network on a synthetic or CSV
// dataset, plain SGD with optional step LR drops, and one of three tensor
// storage modes: full width, learned per-tensor widths, or the loss-EMA
// heuristic. Every controlled tensor flows through the same narrowing and
// masking pipeline, so a controller pinned at full width reproduces the
// plain run bit for bit. Footprints are measured per batch with the lane
// packer's closed-form sizer.

enum class Quantizer : std::uint8_t { None = 0, Learned = 1, Ema = 2 };
enum class DatasetKind : std::uint8_t { Blobs = 0, Spirals = 1, Csv = 2 };

struct TrainConfig {
  DatasetKind dataset = DatasetKind::Blobs;
  std::string csv_path;
  int samples = 4096;  // test split adds samples/4 generated separately
  int classes = 3;
  double noise = 0.5;
  int batch = 32;
  int epochs = 30;
  std::vector<int> hidden = {32, 32};
  std::uint64_t seed = 1;

  double lr = 0.05;
  std::vector<int> lr_drop_epochs;
  double lr_drop_factor = 0.1;
  double weight_decay = 1e-4;

  FloatKind format = FloatKind::FP32;
  Quantizer quantizer = Quantizer::None;
  gecko::Variant variant = gecko::Variant::DeltaBase;

  double bit_lr = 0.01;                           // learned-width step size
  std::vector<bitlearn::GammaPoint> gamma_schedule; // empty -> thirds default
  int finalize_epoch = -1;                        // -1 -> 0.8 * epochs

  bitchop::Config chop;

  std::string out_dir;  // empty -> no files written
  int trace_every = 0;  // record full tensors every N batches; 0 disables

  void validate() const;
};

struct TensorReport {
  std::string name;
  bitlearn::TensorKind kind = bitlearn::TensorKind::Weights;
  std::size_t element_count = 0;
  double lambda = 0;
  double final_n = 0;      // learnable width (learned mode) or emitted width
  int final_width = 0;     // integer width in effect at the end of the run
  std::uint64_t footprint_bits = 0; // packed stream bits accumulated over the run
  std::uint64_t original_bits = 0;  // format bits for the same instances
};

struct EpochRow {
  int epoch = 0;
  double loss = 0;       // mean batch loss
  double train_acc = 0;  // running accuracy over training batches
  double test_acc = 0;   // full pass over the held-out split
  double lr = 0;
  double gamma = 0;      // learned mode only
  double mean_width = 0; // mean integer width granted this epoch
  std::uint64_t footprint_bits = 0;
  std::uint64_t original_bits = 0;
};

struct LayerTrafficRow {
  std::string name;
  double macs = 0;
  double bytes_raw = 0;
  double bytes_compressed = 0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  double final_train_acc = 0; // full pass with end-of-run widths
  double final_test_acc = 0;
  double weighted_mean_bitlength = 0; // sum(lambda * width) at end of run
  double mean_activation_width = 0;   // mean emitted activation width over batches
  std::uint64_t footprint_bits = 0;
  std::uint64_t original_bits = 0;
  std::vector<TensorReport> tensors;
  std::vector<LayerTrafficRow> traffic;
  std::vector<float> final_params; // flat weights+biases for exactness checks
};

TrainReport run_training(const TrainConfig& cfg);

// Flat "key = value" file, '#' comments. Unknown keys are an error.
TrainConfig load_config(const std::string& path);
TrainConfig config_from_kv(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> parse_kv(const std::string& text);

} // namespace sfpc::train
