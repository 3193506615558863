// SPDX-License-Identifier: Apache-2.0
#include "sfpc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfpc/container.hpp"
#include "sfpc/error.hpp"
#include "sfpc/perf.hpp"
#include "sfpc/stats.hpp"
#include "sfpc/trace.hpp"
#include "sfpc/trainer.hpp"

namespace sfpc::cli {

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

FloatKind parse_format(const std::string& s) {
  if (s == "fp32") return FloatKind::FP32;
  if (s == "bf16") return FloatKind::BF16;
  throw CLI::ValidationError("format", "must be fp32 or bf16");
}

gecko::Variant parse_variant(const std::string& s) {
  if (s == "delta") return gecko::Variant::DeltaBase;
  if (s == "fixed") return gecko::Variant::FixedBias;
  throw CLI::ValidationError("variant", "must be delta or fixed");
}

std::vector<std::uint64_t> parse_shape(const std::string& s) {
  std::vector<std::uint64_t> dims;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) dims.push_back(std::stoull(cell));
  return dims;
}

// Final learned width for one tensor out of a training bitlength log.
int width_from_log(const std::string& path, const std::string& tensor) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open width log: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch,tensor,n", 0) != 0)
    throw std::invalid_argument("width log needs an epoch,tensor,n,gamma header");
  double last_n = -1;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string epoch, name, n_str;
    if (!std::getline(ss, epoch, ',') || !std::getline(ss, name, ',') ||
        !std::getline(ss, n_str, ','))
      continue;
    if (name == tensor) last_n = std::stod(n_str);
  }
  if (last_n < 0)
    throw std::invalid_argument("tensor " + tensor + " not present in width log " + path);
  return static_cast<int>(std::ceil(last_n));
}

void print_size_report(std::ostream& err, const packer::Footprint& fp,
                       std::span<const std::uint32_t> raw, const FloatFormat& fmt) {
  const auto js = stats::js_size_bits(raw, fmt);
  const double original = static_cast<double>(fp.original_bits);
  err << "values=" << raw.size() << " payload_bits=" << fp.payload_bits()
      << " meta_bits=" << fp.meta_bits << " total_bits=" << fp.total_bits()
      << " original_bits=" << fp.original_bits << '\n';
  err << "ratio=" << fmt_g(original > 0 ? static_cast<double>(fp.total_bits()) / original : 0)
      << " js_bits=" << js
      << " js_ratio=" << fmt_g(original > 0 ? static_cast<double>(js) / original : 0) << '\n';
}

int cmd_compress(const std::string& input, const std::string& output, FloatKind kind,
                 const packer::PackConfig& cfg, const std::vector<std::uint64_t>& dims,
                 std::ostream& err) {
  const auto raw = read_raw_values(input, kind);
  const auto c = pack_container(raw, dims, cfg);
  write_container_file(output, c);
  print_size_report(err, packer::measure(raw, cfg), raw, cfg.format);
  return kExitOk;
}

int cmd_decompress(const std::string& input, const std::string& output, std::ostream& err) {
  const auto c = read_container_file(input);
  const auto values = unpack_container(c);
  write_raw_values(output, values, c.header.source_format);
  err << "values=" << values.size() << " format="
      << (c.header.source_format == FloatKind::BF16 ? "bf16" : "fp32")
      << " man_width=" << static_cast<int>(c.header.man_width) << '\n';
  return kExitOk;
}

int cmd_stats(const std::string& input, FloatKind kind, int man_width, bool signless,
              const std::string& cdf_path, std::ostream& out) {
  const auto raw = read_raw_values(input, kind);
  const FloatFormat fmt = FloatFormat::from_kind(kind);
  std::vector<std::uint8_t> exps;
  exps.reserve(raw.size());
  for (auto v : raw) exps.push_back(decompose(v, fmt).exponent);

  out << "values=" << raw.size() << " format=" << (kind == FloatKind::BF16 ? "bf16" : "fp32")
      << '\n';
  const auto delta = gecko::measure(exps, gecko::Variant::DeltaBase);
  const auto fixed = gecko::measure(exps, gecko::Variant::FixedBias);
  out << "exponent_delta_ratio=" << fmt_g(delta.ratio())
      << " exponent_fixed_ratio=" << fmt_g(fixed.ratio()) << '\n';

  packer::PackConfig pc;
  pc.format = fmt;
  pc.man_width = man_width < 0 ? static_cast<int>(fmt.mantissa_bits) : man_width;
  pc.signless = signless;
  pc.nonfinite = NonFinitePolicy::Bypass;
  const auto fp = packer::measure(raw, pc);
  const double original = static_cast<double>(fp.original_bits);
  out << "man_width=" << pc.man_width << " packed_ratio="
      << fmt_g(original > 0 ? static_cast<double>(fp.total_bits()) / original : 0) << '\n';
  const auto js = stats::js_size_bits(raw, fmt);
  out << "js_bits=" << js
      << " js_ratio=" << fmt_g(original > 0 ? static_cast<double>(js) / original : 0) << '\n';

  if (!cdf_path.empty()) {
    std::ofstream f(cdf_path);
    if (!f) throw std::invalid_argument("cannot write cdf file: " + cdf_path);
    f << stats::width_cdf_csv(stats::width_cdf(exps));
  }
  return kExitOk;
}

int cmd_sweep(const std::string& out_path, std::size_t n, std::uint64_t seed,
              std::ostream& out) {
  const auto rows = stats::ratio_sweep(n, seed);
  const auto csv = stats::ratio_sweep_csv(rows);
  if (out_path.empty()) {
    out << csv;
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::invalid_argument("cannot write sweep file: " + out_path);
    f << csv;
  }
  return kExitOk;
}

int cmd_replay(const std::string& trace_path, gecko::Variant variant, std::ostream& out) {
  const auto tf = trace::read_trace(trace_path);
  const auto rs = stats::replay_trace(tf, variant);
  out << "records=" << tf.records.size() << " bits=" << rs.bits
      << " original_bits=" << rs.original_bits << " ratio=" << fmt_g(rs.ratio) << '\n';
  for (const auto& e : rs.epochs)
    out << "epoch=" << e.epoch << " bits=" << e.bits << " ratio=" << fmt_g(e.ratio) << '\n';
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  train::TrainConfig cfg = train::load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const auto report = train::run_training(cfg);
  out << "final_train_acc=" << fmt_g(report.final_train_acc)
      << " final_test_acc=" << fmt_g(report.final_test_acc) << '\n';
  out << "weighted_mean_bitlength=" << fmt_g(report.weighted_mean_bitlength)
      << " mean_activation_width=" << fmt_g(report.mean_activation_width) << '\n';
  const double original = static_cast<double>(report.original_bits);
  out << "footprint_bits=" << report.footprint_bits << " original_bits=" << report.original_bits
      << " footprint_ratio="
      << fmt_g(original > 0 ? static_cast<double>(report.footprint_bits) / original : 0) << '\n';
  return kExitOk;
}

int cmd_perf(const std::string& layers_path, const perf::HardwareConfig& hw,
             const std::string& json_path, std::ostream& out) {
  const auto layers = perf::read_layers_csv(layers_path);
  const auto r = perf::run_report(layers, hw);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& b = r.baseline[i];
    const auto& c = r.compressed[i];
    out << "layer=" << b.name << " t_base=" << fmt_g(b.t_total) << " t_comp=" << fmt_g(c.t_total)
        << " bound_base=" << (b.bound == perf::Bound::Memory ? "memory" : "compute")
        << " bound_comp=" << (c.bound == perf::Bound::Memory ? "memory" : "compute") << '\n';
  }
  out << "speedup=" << fmt_g(r.speedup) << " energy_ratio=" << fmt_g(r.energy_ratio)
      << " traffic_ratio=" << fmt_g(r.traffic_ratio)
      << " flipped_fraction=" << fmt_g(r.flipped_fraction) << '\n';
  if (!json_path.empty()) {
    nlohmann::json j;
    j["speedup"] = r.speedup;
    j["energy_ratio"] = r.energy_ratio;
    j["traffic_ratio"] = r.traffic_ratio;
    j["flipped"] = r.flipped;
    j["flipped_fraction"] = r.flipped_fraction;
    j["t_baseline"] = r.t_baseline;
    j["t_compressed"] = r.t_compressed;
    j["e_baseline"] = r.e_baseline;
    j["e_compressed"] = r.e_compressed;
    auto& jl = j["layers"];
    for (std::size_t i = 0; i < layers.size(); ++i)
      jl.push_back({{"name", r.baseline[i].name},
                    {"t_base", r.baseline[i].t_total},
                    {"t_comp", r.compressed[i].t_total},
                    {"bound_base", r.baseline[i].bound == perf::Bound::Memory ? "memory" : "compute"},
                    {"bound_comp", r.compressed[i].bound == perf::Bound::Memory ? "memory" : "compute"}});
    std::ofstream f(json_path);
    if (!f) throw std::invalid_argument("cannot write json file: " + json_path);
    f << j.dump(2) << '\n';
  }
  return kExitOk;
}

} // namespace

std::vector<std::uint32_t> read_raw_values(const std::string& path, FloatKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t step = kind == FloatKind::BF16 ? 2 : 4;
  if (bytes.size() % step != 0)
    throw std::invalid_argument("file size is not a multiple of the value width: " + path);
  std::vector<std::uint32_t> out(bytes.size() / step);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t v = 0;
    for (std::size_t b = 0; b < step; ++b)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * step + b])) << (8 * b);
    out[i] = v;
  }
  return out;
}

void write_raw_values(const std::string& path, const std::vector<std::uint32_t>& values,
                      FloatKind kind) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  const std::size_t step = kind == FloatKind::BF16 ? 2 : 4;
  std::vector<char> bytes(values.size() * step);
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t b = 0; b < step; ++b)
      bytes[i * step + b] = static_cast<char>((values[i] >> (8 * b)) & 0xFF);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic floating-point tensor compression toolkit"};
  app.require_subcommand(1);

  // compress
  auto* compress = app.add_subcommand("compress", "Pack a raw tensor file into a container");
  std::string c_input, c_output, c_format = "fp32", c_variant = "delta", c_shape;
  std::string c_width_log, c_tensor;
  int c_man_width = -1;
  bool c_signless = false, c_bypass = false;
  int c_bias = gecko::kDefaultBias, c_pad = gecko::kDefaultPadExponent;
  compress->add_option("--input", c_input, "Raw tensor file")->required();
  compress->add_option("--output", c_output, "Container file")->required();
  compress->add_option("--format", c_format, "fp32 or bf16");
  compress->add_option("--variant", c_variant, "delta or fixed");
  auto* mw = compress->add_option("--man-width", c_man_width, "Mantissa bits to keep (default full)");
  auto* wl = compress->add_option("--width-log", c_width_log,
                                  "Trainer bitlengths.csv to take the width from");
  compress->add_option("--tensor", c_tensor, "Tensor name inside the width log");
  mw->excludes(wl);
  compress->add_flag("--signless", c_signless, "Drop sign bits (non-negative data)");
  compress->add_flag("--bypass-nonfinite", c_bypass, "Let NaN/Inf through instead of failing");
  compress->add_option("--bias", c_bias, "Fixed-bias reference exponent");
  compress->add_option("--pad-exponent", c_pad, "Exponent used for group padding");
  compress->add_option("--shape", c_shape, "Comma-separated dims; product must match count");

  // decompress
  auto* decompress = app.add_subcommand("decompress", "Unpack a container to a raw tensor file");
  std::string d_input, d_output;
  decompress->add_option("--input", d_input, "Container file")->required();
  decompress->add_option("--output", d_output, "Raw tensor file")->required();

  // stats
  auto* st = app.add_subcommand("stats", "Size statistics for a raw tensor file");
  std::string s_input, s_format = "fp32", s_cdf;
  int s_man_width = -1;
  bool s_signless = false;
  st->add_option("--input", s_input, "Raw tensor file")->required();
  st->add_option("--format", s_format, "fp32 or bf16");
  st->add_option("--man-width", s_man_width, "Mantissa bits for the packed ratio");
  st->add_flag("--signless", s_signless, "Measure without sign bits");
  st->add_option("--cdf", s_cdf, "Write the delta width CDF to this CSV");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Compression ratio across reference distributions");
  std::string sw_out;
  std::uint64_t sw_seed = 1;
  std::size_t sw_n = 100000;
  sweep->add_option("--output", sw_out, "CSV destination (stdout when omitted)");
  sweep->add_option("--count", sw_n, "Exponents per distribution");
  sweep->add_option("--seed", sw_seed, "Generator seed");

  // replay
  auto* replay = app.add_subcommand("replay", "Recompute footprints from a training trace");
  std::string r_trace, r_variant = "delta";
  replay->add_option("--trace", r_trace, "trace.bin from a training run")->required();
  replay->add_option("--variant", r_variant, "delta or fixed");

  // train
  auto* tr = app.add_subcommand("train", "Run the desk-scale training harness");
  std::string t_config, t_out;
  tr->add_option("--config", t_config, "Key-value config file")->required();
  tr->add_option("--out", t_out, "Override the output directory");

  // perf
  auto* pf = app.add_subcommand("perf", "Roofline time/energy model over a layer table");
  std::string p_layers, p_json;
  perf::HardwareConfig hw;
  pf->add_option("--layers", p_layers, "CSV: layer,macs,bytes_raw,bytes_compressed")->required();
  pf->add_option("--peak", hw.peak_macs, "Peak MACs per second");
  pf->add_option("--bandwidth", hw.dram_bandwidth, "DRAM bytes per second");
  pf->add_option("--e-dram", hw.e_dram_bit, "Joules per DRAM bit");
  pf->add_option("--e-mac", hw.e_mac, "Joules per MAC");
  pf->add_option("--e-buffer", hw.e_buffer_bit, "Joules per buffered bit");
  pf->add_option("--e-codec", hw.e_codec_bit, "Joules per compressed bit through the codec");
  pf->add_option("--json", p_json, "Also write the full report as JSON");

  // selftest
  auto* self = app.add_subcommand("selftest", "Run the built-in property suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*compress) {
      const FloatKind kind = parse_format(c_format);
      packer::PackConfig pc;
      pc.format = FloatFormat::from_kind(kind);
      pc.variant = parse_variant(c_variant);
      if (!c_width_log.empty()) {
        if (c_tensor.empty())
          throw std::invalid_argument("--width-log needs --tensor to pick a row");
        pc.man_width = width_from_log(c_width_log, c_tensor);
      } else {
        pc.man_width = c_man_width < 0 ? static_cast<int>(pc.format.mantissa_bits) : c_man_width;
      }
      pc.signless = c_signless;
      pc.nonfinite = c_bypass ? NonFinitePolicy::Bypass : NonFinitePolicy::Reject;
      pc.bias = c_bias;
      if (c_pad < 0 || c_pad > 255) throw std::invalid_argument("pad exponent must fit a byte");
      pc.pad_exponent = static_cast<std::uint8_t>(c_pad);
      return cmd_compress(c_input, c_output, kind, pc,
                          c_shape.empty() ? std::vector<std::uint64_t>{} : parse_shape(c_shape),
                          err);
    }
    if (*decompress) return cmd_decompress(d_input, d_output, err);
    if (*st) return cmd_stats(s_input, parse_format(s_format), s_man_width, s_signless, s_cdf, out);
    if (*sweep) return cmd_sweep(sw_out, sw_n, sw_seed, out);
    if (*replay) return cmd_replay(r_trace, parse_variant(r_variant), out);
    if (*tr) return cmd_train(t_config, t_out, out);
    if (*pf) return cmd_perf(p_layers, hw, p_json, out);
    if (*self) return selftest(out);
  } catch (const CorruptionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCorrupt;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

} // namespace sfpc::cli
