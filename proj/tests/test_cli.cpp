// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sfpc/cli.hpp"
#include "sfpc/container.hpp"
#include "sfpc/float_format.hpp"
#include "sfpc/rng.hpp"

using namespace sfpc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sfpc_cli_" + std::to_string(CounterRng(::getpid(), 99).next_u64() % 1000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("compress and decompress round trip at full width") {
  TempDir dir;
  CounterRng rng(42, 5);
  std::vector<std::uint32_t> raw(777);
  for (auto& v : raw) {
    const auto fmt = FloatFormat::fp32();
    FloatTriple t{static_cast<std::uint8_t>(rng.next_u64() & 1),
                  static_cast<std::uint8_t>(rng.next_u64() % 255),
                  static_cast<std::uint32_t>(rng.next_u64()) & fmt.mantissa_mask()};
    v = recompose(t, fmt);
  }
  cli::write_raw_values(dir.file("in.f32"), raw, FloatKind::FP32);

  auto c = run_cli({"compress", "--input", dir.file("in.f32"), "--output",
                    dir.file("t.sfpc"), "--shape", "7,111"});
  CHECK(c.code == cli::kExitOk);
  CHECK(c.err.find("ratio=") != std::string::npos);
  CHECK(c.err.find("js_bits=") != std::string::npos);

  auto d = run_cli({"decompress", "--input", dir.file("t.sfpc"), "--output",
                    dir.file("out.f32")});
  CHECK(d.code == cli::kExitOk);
  CHECK(cli::read_raw_values(dir.file("out.f32"), FloatKind::FP32) == raw);

  const auto parsed = read_container_file(dir.file("t.sfpc"));
  REQUIRE(parsed.header.dims.size() == 2);
  CHECK(parsed.header.dims[0] == 7);
  CHECK(parsed.header.dims[1] == 111);
}

TEST_CASE("bf16 round trip with fixed-bias variant and signless mode") {
  TempDir dir;
  CounterRng rng(43, 5);
  const auto fmt = FloatFormat::bf16();
  std::vector<std::uint32_t> raw(129);
  for (auto& v : raw)
    v = recompose({0, static_cast<std::uint8_t>(rng.next_u64() % 255),
                   static_cast<std::uint32_t>(rng.next_u64()) & fmt.mantissa_mask()},
                  fmt);
  cli::write_raw_values(dir.file("in.bf16"), raw, FloatKind::BF16);

  auto c = run_cli({"compress", "--input", dir.file("in.bf16"), "--output",
                    dir.file("t.sfpc"), "--format", "bf16", "--variant", "fixed",
                    "--signless"});
  CHECK(c.code == cli::kExitOk);
  auto d = run_cli({"decompress", "--input", dir.file("t.sfpc"), "--output",
                    dir.file("out.bf16")});
  CHECK(d.code == cli::kExitOk);
  CHECK(cli::read_raw_values(dir.file("out.bf16"), FloatKind::BF16) == raw);
  CHECK(fs::file_size(dir.file("out.bf16")) == raw.size() * 2);
}

TEST_CASE("recompressing a decompressed tensor reproduces the container") {
  TempDir dir;
  CounterRng rng(44, 5);
  std::vector<std::uint32_t> raw(300);
  for (auto& v : raw) {
    const auto fmt = FloatFormat::fp32();
    v = recompose({static_cast<std::uint8_t>(rng.next_u64() & 1),
                   static_cast<std::uint8_t>(100 + rng.next_u64() % 56),
                   static_cast<std::uint32_t>(rng.next_u64()) & fmt.mantissa_mask()},
                  fmt);
  }
  cli::write_raw_values(dir.file("in.f32"), raw, FloatKind::FP32);

  run_cli({"compress", "--input", dir.file("in.f32"), "--output", dir.file("a.sfpc"),
           "--man-width", "9"});
  run_cli({"decompress", "--input", dir.file("a.sfpc"), "--output", dir.file("mid.f32")});
  run_cli({"compress", "--input", dir.file("mid.f32"), "--output", dir.file("b.sfpc"),
           "--man-width", "9"});
  CHECK(slurp(dir.file("a.sfpc")) == slurp(dir.file("b.sfpc")));
}

TEST_CASE("stats reports the zero-suppression size for an all-zero tensor") {
  TempDir dir;
  cli::write_raw_values(dir.file("z.bf16"), std::vector<std::uint32_t>(64, 0),
                        FloatKind::BF16);
  auto r = run_cli({"stats", "--input", dir.file("z.bf16"), "--format", "bf16"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("js_bits=64 ") != std::string::npos);
  CHECK(r.out.find("values=64") != std::string::npos);
}

TEST_CASE("stats writes the requested width distribution file") {
  TempDir dir;
  CounterRng rng(45, 5);
  std::vector<std::uint32_t> raw(256);
  for (auto& v : raw)
    v = recompose({0, static_cast<std::uint8_t>(120 + rng.next_u64() % 8), 0},
                  FloatFormat::fp32());
  cli::write_raw_values(dir.file("in.f32"), raw, FloatKind::FP32);
  auto r = run_cli({"stats", "--input", dir.file("in.f32"), "--cdf", dir.file("cdf.csv")});
  CHECK(r.code == cli::kExitOk);
  const auto csv = slurp(dir.file("cdf.csv"));
  CHECK(csv.rfind("width,fraction", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10); // header + widths 0..8
}

TEST_CASE("sweep prints one row per reference distribution") {
  auto r = run_cli({"sweep", "--count", "4096", "--seed", "3"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.rfind("distribution,delta_ratio,fixed_ratio", 0) == 0);
  CHECK(r.out.find("uniform,") != std::string::npos);
  CHECK(r.out.find("gauss_sigma8,") != std::string::npos);
}

TEST_CASE("train runs a config file and replay agrees with its footprint") {
  TempDir dir;
  {
    std::ofstream cfg(dir.file("run.cfg"));
    cfg << "dataset = blobs\nsamples = 128\nclasses = 3\nbatch = 32\nepochs = 2\n"
        << "hidden = 8\nseed = 9\nlr = 0.1\nquantizer = bitchop\ntrace_every = 1\n";
  }
  auto t = run_cli({"train", "--config", dir.file("run.cfg"), "--out", dir.file("out")});
  CHECK(t.code == cli::kExitOk);
  CHECK(t.out.find("final_test_acc=") != std::string::npos);
  CHECK(fs::exists(dir.file("out") + "/metrics.csv"));
  CHECK(fs::exists(dir.file("out") + "/report.json"));
  CHECK(fs::exists(dir.file("out") + "/trace.bin"));

  auto rp = run_cli({"replay", "--trace", dir.file("out") + "/trace.bin"});
  CHECK(rp.code == cli::kExitOk);
  // The recomputed total must echo the footprint the train command printed.
  const auto key = t.out.substr(t.out.find("footprint_bits="));
  const auto bits = key.substr(0, key.find(' '));
  CHECK(rp.out.find(" " + bits.substr(std::string("footprint_").size())) != std::string::npos);
}

TEST_CASE("compress can take its width from a training log") {
  TempDir dir;
  {
    std::ofstream log(dir.file("bitlengths.csv"));
    log << "epoch,tensor,n,gamma\n0,w0,13.7,0.1\n0,a0,9.9,0.1\n1,w0,6.2,0.1\n1,a0,4.1,0.1\n";
  }
  cli::write_raw_values(dir.file("in.f32"),
                        std::vector<std::uint32_t>{0x3F800000u, 0x40000000u},
                        FloatKind::FP32);
  auto r = run_cli({"compress", "--input", dir.file("in.f32"), "--output",
                    dir.file("t.sfpc"), "--width-log", dir.file("bitlengths.csv"),
                    "--tensor", "w0"});
  CHECK(r.code == cli::kExitOk);
  CHECK(read_container_file(dir.file("t.sfpc")).header.man_width == 7); // ceil(6.2)

  auto missing = run_cli({"compress", "--input", dir.file("in.f32"), "--output",
                          dir.file("u.sfpc"), "--width-log", dir.file("bitlengths.csv"),
                          "--tensor", "nope"});
  CHECK(missing.code == cli::kExitUsage);

  auto both = run_cli({"compress", "--input", dir.file("in.f32"), "--output",
                       dir.file("v.sfpc"), "--width-log", dir.file("bitlengths.csv"),
                       "--tensor", "w0", "--man-width", "3"});
  CHECK(both.code == cli::kExitUsage);
}

TEST_CASE("perf prints the run summary and rejects traffic gaps") {
  TempDir dir;
  {
    std::ofstream csv(dir.file("layers.csv"));
    csv << "layer,macs,bytes_raw,bytes_compressed\nfc1,1e9,1e8,5e7\nfc2,2e9,2e8,1e8\n";
  }
  auto r = run_cli({"perf", "--layers", dir.file("layers.csv"), "--json",
                    dir.file("perf.json")});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("speedup=") != std::string::npos);
  CHECK(r.out.find("layer=fc1") != std::string::npos);
  CHECK(slurp(dir.file("perf.json")).find("\"speedup\"") != std::string::npos);

  {
    std::ofstream csv(dir.file("gap.csv"));
    csv << "layer,macs,bytes_raw,bytes_compressed\nfc1,1e9,1e8,\n";
  }
  auto g = run_cli({"perf", "--layers", dir.file("gap.csv")});
  CHECK(g.code == cli::kExitUsage);
  CHECK(g.err.find("fc1") != std::string::npos);
}

TEST_CASE("perf runs the shipped synthetic layer table") {
  auto r = run_cli({"perf", "--layers", std::string(SFPC_DATA_DIR) + "/roofline_layers.csv"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("bound_base=memory bound_comp=compute") != std::string::npos);
  CHECK(r.out.find("flipped_fraction=0.166667") != std::string::npos);
}

TEST_CASE("failure exit codes distinguish usage, corruption, and numerics") {
  TempDir dir;

  auto usage = run_cli({"frobnicate"});
  CHECK(usage.code == cli::kExitUsage);

  auto missing = run_cli({"compress", "--input", dir.file("absent.f32"), "--output",
                          dir.file("x.sfpc")});
  CHECK(missing.code == cli::kExitUsage);

  {
    std::ofstream bad(dir.file("bad.sfpc"), std::ios::binary);
    bad << "SFPCnotreally";
  }
  auto corrupt = run_cli({"decompress", "--input", dir.file("bad.sfpc"), "--output",
                          dir.file("y.f32")});
  CHECK(corrupt.code == cli::kExitCorrupt);

  cli::write_raw_values(dir.file("nan.f32"), std::vector<std::uint32_t>(4, 0x7FC00000u),
                        FloatKind::FP32);
  auto numeric = run_cli({"compress", "--input", dir.file("nan.f32"), "--output",
                          dir.file("n.sfpc")});
  CHECK(numeric.code == cli::kExitNumeric);
  auto bypass = run_cli({"compress", "--input", dir.file("nan.f32"), "--output",
                         dir.file("n.sfpc"), "--bypass-nonfinite"});
  CHECK(bypass.code == cli::kExitOk);

  auto help = run_cli({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("compress") != std::string::npos);
}

TEST_CASE("odd-sized raw files are rejected") {
  TempDir dir;
  {
    std::ofstream f(dir.file("odd.f32"), std::ios::binary);
    f << "abc"; // 3 bytes, not a multiple of 4
  }
  auto r = run_cli({"stats", "--input", dir.file("odd.f32")});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("multiple") != std::string::npos);
}

TEST_CASE("selftest passes and reports each invariant") {
  std::ostringstream out;
  CHECK(cli::selftest(out) == cli::kExitOk);
  const auto text = out.str();
  CHECK(text.find("FAIL") == std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 15);
  CHECK(text.find("all checks passed") != std::string::npos);
}

} // TEST_SUITE
