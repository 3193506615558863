// SPDX-License-Identifier: Apache-2.0
#include "sfpc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "sfpc/datasets.hpp"
#include "sfpc/error.hpp"
#include "sfpc/packer.hpp"
#include "sfpc/trace.hpp"

namespace sfpc::train {

namespace {

// RNG stream map: 1 init, 2 train data, 3 test data, 4 shuffle,
// 100+t per-tensor width draws.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamTrainData = 2;
constexpr std::uint64_t kStreamTestData = 3;
constexpr std::uint64_t kStreamShuffle = 4;
constexpr std::uint64_t kStreamWidthBase = 100;

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* dataset_name(DatasetKind k) {
  switch (k) {
    case DatasetKind::Blobs: return "blobs";
    case DatasetKind::Spirals: return "spirals";
    case DatasetKind::Csv: return "csv";
  }
  return "?";
}

const char* quantizer_name(Quantizer q) {
  switch (q) {
    case Quantizer::None: return "none";
    case Quantizer::Learned: return "bitlearn";
    case Quantizer::Ema: return "bitchop";
  }
  return "?";
}

struct TensorSlot {
  std::string name;
  bitlearn::TensorKind kind;
  std::size_t layer; // owning layer for weights, consuming layer for inputs
  std::size_t element_count;
  bool signless; // post-ReLU activations carry no sign bits
};

} // namespace

void TrainConfig::validate() const {
  if (samples <= 0) throw std::invalid_argument("samples must be positive");
  if (classes < 2) throw std::invalid_argument("classes must be at least 2");
  if (noise < 0) throw std::invalid_argument("noise must be non-negative");
  if (batch <= 0 || batch > samples) throw std::invalid_argument("batch must be in [1, samples]");
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (hidden.size() > 3) throw std::invalid_argument("at most three hidden layers");
  for (int h : hidden)
    if (h <= 0) throw std::invalid_argument("hidden dims must be positive");
  if (lr <= 0) throw std::invalid_argument("lr must be positive");
  if (lr_drop_factor <= 0 || lr_drop_factor > 1)
    throw std::invalid_argument("lr_drop_factor must be in (0, 1]");
  for (int e : lr_drop_epochs)
    if (e < 0 || e >= epochs) throw std::invalid_argument("lr drop epoch out of range");
  if (weight_decay < 0) throw std::invalid_argument("weight_decay must be non-negative");
  if (bit_lr <= 0) throw std::invalid_argument("bit_lr must be positive");
  if (finalize_epoch < -1) throw std::invalid_argument("finalize_epoch must be -1 or non-negative");
  if (trace_every < 0) throw std::invalid_argument("trace_every must be non-negative");
  if (dataset == DatasetKind::Csv && csv_path.empty())
    throw std::invalid_argument("csv dataset needs csv_path");
}

TrainReport run_training(const TrainConfig& cfg) {
  cfg.validate();
  const FloatFormat fmt = FloatFormat::from_kind(cfg.format);
  const int m = static_cast<int>(fmt.mantissa_bits);

  CounterRng master(cfg.seed);
  CounterRng init_rng = master.split(kStreamInit);
  CounterRng train_rng = master.split(kStreamTrainData);
  CounterRng test_rng = master.split(kStreamTestData);
  CounterRng shuffle_rng = master.split(kStreamShuffle);

  data::Dataset train_set, test_set;
  switch (cfg.dataset) {
    case DatasetKind::Blobs:
      train_set = data::gaussian_blobs(static_cast<std::size_t>(cfg.samples), cfg.classes,
                                       cfg.noise, train_rng);
      test_set = data::gaussian_blobs(static_cast<std::size_t>(std::max(cfg.samples / 4, cfg.classes)),
                                      cfg.classes, cfg.noise, test_rng);
      break;
    case DatasetKind::Spirals:
      train_set = data::two_spirals(static_cast<std::size_t>(cfg.samples), cfg.noise, train_rng);
      test_set = data::two_spirals(static_cast<std::size_t>(std::max(cfg.samples / 4, 2)),
                                   cfg.noise, test_rng);
      break;
    case DatasetKind::Csv:
      train_set = data::load_csv(cfg.csv_path);
      test_set = train_set; // no held-out split for file datasets
      break;
  }
  const auto n_train = train_set.size();
  if (static_cast<std::size_t>(cfg.batch) > n_train)
    throw std::invalid_argument("batch exceeds dataset size");

  std::vector<int> dims;
  dims.push_back(train_set.features);
  for (int h : cfg.hidden) dims.push_back(h);
  dims.push_back(train_set.classes);
  nn::Mlp model = nn::Mlp::init(dims, init_rng);
  if (model.param_count() > 100000) throw std::invalid_argument("model exceeds 1e5 parameters");
  const auto L = static_cast<std::size_t>(model.num_layers());

  // Controlled tensors: weights w0..w{L-1}, then layer inputs a0..a{L-1}.
  std::vector<TensorSlot> slots;
  for (std::size_t l = 0; l < L; ++l)
    slots.push_back({"w" + std::to_string(l), bitlearn::TensorKind::Weights, l,
                     model.layers[l].w.size(), false});
  for (std::size_t l = 0; l < L; ++l)
    slots.push_back({"a" + std::to_string(l), bitlearn::TensorKind::Activations, l,
                     static_cast<std::size_t>(cfg.batch) * model.layers[l].in, l > 0});
  const std::size_t T = slots.size();

  std::unique_ptr<bitlearn::Controller> learned;
  std::vector<CounterRng> width_rngs;
  if (cfg.quantizer == Quantizer::Learned) {
    bitlearn::Config bc;
    bc.lr = cfg.bit_lr;
    bc.schedule = cfg.gamma_schedule.empty() ? bitlearn::Config::default_schedule(cfg.epochs)
                                             : cfg.gamma_schedule;
    bc.finalize_epoch = cfg.finalize_epoch < 0 ? cfg.epochs * 4 / 5 : cfg.finalize_epoch;
    std::vector<bitlearn::BitlengthParam> params;
    for (const auto& s : slots) params.push_back({s.name, s.kind, s.element_count, 0, 0, false});
    learned = std::make_unique<bitlearn::Controller>(bc, std::move(params), fmt);
    for (std::size_t t = 0; t < T; ++t) width_rngs.push_back(master.split(kStreamWidthBase + t));
  }
  std::unique_ptr<bitchop::Controller> chop;
  if (cfg.quantizer == Quantizer::Ema)
    chop = std::make_unique<bitchop::Controller>(cfg.chop, m);

  const bool writing = !cfg.out_dir.empty();
  std::filesystem::path out_root(cfg.out_dir);
  if (writing) std::filesystem::create_directories(out_root);
  std::unique_ptr<trace::Writer> tracer;
  if (writing && cfg.trace_every > 0)
    tracer = std::make_unique<trace::Writer>((out_root / "trace.bin").string(), cfg.format);

  // Accumulators.
  std::vector<packer::Footprint> tensor_totals(T);
  std::vector<std::vector<std::uint64_t>> exp_hist(T, std::vector<std::uint64_t>(256, 0));
  std::vector<double> layer_macs(L, 0), layer_bytes_raw(L, 0), layer_bytes_comp(L, 0);
  std::ostringstream bitlengths_csv, chop_csv;
  bitlengths_csv << "epoch,tensor,n,gamma\n";
  chop_csv << "epoch,batch,width,bypassed\n";

  TrainReport report;
  double lr = cfg.lr;
  const int batches_per_epoch = static_cast<int>(n_train / static_cast<std::size_t>(cfg.batch));
  if (batches_per_epoch == 0) throw std::invalid_argument("dataset too small for one batch");
  std::vector<std::size_t> perm(n_train);
  std::iota(perm.begin(), perm.end(), 0);

  std::vector<float> bx(static_cast<std::size_t>(cfg.batch) * train_set.features);
  std::vector<int> by(static_cast<std::size_t>(cfg.batch));
  nn::Stash stash;
  double act_width_sum = 0;
  std::uint64_t act_width_count = 0;
  std::uint64_t global_batch = 0;

  auto widths_now = [&](bool deterministic) {
    nn::QuantSpec spec;
    spec.fmt = fmt;
    spec.weight_widths.resize(L);
    spec.act_widths.resize(L);
    for (std::size_t t = 0; t < T; ++t) {
      int w = m;
      if (cfg.quantizer == Quantizer::Learned) {
        const auto& p = learned->params()[t];
        w = deterministic ? static_cast<int>(std::ceil(p.n)) : 0;
        if (!deterministic) w = learned->draw_width(t, width_rngs[t]);
      } else if (cfg.quantizer == Quantizer::Ema) {
        const bool is_act = slots[t].kind == bitlearn::TensorKind::Activations;
        w = (is_act || cfg.chop.include_weights) ? chop->effective_width() : m;
      }
      if (t < L)
        spec.weight_widths[t] = w;
      else
        spec.act_widths[t - L] = w;
    }
    return spec;
  };

  auto eval_full = [&](const data::Dataset& ds) {
    const nn::QuantSpec spec = widths_now(true);
    double loss_sum = 0;
    int correct = 0;
    std::size_t done = 0;
    while (done < ds.size()) {
      const std::size_t nb = std::min<std::size_t>(cfg.batch, ds.size() - done);
      auto res = nn::evaluate(model,
                              std::span<const float>(ds.x.data() + done * ds.features,
                                                     nb * ds.features),
                              std::span<const int>(ds.y.data() + done, nb), nb, spec);
      loss_sum += res.loss * static_cast<double>(nb);
      correct += res.correct;
      done += nb;
    }
    return std::pair<double, double>(loss_sum / static_cast<double>(ds.size()),
                                     static_cast<double>(correct) / static_cast<double>(ds.size()));
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (std::find(cfg.lr_drop_epochs.begin(), cfg.lr_drop_epochs.end(), epoch) !=
        cfg.lr_drop_epochs.end()) {
      lr *= cfg.lr_drop_factor;
      if (chop) chop->notify_lr_change();
    }
    if (learned) learned->maybe_finalize(epoch);
    std::shuffle(perm.begin(), perm.end(), shuffle_rng);

    double epoch_loss = 0;
    int epoch_correct = 0;
    double epoch_width_sum = 0;
    packer::Footprint epoch_fp;

    for (int b = 0; b < batches_per_epoch; ++b, ++global_batch) {
      for (int i = 0; i < cfg.batch; ++i) {
        const std::size_t src = perm[static_cast<std::size_t>(b) * cfg.batch + i];
        std::copy_n(train_set.x.data() + src * train_set.features, train_set.features,
                    bx.data() + static_cast<std::size_t>(i) * train_set.features);
        by[static_cast<std::size_t>(i)] = train_set.y[src];
      }

      const nn::QuantSpec spec = widths_now(false);
      const auto res = nn::forward_backward(model, bx, by, static_cast<std::size_t>(cfg.batch),
                                            spec, stash);
      epoch_loss += res.loss;
      epoch_correct += res.correct;

      if (learned)
        for (std::size_t t = 0; t < T; ++t) {
          const bool is_w = t < L;
          const auto& raw = is_w ? stash.w_pre[t] : stash.a_pre[t - L];
          const auto& grad = is_w ? stash.w_grad[t] : stash.a_grad[t - L];
          learned->update(t, raw, grad, epoch);
        }
      if (chop) {
        const int used = chop->effective_width();
        const bool was_bypassed = chop->bypassed();
        chop->observe(res.loss);
        chop_csv << epoch << ',' << b << ',' << used << ',' << (was_bypassed ? 1 : 0) << '\n';
      }
      nn::apply_sgd(model, stash, lr, cfg.weight_decay);

      for (std::size_t t = 0; t < T; ++t) {
        const bool is_w = t < L;
        const std::size_t l = slots[t].layer;
        const auto& q = is_w ? stash.w_q[t] : stash.a_q[t - L];
        const int width = is_w ? spec.weight_widths[t] : spec.act_widths[t - L];
        packer::PackConfig pc;
        pc.format = fmt;
        pc.variant = cfg.variant;
        pc.man_width = width;
        pc.signless = slots[t].signless;
        const auto fp = packer::measure(q, pc);
        auto& tot = tensor_totals[t];
        tot.exponent_bits += fp.exponent_bits;
        tot.sign_bits += fp.sign_bits;
        tot.mantissa_bits += fp.mantissa_bits;
        tot.meta_bits += fp.meta_bits;
        tot.original_bits += fp.original_bits;
        epoch_fp.exponent_bits += fp.exponent_bits;
        epoch_fp.sign_bits += fp.sign_bits;
        epoch_fp.mantissa_bits += fp.mantissa_bits;
        epoch_fp.meta_bits += fp.meta_bits;
        epoch_fp.original_bits += fp.original_bits;
        epoch_width_sum += width;
        if (!is_w) {
          act_width_sum += width;
          ++act_width_count;
        }
        const double access = is_w ? 3.0 : 2.0; // fwd+bwd+update reads/writes vs stash+reload
        layer_bytes_raw[l] += access * static_cast<double>(fp.original_bits) / 8.0;
        layer_bytes_comp[l] += access * static_cast<double>(fp.total_bits()) / 8.0;
        for (std::uint32_t v : q) ++exp_hist[t][decompose(v, fmt).exponent];
        if (tracer && global_batch % static_cast<std::uint64_t>(cfg.trace_every) == 0) {
          trace::Record rec;
          rec.epoch = static_cast<std::uint32_t>(epoch);
          rec.batch = static_cast<std::uint32_t>(b);
          rec.tensor = static_cast<std::uint16_t>(t);
          rec.kind = static_cast<std::uint8_t>(slots[t].kind);
          rec.width = static_cast<std::uint8_t>(width);
          rec.flags = slots[t].signless ? trace::kFlagSignless : 0;
          rec.raw = q;
          tracer->add(rec);
        }
      }
      for (std::size_t l = 0; l < L; ++l)
        layer_macs[l] += 3.0 * cfg.batch * model.layers[l].in * model.layers[l].out;
    }

    EpochRow row;
    row.epoch = epoch;
    row.loss = epoch_loss / batches_per_epoch;
    row.train_acc = static_cast<double>(epoch_correct) /
                    (static_cast<double>(batches_per_epoch) * cfg.batch);
    row.test_acc = eval_full(test_set).second;
    row.lr = lr;
    row.gamma = learned ? learned->gamma(epoch) : 0.0;
    row.mean_width = epoch_width_sum / (static_cast<double>(batches_per_epoch) * T);
    row.footprint_bits = epoch_fp.total_bits();
    row.original_bits = epoch_fp.original_bits;
    report.epochs.push_back(row);

    if (learned)
      for (std::size_t t = 0; t < T; ++t)
        bitlengths_csv << epoch << ',' << slots[t].name << ',' << fmt_g(learned->params()[t].n)
                       << ',' << fmt_g(learned->gamma(epoch)) << '\n';
  }

  if (tracer) tracer->close();

  // Final metrics with end-of-run deterministic widths.
  const nn::QuantSpec final_spec = widths_now(true);
  report.final_train_acc = eval_full(train_set).second;
  report.final_test_acc = eval_full(test_set).second;
  report.final_params = model.flat_weights();
  report.mean_activation_width =
      act_width_count ? act_width_sum / static_cast<double>(act_width_count) : m;

  double weighted = 0;
  const std::size_t total_elems =
      std::accumulate(slots.begin(), slots.end(), std::size_t{0},
                      [](std::size_t acc, const TensorSlot& s) { return acc + s.element_count; });
  for (std::size_t t = 0; t < T; ++t) {
    TensorReport tr;
    tr.name = slots[t].name;
    tr.kind = slots[t].kind;
    tr.element_count = slots[t].element_count;
    tr.lambda = learned ? learned->params()[t].lambda
                        : static_cast<double>(slots[t].element_count) / total_elems;
    tr.final_n = learned ? learned->params()[t].n
                         : (t < L ? final_spec.weight_widths[t] : final_spec.act_widths[t - L]);
    tr.final_width = t < L ? final_spec.weight_widths[t] : final_spec.act_widths[t - L];
    tr.footprint_bits = tensor_totals[t].total_bits();
    tr.original_bits = tensor_totals[t].original_bits;
    report.footprint_bits += tr.footprint_bits;
    report.original_bits += tr.original_bits;
    weighted += tr.lambda * tr.final_width;
    report.tensors.push_back(std::move(tr));
  }
  report.weighted_mean_bitlength = weighted;

  for (std::size_t l = 0; l < L; ++l)
    report.traffic.push_back({"layer" + std::to_string(l), layer_macs[l], layer_bytes_raw[l],
                              layer_bytes_comp[l]});

  if (writing) {
    {
      std::ofstream out(out_root / "metrics.csv");
      out << "epoch,loss,train_acc,test_acc,lr,gamma,mean_width,footprint_bits,original_bits\n";
      for (const auto& r : report.epochs)
        out << r.epoch << ',' << fmt_g(r.loss) << ',' << fmt_g(r.train_acc) << ','
            << fmt_g(r.test_acc) << ',' << fmt_g(r.lr) << ',' << fmt_g(r.gamma) << ','
            << fmt_g(r.mean_width) << ',' << r.footprint_bits << ',' << r.original_bits << '\n';
    }
    {
      std::ofstream out(out_root / "footprint.csv");
      out << "tensor,kind,elements,lambda,final_width,exponent_bits,sign_bits,mantissa_bits,"
             "meta_bits,total_bits,original_bits\n";
      for (std::size_t t = 0; t < T; ++t) {
        const auto& tr = report.tensors[t];
        const auto& tot = tensor_totals[t];
        out << tr.name << ',' << (tr.kind == bitlearn::TensorKind::Weights ? "weights" : "activations")
            << ',' << tr.element_count << ',' << fmt_g(tr.lambda) << ',' << tr.final_width << ','
            << tot.exponent_bits << ',' << tot.sign_bits << ',' << tot.mantissa_bits << ','
            << tot.meta_bits << ',' << tot.total_bits() << ',' << tot.original_bits << '\n';
      }
    }
    if (learned) std::ofstream(out_root / "bitlengths.csv") << bitlengths_csv.str();
    if (chop) std::ofstream(out_root / "chop_widths.csv") << chop_csv.str();
    {
      std::ofstream out(out_root / "perf_layers.csv");
      out << "layer,macs,bytes_raw,bytes_compressed\n";
      for (const auto& row : report.traffic)
        out << row.name << ',' << fmt_g(row.macs) << ',' << fmt_g(row.bytes_raw) << ','
            << fmt_g(row.bytes_compressed) << '\n';
    }
    {
      std::ofstream out(out_root / "exp_hist.csv");
      out << "tensor,exponent,count\n";
      for (std::size_t t = 0; t < T; ++t)
        for (int e = 0; e < 256; ++e)
          if (exp_hist[t][static_cast<std::size_t>(e)])
            out << slots[t].name << ',' << e << ',' << exp_hist[t][static_cast<std::size_t>(e)]
                << '\n';
    }
    {
      nlohmann::json j;
      j["config"] = {{"dataset", dataset_name(cfg.dataset)},
                     {"samples", cfg.samples},
                     {"classes", cfg.classes},
                     {"noise", cfg.noise},
                     {"batch", cfg.batch},
                     {"epochs", cfg.epochs},
                     {"hidden", cfg.hidden},
                     {"seed", cfg.seed},
                     {"lr", cfg.lr},
                     {"weight_decay", cfg.weight_decay},
                     {"format", cfg.format == FloatKind::BF16 ? "bf16" : "fp32"},
                     {"quantizer", quantizer_name(cfg.quantizer)},
                     {"variant", cfg.variant == gecko::Variant::FixedBias ? "fixed" : "delta"}};
      j["final_train_acc"] = report.final_train_acc;
      j["final_test_acc"] = report.final_test_acc;
      j["weighted_mean_bitlength"] = report.weighted_mean_bitlength;
      j["mean_activation_width"] = report.mean_activation_width;
      j["footprint_bits"] = report.footprint_bits;
      j["original_bits"] = report.original_bits;
      j["footprint_ratio"] = report.original_bits
                                 ? static_cast<double>(report.footprint_bits) / report.original_bits
                                 : 0.0;
      auto& jt = j["tensors"];
      for (const auto& tr : report.tensors)
        jt.push_back({{"name", tr.name},
                      {"kind", tr.kind == bitlearn::TensorKind::Weights ? "weights" : "activations"},
                      {"elements", tr.element_count},
                      {"lambda", tr.lambda},
                      {"final_n", tr.final_n},
                      {"final_width", tr.final_width},
                      {"footprint_bits", tr.footprint_bits},
                      {"original_bits", tr.original_bits}});
      std::ofstream(out_root / "report.json") << j.dump(2) << '\n';
    }
  }
  return report;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + " has empty key");
    if (!kv.emplace(key, value).second)
      throw std::invalid_argument("duplicate config key: " + key);
  }
  return kv;
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(std::stoi(cell));
  }
  return out;
}

std::vector<bitlearn::GammaPoint> parse_gamma_schedule(const std::string& s) {
  std::vector<bitlearn::GammaPoint> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto colon = cell.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("gamma_schedule entries are epoch:value");
    out.push_back({std::stoi(cell.substr(0, colon)), std::stod(cell.substr(colon + 1))});
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected a boolean, got: " + s);
}

} // namespace

TrainConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  TrainConfig cfg;
  std::map<std::string, std::string> rest = kv;
  auto take = [&rest](const char* key) {
    auto it = rest.find(key);
    if (it == rest.end()) return std::optional<std::string>();
    auto v = std::optional<std::string>(it->second);
    rest.erase(it);
    return v;
  };
  try {
    if (auto v = take("dataset")) {
      if (*v == "blobs") cfg.dataset = DatasetKind::Blobs;
      else if (*v == "spirals") cfg.dataset = DatasetKind::Spirals;
      else if (*v == "csv") cfg.dataset = DatasetKind::Csv;
      else throw std::invalid_argument("unknown dataset: " + *v);
    }
    if (auto v = take("csv_path")) cfg.csv_path = *v;
    if (auto v = take("samples")) cfg.samples = std::stoi(*v);
    if (auto v = take("classes")) cfg.classes = std::stoi(*v);
    if (auto v = take("noise")) cfg.noise = std::stod(*v);
    if (auto v = take("batch")) cfg.batch = std::stoi(*v);
    if (auto v = take("epochs")) cfg.epochs = std::stoi(*v);
    if (auto v = take("hidden")) cfg.hidden = parse_int_list(*v);
    if (auto v = take("seed")) cfg.seed = std::stoull(*v);
    if (auto v = take("lr")) cfg.lr = std::stod(*v);
    if (auto v = take("lr_drop_epochs")) cfg.lr_drop_epochs = parse_int_list(*v);
    if (auto v = take("lr_drop_factor")) cfg.lr_drop_factor = std::stod(*v);
    if (auto v = take("weight_decay")) cfg.weight_decay = std::stod(*v);
    if (auto v = take("format")) {
      if (*v == "fp32") cfg.format = FloatKind::FP32;
      else if (*v == "bf16") cfg.format = FloatKind::BF16;
      else throw std::invalid_argument("unknown format: " + *v);
    }
    if (auto v = take("quantizer")) {
      if (*v == "none") cfg.quantizer = Quantizer::None;
      else if (*v == "bitlearn") cfg.quantizer = Quantizer::Learned;
      else if (*v == "bitchop") cfg.quantizer = Quantizer::Ema;
      else throw std::invalid_argument("unknown quantizer: " + *v);
    }
    if (auto v = take("variant")) {
      if (*v == "delta") cfg.variant = gecko::Variant::DeltaBase;
      else if (*v == "fixed") cfg.variant = gecko::Variant::FixedBias;
      else throw std::invalid_argument("unknown variant: " + *v);
    }
    if (auto v = take("bit_lr")) cfg.bit_lr = std::stod(*v);
    if (auto v = take("gamma_schedule")) cfg.gamma_schedule = parse_gamma_schedule(*v);
    if (auto v = take("finalize_epoch")) cfg.finalize_epoch = std::stoi(*v);
    if (auto v = take("chop_alpha")) cfg.chop.alpha = std::stod(*v);
    if (auto v = take("chop_period")) cfg.chop.period = std::stoi(*v);
    if (auto v = take("chop_cooldown")) cfg.chop.cooldown = std::stoi(*v);
    if (auto v = take("chop_weights")) cfg.chop.include_weights = parse_bool(*v);
    if (auto v = take("out_dir")) cfg.out_dir = *v;
    if (auto v = take("trace_every")) cfg.trace_every = std::stoi(*v);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("config value out of range");
  }
  if (!rest.empty()) throw std::invalid_argument("unknown config key: " + rest.begin()->first);
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_kv(parse_kv(ss.str()));
}

} // namespace sfpc::train
