#include "mubinn/cli.h"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mubinn/binarized_lstm.h"
#include "mubinn/delay_model.h"
#include "mubinn/model_io.h"
#include "mubinn/synthetic_task.h"

namespace mubinn {
namespace {

using Json = nlohmann::ordered_json;

struct GlobalOptions {
  std::uint64_t seed = 1;
  bool quiet = false;
  bool json = false;
};

// Text form: one "key: value" line per scalar; arrays of objects become a
// header row of column names followed by one whitespace-separated row each.
void print_report(const Json& report, const GlobalOptions& g,
                  std::ostream& out) {
  if (g.json) {
    out << report.dump() << "\n";
    return;
  }
  for (const auto& [key, value] : report.items()) {
    if (value.is_array() && !value.empty() && value.front().is_object()) {
      out << key << ":\n";
      std::string header;
      for (const auto& [col, unused] : value.front().items()) {
        header += (header.empty() ? "" : " ") + col;
      }
      out << "  " << header << "\n";
      for (const Json& row : value) {
        std::string line;
        for (const auto& [col, cell] : row.items()) {
          line += (line.empty() ? "" : " ") +
                  (cell.is_string() ? cell.get<std::string>() : cell.dump());
        }
        out << "  " << line << "\n";
      }
    } else if (value.is_string()) {
      out << key << ": " << value.get<std::string>() << "\n";
    } else {
      out << key << ": " << value.dump() << "\n";
    }
  }
}

void warn(const GlobalOptions& g, std::ostream& err, const std::string& msg) {
  if (!g.quiet) err << "warning: " << msg << "\n";
}

std::string mode_label(const AnyModel& m) {
  if (std::holds_alternative<FpModel>(m)) return "fp";
  return std::string(mode_name(std::get<QuantizedModel>(m).config().mode));
}

std::size_t file_size(const std::string& path) {
  return static_cast<std::size_t>(std::filesystem::file_size(path));
}

// Mean |a - b| over all gate pre-activations, both models fed `seq`.
double preact_gap(const AnyModel& model, const FpModel& ref,
                  const Sequence& seq) {
  if (const auto* q = std::get_if<QuantizedModel>(&model)) {
    return mean_preactivation_error(ref, *q, seq);
  }
  const FpModel& fp = std::get<FpModel>(model);
  std::vector<GateTrace> a;
  std::vector<GateTrace> b;
  lstm_forward(fp.lstm, seq, LSTMState::zeros(fp.lstm.hidden_size), &a);
  lstm_forward(ref.lstm, seq, LSTMState::zeros(ref.lstm.hidden_size), &b);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t j = 0; j < a[t].preact[k].size(); ++j) {
        acc += std::fabs(a[t].preact[k][j] - b[t].preact[k][j]);
        ++n;
      }
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

Sequence random_sequence(SeededRng& rng, std::size_t t, std::size_t f) {
  Sequence seq;
  seq.reserve(t);
  for (std::size_t i = 0; i < t; ++i) seq.push_back(rng_uniform(rng, -1.0, 1.0, f));
  return seq;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Multi-level binarized LSTM inference engine", "mubinn"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random stream")
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress warnings");
  app.add_flag("--json", g.json, "Emit the report as one JSON object");

  // make-toy
  std::string toy_out;
  std::string toy_kind = "integrator";
  std::size_t toy_features = 8;
  std::size_t toy_hidden = 4;
  std::size_t toy_classes = 2;
  double toy_scale = 0.5;
  auto* make_toy = app.add_subcommand("make-toy", "Write a full-precision model");
  make_toy->add_option("--out", toy_out, "Output model path")->required();
  make_toy->add_option("--kind", toy_kind, "integrator or random")
      ->check(CLI::IsMember({"integrator", "random"}))
      ->capture_default_str();
  make_toy->add_option("--features", toy_features)->capture_default_str()
      ->check(CLI::PositiveNumber);
  make_toy->add_option("--hidden", toy_hidden)->capture_default_str()
      ->check(CLI::PositiveNumber);
  make_toy->add_option("--classes", toy_classes, "Random models only")
      ->capture_default_str()->check(CLI::PositiveNumber);
  make_toy->add_option("--scale", toy_scale, "Random weight range")
      ->capture_default_str()->check(CLI::PositiveNumber);

  // gen-data
  std::string data_out;
  SignMeanTask task;
  auto* gen_data = app.add_subcommand("gen-data", "Write a sign-mean dataset");
  gen_data->add_option("--out", data_out, "Output CSV path")->required();
  gen_data->add_option("--timesteps", task.timesteps)->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_data->add_option("--features", task.features)->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_data->add_option("--samples", task.samples)->capture_default_str();
  gen_data->add_option("--noise", task.noise)->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  gen_data->add_option("--margin", task.margin)->capture_default_str()
      ->check(CLI::PositiveNumber);

  // quantize
  std::string q_in;
  std::string q_out;
  std::string q_mode = "mubinn2";
  std::size_t q_act = 1;
  std::size_t q_weight = 1;
  bool q_pow2 = false;
  bool q_no_rec = false;
  bool q_strict = false;
  std::string q_bias = "fp";
  auto* quantize = app.add_subcommand("quantize", "Quantize a full-precision model");
  quantize->add_option("--in", q_in, "Full-precision model")->required();
  quantize->add_option("--out", q_out, "Quantized model path")->required();
  quantize->add_option("--mode", q_mode, "b_lstm, mubinn1 or mubinn2")
      ->check(CLI::IsMember({"b_lstm", "mubinn1", "mubinn2"}))
      ->capture_default_str();
  quantize->add_option("--act-levels", q_act)->capture_default_str()
      ->check(CLI::Range(1, 255));
  quantize->add_option("--weight-levels", q_weight)->capture_default_str()
      ->check(CLI::Range(1, 255));
  quantize->add_flag("--pow2", q_pow2, "Round scales to powers of two");
  quantize->add_flag("--no-binarize-recurrent", q_no_rec,
                     "Keep W_h products full precision (mubinn1)");
  quantize->add_option("--bias", q_bias, "mlb or fp")
      ->check(CLI::IsMember({"mlb", "fp"}))
      ->capture_default_str();
  quantize->add_flag("--strict", q_strict, "Treat config repairs as errors");

  // infer
  std::string infer_model;
  std::string infer_data;
  auto* infer = app.add_subcommand("infer", "Print one predicted label per row");
  infer->add_option("--model", infer_model)->required();
  infer->add_option("--data", infer_data)->required();

  // eval
  std::string eval_model;
  std::string eval_ref;
  std::string eval_data;
  std::size_t workers = 1;
  auto* eval = app.add_subcommand("eval", "Accuracy of a model on a dataset");
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--ref", eval_ref, "Full-precision reference model");
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--workers", workers)->capture_default_str()
      ->check(CLI::PositiveNumber);

  // bench
  std::string bench_model;
  std::size_t bench_t = 64;
  std::size_t bench_f = 8;
  std::size_t bench_hidden = 4;
  std::size_t bench_reps = 1;
  bool paper_shape = false;
  std::string bench_mode = "mubinn2";
  std::size_t bench_act = 3;
  std::size_t bench_weight = 3;
  auto* bench = app.add_subcommand("bench", "Time one forward pass");
  bench->add_option("--model", bench_model,
                    "Model file; a seeded random model is used when omitted");
  bench->add_option("--timesteps", bench_t)->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--features", bench_f)->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--hidden", bench_hidden, "Random model only")
      ->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--reps", bench_reps)->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_flag("--paper-shape", paper_shape,
                  "T=1300, F=32, hidden=100");
  bench->add_option("--mode", bench_mode, "Random model: fp, b_lstm, mubinn1, mubinn2")
      ->check(CLI::IsMember({"fp", "b_lstm", "mubinn1", "mubinn2"}))
      ->capture_default_str();
  bench->add_option("--act-levels", bench_act)->capture_default_str()
      ->check(CLI::Range(1, 255));
  bench->add_option("--weight-levels", bench_weight)->capture_default_str()
      ->check(CLI::Range(1, 255));

  // delay
  std::string delay_a = "3";
  std::string delay_w = "3";
  std::string calib;
  bool show_table = false;
  auto* delay = app.add_subcommand("delay", "Cell delay: reference table and model");
  delay->add_option("--act-levels", delay_a, "1..255 or fp")->capture_default_str();
  delay->add_option("--weight-levels", delay_w, "1..255 or fp")->capture_default_str();
  delay->add_option("--calib", calib, "key = value calibration file");
  delay->add_flag("--table", show_table, "Print the bundled reference table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Json report;
    if (*make_toy) {
      SeededRng rng(g.seed);
      FpModel m = toy_kind == "integrator"
                      ? build_integrator_model(toy_features, toy_hidden)
                      : build_random_model(rng, toy_features, toy_hidden,
                                           toy_classes, toy_scale);
      save_model(m, toy_out);
      report["model"] = toy_out;
      report["kind"] = toy_kind;
      report["input"] = m.lstm.input_size;
      report["hidden"] = m.lstm.hidden_size;
      report["classes"] = m.head.num_classes();
      report["bytes"] = file_size(toy_out);
    } else if (*gen_data) {
      task.seed = g.seed;
      const Dataset d = gen_dataset(task);
      save_dataset(d, data_out);
      report["data"] = data_out;
      report["samples"] = d.samples.size();
      report["timesteps"] = d.timesteps;
      report["features"] = d.features;
    } else if (*quantize) {
      QuantConfig cfg;
      cfg.mode = parse_mode(q_mode);
      cfg.act_levels = q_act;
      cfg.weight_levels = q_weight;
      cfg.pow2_scales = q_pow2;
      cfg.binarize_recurrent = !q_no_rec;
      cfg.bias_policy =
          q_bias == "mlb" ? BiasPolicy::kMlbStored : BiasPolicy::kFullPrecision;
      std::vector<std::string> warnings;
      cfg = resolve_config(cfg, q_strict, &warnings);
      for (const std::string& w : warnings) warn(g, err, w);
      const FpModel fp = load_fp_model(q_in);
      const QuantizedModel q = quantize_model(fp, cfg);
      save_model(q, q_out);
      report["model"] = q_out;
      report["mode"] = std::string(mode_name(cfg.mode));
      report["act_levels"] = cfg.act_levels;
      report["weight_levels"] = cfg.weight_levels;
      report["pow2"] = cfg.pow2_scales;
      report["bytes"] = file_size(q_out);
      Json rows = Json::array();
      for (const TensorError& e : reconstruction_report(fp, q)) {
        rows.push_back({{"tensor", e.name},
                        {"l2_error", e.l2_error},
                        {"relative", e.relative}});
      }
      report["reconstruction"] = rows;
    } else if (*infer) {
      const AnyModel m = load_model(infer_model);
      const Dataset d = load_dataset(infer_data);
      check_compatible(input_size(m), d);
      const std::vector<std::size_t> labels =
          predict_all(AnyModelClassifier{m}, d, 1);
      if (g.json) {
        report["labels"] = labels;
      } else {
        for (std::size_t l : labels) out << l << "\n";
        return 0;
      }
    } else if (*eval) {
      const AnyModel m = load_model(eval_model);
      const Dataset d = load_dataset(eval_data, num_classes(m));
      check_compatible(input_size(m), d);
      const double acc = evaluate(AnyModelClassifier{m}, d, workers);
      report["model"] = eval_model;
      report["mode"] = mode_label(m);
      report["samples"] = d.samples.size();
      report["accuracy"] = acc;
      if (!eval_ref.empty()) {
        const FpModel ref = load_fp_model(eval_ref);
        if (ref.lstm.input_size != input_size(m) ||
            ref.lstm.hidden_size != hidden_size(m)) {
          throw std::invalid_argument("reference model shape differs from model");
        }
        const double ref_acc = evaluate(ref, d, workers);
        double gap = 0.0;
        for (const Sample& s : d.samples) gap += preact_gap(m, ref, s.seq);
        report["ref_accuracy"] = ref_acc;
        report["accuracy_gap"] = ref_acc - acc;
        report["mean_preact_error"] = gap / static_cast<double>(d.samples.size());
      }
    } else if (*bench) {
      if (paper_shape) {
        bench_t = 1300;
        bench_f = 32;
        bench_hidden = 100;
      }
      SeededRng rng(g.seed);
      AnyModel model = [&]() -> AnyModel {
        if (!bench_model.empty()) return load_model(bench_model);
        FpModel fp = build_random_model(rng, bench_f, bench_hidden, 2, 0.2);
        if (bench_mode == "fp") return fp;
        QuantConfig cfg;
        cfg.mode = parse_mode(bench_mode);
        cfg.act_levels = bench_act;
        cfg.weight_levels = bench_weight;
        cfg = resolve_config(cfg, false, nullptr);
        return quantize_model(fp, cfg);
      }();
      if (input_size(model) != bench_f) {
        throw std::invalid_argument("model expects " +
                                    std::to_string(input_size(model)) +
                                    " features, bench asked for " +
                                    std::to_string(bench_f));
      }
      if (paper_shape && hidden_size(model) != 100) {
        throw std::invalid_argument("--paper-shape needs hidden size 100, model has " +
                                    std::to_string(hidden_size(model)));
      }
      const Sequence seq = random_sequence(rng, bench_t, bench_f);
      const auto start = std::chrono::steady_clock::now();
      Classification last;
      for (std::size_t r = 0; r < bench_reps; ++r) last = predict(model, seq);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count() /
          static_cast<double>(bench_reps);

      const std::size_t hidden = hidden_size(model);
      BitLevel a = BitLevel::fp();
      BitLevel w = BitLevel::fp();
      bool pointwise = false;
      std::size_t bytes = 0;
      if (const auto* q = std::get_if<QuantizedModel>(&model)) {
        a = BitLevel::levels(static_cast<int>(q->config().act_levels));
        w = BitLevel::levels(static_cast<int>(q->config().weight_levels));
        pointwise = q->config().mode == QuantMode::kMubinn2;
        bytes = serialize_model(*q).size();
      } else {
        bytes = serialize_model(std::get<FpModel>(model)).size();
      }
      FpModel shape_twin;
      shape_twin.lstm = LSTMWeights::zeros(bench_f, hidden);
      shape_twin.head = DenseHead{RealMatrix(num_classes(model), hidden),
                                  RealVector(num_classes(model))};
      const std::size_t fp_bytes = serialize_model(shape_twin).size();
      const OpsCount ops = ops_count(
          a, w,
          CellDims{static_cast<std::int64_t>(bench_f),
                   static_cast<std::int64_t>(hidden)},
          pointwise);

      report["mode"] = mode_label(model);
      report["timesteps"] = bench_t;
      report["features"] = bench_f;
      report["hidden"] = hidden;
      report["seconds_per_sequence"] = secs;
      report["label"] = last.label;
      report["xnor_ops_per_step"] = ops.xnor_ops;
      report["popcount_bits_per_step"] = ops.popcount_bits;
      report["scale_mults_per_step"] = ops.scale_mults;
      report["fp_mults_per_step"] = ops.fp_mults;
      report["pointwise_mults_per_step"] = ops.pointwise_mults;
      report["model_bytes"] = bytes;
      report["fp_model_bytes"] = fp_bytes;
      report["compression"] =
          static_cast<double>(fp_bytes) / static_cast<double>(bytes);
    } else if (*delay) {
      const DelayReference ref = DelayReference::bundled();
      if (show_table) {
        Json rows = Json::array();
        const std::vector<BitLevel> levels = {
            BitLevel::levels(1), BitLevel::levels(2), BitLevel::levels(3),
            BitLevel::levels(4), BitLevel::levels(5), BitLevel::fp()};
        for (BitLevel ra : levels) {
          Json row;
          row["A\\W"] = to_string(ra);
          for (BitLevel cw : levels) row[to_string(cw)] = ref.at(ra, cw);
          row["speedup"] = table_speedup(ref, ra, ra);
          rows.push_back(row);
        }
        report["reference_delay"] = rows;
        report["speedup_3x3_vs_fp_fp"] =
            table_speedup(ref, BitLevel::levels(3), BitLevel::levels(3));
        report["speedup_3x3_vs_3_fp"] =
            table_speedup_row_fp(ref, BitLevel::levels(3), BitLevel::levels(3));
      } else {
        const BitLevel a = parse_bit_level(delay_a);
        const BitLevel w = parse_bit_level(delay_w);
        const GateDelayParams params =
            calib.empty() ? GateDelayParams{} : load_calibration(calib);
        const double est = estimate_delay(a, w, params);
        report["act_levels"] = to_string(a);
        report["weight_levels"] = to_string(w);
        report["model_delay"] = est;
        report["model_speedup"] =
            estimate_delay(BitLevel::fp(), BitLevel::fp(), params) / est;
        const bool in_grid = (a.is_fp() || a.value <= 5) && (w.is_fp() || w.value <= 5);
        if (in_grid) {
          report["table_delay"] = ref.at(a, w);
          report["table_speedup"] = table_speedup(ref, a, w);
          report["table_speedup_row_fp"] = table_speedup_row_fp(ref, a, w);
        }
        report["note"] =
            "model_* values come from a structural logic-depth estimate and "
            "are meaningful only as an ordering; table_* values are the "
            "bundled reference measurements";
      }
    }
    print_report(report, g, out);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mubinn
