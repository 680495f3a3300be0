/* Copyright 2026 The SResNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sresnet/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "sresnet/checkpoint.hpp"
#include "sresnet/dataset.hpp"
#include "sresnet/error.hpp"
#include "sresnet/export.hpp"
#include "sresnet/similarity.hpp"
#include "sresnet/synth.hpp"
#include "sresnet/tensor.hpp"
#include "sresnet/train.hpp"

namespace sresnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Subcommand bits.
enum : unsigned {
  kSynth = 1u << 0,
  kTrain = 1u << 1,
  kEval = 1u << 2,
  kAblate = 1u << 3,
  kExtract = 1u << 4,
  kCompare = 1u << 5,
  kRender = 1u << 6,
};
constexpr unsigned kAll = 0x7f;
constexpr unsigned kFit = kTrain | kAblate;               // train models
constexpr unsigned kUse = kEval | kExtract | kCompare;    // consume a checkpoint
constexpr unsigned kData = kFit | kUse;

struct Command {
  const char* name;
  unsigned bit;
  const char* help;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> c = {
      {"synth", kSynth, "Write the synthetic pattern corpus as <out>/corpus/<class>/NNNN.ppm"},
      {"train", kTrain, "Split, standardize, augment and train; writes history.csv and the best checkpoint"},
      {"eval", kEval, "Accuracy of a checkpoint on a dataset subset"},
      {"ablate", kAblate, "Train one model per SE scheme and write the scheme/precision table"},
      {"extract", kExtract, "Inference-mode feature vectors and class prototypes"},
      {"compare", kCompare, "Prototype distances to a reference class (CSV, optional SVG maps)"},
      {"render", kRender, "SVG choropleths from a report CSV and a region map"},
  };
  return c;
}

enum class Kind { Int, Real, Str, Bool };

struct KeySpec {
  std::string key;
  Kind kind;
  json def;
  unsigned commands;
  std::string help;
  std::string bool_flag;  // for Kind::Bool: the flag that flips the default
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> t = {
      {"data", Kind::Str, "", kData, "dataset root laid out as <root>/<class>/*.ppm", ""},
      {"synth", Kind::Str, "", kSynth | kData,
       "synthetic corpus instead of --data, e.g. classes=4 per-class=50 size=32 (keys: classes, per-class, size, "
       "noise, jitter, seed)",
       ""},
      {"split", Kind::Real, 0.7, kData, "training fraction of the stratified split", ""},
      {"model", Kind::Str, "tiny", kFit, "model scale: tiny | full", ""},
      {"scheme", Kind::Str, "s3", kTrain, "SE placement: none | s1 | s2 | s3 | s4", ""},
      {"schemes", Kind::Str, "s1,s2,s3,s4", kAblate, "comma-separated SE placements", ""},
      {"input-size", Kind::Int, 0, kFit, "input side length; 0 uses the model default (tiny 32, full 224)", ""},
      {"se-reduction", Kind::Int, 0, kFit, "SE reduction ratio; 0 uses the model default (tiny 4, full 16)", ""},
      {"se-bias", Kind::Bool, true, kFit, "SE fully connected layers without bias", "--no-se-bias"},
      {"epochs", Kind::Int, 50, kFit, "training epochs", ""},
      {"batch-size", Kind::Int, 64, kFit | kUse, "mini-batch size", ""},
      {"lr", Kind::Real, 0.001, kFit, "Adam learning rate", ""},
      {"beta1", Kind::Real, 0.9, kFit, "Adam beta1", ""},
      {"beta2", Kind::Real, 0.999, kFit, "Adam beta2", ""},
      {"eps", Kind::Real, 1e-8, kFit, "Adam epsilon", ""},
      {"seed", Kind::Int, 0, kAll, "global seed: corpus, split, initialization, shuffling, augmentation", ""},
      {"shuffle", Kind::Bool, true, kFit, "keep dataset order instead of shuffling each epoch", "--no-shuffle"},
      {"workers", Kind::Int, 1, kAll, "threads preparing batches; results do not depend on it", ""},
      {"augment", Kind::Str, "none", kFit,
       "augmentations: none | all | comma list of resize, rotate, zoom, translate, flip", ""},
      {"timing", Kind::Bool, true, kFit, "write 0 in the history seconds column (byte-comparable runs)",
       "--no-timing"},
      {"precision", Kind::Str, "double", kFit | kUse, "matrix-product precision: double | single", ""},
      {"out", Kind::Str, "out", kAll, "output directory", ""},
      {"checkpoint", Kind::Str, "", kTrain | kUse,
       "train: where to write the best checkpoint (default <out>/best.ckpt); others: checkpoint to read", ""},
      {"pretrained", Kind::Str, "", kTrain, "initialize from this checkpoint, re-drawing only the classifier", ""},
      {"subset", Kind::Str, "", kUse, "train | test | all (default: eval test, extract/compare all)", ""},
      {"reference", Kind::Str, "", kCompare, "reference class name", ""},
      {"map", Kind::Str, "", kCompare | kRender, "region map JSON; writes report_<metric>.svg", ""},
      {"metric", Kind::Str, "all", kCompare | kRender, "map metric: euclidean | manhattan | cosine | all", ""},
      {"normalize", Kind::Bool, false, kCompare, "L2-normalize prototypes before measuring", "--normalize"},
      {"report", Kind::Str, "", kRender, "report CSV written by compare", ""},
      {"low-color", Kind::Str, "247,251,255", kCompare | kRender, "map color at the low end of the scale, r,g,b", ""},
      {"high-color", Kind::Str, "8,48,107", kCompare | kRender, "map color at the high end of the scale, r,g,b", ""},
  };
  return t;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : key_table())
    if (k.key == key) return &k;
  return nullptr;
}

// Missing required input: reported with the subcommand's usage text.
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

json parse_flag_value(const KeySpec& spec, const std::string& text) {
  std::size_t used = 0;
  try {
    switch (spec.kind) {
      case Kind::Int: {
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
        break;
      }
      case Kind::Real: {
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
        break;
      }
      case Kind::Str: return text;
      case Kind::Bool: break;
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("--" + spec.key + ": invalid value '" + text + "'");
}

void check_type(const KeySpec& spec, const json& v) {
  const bool ok = (spec.kind == Kind::Int && v.is_number_integer()) || (spec.kind == Kind::Real && v.is_number()) ||
                  (spec.kind == Kind::Str && v.is_string()) || (spec.kind == Kind::Bool && v.is_boolean());
  if (!ok) throw ConfigError("config key '" + spec.key + "' has the wrong type: " + v.dump());
}

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot read ") + what + " " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

Rgb8 parse_color(const RunConfig& cfg, const std::string& key) {
  const auto parts = split_list(cfg.str(key), ',');
  if (parts.size() != 3) throw ConfigError("--" + key + ": expected r,g,b");
  Rgb8 c{};
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t used = 0;
    try {
      c[i] = std::stoi(parts[i], &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != parts[i].size() || c[i] < 0 || c[i] > 255) throw ConfigError("--" + key + ": channels must be 0..255");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces.

fs::path out_dir(const RunConfig& cfg) {
  fs::path dir = cfg.str("out");
  fs::create_directories(dir);
  return dir;
}

void validate_common(const RunConfig& cfg) {
  if (cfg.values.contains("workers") && cfg.integer("workers") < 1) throw ConfigError("--workers must be >= 1");
  if (cfg.values.contains("seed") && cfg.integer("seed") < 0) throw ConfigError("--seed must be >= 0");
  if (cfg.values.contains("split")) {
    const double f = cfg.real("split");
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("--split must lie in (0, 1)");
  }
  if (cfg.values.contains("batch-size") && cfg.integer("batch-size") < 1) throw ConfigError("--batch-size must be >= 1");
  if (cfg.values.contains("precision")) {
    const std::string p = cfg.str("precision");
    if (p != "double" && p != "single") throw ConfigError("--precision must be double or single");
    set_precision(p == "single" ? Precision::Single : Precision::Double);
  }
}

LabeledDataset load_data(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string synth = cfg.str("synth");
  const std::string data = cfg.str("data");
  if (!synth.empty() && !data.empty()) throw ConfigError("pass either --data or --synth, not both");
  if (synth.empty() && data.empty()) throw UsageError("no dataset: pass --data <root> or --synth <key=value ...>");
  if (!synth.empty()) {
    const auto spec = SynthSpec::parse(split_list(synth, ' '), cfg.seed());
    out << "synthetic corpus: " << spec.to_string() << "\n";
    return synth_generate(spec);
  }
  LabeledDataset ds = load_folder(data);
  for (const auto& e : ds.load_errors) err << "warning: skipped " << e << "\n";
  out << "loaded " << ds.size() << " images in " << ds.class_names.size() << " classes from " << data << "\n";
  return ds;
}

std::string data_source(const RunConfig& cfg) {
  return cfg.str("synth").empty() ? "data:" + cfg.str("data") : "synth:" + cfg.str("synth");
}

ModelConfig model_config(const RunConfig& cfg, std::size_t num_classes, SeScheme scheme) {
  ModelConfig mc = parse_scale(cfg.str("model")) == ModelScale::Tiny ? ModelConfig::tiny(num_classes, scheme)
                                                                     : ModelConfig::full(num_classes, scheme);
  const auto input = cfg.integer("input-size");
  const auto reduction = cfg.integer("se-reduction");
  if (input < 0 || reduction < 0) throw ConfigError("--input-size and --se-reduction must be >= 0");
  if (input > 0) mc.input_height = mc.input_width = static_cast<std::size_t>(input);
  if (reduction > 0) mc.se_reduction = static_cast<std::size_t>(reduction);
  mc.se_bias = cfg.flag("se-bias");
  mc.validate();
  return mc;
}

TrainConfig train_config(const RunConfig& cfg, std::ostream& out) {
  TrainConfig tc;
  const auto epochs = cfg.integer("epochs");
  if (epochs < 1) throw ConfigError("--epochs must be >= 1");
  tc.epochs = static_cast<int>(epochs);
  tc.batch_size = static_cast<std::size_t>(cfg.integer("batch-size"));
  tc.adam.lr = cfg.real("lr");
  if (!(tc.adam.lr > 0.0)) throw ConfigError("--lr must be > 0");
  tc.adam.beta1 = cfg.real("beta1");
  tc.adam.beta2 = cfg.real("beta2");
  tc.adam.eps = cfg.real("eps");
  tc.seed = cfg.seed();
  tc.shuffle = cfg.flag("shuffle");
  tc.workers = static_cast<std::size_t>(cfg.integer("workers"));
  tc.record_timing = cfg.flag("timing");
  AugmentSpec aug = AugmentSpec::from_ops(cfg.str("augment"));
  if (aug.any()) {
    aug.seed = cfg.seed();
    tc.augment = aug;
  }
  tc.on_epoch = [&out, epochs](const EpochRecord& r) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "epoch %d/%lld train_loss %.6f train_acc %.4f test_acc %.4f (%.1fs)\n", r.epoch,
                  static_cast<long long>(epochs), r.train_loss, r.train_acc, r.test_acc, r.seconds);
    out << buf << std::flush;
  };
  tc.validate();
  return tc;
}

struct FitData {
  LabeledDataset train, test;
  ModelConfig model;
};

// load -> resize to the model input -> stratified split -> statistics.
FitData prepare_fit(const RunConfig& cfg, TrainConfig& tc, SeScheme scheme, const fs::path& dir, std::ostream& out,
                    std::ostream& err) {
  LabeledDataset ds = load_data(cfg, out, err);
  FitData fit;
  fit.model = model_config(cfg, ds.class_names.size(), scheme);
  ds = resize_all(ds, fit.model.input_height, fit.model.input_width);
  std::tie(fit.train, fit.test) = split(ds, cfg.real("split"), cfg.seed());
  out << "split: " << fit.train.size() << " train / " << fit.test.size() << " test\n";

  const ChannelStats stats = compute_channel_stats(fit.train);
  write_text(dir / "standardization.json", stats.to_json().dump(2) + "\n");
  tc.standardization = stats;
  if (tc.augment) tc.augment->resize_height = fit.model.input_height, tc.augment->resize_width = fit.model.input_width;
  tc.checkpoint_extra = {
      {"class_names", ds.class_names},
      {"standardization", stats.to_json()},
      {"split", {{"fraction", cfg.real("split")}, {"seed", cfg.seed()}}},
      {"data", data_source(cfg)},
  };
  return fit;
}

struct Loaded {
  Model model;
  LabeledDataset data;  // standardized subset
};

Loaded prepare_use(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string path = cfg.str("checkpoint");
  if (path.empty()) throw UsageError("--checkpoint is required");
  const CheckpointHeader header = read_checkpoint_header(path);
  const json& extra = header.extra;
  if (!extra.is_object() || !extra.contains("class_names") || !extra.contains("standardization")) {
    throw CheckpointFormatError(path + ": no class names or standardization statistics (not written by train)");
  }
  Model model = load_checkpoint(path, header.config);

  LabeledDataset ds = load_data(cfg, out, err);
  const auto stored = extra.at("class_names").get<std::vector<std::string>>();
  if (stored != ds.class_names) {
    throw CheckpointShapeError("checkpoint/data mismatch: checkpoint classes " + json(stored).dump() +
                               ", dataset classes " + json(ds.class_names).dump());
  }
  ds = resize_all(ds, header.config.input_height, header.config.input_width);

  const std::string subset = cfg.str("subset");
  if (subset != "all") {
    // Re-derive the training split from what the checkpoint recorded.
    const json sp = extra.value("split", json::object());
    const double fraction = sp.value("fraction", cfg.real("split"));
    const std::uint64_t seed = sp.value("seed", cfg.seed());
    auto [tr, te] = split(ds, fraction, seed);
    if (subset == "train") ds = std::move(tr);
    else if (subset == "test") ds = std::move(te);
    else throw ConfigError("--subset must be train, test or all");
  }
  const ChannelStats stats = ChannelStats::from_json(extra.at("standardization"));
  out << "using " << ds.size() << " images (" << subset << ")\n";
  return Loaded{std::move(model), standardize(ds, stats)};
}

std::vector<Prototype> class_prototypes(Model& model, const LabeledDataset& ds, std::size_t batch_size,
                                        std::vector<Vector>* all_features = nullptr) {
  model.set_mode(Mode::Inference);
  std::vector<std::vector<Vector>> per_class(ds.class_names.size());
  std::vector<std::size_t> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, idx.size() - start);
    auto [batch, labels] = make_batch(ds, std::span<const std::size_t>(idx).subspan(start, n));
    const Tensor f = model.extract_features(batch);
    const std::size_t d = f.dim(1);
    for (std::size_t b = 0; b < n; ++b) {
      Vector v(f.data().begin() + static_cast<std::ptrdiff_t>(b * d),
               f.data().begin() + static_cast<std::ptrdiff_t>((b + 1) * d));
      if (all_features) all_features->push_back(v);
      per_class[static_cast<std::size_t>(labels[b])].push_back(std::move(v));
    }
  }
  std::vector<Prototype> protos;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (!per_class[c].empty()) protos.push_back(prototype(per_class[c], ds.class_names[c]));
  }
  return protos;
}

std::vector<Metric> selected_metrics(const RunConfig& cfg) {
  const std::string m = cfg.str("metric");
  if (m == "all") return {Metric::Euclidean, Metric::Manhattan, Metric::Cosine};
  return {parse_metric(m)};
}

void render_maps(const RunConfig& cfg, const SimilarityReport& report, const fs::path& dir, std::ostream& out) {
  const RegionMap map = RegionMap::load(cfg.str("map"));
  const Rgb8 low = parse_color(cfg, "low-color");
  const Rgb8 high = parse_color(cfg, "high-color");
  for (Metric m : selected_metrics(cfg)) {
    ColorScale scale = ColorScale::default_for(m, report);
    scale.low = low;
    scale.high = high;
    const fs::path path = dir / ("report_" + std::string(to_string(m)) + ".svg");
    write_text(path, render_choropleth(report, map, m, scale));
    out << "wrote " << path.string() << "\n";
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = out_dir(cfg);
  const auto spec = SynthSpec::parse(split_list(cfg.str("synth"), ' '), cfg.seed());
  const LabeledDataset ds = synth_generate(spec);
  save_folder(ds, dir / "corpus");
  out << "wrote " << ds.size() << " images in " << ds.class_names.size() << " classes to "
      << (dir / "corpus").string() << " (" << spec.to_string() << ")\n";
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  TrainConfig tc = train_config(cfg, out);
  const SeScheme scheme = parse_scheme(cfg.str("scheme"));
  const fs::path dir = out_dir(cfg);
  FitData fit = prepare_fit(cfg, tc, scheme, dir, out, err);
  tc.best_checkpoint = cfg.str("checkpoint").empty() ? dir / "best.ckpt" : fs::path(cfg.str("checkpoint"));

  Model model = Model::build(fit.model, cfg.seed());
  if (!cfg.str("pretrained").empty()) {
    load_checkpoint_into(model, cfg.str("pretrained"), LoadOptions{.skip_classifier = true});
    out << "initialized from " << cfg.str("pretrained") << " (classifier re-drawn)\n";
  }
  out << "model: " << to_string(fit.model.scale) << ", scheme " << to_string(scheme) << ", "
      << model.parameter_count() << " parameters\n";
  const History history = train(model, fit.train, fit.test, tc);
  write_text(dir / "history.csv", history.to_csv());

  const auto best = std::max_element(history.epochs.begin(), history.epochs.end(),
                                     [](const EpochRecord& a, const EpochRecord& b) { return a.test_acc < b.test_acc; });
  char buf[160];
  std::snprintf(buf, sizeof(buf), "best test accuracy %.4f at epoch %d; checkpoint %s\n", best->test_acc, best->epoch,
                tc.best_checkpoint.string().c_str());
  out << buf;
  return kExitOk;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  TrainConfig tc = train_config(cfg, out);
  std::vector<SeScheme> schemes;
  for (const auto& s : split_list(cfg.str("schemes"), ',')) schemes.push_back(parse_scheme(s));
  if (schemes.empty()) throw ConfigError("--schemes is empty");
  const fs::path dir = out_dir(cfg);
  FitData fit = prepare_fit(cfg, tc, SeScheme::S3, dir, out, err);
  fs::create_directories(dir / "checkpoints");
  const AblationReport report = ablate(fit.model, cfg.seed(), fit.train, fit.test, tc, schemes, dir / "checkpoints");
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    write_text(dir / ("history_" + std::string(to_string(report.entries[i].first)) + ".csv"),
               report.histories[i].to_csv());
  }
  write_text(dir / "ablation.csv", report.to_csv());
  out << report.to_csv();
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir = out_dir(cfg);
  Loaded l = prepare_use(cfg, out, err);
  const auto preds = predict(l.model, l.data, static_cast<std::size_t>(cfg.integer("batch-size")));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == l.data.items[i].label ? 1 : 0;
  const double acc = static_cast<double>(correct) / static_cast<double>(preds.size());
  const json result = {{"accuracy", acc}, {"correct", correct}, {"items", preds.size()}, {"subset", cfg.str("subset")}};
  write_text(dir / "eval.json", result.dump(2) + "\n");
  char buf[120];
  std::snprintf(buf, sizeof(buf), "accuracy %.4f (%zu/%zu) on %s\n", acc, correct, preds.size(),
                cfg.str("subset").c_str());
  out << buf;
  return kExitOk;
}

int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir = out_dir(cfg);
  Loaded l = prepare_use(cfg, out, err);
  std::vector<Vector> features;
  const auto protos = class_prototypes(l.model, l.data, static_cast<std::size_t>(cfg.integer("batch-size")), &features);
  const std::size_t d = l.model.config().feature_dim();

  std::string csv = "class,source";
  for (std::size_t i = 0; i < d; ++i) csv += ",f" + std::to_string(i);
  csv += "\n";
  for (std::size_t k = 0; k < features.size(); ++k) {
    const auto& item = l.data.items[k];
    csv += l.data.class_names[static_cast<std::size_t>(item.label)] + "," + item.source;
    for (double v : features[k]) csv += "," + fmt17(v);
    csv += "\n";
  }
  write_text(dir / "features.csv", csv);

  std::string pcsv = "class,n";
  for (std::size_t i = 0; i < d; ++i) pcsv += ",v" + std::to_string(i);
  pcsv += "\n";
  for (const auto& p : protos) {
    pcsv += p.class_name + "," + std::to_string(p.n);
    for (double v : p.v) pcsv += "," + fmt17(v);
    pcsv += "\n";
  }
  write_text(dir / "prototypes.csv", pcsv);
  out << "wrote " << features.size() << " feature vectors (D=" << d << ") and " << protos.size() << " prototypes\n";
  return kExitOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.str("reference").empty()) throw UsageError("--reference is required");
  const fs::path dir = out_dir(cfg);
  Loaded l = prepare_use(cfg, out, err);
  const auto protos = class_prototypes(l.model, l.data, static_cast<std::size_t>(cfg.integer("batch-size")));
  const SimilarityReport report =
      reference_report(protos, cfg.str("reference"), ReportOptions{.normalize = cfg.flag("normalize")});
  const std::string csv = export_csv(report);
  write_text(dir / "report.csv", csv);
  out << csv;
  if (!cfg.str("map").empty()) render_maps(cfg, report, dir, out);
  return kExitOk;
}

int cmd_render(const RunConfig& cfg, std::ostream& out) {
  if (cfg.str("report").empty() || cfg.str("map").empty()) throw UsageError("--report and --map are required");
  const fs::path dir = out_dir(cfg);
  const SimilarityReport report = parse_report_csv(read_text(cfg.str("report"), "report"));
  render_maps(cfg, report, dir, out);
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string RunConfig::str(const std::string& key) const { return values.at(key).get<std::string>(); }
std::int64_t RunConfig::integer(const std::string& key) const { return values.at(key).get<std::int64_t>(); }
double RunConfig::real(const std::string& key) const { return values.at(key).get<double>(); }
bool RunConfig::flag(const std::string& key) const { return values.at(key).get<bool>(); }

std::uint64_t RunConfig::seed() const {
  const auto s = integer("seed");
  if (s < 0) throw ConfigError("--seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

json RunConfig::echo() const {
  json j = values;
  j["command"] = command;
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const TrainingDivergence*>(&e)) return kExitDivergence;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const LookupError*>(&e) ||
      dynamic_cast<const CheckpointError*>(&e) || dynamic_cast<const ExportError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const UndefinedSimilarityError*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitData;
  }
  return kExitFailure;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SResNet: ResNet-18 with a squeeze-and-excitation gate; training, prototypes, similarity maps"};
  app.require_subcommand(1);

  struct Bound {
    const KeySpec* spec = nullptr;
    CLI::Option* opt = nullptr;
    std::string value;
    std::vector<std::string> tokens;
  };
  std::map<std::string, std::map<std::string, Bound>> bound;
  std::map<std::string, std::string> config_files;
  std::map<std::string, CLI::App*> subs;

  for (const auto& c : commands()) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    subs[c.name] = sub;
    sub->add_option("--config", config_files[c.name], "flat JSON file of key: value settings (flags win)");
    for (const auto& spec : key_table()) {
      if (!(spec.commands & c.bit)) continue;
      Bound& b = bound[c.name][spec.key];
      b.spec = &spec;
      if (spec.kind == Kind::Bool) {
        b.opt = sub->add_flag(spec.bool_flag, spec.help);
      } else if (spec.key == "synth") {
        b.opt = sub->add_option("--synth", b.tokens, spec.help)->expected(1, 64);
      } else {
        b.opt = sub->add_option("--" + spec.key, b.value, spec.help + " [" + spec.def.dump() + "]");
      }
    }
  }

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("sresnet");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string name;
  for (const auto& [n, sub] : subs)
    if (sub->parsed()) name = n;
  const unsigned bit = std::find_if(commands().begin(), commands().end(), [&](const Command& c) {
                         return c.name == name;
                       })->bit;

  try {
    RunConfig cfg;
    cfg.command = name;
    for (const auto& spec : key_table())
      if (spec.commands & bit) cfg.values[spec.key] = spec.def;

    if (!config_files[name].empty()) {
      json file;
      try {
        file = json::parse(read_text(config_files[name], "config file"));
      } catch (const json::exception& e) {
        throw ConfigError("config file " + config_files[name] + ": " + e.what());
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
      if (!file.is_object()) throw ConfigError("config file must hold a flat JSON object");
      for (const auto& [key, value] : file.items()) {
        if (key == "command") continue;
        const KeySpec* spec = find_key(key);
        if (!spec) throw ConfigError("config file: unknown key '" + key + "'");
        if (!(spec->commands & bit)) {
          err << "note: config key '" << key << "' does not apply to '" << name << "'; ignored\n";
          continue;
        }
        check_type(*spec, value);
        cfg.values[key] = value;
      }
    }

    for (auto& [key, b] : bound[name]) {
      if (b.opt->count() == 0) continue;
      if (b.spec->kind == Kind::Bool) {
        cfg.values[key] = !b.spec->def.get<bool>();
      } else if (key == "synth") {
        std::string joined;
        for (const auto& t : b.tokens) joined += (joined.empty() ? "" : " ") + t;
        cfg.values[key] = joined;
      } else {
        cfg.values[key] = parse_flag_value(*b.spec, b.value);
      }
    }
    if (cfg.values.contains("subset") && cfg.str("subset").empty()) {
      cfg.values["subset"] = name == "eval" ? "test" : "all";
    }

    validate_common(cfg);
    fs::create_directories(cfg.str("out"));
    write_text(fs::path(cfg.str("out")) / "run-config.json", cfg.echo().dump(2) + "\n");

    if (name == "synth") return cmd_synth(cfg, out);
    if (name == "train") return cmd_train(cfg, out, err);
    if (name == "ablate") return cmd_ablate(cfg, out, err);
    if (name == "eval") return cmd_eval(cfg, out, err);
    if (name == "extract") return cmd_extract(cfg, out, err);
    if (name == "compare") return cmd_compare(cfg, out, err);
    return cmd_render(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << subs[name]->help();
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace sresnet
