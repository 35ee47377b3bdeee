// arc: command-line driver for the toy detection pipeline. Every command
// writes its outputs plus a `<output>.manifest.json` echoing the resolved
// configuration. Failures exit with the library error code and print one
// JSON object on stderr.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arc/arc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  arc::require(in.good(), arc::ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return in;
}

void write_file(const std::string& path, const std::string& bytes) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  arc::require(out.good(), arc::ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << bytes;
  arc::require(out.good(), arc::ErrorCode::kIo, "write failed for '" + path + "'");
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw arc::Error(arc::ErrorCode::kParse, "malformed JSON in '" + path + "': " + e.what());
  }
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(const std::string& out, const std::string& command, const json& config,
                    const std::vector<std::string>& outputs) {
  json m;
  m["version"] = kManifestVersion;
  m["command"] = command;
  m["config"] = config;
  m["outputs"] = outputs;
  write_file(manifest_path(out), m.dump(2) + "\n");
}

arc::Dataset load_dataset(const std::string& path) {
  auto in = open_in(path);
  return arc::read_dataset_csv(in);
}

arc::Network load_network(const std::string& path) {
  try {
    return arc::network_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw arc::Error(arc::ErrorCode::kParse, "malformed model '" + path + "': " + e.what());
  }
}

std::vector<arc::FeatureRecord> load_features(const std::string& path) {
  auto in = open_in(path);
  return arc::read_features_csv(in);
}

std::vector<arc::Vector> arc_vectors(const std::vector<arc::FeatureRecord>& rows) {
  std::vector<arc::Vector> v;
  for (const auto& r : rows) v.push_back(r.arc_vector());
  return v;
}

arc::Fraction fraction_arg(const std::string& s) { return arc::parse_fraction(s); }

std::vector<std::size_t> parse_hidden(const std::string& s) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  for (const auto& cell : arc::split_csv_line(s)) out.push_back(arc::parse_index(cell));
  return out;
}

arc::DetectMode parse_mode(const std::string& s) {
  if (s == "uninformed") return {};
  const std::string prefix = "informed:";
  if (s.rfind(prefix, 0) == 0) {
    const int k = static_cast<int>(arc::parse_index(s.substr(prefix.size())));
    arc::require(k >= 1 && k <= arc::kNumLevels, arc::ErrorCode::kInvalidArgument, "informed level must be 1..4");
    return {k};
  }
  throw arc::Error(arc::ErrorCode::kUnknownEnum, "unknown detection mode '" + s + "'");
}

// Adversarial datasets carry the attack name and budget in their manifest.
json sidecar_config(const std::string& inputs) {
  const std::string p = manifest_path(inputs);
  if (!fs::exists(p)) return json::object();
  json m = read_json(p);
  return m.value("config", json::object());
}

// Attaches labels when the model and the inputs the features were computed on are known.
std::vector<arc::EvalSample> eval_samples(const std::vector<arc::FeatureRecord>& rows, const arc::Network* net,
                                          const arc::Dataset* inputs) {
  std::vector<arc::EvalSample> out;
  for (const auto& r : rows) {
    arc::EvalSample s;
    s.feature = r;
    if (net && inputs) {
      arc::require(r.id < inputs->size(), arc::ErrorCode::kDimensionMismatch,
                   "feature id " + std::to_string(r.id) + " has no matching input row");
      const arc::Vector& x = inputs->inputs[r.id];
      s.true_label = inputs->labels[r.id];
      s.predicted = arc::predicted_class(*net, x);
      s.least_likely = arc::correct_label(*net, x);
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct Commands {
  // gen-data
  arc::DatasetConfig data;
  std::size_t test_per_class = 0;
  std::string data_out, test_out;

  // train
  std::string train_data, hidden = "128,128,128", model_out;
  arc::TrainConfig train;
  std::string adv_eps = "8/255";
  std::uint64_t train_seed = 0;

  // attack
  std::string atk_model, atk_data, atk_name = "bim", atk_norm = "linf", atk_eps = "8/255", atk_out, atk_results;
  std::size_t atk_steps = 100;
  std::uint64_t atk_seed = 0;
  std::size_t atk_bb_samples = 20;

  // arc
  std::string arc_model, arc_inputs, arc_alpha = "2/255", arc_eps = "8/255", arc_norm = "linf", arc_loss = "ce",
                                     arc_label = "least", arc_mode = "bim", arc_out, arc_heatmaps, arc_source,
                                     arc_attack, arc_attack_eps;
  std::size_t arc_T = 6;
  std::uint64_t arc_seed = 0;

  // train-detector
  std::string det_benign, det_out;
  std::string det_adv[arc::kNumLevels];
  double det_C = 10.0, det_gamma = 0.0, det_weight = 1.0, det_tol = 1e-3;
  std::uint64_t det_seed = 0;

  // detect / recognize / eval
  std::string use_detector, use_features, use_mode = "uninformed", use_report, use_model, use_inputs;
  std::vector<std::string> feature_sets, input_sets;
  bool roc_sweep = false;
};

void cmd_gen_data(const Commands& c) {
  arc::DatasetSplit split = arc::make_dataset_split(c.data, c.test_per_class);
  json cfg{{"classes", c.data.num_classes},
           {"dim", c.data.dim},
           {"per_class", c.data.samples_per_class},
           {"noise", c.data.noise_std},
           {"seed", c.data.seed},
           {"test_per_class", c.test_per_class},
           {"out", c.data_out},
           {"test_out", c.test_out}};
  write_file(c.data_out, render([&](std::ostream& os) { arc::write_dataset_csv(os, split.train); }));
  std::vector<std::string> outs{c.data_out};
  if (c.test_per_class > 0) {
    arc::require(!c.test_out.empty(), arc::ErrorCode::kInvalidArgument, "--test-per-class needs --test-out");
    write_file(c.test_out, render([&](std::ostream& os) { arc::write_dataset_csv(os, split.test); }));
    write_manifest(c.test_out, "gen-data", cfg, {c.test_out});
    outs.push_back(c.test_out);
  }
  write_manifest(c.data_out, "gen-data", cfg, outs);
}

void cmd_train(Commands c) {
  arc::Dataset d = load_dataset(c.train_data);
  std::vector<std::size_t> dims{d.dim()};
  for (std::size_t h : parse_hidden(c.hidden)) dims.push_back(h);
  dims.push_back(d.num_classes);
  c.train.adv_eps = fraction_arg(c.adv_eps).value();
  c.train.seed = arc::splitmix64(c.train_seed);
  arc::TrainResult r = arc::train(arc::Network::initialize(dims, c.train_seed), d, c.train);
  write_file(c.model_out, arc::network_to_json(r.network).dump() + "\n");
  write_manifest(c.model_out, "train",
                 {{"data", c.train_data},
                  {"hidden", c.hidden},
                  {"dims", dims},
                  {"lr", c.train.learning_rate},
                  {"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"adversarial", c.train.adversarial},
                  {"adv_eps", c.adv_eps},
                  {"adv_steps", c.train.adv_steps},
                  {"seed", c.train_seed},
                  {"train_accuracy", r.train_accuracy},
                  {"final_epoch_loss", r.final_epoch_loss},
                  {"out", c.model_out}},
                 {c.model_out});
}

void cmd_attack(const Commands& c) {
  arc::Network net = load_network(c.atk_model);
  arc::Dataset d = load_dataset(c.atk_data);
  arc::AttackSpec spec;
  spec.name = c.atk_name;
  arc::validate_attack_name(spec.name);
  spec.norm = arc::parse_norm(c.atk_norm);
  spec.eps = fraction_arg(c.atk_eps);
  spec.steps = c.atk_steps;
  spec.seed = c.atk_seed;
  spec.bb_samples = c.atk_bb_samples;
  arc::require(d.dim() == net.input_dim(), arc::ErrorCode::kDimensionMismatch, "dataset dim does not match model");

  std::vector<arc::AttackResult> res = arc::run_attack_batch(net, d, spec);
  const std::string results = c.atk_results.empty() ? c.atk_out + ".results.csv" : c.atk_results;
  write_file(c.atk_out, render([&](std::ostream& os) { arc::write_dataset_csv(os, arc::adversarial_dataset(d, res)); }));
  write_file(results, render([&](std::ostream& os) {
               os << "id,attack,norm,eps,success,queries,linf,l2\n";
               for (std::size_t i = 0; i < res.size(); ++i)
                 os << i << ',' << spec.name << ',' << arc::to_string(spec.norm) << ',' << spec.eps.str() << ','
                    << (res[i].success ? 1 : 0) << ',' << res[i].queries << ','
                    << arc::format_double(arc::perturbation_norm(arc::Norm::kLinf, res[i].perturbation.span()))
                    << ',' << arc::format_double(arc::perturbation_norm(arc::Norm::kL2, res[i].perturbation.span()))
                    << '\n';
             }));
  std::size_t hits = 0;
  for (const auto& r : res) hits += r.success;
  json cfg{{"model", c.atk_model},
           {"data", c.atk_data},
           {"attack", spec.name},
           {"norm", c.atk_norm},
           {"eps", spec.eps.str()},
           {"steps", spec.steps},
           {"seed", spec.seed},
           {"bb_samples", spec.bb_samples},
           {"success_rate", res.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(res.size())},
           {"out", c.atk_out},
           {"results", results}};
  write_manifest(c.atk_out, "attack", cfg, {c.atk_out, results});
}

void cmd_arc(const Commands& c) {
  arc::Network net = load_network(c.arc_model);
  arc::Dataset d = load_dataset(c.arc_inputs);
  arc::ExploitConfig cfg;
  cfg.steps = c.arc_T;
  cfg.alpha = fraction_arg(c.arc_alpha).value();
  cfg.eps = fraction_arg(c.arc_eps).value();
  cfg.norm = arc::parse_norm(c.arc_norm);
  cfg.loss.kind = arc::parse_loss_kind(c.arc_loss);
  cfg.loss.label_rule = arc::parse_label_rule(c.arc_label);
  cfg.mode = arc::parse_exploit_mode(c.arc_mode);
  cfg.seed = c.arc_seed;

  const json side = sidecar_config(c.arc_inputs);
  const std::string attack = !c.arc_attack.empty() ? c.arc_attack : side.value("attack", std::string("none"));
  const arc::Fraction eps =
      fraction_arg(!c.arc_attack_eps.empty() ? c.arc_attack_eps : side.value("eps", std::string("0/255")));
  const std::string source = !c.arc_source.empty() ? c.arc_source : (eps.num == 0 ? "benign" : "adversarial");

  std::vector<arc::Matrix> mats;
  auto rows = arc::extract_features(net, d, cfg, source, attack, eps, c.arc_heatmaps.empty() ? nullptr : &mats);
  write_file(c.arc_out, render([&](std::ostream& os) { arc::write_features_csv(os, rows); }));
  std::vector<std::string> outs{c.arc_out};
  if (!c.arc_heatmaps.empty()) {
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const std::string stem = (fs::path(c.arc_heatmaps) / ("arc_" + std::to_string(i))).string();
      write_file(stem + ".csv", render([&](std::ostream& os) { arc::write_heatmap_csv(os, mats[i]); }));
      write_file(stem + ".pgm", render([&](std::ostream& os) { arc::write_heatmap_pgm(os, mats[i]); }));
      outs.push_back(stem + ".csv");
      outs.push_back(stem + ".pgm");
    }
  }
  write_manifest(c.arc_out, "arc",
                 {{"model", c.arc_model},
                  {"inputs", c.arc_inputs},
                  {"T", cfg.steps},
                  {"alpha", c.arc_alpha},
                  {"eps", c.arc_eps},
                  {"norm", c.arc_norm},
                  {"loss", c.arc_loss},
                  {"label", c.arc_label},
                  {"mode", c.arc_mode},
                  {"seed", c.arc_seed},
                  {"source", source},
                  {"attack", attack},
                  {"attack_eps", eps.str()},
                  {"out_features", c.arc_out},
                  {"out_heatmaps", c.arc_heatmaps}},
                 outs);
}

void cmd_train_detector(const Commands& c) {
  arc::DetectorTrainingSet ts;
  ts.config.C = c.det_C;
  ts.config.gamma = c.det_gamma;
  ts.config.weight_benign = c.det_weight;
  ts.config.tol = c.det_tol;
  ts.benign = arc_vectors(load_features(c.det_benign));
  for (int k = 0; k < arc::kNumLevels; ++k) ts.adversarial[k] = arc_vectors(load_features(c.det_adv[k]));
  arc::DetectorBundle b = arc::train_detector(ts);
  write_file(c.det_out, arc::detector_to_json(b).dump() + "\n");
  json conv = json::array();
  for (const auto& s : b.svms)
    conv.push_back({{"k", s.k},
                    {"converged", s.converged},
                    {"iterations", s.iterations},
                    {"support_vectors", s.support_vectors.size()},
                    {"gamma", s.gamma}});
  write_manifest(c.det_out, "train-detector",
                 {{"benign_features", c.det_benign},
                  {"adv_features", std::vector<std::string>(std::begin(c.det_adv), std::end(c.det_adv))},
                  {"C", c.det_C},
                  {"gamma", c.det_gamma},
                  {"weight_benign", c.det_weight},
                  {"tol", c.det_tol},
                  {"seed", c.det_seed},
                  {"svms", conv},
                  {"out", c.det_out}},
                 {c.det_out});
}

void cmd_detect(const Commands& c, const std::string& command) {
  arc::DetectorBundle b = arc::detector_from_json(read_json(c.use_detector));
  auto rows = load_features(c.use_features);
  std::optional<arc::Network> net;
  std::optional<arc::Dataset> inputs;
  if (!c.use_model.empty() && !c.use_inputs.empty()) {
    net = load_network(c.use_model);
    inputs = load_dataset(c.use_inputs);
  }
  const arc::DetectMode mode = parse_mode(c.use_mode);
  arc::DetectionReport rep =
      arc::evaluate(b, eval_samples(rows, net ? &*net : nullptr, inputs ? &*inputs : nullptr), mode);
  json j = arc::report_to_json(rep);
  if (command == "recognize") {
    json types = json::array();
    for (const auto& r : rows)
      types.push_back({{"id", r.id}, {"attack", r.attack}, {"type", arc::to_string(arc::recognize_attack_type(b, r.arc_vector()))}});
    j["recognition"] = types;
  }
  write_file(c.use_report, j.dump(2) + "\n");
  write_manifest(c.use_report, command,
                 {{"detector", c.use_detector},
                  {"features", c.use_features},
                  {"mode", c.use_mode},
                  {"model", c.use_model},
                  {"inputs", c.use_inputs},
                  {"out_report", c.use_report}},
                 {c.use_report});
}

void cmd_eval(const Commands& c) {
  arc::DetectorBundle b = arc::detector_from_json(read_json(c.use_detector));
  arc::require(c.input_sets.empty() || c.input_sets.size() == c.feature_sets.size(), arc::ErrorCode::kInvalidArgument,
               "--inputs must pair one-to-one with --feature-sets");
  std::optional<arc::Network> net;
  if (!c.input_sets.empty()) {
    arc::require(!c.use_model.empty(), arc::ErrorCode::kInvalidArgument, "--inputs needs --model");
    net = load_network(c.use_model);
  }
  std::vector<arc::EvalSample> samples;
  for (std::size_t i = 0; i < c.feature_sets.size(); ++i) {
    auto rows = load_features(c.feature_sets[i]);
    std::optional<arc::Dataset> inputs;
    if (net) inputs = load_dataset(c.input_sets[i]);
    auto part = eval_samples(rows, net ? &*net : nullptr, inputs ? &*inputs : nullptr);
    samples.insert(samples.end(), part.begin(), part.end());
  }
  const arc::DetectMode mode = parse_mode(c.use_mode);
  arc::DetectionReport rep = arc::evaluate(b, samples, mode);
  if (c.roc_sweep) {
    arc::require(b.training.has_value(), arc::ErrorCode::kPrecondition,
                 "ROC sweep needs a detector bundle that stores its training set");
    rep.roc = arc::roc_sweep(*b.training, samples, arc::default_benign_weight_grid(), mode);
  }
  write_file(c.use_report, arc::report_to_json(rep).dump(2) + "\n");
  write_manifest(c.use_report, "eval",
                 {{"detector", c.use_detector},
                  {"feature_sets", c.feature_sets},
                  {"inputs", c.input_sets},
                  {"model", c.use_model},
                  {"mode", c.use_mode},
                  {"roc_sweep", c.roc_sweep},
                  {"roc_grid", arc::default_benign_weight_grid()},
                  {"out_report", c.use_report}},
                 {c.use_report});
}

void print_error(const std::string& name, int code, const std::string& message) {
  std::cerr << json{{"error", name}, {"code", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARC adversarial-input detection toolkit"};
  app.require_subcommand(1);
  Commands c;

  auto* gen = app.add_subcommand("gen-data", "Generate a Gaussian-blob dataset");
  gen->add_option("--classes", c.data.num_classes)->capture_default_str();
  gen->add_option("--dim", c.data.dim)->capture_default_str();
  gen->add_option("--per-class", c.data.samples_per_class)->capture_default_str();
  gen->add_option("--noise", c.data.noise_std)->capture_default_str();
  gen->add_option("--seed", c.data.seed)->capture_default_str();
  gen->add_option("--test-per-class", c.test_per_class, "Held-out samples per class")->capture_default_str();
  gen->add_option("--test-out", c.test_out, "Held-out dataset CSV");
  gen->add_option("--out", c.data_out)->required();

  auto* tr = app.add_subcommand("train", "Train a ReLU MLP classifier");
  tr->add_option("--data", c.train_data)->required();
  tr->add_option("--hidden", c.hidden, "Comma-separated hidden widths")->capture_default_str();
  tr->add_option("--lr", c.train.learning_rate)->capture_default_str();
  tr->add_option("--epochs", c.train.epochs)->capture_default_str();
  tr->add_option("--batch-size", c.train.batch_size)->capture_default_str();
  tr->add_flag("--adversarial", c.train.adversarial, "PGD adversarial training");
  tr->add_option("--adv-eps", c.adv_eps, "N/D")->capture_default_str();
  tr->add_option("--adv-steps", c.train.adv_steps)->capture_default_str();
  tr->add_option("--seed", c.train_seed)->capture_default_str();
  tr->add_option("--out", c.model_out)->required();

  auto* at = app.add_subcommand("attack", "Perturb every input of a dataset");
  at->add_option("--model", c.atk_model)->required();
  at->add_option("--data", c.atk_data)->required();
  at->add_option("--attack", c.atk_name, "fgsm|bim|pgd|mim|nes|spsa|gauss|uniform|logitmatch|interp")
      ->capture_default_str();
  at->add_option("--norm", c.atk_norm, "linf|l2")->capture_default_str();
  at->add_option("--eps", c.atk_eps, "N/D")->capture_default_str();
  at->add_option("--steps", c.atk_steps)->capture_default_str();
  at->add_option("--seed", c.atk_seed)->capture_default_str();
  at->add_option("--bb-samples", c.atk_bb_samples, "NES/SPSA directions per step")->capture_default_str();
  at->add_option("--out", c.atk_out, "Adversarial dataset CSV")->required();
  at->add_option("--out-results", c.atk_results, "Per-sample results CSV (default <out>.results.csv)");

  auto* ar = app.add_subcommand("arc", "Extract ARC features");
  ar->add_option("--model", c.arc_model)->required();
  ar->add_option("--inputs", c.arc_inputs)->required();
  ar->add_option("--T", c.arc_T)->capture_default_str();
  ar->add_option("--alpha", c.arc_alpha, "N/D")->capture_default_str();
  ar->add_option("--eps", c.arc_eps, "N/D")->capture_default_str();
  ar->add_option("--norm", c.arc_norm, "linf|l2")->capture_default_str();
  ar->add_option("--loss", c.arc_loss, "ce|dlr")->capture_default_str();
  ar->add_option("--label", c.arc_label, "least|most|random")->capture_default_str();
  ar->add_option("--exploit", c.arc_mode, "bim|gauss|uniform")->capture_default_str();
  ar->add_option("--seed", c.arc_seed)->capture_default_str();
  ar->add_option("--source", c.arc_source, "Source tag (default from the input manifest)");
  ar->add_option("--attack", c.arc_attack, "Attack tag (default from the input manifest)");
  ar->add_option("--attack-eps", c.arc_attack_eps, "Attack budget tag N/D (default from the input manifest)");
  ar->add_option("--out-features", c.arc_out)->required();
  ar->add_option("--out-heatmaps", c.arc_heatmaps, "Directory for per-sample CSV/PGM heatmaps");

  auto* td = app.add_subcommand("train-detector", "Train the four per-level SVMs");
  td->add_option("--benign-features", c.det_benign)->required();
  for (int k = 1; k <= arc::kNumLevels; ++k)
    td->add_option("--adv-features-k" + std::to_string(k), c.det_adv[k - 1])->required();
  td->add_option("--C", c.det_C)->capture_default_str();
  td->add_option("--gamma", c.det_gamma, "<= 0 selects the median heuristic")->capture_default_str();
  td->add_option("--weight-benign", c.det_weight)->capture_default_str();
  td->add_option("--tol", c.det_tol)->capture_default_str();
  td->add_option("--seed", c.det_seed)->capture_default_str();
  td->add_option("--out", c.det_out)->required();

  auto add_detect_options = [&](CLI::App* s, bool with_mode) {
    s->add_option("--detector", c.use_detector)->required();
    s->add_option("--features", c.use_features)->required();
    if (with_mode) s->add_option("--mode", c.use_mode, "uninformed|informed:k")->capture_default_str();
    s->add_option("--model", c.use_model, "Classifier, enables Acc/Acc*");
    s->add_option("--inputs", c.use_inputs, "Inputs the features were computed on");
    s->add_option("--out-report", c.use_report)->required();
  };
  auto* de = app.add_subcommand("detect", "Detect adversarial inputs");
  add_detect_options(de, true);
  auto* re = app.add_subcommand("recognize", "Classify attacks as PGD-like or other");
  add_detect_options(re, false);

  auto* ev = app.add_subcommand("eval", "Evaluate a detector over several feature sets");
  ev->add_option("--detector", c.use_detector)->required();
  ev->add_option("--feature-sets", c.feature_sets)->required();
  ev->add_option("--inputs", c.input_sets, "Inputs per feature set, enables Acc/Acc*");
  ev->add_option("--model", c.use_model);
  ev->add_option("--mode", c.use_mode, "uninformed|informed:k")->capture_default_str();
  ev->add_flag("--roc-sweep", c.roc_sweep);
  ev->add_option("--out-report", c.use_report)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("invalid_argument", static_cast<int>(arc::ErrorCode::kInvalidArgument), e.what());
    return static_cast<int>(arc::ErrorCode::kInvalidArgument);
  }

  try {
    if (*gen) cmd_gen_data(c);
    else if (*tr) cmd_train(c);
    else if (*at) cmd_attack(c);
    else if (*ar) cmd_arc(c);
    else if (*td) cmd_train_detector(c);
    else if (*de) cmd_detect(c, "detect");
    else if (*re) cmd_detect(c, "recognize");
    else if (*ev) cmd_eval(c);
  } catch (const arc::Error& e) {
    print_error(arc::error_code_name(e.code()), static_cast<int>(e.code()), e.what());
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    print_error("io_error", static_cast<int>(arc::ErrorCode::kIo), e.what());
    return static_cast<int>(arc::ErrorCode::kIo);
  }
  return 0;
}
