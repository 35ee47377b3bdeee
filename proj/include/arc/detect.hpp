#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arc/csv.hpp"
#include "arc/error.hpp"
#include "arc/features.hpp"
#include "arc/linalg.hpp"
#include "arc/network.hpp"
#include "arc/svm.hpp"

namespace arc {

inline constexpr int kNumLevels = 4;  // eps = 2^k / 255, k = 1..4

/// One row of the feature CSV.
struct FeatureRecord {
  std::size_t id = 0;
  std::string source;
  std::string attack = "none";
  Fraction eps{0, 255};
  double A = 0.0;
  double sigma = 1.0;
  double arc_mean = 0.0;
  std::size_t selected_n = 0;

  Vector arc_vector() const { return Vector{A, sigma}; }
  bool operator==(const FeatureRecord&) const = default;
};

inline constexpr std::string_view kFeatureHeader = "id,source,attack,eps_num,eps_den,A,sigma,arc_mean,selected_n";

inline void write_features_csv(std::ostream& os, const std::vector<FeatureRecord>& rows) {
  os << kFeatureHeader << '\n';
  for (const auto& r : rows) {
    os << r.id << ',' << r.source << ',' << r.attack << ',' << r.eps.num << ',' << r.eps.den << ','
       << format_double(r.A) << ',' << format_double(r.sigma) << ',' << format_double(r.arc_mean) << ','
       << r.selected_n << '\n';
  }
}

inline std::vector<FeatureRecord> read_features_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorCode::kParse, "feature CSV is empty");
  require(line == kFeatureHeader, ErrorCode::kParse, "feature CSV header mismatch: '" + line + "'");
  std::vector<FeatureRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto c = split_csv_line(line);
    require(c.size() == 9, ErrorCode::kParse, "feature row must have 9 cells");
    FeatureRecord r;
    r.id = parse_index(c[0]);
    r.source = c[1];
    r.attack = c[2];
    r.eps.num = static_cast<std::int64_t>(parse_index(c[3]));
    r.eps.den = static_cast<std::int64_t>(parse_index(c[4]));
    require(r.eps.den > 0, ErrorCode::kParse, "eps denominator must be positive");
    r.A = parse_double(c[5]);
    r.sigma = parse_double(c[6]);
    r.arc_mean = parse_double(c[7]);
    r.selected_n = parse_index(c[8]);
    require(std::isfinite(r.A) && std::isfinite(r.sigma) && std::isfinite(r.arc_mean), ErrorCode::kParse,
            "non-finite feature value");
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detector bundle: h_1..h_4

struct DetectorTrainingSet {
  SvmConfig config;
  std::vector<Vector> benign;
  std::array<std::vector<Vector>, kNumLevels> adversarial;  // index k-1
};

struct DetectorBundle {
  std::vector<SvmModel> svms;  // ordered k = 1..4
  std::optional<DetectorTrainingSet> training;

  const SvmModel& level(int k) const {
    for (const auto& s : svms)
      if (s.k == k) return s;
    throw Error(ErrorCode::kInvalidArgument, "detector has no SVM for k=" + std::to_string(k));
  }
};

/// h_k trained on benign (label -1) vs eps = 2^k/255 adversarial (label +1).
inline SvmModel train_level(const std::vector<Vector>& benign, const std::vector<Vector>& adversarial, int k,
                            const SvmConfig& cfg) {
  std::vector<Vector> xs = benign;
  std::vector<int> ys(benign.size(), -1);
  xs.insert(xs.end(), adversarial.begin(), adversarial.end());
  ys.insert(ys.end(), adversarial.size(), 1);
  SvmModel m = smo_train(xs, ys, cfg);
  m.k = k;
  return m;
}

inline DetectorBundle train_detector(const DetectorTrainingSet& ts) {
  DetectorBundle b;
  for (int k = 1; k <= kNumLevels; ++k) {
    const auto& adv = ts.adversarial[static_cast<std::size_t>(k - 1)];
    require(!adv.empty(), ErrorCode::kInvalidArgument, "no adversarial features for k=" + std::to_string(k));
    b.svms.push_back(train_level(ts.benign, adv, k, ts.config));
  }
  b.training = ts;
  return b;
}

inline int informed_detect(const SvmModel& model, const Vector& arc_vector) { return model.predict(arc_vector); }

/// 1{k>0} 2^k / 255
inline Fraction eps_for_level(int k) { return k > 0 ? Fraction{std::int64_t{1} << k, 255} : Fraction{0, 255}; }

struct OrdinalResult {
  int k_hat = 0;
  Fraction eps_hat{0, 255};
  bool detected = false;
};

/// k_hat = sum_k h_k(v); detected iff k_hat > 0.
inline OrdinalResult ordinal_detect(const DetectorBundle& b, const Vector& arc_vector) {
  OrdinalResult r;
  for (const auto& s : b.svms) r.k_hat += s.predict(arc_vector);
  r.eps_hat = eps_for_level(r.k_hat);
  r.detected = r.k_hat > 0;
  return r;
}

inline std::size_t correct_label(const Network& net, const Vector& x) { return least_likely_class(net, x); }

enum class AttackType { kPgdLike, kOther };

inline std::string to_string(AttackType t) { return t == AttackType::kPgdLike ? "pgd_like" : "other"; }

inline AttackType recognize_attack_type(const DetectorBundle& b, const Vector& arc_vector) {
  return ordinal_detect(b, arc_vector).detected ? AttackType::kPgdLike : AttackType::kOther;
}

inline bool is_pgd_like_attack(std::string_view name) {
  return name == "bim" || name == "pgd" || name == "mim" || name == "apgd";
}

/// Nearest level for a perturbation budget; 0 for benign inputs.
inline int level_for_eps(const Fraction& eps) {
  if (eps.num == 0) return 0;
  const double k = std::round(std::log2(eps.value() * 255.0));
  return static_cast<int>(std::clamp(k, 1.0, static_cast<double>(kNumLevels)));
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalSample {
  FeatureRecord feature;
  std::optional<std::size_t> true_label;
  std::optional<std::size_t> predicted;
  std::optional<std::size_t> least_likely;
};

struct DetectMode {
  int informed_level = 0;  // 0 = uninformed ordinal regression
};

struct SampleOutcome {
  std::size_t id = 0;
  std::string attack;
  Fraction eps;
  int k_true = 0;
  int k_hat = 0;
  Fraction eps_hat;
  bool detected = false;
  std::optional<std::size_t> corrected_label;
};

struct GroupMetrics {
  std::string attack;
  Fraction eps;
  std::size_t count = 0;
  double detection_rate = 0.0;
  double mae = 0.0;
  std::optional<double> acc;
  std::optional<double> acc_star;
};

struct RocPoint {
  double weight_benign = 1.0;
  double detection_rate = 0.0;
  double false_positive_rate = 0.0;
};

struct DetectionReport {
  std::vector<SampleOutcome> samples;
  std::vector<GroupMetrics> groups;
  double detection_rate = 0.0;
  double false_positive_rate = 0.0;
  double mae = 0.0;
  std::optional<double> acc;
  std::optional<double> acc_star;
  std::optional<double> recognition_accuracy;
  std::size_t num_adversarial = 0;
  std::size_t num_benign = 0;
  std::vector<RocPoint> roc;
};

inline SampleOutcome detect_sample(const DetectorBundle& b, const EvalSample& s, DetectMode mode) {
  SampleOutcome o;
  o.id = s.feature.id;
  o.attack = s.feature.attack;
  o.eps = s.feature.eps;
  o.k_true = level_for_eps(s.feature.eps);
  const Vector v = s.feature.arc_vector();
  if (mode.informed_level > 0) {
    const bool hit = informed_detect(b.level(mode.informed_level), v) == 1;
    o.k_hat = hit ? mode.informed_level : 0;
  } else {
    o.k_hat = ordinal_detect(b, v).k_hat;
  }
  o.eps_hat = eps_for_level(o.k_hat);
  o.detected = o.k_hat > 0;
  if (s.predicted && s.least_likely) o.corrected_label = o.detected ? *s.least_likely : *s.predicted;
  return o;
}

/// DR over eps > 0 samples, FPR over eps = 0 samples, MAE of k_hat over all.
/// Acc / Acc* over perturbed samples whose labels are known. Recognition
/// accuracy averages DR on PGD-like groups and 1 - DR on the others.
inline DetectionReport evaluate(const DetectorBundle& b, const std::vector<EvalSample>& samples,
                                DetectMode mode = {}) {
  require(!samples.empty(), ErrorCode::kInvalidArgument, "evaluation needs samples");
  DetectionReport rep;
  std::map<std::pair<std::string, std::pair<std::int64_t, std::int64_t>>, std::vector<std::size_t>> by_group;
  double abs_err = 0.0;
  std::size_t det_adv = 0, det_benign = 0;
  std::size_t acc_n = 0, acc_hits = 0, acc_star_hits = 0;
  std::size_t pgd_n = 0, pgd_hit = 0, other_n = 0, other_hit = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    SampleOutcome o = detect_sample(b, s, mode);
    abs_err += std::abs(o.k_hat - o.k_true);
    if (s.feature.eps.num == 0) {
      ++rep.num_benign;
      det_benign += o.detected;
    } else {
      ++rep.num_adversarial;
      det_adv += o.detected;
      if (s.true_label && s.predicted && s.least_likely) {
        ++acc_n;
        acc_hits += *s.predicted == *s.true_label;
        acc_star_hits += *o.corrected_label == *s.true_label;
      }
      if (is_pgd_like_attack(s.feature.attack)) {
        ++pgd_n;
        pgd_hit += o.detected;
      } else {
        ++other_n;
        other_hit += !o.detected;
      }
    }
    by_group[{s.feature.attack, {s.feature.eps.num, s.feature.eps.den}}].push_back(i);
    rep.samples.push_back(std::move(o));
  }
  rep.detection_rate = rep.num_adversarial ? static_cast<double>(det_adv) / static_cast<double>(rep.num_adversarial) : 0.0;
  rep.false_positive_rate = rep.num_benign ? static_cast<double>(det_benign) / static_cast<double>(rep.num_benign) : 0.0;
  rep.mae = abs_err / static_cast<double>(samples.size());
  if (acc_n) {
    rep.acc = static_cast<double>(acc_hits) / static_cast<double>(acc_n);
    rep.acc_star = static_cast<double>(acc_star_hits) / static_cast<double>(acc_n);
  }
  if (pgd_n && other_n)
    rep.recognition_accuracy = 0.5 * (static_cast<double>(pgd_hit) / static_cast<double>(pgd_n) +
                                      static_cast<double>(other_hit) / static_cast<double>(other_n));

  for (const auto& [key, idx] : by_group) {
    GroupMetrics g;
    g.attack = key.first;
    g.eps = Fraction{key.second.first, key.second.second};
    g.count = idx.size();
    std::size_t det = 0, n_lab = 0, hit = 0, hit_star = 0;
    double err = 0.0;
    for (std::size_t i : idx) {
      const auto& o = rep.samples[i];
      det += o.detected;
      err += std::abs(o.k_hat - o.k_true);
      const auto& s = samples[i];
      if (s.true_label && o.corrected_label) {
        ++n_lab;
        hit += *s.predicted == *s.true_label;
        hit_star += *o.corrected_label == *s.true_label;
      }
    }
    g.detection_rate = static_cast<double>(det) / static_cast<double>(idx.size());
    g.mae = err / static_cast<double>(idx.size());
    if (n_lab) {
      g.acc = static_cast<double>(hit) / static_cast<double>(n_lab);
      g.acc_star = static_cast<double>(hit_star) / static_cast<double>(n_lab);
    }
    rep.groups.push_back(std::move(g));
  }
  return rep;
}

inline const std::vector<double>& default_benign_weight_grid() {
  static const std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  return grid;
}

/// Retrains the bundle once per benign weight and evaluates it.
inline std::vector<RocPoint> roc_sweep(const DetectorTrainingSet& ts, const std::vector<EvalSample>& samples,
                                       const std::vector<double>& grid = default_benign_weight_grid(),
                                       DetectMode mode = {}) {
  std::vector<RocPoint> pts;
  for (double w : grid) {
    DetectorTrainingSet t = ts;
    t.config.weight_benign = w;
    DetectionReport r = evaluate(train_detector(t), samples, mode);
    pts.push_back({w, r.detection_rate, r.false_positive_rate});
  }
  return pts;
}

// ---------------------------------------------------------------------------
// JSON

inline constexpr int kDetectorFormatVersion = 1;

inline nlohmann::json detector_to_json(const DetectorBundle& b) {
  nlohmann::json j;
  j["version"] = kDetectorFormatVersion;
  j["svms"] = nlohmann::json::array();
  for (const auto& s : b.svms) j["svms"].push_back(svm_to_json(s));
  if (b.training) {
    const auto& t = *b.training;
    nlohmann::json jt;
    jt["C"] = t.config.C;
    jt["gamma"] = t.config.gamma;
    jt["weight_benign"] = t.config.weight_benign;
    jt["tol"] = t.config.tol;
    jt["max_passes"] = t.config.max_passes;
    auto rows = [](const std::vector<Vector>& vs) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& v : vs) a.push_back(v.values());
      return a;
    };
    jt["benign"] = rows(t.benign);
    jt["adversarial"] = nlohmann::json::array();
    for (const auto& lvl : t.adversarial) jt["adversarial"].push_back(rows(lvl));
    j["training"] = jt;
  }
  return j;
}

inline DetectorBundle detector_from_json(const nlohmann::json& j) {
  try {
    require(j.at("version").get<int>() == kDetectorFormatVersion, ErrorCode::kParse,
            "unsupported detector format version");
    DetectorBundle b;
    for (const auto& s : j.at("svms")) b.svms.push_back(svm_from_json(s));
    std::sort(b.svms.begin(), b.svms.end(), [](const SvmModel& a, const SvmModel& c) { return a.k < c.k; });
    if (j.contains("training")) {
      const auto& jt = j.at("training");
      DetectorTrainingSet t;
      t.config.C = jt.at("C").get<double>();
      t.config.gamma = jt.at("gamma").get<double>();
      t.config.weight_benign = jt.at("weight_benign").get<double>();
      t.config.tol = jt.at("tol").get<double>();
      t.config.max_passes = jt.at("max_passes").get<std::size_t>();
      for (const auto& v : jt.at("benign")) t.benign.emplace_back(v.get<std::vector<double>>());
      require(jt.at("adversarial").size() == kNumLevels, ErrorCode::kParse, "training set needs 4 levels");
      for (std::size_t k = 0; k < kNumLevels; ++k)
        for (const auto& v : jt.at("adversarial")[k]) t.adversarial[k].emplace_back(v.get<std::vector<double>>());
      b.training = std::move(t);
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed detector JSON: ") + e.what());
  }
}

inline nlohmann::json report_to_json(const DetectionReport& r) {
  nlohmann::json j;
  j["version"] = 1;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j["aggregate"] = {{"DR", r.detection_rate},
                    {"FPR", r.false_positive_rate},
                    {"MAE", r.mae},
                    {"Acc", opt(r.acc)},
                    {"Acc_star", opt(r.acc_star)},
                    {"recognition_accuracy", opt(r.recognition_accuracy)},
                    {"num_adversarial", r.num_adversarial},
                    {"num_benign", r.num_benign}};
  j["groups"] = nlohmann::json::array();
  for (const auto& g : r.groups)
    j["groups"].push_back({{"attack", g.attack},
                           {"eps", g.eps.str()},
                           {"count", g.count},
                           {"DR", g.detection_rate},
                           {"MAE", g.mae},
                           {"Acc", opt(g.acc)},
                           {"Acc_star", opt(g.acc_star)}});
  j["samples"] = nlohmann::json::array();
  for (const auto& s : r.samples) {
    nlohmann::json js{{"id", s.id},         {"attack", s.attack},       {"eps", s.eps.str()},
                      {"k_true", s.k_true}, {"k_hat", s.k_hat},         {"eps_hat", s.eps_hat.str()},
                      {"detected", s.detected}};
    js["corrected_label"] = s.corrected_label ? nlohmann::json(*s.corrected_label) : nlohmann::json(nullptr);
    j["samples"].push_back(std::move(js));
  }
  j["roc"] = nlohmann::json::array();
  for (const auto& p : r.roc)
    j["roc"].push_back({{"weight_benign", p.weight_benign}, {"DR", p.detection_rate}, {"FPR", p.false_positive_rate}});
  return j;
}

}  // namespace arc
