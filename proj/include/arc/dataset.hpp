#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "arc/csv.hpp"
#include "arc/error.hpp"
#include "arc/linalg.hpp"
#include "arc/network.hpp"
#include "arc/rng.hpp"

namespace arc {

/// Labelled inputs in the [0,1]^M box.
struct Dataset {
  std::vector<Vector> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return inputs.size(); }
  std::size_t dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  bool operator==(const Dataset&) const = default;
};

struct DatasetConfig {
  std::size_t num_classes = 10;
  std::size_t dim = 64;
  std::size_t samples_per_class = 100;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  Dataset train;
  Dataset test;
};

/// Gaussian blobs around per-class prototypes drawn in [0.2,0.8]^M, clipped
/// to [0,1]^M. The test part shares the prototypes and is drawn after the
/// training part, so the training part equals make_dataset(cfg) exactly.
inline DatasetSplit make_dataset_split(const DatasetConfig& cfg, std::size_t test_per_class) {
  require(cfg.num_classes >= 2, ErrorCode::kInvalidArgument, "need at least 2 classes");
  require(cfg.dim >= 2, ErrorCode::kInvalidArgument, "need input dim >= 2");
  require(cfg.samples_per_class >= 1, ErrorCode::kInvalidArgument, "need samples_per_class >= 1");
  require(cfg.noise_std > 0.0 && std::isfinite(cfg.noise_std), ErrorCode::kInvalidArgument,
          "noise_std must be positive");

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> proto_dist(0.2, 0.8);
  std::vector<Vector> protos;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    Vector p(cfg.dim);
    for (double& v : p) v = proto_dist(rng);
    protos.push_back(std::move(p));
  }

  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  auto draw = [&](std::size_t per_class) {
    Dataset d;
    d.num_classes = cfg.num_classes;
    d.seed = cfg.seed;
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
      for (std::size_t i = 0; i < per_class; ++i) {
        Vector x = protos[c];
        for (double& v : x) v += noise(rng);
        d.inputs.push_back(clip(std::move(x), 0.0, 1.0));
        d.labels.push_back(c);
      }
    }
    return d;
  };
  DatasetSplit split;
  split.train = draw(cfg.samples_per_class);
  split.test = draw(test_per_class);
  return split;
}

inline Dataset make_dataset(const DatasetConfig& cfg) { return make_dataset_split(cfg, 0).train; }

inline double accuracy(const Network& net, const Dataset& data) {
  require(data.size() > 0, ErrorCode::kInvalidArgument, "accuracy of empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predicted_class(net, data.inputs[i]) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

/// First `count` samples of each class, preserving order.
inline Dataset take_per_class(const Dataset& data, std::size_t offset, std::size_t count) {
  Dataset out;
  out.num_classes = data.num_classes;
  out.seed = data.seed;
  std::vector<std::size_t> seen(data.num_classes, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t& s = seen[data.labels[i]];
    if (s >= offset && s < offset + count) {
      out.inputs.push_back(data.inputs[i]);
      out.labels.push_back(data.labels[i]);
    }
    ++s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV: header "id,label,x0,...,x{M-1}".

inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
  const std::size_t m = data.dim();
  os << "id,label";
  for (std::size_t j = 0; j < m; ++j) os << ",x" << j;
  os << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    os << i << ',' << data.labels[i];
    for (double v : data.inputs[i]) os << ',' << format_double(v);
    os << '\n';
  }
}

/// num_classes is taken as max(label)+1 unless a larger hint is given.
inline Dataset read_dataset_csv(std::istream& is, std::size_t num_classes_hint = 0) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorCode::kParse, "dataset CSV is empty");
  auto header = split_csv_line(line);
  require(header.size() >= 3 && header[0] == "id" && header[1] == "label", ErrorCode::kParse,
          "dataset CSV header must start with id,label,x0");
  const std::size_t m = header.size() - 2;
  for (std::size_t j = 0; j < m; ++j)
    require(header[j + 2] == "x" + std::to_string(j), ErrorCode::kParse, "bad dataset column name");
  Dataset d;
  std::size_t max_label = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    require(cells.size() == m + 2, ErrorCode::kParse, "dataset row has wrong number of cells");
    Vector x(m);
    for (std::size_t j = 0; j < m; ++j) x[j] = parse_double(cells[j + 2]);
    require(all_finite(x.span()), ErrorCode::kParse, "non-finite dataset value");
    d.labels.push_back(parse_index(cells[1]));
    max_label = std::max(max_label, d.labels.back());
    d.inputs.push_back(std::move(x));
  }
  d.num_classes = std::max(num_classes_hint, d.labels.empty() ? 0 : max_label + 1);
  return d;
}

}  // namespace arc
