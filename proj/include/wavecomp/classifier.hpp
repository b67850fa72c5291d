#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavecomp/archive.hpp"
#include "wavecomp/metrics.hpp"
#include "wavecomp/model.hpp"

namespace wavecomp {

inline constexpr std::size_t kDefaultFcUnits = 512;
inline constexpr std::size_t kConvFilters[] = {16, 32, 64, 128, 256};
inline constexpr double kConvDropout[] = {0.10, 0.15, 0.20, 0.25, 0.30};

struct TrainConfig {
  int resolution = 3;
  int epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;   // re-splits the corpus when it differs
  std::size_t canonical_size = 256;
  std::size_t fc_units = kDefaultFcUnits;

  // Throws ClassifierError(BadConfig) naming the offending field.
  void validate(int levels) const;
};

// key = value lines; '#' starts a comment. Keys match the field names.
TrainConfig parse_train_config(const std::string& text, TrainConfig base = {});
TrainConfig read_train_config(const std::filesystem::path& path, TrainConfig base = {});

struct EpochRecord {
  int epoch = 0;
  double train_accuracy = 0.0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_loss = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

// Five conv blocks (3x3, 16..256 filters, ReLU, 2x2 max-pool, dropout
// 0.10..0.30), flatten, FC(fc_units) + ReLU, FC(classes), softmax.
nn::ModelSpec build_model(std::size_t num_classes, Extent input, std::size_t fc_units = kDefaultFcUnits);

// Normalized LL tensors of one split, decoded once.
template <typename T>
struct Dataset {
  nn::Tensor<T> inputs;  // (N, H, W, 1)
  std::vector<int> labels;
  std::size_t classes = 0;
  std::size_t size() const { return labels.size(); }
};

template <typename T>
Dataset<T> load_split(const LabeledCorpus& corpus, Split split, ResolutionLevel r);

// Rows of `data` selected by `indices`, with one-hot labels.
template <typename T>
Batch<T> gather(const Dataset<T>& data, std::span<const std::size_t> indices);

template <typename T>
struct TrainResult {
  nn::Model<T> model;  // best by validation accuracy, ties by lower loss
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

template <typename T>
TrainResult<T> train_model(const Dataset<T>& train, const Dataset<T>& val, const nn::ModelSpec& spec,
                           const TrainConfig& config, const EpochCallback& on_epoch = {});

template <typename T>
TrainResult<T> train(const LabeledCorpus& corpus, const TrainConfig& config, const EpochCallback& on_epoch = {});

// Loss and accuracy of an eval-mode pass.
template <typename T>
std::pair<double, double> score(nn::Model<T>& model, const Dataset<T>& data, std::size_t batch_size = 32);

struct Evaluation {
  ConfusionMatrix confusion{0};
  double dt_seconds = 0.0;   // decode time only
  double clt_seconds = 0.0;  // forward passes only
  double ct_seconds = 0.0;   // dt + clt
};

// `resolution` empty = full decompression. Streams are read into memory
// before timing starts.
template <typename T>
Evaluation evaluate(nn::Model<T>& model, const LabeledCorpus& corpus, std::span<const std::size_t> indices,
                    std::optional<ResolutionLevel> resolution, std::size_t batch_size = 32);

Evaluation evaluate_checkpoint(const std::filesystem::path& checkpoint, const LabeledCorpus& corpus, Split split);

// epoch,train_acc,train_loss,val_acc,val_loss
std::string epoch_csv(const std::vector<EpochRecord>& history);

}  // namespace wavecomp
