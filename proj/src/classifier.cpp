#include "wavecomp/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "wavecomp/error.hpp"
#include "wavecomp/layers.hpp"
#include "wavecomp/loss.hpp"

namespace wavecomp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_config(const std::string& what) { throw ClassifierError(ClassifierErrc::BadConfig, what); }

template <typename V>
V parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  V v{};
  if constexpr (std::is_unsigned_v<V>) {
    if (!value.empty() && value[0] == '-') bad_config(key + ": expected a non-negative integer, got '" + value + "'");
  }
  if (!(is >> v) || !(is >> std::ws).eof()) bad_config(key + ": cannot parse '" + value + "'");
  return v;
}

template <typename T>
std::size_t argmax_row(const nn::Tensor<T>& t, std::size_t row) {
  const std::size_t n = t.dim(1);
  const T* p = t.data() + row * n;
  return static_cast<std::size_t>(std::max_element(p, p + n) - p);
}

template <typename T>
void fill_normalized(const CoeffGrid& ll, T* dst) {
  for (std::size_t k = 0; k < ll.data.size(); ++k) dst[k] = static_cast<T>(ll.data[k] / kInputScale);
}

template <typename T>
void fill_normalized(const Image& img, T* dst) {
  for (std::size_t k = 0; k < img.data.size(); ++k) dst[k] = static_cast<T>(img.data[k] / kInputScale);
}

}  // namespace

void TrainConfig::validate(int levels) const {
  if (resolution < 1 || resolution > levels)
    bad_config("resolution " + std::to_string(resolution) + " outside [1, " + std::to_string(levels) + "]");
  if (epochs < 1) bad_config("epochs must be positive");
  if (batch_size < 1) bad_config("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad_config("learning_rate must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) bad_config("train_fraction must be in (0, 1)");
  if (canonical_size < 1) bad_config("canonical_size must be positive");
  if (fc_units < 1) bad_config("fc_units must be positive");
}

TrainConfig parse_train_config(const std::string& text, TrainConfig c) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_config("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "resolution") c.resolution = parse_number<int>(key, value);
    else if (key == "epochs") c.epochs = parse_number<int>(key, value);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "train_fraction") c.train_fraction = parse_number<double>(key, value);
    else if (key == "canonical_size") c.canonical_size = parse_number<std::size_t>(key, value);
    else if (key == "fc_units") c.fc_units = parse_number<std::size_t>(key, value);
    else bad_config("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return c;
}

TrainConfig read_train_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) bad_config("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str(), base);
}

nn::ModelSpec build_model(std::size_t num_classes, Extent input, std::size_t fc_units) {
  using nn::LayerKind;
  using nn::LayerSpec;
  if (num_classes < 2) bad_config("need at least 2 classes");
  if (input.width == 0 || input.height == 0)
    throw NnError(NnErrc::InputTooSmall, "input extent " + std::to_string(input.width) + "x" + std::to_string(input.height));
  nn::ModelSpec spec;
  spec.input_height = input.height;
  spec.input_width = input.width;
  spec.input_channels = 1;
  std::size_t cin = 1, h = input.height, w = input.width;
  for (std::size_t i = 0; i < std::size(kConvFilters); ++i) {
    spec.layers.push_back(LayerSpec::conv(3, cin, kConvFilters[i]));
    spec.layers.push_back(LayerSpec::of(LayerKind::ReLU));
    spec.layers.push_back(LayerSpec::of(LayerKind::MaxPool2x2));
    spec.layers.push_back(LayerSpec::dropout(kConvDropout[i]));
    cin = kConvFilters[i];
    h = (h + 1) / 2;
    w = (w + 1) / 2;
  }
  spec.layers.push_back(LayerSpec::of(LayerKind::Flatten));
  spec.layers.push_back(LayerSpec::dense(h * w * cin, fc_units));
  spec.layers.push_back(LayerSpec::of(LayerKind::ReLU));
  spec.layers.push_back(LayerSpec::dense(fc_units, num_classes));
  spec.layers.push_back(LayerSpec::of(LayerKind::Softmax));
  spec.shape_flow();
  return spec;
}

template <typename T>
Dataset<T> load_split(const LabeledCorpus& corpus, Split split, ResolutionLevel r) {
  const auto idx = corpus.indices(split);
  Batch<T> b = load_batch<T>(corpus, idx, r);
  Dataset<T> d;
  d.inputs = std::move(b.inputs);
  d.labels = std::move(b.classes);
  d.classes = corpus.class_count();
  return d;
}

template <typename T>
Batch<T> gather(const Dataset<T>& data, std::span<const std::size_t> indices) {
  const std::size_t h = data.inputs.dim(1), w = data.inputs.dim(2), c = data.inputs.dim(3);
  const std::size_t per = h * w * c;
  Batch<T> b;
  b.inputs = nn::Tensor<T>({indices.size(), h, w, c});
  b.labels = nn::Tensor<T>({indices.size(), data.classes});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t s = indices[i];
    std::copy_n(data.inputs.data() + s * per, per, b.inputs.data() + i * per);
    b.labels[i * data.classes + static_cast<std::size_t>(data.labels[s])] = T{1};
    b.classes.push_back(data.labels[s]);
  }
  return b;
}

template <typename T>
std::pair<double, double> score(nn::Model<T>& model, const Dataset<T>& data, std::size_t batch_size) {
  if (data.size() == 0) return {0.0, 0.0};
  double loss = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    idx.clear();
    for (std::size_t i = start; i < std::min(data.size(), start + batch_size); ++i) idx.push_back(i);
    const Batch<T> b = gather(data, idx);
    const auto probs = model.predict(b.inputs);
    loss += nn::cross_entropy(b.labels, probs) * static_cast<double>(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (argmax_row(probs, i) == static_cast<std::size_t>(b.classes[i])) ++correct;
  }
  const auto n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(correct) / n};
}

template <typename T>
TrainResult<T> train_model(const Dataset<T>& train, const Dataset<T>& val, const nn::ModelSpec& spec,
                           const TrainConfig& config, const EpochCallback& on_epoch) {
  if (train.size() == 0) bad_config("empty training split");
  if (config.epochs < 1 || config.batch_size < 1) bad_config("epochs and batch_size must be positive");
  if (train.inputs.dim(1) != spec.input_height || train.inputs.dim(2) != spec.input_width)
    throw ClassifierError(ClassifierErrc::GeometryMismatch, "training inputs do not match the model input");

  nn::Model<T> model(spec, mix_seed(config.seed, 1));
  model.seed_dropout(mix_seed(config.seed, 2));
  nn::AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  nn::Adam<T> adam(ac);
  const auto params = model.params();

  TrainResult<T> result{model, {}, 0};
  double best_acc = -1.0, best_loss = 0.0;
  std::vector<std::size_t> order(train.size());
  std::vector<std::size_t> idx;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    wavecomp::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
      const Batch<T> b = gather(train, idx);
      nn::Tensor<T> logits;
      try {
        logits = model.forward(b.inputs, nn::Mode::Train);
      } catch (const NnError& e) {
        if (e.code() != NnErrc::NonFinite) throw;
        throw ClassifierError(ClassifierErrc::NonFiniteLoss, "epoch " + std::to_string(epoch) + ": " + e.what());
      }
      const auto probs = nn::softmax(logits);
      const double loss = nn::cross_entropy(b.labels, probs);
      if (!std::isfinite(loss))
        throw ClassifierError(ClassifierErrc::NonFiniteLoss, "epoch " + std::to_string(epoch) + ": loss is not finite");
      loss_sum += loss * static_cast<double>(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        if (argmax_row(probs, i) == static_cast<std::size_t>(b.classes[i])) ++correct;
      model.zero_grad();
      model.backward(nn::cross_entropy_logits_grad(b.labels, logits));
      adam.step(params);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    std::tie(rec.val_loss, rec.val_accuracy) = score(model, val);
    if (!std::isfinite(rec.val_loss))
      throw ClassifierError(ClassifierErrc::NonFiniteLoss, "epoch " + std::to_string(epoch) + ": validation loss is not finite");
    result.history.push_back(rec);
    if (rec.val_accuracy > best_acc || (rec.val_accuracy == best_acc && rec.val_loss < best_loss)) {
      best_acc = rec.val_accuracy;
      best_loss = rec.val_loss;
      result.model = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

template <typename T>
TrainResult<T> train(const LabeledCorpus& corpus_in, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate(corpus_in.levels);
  const LabeledCorpus corpus = config.train_fraction == corpus_in.train_fraction
                                   ? corpus_in
                                   : split_corpus(corpus_in, config.train_fraction, corpus_in.seed);
  const ResolutionLevel r(config.resolution);
  const Dataset<T> tr = load_split<T>(corpus, Split::Train, r);
  const Dataset<T> va = load_split<T>(corpus, Split::Val, r);
  const Extent in = resolution_extent({corpus.width, corpus.height}, corpus.levels, r);
  const auto spec = build_model(corpus.class_count(), in, config.fc_units);
  return train_model(tr, va, spec, config, on_epoch);
}

template <typename T>
Evaluation evaluate(nn::Model<T>& model, const LabeledCorpus& corpus, std::span<const std::size_t> indices,
                    std::optional<ResolutionLevel> resolution, std::size_t batch_size) {
  if (batch_size < 1) bad_config("batch_size must be positive");
  const std::size_t classes = corpus.class_count();
  if (model.spec().output_units() != classes)
    throw ClassifierError(ClassifierErrc::GeometryMismatch, "model has " + std::to_string(model.spec().output_units()) +
                                                                " outputs, corpus has " + std::to_string(classes) + " classes");
  std::vector<std::vector<std::uint8_t>> streams;
  streams.reserve(indices.size());
  for (auto i : indices) streams.push_back(read_stream_file(corpus.stream_path(i)));

  const std::size_t h = model.spec().input_height, w = model.spec().input_width;
  Evaluation ev;
  ev.confusion = ConfusionMatrix(classes, corpus.classes);
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t n = std::min(indices.size(), start + batch_size) - start;
    nn::Tensor<T> x({n, h, w, 1});
    auto t0 = Clock::now();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = streams[start + i];
      std::size_t gw = 0, gh = 0;
      if (resolution) {
        const PartialDecode p = decode_partial(s, *resolution);
        gw = p.ll.width;
        gh = p.ll.height;
        if (gw == w && gh == h) fill_normalized(p.ll, x.data() + i * h * w);
      } else {
        const Image img = decode_full(s);
        gw = img.width;
        gh = img.height;
        if (gw == w && gh == h) fill_normalized(img, x.data() + i * h * w);
      }
      if (gw != w || gh != h)
        throw ClassifierError(ClassifierErrc::GeometryMismatch,
                              corpus.entries[indices[start + i]].path.string() + " decodes to " + std::to_string(gw) + "x" +
                                  std::to_string(gh) + ", model expects " + std::to_string(w) + "x" + std::to_string(h));
    }
    ev.dt_seconds += seconds_since(t0);
    t0 = Clock::now();
    const auto probs = model.predict(x);
    ev.clt_seconds += seconds_since(t0);
    for (std::size_t i = 0; i < n; ++i)
      ev.confusion.add(static_cast<std::size_t>(corpus.entries[indices[start + i]].class_index), argmax_row(probs, i));
  }
  ev.ct_seconds = ev.dt_seconds + ev.clt_seconds;
  return ev;
}

Evaluation evaluate_checkpoint(const std::filesystem::path& checkpoint, const LabeledCorpus& corpus, Split split) {
  auto ck = nn::load_checkpoint<float>(checkpoint);
  if (ck.meta.levels != corpus.levels || ck.meta.classes != corpus.classes)
    throw ClassifierError(ClassifierErrc::GeometryMismatch, "checkpoint was trained on a different corpus layout");
  std::optional<ResolutionLevel> r;
  if (ck.meta.resolution > 0) r = ResolutionLevel(ck.meta.resolution);
  const auto idx = corpus.indices(split);
  return evaluate(ck.model, corpus, idx, r);
}

std::string epoch_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,train_acc,train_loss,val_acc,val_loss\n";
  for (const auto& r : history)
    os << r.epoch << ',' << r.train_accuracy << ',' << r.train_loss << ',' << r.val_accuracy << ',' << r.val_loss << '\n';
  return os.str();
}

#define WAVECOMP_INSTANTIATE(T)                                                                                    \
  template Dataset<T> load_split(const LabeledCorpus&, Split, ResolutionLevel);                                   \
  template Batch<T> gather(const Dataset<T>&, std::span<const std::size_t>);                                      \
  template std::pair<double, double> score(nn::Model<T>&, const Dataset<T>&, std::size_t);                        \
  template TrainResult<T> train_model(const Dataset<T>&, const Dataset<T>&, const nn::ModelSpec&,                 \
                                      const TrainConfig&, const EpochCallback&);                                  \
  template TrainResult<T> train(const LabeledCorpus&, const TrainConfig&, const EpochCallback&);                  \
  template Evaluation evaluate(nn::Model<T>&, const LabeledCorpus&, std::span<const std::size_t>,                 \
                               std::optional<ResolutionLevel>, std::size_t);

WAVECOMP_INSTANTIATE(float)
WAVECOMP_INSTANTIATE(double)

}  // namespace wavecomp
