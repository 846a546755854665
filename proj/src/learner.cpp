#include "primer/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "primer/error.hpp"

namespace primer {

namespace {

constexpr char kCheckpointMagic[8] = {'P', 'R', 'M', 'R', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void check_batch(const MlpNet& net, const Batch& batch, const Distill* distill) {
  const auto n = batch.features.rows();
  if (n == 0) throw ValidationError("train batch is empty");
  if (batch.features.cols() != net.input_dim()) {
    throw ValidationError("batch feature dim " +
                          std::to_string(batch.features.cols()) +
                          " != net input dim " + std::to_string(net.input_dim()));
  }
  if (static_cast<Eigen::Index>(batch.labels.size()) != n) {
    throw ValidationError("batch has " + std::to_string(batch.labels.size()) +
                          " labels for " + std::to_string(n) + " rows");
  }
  for (int y : batch.labels) {
    if (y < 0 || y >= net.output_dim()) {
      throw ValidationError("label " + std::to_string(y) +
                            " outside output width " +
                            std::to_string(net.output_dim()));
    }
  }
  if (distill != nullptr) {
    if (!(distill->config.temperature > 0.0)) {
      throw ValidationError("distillation temperature must be > 0");
    }
    const double lam = distill->config.lambda;
    if (!(lam >= 0.0 && lam <= 1.0)) {
      throw ValidationError("distillation weight must lie in [0,1]");
    }
    if (distill->teacher_probs.rows() != n ||
        distill->teacher_probs.cols() != net.output_dim()) {
      throw ValidationError("teacher probability shape does not match batch");
    }
  }
}

struct ForwardCache {
  Matrix hidden_pre;  // n x hidden
  Matrix hidden;      // n x hidden, ReLU applied
  Matrix logits;      // n x output
};

ForwardCache forward_cache(const MlpNet& net, const Matrix& x) {
  ForwardCache c;
  c.hidden_pre = (x * net.w1.transpose()).rowwise() + net.b1.transpose();
  c.hidden = c.hidden_pre.cwiseMax(0.0);
  c.logits = (c.hidden * net.w2.transpose()).rowwise() + net.b2.transpose();
  return c;
}

// log(sum_k exp(z_k)) per row, max-subtracted.
Vector row_logsumexp(const Matrix& z) {
  Vector mx = z.rowwise().maxCoeff();
  return mx +
         ((z.colwise() - mx).array().exp().rowwise().sum().log()).matrix();
}

Matrix row_softmax(const Matrix& z) {
  Vector mx = z.rowwise().maxCoeff();
  Matrix e = (z.colwise() - mx).array().exp().matrix();
  Vector sums = e.rowwise().sum();
  return e.array().colwise() / sums.array();
}

// Teacher probabilities resharpened at temperature T: q ~ p^(1/T), rows
// renormalized; exact zeros stay zero.
Matrix soften_teacher(const Matrix& probs, double temperature) {
  Matrix q = probs.array().pow(1.0 / temperature).matrix();
  Vector sums = q.rowwise().sum();
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    if (!(sums(i) > 0.0)) {
      throw ValidationError("teacher probability row " + std::to_string(i) +
                            " does not sum to a positive value");
    }
  }
  return q.array().colwise() / sums.array();
}

double ce_mean(const Matrix& logits, const std::vector<int>& labels) {
  Vector lse = row_logsumexp(logits);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    total += lse(i) - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

// T^2 * CE(q, softmax(z/T)) averaged over rows.
double distill_mean(const Matrix& logits, const Matrix& q, double temperature) {
  Matrix zt = logits / temperature;
  Vector lse = row_logsumexp(zt);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      if (q(i, k) != 0.0) row += q(i, k) * (lse(i) - zt(i, k));
    }
    total += row;
  }
  return temperature * temperature * total / static_cast<double>(logits.rows());
}

MlpGrads backprop(const MlpNet& net, const Matrix& x, const ForwardCache& cache,
                  const Matrix& dlogits) {
  MlpGrads g;
  g.w2 = dlogits.transpose() * cache.hidden;
  g.b2 = dlogits.colwise().sum().transpose();
  Matrix dhidden = dlogits * net.w2;
  dhidden = (cache.hidden_pre.array() > 0.0).select(dhidden, 0.0);
  g.w1 = dhidden.transpose() * x;
  g.b1 = dhidden.colwise().sum().transpose();
  return g;
}

}  // namespace

MlpNet make_mlp(int input_dim, int hidden_dim, int output_dim, Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
    throw ValidationError("network dimensions must be positive");
  }
  MlpNet net;
  net.w1 = Matrix(hidden_dim, input_dim);
  net.w2 = Matrix(output_dim, hidden_dim);
  net.b1 = Vector::Zero(hidden_dim);
  net.b2 = Vector::Zero(output_dim);
  const double l1 = std::sqrt(6.0 / (input_dim + hidden_dim));
  for (int i = 0; i < hidden_dim; ++i) {
    for (int j = 0; j < input_dim; ++j) net.w1(i, j) = rng.uniform(-l1, l1);
  }
  const double l2 = std::sqrt(6.0 / (hidden_dim + output_dim));
  for (int i = 0; i < output_dim; ++i) {
    for (int j = 0; j < hidden_dim; ++j) net.w2(i, j) = rng.uniform(-l2, l2);
  }
  return net;
}

Vector mlp_forward(const MlpNet& net, const Vector& x) {
  if (x.size() != net.input_dim()) {
    throw ValidationError("input dim " + std::to_string(x.size()) +
                          " != net input dim " + std::to_string(net.input_dim()));
  }
  Vector hidden = ((net.w1 * x) + net.b1).cwiseMax(0.0);
  Vector logits = (net.w2 * hidden) + net.b2;
  return softmax(logits);
}

Matrix mlp_forward_batch(const MlpNet& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw ValidationError("input dim " + std::to_string(x.cols()) +
                          " != net input dim " + std::to_string(net.input_dim()));
  }
  return row_softmax(forward_cache(net, x).logits);
}

double mlp_batch_loss(const MlpNet& net, const Batch& batch,
                      const Distill* distill) {
  check_batch(net, batch, distill);
  ForwardCache cache = forward_cache(net, batch.features);
  const bool use_distill = distill != nullptr && distill->config.lambda > 0.0;
  double loss = 0.0;
  const double lam = use_distill ? distill->config.lambda : 0.0;
  if (lam < 1.0) {
    double ce = ce_mean(cache.logits, batch.labels);
    loss += use_distill ? (1.0 - lam) * ce : ce;
  }
  if (use_distill) {
    Matrix q = soften_teacher(distill->teacher_probs, distill->config.temperature);
    loss += lam * distill_mean(cache.logits, q, distill->config.temperature);
  }
  return loss;
}

MlpGrads mlp_gradients(const MlpNet& net, const Batch& batch,
                       const Distill* distill) {
  check_batch(net, batch, distill);
  ForwardCache cache = forward_cache(net, batch.features);
  const auto n = batch.features.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool use_distill = distill != nullptr && distill->config.lambda > 0.0;
  const double lam = use_distill ? distill->config.lambda : 0.0;

  Matrix dlogits = Matrix::Zero(n, net.output_dim());
  if (lam < 1.0) {
    Matrix probs = row_softmax(cache.logits);
    for (Eigen::Index i = 0; i < n; ++i) {
      probs(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
    }
    dlogits += ((1.0 - lam) * inv_n) * probs;
  }
  if (use_distill) {
    const double t = distill->config.temperature;
    Matrix q = soften_teacher(distill->teacher_probs, t);
    Matrix soft = row_softmax(cache.logits / t);
    dlogits += (lam * t * inv_n) * (soft - q);
  }
  return backprop(net, batch.features, cache, dlogits);
}

double train_step(MlpNet& net, const Batch& batch, double lr,
                  const Distill* distill) {
  const double loss = mlp_batch_loss(net, batch, distill);
  if (!std::isfinite(loss)) {
    throw TrainingError("non-finite loss " + std::to_string(loss) +
                        " on a batch of " + std::to_string(batch.features.rows()) +
                        " examples (output width " +
                        std::to_string(net.output_dim()) + ")");
  }
  MlpGrads g = mlp_gradients(net, batch, distill);
  net.w1 -= lr * g.w1;
  net.b1 -= lr * g.b1;
  net.w2 -= lr * g.w2;
  net.b2 -= lr * g.b2;
  if (!net.w1.allFinite() || !net.b1.allFinite() || !net.w2.allFinite() ||
      !net.b2.allFinite()) {
    throw TrainingError("non-finite parameters after an optimizer step (loss " +
                        std::to_string(loss) + ", lr " + std::to_string(lr) + ")");
  }
  return loss;
}

namespace {

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data),
            static_cast<std::streamsize>(bytes));
}

void write_matrix(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      write_raw(out, &v, sizeof(double));
    }
  }
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes,
              const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw FormatError("checkpoint " + path + " is truncated");
  }
}

Matrix read_matrix(std::ifstream& in, Eigen::Index rows, Eigen::Index cols,
                   const std::string& path) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = 0.0;
      read_raw(in, &v, sizeof(double), path);
      m(i, j) = v;
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const MlpNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_raw(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t version = kCheckpointVersion;
  const std::uint32_t reserved = 0;
  write_raw(out, &version, sizeof(version));
  write_raw(out, &reserved, sizeof(reserved));
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(net.input_dim()),
                                 static_cast<std::uint32_t>(net.hidden_dim()),
                                 static_cast<std::uint32_t>(net.output_dim())};
  write_raw(out, dims, sizeof(dims));
  write_matrix(out, net.w1);
  write_matrix(out, net.b1);
  write_matrix(out, net.w2);
  write_matrix(out, net.b2);
  out.flush();
  if (!out) throw IoError("failed writing checkpoint " + path);
}

MlpNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  char magic[8];
  read_raw(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw FormatError("checkpoint " + path + " has a bad magic header");
  }
  std::uint32_t version = 0, reserved = 0;
  read_raw(in, &version, sizeof(version), path);
  read_raw(in, &reserved, sizeof(reserved), path);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint " + path + " has unsupported version " +
                      std::to_string(version));
  }
  std::uint32_t dims[3];
  read_raw(in, dims, sizeof(dims), path);
  const auto input = static_cast<Eigen::Index>(dims[0]);
  const auto hidden = static_cast<Eigen::Index>(dims[1]);
  const auto output = static_cast<Eigen::Index>(dims[2]);
  if (input < 1 || hidden < 1 || output < 1) {
    throw FormatError("checkpoint " + path + " has invalid dimensions");
  }
  MlpNet net;
  net.w1 = read_matrix(in, hidden, input, path);
  net.b1 = read_matrix(in, hidden, 1, path);
  net.w2 = read_matrix(in, output, hidden, path);
  net.b2 = read_matrix(in, output, 1, path);
  char extra = 0;
  if (in.read(&extra, 1); in.gcount() != 0) {
    throw FormatError("checkpoint " + path + " has trailing bytes");
  }
  return net;
}

// ---------------------------------------------------------------------------

std::vector<int> herding_order(const Matrix& features) {
  const auto n = features.rows();
  if (n == 0) throw ValidationError("herding over an empty feature set");
  Vector mean = features.colwise().mean().transpose();
  Vector running = Vector::Zero(features.cols());
  std::vector<int> order;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  order.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index step = 0; step < n; ++step) {
    int pick = -1;
    double pick_dist = 0.0;
    const double inv = 1.0 / static_cast<double>(step + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double d =
          (((running + features.row(i).transpose()) * inv) - mean).norm();
      if (pick < 0 || d < pick_dist) {
        pick = static_cast<int>(i);
        pick_dist = d;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    running += features.row(pick).transpose();
    order.push_back(pick);
  }
  return order;
}

ExemplarMemory::ExemplarMemory(std::optional<int> budget) : budget_(budget) {
  if (budget_ && *budget_ < 0) {
    throw ValidationError("exemplar budget must be >= 0");
  }
}

void ExemplarMemory::add_class(int class_id, const Matrix& features) {
  if (store_.count(class_id) != 0) {
    throw ValidationError("class " + std::to_string(class_id) +
                          " already stored in exemplar memory");
  }
  if (features.rows() == 0) {
    throw ValidationError("no features for class " + std::to_string(class_id));
  }
  if (budget_ && *budget_ == 0) {
    store_.emplace(class_id, Matrix(0, features.cols()));
    return;
  }
  Matrix kept;
  if (budget_ && *budget_ < features.rows()) {
    std::vector<int> order = herding_order(features);
    kept = Matrix(*budget_, features.cols());
    for (int i = 0; i < *budget_; ++i) {
      kept.row(i) = features.row(order[static_cast<std::size_t>(i)]);
    }
  } else {
    kept = features;
  }
  store_.emplace(class_id, std::move(kept));
}

bool ExemplarMemory::has_class(int class_id) const {
  return store_.count(class_id) != 0;
}

const Matrix& ExemplarMemory::exemplars(int class_id) const {
  auto it = store_.find(class_id);
  if (it == store_.end()) {
    throw ValidationError("class " + std::to_string(class_id) +
                          " not in exemplar memory");
  }
  return it->second;
}

std::vector<int> ExemplarMemory::class_ids() const {
  std::vector<int> ids;
  ids.reserve(store_.size());
  for (const auto& [id, _] : store_) ids.push_back(id);
  return ids;
}

int ExemplarMemory::total_count() const {
  int total = 0;
  for (const auto& [_, m] : store_) total += static_cast<int>(m.rows());
  return total;
}

// ---------------------------------------------------------------------------

namespace {

void check_class_data(const ClassData& data, int expect_dim) {
  if (data.features.rows() == 0) {
    throw ValidationError("class " + std::to_string(data.class_id) +
                          " has no training features");
  }
  if (expect_dim >= 0 && data.features.cols() != expect_dim) {
    throw ValidationError("class " + std::to_string(data.class_id) +
                          " feature dim " + std::to_string(data.features.cols()) +
                          " != expected " + std::to_string(expect_dim));
  }
}

void check_train_config(int hidden, double lr, int batch_size, int epochs) {
  if (hidden < 1) throw ValidationError("hidden size must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
}

// Minibatch SGD over (x, labels); per-epoch Fisher-Yates shuffle drives the
// batch order.  When teacher is non-null its probabilities are zero-padded to
// the student's width and fed through the distillation loss.
void fit(MlpNet& net, const Matrix& x, const std::vector<int>& labels,
         const MlpNet* teacher, const DistillConfig* distill_config, int epochs,
         double lr, int batch_size, Rng& rng) {
  const auto n = x.rows();
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(i);
  const bool use_distill =
      teacher != nullptr && distill_config != nullptr && distill_config->lambda > 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(idx);
    for (Eigen::Index start = 0; start < n; start += batch_size) {
      const auto size = std::min<Eigen::Index>(batch_size, n - start);
      Batch batch;
      batch.features = Matrix(size, x.cols());
      batch.labels.resize(static_cast<std::size_t>(size));
      for (Eigen::Index b = 0; b < size; ++b) {
        const int row = idx[static_cast<std::size_t>(start + b)];
        batch.features.row(b) = x.row(row);
        batch.labels[static_cast<std::size_t>(b)] = labels[static_cast<std::size_t>(row)];
      }
      if (use_distill) {
        Distill distill;
        distill.config = *distill_config;
        Matrix teacher_probs = mlp_forward_batch(*teacher, batch.features);
        distill.teacher_probs = Matrix::Zero(size, net.output_dim());
        distill.teacher_probs.leftCols(teacher_probs.cols()) = teacher_probs;
        train_step(net, batch, lr, &distill);
      } else {
        train_step(net, batch, lr);
      }
    }
  }
}

// Distinct deterministic stream per (seed, stage).
Rng stage_rng(std::uint64_t seed, std::uint64_t stage) {
  return Rng(seed ^ (0x9e3779b97f4a7c15ULL * (stage + 1)));
}

// Stacks memory contents (in introduction order) and the new class's data into
// one training set labeled by output-node index.
void gather_rehearsal(const std::vector<int>& known_classes,
                      const ExemplarMemory& memory, const ClassData& new_class,
                      Matrix& x, std::vector<int>& labels) {
  Eigen::Index rows = new_class.features.rows();
  for (std::size_t node = 0; node + 1 < known_classes.size(); ++node) {
    if (memory.has_class(known_classes[node])) {
      rows += memory.exemplars(known_classes[node]).rows();
    }
  }
  x = Matrix(rows, new_class.features.cols());
  labels.clear();
  labels.reserve(static_cast<std::size_t>(rows));
  Eigen::Index at = 0;
  for (std::size_t node = 0; node + 1 < known_classes.size(); ++node) {
    if (!memory.has_class(known_classes[node])) continue;
    const Matrix& m = memory.exemplars(known_classes[node]);
    x.middleRows(at, m.rows()) = m;
    at += m.rows();
    labels.insert(labels.end(), static_cast<std::size_t>(m.rows()),
                  static_cast<int>(node));
  }
  x.middleRows(at, new_class.features.rows()) = new_class.features;
  labels.insert(labels.end(),
                static_cast<std::size_t>(new_class.features.rows()),
                static_cast<int>(known_classes.size()) - 1);
}

}  // namespace

CctModel cct_pretrain(const std::vector<ClassData>& classes,
                      const CctConfig& config) {
  if (classes.size() < 2) {
    throw ValidationError("pretraining needs at least 2 classes, got " +
                          std::to_string(classes.size()));
  }
  if (!(config.tau > 0.0 && config.tau < 1.0)) {
    throw ValidationError("tau must lie in (0,1)");
  }
  check_train_config(config.hidden, config.learning_rate, config.batch_size,
                     config.pretrain_epochs);
  check_class_data(classes[0], -1);
  const int dim = static_cast<int>(classes[0].features.cols());
  Eigen::Index rows = 0;
  for (const auto& c : classes) {
    check_class_data(c, dim);
    rows += c.features.rows();
  }

  CctModel model;
  model.tau = config.tau;
  for (const auto& c : classes) {
    if (std::find(model.known_classes.begin(), model.known_classes.end(),
                  c.class_id) != model.known_classes.end()) {
      throw ValidationError("duplicate class id " + std::to_string(c.class_id));
    }
    model.known_classes.push_back(c.class_id);
  }

  Matrix x(rows, dim);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(rows));
  Eigen::Index at = 0;
  for (std::size_t node = 0; node < classes.size(); ++node) {
    const Matrix& f = classes[node].features;
    x.middleRows(at, f.rows()) = f;
    at += f.rows();
    labels.insert(labels.end(), static_cast<std::size_t>(f.rows()),
                  static_cast<int>(node));
  }

  Rng rng(config.seed);
  model.net = make_mlp(dim, config.hidden,
                       static_cast<int>(classes.size()) + 1, rng);
  fit(model.net, x, labels, nullptr, nullptr, config.pretrain_epochs,
      config.learning_rate, config.batch_size, rng);
  return model;
}

int cct_predict(const CctModel& model, const Vector& x) {
  Vector p = mlp_forward(model.net, x);
  int best = 0;
  for (std::size_t k = 1; k < model.known_classes.size(); ++k) {
    if (p(static_cast<Eigen::Index>(k)) > p(best)) best = static_cast<int>(k);
  }
  if (p(model.unknown_index()) > p(best)) return kUnknownClass;
  if (p(best) < model.tau) return kUnknownClass;
  return model.known_classes[static_cast<std::size_t>(best)];
}

int cct_predict_closed(const CctModel& model, const Vector& x) {
  Vector p = mlp_forward(model.net, x);
  int best = 0;
  for (std::size_t k = 1; k < model.known_classes.size(); ++k) {
    if (p(static_cast<Eigen::Index>(k)) > p(best)) best = static_cast<int>(k);
  }
  return model.known_classes[static_cast<std::size_t>(best)];
}

CctModel cct_increment(CctModel model, const ClassData& new_class,
                       ExemplarMemory& memory, const CctConfig& config) {
  if (std::find(model.known_classes.begin(), model.known_classes.end(),
                new_class.class_id) != model.known_classes.end()) {
    throw ValidationError("class " + std::to_string(new_class.class_id) +
                          " is already known");
  }
  check_class_data(new_class, model.net.input_dim());
  check_train_config(config.hidden, config.learning_rate, config.batch_size,
                     config.increment_epochs);

  // The spare node (last row) becomes the new class's node; a zero row is
  // appended as the fresh spare node.
  const int old_width = model.net.output_dim();
  Matrix w2(old_width + 1, model.net.hidden_dim());
  Vector b2 = Vector::Zero(old_width + 1);
  w2.topRows(old_width) = model.net.w2;
  w2.row(old_width).setZero();
  b2.head(old_width) = model.net.b2;
  if (!config.prime_new_node) {
    w2.row(old_width - 1).setZero();
    b2(old_width - 1) = 0.0;
  }
  model.net.w2 = std::move(w2);
  model.net.b2 = std::move(b2);
  model.known_classes.push_back(new_class.class_id);

  Matrix x;
  std::vector<int> labels;
  gather_rehearsal(model.known_classes, memory, new_class, x, labels);

  Rng rng = stage_rng(config.seed,
                      static_cast<std::uint64_t>(model.known_classes.size()));
  fit(model.net, x, labels, nullptr, nullptr, config.increment_epochs,
      config.learning_rate, config.batch_size, rng);
  memory.add_class(new_class.class_id, new_class.features);
  return model;
}

// ---------------------------------------------------------------------------

IcarlState icarl_init(int budget) {
  if (budget < 1) throw ValidationError("exemplar budget must be >= 1");
  IcarlState state;
  state.memory = ExemplarMemory(budget);
  return state;
}

IcarlState icarl_increment(IcarlState state, const ClassData& new_class) {
  check_class_data(new_class, -1);
  if (std::find(state.known_classes.begin(), state.known_classes.end(),
                new_class.class_id) != state.known_classes.end()) {
    throw ValidationError("class " + std::to_string(new_class.class_id) +
                          " is already known");
  }
  state.memory.add_class(new_class.class_id, new_class.features);
  const Matrix& kept = state.memory.exemplars(new_class.class_id);
  state.class_means[new_class.class_id] = kept.colwise().mean().transpose();
  state.known_classes.push_back(new_class.class_id);
  return state;
}

int icarl_predict(const IcarlState& state, const Vector& x) {
  if (state.class_means.empty()) {
    throw ValidationError("prediction before any class was added");
  }
  int best = -1;
  double best_dist = 0.0;
  for (const auto& [id, mean] : state.class_means) {
    if (mean.size() != x.size()) {
      throw ValidationError("input dim " + std::to_string(x.size()) +
                            " != exemplar dim " + std::to_string(mean.size()));
    }
    const double d = (mean - x).norm();
    if (best < 0 || d < best_dist) {
      best = id;
      best_dist = d;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

EeilState eeil_pretrain(const std::vector<ClassData>& classes,
                        const EeilConfig& config) {
  if (classes.size() < 2) {
    throw ValidationError("pretraining needs at least 2 classes, got " +
                          std::to_string(classes.size()));
  }
  if (!(config.distill.temperature > 0.0)) {
    throw ValidationError("distillation temperature must be > 0");
  }
  if (!(config.distill.lambda >= 0.0 && config.distill.lambda <= 1.0)) {
    throw ValidationError("distillation weight must lie in [0,1]");
  }
  if (config.memory_budget < 0) {
    throw ValidationError("memory budget must be >= 0");
  }
  check_train_config(config.hidden, config.learning_rate, config.batch_size,
                     config.pretrain_epochs);
  check_class_data(classes[0], -1);
  const int dim = static_cast<int>(classes[0].features.cols());
  Eigen::Index rows = 0;
  for (const auto& c : classes) {
    check_class_data(c, dim);
    rows += c.features.rows();
  }

  EeilState state;
  state.memory = ExemplarMemory(config.memory_budget);
  for (const auto& c : classes) {
    if (std::find(state.known_classes.begin(), state.known_classes.end(),
                  c.class_id) != state.known_classes.end()) {
      throw ValidationError("duplicate class id " + std::to_string(c.class_id));
    }
    state.known_classes.push_back(c.class_id);
  }

  Matrix x(rows, dim);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(rows));
  Eigen::Index at = 0;
  for (std::size_t node = 0; node < classes.size(); ++node) {
    const Matrix& f = classes[node].features;
    x.middleRows(at, f.rows()) = f;
    at += f.rows();
    labels.insert(labels.end(), static_cast<std::size_t>(f.rows()),
                  static_cast<int>(node));
  }

  Rng rng(config.seed);
  state.net = make_mlp(dim, config.hidden, static_cast<int>(classes.size()), rng);
  fit(state.net, x, labels, nullptr, nullptr, config.pretrain_epochs,
      config.learning_rate, config.batch_size, rng);
  for (const auto& c : classes) state.memory.add_class(c.class_id, c.features);
  state.pretrained = true;
  return state;
}

EeilState eeil_increment(EeilState state, const ClassData& new_class,
                         const EeilConfig& config) {
  if (!state.pretrained || state.known_classes.empty()) {
    throw ValidationError("increment without a pretrained teacher model");
  }
  if (!(config.distill.temperature > 0.0)) {
    throw ValidationError("distillation temperature must be > 0");
  }
  if (!(config.distill.lambda >= 0.0 && config.distill.lambda <= 1.0)) {
    throw ValidationError("distillation weight must lie in [0,1]");
  }
  if (std::find(state.known_classes.begin(), state.known_classes.end(),
                new_class.class_id) != state.known_classes.end()) {
    throw ValidationError("class " + std::to_string(new_class.class_id) +
                          " is already known");
  }
  check_class_data(new_class, state.net.input_dim());
  check_train_config(config.hidden, config.learning_rate, config.batch_size,
                     config.increment_epochs);

  const MlpNet teacher = state.net;  // frozen pre-increment copy
  const int old_width = state.net.output_dim();
  Matrix w2(old_width + 1, state.net.hidden_dim());
  Vector b2 = Vector::Zero(old_width + 1);
  w2.topRows(old_width) = state.net.w2;
  w2.row(old_width).setZero();
  b2.head(old_width) = state.net.b2;
  state.net.w2 = std::move(w2);
  state.net.b2 = std::move(b2);
  state.known_classes.push_back(new_class.class_id);

  Matrix x;
  std::vector<int> labels;
  gather_rehearsal(state.known_classes, state.memory, new_class, x, labels);

  Rng rng = stage_rng(config.seed,
                      static_cast<std::uint64_t>(state.known_classes.size()));
  fit(state.net, x, labels, &teacher, &config.distill, config.increment_epochs,
      config.learning_rate, config.batch_size, rng);
  state.memory.add_class(new_class.class_id, new_class.features);
  return state;
}

int eeil_predict(const EeilState& state, const Vector& x) {
  Vector p = mlp_forward(state.net, x);
  int best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    if (p(k) > p(best)) best = static_cast<int>(k);
  }
  return state.known_classes[static_cast<std::size_t>(best)];
}

}  // namespace primer
