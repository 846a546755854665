#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "primer/rng.hpp"
#include "primer/types.hpp"

namespace primer {

/// Sentinel returned by open-set prediction when no known class is confident.
inline constexpr int kUnknownClass = -1;

// ---------------------------------------------------------------------------
// Network core: input -> hidden (ReLU) -> output (softmax), double precision.

struct MlpNet {
  Matrix w1;  // hidden x input
  Vector b1;  // hidden
  Matrix w2;  // output x hidden
  Vector b2;  // output

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }
};

/// Uniform Glorot init for weights (row-major fill order), zero biases.
MlpNet make_mlp(int input_dim, int hidden_dim, int output_dim, Rng& rng);

/// Probabilities for one input; stabilized softmax over the logits.
Vector mlp_forward(const MlpNet& net, const Vector& x);

/// Row-per-example probabilities.
Matrix mlp_forward_batch(const MlpNet& net, const Matrix& x);

struct Batch {
  Matrix features;          // n x input_dim
  std::vector<int> labels;  // n, each in [0, output_dim)
};

struct DistillConfig {
  double temperature = 2.0;
  double lambda = 0.5;  // weight on the distillation term, in [0,1]
};

/// Teacher targets for distillation; rows align with the batch, columns with
/// the student's output width (absent teacher outputs padded with zeros).
struct Distill {
  Matrix teacher_probs;
  DistillConfig config;
};

struct MlpGrads {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

/// Mean loss over the batch: (1-lambda)*CE + lambda*T^2*CE(teacher soft,
/// student soft) when distill is given, plain cross-entropy otherwise.
/// lambda == 0 takes the plain-CE path exactly.
double mlp_batch_loss(const MlpNet& net, const Batch& batch,
                      const Distill* distill = nullptr);

/// Analytic gradients of mlp_batch_loss at the current parameters.
MlpGrads mlp_gradients(const MlpNet& net, const Batch& batch,
                       const Distill* distill = nullptr);

/// One SGD step (params -= lr * grad); returns the pre-step loss.
double train_step(MlpNet& net, const Batch& batch, double lr,
                  const Distill* distill = nullptr);

/// Flat binary round-trip: 16-byte header (magic "PRMRNET\0", u32 version,
/// u32 reserved), three u32 dims, then row-major doubles for w1, b1, w2, b2.
void save_checkpoint(const MlpNet& net, const std::string& path);
MlpNet load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Exemplar memory and herding.

/// Greedy herding order: repeatedly pick the row whose inclusion brings the
/// running exemplar mean closest to the full-set mean; ties -> lowest index.
std::vector<int> herding_order(const Matrix& features);

class ExemplarMemory {
 public:
  /// No budget means unlimited retention; budget 0 stores nothing.
  explicit ExemplarMemory(std::optional<int> budget = std::nullopt);

  /// Stores (up to budget) rows for a new class, chosen by herding order.
  void add_class(int class_id, const Matrix& features);

  bool has_class(int class_id) const;
  const Matrix& exemplars(int class_id) const;
  std::vector<int> class_ids() const;  // ascending
  std::optional<int> budget() const { return budget_; }
  int total_count() const;

 private:
  std::optional<int> budget_;
  std::map<int, Matrix> store_;
};

/// One class's training features (rows are documents).
struct ClassData {
  int class_id = -1;
  Matrix features;
};

// ---------------------------------------------------------------------------
// CCT: confidence-threshold open-set classifier whose spare output node is
// converted into each newly added class's node.

struct CctConfig {
  int hidden = 64;
  double tau = 0.5;  // confidence threshold, in (0,1)
  int pretrain_epochs = 40;
  int increment_epochs = 20;
  double learning_rate = 0.05;
  int batch_size = 32;
  bool prime_new_node = true;  // reuse the spare node's weights for new classes
  std::uint64_t seed = 1;
};

struct CctModel {
  MlpNet net;
  std::vector<int> known_classes;  // introduction order
  double tau = 0.5;

  int unknown_index() const { return static_cast<int>(known_classes.size()); }
  int output_width() const { return static_cast<int>(known_classes.size()) + 1; }
};

/// Trains an initial model on >= 2 classes; the extra output node gets no
/// positive examples and stays reserved for unknown inputs.
CctModel cct_pretrain(const std::vector<ClassData>& classes,
                      const CctConfig& config);

/// Open-set rule: best known class unless the spare node out-scores it or the
/// best known probability falls below tau; then kUnknownClass.
int cct_predict(const CctModel& model, const Vector& x);

/// Closed-set rule: best known class, ignoring the spare node.
int cct_predict_closed(const CctModel& model, const Vector& x);

/// Converts the spare node into the new class's node (weights retained as its
/// initialization unless config.prime_new_node is off), appends a fresh
/// zero-initialized spare node, and retrains on memory plus the new data.
/// The new class is added to memory afterwards.
CctModel cct_increment(CctModel model, const ClassData& new_class,
                       ExemplarMemory& memory, const CctConfig& config);

// ---------------------------------------------------------------------------
// iCaRL (simplified to a fixed feature space): herding exemplars +
// nearest-mean-of-exemplars classification.

struct IcarlState {
  ExemplarMemory memory;
  std::map<int, Vector> class_means;  // exemplar means
  std::vector<int> known_classes;     // introduction order

  IcarlState() : memory(std::nullopt) {}
};

/// budget: exemplars kept per class, >= 1.
IcarlState icarl_init(int budget);

IcarlState icarl_increment(IcarlState state, const ClassData& new_class);

/// Nearest exemplar-mean class; ties -> lowest class id.
int icarl_predict(const IcarlState& state, const Vector& x);

// ---------------------------------------------------------------------------
// EEIL (simplified): rehearsal + distillation against the frozen pre-increment
// network.

struct EeilConfig {
  int hidden = 64;
  int pretrain_epochs = 40;
  int increment_epochs = 20;
  double learning_rate = 0.05;
  int batch_size = 32;
  int memory_budget = 20;  // exemplars per class
  DistillConfig distill;
  std::uint64_t seed = 1;
};

struct EeilState {
  MlpNet net;
  std::vector<int> known_classes;  // introduction order
  ExemplarMemory memory;
  bool pretrained = false;

  EeilState() : memory(std::nullopt) {}
};

EeilState eeil_pretrain(const std::vector<ClassData>& classes,
                        const EeilConfig& config);

/// Appends a zero-initialized output node for the new class and trains on
/// memory plus new data with the combined CE + distillation loss; the teacher
/// is the frozen pre-increment network (its probabilities zero-padded to the
/// widened output).
EeilState eeil_increment(EeilState state, const ClassData& new_class,
                         const EeilConfig& config);

int eeil_predict(const EeilState& state, const Vector& x);

}  // namespace primer
