#pragma once

#include "bandgen/graph.hpp"
#include "bandgen/ordering.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bandgen {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// BwR: row width from the C-M bandwidth. Baseline: row width from a high
/// percentile of random-BFS bandwidths.
enum class WidthMode { BwR, Baseline };

WidthMode parse_width_mode(const std::string& s);
const char* to_string(WidthMode m) noexcept;

struct ModelConfig {
    int row_width = 2; // columns per step including the indicator column
    int hidden = 32;
    int gru_layers = 1;
    int mlp_hidden = 32;
    double lr = 3e-3;
    double weight_decay = 0.0;
    int epochs = 100;
    int batches_per_epoch = 30;
    int val_batches = 9;
    int batch_size = 32;
    double temperature = 1.0;
    int max_nodes = 1000;
    std::uint64_t seed = 0;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Input MLP -> stacked GRU -> output MLP. Gate blocks in the GRU matrices
/// are stacked [reset; update; candidate].
struct ModelParams {
    struct GruLayer {
        Matrix w_ih, w_hh; // 3h x in, 3h x h
        Matrix b_ih, b_hh; // 3h x 1
    };

    Matrix in1_w, in1_b, bn1_gamma, bn1_beta, in2_w, in2_b;
    std::vector<GruLayer> gru;
    Matrix out1_w, out1_b, bn2_gamma, bn2_beta, out2_w, out2_b;

    // Batch-norm running statistics (not trained).
    Matrix bn1_mean, bn1_var, bn2_mean, bn2_var;

    /// PyTorch-style uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
    static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);
    /// Same shapes, every trainable tensor zero, running stats at (0, 1).
    static ModelParams zeros(const ModelConfig& cfg);

    /// Trainable tensors in a fixed order with stable names.
    std::vector<std::pair<std::string, Matrix*>> tensors();
    std::vector<std::pair<std::string, const Matrix*>> tensors() const;
    std::vector<std::pair<std::string, Matrix*>> buffers();
    std::vector<std::pair<std::string, const Matrix*>> buffers() const;

    ModelParams zeros_like() const;
    bool all_finite() const;
    int input_width() const { return static_cast<int>(in1_w.cols()); }
};

/// Variable-length sequences packed time-major, longest first; at step t the
/// first batch_sizes[t] sequences are active.
struct PackedBatch {
    int width = 0;
    std::vector<int> lengths;      // predicted rows per sequence, sorted descending
    std::vector<int> source_index; // position of each sorted sequence in the input list
    std::vector<int> batch_sizes;
    std::vector<int> offsets;
    Matrix inputs;  // R x width
    Matrix targets; // R x width

    int rows() const { return static_cast<int>(inputs.rows()); }
};

/// Inputs are rows 0..n of each sequence, targets rows 1..n+1.
PackedBatch pack_sequences(const std::vector<const TrainSequence*>& seqs);
PackedBatch pack_sequences(const std::vector<TrainSequence>& seqs);

enum class NormMode { Train, Eval };

/// Activations kept for the backward pass.
struct ForwardCache {
    NormMode mode = NormMode::Eval;
    Matrix a1, xhat1, y1, h1, x1;
    RowVector mean1, invstd1;
    std::vector<Matrix> layer_in, layer_out, r, z, n, ghn;
    Matrix a2, xhat2, y2, h2;
    RowVector mean2, invstd2;
    Matrix logits;
};

/// Teacher-forced pass over a packed batch. In Train mode batch-norm uses the
/// statistics of all packed rows; `update_running` then folds them into the
/// running averages.
Matrix forward(ModelParams& params, const PackedBatch& batch, NormMode mode, ForwardCache* cache = nullptr,
               bool update_running = false, double momentum = 0.1, double eps = 1e-5);

/// Mean binary cross entropy with logits over every entry.
double loss_bce(const Matrix& logits, const Matrix& targets);
/// Summed BCE; equal to minus the Bernoulli log-likelihood.
double sum_bce(const Matrix& logits, const Matrix& targets);

/// Gradient of loss_bce with respect to every trainable tensor.
ModelParams backward(const ModelParams& params, const PackedBatch& batch, const ForwardCache& cache,
                     double eps = 1e-5);

/// Recurrent state for step-by-step generation in Eval mode.
class Stepper {
public:
    explicit Stepper(const ModelParams& params, double eps = 1e-5);
    /// Logits for the row following `row`.
    RowVector step(const RowVector& row);

private:
    const ModelParams& params_;
    double eps_;
    std::vector<RowVector> hidden_;
};

struct AdamW {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    ModelParams m, v;

    explicit AdamW(const ModelParams& like) : m(like.zeros_like()), v(like.zeros_like()) {}
    void update(ModelParams& params, const ModelParams& grad, double lr, double weight_decay);
};

/// Cosine annealing from base_lr at step 0 to 0 at the last step.
double cosine_lr(double base_lr, long step, long total_steps);

struct EpochRecord {
    int epoch = 0;
    double train_bce = 0.0;
    double val_bce = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
};

/// Ordering family used by a width mode: random-tie C-M for BwR, random BFS
/// for the baseline.
OrderingConfig mode_ordering(WidthMode mode, std::uint64_t seed);

inline constexpr int kOrderingRedraws = 16;

/// First seeded ordering (of up to kOrderingRedraws draws) whose bandwidth
/// fits `width`; throws BandOverflowError when none does.
Ordering fitting_ordering(const Graph& g, WidthMode mode, std::uint64_t seed, int width);

TrainSequence graph_sequence(const Graph& g, const Ordering& o, int width);

struct WidthEstimate {
    int row_width = 0;
    int band = 0;
    std::vector<int> samples;
};

/// BwR: 1 + max C-M bandwidth. Baseline: 1 + 99.9th percentile (nearest
/// rank) of `bfs_samples` random-BFS bandwidths allocated round-robin.
WidthEstimate estimate_row_width(const std::vector<Graph>& graphs, WidthMode mode, std::uint64_t seed,
                                 int bfs_samples = 100000);

TrainResult train(const ModelParams& init, const ModelConfig& cfg, const std::vector<Graph>& train_graphs,
                  const std::vector<Graph>& val_graphs, WidthMode mode, std::uint64_t ordering_seed);

/// Autoregressive sampling with p = sigmoid(logit / temperature); generation
/// stops once the indicator entry fires or max_nodes rows exist.
Graph sample_graph(const ModelParams& params, const ModelConfig& cfg, std::uint64_t seed);
std::vector<Graph> sample(const ModelParams& params, const ModelConfig& cfg, int count, std::uint64_t seed);

/// Teacher-forced log-likelihood of one graph under one seeded ordering.
double log_likelihood(const ModelParams& params, const ModelConfig& cfg, const Graph& g, WidthMode mode,
                      std::uint64_t seed);

/// Teacher-forced probabilities and targets for one graph.
struct Reconstruction {
    std::vector<double> probs;
    std::vector<std::uint8_t> targets;
};
Reconstruction reconstruct(const ModelParams& params, const ModelConfig& cfg, const Graph& g, WidthMode mode,
                           std::uint64_t seed);

/// Micro-averaged average precision over every predicted entry of every graph.
double reconstruction_auprc(const ModelParams& params, const ModelConfig& cfg, const std::vector<Graph>& graphs,
                            WidthMode mode, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Hyperparameter search
// ---------------------------------------------------------------------------

struct SearchSpace {
    double lr_lo = 1e-4, lr_hi = 1e-2;
    double wd_lo = 1e-5, wd_hi = 1e-1;
};

struct Trial {
    double lr = 0.0;
    double weight_decay = 0.0;
    double objective = 0.0;
};

struct SearchResult {
    Trial best;
    std::vector<Trial> trials;
};

/// Log-uniform random search minimising the objective.
SearchResult random_search(const SearchSpace& space, int trials, std::uint64_t seed,
                           const std::function<double(double lr, double weight_decay)>& objective);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct Checkpoint {
    ModelConfig config;
    WidthMode mode = WidthMode::BwR;
    std::uint64_t ordering_seed = 0;
    ModelParams params;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    std::string config_hash;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

} // namespace bandgen
