#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "earlyguard/hyperconfig.hpp"
#include "earlyguard/normalizer.hpp"
#include "earlyguard/trace.hpp"

namespace earlyguard {

/// Shape and position of one parameter tensor inside the flat parameter
/// vector. Declared order: for each layer, for each direction, the input
/// weights W_z W_r W_h (n x d_in), the recurrence weights U_z U_r U_h
/// (n x n), the biases b_z b_r b_h (n); finally the output head w (1 x D)
/// and b (1 x 1), D = directions * hidden.
struct TensorDesc {
    std::string name;
    int layer = -1;      // -1 for the head
    int direction = -1;  // 0 forward, 1 backward, -1 head
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Eigen::Index offset = 0;
    bool is_bias = false;

    Eigen::Index size() const { return rows * cols; }
};

std::vector<TensorDesc> tensor_layout(const HyperConfig& config, int input_dim = kNumFeatures);

/// Closed-form trainable parameter count:
/// sum over layers and directions of 3*(n*d_in + n*n + n), plus D+1 for the
/// head, with d_in = input_dim for layer 0 and hidden*directions above.
Eigen::Index parameter_count(const HyperConfig& config, int input_dim = kNumFeatures);

/// A stacked (optionally bidirectional) GRU binary classifier. Parameters
/// live in one flat vector addressed through `layout`; gate matrices are
/// Eigen maps into it. Immutable after training; safe to share across
/// threads for scoring.
struct GruNetwork {
    HyperConfig config;
    int input_dim = kNumFeatures;
    std::vector<TensorDesc> layout;
    Eigen::VectorXd params;
    std::optional<Normalizer> normalizer;  // attached by train()
    std::uint64_t init_seed = 0;
    std::uint64_t train_seed = 0;
    bool trained = false;

    int directions() const { return config.bidirectional ? 2 : 1; }
    int head_width() const { return directions() * config.hidden_neurons; }
    Eigen::Index parameter_count() const { return params.size(); }

    Eigen::Map<const Eigen::MatrixXd> view(const TensorDesc& d) const {
        return {params.data() + d.offset, d.rows, d.cols};
    }
    Eigen::Map<Eigen::MatrixXd> view(const TensorDesc& d) {
        return {params.data() + d.offset, d.rows, d.cols};
    }

    // Tensor lookup; gate index g: 0..2 = W_z W_r W_h, 3..5 = U_z U_r U_h,
    // 6..8 = b_z b_r b_h.
    const TensorDesc& gate_desc(int layer, int direction, int g) const;
    const TensorDesc& head_w_desc() const { return layout[layout.size() - 2]; }
    const TensorDesc& head_b_desc() const { return layout[layout.size() - 1]; }
};

/// Fresh network with weights uniform in +-sqrt(6/(fan_in+fan_out)) per
/// matrix and zero biases; deterministic in (config, seed).
GruNetwork init_params(const HyperConfig& config, std::uint64_t seed, int input_dim = kNumFeatures);

/// Per-sample activation record kept for backpropagation through time.
struct LayerDirCache {
    Eigen::MatrixXd Z, R, Hc, H;  // hidden x T; column t = gate/state at second t
};

struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;                  // per layer: consumed input (d_in x T)
    std::vector<std::array<LayerDirCache, 2>> dirs;       // per layer
    std::vector<Eigen::MatrixXd> masks;                   // per layer: scaled dropout mask, empty = identity
    Eigen::MatrixXd top_output;                           // post-dropout top layer output (D x T)
    Eigen::VectorXd feature;                              // concatenated final states (D)
    double logit = 0.0;
    double score = 0.0;
};

/// Runs the recurrence over a standardized sequence and returns the sigmoid
/// score in (0,1). Sequences shorter than 2 snapshots are rejected: a single
/// snapshot carries no sequential information. Inverted dropout is applied to
/// each layer's output (and therefore ahead of the head) only when
/// training_mode is set; inference ignores dropout_seed entirely.
/// Non-finite intermediate states raise ExperimentError naming the layer,
/// direction and timestep.
double gru_forward(const GruNetwork& net, const StdSequence& seq, bool training_mode = false,
                   std::uint64_t dropout_seed = 0, ForwardCache* cache = nullptr);

/// Accumulates d(BCE of this sample)/d(params) into `grad` (same length as
/// net.params) given the forward cache of the sample. Regularization terms
/// are handled at batch level, not here.
void gru_backward(const GruNetwork& net, const ForwardCache& cache, int label01, Eigen::VectorXd& grad);

}  // namespace earlyguard
