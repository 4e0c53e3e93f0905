#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "absa/tokenizer.hpp"

namespace absa {

inline constexpr double kLayerNormEpsilon = 1e-12;
inline constexpr double kInitStdDev = 0.02;

// Encoder geometry. Defaults are the desk-scale configuration; the full
// 12/12/768 geometry is reachable through the same fields.
struct EncoderConfig {
  int num_layers = 2;
  int num_heads = 2;
  int hidden_size = 32;
  int feed_forward_size = 128;
  int vocab_size = 200;
  int max_len = 32;
  int num_classes = 3;
  double dropout_rate = 0.1;
  std::uint64_t seed = 1;

  int head_size() const { return hidden_size / num_heads; }
  void validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

struct LayerParams {
  Eigen::MatrixXd w_query, w_key, w_value, w_attn_out;  // H x H
  Eigen::VectorXd b_query, b_key, b_value, b_attn_out;  // H
  Eigen::VectorXd ln_attn_scale, ln_attn_shift;         // H
  Eigen::MatrixXd w_ff_in;                              // H x F
  Eigen::VectorXd b_ff_in;                              // F
  Eigen::MatrixXd w_ff_out;                             // F x H
  Eigen::VectorXd b_ff_out;                             // H
  Eigen::VectorXd ln_ffn_scale, ln_ffn_shift;           // H
};

// Every learnable tensor. Shapes are fixed by EncoderConfig; the same struct
// doubles as the gradient container (shapes mirror the parameters).
struct ModelParams {
  EncoderConfig config;
  Eigen::MatrixXd token_embeddings;     // vocab x H
  Eigen::MatrixXd position_embeddings;  // max_len x H
  Eigen::MatrixXd segment_embeddings;   // 2 x H
  Eigen::VectorXd ln_embed_scale, ln_embed_shift;  // H
  std::vector<LayerParams> layers;
  Eigen::MatrixXd w_classifier;  // H x num_classes
  Eigen::VectorXd b_classifier;  // num_classes

  // Truncated-normal weights (mean 0, std 0.02, redrawn beyond 2 sigma),
  // layer-norm scales 1, shifts and biases 0. Deterministic per config.seed.
  static ModelParams init(const EncoderConfig& config);
  static ModelParams zeros(const EncoderConfig& config);
};

struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index size;
  Eigen::Index rows, cols;
};
struct ConstTensorRef {
  std::string name;
  const double* data;
  Eigen::Index size;
  Eigen::Index rows, cols;
};

// Flat named views over every parameter tensor, in a fixed order shared by
// the optimizer, the checkpoint format and the gradient checker.
std::vector<TensorRef> named_tensors(ModelParams& params);
std::vector<ConstTensorRef> named_tensors(const ModelParams& params);
std::int64_t parameter_count(const EncoderConfig& config);

// Fixed-shape stack of encoded sequences.
struct Batch {
  int batch_size = 0;
  int seq_len = 0;
  std::vector<std::int32_t> token_ids;       // batch_size*seq_len, row-major
  std::vector<std::int32_t> segment_ids;
  std::vector<std::int32_t> attention_mask;
  std::vector<std::int32_t> labels;          // batch_size

  static Batch from_sequences(std::span<const EncodedSequence> sequences);
};

// Numerically stable softmax (max subtraction); outputs are positive and sum
// to 1.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Exact Gaussian-CDF GELU, x * Phi(x), and its derivative.
double gelu(double x);
double gelu_derivative(double x);

// Normalizes over the feature axis (biased variance), then applies the
// affine scale/shift.
Eigen::VectorXd layer_norm(const Eigen::VectorXd& v,
                           const Eigen::VectorXd& scale,
                           const Eigen::VectorXd& shift,
                           double epsilon = kLayerNormEpsilon);

enum class RunMode { train, eval };

struct LayerNormCache {
  Eigen::MatrixXd normalized;  // x_hat, rows match the normalized input
  Eigen::VectorXd inv_std;     // per row
};

struct LayerCache {
  Eigen::MatrixXd input;  // (B*T) x H
  Eigen::MatrixXd q, k, v;
  std::vector<Eigen::MatrixXd> attn_probs;      // [b*num_heads + a], T x T
  std::vector<Eigen::MatrixXd> attn_drop_mask;  // empty without dropout
  Eigen::MatrixXd context;
  Eigen::MatrixXd attn_out_drop_mask;
  LayerNormCache ln_attn;
  Eigen::MatrixXd h_mid;  // post-attention layer-norm output
  Eigen::MatrixXd ffn_pre;
  Eigen::MatrixXd ffn_act;
  Eigen::MatrixXd ffn_drop_mask;
  LayerNormCache ln_ffn;
};

struct ForwardCache {
  Batch batch;
  LayerNormCache ln_embed;
  Eigen::MatrixXd embed_drop_mask;
  std::vector<LayerCache> layers;
  Eigen::MatrixXd final_hidden;  // (B*T) x H
  Eigen::MatrixXd logits;        // B x num_classes
};

// Scaled dot-product attention over all heads with the output projection
// applied. Masked key positions receive exactly zero attention weight.
// `hidden` holds batch_size*seq_len rows. Row-softmax weights are written to
// *attention_probs (one T x T matrix per batch item and head) when given.
Eigen::MatrixXd multi_head_attention(
    const Eigen::MatrixXd& hidden,
    const std::vector<std::int32_t>& attention_mask, int batch_size,
    int seq_len, const LayerParams& layer, const EncoderConfig& config,
    std::vector<Eigen::MatrixXd>* attention_probs = nullptr);

// Full encoder pass: summed embeddings, L post-layer-norm transformer
// layers, classifier over the final [CLS] vector. Returns batch x
// num_classes logits. Dropout runs only in train mode and requires
// dropout_rng when config.dropout_rate > 0; a cache filled in train mode
// feeds the backward pass.
Eigen::MatrixXd forward(const ModelParams& params, const Batch& batch,
                        RunMode mode, ForwardCache* cache = nullptr,
                        std::mt19937_64* dropout_rng = nullptr);

}  // namespace absa
