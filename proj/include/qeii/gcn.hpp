#pragma once

#include "qeii/linalg.hpp"
#include "qeii/question.hpp"
#include "qeii/rng.hpp"
#include "qeii/transe.hpp"

namespace qeii {

/// Per-question inputs to the encoder. The blank node's feature row is zero;
/// adjacency is binary, undirected, zero-diagonal (relation labels and edge
/// direction do not enter it).
struct SubgraphMatrices {
  Matrix features;   // nodes x dim
  Matrix adjacency;  // nodes x nodes, symmetric
  Vec degrees;       // row sums of adjacency
};

// Two-layer graph convolution with mean pooling:
//   A~ = D^-1/2 A D^-1/2,  H = ReLU(A~ X W1),  Z = A~ H W2,  out = mean rows(Z).
// Output dimension equals the translation-model dimension so the question
// vector stacks with candidate vectors downstream.
struct GcnEncoder {
  Matrix w1;  // d_in x d_h
  Matrix w2;  // d_h x d_out

  std::size_t input_dim() const { return w1.rows; }
  std::size_t hidden_dim() const { return w1.cols; }
  std::size_t output_dim() const { return w2.cols; }

  /// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static GcnEncoder init(std::size_t d_in, std::size_t d_h, std::size_t d_out,
                         RngStream& rng);

  friend bool operator==(const GcnEncoder&, const GcnEncoder&) = default;
};

SubgraphMatrices build_matrices(const TranslationEmbedding& tm,
                                const PartyVocabulary& vocab, const KnowledgeGraph& kg,
                                const DefectSubgraph& sg, bool add_self_loops = false);

struct GcnTrace {
  Matrix norm_adjacency;  // A~
  Matrix ax;              // A~ X
  Matrix pre_hidden;      // A~ X W1
  Matrix hidden;          // ReLU of the above
  Matrix ah;              // A~ H
  Matrix z;
  Vec output;
};

GcnTrace encode_forward(const GcnEncoder& em, const SubgraphMatrices& m);

inline Vec encode(const GcnEncoder& em, const SubgraphMatrices& m) {
  return encode_forward(em, m).output;
}

struct GcnGradients {
  Matrix w1;
  Matrix w2;

  void init_like(const GcnEncoder& em);
};

/// Accumulates dLoss/dW1, dLoss/dW2 given dLoss/d(output).
void encode_backward(const GcnEncoder& em, const GcnTrace& trace, const Vec& d_output,
                     GcnGradients& grads);

void apply_gradients(GcnEncoder& em, const GcnGradients& grads, double lr);

}  // namespace qeii
