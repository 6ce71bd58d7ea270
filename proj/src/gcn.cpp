#include "qeii/gcn.hpp"

#include <cmath>

namespace qeii {

GcnEncoder GcnEncoder::init(std::size_t d_in, std::size_t d_h, std::size_t d_out,
                            RngStream& rng) {
  GcnEncoder em;
  em.w1 = Matrix(d_in, d_h);
  em.w2 = Matrix(d_h, d_out);
  const double b1 = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (double& x : em.w1.data) x = rng.uniform(-b1, b1);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(d_h));
  for (double& x : em.w2.data) x = rng.uniform(-b2, b2);
  return em;
}

SubgraphMatrices build_matrices(const TranslationEmbedding& tm,
                                const PartyVocabulary& vocab, const KnowledgeGraph& kg,
                                const DefectSubgraph& sg, bool add_self_loops) {
  const std::size_t n = sg.nodes.size();
  SubgraphMatrices m;
  m.features = Matrix(n, tm.dim);
  m.adjacency = Matrix(n, n);

  for (std::size_t i = 0; i < n; ++i) {
    if (i == sg.blank_index) continue;  // blank row stays zero
    const auto token = vocab.find_entity_token(kg.entity_name(sg.nodes[i]));
    if (!token) {
      throw std::runtime_error("build_matrices: unregistered entity: " +
                               kg.entity_name(sg.nodes[i]));
    }
    const Vec& v = tm.entity_vector(*token);
    for (std::size_t j = 0; j < tm.dim; ++j) m.features(i, j) = v[j];
  }

  for (const SubgraphEdge& e : sg.edges) {
    if (e.from == e.to) continue;  // keep the diagonal clear
    m.adjacency(e.from, e.to) = 1.0;
    m.adjacency(e.to, e.from) = 1.0;
  }
  if (add_self_loops) {
    for (std::size_t i = 0; i < n; ++i) m.adjacency(i, i) = 1.0;
  }

  m.degrees.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m.degrees[i] += m.adjacency(i, j);
  }
  return m;
}

GcnTrace encode_forward(const GcnEncoder& em, const SubgraphMatrices& m) {
  const std::size_t n = m.features.rows;
  if (m.adjacency.rows != n || m.adjacency.cols != n || m.degrees.size() != n) {
    throw std::invalid_argument("encode: inconsistent matrix shapes");
  }
  if (m.features.cols != em.input_dim()) {
    throw std::invalid_argument("encode: feature dim does not match encoder");
  }

  GcnTrace t;
  t.norm_adjacency = Matrix(n, n);
  Vec inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (m.degrees[i] <= 0.0) {
      throw std::runtime_error("encode: zero-degree node in subgraph");
    }
    inv_sqrt[i] = 1.0 / std::sqrt(m.degrees[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      t.norm_adjacency(i, j) = m.adjacency(i, j) * inv_sqrt[i] * inv_sqrt[j];
    }
  }

  t.ax = matmul(t.norm_adjacency, m.features);
  t.pre_hidden = matmul(t.ax, em.w1);
  t.hidden = t.pre_hidden;
  for (double& x : t.hidden.data) {
    if (x < 0.0) x = 0.0;
  }
  t.ah = matmul(t.norm_adjacency, t.hidden);
  t.z = matmul(t.ah, em.w2);

  t.output.assign(em.output_dim(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < t.output.size(); ++c) t.output[c] += t.z(i, c);
  }
  for (double& x : t.output) x /= static_cast<double>(n);
  return t;
}

void GcnGradients::init_like(const GcnEncoder& em) {
  w1 = Matrix(em.w1.rows, em.w1.cols);
  w2 = Matrix(em.w2.rows, em.w2.cols);
}

void encode_backward(const GcnEncoder& em, const GcnTrace& trace, const Vec& d_output,
                     GcnGradients& grads) {
  const std::size_t n = trace.z.rows;
  if (d_output.size() != em.output_dim()) {
    throw std::invalid_argument("encode_backward: gradient dim mismatch");
  }
  if (grads.w1.rows == 0) grads.init_like(em);

  Matrix dz(n, em.output_dim());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d_output.size(); ++c) dz(i, c) = d_output[c] * inv_n;
  }

  // w2 grad: (A~H)^T dZ; then back through the second propagation.
  Matrix dw2 = matmul_at(trace.ah, dz);
  for (std::size_t i = 0; i < dw2.data.size(); ++i) grads.w2.data[i] += dw2.data[i];

  Matrix dah = matmul_bt(dz, em.w2);           // dZ W2^T
  Matrix dh = matmul(trace.norm_adjacency, dah);  // A~ symmetric
  for (std::size_t i = 0; i < dh.data.size(); ++i) {
    if (trace.pre_hidden.data[i] <= 0.0) dh.data[i] = 0.0;
  }
  Matrix dw1 = matmul_at(trace.ax, dh);
  for (std::size_t i = 0; i < dw1.data.size(); ++i) grads.w1.data[i] += dw1.data[i];
}

void apply_gradients(GcnEncoder& em, const GcnGradients& grads, double lr) {
  for (std::size_t i = 0; i < em.w1.data.size(); ++i) em.w1.data[i] -= lr * grads.w1.data[i];
  for (std::size_t i = 0; i < em.w2.data.size(); ++i) em.w2.data[i] -= lr * grads.w2.data[i];
}

}  // namespace qeii
