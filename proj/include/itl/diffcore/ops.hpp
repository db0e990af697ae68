#pragma once

// Differentiable primitives over small dense matrices. Each op computes its
// value eagerly and records a closure that accumulates input gradients.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "itl/diffcore/tape.hpp"

namespace itl::ad {

namespace detail {

inline Error shape_error(const char* op, const Tensor& a, const Tensor& b) {
  return invalid_input(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

inline Tape& tape_of(const Var& a, const Var& b, const char* op) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) {
    throw invalid_input(std::string(op) + ": operands live on different tapes");
  }
  return *a.tape();
}

inline Tape& tape_of(const Var& a, const char* op) {
  if (!a.valid()) throw invalid_input(std::string(op) + ": uninitialised operand");
  return *a.tape();
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

inline constexpr double kBceClamp = 1e-7;

namespace detail {

// Row-major kernels on raw pointers so the inner loops vectorise.

/// C(n x m) += A(n x k) B(k x m)
inline void gemm_nn(const double* __restrict A, const double* __restrict B, double* __restrict C, std::size_t n,
                    std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* c = C + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* b = B + p * m;
      for (std::size_t j = 0; j < m; ++j) c[j] += av * b[j];
    }
  }
}

/// dA(n x k) += G(n x m) B(k x m)^T, accumulated row by row against a
/// transposed copy of B.
inline void gemm_nt(const double* __restrict G, const double* __restrict B, double* __restrict dA, std::size_t n,
                    std::size_t k, std::size_t m) {
  std::vector<double> bt(k * m);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < m; ++j) bt[j * k + p] = B[p * m + j];
  const double* __restrict T = bt.data();
  for (std::size_t i = 0; i < n; ++i) {
    double* d = dA + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double g = G[i * m + j];
      if (g == 0.0) continue;
      const double* t = T + j * k;
      for (std::size_t p = 0; p < k; ++p) d[p] += g * t[p];
    }
  }
}

/// dB(k x m) += A(n x k)^T G(n x m)
inline void gemm_tn(const double* __restrict A, const double* __restrict G, double* __restrict dB, std::size_t n,
                    std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* g = G + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      double* d = dB + p * m;
      for (std::size_t j = 0; j < m; ++j) d[j] += av * g[j];
    }
  }
}

}  // namespace detail

/// C = A B.
inline Var matmul(const Var& a, const Var& b) {
  Tape& t = detail::tape_of(a, b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows()) throw detail::shape_error("matmul", A, B);
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor C(n, m);
  detail::gemm_nn(A.data().data(), B.data().data(), C.data().data(), n, k, m);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("matmul", std::move(C), {a, b}, [ia, ib, n, k, m](Tape& tp, const Tensor& G) {
    if (tp.requires_grad(ia)) detail::gemm_nt(G.data().data(), tp.value(ib).data().data(), tp.grad_buffer(ia).data().data(), n, k, m);
    if (tp.requires_grad(ib)) detail::gemm_tn(tp.value(ia).data().data(), G.data().data(), tp.grad_buffer(ib).data().data(), n, k, m);
  });
}

inline Var add(const Var& a, const Var& b) {
  Tape& t = detail::tape_of(a, b, "add");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B)) throw detail::shape_error("add", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("add", std::move(C), {a, b}, [ia, ib](Tape& tp, const Tensor& G) {
    for (std::size_t id : {ia, ib}) {
      if (!tp.requires_grad(id)) continue;
      Tensor& d = tp.grad_buffer(id);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
    }
  });
}

inline Var sub(const Var& a, const Var& b) {
  Tape& t = detail::tape_of(a, b, "sub");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B)) throw detail::shape_error("sub", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] -= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("sub", std::move(C), {a, b}, [ia, ib](Tape& tp, const Tensor& G) {
    if (tp.requires_grad(ia)) {
      Tensor& d = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& d = tp.grad_buffer(ib);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] -= G[i];
    }
  });
}

/// Elementwise (Hadamard) product.
inline Var mul(const Var& a, const Var& b) {
  Tape& t = detail::tape_of(a, b, "mul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B)) throw detail::shape_error("mul", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("mul", std::move(C), {a, b}, [ia, ib](Tape& tp, const Tensor& G) {
    if (tp.requires_grad(ia)) {
      const Tensor& B = tp.value(ib);
      Tensor& d = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i] * B[i];
    }
    if (tp.requires_grad(ib)) {
      const Tensor& A = tp.value(ia);
      Tensor& d = tp.grad_buffer(ib);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i] * A[i];
    }
  });
}

inline Var scale(const Var& a, double c) {
  Tape& t = detail::tape_of(a, "scale");
  Tensor C = a.value();
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= c;
  const std::size_t ia = a.id();
  return t.record("scale", std::move(C), {a}, [ia, c](Tape& tp, const Tensor& G) {
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += c * G[i];
  });
}

/// A scaled by the single entry of a 1x1 variable.
inline Var scale_by(const Var& a, const Var& s) {
  Tape& t = detail::tape_of(a, s, "scale_by");
  const Tensor& S = s.value();
  if (S.rows() != 1 || S.cols() != 1) throw detail::shape_error("scale_by", a.value(), S);
  const double sv = S[0];
  Tensor C = a.value();
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= sv;
  const std::size_t ia = a.id(), is = s.id();
  return t.record("scale_by", std::move(C), {a, s}, [ia, is](Tape& tp, const Tensor& G) {
    const Tensor& A = tp.value(ia);
    const double sv = tp.value(is)[0];
    if (tp.requires_grad(ia)) {
      Tensor& d = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += sv * G[i];
    }
    if (tp.requires_grad(is)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < G.size(); ++i) acc += G[i] * A[i];
      tp.grad_buffer(is)[0] += acc;
    }
  });
}

/// A (n x c) plus a row vector b (1 x c) added to every row.
inline Var add_row(const Var& a, const Var& b) {
  Tape& t = detail::tape_of(a, b, "add_row");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (B.rows() != 1 || B.cols() != A.cols()) throw detail::shape_error("add_row", A, B);
  Tensor C = A;
  for (std::size_t r = 0; r < C.rows(); ++r)
    for (std::size_t c = 0; c < C.cols(); ++c) C(r, c) += B[c];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("add_row", std::move(C), {a, b}, [ia, ib](Tape& tp, const Tensor& G) {
    if (tp.requires_grad(ia)) {
      Tensor& d = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& d = tp.grad_buffer(ib);
      for (std::size_t r = 0; r < G.rows(); ++r)
        for (std::size_t c = 0; c < G.cols(); ++c) d[c] += G(r, c);
    }
  });
}

inline Var concat_cols(const Var& a, const Var& b) {
  Tape& t = detail::tape_of(a, b, "concat_cols");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rows() != B.rows()) throw detail::shape_error("concat_cols", A, B);
  const std::size_t n = A.rows(), ca = A.cols(), cb = B.cols();
  Tensor C(n, ca + cb);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < ca; ++c) C(r, c) = A(r, c);
    for (std::size_t c = 0; c < cb; ++c) C(r, ca + c) = B(r, c);
  }
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("concat_cols", std::move(C), {a, b}, [ia, ib, n, ca, cb](Tape& tp, const Tensor& G) {
    if (tp.requires_grad(ia)) {
      Tensor& d = tp.grad_buffer(ia);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < ca; ++c) d(r, c) += G(r, c);
    }
    if (tp.requires_grad(ib)) {
      Tensor& d = tp.grad_buffer(ib);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < cb; ++c) d(r, c) += G(r, ca + c);
    }
  });
}

inline Var transpose(const Var& a) {
  Tape& t = detail::tape_of(a, "transpose");
  const std::size_t ia = a.id();
  return t.record("transpose", transposed(a.value()), {a}, [ia](Tape& tp, const Tensor& G) {
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t r = 0; r < G.rows(); ++r)
      for (std::size_t c = 0; c < G.cols(); ++c) d(c, r) += G(r, c);
  });
}

/// Reinterprets the row-major buffer with a new shape of equal size.
inline Var reshape(const Var& a, std::size_t rows, std::size_t cols) {
  Tape& t = detail::tape_of(a, "reshape");
  const Tensor& A = a.value();
  if (rows * cols != A.size()) throw detail::shape_error("reshape", A, Tensor(rows, cols));
  Tensor C(rows, cols, A.values());
  const std::size_t ia = a.id();
  return t.record("reshape", std::move(C), {a}, [ia](Tape& tp, const Tensor& G) {
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
  });
}

inline Var sigmoid(const Var& a) {
  Tape& t = detail::tape_of(a, "sigmoid");
  Tensor C = a.value();
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = detail::sigmoid(C[i]);
  const std::size_t ia = a.id();
  const std::size_t out = t.size();
  return t.record("sigmoid", std::move(C), {a}, [ia, out](Tape& tp, const Tensor& G) {
    const Tensor& S = tp.value(out);
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i] * S[i] * (1.0 - S[i]);
  });
}

inline Var leaky_relu(const Var& a, double slope) {
  Tape& t = detail::tape_of(a, "leaky_relu");
  Tensor C = a.value();
  for (std::size_t i = 0; i < C.size(); ++i)
    if (C[i] < 0.0) C[i] *= slope;
  const std::size_t ia = a.id();
  return t.record("leaky_relu", std::move(C), {a}, [ia, slope](Tape& tp, const Tensor& G) {
    const Tensor& A = tp.value(ia);
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += A[i] < 0.0 ? slope * G[i] : G[i];
  });
}

inline Var elu(const Var& a, double alpha = 1.0) {
  Tape& t = detail::tape_of(a, "elu");
  Tensor C = a.value();
  for (std::size_t i = 0; i < C.size(); ++i)
    if (C[i] < 0.0) C[i] = alpha * std::expm1(C[i]);
  const std::size_t ia = a.id();
  return t.record("elu", std::move(C), {a}, [ia, alpha](Tape& tp, const Tensor& G) {
    const Tensor& A = tp.value(ia);
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += A[i] < 0.0 ? G[i] * alpha * std::exp(A[i]) : G[i];
  });
}

inline Var tanh(const Var& a) {
  Tape& t = detail::tape_of(a, "tanh");
  Tensor C = a.value();
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = std::tanh(C[i]);
  const std::size_t ia = a.id();
  const std::size_t out = t.size();
  return t.record("tanh", std::move(C), {a}, [ia, out](Tape& tp, const Tensor& G) {
    const Tensor& T = tp.value(out);
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i] * (1.0 - T[i] * T[i]);
  });
}

/// Elementwise clamp; the gradient is zero where the bound is active.
inline Var clamp(const Var& a, double lo, double hi) {
  Tape& t = detail::tape_of(a, "clamp");
  Tensor C = a.value();
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = std::clamp(C[i], lo, hi);
  const std::size_t ia = a.id();
  return t.record("clamp", std::move(C), {a}, [ia, lo, hi](Tape& tp, const Tensor& G) {
    const Tensor& A = tp.value(ia);
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < G.size(); ++i)
      if (A[i] > lo && A[i] < hi) d[i] += G[i];
  });
}

/// Row-wise softmax restricted to entries where mask != 0. Masked entries are
/// exactly 0; a fully masked row yields a zero row.
inline Var masked_row_softmax(const Var& a, const Tensor& mask) {
  Tape& t = detail::tape_of(a, "masked_row_softmax");
  const Tensor& A = a.value();
  if (!A.same_shape(mask)) throw detail::shape_error("masked_row_softmax", A, mask);
  Tensor S(A.rows(), A.cols());
  for (std::size_t r = 0; r < A.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < A.cols(); ++c)
      if (mask(r, c) != 0.0) mx = std::max(mx, A(r, c));
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double z = 0.0;
    for (std::size_t c = 0; c < A.cols(); ++c)
      if (mask(r, c) != 0.0) z += (S(r, c) = std::exp(A(r, c) - mx));
    for (std::size_t c = 0; c < A.cols(); ++c) S(r, c) /= z;
  }
  const std::size_t ia = a.id();
  const std::size_t out = t.size();
  return t.record("masked_row_softmax", std::move(S), {a}, [ia, out](Tape& tp, const Tensor& G) {
    const Tensor& S = tp.value(out);
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t r = 0; r < S.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < S.cols(); ++c) dot += G(r, c) * S(r, c);
      for (std::size_t c = 0; c < S.cols(); ++c) d(r, c) += S(r, c) * (G(r, c) - dot);
    }
  });
}

inline Var sum(const Var& a) {
  Tape& t = detail::tape_of(a, "sum");
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return t.record("sum", Tensor::scalar(s), {a}, [ia](Tape& tp, const Tensor& G) {
    Tensor& d = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[0];
  });
}

/// Single entry (r, c) as a 1x1 variable.
inline Var element(const Var& a, std::size_t r, std::size_t c) {
  Tape& t = detail::tape_of(a, "element");
  const Tensor& A = a.value();
  if (r >= A.rows() || c >= A.cols()) throw detail::shape_error("element", A, Tensor(r + 1, c + 1));
  const std::size_t ia = a.id();
  return t.record("element", Tensor::scalar(A(r, c)), {a}, [ia, r, c](Tape& tp, const Tensor& G) {
    tp.grad_buffer(ia)(r, c) += G[0];
  });
}

/// All ordered pair sums: row (i*n + j) of the result is P_i + Q_j.
/// P and Q are n x h; the result is n^2 x h.
inline Var pair_sum(const Var& p, const Var& q) {
  Tape& t = detail::tape_of(p, q, "pair_sum");
  const Tensor& P = p.value();
  const Tensor& Q = q.value();
  if (!P.same_shape(Q)) throw detail::shape_error("pair_sum", P, Q);
  const std::size_t n = P.rows(), h = P.cols();
  Tensor C(n * n, h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double* out = &C(i * n + j, 0);
      for (std::size_t c = 0; c < h; ++c) out[c] = P(i, c) + Q(j, c);
    }
  const std::size_t ip = p.id(), iq = q.id();
  return t.record("pair_sum", std::move(C), {p, q}, [ip, iq, n, h](Tape& tp, const Tensor& G) {
    const bool gp = tp.requires_grad(ip), gq = tp.requires_grad(iq);
    Tensor* dP = gp ? &tp.grad_buffer(ip) : nullptr;
    Tensor* dQ = gq ? &tp.grad_buffer(iq) : nullptr;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double* g = &G(i * n + j, 0);
        for (std::size_t c = 0; c < h; ++c) {
          if (gp) (*dP)(i, c) += g[c];
          if (gq) (*dQ)(j, c) += g[c];
        }
      }
  });
}

/// Binary cross-entropy averaged over entries with non-zero weight:
///   sum_i w_i * -[y_i log q_i + (1 - y_i) log(1 - q_i)] / sum_i w_i,
/// with q = clamp(p, 1e-7, 1 - 1e-7). The derivative is evaluated at q, so it
/// stays finite for saturated predictions.
inline Var bce(const Var& pred, const Tensor& target, const Tensor& weight) {
  Tape& t = detail::tape_of(pred, "bce");
  const Tensor& P = pred.value();
  if (!P.same_shape(target)) throw detail::shape_error("bce", P, target);
  if (!P.same_shape(weight)) throw detail::shape_error("bce", P, weight);
  double total_w = 0.0, loss = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (weight[i] == 0.0) continue;
    const double q = std::clamp(P[i], kBceClamp, 1.0 - kBceClamp);
    const double y = target[i];
    loss += weight[i] * -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
    total_w += weight[i];
  }
  if (total_w <= 0.0) throw invalid_input("bce: mask selects no entries");
  const std::size_t ip = pred.id();
  return t.record("bce", Tensor::scalar(loss / total_w), {pred},
                  [ip, target, weight, total_w](Tape& tp, const Tensor& G) {
                    const Tensor& P = tp.value(ip);
                    Tensor& d = tp.grad_buffer(ip);
                    for (std::size_t i = 0; i < P.size(); ++i) {
                      if (weight[i] == 0.0) continue;
                      const double q = std::clamp(P[i], kBceClamp, 1.0 - kBceClamp);
                      const double y = target[i];
                      d[i] += G[0] * weight[i] * (-y / q + (1.0 - y) / (1.0 - q)) / total_w;
                    }
                  });
}

// Convenience overloads.
inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, double c) { return scale(a, c); }

}  // namespace itl::ad
