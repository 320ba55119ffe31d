// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sts/error.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {

template <typename S>
using RowMat =
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatMap = Eigen::Map<RowMat<S>>;
template <typename S>
using ConstMatMap = Eigen::Map<const RowMat<S>>;

namespace detail {

template <typename S>
void check_same_shape(const Tensor<S>& a, const Tensor<S>& b,
                      const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": operand shapes differ");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic (no broadcasting; shapes must match exactly).

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  detail::check_same_shape(a, b, "add");
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    out.data()[i] = a.data()[i] + b.data()[i];
  record_op(out, {a, b}, [ao = a.impl(), bo = b.impl(), oo = out.raw()] {
    const std::size_t n = oo->data.size();
    if (ao->requires_grad) {
      ao->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) ao->grad[i] += oo->grad[i];
    }
    if (bo->requires_grad) {
      bo->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) bo->grad[i] += oo->grad[i];
    }
  });
  return out;
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  detail::check_same_shape(a, b, "sub");
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    out.data()[i] = a.data()[i] - b.data()[i];
  record_op(out, {a, b}, [ao = a.impl(), bo = b.impl(), oo = out.raw()] {
    const std::size_t n = oo->data.size();
    if (ao->requires_grad) {
      ao->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) ao->grad[i] += oo->grad[i];
    }
    if (bo->requires_grad) {
      bo->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) bo->grad[i] -= oo->grad[i];
    }
  });
  return out;
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  detail::check_same_shape(a, b, "mul");
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    out.data()[i] = a.data()[i] * b.data()[i];
  record_op(out, {a, b}, [ao = a.impl(), bo = b.impl(), oo = out.raw()] {
    const std::size_t n = oo->data.size();
    if (ao->requires_grad) {
      ao->ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        ao->grad[i] += oo->grad[i] * bo->data[i];
    }
    if (bo->requires_grad) {
      bo->ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        bo->grad[i] += oo->grad[i] * ao->data[i];
    }
  });
  return out;
}

template <typename S>
Tensor<S> scalar_mul(const Tensor<S>& a, S c) {
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * c;
  record_op(out, {a}, [ao = a.impl(), oo = out.raw(), c] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    const std::size_t n = oo->data.size();
    for (std::size_t i = 0; i < n; ++i) ao->grad[i] += oo->grad[i] * c;
  });
  return out;
}

template <typename S>
Tensor<S> scalar_add(const Tensor<S>& a, S c) {
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] + c;
  record_op(out, {a}, [ao = a.impl(), oo = out.raw()] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    const std::size_t n = oo->data.size();
    for (std::size_t i = 0; i < n; ++i) ao->grad[i] += oo->grad[i];
  });
  return out;
}

// ---------------------------------------------------------------------------
// Activations.

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    out.data()[i] = a.data()[i] > S(0) ? a.data()[i] : S(0);
  record_op(out, {a}, [ao = a.impl(), oo = out.raw()] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    const std::size_t n = oo->data.size();
    for (std::size_t i = 0; i < n; ++i)
      if (ao->data[i] > S(0)) ao->grad[i] += oo->grad[i];
  });
  return out;
}

template <typename S>
Tensor<S> tanh(const Tensor<S>& a) {
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = std::tanh(a.data()[i]);
  record_op(out, {a}, [ao = a.impl(), oo = out.raw()] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    const std::size_t n = oo->data.size();
    for (std::size_t i = 0; i < n; ++i) {
      const S y = oo->data[i];
      ao->grad[i] += oo->grad[i] * (S(1) - y * y);
    }
  });
  return out;
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  auto out = Tensor<S>::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    out.data()[i] = S(1) / (S(1) + std::exp(-a.data()[i]));
  record_op(out, {a}, [ao = a.impl(), oo = out.raw()] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    const std::size_t n = oo->data.size();
    for (std::size_t i = 0; i < n; ++i) {
      const S y = oo->data[i];
      ao->grad[i] += oo->grad[i] * y * (S(1) - y);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Matrix multiply, rank-2 only: [M,K] x [K,N] -> [M,N].

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul: operands must be rank-2");
  const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) throw ShapeError("matmul: inner extents differ");
  auto out = Tensor<S>::zeros({m, n});
  MatMap<S>(out.data().data(), m, n).noalias() =
      ConstMatMap<S>(a.data().data(), m, k) *
      ConstMatMap<S>(b.data().data(), k, n);
  record_op(out, {a, b},
            [ao = a.impl(), bo = b.impl(), oo = out.raw(), m, k, n] {
              ConstMatMap<S> gy(oo->grad.data(), m, n);
              if (ao->requires_grad) {
                ao->ensure_grad();
                MatMap<S>(ao->grad.data(), m, k).noalias() +=
                    gy * ConstMatMap<S>(bo->data.data(), k, n).transpose();
              }
              if (bo->requires_grad) {
                bo->ensure_grad();
                MatMap<S>(bo->grad.data(), k, n).noalias() +=
                    ConstMatMap<S>(ao->data.data(), m, k).transpose() * gy;
              }
            });
  return out;
}

// ---------------------------------------------------------------------------
// Shape ops.

template <typename S>
Tensor<S> reshape(const Tensor<S>& a, std::vector<int> shape) {
  if (shape_product(shape) != a.size())
    throw ShapeError("reshape: element count changes");
  auto out = Tensor<S>::from(a.data(), std::move(shape));
  record_op(out, {a}, [ao = a.impl(), oo = out.raw()] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    const std::size_t n = oo->data.size();
    for (std::size_t i = 0; i < n; ++i) ao->grad[i] += oo->grad[i];
  });
  return out;
}

namespace detail {

// Row-major strides for a shape.
inline std::vector<std::size_t> strides_of(const std::vector<int>& shape) {
  std::vector<std::size_t> st(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    st[static_cast<std::size_t>(i)] =
        st[static_cast<std::size_t>(i) + 1] *
        static_cast<std::size_t>(shape[static_cast<std::size_t>(i) + 1]);
  return st;
}

}  // namespace detail

// Reorders the three axes of a rank-3 tensor: output axis i is input axis
// perm[i].
template <typename S>
Tensor<S> permute3(const Tensor<S>& a, int p0, int p1, int p2) {
  if (a.rank() != 3) throw ShapeError("permute3: input must be rank-3");
  const int perm[3] = {p0, p1, p2};
  bool used[3] = {false, false, false};
  for (int p : perm) {
    if (p < 0 || p > 2) throw IndexError("permute3: axis out of range");
    used[p] = true;
  }
  if (!(used[0] && used[1] && used[2]))
    throw IndexError("permute3: axes must be a permutation of 0,1,2");
  const auto& ish = a.shape();
  std::vector<int> osh = {ish[static_cast<std::size_t>(p0)],
                          ish[static_cast<std::size_t>(p1)],
                          ish[static_cast<std::size_t>(p2)]};
  auto out = Tensor<S>::zeros(osh);
  const auto istr = detail::strides_of(ish);
  const std::size_t s0 = istr[static_cast<std::size_t>(p0)];
  const std::size_t s1 = istr[static_cast<std::size_t>(p1)];
  const std::size_t s2 = istr[static_cast<std::size_t>(p2)];
  std::size_t o = 0;
  for (int i = 0; i < osh[0]; ++i)
    for (int j = 0; j < osh[1]; ++j) {
      std::size_t base = static_cast<std::size_t>(i) * s0 +
                         static_cast<std::size_t>(j) * s1;
      for (int k = 0; k < osh[2]; ++k, ++o)
        out.data()[o] = a.data()[base + static_cast<std::size_t>(k) * s2];
    }
  record_op(out, {a}, [ao = a.impl(), oo = out.raw(), osh, s0, s1, s2] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    std::size_t o = 0;
    for (int i = 0; i < osh[0]; ++i)
      for (int j = 0; j < osh[1]; ++j) {
        std::size_t base = static_cast<std::size_t>(i) * s0 +
                           static_cast<std::size_t>(j) * s1;
        for (int k = 0; k < osh[2]; ++k, ++o)
          ao->grad[base + static_cast<std::size_t>(k) * s2] += oo->grad[o];
      }
  });
  return out;
}

namespace detail {

// Views any tensor as [outer, axis, inner] around one axis.
template <typename S>
void axis_split(const Tensor<S>& t, int axis, std::size_t* outer,
                std::size_t* extent, std::size_t* inner) {
  if (axis < 0 || axis >= t.rank())
    throw IndexError("axis out of range for tensor rank");
  *outer = 1;
  *inner = 1;
  for (int i = 0; i < axis; ++i)
    *outer *= static_cast<std::size_t>(t.shape()[static_cast<std::size_t>(i)]);
  *extent = static_cast<std::size_t>(t.dim(axis));
  for (int i = axis + 1; i < t.rank(); ++i)
    *inner *= static_cast<std::size_t>(t.shape()[static_cast<std::size_t>(i)]);
}

}  // namespace detail

// Concatenates tensors of equal rank along one axis; all other extents must
// match.
template <typename S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: needs at least one tensor");
  const auto& base = parts[0].shape();
  int total = 0;
  for (const auto& p : parts) {
    if (p.rank() != parts[0].rank())
      throw ShapeError("concat: ranks differ");
    for (int i = 0; i < p.rank(); ++i)
      if (i != axis && p.shape()[static_cast<std::size_t>(i)] !=
                           base[static_cast<std::size_t>(i)])
        throw ShapeError("concat: extents differ off the concat axis");
    total += p.dim(axis);
  }
  std::vector<int> osh = base;
  if (axis < 0 || axis >= parts[0].rank())
    throw IndexError("concat: axis out of range");
  osh[static_cast<std::size_t>(axis)] = total;
  auto out = Tensor<S>::zeros(osh);
  std::size_t outer, oext, inner;
  detail::axis_split(out, axis, &outer, &oext, &inner);
  std::size_t off = 0;  // running offset along the concat axis
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t pext = static_cast<std::size_t>(p.dim(axis));
    for (std::size_t ou = 0; ou < outer; ++ou) {
      const S* src = p.data().data() + ou * pext * inner;
      S* dst = out.data().data() + (ou * oext + off) * inner;
      std::copy(src, src + pext * inner, dst);
    }
    off += pext;
  }
  std::vector<std::shared_ptr<TensorImpl<S>>> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  record_op(out, parts,
            [impls, offsets, oo = out.raw(), outer, oext, inner, axis] {
              for (std::size_t pi = 0; pi < impls.size(); ++pi) {
                auto& p = impls[pi];
                if (!p->requires_grad) continue;
                p->ensure_grad();
                const std::size_t pext = static_cast<std::size_t>(
                    p->shape[static_cast<std::size_t>(axis)]);
                for (std::size_t ou = 0; ou < outer; ++ou) {
                  const S* src =
                      oo->grad.data() + (ou * oext + offsets[pi]) * inner;
                  S* dst = p->grad.data() + ou * pext * inner;
                  for (std::size_t i = 0; i < pext * inner; ++i)
                    dst[i] += src[i];
                }
              }
            });
  return out;
}

// Contiguous slice [start, start+len) along one axis.
template <typename S>
Tensor<S> slice(const Tensor<S>& a, int axis, int start, int len) {
  std::size_t outer, extent, inner;
  detail::axis_split(a, axis, &outer, &extent, &inner);
  if (start < 0 || len <= 0 ||
      static_cast<std::size_t>(start + len) > extent)
    throw IndexError("slice: range exceeds axis extent");
  std::vector<int> osh = a.shape();
  osh[static_cast<std::size_t>(axis)] = len;
  auto out = Tensor<S>::zeros(osh);
  const std::size_t lext = static_cast<std::size_t>(len);
  for (std::size_t ou = 0; ou < outer; ++ou) {
    const S* src =
        a.data().data() + (ou * extent + static_cast<std::size_t>(start)) *
                              inner;
    S* dst = out.data().data() + ou * lext * inner;
    std::copy(src, src + lext * inner, dst);
  }
  record_op(out, {a},
            [ao = a.impl(), oo = out.raw(), outer, extent, inner, start,
             lext] {
              if (!ao->requires_grad) return;
              ao->ensure_grad();
              for (std::size_t ou = 0; ou < outer; ++ou) {
                const S* src = oo->grad.data() + ou * lext * inner;
                S* dst = ao->grad.data() +
                         (ou * extent + static_cast<std::size_t>(start)) *
                             inner;
                for (std::size_t i = 0; i < lext * inner; ++i)
                  dst[i] += src[i];
              }
            });
  return out;
}

// Zero padding along one axis: `before` leading and `after` trailing zeros.
template <typename S>
Tensor<S> pad_axis(const Tensor<S>& a, int axis, int before, int after) {
  if (before < 0 || after < 0)
    throw ParamError("pad_axis: pad amounts must be non-negative");
  std::size_t outer, extent, inner;
  detail::axis_split(a, axis, &outer, &extent, &inner);
  std::vector<int> osh = a.shape();
  osh[static_cast<std::size_t>(axis)] += before + after;
  auto out = Tensor<S>::zeros(osh);
  const std::size_t oext = extent + static_cast<std::size_t>(before + after);
  for (std::size_t ou = 0; ou < outer; ++ou) {
    const S* src = a.data().data() + ou * extent * inner;
    S* dst = out.data().data() +
             (ou * oext + static_cast<std::size_t>(before)) * inner;
    std::copy(src, src + extent * inner, dst);
  }
  record_op(out, {a},
            [ao = a.impl(), oo = out.raw(), outer, extent, inner, before,
             oext] {
              if (!ao->requires_grad) return;
              ao->ensure_grad();
              for (std::size_t ou = 0; ou < outer; ++ou) {
                const S* src =
                    oo->grad.data() +
                    (ou * oext + static_cast<std::size_t>(before)) * inner;
                S* dst = ao->grad.data() + ou * extent * inner;
                for (std::size_t i = 0; i < extent * inner; ++i)
                  dst[i] += src[i];
              }
            });
  return out;
}

// ---------------------------------------------------------------------------
// Reductions to scalar.

template <typename S>
Tensor<S> sum(const Tensor<S>& a) {
  // Pairwise-friendly accumulation in double keeps large reductions stable.
  double acc = 0;
  for (S v : a.data()) acc += static_cast<double>(v);
  auto out = Tensor<S>::scalar(static_cast<S>(acc));
  record_op(out, {a}, [ao = a.impl(), oo = out.raw()] {
    if (!ao->requires_grad) return;
    ao->ensure_grad();
    const S g = oo->grad[0];
    for (auto& v : ao->grad) v += g;
  });
  return out;
}

template <typename S>
Tensor<S> mean(const Tensor<S>& a) {
  const S inv = S(1) / static_cast<S>(a.size());
  return scalar_mul(sum(a), inv);
}

// Mean over one axis of a rank-3 tensor, producing the rank-2 tensor of the
// remaining axes in order.
template <typename S>
Tensor<S> mean_axis3(const Tensor<S>& a, int axis) {
  if (a.rank() != 3) throw ShapeError("mean_axis3: input must be rank-3");
  std::size_t outer, extent, inner;
  detail::axis_split(a, axis, &outer, &extent, &inner);
  std::vector<int> osh;
  for (int i = 0; i < 3; ++i)
    if (i != axis) osh.push_back(a.shape()[static_cast<std::size_t>(i)]);
  auto out = Tensor<S>::zeros(osh);
  const S inv = S(1) / static_cast<S>(extent);
  for (std::size_t ou = 0; ou < outer; ++ou)
    for (std::size_t e = 0; e < extent; ++e) {
      const S* src = a.data().data() + (ou * extent + e) * inner;
      S* dst = out.data().data() + ou * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i] * inv;
    }
  record_op(out, {a},
            [ao = a.impl(), oo = out.raw(), outer, extent, inner, inv] {
              if (!ao->requires_grad) return;
              ao->ensure_grad();
              for (std::size_t ou = 0; ou < outer; ++ou)
                for (std::size_t e = 0; e < extent; ++e) {
                  S* dst = ao->grad.data() + (ou * extent + e) * inner;
                  const S* src = oo->grad.data() + ou * inner;
                  for (std::size_t i = 0; i < inner; ++i)
                    dst[i] += src[i] * inv;
                }
            });
  return out;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy from logits.
//
// logits: [T, N] (or [N], treated as one row). classes[t] selects the target
// of row t; a negative class marks the row ignored (zero loss, zero grad).
// Output: [T] with per-row -log softmax(logits)[class], computed via the
// max-subtracted log-sum-exp so large logits cannot overflow.

template <typename S>
Tensor<S> cross_entropy_rows(const Tensor<S>& logits,
                             const std::vector<int>& classes) {
  Tensor<S> lg = logits;
  if (lg.rank() == 1) lg = reshape(lg, {1, lg.dim(0)});
  if (lg.rank() != 2)
    throw ShapeError("cross_entropy_rows: logits must be rank-1 or rank-2");
  const int t_len = lg.dim(0), n_cls = lg.dim(1);
  if (static_cast<int>(classes.size()) != t_len)
    throw ShapeError("cross_entropy_rows: one class per logits row required");
  auto out = Tensor<S>::zeros({t_len});
  // Softmax per row is saved for the backward pass.
  auto probs = std::make_shared<std::vector<S>>(lg.size(), S(0));
  for (int t = 0; t < t_len; ++t) {
    const int cls = classes[static_cast<std::size_t>(t)];
    if (cls < 0) continue;
    if (cls >= n_cls)
      throw IndexError("cross_entropy_rows: class id exceeds logit count");
    const S* row = lg.data().data() + static_cast<std::size_t>(t) * n_cls;
    S mx = row[0];
    for (int j = 1; j < n_cls; ++j) mx = std::max(mx, row[j]);
    double lse = 0;
    for (int j = 0; j < n_cls; ++j)
      lse += std::exp(static_cast<double>(row[j] - mx));
    const double log_z = std::log(lse) + static_cast<double>(mx);
    out.data()[static_cast<std::size_t>(t)] =
        static_cast<S>(log_z - static_cast<double>(row[cls]));
    S* prow = probs->data() + static_cast<std::size_t>(t) * n_cls;
    for (int j = 0; j < n_cls; ++j)
      prow[j] = static_cast<S>(
          std::exp(static_cast<double>(row[j]) - log_z));
  }
  record_op(out, {lg},
            [lo = lg.impl(), oo = out.raw(), probs, classes, t_len, n_cls] {
              if (!lo->requires_grad) return;
              lo->ensure_grad();
              for (int t = 0; t < t_len; ++t) {
                const int cls = classes[static_cast<std::size_t>(t)];
                if (cls < 0) continue;
                const S g = oo->grad[static_cast<std::size_t>(t)];
                const S* prow =
                    probs->data() + static_cast<std::size_t>(t) * n_cls;
                S* grow =
                    lo->grad.data() + static_cast<std::size_t>(t) * n_cls;
                for (int j = 0; j < n_cls; ++j) grow[j] += g * prow[j];
                grow[cls] -= g;
              }
            });
  return out;
}

}  // namespace sts
