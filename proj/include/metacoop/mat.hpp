#pragma once

#include <cmath>
#include <cstring>
#include <vector>

#include "metacoop/check.hpp"

namespace metacoop {

// Dense row-major matrix. Everything in the numeric core is row-per-lane:
// each row of a batch is computed by the same per-row loops regardless of
// how many rows travel together, so a lane's result is bit-identical whether
// an episode runs alone or inside a lockstep batch.
template <typename S>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<S> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, S(0)) {}

  S* row(int r) { return d.data() + static_cast<size_t>(r) * cols; }
  const S* row(int r) const { return d.data() + static_cast<size_t>(r) * cols; }

  S& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  S at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }

  void zero() { std::memset(d.data(), 0, d.size() * sizeof(S)); }

  void resize(int r, int c) {
    rows = r;
    cols = c;
    d.assign(static_cast<size_t>(r) * c, S(0));
  }
};

namespace kernels {

// Y = X * W (+ bias), W stored (in x out) so the inner loop runs over a
// contiguous W row with independent accumulators (vectorizes without
// reassociation).
template <typename S>
void linear_fwd(const S* x, int batch, int in, const S* w, const S* bias, S* y, int out) {
  for (int b = 0; b < batch; ++b) {
    const S* xb = x + static_cast<size_t>(b) * in;
    S* yb = y + static_cast<size_t>(b) * out;
    if (bias) {
      std::memcpy(yb, bias, sizeof(S) * out);
    } else {
      std::memset(yb, 0, sizeof(S) * out);
    }
    for (int k = 0; k < in; ++k) {
      const S s = xb[k];
      const S* wk = w + static_cast<size_t>(k) * out;
      for (int o = 0; o < out; ++o) yb[o] += s * wk[o];
    }
  }
}

// dX += dY * W^T, using the cached transpose WT (out x in).
template <typename S>
void linear_bwd_input(const S* dy, int batch, int out, const S* wt, S* dx, int in) {
  for (int b = 0; b < batch; ++b) {
    const S* dyb = dy + static_cast<size_t>(b) * out;
    S* dxb = dx + static_cast<size_t>(b) * in;
    for (int o = 0; o < out; ++o) {
      const S s = dyb[o];
      const S* wto = wt + static_cast<size_t>(o) * in;
      for (int k = 0; k < in; ++k) dxb[k] += s * wto[k];
    }
  }
}

// dW += X^T * dY ; db += column sums of dY.
template <typename S>
void linear_bwd_params(const S* x, const S* dy, int batch, int in, int out, S* dw, S* db) {
  for (int b = 0; b < batch; ++b) {
    const S* xb = x + static_cast<size_t>(b) * in;
    const S* dyb = dy + static_cast<size_t>(b) * out;
    for (int k = 0; k < in; ++k) {
      const S s = xb[k];
      S* dwk = dw + static_cast<size_t>(k) * out;
      for (int o = 0; o < out; ++o) dwk[o] += s * dyb[o];
    }
    if (db) {
      for (int o = 0; o < out; ++o) db[o] += dyb[o];
    }
  }
}

template <typename S>
void sigmoid_fwd(const S* x, S* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = S(1) / (S(1) + std::exp(-x[i]));
}

template <typename S>
void tanh_fwd(const S* x, S* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

// Log-softmax over the legal entries of one row. Masked entries get log-prob
// -1e30, which underflows to probability exactly 0 under exp() — the
// guarantee action sampling and the policy gradient both rely on.
template <typename S>
void masked_log_softmax_row(const S* logits, const unsigned char* mask, S* logp, int n) {
  int legal = 0;
  S max_l = S(0);
  for (int c = 0; c < n; ++c) {
    if (!mask[c]) continue;
    if (legal == 0 || logits[c] > max_l) max_l = logits[c];
    ++legal;
  }
  check(legal > 0, "masked softmax: all actions masked");
  S z = S(0);
  for (int c = 0; c < n; ++c) {
    if (mask[c]) z += std::exp(logits[c] - max_l);
  }
  const S log_z = std::log(z);
  for (int c = 0; c < n; ++c) {
    logp[c] = mask[c] ? logits[c] - max_l - log_z : S(-1e30);
  }
}

}  // namespace kernels
}  // namespace metacoop
