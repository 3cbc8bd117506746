#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metacoop/check.hpp"
#include "metacoop/mat.hpp"
#include "metacoop/rng.hpp"

namespace metacoop {

struct TensorInfo {
  std::string name;
  int rows = 0;  // input (fan-in) dimension for matmul weights
  int cols = 0;
  std::size_t offset = 0;  // into the flat view
  bool is_matmul = false;  // keeps a transpose cache for the backward pass
  bool is_recurrent = false;
};

// Names -> shapes, in flat-view order.
struct ParamLayout {
  std::vector<TensorInfo> tensors;
  std::size_t total = 0;

  void add(const std::string& name, int rows, int cols, bool matmul, bool recurrent = false) {
    TensorInfo info{name, rows, cols, total, matmul, recurrent};
    tensors.push_back(info);
    total += static_cast<std::size_t>(rows) * cols;
  }

  const TensorInfo& find(const std::string& name) const { return tensors[find_index(name)]; }

  int find_index(const std::string& name) const {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (tensors[i].name == name) return static_cast<int>(i);
    }
    throw ContractError("ParamLayout: unknown tensor " + name);
  }
};

inline constexpr int kGruUnits = 64;
inline constexpr int kGruLayers = 2;

// Two stacked GRU layers plus a policy head and a value head sharing the
// second layer's state. Matmul weights are stored (in x out); the cell
// convention is h' = (1-z) h + z hcand.
inline ParamLayout make_policy_layout(int input_dim) {
  ParamLayout layout;
  int in = input_dim;
  for (int layer = 1; layer <= kGruLayers; ++layer) {
    const std::string p = "l" + std::to_string(layer) + ".";
    for (const char* gate : {"r", "z", "h"}) {
      layout.add(p + "W_" + gate, in, kGruUnits, true);
      layout.add(p + "U_" + gate, kGruUnits, kGruUnits, true, true);
      layout.add(p + "b_" + gate, 1, kGruUnits, false);
    }
    in = kGruUnits;
  }
  layout.add("policy.W", kGruUnits, 5, true);
  layout.add("policy.b", 1, 5, false);
  layout.add("value.W", kGruUnits, 1, true);
  layout.add("value.b", 1, 1, false);
  return layout;
}

// Named tensors over one contiguous flat buffer, plus a parallel gradient
// buffer and per-tensor transpose caches for matmul weights. The flat view
// round-trips losslessly by construction: tensors are slices of it.
template <typename S>
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(ParamLayout layout)
      : layout_(std::move(layout)),
        flat_(layout_.total, S(0)),
        grad_(layout_.total, S(0)) {
    for (const auto& t : layout_.tensors) {
      trans_.emplace_back();
      if (t.is_matmul) trans_.back().assign(static_cast<std::size_t>(t.rows) * t.cols, S(0));
    }
  }

  const ParamLayout& layout() const { return layout_; }
  std::size_t size() const { return flat_.size(); }

  std::vector<S>& flat() { return flat_; }
  const std::vector<S>& flat() const { return flat_; }
  std::vector<S>& grad_flat() { return grad_; }
  const std::vector<S>& grad_flat() const { return grad_; }

  S* data(const TensorInfo& t) { return flat_.data() + t.offset; }
  const S* data(const TensorInfo& t) const { return flat_.data() + t.offset; }
  S* grad(const TensorInfo& t) { return grad_.data() + t.offset; }
  const S* grad(const TensorInfo& t) const { return grad_.data() + t.offset; }

  S* data(int idx) { return flat_.data() + layout_.tensors[idx].offset; }
  const S* data(int idx) const { return flat_.data() + layout_.tensors[idx].offset; }
  S* grad(int idx) { return grad_.data() + layout_.tensors[idx].offset; }
  const S* grad(int idx) const { return grad_.data() + layout_.tensors[idx].offset; }

  const TensorInfo& info(const std::string& name) const { return layout_.find(name); }

  // Transpose cache (cols x rows) for matmul weights; refresh after any
  // direct write to the flat view.
  const S* transpose(int idx) const { return trans_[idx].data(); }

  void sync_transposes() {
    for (std::size_t i = 0; i < layout_.tensors.size(); ++i) {
      const auto& t = layout_.tensors[i];
      if (!t.is_matmul) continue;
      const S* src = data(t);
      S* dst = trans_[i].data();
      for (int r = 0; r < t.rows; ++r) {
        for (int c = 0; c < t.cols; ++c) dst[static_cast<std::size_t>(c) * t.rows + r] = src[static_cast<std::size_t>(r) * t.cols + c];
      }
    }
  }

  void zero_grad() { std::fill(grad_.begin(), grad_.end(), S(0)); }

  bool values_finite() const {
    for (S v : flat_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  template <typename T>
  ParamSet<T> cast() const {
    ParamSet<T> out(layout_);
    for (std::size_t i = 0; i < flat_.size(); ++i) out.flat()[i] = static_cast<T>(flat_[i]);
    out.sync_transposes();
    return out;
  }

 private:
  ParamLayout layout_;
  std::vector<S> flat_;
  std::vector<S> grad_;
  std::vector<std::vector<S>> trans_;
};

// Global L2 gradient clipping; returns the pre-clip norm. max_norm 0 turns
// clipping off (the norm is still reported).
template <typename S>
double clip_grad_norm(ParamSet<S>& params, double max_norm) {
  double sq = 0.0;
  for (S g : params.grad_flat()) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const S scale = static_cast<S>(max_norm / norm);
    for (S& g : params.grad_flat()) g *= scale;
  }
  return norm;
}

// Weight matrices: uniform +-sqrt(6 / (fan_in + fan_out)). Recurrent
// matrices: orthogonal via modified Gram-Schmidt on a Gaussian draw.
// Biases zero. Deterministic per seed.
template <typename S>
ParamSet<S> init_params(const ParamLayout& layout, std::uint64_t seed) {
  ParamSet<S> params(layout);
  int tensor_idx = 0;
  for (const auto& t : layout.tensors) {
    RngStream rng(seed, "init", static_cast<std::uint64_t>(tensor_idx++));
    S* v = params.data(t);
    const std::size_t n = static_cast<std::size_t>(t.rows) * t.cols;
    if (!t.is_matmul) {
      continue;  // biases stay zero
    }
    if (t.is_recurrent) {
      check(t.rows == t.cols, "init_params: recurrent tensors must be square");
      const int n_dim = t.rows;
      std::vector<double> q(static_cast<std::size_t>(n_dim) * n_dim);
      for (auto& x : q) x = rng.next_gaussian();
      for (int r = 0; r < n_dim; ++r) {
        double* qr = q.data() + static_cast<std::size_t>(r) * n_dim;
        for (int p = 0; p < r; ++p) {
          const double* qp = q.data() + static_cast<std::size_t>(p) * n_dim;
          double dot = 0.0;
          for (int c = 0; c < n_dim; ++c) dot += qr[c] * qp[c];
          for (int c = 0; c < n_dim; ++c) qr[c] -= dot * qp[c];
        }
        double norm = 0.0;
        for (int c = 0; c < n_dim; ++c) norm += qr[c] * qr[c];
        norm = std::sqrt(norm);
        check(norm > 1e-8, "init_params: degenerate Gaussian draw");
        for (int c = 0; c < n_dim; ++c) qr[c] /= norm;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<S>(q[i]);
    } else {
      const double bound = std::sqrt(6.0 / (t.rows + t.cols));
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = static_cast<S>((rng.next_double() * 2.0 - 1.0) * bound);
      }
    }
  }
  params.sync_transposes();
  return params;
}

}  // namespace metacoop
