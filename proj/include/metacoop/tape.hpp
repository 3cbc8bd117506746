#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "metacoop/check.hpp"
#include "metacoop/mat.hpp"
#include "metacoop/params.hpp"

namespace metacoop {

using VarId = std::int32_t;

// Reverse-mode tape over batched matrices (rows = lockstep episodes).
// Records the forward computation of one or more episodes and produces exact
// gradients of a scalar loss with respect to a ParamSet. Values are computed
// eagerly at op creation through the same kernels the untraced forward path
// uses, so a traced replay is bit-identical to the rollout that recorded it.
template <typename S>
class Tape {
 public:
  explicit Tape(ParamSet<S>* params) : params_(params) {}

  enum class Op : std::uint8_t {
    Constant,
    Linear,
    Sigmoid,
    Tanh,
    Hadamard,
    Add,
    Blend,
    MaskedLogSoftmax,
    GatherCol,
    Entropy,
    PpoSurrogate,
    SquaredError,
    MeanAccum,
    Combine,
  };

  VarId constant(Mat<S> m) {
    Node n;
    n.op = Op::Constant;
    n.val = std::move(m);
    n.requires_grad = false;
    return push(std::move(n));
  }

  // Y = X * W + b. `w` and `bias` are tensor indices into the ParamSet;
  // bias may be -1.
  VarId linear(VarId x, int w, int bias) {
    const auto& wt = tensor(w);
    const Mat<S>& xv = val(x);
    check(xv.cols == wt.rows, "tape linear: input dim mismatch for " + wt.name);
    Node n;
    n.op = Op::Linear;
    n.a = x;
    n.w = w;
    n.bias = bias;
    n.val.resize(xv.rows, wt.cols);
    kernels::linear_fwd(xv.d.data(), xv.rows, xv.cols, params_->data(w),
                        bias >= 0 ? params_->data(bias) : nullptr, n.val.d.data(), wt.cols);
    n.requires_grad = true;
    return push(std::move(n));
  }

  VarId sigmoid(VarId x) { return unary(Op::Sigmoid, x); }
  VarId tanh_(VarId x) { return unary(Op::Tanh, x); }

  VarId add(VarId a, VarId b) {
    const Mat<S>& av = val(a);
    const Mat<S>& bv = val(b);
    check(av.rows == bv.rows && av.cols == bv.cols, "tape add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.val.resize(av.rows, av.cols);
    for (std::size_t i = 0; i < av.d.size(); ++i) n.val.d[i] = av.d[i] + bv.d[i];
    n.requires_grad = tracked(a) || tracked(b);
    return push(std::move(n));
  }

  VarId hadamard(VarId a, VarId b) {
    const Mat<S>& av = val(a);
    const Mat<S>& bv = val(b);
    check(av.rows == bv.rows && av.cols == bv.cols, "tape hadamard: shape mismatch");
    Node n;
    n.op = Op::Hadamard;
    n.a = a;
    n.b = b;
    n.val.resize(av.rows, av.cols);
    for (std::size_t i = 0; i < av.d.size(); ++i) n.val.d[i] = av.d[i] * bv.d[i];
    n.requires_grad = tracked(a) || tracked(b);
    return push(std::move(n));
  }

  // Y = (1 - Z) * H + Z * C — the GRU state blend.
  VarId blend(VarId h, VarId cand, VarId z) {
    const Mat<S>& hv = val(h);
    const Mat<S>& cv = val(cand);
    const Mat<S>& zv = val(z);
    Node n;
    n.op = Op::Blend;
    n.a = h;
    n.b = cand;
    n.c = z;
    n.val.resize(hv.rows, hv.cols);
    for (std::size_t i = 0; i < hv.d.size(); ++i) {
      n.val.d[i] = (S(1) - zv.d[i]) * hv.d[i] + zv.d[i] * cv.d[i];
    }
    n.requires_grad = tracked(h) || tracked(cand) || tracked(z);
    return push(std::move(n));
  }

  // Row-wise log-softmax over legal entries; masked entries get log-prob
  // -1e30 (probability exactly zero downstream).
  VarId masked_log_softmax(VarId logits, std::vector<std::uint8_t> mask) {
    const Mat<S>& lv = val(logits);
    check(static_cast<int>(mask.size()) == lv.rows * lv.cols,
          "tape masked_log_softmax: mask size mismatch");
    Node n;
    n.op = Op::MaskedLogSoftmax;
    n.a = logits;
    n.val.resize(lv.rows, lv.cols);
    for (int r = 0; r < lv.rows; ++r) {
      kernels::masked_log_softmax_row(lv.row(r),
                                      mask.data() + static_cast<std::size_t>(r) * lv.cols,
                                      n.val.row(r), lv.cols);
    }
    n.mask = std::move(mask);
    n.requires_grad = tracked(logits);
    return push(std::move(n));
  }

  VarId gather_col(VarId x, std::vector<int> cols) {
    const Mat<S>& xv = val(x);
    check(static_cast<int>(cols.size()) == xv.rows, "tape gather_col: index count mismatch");
    Node n;
    n.op = Op::GatherCol;
    n.a = x;
    n.val.resize(xv.rows, 1);
    for (int r = 0; r < xv.rows; ++r) {
      check(cols[r] >= 0 && cols[r] < xv.cols, "tape gather_col: index out of range");
      n.val.at(r, 0) = xv.at(r, cols[r]);
    }
    n.idx = std::move(cols);
    n.requires_grad = tracked(x);
    return push(std::move(n));
  }

  // Per-row Shannon entropy of the distribution behind a log-prob row.
  VarId entropy(VarId logp) {
    const Mat<S>& lv = val(logp);
    Node n;
    n.op = Op::Entropy;
    n.a = logp;
    n.val.resize(lv.rows, 1);
    for (int r = 0; r < lv.rows; ++r) {
      S ent = S(0);
      const S* lp = lv.row(r);
      for (int c = 0; c < lv.cols; ++c) {
        const S p = std::exp(lp[c]);
        ent -= p * lp[c];
      }
      n.val.at(r, 0) = ent;
    }
    n.requires_grad = tracked(logp);
    return push(std::move(n));
  }

  // Per-row clipped-surrogate policy loss: -min(rho*A, clip(rho)*A) with
  // rho = exp(lp - lp_old). `lp` is B x 1.
  VarId ppo_surrogate(VarId lp, std::vector<S> lp_old, std::vector<S> adv, S clip_eps) {
    const Mat<S>& lv = val(lp);
    check(lv.cols == 1, "tape ppo_surrogate: expected column input");
    check(static_cast<int>(lp_old.size()) == lv.rows && adv.size() == lp_old.size(),
          "tape ppo_surrogate: payload size mismatch");
    Node n;
    n.op = Op::PpoSurrogate;
    n.a = lp;
    n.val.resize(lv.rows, 1);
    for (int r = 0; r < lv.rows; ++r) {
      const S rho = std::exp(lv.at(r, 0) - lp_old[r]);
      const S rho_c = std::clamp(rho, S(1) - clip_eps, S(1) + clip_eps);
      n.val.at(r, 0) = -std::min(rho * adv[r], rho_c * adv[r]);
    }
    n.aux1 = std::move(lp_old);
    n.aux2 = std::move(adv);
    n.scalar0 = clip_eps;
    n.requires_grad = tracked(lp);
    return push(std::move(n));
  }

  VarId squared_error(VarId x, std::vector<S> target) {
    const Mat<S>& xv = val(x);
    check(static_cast<int>(target.size()) == xv.rows * xv.cols,
          "tape squared_error: target size mismatch");
    Node n;
    n.op = Op::SquaredError;
    n.a = x;
    n.val.resize(xv.rows, xv.cols);
    for (std::size_t i = 0; i < xv.d.size(); ++i) {
      const S diff = xv.d[i] - target[i];
      n.val.d[i] = diff * diff;
    }
    n.aux1 = std::move(target);
    n.requires_grad = tracked(x);
    return push(std::move(n));
  }

  // Scalar mean over every element of every listed var.
  VarId mean_accum(std::vector<VarId> parts) {
    check(!parts.empty(), "tape mean_accum: empty list");
    Node n;
    n.op = Op::MeanAccum;
    n.val.resize(1, 1);
    double sum = 0.0;
    std::size_t count = 0;
    bool req = false;
    for (VarId v : parts) {
      for (S x : val(v).d) sum += static_cast<double>(x);
      count += val(v).d.size();
      req = req || tracked(v);
    }
    n.val.at(0, 0) = static_cast<S>(sum / static_cast<double>(count));
    n.scalar0 = S(1) / static_cast<S>(count);
    n.list = std::move(parts);
    n.requires_grad = req;
    return push(std::move(n));
  }

  // L = c0*s0 + c1*s1 + c2*s2 over scalar vars (s2 optional).
  VarId combine(VarId s0, S c0, VarId s1, S c1, VarId s2 = -1, S c2 = S(0)) {
    Node n;
    n.op = Op::Combine;
    n.a = s0;
    n.b = s1;
    n.c = s2;
    n.scalar0 = c0;
    n.scalar1 = c1;
    n.scalar2 = c2;
    n.val.resize(1, 1);
    n.val.at(0, 0) = c0 * val(s0).at(0, 0) + c1 * val(s1).at(0, 0) +
                     (s2 >= 0 ? c2 * val(s2).at(0, 0) : S(0));
    n.requires_grad = true;
    return push(std::move(n));
  }

  const Mat<S>& val(VarId id) const { return nodes_[id].val; }
  const Mat<S>& grad(VarId id) const { return nodes_[id].grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss. Parameter gradients accumulate into
  // the ParamSet's gradient buffer (not cleared here, so losses can sum).
  void backward(VarId loss) {
    check(val(loss).rows == 1 && val(loss).cols == 1, "tape backward: loss must be scalar");
    for (auto& n : nodes_) {
      if (n.requires_grad) {
        n.grad.resize(n.val.rows, n.val.cols);
      }
    }
    // A loss of constants only (nothing tracked) legitimately yields all-zero
    // parameter gradients.
    nodes_[loss].grad.resize(1, 1);
    nodes_[loss].grad.at(0, 0) = S(1);
    for (VarId id = static_cast<VarId>(nodes_.size()) - 1; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.requires_grad) continue;
      backward_node(n);
    }
  }

 private:
  struct Node {
    Op op = Op::Constant;
    VarId a = -1, b = -1, c = -1;
    int w = -1, bias = -1;
    bool requires_grad = false;
    Mat<S> val;
    Mat<S> grad;
    std::vector<std::uint8_t> mask;
    std::vector<int> idx;
    std::vector<S> aux1, aux2;
    S scalar0 = S(0), scalar1 = S(0), scalar2 = S(0);
    std::vector<VarId> list;
  };

  const TensorInfo& tensor(int w) const { return params_->layout().tensors[w]; }
  bool tracked(VarId id) const { return nodes_[id].requires_grad; }

  VarId unary(Op op, VarId x) {
    const Mat<S>& xv = val(x);
    Node n;
    n.op = op;
    n.a = x;
    n.val.resize(xv.rows, xv.cols);
    if (op == Op::Sigmoid) {
      kernels::sigmoid_fwd(xv.d.data(), n.val.d.data(), xv.d.size());
    } else {
      kernels::tanh_fwd(xv.d.data(), n.val.d.data(), xv.d.size());
    }
    n.requires_grad = tracked(x);
    return push(std::move(n));
  }

  VarId push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<VarId>(nodes_.size()) - 1;
  }

  Mat<S>* grad_of(VarId id) {
    if (id < 0 || !nodes_[id].requires_grad) return nullptr;
    return &nodes_[id].grad;
  }

  void backward_node(Node& n) {
    const Mat<S>& g = n.grad;
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Linear: {
        const Mat<S>& x = nodes_[n.a].val;
        const auto& wt = tensor(n.w);
        kernels::linear_bwd_params(x.d.data(), g.d.data(), x.rows, wt.rows, wt.cols,
                                   params_->grad(n.w),
                                   n.bias >= 0 ? params_->grad(n.bias) : nullptr);
        if (Mat<S>* dx = grad_of(n.a)) {
          kernels::linear_bwd_input(g.d.data(), g.rows, wt.cols, params_->transpose(n.w),
                                    dx->d.data(), wt.rows);
        }
        break;
      }
      case Op::Sigmoid:
        if (Mat<S>* dx = grad_of(n.a)) {
          for (std::size_t i = 0; i < g.d.size(); ++i) {
            const S y = n.val.d[i];
            dx->d[i] += g.d[i] * y * (S(1) - y);
          }
        }
        break;
      case Op::Tanh:
        if (Mat<S>* dx = grad_of(n.a)) {
          for (std::size_t i = 0; i < g.d.size(); ++i) {
            const S y = n.val.d[i];
            dx->d[i] += g.d[i] * (S(1) - y * y);
          }
        }
        break;
      case Op::Add:
        if (Mat<S>* da = grad_of(n.a)) {
          for (std::size_t i = 0; i < g.d.size(); ++i) da->d[i] += g.d[i];
        }
        if (Mat<S>* db = grad_of(n.b)) {
          for (std::size_t i = 0; i < g.d.size(); ++i) db->d[i] += g.d[i];
        }
        break;
      case Op::Hadamard:
        if (Mat<S>* da = grad_of(n.a)) {
          const Mat<S>& bv = nodes_[n.b].val;
          for (std::size_t i = 0; i < g.d.size(); ++i) da->d[i] += g.d[i] * bv.d[i];
        }
        if (Mat<S>* db = grad_of(n.b)) {
          const Mat<S>& av = nodes_[n.a].val;
          for (std::size_t i = 0; i < g.d.size(); ++i) db->d[i] += g.d[i] * av.d[i];
        }
        break;
      case Op::Blend: {
        const Mat<S>& h = nodes_[n.a].val;
        const Mat<S>& cand = nodes_[n.b].val;
        const Mat<S>& z = nodes_[n.c].val;
        if (Mat<S>* dh = grad_of(n.a)) {
          for (std::size_t i = 0; i < g.d.size(); ++i) dh->d[i] += g.d[i] * (S(1) - z.d[i]);
        }
        if (Mat<S>* dc = grad_of(n.b)) {
          for (std::size_t i = 0; i < g.d.size(); ++i) dc->d[i] += g.d[i] * z.d[i];
        }
        if (Mat<S>* dz = grad_of(n.c)) {
          for (std::size_t i = 0; i < g.d.size(); ++i) {
            dz->d[i] += g.d[i] * (cand.d[i] - h.d[i]);
          }
        }
        break;
      }
      case Op::MaskedLogSoftmax:
        if (Mat<S>* dx = grad_of(n.a)) {
          for (int r = 0; r < g.rows; ++r) {
            const S* gr = g.row(r);
            const S* lp = n.val.row(r);
            S* dxr = dx->row(r);
            S sum = S(0);
            for (int c = 0; c < g.cols; ++c) sum += gr[c];
            for (int c = 0; c < g.cols; ++c) {
              const S p = std::exp(lp[c]);  // exactly 0 for masked entries
              dxr[c] += gr[c] - p * sum;
            }
          }
        }
        break;
      case Op::GatherCol:
        if (Mat<S>* dx = grad_of(n.a)) {
          for (int r = 0; r < g.rows; ++r) dx->at(r, n.idx[r]) += g.at(r, 0);
        }
        break;
      case Op::Entropy:
        if (Mat<S>* dlp = grad_of(n.a)) {
          const Mat<S>& lp = nodes_[n.a].val;
          for (int r = 0; r < lp.rows; ++r) {
            const S gr = g.at(r, 0);
            const S* lpr = lp.row(r);
            S* dr = dlp->row(r);
            for (int c = 0; c < lp.cols; ++c) {
              const S p = std::exp(lpr[c]);
              dr[c] += gr * (-p * (lpr[c] + S(1)));
            }
          }
        }
        break;
      case Op::PpoSurrogate:
        if (Mat<S>* dlp = grad_of(n.a)) {
          const Mat<S>& lp = nodes_[n.a].val;
          for (int r = 0; r < lp.rows; ++r) {
            const S rho = std::exp(lp.at(r, 0) - n.aux1[r]);
            const S adv = n.aux2[r];
            const S rho_c = std::clamp(rho, S(1) - n.scalar0, S(1) + n.scalar0);
            const S s1 = rho * adv;
            const S s2 = rho_c * adv;
            const S deriv = s1 <= s2 ? s1 : S(0);
            dlp->at(r, 0) += g.at(r, 0) * -deriv;
          }
        }
        break;
      case Op::SquaredError:
        if (Mat<S>* dx = grad_of(n.a)) {
          const Mat<S>& x = nodes_[n.a].val;
          for (std::size_t i = 0; i < x.d.size(); ++i) {
            dx->d[i] += g.d[i] * S(2) * (x.d[i] - n.aux1[i]);
          }
        }
        break;
      case Op::MeanAccum: {
        const S scale = g.at(0, 0) * n.scalar0;
        for (VarId v : n.list) {
          if (Mat<S>* dv = grad_of(v)) {
            for (std::size_t i = 0; i < dv->d.size(); ++i) dv->d[i] += scale;
          }
        }
        break;
      }
      case Op::Combine: {
        const S gs = g.at(0, 0);
        if (Mat<S>* da = grad_of(n.a)) da->at(0, 0) += gs * n.scalar0;
        if (Mat<S>* db = grad_of(n.b)) db->at(0, 0) += gs * n.scalar1;
        if (n.c >= 0) {
          if (Mat<S>* dc = grad_of(n.c)) dc->at(0, 0) += gs * n.scalar2;
        }
        break;
      }
    }
  }

  ParamSet<S>* params_;
  std::vector<Node> nodes_;
};

}  // namespace metacoop
