#pragma once

#include <string>

#include "metacoop/mat.hpp"
#include "metacoop/params.hpp"
#include "metacoop/tape.hpp"

namespace metacoop {

namespace detail {

template <typename S>
void add_ew(const Mat<S>& a, const Mat<S>& b, Mat<S>& y) {
  for (std::size_t i = 0; i < y.d.size(); ++i) y.d[i] = a.d[i] + b.d[i];
}

template <typename S>
void mul_ew(const Mat<S>& a, const Mat<S>& b, Mat<S>& y) {
  for (std::size_t i = 0; i < y.d.size(); ++i) y.d[i] = a.d[i] * b.d[i];
}

template <typename S>
void blend_ew(const Mat<S>& h, const Mat<S>& cand, const Mat<S>& z, Mat<S>& y) {
  for (std::size_t i = 0; i < y.d.size(); ++i) {
    y.d[i] = (S(1) - z.d[i]) * h.d[i] + z.d[i] * cand.d[i];
  }
}

}  // namespace detail

// Two stacked GRU layers feeding a 5-way policy head and a scalar value head
// off the second layer's state. The untraced step and the taped step issue
// the same kernel calls in the same order, so replaying a rollout on the tape
// reproduces its activations bit for bit.
template <typename S>
class GruNetwork {
 public:
  explicit GruNetwork(const ParamSet<S>* params) : params_(params) {
    const ParamLayout& layout = params->layout();
    for (int layer = 0; layer < kGruLayers; ++layer) {
      const std::string p = "l" + std::to_string(layer + 1) + ".";
      auto& ix = layers_[layer];
      ix.w_r = layout.find_index(p + "W_r");
      ix.u_r = layout.find_index(p + "U_r");
      ix.b_r = layout.find_index(p + "b_r");
      ix.w_z = layout.find_index(p + "W_z");
      ix.u_z = layout.find_index(p + "U_z");
      ix.b_z = layout.find_index(p + "b_z");
      ix.w_h = layout.find_index(p + "W_h");
      ix.u_h = layout.find_index(p + "U_h");
      ix.b_h = layout.find_index(p + "b_h");
    }
    policy_w_ = layout.find_index("policy.W");
    policy_b_ = layout.find_index("policy.b");
    value_w_ = layout.find_index("value.W");
    value_b_ = layout.find_index("value.b");
    input_dim_ = layout.tensors[layers_[0].w_r].rows;
  }

  int input_dim() const { return input_dim_; }
  const ParamSet<S>& params() const { return *params_; }

  // Recurrent state for a lockstep batch; starts at zero.
  struct State {
    Mat<S> h1, h2;
    void reset(int batch) {
      h1.resize(batch, kGruUnits);
      h2.resize(batch, kGruUnits);
    }
  };

  // Scratch for the untraced step, reusable across steps.
  struct Workspace {
    Mat<S> a, u, s, r, z, rh, cand, h_new;
  };

  void forward(const Mat<S>& x, State& state, Mat<S>& logits, Mat<S>& value,
               Workspace& ws) const {
    check(x.cols == input_dim_, "GruNetwork::forward: bad input width");
    check(state.h1.rows == x.rows && state.h2.rows == x.rows,
          "GruNetwork::forward: state batch mismatch");
    cell(x, state.h1, layers_[0], ws);
    std::swap(state.h1, ws.h_new);
    cell(state.h1, state.h2, layers_[1], ws);
    std::swap(state.h2, ws.h_new);
    head(state.h2, policy_w_, policy_b_, logits);
    head(state.h2, value_w_, value_b_, value);
  }

  struct Traced {
    VarId h1, h2, logits, value;
  };

  Traced traced(Tape<S>& tape, VarId x, VarId h1, VarId h2) const {
    const VarId h1n = traced_cell(tape, x, h1, layers_[0]);
    const VarId h2n = traced_cell(tape, h1n, h2, layers_[1]);
    return Traced{h1n, h2n, tape.linear(h2n, policy_w_, policy_b_),
                  tape.linear(h2n, value_w_, value_b_)};
  }

 private:
  struct LayerIdx {
    int w_r, u_r, b_r, w_z, u_z, b_z, w_h, u_h, b_h;
  };

  void lin(const Mat<S>& x, int w, int bias, Mat<S>& y) const {
    const auto& wt = params_->layout().tensors[w];
    y.resize(x.rows, wt.cols);
    kernels::linear_fwd(x.d.data(), x.rows, x.cols, params_->data(w),
                        bias >= 0 ? params_->data(bias) : nullptr, y.d.data(), wt.cols);
  }

  void head(const Mat<S>& h, int w, int bias, Mat<S>& y) const { lin(h, w, bias, y); }

  // h' = (1-z) h + z tanh(W_h x + U_h (r h) + b_h); result in ws.h_new.
  void cell(const Mat<S>& x, const Mat<S>& h, const LayerIdx& ix, Workspace& ws) const {
    lin(x, ix.w_r, ix.b_r, ws.a);
    lin(h, ix.u_r, -1, ws.u);
    ws.s.resize(h.rows, kGruUnits);
    detail::add_ew(ws.a, ws.u, ws.s);
    ws.r.resize(h.rows, kGruUnits);
    kernels::sigmoid_fwd(ws.s.d.data(), ws.r.d.data(), ws.s.d.size());

    lin(x, ix.w_z, ix.b_z, ws.a);
    lin(h, ix.u_z, -1, ws.u);
    detail::add_ew(ws.a, ws.u, ws.s);
    ws.z.resize(h.rows, kGruUnits);
    kernels::sigmoid_fwd(ws.s.d.data(), ws.z.d.data(), ws.s.d.size());

    lin(x, ix.w_h, ix.b_h, ws.a);
    ws.rh.resize(h.rows, kGruUnits);
    detail::mul_ew(ws.r, h, ws.rh);
    lin(ws.rh, ix.u_h, -1, ws.u);
    detail::add_ew(ws.a, ws.u, ws.s);
    ws.cand.resize(h.rows, kGruUnits);
    kernels::tanh_fwd(ws.s.d.data(), ws.cand.d.data(), ws.s.d.size());

    ws.h_new.resize(h.rows, kGruUnits);
    detail::blend_ew(h, ws.cand, ws.z, ws.h_new);
  }

  VarId traced_cell(Tape<S>& tape, VarId x, VarId h, const LayerIdx& ix) const {
    const VarId r = tape.sigmoid(tape.add(tape.linear(x, ix.w_r, ix.b_r),
                                          tape.linear(h, ix.u_r, -1)));
    const VarId z = tape.sigmoid(tape.add(tape.linear(x, ix.w_z, ix.b_z),
                                          tape.linear(h, ix.u_z, -1)));
    const VarId cand = tape.tanh_(tape.add(tape.linear(x, ix.w_h, ix.b_h),
                                           tape.linear(tape.hadamard(r, h), ix.u_h, -1)));
    return tape.blend(h, cand, z);
  }

  const ParamSet<S>* params_;
  LayerIdx layers_[kGruLayers];
  int policy_w_, policy_b_, value_w_, value_b_;
  int input_dim_ = 0;
};

}  // namespace metacoop
