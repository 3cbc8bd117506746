#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "metacoop/gru.hpp"
#include "metacoop/mat.hpp"
#include "metacoop/params.hpp"
#include "metacoop/rng.hpp"
#include "metacoop/tape.hpp"

using namespace metacoop;

namespace {

Mat<double> mat1xn(std::initializer_list<double> xs) {
  Mat<double> m(1, static_cast<int>(xs.size()));
  int c = 0;
  for (double x : xs) m.at(0, c++) = x;
  return m;
}

}  // namespace

TEST_CASE("tape: hand-worked gradient of (w . x)^2") {
  ParamLayout layout;
  layout.add("w", 3, 1, true);
  ParamSet<double> params(layout);
  params.flat() = {0.5, -1.0, 2.0};
  params.sync_transposes();

  Tape<double> tape(&params);
  VarId x = tape.constant(mat1xn({1.0, 2.0, 3.0}));
  VarId y = tape.linear(x, 0, -1);  // w . x = 0.5 - 2 + 6 = 4.5
  CHECK(tape.val(y).at(0, 0) == doctest::Approx(4.5).epsilon(1e-12));
  VarId sq = tape.squared_error(y, {0.0});
  VarId loss = tape.mean_accum({sq});
  CHECK(tape.val(loss).at(0, 0) == doctest::Approx(20.25).epsilon(1e-12));

  params.zero_grad();
  tape.backward(loss);
  // dL/dw_i = 2 (w.x) x_i
  CHECK(params.grad_flat()[0] == doctest::Approx(2 * 4.5 * 1.0).epsilon(1e-12));
  CHECK(params.grad_flat()[1] == doctest::Approx(2 * 4.5 * 2.0).epsilon(1e-12));
  CHECK(params.grad_flat()[2] == doctest::Approx(2 * 4.5 * 3.0).epsilon(1e-12));
}

TEST_CASE("tape: loss of constants yields zero parameter gradients") {
  ParamLayout layout;
  layout.add("w", 2, 2, true);
  ParamSet<double> params(layout);
  params.flat() = {1.0, 2.0, 3.0, 4.0};
  params.sync_transposes();

  Tape<double> tape(&params);
  VarId c = tape.constant(mat1xn({3.0, -1.0}));
  VarId sq = tape.squared_error(c, {0.0, 0.0});
  VarId loss = tape.mean_accum({sq});
  params.zero_grad();
  tape.backward(loss);
  for (double g : params.grad_flat()) CHECK(g == 0.0);
}

TEST_CASE("tape: masked log-softmax zeroes masked entries and normalizes legal ones") {
  ParamLayout layout;
  layout.add("w", 1, 1, true);
  ParamSet<double> params(layout);
  Tape<double> tape(&params);

  VarId logits = tape.constant(mat1xn({1.0, 2.0, 3.0, 4.0, 5.0}));
  VarId lp = tape.masked_log_softmax(logits, {1, 0, 1, 1, 0});
  const auto& v = tape.val(lp);
  CHECK(std::exp(v.at(0, 1)) == 0.0);  // exactly zero probability
  CHECK(std::exp(v.at(0, 4)) == 0.0);
  double sum = std::exp(v.at(0, 0)) + std::exp(v.at(0, 2)) + std::exp(v.at(0, 3));
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  // order preserved among legal entries
  CHECK(v.at(0, 3) > v.at(0, 2));
  CHECK(v.at(0, 2) > v.at(0, 0));

  VarId zeros = tape.constant(mat1xn({0.0, 0.0, 0.0, 0.0, 0.0}));
  VarId lp2 = tape.masked_log_softmax(zeros, {1, 1, 0, 1, 0});
  for (int c : {0, 1, 3}) {
    CHECK(tape.val(lp2).at(0, c) == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
  }
}

TEST_CASE("tape: entropy of a uniform five-way distribution is ln 5") {
  ParamLayout layout;
  layout.add("w", 1, 1, true);
  ParamSet<double> params(layout);
  Tape<double> tape(&params);
  VarId zeros = tape.constant(mat1xn({0.0, 0.0, 0.0, 0.0, 0.0}));
  VarId lp = tape.masked_log_softmax(zeros, {1, 1, 1, 1, 1});
  VarId ent = tape.entropy(lp);
  CHECK(tape.val(ent).at(0, 0) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("tape: ppo surrogate values across the clip regions") {
  ParamLayout layout;
  layout.add("w", 1, 1, true);
  ParamSet<double> params(layout);
  Tape<double> tape(&params);

  // lp chosen so rho = exp(lp - lp_old) spans below/inside/above the clip
  Mat<double> lpm(4, 1);
  lpm.at(0, 0) = 0.0;              // rho = 1
  lpm.at(1, 0) = std::log(1.5);    // rho = 1.5 (above 1.2)
  lpm.at(2, 0) = std::log(0.5);    // rho = 0.5 (below 0.8)
  lpm.at(3, 0) = std::log(1.1);    // rho = 1.1 (inside)
  VarId lp = tape.constant(std::move(lpm));
  std::vector<double> lp_old = {0.0, 0.0, 0.0, 0.0};
  std::vector<double> adv = {2.0, 1.0, 1.0, -1.0};
  VarId s = tape.ppo_surrogate(lp, lp_old, adv, 0.2);
  const auto& v = tape.val(s);
  CHECK(v.at(0, 0) == doctest::Approx(-2.0).epsilon(1e-12));        // -min(1*2, 1*2)
  CHECK(v.at(1, 0) == doctest::Approx(-1.2).epsilon(1e-12));        // clip caps gain at 1.2
  CHECK(v.at(2, 0) == doctest::Approx(-0.5).epsilon(1e-12));        // min picks unclipped 0.5
  CHECK(v.at(3, 0) == doctest::Approx(1.1).epsilon(1e-12));         // -min(-1.1, -1.1)
}

TEST_CASE("tape: finite differences confirm masked softmax / gather / entropy backward") {
  ParamLayout layout;
  layout.add("w", 3, 5, true);
  ParamSet<double> params = init_params<double>(layout, 11);

  const std::vector<double> x = {0.3, -0.8, 1.1};
  const std::vector<std::uint8_t> mask = {1, 0, 1, 1, 0};
  const int action = 2;

  auto eval_loss = [&](const ParamSet<double>& p) {
    // logits = x W, lp = masked log softmax, loss = lp[action] + entropy
    std::vector<double> logits(5, 0.0);
    for (int c = 0; c < 5; ++c) {
      for (int r = 0; r < 3; ++r) logits[static_cast<size_t>(c)] += x[static_cast<size_t>(r)] * p.data(0)[r * 5 + c];
    }
    std::vector<double> lp(5, 0.0);
    kernels::masked_log_softmax_row(logits.data(), mask.data(), lp.data(), 5);
    double ent = 0.0;
    for (int c = 0; c < 5; ++c) ent -= std::exp(lp[static_cast<size_t>(c)]) * lp[static_cast<size_t>(c)];
    return lp[action] + ent;
  };

  ParamSet<double> work = params;
  Tape<double> tape(&work);
  Mat<double> xm(1, 3);
  for (int i = 0; i < 3; ++i) xm.at(0, i) = x[static_cast<size_t>(i)];
  VarId xv = tape.constant(std::move(xm));
  VarId logits = tape.linear(xv, 0, -1);
  VarId lp = tape.masked_log_softmax(logits, mask);
  VarId pick = tape.gather_col(lp, {action});
  VarId ent = tape.entropy(lp);
  VarId l0 = tape.mean_accum({pick});
  VarId l1 = tape.mean_accum({ent});
  VarId loss = tape.combine(l0, 1.0, l1, 1.0);
  CHECK(tape.val(loss).at(0, 0) == doctest::Approx(eval_loss(params)).epsilon(1e-12));

  work.zero_grad();
  tape.backward(loss);

  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamSet<double> up = params;
    ParamSet<double> dn = params;
    up.flat()[i] += h;
    dn.flat()[i] -= h;
    double fd = (eval_loss(up) - eval_loss(dn)) / (2 * h);
    double an = work.grad_flat()[i];
    CHECK(std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)}) < 1e-7);
  }
}

TEST_CASE("tape: traced GRU matches the plain forward bitwise") {
  const int input_dim = 6;
  const int batch = 4;
  const int steps = 7;
  ParamLayout layout = make_policy_layout(input_dim);
  ParamSet<float> params = init_params<float>(layout, 5);
  GruNetwork<float> net(&params);

  RngStream rng(3, "env", 0);
  std::vector<Mat<float>> inputs;
  for (int t = 0; t < steps; ++t) {
    Mat<float> x(batch, input_dim);
    for (auto& v : x.d) v = static_cast<float>(rng.next_gaussian());
    inputs.push_back(std::move(x));
  }

  // plain forward
  typename GruNetwork<float>::State state;
  state.reset(batch);
  typename GruNetwork<float>::Workspace ws;
  std::vector<Mat<float>> plain_logits, plain_values;
  Mat<float> logits, value;
  for (int t = 0; t < steps; ++t) {
    net.forward(inputs[static_cast<size_t>(t)], state, logits, value, ws);
    plain_logits.push_back(logits);
    plain_values.push_back(value);
  }

  // traced forward on a tape
  Tape<float> tape(&params);
  Mat<float> z(batch, kGruUnits);
  VarId h1 = tape.constant(z);
  VarId h2 = tape.constant(z);
  for (int t = 0; t < steps; ++t) {
    VarId x = tape.constant(inputs[static_cast<size_t>(t)]);
    auto out = net.traced(tape, x, h1, h2);
    h1 = out.h1;
    h2 = out.h2;
    const auto& tl = tape.val(out.logits);
    const auto& tv = tape.val(out.value);
    REQUIRE(tl.d.size() == plain_logits[static_cast<size_t>(t)].d.size());
    for (std::size_t i = 0; i < tl.d.size(); ++i) {
      CHECK(tl.d[i] == plain_logits[static_cast<size_t>(t)].d[i]);
    }
    for (std::size_t i = 0; i < tv.d.size(); ++i) {
      CHECK(tv.d[i] == plain_values[static_cast<size_t>(t)].d[i]);
    }
  }
  // final hidden states agree bitwise too
  const auto& th2 = tape.val(h2);
  for (std::size_t i = 0; i < th2.d.size(); ++i) CHECK(th2.d[i] == state.h2.d[i]);
}

TEST_CASE("tape: finite differences confirm the full recurrent loss gradient") {
  // Ten traced steps through the real two-layer GRU with the composite
  // loss shape used in training: surrogate + value error - entropy.
  const int input_dim = 6;
  const int batch = 3;
  const int steps = 10;
  ParamLayout layout = make_policy_layout(input_dim);
  ParamSet<double> base = init_params<double>(layout, 21);

  RngStream rng(9, "env", 0);
  std::vector<Mat<double>> inputs;
  for (int t = 0; t < steps; ++t) {
    Mat<double> x(batch, input_dim);
    for (auto& v : x.d) v = rng.next_gaussian() * 0.5;
    inputs.push_back(std::move(x));
  }
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<std::vector<int>> actions;
  std::vector<std::vector<double>> adv, lp_old, targets;
  for (int t = 0; t < steps; ++t) {
    std::vector<std::uint8_t> m(static_cast<size_t>(batch) * 5, 1);
    std::vector<int> a(batch);
    std::vector<double> ad(batch), tg(batch);
    for (int b = 0; b < batch; ++b) {
      m[static_cast<size_t>(b) * 5 + rng.next_below(5)] = 0;  // one illegal entry per row
      int act = static_cast<int>(rng.next_below(5));
      if (!m[static_cast<size_t>(b) * 5 + static_cast<size_t>(act)]) act = (act + 1) % 5;
      a[static_cast<size_t>(b)] = act;
      ad[static_cast<size_t>(b)] = rng.next_gaussian();
      tg[static_cast<size_t>(b)] = rng.next_gaussian();
    }
    masks.push_back(std::move(m));
    actions.push_back(std::move(a));
    adv.push_back(std::move(ad));
    targets.push_back(std::move(tg));
  }

  // record lp_old from the base forward so rho sits at 1 (the smooth clip
  // region), exactly as on the first replay epoch
  {
    GruNetwork<double> net(&base);
    typename GruNetwork<double>::State st;
    st.reset(batch);
    typename GruNetwork<double>::Workspace ws;
    Mat<double> logits, value;
    for (int t = 0; t < steps; ++t) {
      net.forward(inputs[static_cast<size_t>(t)], st, logits, value, ws);
      std::vector<double> lo(batch);
      std::vector<double> lp_row(5);
      for (int b = 0; b < batch; ++b) {
        kernels::masked_log_softmax_row(logits.row(b),
                                        masks[static_cast<size_t>(t)].data() + static_cast<std::size_t>(b) * 5,
                                        lp_row.data(), 5);
        lo[static_cast<size_t>(b)] = lp_row[static_cast<size_t>(actions[static_cast<size_t>(t)][static_cast<size_t>(b)])];
      }
      lp_old.push_back(std::move(lo));
    }
  }

  const double c_v = 0.5;
  const double c_e = 0.01;
  const double clip = 0.2;

  auto eval_loss = [&](ParamSet<double>& p) {
    Tape<double> tape(&p);
    Mat<double> z(batch, kGruUnits);
    VarId h1 = tape.constant(z);
    VarId h2 = tape.constant(z);
    GruNetwork<double> net(&p);
    std::vector<VarId> pol, val, ent;
    for (int t = 0; t < steps; ++t) {
      VarId x = tape.constant(inputs[static_cast<size_t>(t)]);
      auto out = net.traced(tape, x, h1, h2);
      h1 = out.h1;
      h2 = out.h2;
      VarId lp = tape.masked_log_softmax(out.logits, masks[static_cast<size_t>(t)]);
      VarId picked = tape.gather_col(lp, actions[static_cast<size_t>(t)]);
      pol.push_back(tape.ppo_surrogate(picked, lp_old[static_cast<size_t>(t)],
                                       adv[static_cast<size_t>(t)], clip));
      val.push_back(tape.squared_error(out.value, targets[static_cast<size_t>(t)]));
      ent.push_back(tape.entropy(lp));
    }
    VarId loss = tape.combine(tape.mean_accum(pol), 1.0, tape.mean_accum(val), c_v,
                              tape.mean_accum(ent), -c_e);
    return std::pair<Tape<double>, VarId>(std::move(tape), loss);
  };

  // analytic gradient at the base point
  ParamSet<double> work = base;
  {
    auto [tape, loss] = eval_loss(work);
    work.zero_grad();
    tape.backward(loss);
  }

  // forward-only finite differences on a sample of coordinates per tensor
  RngStream pick_rng(33, "init", 99);
  const double h = 1e-5;
  int checked = 0;
  for (int ti = 0; ti < static_cast<int>(layout.tensors.size()); ++ti) {
    const auto& info = layout.tensors[static_cast<size_t>(ti)];
    const std::size_t n = static_cast<std::size_t>(info.rows) * info.cols;
    for (int k = 0; k < 4; ++k) {
      std::size_t coord = info.offset + pick_rng.next_below(n);
      ParamSet<double> up = base;
      ParamSet<double> dn = base;
      up.flat()[coord] += h;
      dn.flat()[coord] -= h;
      up.sync_transposes();
      dn.sync_transposes();
      auto [tu, lu] = eval_loss(up);
      auto [td, ld] = eval_loss(dn);
      double fd = (tu.val(lu).at(0, 0) - td.val(ld).at(0, 0)) / (2 * h);
      double an = work.grad_flat()[coord];
      double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      CHECK(rel < 1e-6);
      ++checked;
    }
  }
  CHECK(checked == 4 * static_cast<int>(layout.tensors.size()));
}
