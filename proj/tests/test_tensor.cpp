#include <gtest/gtest.h>

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "semiflow/rng.hpp"
#include "semiflow/tensor.hpp"

using namespace semiflow;
using nn::Mat;
using nn::Tape;
using nn::Var;

namespace {

// Builds a scalar from leaf matrices, then compares every analytic gradient
// entry against a central difference.
void check_gradients(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    std::vector<Mat> leaves, double tol = 1e-7, double eps = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const Mat& m : leaves) vars.push_back(tape.leaf(m));
  Var root = build(tape, vars);
  ASSERT_EQ(tape.val(root).size(), 1);
  tape.backward(root);
  std::vector<Mat> analytic;
  for (Var v : vars) analytic.push_back(tape.grad(v));

  for (std::size_t li = 0; li < leaves.size(); ++li) {
    for (int idx = 0; idx < leaves[li].size(); ++idx) {
      auto eval = [&](double delta) {
        std::vector<Mat> shifted = leaves;
        shifted[li].data()[idx] += delta;
        Tape t2;
        std::vector<Var> vs;
        for (const Mat& m : shifted) vs.push_back(t2.leaf(m));
        return t2.val(build(t2, vs))(0, 0);
      };
      const double numeric = (eval(eps) - eval(-eps)) / (2 * eps);
      EXPECT_NEAR(analytic[li].data()[idx], numeric, tol)
          << "leaf " << li << " entry " << idx;
    }
  }
}

Mat randm(int r, int c, CounterRng& rng) { return rng.normal_mat(r, c); }

}  // namespace

TEST(Tape, ScalarChainValueAndGrad) {
  Tape tape;
  Var x = tape.leaf(Mat::Constant(1, 1, 2.0));
  Var y = nn::mul(x, x);                       // x^2
  Var z = nn::add_scalar(nn::scale(y, 3.0), 1.0);  // 3x^2 + 1
  EXPECT_DOUBLE_EQ(tape.val(z)(0, 0), 13.0);
  tape.backward(z);
  EXPECT_DOUBLE_EQ(tape.grad(x)(0, 0), 12.0);
}

TEST(Tape, RewindDropsNodes) {
  Tape tape;
  Var x = tape.leaf(Mat::Constant(2, 2, 1.0));
  const std::size_t mark = tape.mark();
  for (int i = 0; i < 10; ++i) nn::silu(x);
  EXPECT_EQ(tape.size(), mark + 10);
  tape.rewind(mark);
  EXPECT_EQ(tape.size(), mark);
}

TEST(Tape, ConstantsDoNotTrackGradients) {
  Tape tape;
  Var c = tape.constant(Mat::Constant(1, 1, 5.0));
  Var x = tape.leaf(Mat::Constant(1, 1, 3.0));
  Var y = nn::mul(c, x);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(tape.grad(x)(0, 0), 5.0);
  EXPECT_EQ(tape.grad(c).maxCoeff(), 0.0);
}

TEST(Ops, ShapeMismatchThrows) {
  Tape tape;
  Var a = tape.leaf(Mat::Zero(2, 3));
  Var b = tape.leaf(Mat::Zero(3, 2));
  EXPECT_THROW(nn::add(a, b), SizeError);
  EXPECT_THROW(nn::matmul(a, a), SizeError);
  EXPECT_THROW(nn::trace_of(a), SizeError);
}

TEST(Ops, ArithmeticGradients) {
  CounterRng rng(7);
  Mat a = randm(3, 4, rng);
  Mat b = randm(3, 4, rng);
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::sum_all(nn::mul(nn::add(v[0], v[1]), nn::sub(v[0], v[1])));
      },
      {a, b});
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::sum_all(nn::add_scalar(nn::scale(v[0], -1.7), 0.3));
      },
      {a});
}

TEST(Ops, MatmulAffineGradients) {
  CounterRng rng(8);
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::sum_all(nn::silu(nn::add_col(nn::matmul(v[0], v[1]), v[2])));
      },
      {randm(3, 2, rng), randm(2, 5, rng), randm(3, 1, rng)});
}

TEST(Ops, ActivationGradients) {
  CounterRng rng(9);
  Mat x = randm(4, 3, rng);
  for (auto fn : {&nn::silu, &nn::tanh_act, &nn::sigmoid}) {
    check_gradients(
        [fn](Tape&, const std::vector<Var>& v) { return nn::sum_all(fn(v[0])); },
        {x});
  }
  Mat positive = (x.array().abs() + 0.5).matrix();
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::sum_all(nn::sqrt_pos(v[0]));
      },
      {positive});
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::sum_all(nn::log_pos(v[0]));
      },
      {positive});
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::sum_all(nn::exp_all(v[0]));
      },
      {x});
}

TEST(Ops, SoftmaxColumnsSumToOne) {
  CounterRng rng(10);
  Tape tape;
  Var x = tape.leaf(randm(5, 4, rng));
  Var y = nn::softmax_cols(x);
  for (int c = 0; c < 4; ++c) {
    EXPECT_NEAR(tape.val(y).col(c).sum(), 1.0, 1e-12);
    EXPECT_GT(tape.val(y).col(c).minCoeff(), 0.0);
  }
}

TEST(Ops, SoftmaxGradients) {
  CounterRng rng(11);
  Mat x = randm(4, 3, rng);
  Mat w = randm(4, 3, rng);
  check_gradients(
      [&w](Tape& t, const std::vector<Var>& v) {
        return nn::sum_all(nn::mul(nn::softmax_cols(v[0]), t.constant(w)));
      },
      {x});
  check_gradients(
      [&w](Tape& t, const std::vector<Var>& v) {
        return nn::sum_all(nn::mul(nn::log_softmax_cols(v[0]), t.constant(w)));
      },
      {x});
}

TEST(Ops, GatherSegmentGradients) {
  CounterRng rng(12);
  Mat x = randm(3, 5, rng);
  auto idx = std::make_shared<const std::vector<int>>(
      std::vector<int>{4, 0, 0, 2, 3, 1});
  auto seg = std::make_shared<const std::vector<int>>(
      std::vector<int>{1, 0, 1, 2, 2, 0});
  check_gradients(
      [&](Tape&, const std::vector<Var>& v) {
        Var gathered = nn::gather_cols(v[0], idx);
        Var summed = nn::segment_sum_cols(gathered, seg, 3);
        return nn::sum_all(nn::mul(summed, summed));
      },
      {x});
}

TEST(Ops, ConcatSliceReshapeGradients) {
  CounterRng rng(13);
  Mat a = randm(2, 4, rng);
  Mat b = randm(3, 4, rng);
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        Var cat = nn::vcat({v[0], v[1]});
        Var top = nn::slice_rows(cat, 1, 3);
        Var flat = nn::reshape(top, 12, 1);
        Var left = nn::slice_cols(cat, 0, 2);
        return nn::add(nn::sum_all(nn::mul(flat, flat)),
                       nn::sum_all(left));
      },
      {a, b});
}

TEST(Ops, RowvecAndNormGradients) {
  CounterRng rng(14);
  Mat x = randm(3, 4, rng);
  Mat s = (randm(1, 4, rng).array().abs() + 0.7).matrix();
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        Var sq = nn::colwise_sqnorm(v[0]);
        Var scaled = nn::mul_rowvec(v[0], sq);
        Var divided = nn::div_rowvec(scaled, v[1]);
        return nn::sum_all(nn::add(divided, divided));
      },
      {x, s});
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::sum_all(nn::mul(nn::colwise_sum(v[0]), nn::colwise_sum(v[0])));
      },
      {x});
}

TEST(Ops, TiledGradients) {
  CounterRng rng(15);
  Mat t = randm(3, 8, rng);  // 2 blocks of width 4
  Mat s = randm(3, 4, rng);
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        Var y = nn::mul_tiled(v[0], v[1]);
        Var tiles = nn::tile_cols(v[1], 2);
        return nn::sum_all(nn::mul(y, tiles));
      },
      {t, s});
}

TEST(Ops, ReductionGradients) {
  CounterRng rng(16);
  Mat x = randm(4, 4, rng);
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return nn::add(nn::trace_of(v[0]),
                       nn::add(nn::sum_all(nn::mean_cols(v[0])),
                               nn::entry(v[0], 2, 1)));
      },
      {x});
}

TEST(Ops, DeterministicForward) {
  CounterRng rng(17);
  Mat x = randm(6, 6, rng);
  auto run = [&] {
    Tape tape;
    Var v = tape.leaf(x);
    return Mat(tape.val(nn::softmax_cols(nn::silu(nn::matmul(v, v)))));
  };
  const Mat a = run();
  const Mat b = run();
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(Ops, MulTiledMatchesBlockLoop) {
  CounterRng rng(18);
  Tape tape;
  Mat tm = randm(2, 6, rng);
  Mat sm = randm(2, 2, rng);
  Var y = nn::mul_tiled(tape.leaf(tm), tape.leaf(sm));
  for (int blk = 0; blk < 3; ++blk)
    EXPECT_TRUE(tape.val(y).middleCols(2 * blk, 2)
                    .isApprox(tm.middleCols(2 * blk, 2).cwiseProduct(sm)));
}
