#include "analytic_models.hpp"
#include "toy_fixtures.hpp"

#include "srl/nets/grad_check.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

using srl::Matrix;
using srl::Vector;
using Model = srl::model::DynamicsModel<float>;

namespace {

Model small_model(int hidden = 64, std::uint64_t seed = 1) {
  srl::Rng rng(seed);
  return Model({3, 2, hidden, 2, false}, rng);
}

// Stable linear system used as the simulator oracle.
Matrix<float> system_a() {
  Matrix<float> a(3, 3);
  a << 0.9f, 0.1f, 0.0f, -0.1f, 0.9f, 0.1f, 0.0f, 0.05f, 0.95f;
  return a;
}
Matrix<float> system_b() {
  Matrix<float> b(3, 2);
  b << 0.1f, 0.0f, 0.0f, 0.1f, 0.05f, -0.05f;
  return b;
}

srl::TransitionBatch<float> linear_data(int n, srl::Rng& rng) {
  srl::TransitionBatch<float> b;
  b.states = srl::uniform<float>(3, n, -1, 1, rng);
  b.actions = srl::uniform<float>(2, n, -1, 1, rng);
  b.next_states = system_a() * b.states + system_b() * b.actions;
  b.rewards = srl::RowVector<float>::Zero(n);
  b.dones = srl::RowVector<float>::Zero(n);
  return b;
}

void fit(Model& model, const std::function<srl::TransitionBatch<float>(srl::Rng&)>& sample, int steps) {
  srl::nets::Adam<float> opt(model.params(), 1e-3);
  srl::Rng rng(99);
  for (int i = 0; i < steps; ++i) {
    auto g = model.params().zeros_like();
    model.loss(sample(rng), &g);
    opt.step(model.params(), g);
  }
}

}  // namespace

TEST(DynamicsModel, UntrainedPredictionIsFiniteWithStateDimension) {
  auto model = small_model();
  const Vector<float> s = Vector<float>::Constant(3, 0.5f);
  const Vector<float> a = Vector<float>::Constant(2, -0.5f);
  const auto next = model.predict(s, a);
  EXPECT_EQ(next.size(), 3);
  EXPECT_TRUE(next.allFinite());
}

TEST(DynamicsModel, NonFiniteInputIsAnError) {
  auto model = small_model();
  Vector<float> s = Vector<float>::Zero(3);
  s(1) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(model.predict(s, Vector<float>::Zero(2)), srl::NumericError);
  EXPECT_THROW(model.predict(Vector<float>::Zero(4), Vector<float>::Zero(2)), srl::DimensionError);
}

TEST(ModelLoss, Arithmetic) {
  Matrix<float> p(1, 1), t(1, 1);
  p << 1.0f;
  t << 3.0f;
  EXPECT_FLOAT_EQ(srl::model::mean_squared_error(p, t), 4.0f);
  Matrix<float> p2(1, 2), t2(1, 2);
  p2 << 1.0f, 2.0f;
  t2 << 1.0f, 4.0f;
  EXPECT_FLOAT_EQ(srl::model::mean_squared_error(p2, t2), 2.0f);
}

TEST(ModelLoss, ZeroWhenPredictionsEqualTargets) {
  auto model = small_model();
  srl::Rng rng(3);
  auto batch = linear_data(16, rng);
  batch.next_states = model.forward(model.params(), batch.states, batch.actions);
  EXPECT_FLOAT_EQ(model.loss(batch), 0.0f);
}

TEST(ModelLoss, EqualsPlainMseWithIdentityWhitening) {
  auto model = small_model();
  srl::Rng rng(5);
  auto batch = linear_data(32, rng);
  const auto pred = model.forward(model.params(), batch.states, batch.actions);
  EXPECT_NEAR(model.loss(batch), srl::model::mean_squared_error(pred, batch.next_states), 1e-6);
}

TEST(ModelLoss, GradientMatchesFiniteDifferences) {
  for (bool delta : {false, true}) {
    auto model = toy::model(3, delta);
    const auto batch = toy::batch();
    srl::nets::LossFn<double> loss = [&](const srl::nets::ParameterSet<double>& p, srl::nets::ParameterSet<double>* g) {
      return model.loss(p, batch, g);
    };
    const auto r = srl::nets::grad_check(loss, model.params(), 1e-6, 400);
    EXPECT_LT(r.max_relative_error, 1e-2) << "delta=" << delta;
  }
}

TEST(DynamicsModel, LearnsIdentitySystem) {
  auto model = small_model(64, 4);
  fit(model,
      [](srl::Rng& rng) {
        srl::TransitionBatch<float> b;
        b.states = srl::uniform<float>(3, 128, -1, 1, rng);
        b.actions = srl::uniform<float>(2, 128, -1, 1, rng);
        b.next_states = b.states;
        b.rewards = srl::RowVector<float>::Zero(128);
        b.dones = b.rewards;
        return b;
      },
      3000);
  srl::Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const Vector<float> s = srl::uniform<float>(3, 1, -0.9f, 0.9f, rng);
    const Vector<float> a = srl::uniform<float>(2, 1, -1, 1, rng);
    EXPECT_LT((model.predict(s, a) - s).norm(), 0.05f);
  }
}

TEST(DynamicsModel, LearnsLinearSystem) {
  auto model = small_model(64, 5);
  fit(model, [](srl::Rng& rng) { return linear_data(128, rng); }, 4000);
  srl::Rng rng(23);
  const auto held_out = linear_data(500, rng);
  const auto pred = model.forward(model.params(), held_out.states, held_out.actions);
  EXPECT_LT((pred - held_out.next_states).cwiseAbs().maxCoeff(), 0.05f);
}

TEST(Rollout, SingleStepEqualsTargetPrediction) {
  auto model = toy::model();
  const Vector<double> s0 = Vector<double>::Constant(3, 0.2);
  const Vector<double> a = Vector<double>::Constant(2, 0.3);
  const auto states = model.rollout(s0, {a});
  ASSERT_EQ(states.size(), 1u);
  EXPECT_EQ(states[0], model.predict_with(model.target_params(), s0, a));
  EXPECT_NE(states[0], model.predict(s0, a));  // online and target differ in the fixture
}

TEST(Rollout, IdentityModelKeepsTheState) {
  srl::Rng rng(1);
  srl::model::DynamicsModel<double> model({3, 2, 16, 2, false}, rng);
  Matrix<double> m = Matrix<double>::Zero(3, 5);
  m.leftCols(3).setIdentity();
  analytic::set_linear_model(model, model.target_params(), m);
  const Vector<double> s0 = (Vector<double>(3) << 0.4, -1.3, 2.0).finished();
  std::vector<Vector<double>> actions(6, Vector<double>::Constant(2, 0.7));
  for (const auto& s : model.rollout(s0, actions)) EXPECT_EQ(s, s0);
}

// Closed-form oracle: s_k = A^k s_0 + sum_i A^{k-1-i} B a_i.
TEST(Rollout, LinearSystemMatchesClosedForm) {
  srl::Rng rng(2);
  srl::model::DynamicsModel<double> model({3, 2, 16, 2, false}, rng);
  Matrix<double> a = system_a().cast<double>(), b = system_b().cast<double>();
  Matrix<double> m(3, 5);
  m << a, b;
  analytic::set_linear_model(model, model.target_params(), m);
  model.reset_evaluations();
  const Vector<double> s0 = (Vector<double>(3) << 0.5, -0.25, 1.0).finished();
  std::vector<Vector<double>> actions;
  for (int i = 0; i < 4; ++i) actions.push_back(srl::uniform<double>(2, 1, -1, 1, rng));
  const auto states = model.rollout(s0, actions);
  EXPECT_EQ(model.evaluations(), 4u);
  for (int k = 1; k <= 4; ++k) {
    Vector<double> expected = Eigen::MatrixPower<Matrix<double>>(a)(k) * s0;
    for (int i = 0; i < k; ++i) expected += Eigen::MatrixPower<Matrix<double>>(a)(k - 1 - i) * b * actions[i];
    EXPECT_LT((states[k - 1] - expected).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Rollout, NonFiniteIntermediateStateReportsStep) {
  srl::Rng rng(2);
  srl::model::DynamicsModel<double> model({3, 2, 16, 2, false}, rng);
  Matrix<double> m = Matrix<double>::Zero(3, 5);
  m.leftCols(3) = 1e200 * Matrix<double>::Identity(3, 3);
  analytic::set_linear_model(model, model.target_params(), m);
  std::vector<Vector<double>> actions(4, Vector<double>::Zero(2));
  try {
    model.rollout(Vector<double>::Constant(3, 1.0), actions);
    FAIL() << "expected NumericError";
  } catch (const srl::NumericError& e) {
    EXPECT_EQ(e.step(), 2);
  }
  EXPECT_THROW(model.rollout(Vector<double>::Zero(3), {}), std::invalid_argument);
}

TEST(StateNormalizer, FreezesRunningStatistics) {
  srl::model::StateNormalizer<float> n(2);
  EXPECT_EQ(n.std(), Vector<float>::Ones(2));
  for (int i = 0; i < 4; ++i) n.observe((Vector<float>(2) << static_cast<float>(i), 5.0f).finished());
  n.freeze();
  EXPECT_FLOAT_EQ(n.mean()(0), 1.5f);
  EXPECT_NEAR(n.std()(0), std::sqrt(5.0f / 3.0f), 1e-6);
  EXPECT_FLOAT_EQ(n.std()(1), 1e-2f);  // floored
  n.observe(Vector<float>::Constant(2, 100.0f));
  EXPECT_FLOAT_EQ(n.mean()(0), 1.5f);
}
