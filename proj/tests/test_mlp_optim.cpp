#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include "op_cases.hpp"
#include "wugnn/checkpoint.hpp"
#include "wugnn/errors.hpp"
#include "wugnn/gradcheck.hpp"
#include "wugnn/mlp.hpp"
#include "wugnn/optim.hpp"

namespace wugnn {
namespace {

using diff::Activation;
using diff::MlpSpec;
using diff::ModelParams;
using diff::Tape;
using diff::Tensor;

TEST(MlpForward, ZeroParamsGiveZeroOutput) {
  const auto spec = MlpSpec::make({3, 5, 2});
  ModelParams p;
  p.add("W0", Tensor::zeros({3, 5}));
  p.add("b0", Tensor::zeros({5}));
  p.add("W1", Tensor::zeros({5, 2}));
  p.add("b1", Tensor::zeros({2}));
  Tape tape;
  const auto y = diff::mlp_forward(tape, p, spec, testing::random_tensor({4, 3}, 1));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(MlpForward, IdentityLayer) {
  const auto spec = MlpSpec::make({3, 3}, Activation::relu, Activation::identity);
  ModelParams p;
  p.add("W0", Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  p.add("b0", Tensor::zeros({3}));
  const auto x = testing::random_tensor({2, 3}, 2);
  Tape tape;
  const auto y = diff::mlp_forward(tape, p, spec, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.at(i), x.at(i));
}

TEST(MlpForward, ReluOutputClipsNegative) {
  const auto spec = MlpSpec::make({1, 1}, Activation::relu, Activation::relu);
  ModelParams p;
  p.add("W0", Tensor({1, 1}, {2.0}));
  p.add("b0", Tensor({1}, {1.0}));
  Tape tape;
  EXPECT_EQ(diff::mlp_forward(tape, p, spec, Tensor({1, 1}, {-3.0})).item(), 0.0);
}

TEST(MlpForward, PrefixSelectsParameters) {
  const auto spec = MlpSpec::make({2, 1});
  ModelParams p;
  p.add("enc.W0", Tensor({2, 1}, {1.0, 2.0}));
  p.add("enc.b0", Tensor({1}, {0.5}));
  Tape tape;
  EXPECT_EQ(diff::mlp_forward(tape, p, spec, Tensor({1, 2}, {3.0, 4.0}), "enc.").item(), 11.5);
}

TEST(MlpForward, MissingOrMisshapedParameterRejected) {
  const auto spec = MlpSpec::make({2, 3, 1});
  ModelParams p = diff::init_params(spec, 1);
  ModelParams missing;
  missing.add("W0", p.get("W0"));
  missing.add("b0", p.get("b0"));
  Tape tape;
  const auto x = Tensor::zeros({1, 2});
  EXPECT_THROW(diff::mlp_forward(tape, missing, spec, x), ArgumentError);
  ModelParams bad;
  bad.add("W0", Tensor::zeros({3, 2}));
  bad.add("b0", Tensor::zeros({3}));
  bad.add("W1", Tensor::zeros({3, 1}));
  bad.add("b1", Tensor::zeros({1}));
  EXPECT_THROW(diff::mlp_forward(tape, bad, spec, x), ArgumentError);
  EXPECT_THROW(diff::mlp_forward(tape, p, spec, Tensor::zeros({1, 3})), ArgumentError);
}

TEST(MlpSpec, ValidationAndCount) {
  EXPECT_THROW(MlpSpec::make({4}), ArgumentError);
  EXPECT_THROW(MlpSpec::make({4, 0, 1}), ArgumentError);
  EXPECT_EQ(MlpSpec::make({3, 5, 2}).parameter_count(), 3u * 5 + 5 + 5 * 2 + 2);
  EXPECT_EQ(diff::activation_from_string(diff::to_string(Activation::sigmoid)), Activation::sigmoid);
  EXPECT_THROW(diff::activation_from_string("gelu"), ConfigError);
}

TEST(MlpForward, GradientsMatchFiniteDifferences) {
  const auto spec = MlpSpec::make({4, 6, 5, 1}, Activation::tanh, Activation::identity);
  const auto params = diff::init_params(spec, 17);
  const auto input = testing::random_tensor({3, 4}, 18, -1.0, 1.0, false);
  const auto r = diff::finite_diff_check(
      [&](Tape& t, const ModelParams& q) { return diff::sum_reduce(t, diff::mlp_forward(t, q, spec, input)); },
      params, 1e-5);
  EXPECT_EQ(r.coordinates, spec.parameter_count());
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index << "]";
}

TEST(MlpForward, ReluNetworkGradientsMatchFiniteDifferences) {
  const auto spec = MlpSpec::make({3, 8, 8, 1}, Activation::relu, Activation::sigmoid);
  const auto params = diff::init_params(spec, 23);
  const auto input = testing::random_tensor({5, 3}, 24, -1.0, 1.0, false);
  const auto r = diff::finite_diff_check(
      [&](Tape& t, const ModelParams& q) { return diff::sum_reduce(t, diff::mlp_forward(t, q, spec, input)); },
      params, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index << "]";
}

TEST(InitParams, SameSeedSameParams) {
  const auto spec = MlpSpec::make({5, 7, 3});
  EXPECT_TRUE(diff::init_params(spec, 9).equal_values(diff::init_params(spec, 9)));
  EXPECT_FALSE(diff::init_params(spec, 9).equal_values(diff::init_params(spec, 10)));
}

TEST(InitParams, BiasesZeroAndWeightsInBound) {
  const auto spec = MlpSpec::make({5, 7, 3});
  const auto p = diff::init_params(spec, 4);
  for (const char* b : {"b0", "b1"}) {
    for (double v : p.get(b).data()) EXPECT_EQ(v, 0.0);
  }
  const double bound = std::sqrt(6.0 / 5.0);
  for (double v : p.get("W0").data()) EXPECT_LE(std::abs(v), bound);
  for (const auto& [name, t] : p) EXPECT_TRUE(t.requires_grad()) << name;
}

TEST(InitParams, WeightVarianceIsTwoOverFanIn) {
  const auto spec = MlpSpec::make({128, 128});
  const auto w = diff::init_params(spec, 31).get("W0");
  ASSERT_GE(w.size(), 10000u);
  double mean = 0.0;
  for (double v : w.data()) mean += v;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double v : w.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.size() - 1);
  const double expected = 2.0 / 128.0;
  EXPECT_NEAR(var, expected, 0.3 * expected);
}

TEST(ModelParams, CloneSharesNoStorage) {
  auto p = diff::init_params(MlpSpec::make({2, 2}), 1);
  auto q = p.clone();
  EXPECT_TRUE(p.equal_values(q));
  Tensor handle = q.get("W0");
  handle.mutable_data()[0] += 1.0;
  EXPECT_FALSE(p.equal_values(q));
  EXPECT_THROW(p.add("W0", Tensor::zeros({1})), ArgumentError);
  EXPECT_THROW(p.get("nope"), ArgumentError);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
  ModelParams p;
  p.add("x", Tensor({1}, {0.5}, true));
  diff::AdamState s;
  diff::adam_step(p, {{"x", {1.0}}}, s);
  EXPECT_NEAR(p.get("x").at(0), 0.5 - 0.001 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(s.t, 1u);
}

TEST(AdamStep, ZeroGradLeavesParams) {
  auto p = diff::init_params(MlpSpec::make({3, 2}), 5);
  const auto before = p.clone();
  diff::GradMap grads;
  for (const auto& [name, t] : p) grads[name] = std::vector<double>(t.size(), 0.0);
  diff::AdamState s;
  for (int i = 0; i < 3; ++i) diff::adam_step(p, grads, s);
  EXPECT_TRUE(p.equal_values(before));
}

TEST(AdamStep, ConstantGradMovesMonotonically) {
  ModelParams p;
  p.add("x", Tensor({2}, {0.0, 0.0}, true));
  diff::AdamState s;
  double prev0 = 0.0, prev1 = 0.0;
  for (int i = 0; i < 2; ++i) {
    diff::adam_step(p, {{"x", {2.0, -3.0}}}, s);
    EXPECT_LT(p.get("x").at(0), prev0);
    EXPECT_GT(p.get("x").at(1), prev1);
    prev0 = p.get("x").at(0);
    prev1 = p.get("x").at(1);
  }
}

TEST(AdamStep, MatchesReferenceRecursion) {
  ModelParams p;
  p.add("x", Tensor({1}, {0.3}, true));
  diff::AdamState s;
  s.lr = 0.01;
  const std::vector<double> gs = {0.7, -0.2, 1.5, 0.05};
  double x = 0.3, m = 0.0, v = 0.0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    diff::adam_step(p, {{"x", {gs[k]}}}, s);
    const double g = gs[k];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double t = static_cast<double>(k + 1);
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    x -= 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
    EXPECT_NEAR(p.get("x").at(0), x, 1e-14) << "step " << k;
  }
}

TEST(AdamStep, MissingGradRejected) {
  auto p = diff::init_params(MlpSpec::make({2, 1}), 1);
  diff::AdamState s;
  EXPECT_THROW(diff::adam_step(p, {{"W0", {0.0, 0.0}}}, s), ArgumentError);
  EXPECT_THROW(diff::collect_grads(p), ArgumentError);
}

ModelParams awkward_params() {
  ModelParams p = diff::init_params(MlpSpec::make({3, 4, 2}), 77);
  p.add("special", Tensor({6}, {-0.0, std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(),
                                1.0 / 3.0, std::numeric_limits<double>::infinity(), -1e-300}));
  p.add("scalar", Tensor::scalar(std::nextafter(1.0, 2.0)));
  return p;
}

bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
  if (a.size() != b.size()) return false;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.shape() != ib->second.shape()) return false;
    if (std::memcmp(ia->second.data().data(), ib->second.data().data(), ia->second.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  diff::Checkpoint ck;
  ck.metadata = {{"kind", "test"}, {"widths", {3, 4, 2}}};
  ck.params = awkward_params();
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  diff::write_checkpoint(buf, ck);
  const auto back = diff::read_checkpoint(buf);
  EXPECT_EQ(back.metadata, ck.metadata);
  EXPECT_TRUE(bitwise_equal(back.params, ck.params));
  EXPECT_TRUE(std::signbit(back.params.get("special").at(0)));
  for (const auto& [name, t] : back.params) EXPECT_TRUE(t.requires_grad()) << name;
}

TEST(Checkpoint, HeaderLayout) {
  diff::Checkpoint ck;
  ck.params.add("a", Tensor({1}, {1.0}));
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  diff::write_checkpoint(buf, ck);
  const std::string bytes = buf.str();
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 8), "WUGNNCKP");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);
  EXPECT_EQ(bytes[9], 0);
  // Last eight bytes are 1.0 in little-endian binary64.
  const std::string one = bytes.substr(bytes.size() - 8);
  const unsigned char expected[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  EXPECT_EQ(std::memcmp(one.data(), expected, 8), 0);
}

TEST(Checkpoint, FileRoundTripAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "wugnn_test_ckpt";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "params.ckpt").string();
  diff::Checkpoint ck;
  ck.params = awkward_params();
  diff::save_checkpoint(path, ck);
  EXPECT_TRUE(bitwise_equal(diff::load_checkpoint(path).params, ck.params));

  EXPECT_THROW(diff::load_checkpoint((dir / "missing.ckpt").string()), IoError);
  EXPECT_THROW(diff::save_checkpoint((dir / "no_such_dir" / "x.ckpt").string(), ck), IoError);

  std::stringstream garbage(std::string("NOTACKPT\x01\x00\x00\x00", 12));
  EXPECT_THROW(diff::read_checkpoint(garbage), FormatError);

  std::stringstream full(std::ios::in | std::ios::out | std::ios::binary);
  diff::write_checkpoint(full, ck);
  std::string bytes = full.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(diff::read_checkpoint(truncated), FormatError);
  bytes[8] = 9;
  std::stringstream future(bytes);
  EXPECT_THROW(diff::read_checkpoint(future), FormatError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace wugnn
