#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "docner/params.hpp"
#include "docner/rng.hpp"
#include "docner/tensor.hpp"
#include "docner/uncertainty.hpp"

using namespace docner;

namespace {

std::vector<Var> random_inputs(int n, Eigen::Index dim, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<Var> xs;
  for (int i = 0; i < n; ++i) {
    Mat m(dim, 1);
    for (Eigen::Index k = 0; k < dim; ++k) m(k, 0) = rng.uniform(-1.0, 1.0);
    xs.push_back(constant(m));
  }
  return xs;
}

UncertaintyModule make_module(int tags, double rate, std::uint64_t seed) {
  ParamRegistry reg;
  RngStream rng(seed);
  return UncertaintyModule::create(reg, 4, 3, tags, rate, rng);
}

}  // namespace

TEST_CASE("entropy in nats handles edge cases") {
  Eigen::VectorXd point(3);
  point << 1.0, 0.0, 0.0;
  CHECK(entropy_nats(point) == 0.0);

  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(5, 0.2);
  CHECK(entropy_nats(uniform) == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  Eigen::VectorXd skew(2);
  skew << 0.9, 0.1;
  double expect = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
  CHECK(entropy_nats(skew) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("single pass without dropout is deterministic") {
  UncertaintyModule mod = make_module(4, 0.0, 21);
  std::vector<Var> xs = random_inputs(5, 4, 22);

  RngStream r1(100), r2(200);  // different streams must not matter at rate 0
  auto a = mod.mc_predict(xs, 1, r1);
  auto b = mod.mc_predict(xs, 1, r2);
  REQUIRE(a.p.size() == 5);
  for (int t = 0; t < 5; ++t) {
    CHECK((a.p[t].value() - b.p[t].value()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.entropy[t] == b.entropy[t]);
  }
}

TEST_CASE("averaged distributions are proper and entropies bounded") {
  const int C = 6;
  UncertaintyModule mod = make_module(C, 0.5, 31);
  std::vector<Var> xs = random_inputs(7, 4, 32);
  RngStream rng(33);
  auto res = mod.mc_predict(xs, 8, rng);
  REQUIRE(res.p.size() == 7);
  REQUIRE(res.entropy.size() == 7);
  for (int t = 0; t < 7; ++t) {
    const Mat& p = res.p[t].value();
    REQUIRE(p.rows() == C);
    REQUIRE(p.cols() == 1);
    CHECK((p.array() > 0.0).all());
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.entropy[t] >= 0.0);
    CHECK(res.entropy[t] <= std::log(double(C)) + 1e-12);
    CHECK(res.entropy[t] ==
          doctest::Approx(entropy_nats(p.col(0))).epsilon(1e-12));
  }
}

TEST_CASE("same stream reproduces the stochastic passes exactly") {
  UncertaintyModule mod = make_module(4, 0.5, 41);
  std::vector<Var> xs = random_inputs(4, 4, 42);
  RngStream r1(55), r2(55), r3(56);
  auto a = mod.mc_predict(xs, 5, r1);
  auto b = mod.mc_predict(xs, 5, r2);
  auto c = mod.mc_predict(xs, 5, r3);
  bool any_diff = false;
  for (int t = 0; t < 4; ++t) {
    CHECK((a.p[t].value() - b.p[t].value()).cwiseAbs().maxCoeff() == 0.0);
    if ((a.p[t].value() - c.p[t].value()).cwiseAbs().maxCoeff() > 0.0) {
      any_diff = true;
    }
  }
  CHECK(any_diff);
}

TEST_CASE("dropout is active even though nothing is training") {
  // with a high rate, two passes from one stream should differ, so the
  // averaged distribution is genuinely an ensemble
  UncertaintyModule mod = make_module(3, 0.5, 51);
  std::vector<Var> xs = random_inputs(3, 4, 52);
  RngStream ra(60);
  auto one = mod.mc_predict(xs, 1, ra);
  RngStream rb(60);
  auto two = mod.mc_predict(xs, 2, rb);
  // pass one of `two` equals `one`, so if the average moved, pass two differed
  bool moved = false;
  for (int t = 0; t < 3; ++t) {
    if ((one.p[t].value() - two.p[t].value()).cwiseAbs().maxCoeff() > 1e-12) {
      moved = true;
    }
  }
  CHECK(moved);
}

TEST_CASE("loss is cross entropy of the averaged distribution") {
  UncertaintyModule mod = make_module(3, 0.0, 71);
  std::vector<Var> xs = random_inputs(2, 4, 72);
  RngStream rng(73);
  auto res = mod.mc_predict(xs, 1, rng);
  std::vector<int> gold = {2, 0};
  double expect = -std::log(res.p[0].value()(2, 0)) -
                  std::log(res.p[1].value()(0, 0));
  CHECK(mod.loss(res, gold).value()(0, 0) ==
        doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("loss gradient stays inside the module") {
  // feed detached inputs like the model does; after backward, only the
  // module's own parameters can carry gradient
  ParamRegistry reg;
  RngStream rng(81);
  UncertaintyModule mod = UncertaintyModule::create(reg, 4, 3, 3, 0.0, rng);

  Var upstream = reg.add("fake_encoder", Mat::Ones(4, 2));
  std::vector<Var> xs = {detach(block(upstream, 0, 0, 4, 1)),
                         detach(block(upstream, 0, 1, 4, 1))};
  RngStream mc(82);
  auto res = mod.mc_predict(xs, 1, mc);
  std::vector<int> gold = {1, 2};
  Var l = mod.loss(res, gold);
  backward(l);

  // the gradient never reaches the detached input, not even as zeros
  CHECK(upstream.grad().size() == 0);
  bool module_touched = false;
  for (const auto& p : reg.all()) {
    if (p.name != "fake_encoder" && p.var.grad().size() > 0 &&
        p.var.grad().cwiseAbs().maxCoeff() > 0.0) {
      module_touched = true;
    }
  }
  CHECK(module_touched);
}

TEST_CASE("more uncertain distributions cross the threshold") {
  Eigen::VectorXd sharp(4), flat(4);
  sharp << 0.97, 0.01, 0.01, 0.01;
  flat << 0.25, 0.25, 0.25, 0.25;
  double hs = entropy_nats(sharp);
  double hf = entropy_nats(flat);
  CHECK(hs < hf);
  double threshold = 0.5 * (hs + hf);
  CHECK(hs < threshold);
  CHECK(hf > threshold);
}
