#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kgeeg/optimizer.hpp"

using namespace kgeeg;

TEST_SUITE("optimizer") {
  TEST_CASE("two Adam steps match the update written out by hand") {
    Parameter w("w", Tensor({3}, std::vector<double>{1.0, -2.0, 0.5}));
    const AdamConfig cfg{.lr = 0.01, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8};
    Adam opt({&w}, cfg);
    const std::vector<std::vector<double>> grads{{0.3, -1.2, 0.0}, {-0.1, 0.4, 2.0}};

    std::vector<double> m(3, 0.0), v(3, 0.0), expect{1.0, -2.0, 0.5};
    for (std::size_t t = 1; t <= 2; ++t) {
      for (std::size_t i = 0; i < 3; ++i) w.grad[i] = grads[t - 1][i];
      opt.step();
      for (std::size_t i = 0; i < 3; ++i) {
        const double g = grads[t - 1][i];
        m[i] = 0.9 * m[i] + 0.1 * g;
        v[i] = 0.999 * v[i] + 0.001 * g * g;
        const double mhat = m[i] / (1.0 - std::pow(0.9, t));
        const double vhat = v[i] / (1.0 - std::pow(0.999, t));
        expect[i] -= 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
        CHECK(w.value[i] == doctest::Approx(expect[i]).epsilon(1e-14));
      }
    }
    CHECK(opt.steps() == 2);
  }

  TEST_CASE("the first step has magnitude lr regardless of gradient scale") {
    for (double scale : {1e-3, 1.0, 1e3}) {
      Parameter w("w", Tensor({1}, 0.0));
      Adam opt({&w}, AdamConfig{.lr = 0.05});
      w.grad[0] = scale;
      opt.step();
      CHECK(w.value[0] == doctest::Approx(-0.05).epsilon(1e-4));
    }
  }

  TEST_CASE("frozen parameters are never written") {
    Parameter live("live", testing::random_tensor({4}, 1));
    Parameter frozen("frozen", testing::random_tensor({4}, 2));
    frozen.trainable = false;
    const Tensor snapshot = frozen.value;
    Adam opt({&live, &frozen});
    CHECK(opt.parameters().size() == 1);
    CHECK(opt.first_moments().size() == 1);
    for (int i = 0; i < 100; ++i) {
      live.grad.fill(0.5);
      frozen.grad.fill(0.5);
      opt.step();
    }
    CHECK(frozen.value == snapshot);
    CHECK(live.value[0] != doctest::Approx(testing::random_tensor({4}, 1)[0]));
  }

  TEST_CASE("zero_grad clears trainable gradients") {
    Parameter w("w", Tensor({5}, 1.0));
    w.grad.fill(3.0);
    Adam opt({&w});
    opt.zero_grad();
    for (double g : w.grad.values()) CHECK(g == 0.0);
  }

  TEST_CASE("zero gradient leaves weights in place") {
    Parameter w("w", testing::random_tensor({6}, 3));
    const Tensor before = w.value;
    Adam opt({&w});
    opt.step();
    CHECK(w.value == before);
  }
}
