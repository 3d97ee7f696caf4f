#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "kgeeg/error.hpp"
#include "kgeeg/network.hpp"
#include "kgeeg/objectives.hpp"
#include "kgeeg/optimizer.hpp"

using namespace kgeeg;
using testing::random_tensor;

namespace {

// Parameter count from the layer shapes alone.
std::size_t expected_backbone(const ModelConfig& cfg) {
  std::size_t n = 0, in = cfg.n_channels;
  for (const auto& e : cfg.encoder) {
    n += in * e.out_channels * e.kernel + e.out_channels + 2 * e.out_channels;
    in = e.out_channels;
  }
  const std::size_t d = cfg.d_model();
  n += d * d + d;
  const std::size_t per_s4 = (2 * d + 3 * d * cfg.n_state) + (2 * d * d + 2 * d) + 2 * d;
  n += cfg.n_s4_layers * per_s4;
  for (std::size_t i = cfg.encoder.size(); i-- > 0;) {
    const std::size_t from = cfg.encoder[i].out_channels;
    const bool last = i == 0;
    const std::size_t to = last ? cfg.n_channels : cfg.encoder[i - 1].out_channels;
    n += from * to * cfg.encoder[i].kernel + to + (last ? 0 : 2 * to);
  }
  n += d * cfg.n_channels * cfg.n_bands + cfg.n_channels * cfg.n_bands;
  return n;
}

Tensor backbone_forward(Model& m, const Tensor& x, const Context& ctx) {
  return m.decode(m.temporal_block(m.encode(x, ctx), ctx), ctx);
}

Tensor backbone_backward(Model& m, const Tensor& g) {
  return m.encode_backward(m.temporal_block_backward(m.decode_backward(g)));
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("preset geometry") {
    const ModelConfig full = ModelConfig::full();
    CHECK(full.d_model() == 512);
    CHECK(full.total_stride() == 64);
    CHECK(full.n_embeddings() == 240);
    CHECK(full.n_windows() == 15);
    CHECK(full.window_samples() == 1024);
    const ModelConfig mini = ModelConfig::mini();
    CHECK(mini.n_windows() == 4);
    CHECK(ModelConfig::tiny().window_samples() == 64);
    ModelConfig bad = full;
    bad.n_time_steps = 15361;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = full;
    bad.n_state = 7;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = full;
    bad.pool_group = 7;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
  }

  TEST_CASE("parameter counts follow the layer shapes") {
    for (const auto& cfg : {ModelConfig::full(), ModelConfig::desk(), ModelConfig::tiny()}) {
      Model m(cfg, 1);
      const ParameterCount count = count_parameters(m);
      CHECK(backbone_parameters(count) == expected_backbone(cfg));
      CHECK(count.total == count.trainable);
      std::size_t parts = 0;
      for (const auto& [name, n] : count.by_part) parts += n;
      CHECK(parts == count.total);
    }
    Model full(ModelConfig::full(), 1);
    const std::size_t n = backbone_parameters(count_parameters(full));
    CHECK(n == 12'307'314);
    CHECK(n >= 10'000'000);
    CHECK(n <= 16'000'000);
    Model desk(ModelConfig::desk(), 1);
    CHECK(backbone_parameters(count_parameters(desk)) == 55'282);
  }

  TEST_CASE("full-size encoder and temporal block shapes") {
    Model m(ModelConfig::full(), 3);
    const Context ctx;
    const Tensor x = random_tensor({2, 19, 15360}, 4);
    const Tensor c = m.encode(x, ctx);
    CHECK(c.shape() == std::vector<std::size_t>{2, 512, 240});
    const Tensor e = m.temporal_block(c, ctx);
    CHECK(e.shape() == std::vector<std::size_t>{2, 512, 240});
    CHECK(m.decode(e, ctx).shape() == std::vector<std::size_t>{2, 19, 15360});
    CHECK(m.project_bandpower(e, ctx).shape() == std::vector<std::size_t>{2, 19, 5, 15});
    CHECK_THROWS_AS(m.encode(Tensor({1, 19, 15361}), ctx), ShapeError);
    CHECK_THROWS_AS(m.encode(Tensor({1, 18, 15360}), ctx), ShapeError);
  }

  TEST_CASE("zero input stays finite") {
    Model m(ModelConfig::desk(), 5);
    const Context ctx;
    const Tensor x({2, 19, 15360}, 0.0);
    const Tensor e = m.temporal_block(m.encode(x, ctx), ctx);
    CHECK(all_finite(e.values()));
    CHECK(all_finite(m.decode(e, ctx).values()));
    CHECK(all_finite(m.project_bandpower(e, ctx).values()));
  }

  TEST_CASE("gradient reaches every encoder parameter") {
    Model m(ModelConfig::desk(), 6);
    const Context ctx;
    const Tensor x = random_tensor({1, 19, 15360}, 7);
    const Tensor recon = backbone_forward(m, x, ctx);
    Tensor g;
    cosine_reconstruction_loss(x, recon, &g);
    m.zero_grad();
    backbone_backward(m, g);
    for (auto& group : m.groups()) {
      if (group.part != Part::encoder) continue;
      for (const Parameter* p : group.params) {
        const auto v = p->grad.values();
        CAPTURE(p->name);
        CHECK(std::any_of(v.begin(), v.end(), [](double e) { return e != 0.0; }));
      }
    }
  }

  TEST_CASE("temporal stages compose") {
    Model m(ModelConfig::tiny(), 8);
    const Context ctx;
    const Tensor c = random_tensor({2, 8, 16}, 9);
    const Tensor full = m.temporal_block(c, ctx);
    const Tensor head = m.temporal_block(c, ctx, 0, 2);
    const Tensor tail = m.temporal_block(head, ctx, 2);
    CHECK(full == tail);
    CHECK(m.n_temporal_stages() == 3);
  }

  TEST_CASE("S4 module gradients on a small block") {
    std::mt19937_64 rng(10);
    const Context ctx;
    S4Module block("s4", 8, 4, 0.0, rng);
    std::vector<Parameter*> params;
    block.collect(params);
    Tensor x = random_tensor({2, 8, 16}, 11);
    const double err = testing::max_gradient_error(
        [&] { return block.forward(x, ctx); }, [&](const Tensor& g) { return block.backward(g); },
        &x, params);
    CHECK(err < 1e-3);
  }

  TEST_CASE("backbone and projector gradients on the tiny model") {
    Model m(ModelConfig::tiny(), 12);
    const Context ctx;
    Tensor x = random_tensor({2, 2, 256}, 13);
    auto params = m.parameters();
    const double err_recon = testing::max_gradient_error(
        [&] { return backbone_forward(m, x, ctx); },
        [&](const Tensor& g) { return backbone_backward(m, g); }, &x, params, 6);
    CHECK(err_recon < 1e-3);
    const double err_proj = testing::max_gradient_error(
        [&] { return m.project_bandpower(m.temporal_block(m.encode(x, ctx), ctx), ctx); },
        [&](const Tensor& g) {
          return m.encode_backward(m.temporal_block_backward(m.project_bandpower_backward(g)));
        },
        &x, params, 6);
    CHECK(err_proj < 1e-3);
  }

  TEST_CASE("overfitting one chunk lowers the reconstruction loss") {
    Model m(ModelConfig::tiny(), 14);
    const Context ctx;
    Tensor x({1, 2, 256});
    const auto a = testing::sine(9.0, 250.0, 256);
    const auto b = testing::sine(3.0, 250.0, 256, 0.5, 1.0);
    for (std::size_t t = 0; t < 256; ++t) {
      x.at({0, 0, t}) = a[t];
      x.at({0, 1, t}) = b[t];
    }
    Adam opt(m.parameters(), AdamConfig{.lr = 3e-3});
    double first = 0.0, last = 0.0;
    for (int step = 0; step < 200; ++step) {
      Tensor g;
      const double loss = cosine_reconstruction_loss(x, backbone_forward(m, x, ctx), &g);
      if (step == 0) first = loss;
      last = loss;
      opt.zero_grad();
      backbone_backward(m, g);
      opt.step();
    }
    CHECK(last < first);
    CHECK(last < 0.5 * first);
  }

  TEST_CASE("projector pools groups then maps each window") {
    std::mt19937_64 rng(15);
    const Context ctx;
    Projector proj("p", 6, 3, 2, 4, rng);
    std::vector<Parameter*> ps;
    proj.collect(ps);
    const Tensor& w = ps[0]->value;  // [6 outputs x 6 features]
    const Tensor& bias = ps[1]->value;

    // constant within each group: pooling is the identity on that vector
    const Tensor v = random_tensor({2, 6, 3}, 16);
    Tensor e({2, 6, 12});
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t d = 0; d < 6; ++d)
        for (std::size_t t = 0; t < 12; ++t) e.at({b, d, t}) = v.at({b, d, t / 4});
    const Tensor p = proj.forward(e, ctx);
    REQUIRE(p.shape() == std::vector<std::size_t>{2, 3, 2, 3});
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < 2; ++k)
          for (std::size_t win = 0; win < 3; ++win) {
            double acc = bias[c * 2 + k];
            for (std::size_t d = 0; d < 6; ++d) acc += w.at({c * 2 + k, d}) * v.at({b, d, win});
            CHECK(p.at({b, c, k, win}) == doctest::Approx(acc).epsilon(1e-12));
          }
  }

  TEST_CASE("projector is invariant to order within a group and equivariant across groups") {
    std::mt19937_64 rng(17);
    const Context ctx;
    Projector proj("p", 5, 2, 3, 4, rng);
    const Tensor e = random_tensor({1, 5, 16}, 18);
    const Tensor p = proj.forward(e, ctx);

    Tensor shuffled = e;
    const std::size_t within[] = {3, 0, 2, 1};
    for (std::size_t d = 0; d < 5; ++d)
      for (std::size_t g = 0; g < 4; ++g)
        for (std::size_t t = 0; t < 4; ++t) shuffled.at({0, d, g * 4 + t}) = e.at({0, d, g * 4 + within[t]});
    const Tensor ps = proj.forward(shuffled, ctx);
    CHECK(testing::max_abs_diff(ps.values(), p.values()) < 1e-12);

    Tensor swapped = e;
    const std::size_t groups[] = {2, 3, 0, 1};
    for (std::size_t d = 0; d < 5; ++d)
      for (std::size_t g = 0; g < 4; ++g)
        for (std::size_t t = 0; t < 4; ++t) swapped.at({0, d, g * 4 + t}) = e.at({0, d, groups[g] * 4 + t});
    const Tensor pw = proj.forward(swapped, ctx);
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t g = 0; g < 4; ++g) {
          CHECK(pw.at({0, c, k, g}) == doctest::Approx(p.at({0, c, k, groups[g]})).epsilon(1e-12));
        }
    CHECK_THROWS_AS(proj.forward(Tensor({1, 5, 15}), ctx), ShapeError);
  }

  TEST_CASE("classification heads") {
    Model m(ModelConfig::full(), 19);
    const Context ctx;
    const Tensor e = random_tensor({3, 512, 240}, 20);
    const std::size_t before = count_parameters(m).total;
    m.attach_head(HeadConfig{.n_fc = 1, .n_classes = 2}, 21);
    const Tensor logits = m.classify(e, ctx);
    CHECK(logits.shape() == std::vector<std::size_t>{3, 2});
    for (double z : logits.values()) CHECK(z == 0.0);  // untrained head favours no class
    CHECK(count_parameters(m).by_part.at("head") == 1026);
    CHECK(count_parameters(m).total == before + 1026);
    m.attach_head(HeadConfig{.n_fc = 2, .hidden = 256, .n_classes = 4}, 22);
    CHECK(m.classify(e, ctx).shape() == std::vector<std::size_t>{3, 4});
    CHECK(count_parameters(m).by_part.at("head") == 512 * 256 + 256 + 256 * 4 + 4);
    CHECK_THROWS(HeadConfig{.n_fc = 3}.validate());
  }

  TEST_CASE("head averages over time and its gradient is exact") {
    std::mt19937_64 rng(23);
    const Context ctx;
    ClassifierHead head("h", 6, HeadConfig{.n_fc = 2, .hidden = 5, .n_classes = 3}, rng);
    Tensor e = random_tensor({2, 6, 7}, 24);
    const Tensor pooled = ClassifierHead::mean_over_time(e);
    CHECK(pooled.at({1, 4}) == doctest::Approx(
        std::accumulate(e.data() + (6 + 4) * 7, e.data() + (6 + 5) * 7, 0.0) / 7.0));
    std::vector<Parameter*> ps;
    head.collect(ps);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      ps[k]->value = random_tensor(ps[k]->value.shape(), 40 + k, 0.5);
    }
    CHECK(testing::max_gradient_error([&] { return head.forward(e, ctx); },
                                      [&](const Tensor& g) { return head.backward(g); }, &e,
                                      ps) < 1e-3);
  }

  TEST_CASE("freezing the encoder removes exactly its parameters from training") {
    Model m(ModelConfig::desk(), 25);
    m.attach_head(HeadConfig{.n_fc = 1, .n_classes = 2}, 26);
    const ParameterCount all = count_parameters(m);
    for (auto& g : m.groups()) {
      if (g.part == Part::encoder) {
        for (Parameter* p : g.params) p->trainable = false;
      }
    }
    const ParameterCount frozen = count_parameters(m);
    CHECK(frozen.total == all.total);
    CHECK(frozen.trainable == all.total - all.by_part.at("encoder"));
  }

  TEST_CASE("construction is deterministic in the seed") {
    Model a(ModelConfig::tiny(), 30), b(ModelConfig::tiny(), 30), c(ModelConfig::tiny(), 31);
    const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i]->name == pb[i]->name);
      CHECK(pa[i]->value == pb[i]->value);
      any_diff = any_diff || !(pa[i]->value == pc[i]->value);
    }
    CHECK(any_diff);
  }
}
