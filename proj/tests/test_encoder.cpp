#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <random>

#include "storylab/encoder.hpp"
#include "storylab/gradcheck.hpp"

using namespace storylab;

namespace {

EncoderParameters toy_params(std::uint64_t seed) {
  return init_encoder(EncoderConfig::toy(), 24, seed);
}

}  // namespace

TEST_CASE("encoder config validates its shape") {
  EncoderConfig cfg;
  CHECK(cfg.num_layers == 2);
  CHECK(cfg.embed_dim == 64);
  CHECK(cfg.head_dim() == 16);
  CHECK_NOTHROW(cfg.validate());
  CHECK_NOTHROW(EncoderConfig::full_scale().validate());
  CHECK_NOTHROW(EncoderConfig::toy().validate());

  cfg.embed_dim = 65;  // not divisible by heads
  CHECK_THROWS(cfg.validate());
  cfg = EncoderConfig{};
  cfg.dropout = 1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("initialization is seeded and shaped") {
  const EncoderParameters a = toy_params(5);
  const EncoderParameters b = toy_params(5);
  const EncoderParameters c = toy_params(6);
  CHECK(a.token_embedding == b.token_embedding);
  CHECK(a.token_embedding != c.token_embedding);
  CHECK(a.token_embedding.size() == 24u * 16u);
  CHECK(a.position_embedding.size() == 8u * 16u);
  REQUIRE(a.layers.size() == 2);
  for (const auto& layer : a.layers) {
    CHECK(layer.wq.size() == 16u * 16u);
    CHECK(layer.w1.size() == 16u * 32u);
    for (double g : layer.ln1_gain) CHECK(g == 1.0);
    for (double bq : layer.bq) CHECK(bq == 0.0);
  }
}

TEST_CASE("inference is deterministic; training dropout is not a no-op") {
  const EncoderParameters p = toy_params(3);
  const std::vector<int> ids{3, 5, 7, 11, 2};
  const auto v1 = encode(p, ids);
  const auto v2 = encode(p, ids);
  CHECK(v1 == v2);
  REQUIRE(v1.size() == 16);

  EncoderConfig dropped_cfg = EncoderConfig::toy();
  dropped_cfg.dropout = 0.3;
  EncoderParameters dropped = init_encoder(dropped_cfg, 24, 3);
  std::mt19937_64 rng(77);
  const auto train_out = encoder_forward(dropped, ids, true, &rng).pooled;
  const auto eval_out = encoder_forward(dropped, ids, false, nullptr).pooled;
  CHECK(train_out != eval_out);
}

TEST_CASE("padding positions cannot reach the pooled representation") {
  const EncoderParameters p = toy_params(9);
  const std::vector<int> ids{3, 6, 9, 12};
  std::vector<int> padded = ids;
  padded.push_back(kPadTokenId);
  padded.push_back(kPadTokenId);

  const auto plain = encode(p, ids);
  const auto with_pads = encode(p, padded);
  REQUIRE(plain.size() == with_pads.size());
  for (std::size_t d = 0; d < plain.size(); ++d) CHECK(plain[d] == with_pads[d]);

  // Same guarantee when padding is declared through valid_len.
  std::vector<int> junk = ids;
  junk.push_back(17);
  junk.push_back(13);
  const auto via_valid_len = encoder_forward(p, junk, false, nullptr, ids.size()).pooled;
  for (std::size_t d = 0; d < plain.size(); ++d) CHECK(plain[d] == via_valid_len[d]);
}

TEST_CASE("attention rows are probability distributions over unmasked keys") {
  const EncoderParameters p = toy_params(21);
  const std::vector<int> ids{3, 0, 5, 7, 0, 9};  // interior pads
  const EncoderCache cache = encoder_forward(p, ids, false, nullptr);
  const int t_len = cache.seq_len;
  const auto& cfg = p.config;
  for (const auto& layer : cache.layers) {
    REQUIRE(layer.probs.size() ==
            static_cast<std::size_t>(cfg.num_heads) * t_len * t_len);
    for (int h = 0; h < cfg.num_heads; ++h) {
      for (int q = 0; q < t_len; ++q) {
        double row = 0.0;
        for (int k = 0; k < t_len; ++k) {
          const double prob = layer.probs[(static_cast<std::size_t>(h) * t_len + q) * t_len + k];
          CHECK(prob >= 0.0);
          if (cache.masked[static_cast<std::size_t>(k)]) CHECK(prob == 0.0);
          row += prob;
        }
        CHECK(row == Catch::Approx(1.0).margin(1e-12));
      }
    }
  }
}

TEST_CASE("encoder rejects out-of-contract inputs") {
  const EncoderParameters p = toy_params(1);
  CHECK_THROWS(encode(p, {}));
  CHECK_THROWS(encode(p, {1, 2, 3, 4, 5, 6, 7, 8, 9}));  // beyond max_seq_len 8
  CHECK_THROWS(encode(p, {24}));                         // id out of range
  CHECK_THROWS(encoder_forward(p, {1, 2}, true, nullptr));  // train mode needs an rng
}

TEST_CASE("gelu matches its definition and derivative numerically") {
  for (double x : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    const double want = 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    CHECK(nn::gelu(x) == Catch::Approx(want).margin(1e-12));
    const double eps = 1e-6;
    const double numeric = (nn::gelu(x + eps) - nn::gelu(x - eps)) / (2 * eps);
    CHECK(nn::gelu_grad(x) == Catch::Approx(numeric).margin(1e-8));
  }
}

TEST_CASE("finite differences confirm the backward pass on the toy model") {
  const auto start = std::chrono::steady_clock::now();
  const EncoderConfig cfg = EncoderConfig::toy();

  const GradCheckResult rank_only = grad_check(cfg, 1.0, 0.0, 1e-5, 60, 13);
  CHECK(rank_only.max_rel_error < 1e-4);
  CHECK(rank_only.checked >= 60);

  const GradCheckResult cls_only = grad_check(cfg, 0.0, 1.0, 1e-5, 60, 13);
  CHECK(cls_only.max_rel_error < 1e-4);

  const GradCheckResult joint = grad_check(cfg, 0.5, 0.5, 1e-5, 60, 13);
  CHECK(joint.max_rel_error < 1e-4);

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed < 60.0);
}

TEST_CASE("grad check guards its preconditions") {
  EncoderConfig cfg = EncoderConfig::toy();
  cfg.dropout = 0.1;
  CHECK_THROWS(grad_check(cfg, 0.5, 0.5, 1e-5, 10, 1));

  std::vector<double> param{1.0};
  std::vector<double> grad{0.0};
  std::vector<std::vector<double>*> params{&param};
  std::vector<const std::vector<double>*> grads{&grad};
  CHECK_THROWS(finite_difference_check(params, grads, [] { return 0.0; }, 0.0, 1, 1));
}
