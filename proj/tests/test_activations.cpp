#include <actens/actens.hpp>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>
#include <vector>

using namespace actens;

namespace {

// Evaluate one channel of an activation at scalar x.
double eval1(const ActivationSpec& s, const ActivationState& st, double x) {
  double y = 0.0;
  act_forward(s, st, std::span<const double>(&x, 1), std::span<double>(&y, 1));
  return y;
}

double grad1(const ActivationSpec& s, const ActivationState& st, double x) {
  double g = 0.0;
  act_grad_input(s, st, std::span<const double>(&x, 1), std::span<double>(&g, 1));
  return g;
}

std::vector<double> eval_vec(const ActivationSpec& s, const ActivationState& st,
                             const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  act_forward(s, st, x, y);
  return y;
}

ActivationState state1(const ActivationSpec& s, Rng rng) { return init_state(s, 1, rng); }

}  // namespace

TEST_CASE("triangular hat: peak, support, slopes") {
  CHECK(detail::tri_hat(2.0, 2.0, 2.0) == 2.0);      // peak value equals the half-width
  CHECK(detail::tri_hat(0.0, 2.0, 2.0) == 0.0);      // left support edge
  CHECK(detail::tri_hat(4.0, 2.0, 2.0) == 0.0);      // right support edge
  CHECK(detail::tri_hat(1.0, 2.0, 2.0) == 1.0);      // halfway up
  CHECK(detail::tri_hat(-1.0, 2.0, 2.0) == 0.0);     // outside
  CHECK(detail::tri_hat_dx(1.0, 2.0, 2.0) == 1.0);   // rising branch
  CHECK(detail::tri_hat_dx(3.0, 2.0, 2.0) == -1.0);  // falling branch
  CHECK(detail::tri_hat_dx(2.0, 2.0, 2.0) == -1.0);  // right-branch rule at the peak
  CHECK(detail::tri_hat_dx(5.0, 2.0, 2.0) == 0.0);
}

TEST_CASE("biphasic hat: bump, dip, range") {
  // Rising branch of the positive bump at the largest grid scale.
  CHECK(detail::bi_hat(256.0, 512.0, 512.0) == 256.0);
  // Peak and dip bottom reach exactly +hw and -hw.
  CHECK(detail::bi_hat(512.0, 512.0, 512.0) == 512.0);
  CHECK(detail::bi_hat(512.0 + 2.0 * 512.0, 512.0, 512.0) == -512.0);
  const double a = 1.0, hw = 0.25;
  CHECK(detail::bi_hat(a + 2.0 * hw, a, hw) == -hw);
  CHECK(detail::bi_hat(a - hw, a, hw) == 0.0);   // left support edge
  CHECK(detail::bi_hat(a + hw, a, hw) == 0.0);   // bump/dip junction
  CHECK(detail::bi_hat(a + 3 * hw, a, hw) == 0.0);  // right support edge
  CHECK(detail::bi_hat(a + 4 * hw, a, hw) == 0.0);  // beyond support
  // Range never leaves [-hw, hw].
  for (int i = 0; i <= 400; ++i) {
    const double x = a - 2.0 * hw + i * (6.0 * hw / 400.0);
    const double v = detail::bi_hat(x, a, hw);
    CHECK(v <= hw);
    CHECK(v >= -hw);
  }
}

TEST_CASE("fixed grids reproduce the reference tables and scale linearly") {
  SECTION("triangular table at max_input 256") {
    const FixedGrid g = build_grid(Act::melu, 256.0);
    const double c[7] = {512, 256, 768, 128, 384, 640, 896};
    const double w[7] = {512, 256, 256, 128, 128, 128, 128};
    REQUIRE(g.size() == 7);
    for (int i = 0; i < 7; ++i) {
      CHECK(g.center[i] == c[i]);
      CHECK(g.half_width[i] == w[i]);
    }
  }
  SECTION("biphasic table at max_input 256") {
    const FixedGrid g = build_grid(Act::galu, 256.0);
    const double c[7] = {256, 128, 640, 64, 320, 576, 832};
    const double w[7] = {256, 128, 128, 64, 64, 64, 64};
    for (int i = 0; i < 7; ++i) {
      CHECK(g.center[i] == c[i]);
      CHECK(g.half_width[i] == w[i]);
    }
  }
  SECTION("max_input 1 gives the base tables") {
    const FixedGrid t = build_grid(Act::melu, 1.0);
    const FixedGrid b = build_grid(Act::small_galu, 1.0);
    const double tc[7] = {2, 1, 3, 0.5, 1.5, 2.5, 3.5};
    const double tw[7] = {2, 1, 1, 0.5, 0.5, 0.5, 0.5};
    const double bc[7] = {1, 0.5, 2.5, 0.25, 1.25, 2.25, 3.25};
    const double bw[7] = {1, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25};
    for (int i = 0; i < 7; ++i) {
      CHECK(t.center[i] == tc[i]);
      CHECK(t.half_width[i] == tw[i]);
      CHECK(b.center[i] == bc[i]);
      CHECK(b.half_width[i] == bw[i]);
    }
  }
  SECTION("linear scaling is exact for 1, 255, 256") {
    for (const Act kind : {Act::melu, Act::galu}) {
      const FixedGrid base = build_grid(kind, 1.0);
      for (const double m : {1.0, 255.0, 256.0}) {
        const FixedGrid g = build_grid(kind, m);
        for (std::size_t i = 0; i < 7; ++i) {
          CHECK(g.center[i] == base.center[i] * m);
          CHECK(g.half_width[i] == base.half_width[i] * m);
        }
      }
    }
  }
  SECTION("grid errors") {
    CHECK_THROWS_AS(build_grid(Act::relu, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(Act::melu, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(Act::melu, -2.0), std::invalid_argument);
  }
  SECTION("grid family membership") {
    CHECK(uses_triangular_grid(Act::melu));
    CHECK(uses_triangular_grid(Act::flexible_melu));
    CHECK(uses_triangular_grid(Act::symmetric_melu));
    CHECK(uses_triangular_grid(Act::melu_2d));
    CHECK(uses_triangular_grid(Act::melu_galu));
    CHECK(uses_biphasic_grid(Act::small_galu));
    CHECK(uses_biphasic_grid(Act::galu));
    CHECK(uses_biphasic_grid(Act::symmetric_galu));
    CHECK_FALSE(uses_triangular_grid(Act::relu));
    CHECK_FALSE(uses_biphasic_grid(Act::melu));
  }
}

TEST_CASE("closed-form forward values") {
  Rng rng(7);
  SECTION("fixed-shape units") {
    ActivationState none;
    CHECK(eval1(make_spec(Act::relu), none, 2.5) == 2.5);
    CHECK(eval1(make_spec(Act::relu), none, -2.5) == 0.0);
    CHECK(eval1(make_spec(Act::leaky_relu), none, -2.0) == Catch::Approx(-0.02));
    CHECK(eval1(make_spec(Act::leaky_relu), none, 3.0) == 3.0);
    CHECK(eval1(make_spec(Act::elu), none, -1.0) == Catch::Approx(std::exp(-1.0) - 1.0));
    CHECK(eval1(make_spec(Act::elu), none, 1.5) == 1.5);
    CHECK(eval1(make_spec(Act::swish), none, 1.0) == Catch::Approx(1.0 / (1.0 + std::exp(-1.0))));
    CHECK(eval1(make_spec(Act::swish), none, 0.0) == 0.0);
  }
  SECTION("derivative spot values") {
    ActivationState none;
    CHECK(grad1(make_spec(Act::elu), none, -1.0) == Catch::Approx(std::exp(-1.0)));
    CHECK(grad1(make_spec(Act::relu), none, 0.0) == 1.0);  // right-branch rule
    CHECK(grad1(make_spec(Act::leaky_relu), none, -1.0) == Catch::Approx(0.01));
  }
  SECTION("two-threshold unit at its default parameters") {
    const ActivationSpec s = make_spec(Act::srelu);
    const ActivationState st = state1(s, rng.child(1));
    CHECK(eval1(s, st, -4.0) == Catch::Approx(-3.0));  // -2 + 0.5 * (-4 + 2)
    CHECK(eval1(s, st, 0.0) == 0.0);                   // identity segment
    CHECK(eval1(s, st, 1.0) == 1.0);
    CHECK(eval1(s, st, 2.0) == Catch::Approx(1.6));    // 1.5 + 0.2 * (2 - 1.5)
  }
  SECTION("decaying exponential unit at init") {
    const ActivationSpec s = make_spec(Act::pdelu);
    const ActivationState st = state1(s, rng.child(2));
    CHECK(eval1(s, st, 2.0) == 2.0);
    CHECK(eval1(s, st, -1.0) == Catch::Approx(std::pow(0.9, 10.0) - 1.0));
    CHECK(eval1(s, st, 0.0) == 0.0);
  }
  SECTION("smooth units at init") {
    const ActivationSpec sw = make_spec(Act::swish_learnable);
    CHECK(eval1(sw, state1(sw, rng.child(3)), 1.0) ==
          Catch::Approx(1.0 / (1.0 + std::exp(-1.0))));
    const ActivationSpec mi = make_spec(Act::mish);
    CHECK(eval1(mi, state1(mi, rng.child(4)), 1.0) ==
          Catch::Approx(std::tanh(std::log1p(std::exp(1.0)))));
    const ActivationSpec sr = make_spec(Act::srs);
    CHECK(eval1(sr, state1(sr, rng.child(5)), 1.0) ==
          Catch::Approx(1.0 / (0.2 + std::exp(-1.0 / 3.0))));
    CHECK(eval1(sr, state1(sr, rng.child(5)), 0.0) == 0.0);
  }
  SECTION("softplus-based units at init") {
    const double ln2 = std::log(2.0);
    const ActivationSpec s1 = make_spec(Act::soft_learnable);
    const ActivationState st1 = state1(s1, rng.child(6));
    CHECK(eval1(s1, st1, 2.0) == 2.0);  // positive side is the identity
    CHECK(eval1(s1, st1, -1.0) == Catch::Approx(std::log1p(std::exp(-1.0)) - ln2));
    CHECK(std::abs(eval1(s1, st1, 0.0)) < 1e-15);
    const ActivationSpec s2 = make_spec(Act::soft_learnable2);
    ActivationState st2 = state1(s2, rng.child(7));
    st2.group("beta").at(0, 0) = 2.0;
    CHECK(eval1(s2, st2, -1.0) == Catch::Approx(std::log1p(std::exp(-2.0)) - ln2));
  }
  SECTION("tanh-augmented rectifier") {
    const ActivationSpec s = make_spec(Act::tanelu);
    ActivationState st = state1(s, rng.child(8));
    st.group("a").at(0, 0) = 0.5;
    CHECK(eval1(s, st, 2.0) == Catch::Approx(2.0 + 0.5 * std::tanh(2.0)));
    CHECK(eval1(s, st, -2.0) == Catch::Approx(0.5 * std::tanh(-2.0)));
  }
}

TEST_CASE("zero-coefficient reductions are exact") {
  Rng rng(11);
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(rng.uniform(-6.0, 6.0));
  const ActivationSpec relu = make_spec(Act::relu);
  const ActivationState none;
  const std::vector<double> ref = eval_vec(relu, none, xs);

  auto check_equals_relu = [&](const ActivationSpec& s, const ActivationState& st) {
    for (const double x : xs) {
      const double y = eval1(s, st, x);
      const double r = x >= 0.0 ? x : 0.0;
      REQUIRE(y == r);  // tolerance zero
    }
  };

  SECTION("hat families with zero coefficients equal the rectifier") {
    for (const char* name : {"melu_k4", "melu_k8", "sgalu", "galu", "flexible_melu"}) {
      ActivationSpec s = spec_by_name(name);
      ActivationState st = init_state(s, 1, rng);
      INFO(name);
      check_equals_relu(s, st);
    }
  }
  SECTION("hinge families with zero coefficients equal their base") {
    ActivationSpec ap = make_spec(Act::aplu);
    ActivationState ast = init_state(ap, 1, rng);  // a starts at zero, b random
    check_equals_relu(ap, ast);

    ActivationSpec sp = make_spec(Act::splash);
    ActivationState sst = init_state(sp, 1, rng);
    for (const double x : xs) REQUIRE(eval1(sp, sst, x) == std::abs(x));
  }
  SECTION("zero slope parameter reductions") {
    ActivationSpec pr = make_spec(Act::prelu);
    check_equals_relu(pr, init_state(pr, 1, rng));
    ActivationSpec te = make_spec(Act::tanelu);
    check_equals_relu(te, init_state(te, 1, rng));
  }
  SECTION("pairwise hat unit with zero state sums two rectifiers") {
    ActivationSpec s = make_spec(Act::melu_2d);
    const int ch = 5;
    ActivationState st = init_state(s, ch, rng);
    std::vector<double> x(ch), y(ch);
    for (int trial = 0; trial < 400; ++trial) {
      for (auto& v : x) v = rng.uniform(-6.0, 6.0);
      act_forward(s, st, x, y);
      for (int i = 0; i < ch; ++i) {
        const double a = x[i] >= 0.0 ? x[i] : 0.0;
        const double b = x[(i + 1) % ch] >= 0.0 ? x[(i + 1) % ch] : 0.0;
        REQUIRE(y[i] == a + b);
      }
    }
  }
  SECTION("blended unit endpoints") {
    ActivationSpec s = make_spec(Act::melu_galu);
    ActivationState st = init_state(s, 1, rng);
    // Fresh state: zero coefficients and an even blend equal the rectifier.
    check_equals_relu(s, st);

    // mix = 0 reproduces the triangular-hat unit with the same coefficients.
    ActivationSpec ms = make_spec(Act::melu);  // k = 8
    ActivationState mst = init_state(ms, 1, rng);
    for (int j = 0; j < 8; ++j) {
      const double c = rng.uniform(-0.8, 0.8);
      st.group("mc").at(0, j) = c;
      mst.group("c").at(0, j) = c;
    }
    st.group("mix").at(0, 0) = 0.0;
    for (const double x : xs) REQUIRE(eval1(s, st, x) == eval1(ms, mst, x));

    // mix = 1 reproduces the biphasic-hat unit with the same coefficients.
    ActivationSpec gs = make_spec(Act::galu);  // k = 4
    ActivationState gst = init_state(gs, 1, rng);
    for (int j = 0; j < 4; ++j) {
      const double c = rng.uniform(-0.8, 0.8);
      st.group("gc").at(0, j) = c;
      gst.group("c").at(0, j) = c;
    }
    st.group("mix").at(0, 0) = 1.0;
    for (const double x : xs) REQUIRE(eval1(s, st, x) == eval1(gs, gst, x));
  }
}

TEST_CASE("symmetric units are exactly even") {
  Rng rng(13);
  for (const char* name : {"symmetric_melu", "symmetric_galu"}) {
    ActivationSpec s = spec_by_name(name);
    ActivationState st = init_state(s, 1, rng);
    auto& c = st.group("c");
    INFO(name);
    for (int trial = 0; trial < 20; ++trial) {
      for (auto& v : c.values) v = rng.uniform(-0.8, 0.8);
      for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform(-6.0, 6.0);
        REQUIRE(eval1(s, st, x) == eval1(s, st, -x));
      }
    }
    // Zero coefficients leave the absolute value.
    ActivationState zero = init_state(s, 1, rng);
    for (int i = 0; i < 200; ++i) {
      const double x = rng.uniform(-6.0, 6.0);
      REQUIRE(eval1(s, zero, x) == std::abs(x));
    }
  }
}

TEST_CASE("forward is continuous at every kink") {
  Rng rng(17);
  const double eps = 1e-7;
  for (const auto& entry : activation_registry()) {
    if (entry.kind == Act::melu_2d) continue;  // kinks live on pair circles, below
    for (const double mi : {1.0, 255.0}) {
      ActivationSpec s = spec_by_name(entry.name, mi);
      ActivationState st = random_state(s, 1, rng);
      for (const double p : kink_points(s, st, 0)) {
        const double lo = eval1(s, st, p - eps);
        const double hi = eval1(s, st, p + eps);
        INFO(entry.name << " max_input=" << mi << " kink at " << p);
        REQUIRE(std::abs(hi - lo) < 1e-4 * std::max(1.0, std::abs(p)));
      }
    }
  }
  SECTION("pairwise unit is continuous across a hat circle") {
    ActivationSpec s = make_spec(Act::melu_2d);
    ActivationState st = random_state(s, 2, rng);
    const FixedGrid g = build_grid(Act::melu, 1.0);
    // Walk x1 across the circle centered at (c0, c0) with radius hw0, x2 fixed.
    const double a = g.center[0], hw = g.half_width[0];
    const double x2 = a + 0.3 * hw;
    const double span = std::sqrt(hw * hw - (x2 - a) * (x2 - a));
    for (const double cross : {a - span, a + span}) {
      std::vector<double> xl = {cross - eps, x2}, xh = {cross + eps, x2};
      std::vector<double> yl(2), yh(2);
      act_forward(s, st, xl, yl);
      act_forward(s, st, xh, yh);
      REQUIRE(std::abs(yh[0] - yl[0]) < 1e-4);
    }
  }
}

TEST_CASE("registry names, order, and lookups") {
  const auto& reg = activation_registry();
  REQUIRE(reg.size() == 24);
  for (std::size_t i = 1; i < reg.size(); ++i) CHECK(reg[i - 1].name < reg[i].name);

  CHECK(find_activation("relu") != nullptr);
  CHECK(find_activation("melu_k4") != nullptr);
  CHECK(find_activation("does_not_exist") == nullptr);
  CHECK(find_activation("ReLU") == nullptr);  // names are case-sensitive

  CHECK(spec_by_name("melu_k4").k == 4);
  CHECK(spec_by_name("melu_k8").k == 8);
  CHECK(spec_by_name("melu_k4").kind == Act::melu);
  CHECK(spec_by_name("sgalu").kind == Act::small_galu);
  CHECK(spec_by_name("sgalu").k == 2);
  CHECK(spec_by_name("galu").k == 4);
  CHECK(spec_by_name("relu", 255.0).max_input == 255.0);
  CHECK_THROWS_AS(spec_by_name("nope"), std::invalid_argument);

  CHECK(activation_name(Act::melu, 4) == "melu_k4");
  CHECK(activation_name(Act::melu, 8) == "melu_k8");
  CHECK(activation_name(Act::relu) == "relu");

  SECTION("per-channel learnable parameter counts") {
    auto count_of = [](const char* n) { return param_count(spec_by_name(n)); };
    CHECK(count_of("relu") == 0);
    CHECK(count_of("leaky_relu") == 0);
    CHECK(count_of("elu") == 0);
    CHECK(count_of("swish") == 0);
    CHECK(count_of("prelu") == 1);
    CHECK(count_of("srelu") == 4);
    CHECK(count_of("aplu") == 6);
    CHECK(count_of("splash") == 9);
    CHECK(count_of("melu_k4") == 4);
    CHECK(count_of("melu_k8") == 8);
    CHECK(count_of("sgalu") == 2);
    CHECK(count_of("galu") == 4);
    CHECK(count_of("flexible_melu") == 15);
    CHECK(count_of("melu_2d") == 10);
    CHECK(count_of("melu_galu") == 13);
    CHECK(count_of("symmetric_melu") == 8);
    CHECK(count_of("symmetric_galu") == 4);
    CHECK(count_of("srs") == 2);
    CHECK(count_of("soft_learnable2") == 2);
    for (const char* n : {"pdelu", "swish_learnable", "mish", "soft_learnable", "tanelu"})
      CHECK(count_of(n) == 1);
  }
}

TEST_CASE("hinge weight decay and learning-rate scaling") {
  Rng rng(19);
  SECTION("quadratic penalty on hinge coefficients") {
    ActivationSpec s = make_spec(Act::aplu);
    ActivationState st = init_state(s, 1, rng);
    auto& a = st.group("a");
    a.at(0, 0) = 1.0;
    a.at(0, 1) = -2.0;
    a.at(0, 2) = 0.0;
    CHECK(regularization(s, st) == Catch::Approx(0.005));

    ActivationState grad = zeros_like(st);
    const double loss = regularization(s, st, &grad);
    CHECK(loss == Catch::Approx(0.005));
    CHECK(grad.group("a").at(0, 0) == Catch::Approx(0.002));
    CHECK(grad.group("a").at(0, 1) == Catch::Approx(-0.004));
    CHECK(grad.group("a").at(0, 2) == 0.0);
    CHECK(grad.group("b").at(0, 0) == 0.0);  // offsets are not penalized
  }
  SECTION("both hinge banks of the mirrored unit are penalized") {
    ActivationSpec s = make_spec(Act::splash);
    ActivationState st = init_state(s, 1, rng);
    st.group("a_pos").at(0, 0) = 3.0;
    st.group("a_neg").at(0, 1) = -1.0;
    CHECK(regularization(s, st) == Catch::Approx(0.001 * (9.0 + 1.0)));
  }
  SECTION("no penalty elsewhere") {
    for (const char* n : {"relu", "melu_k8", "srelu", "prelu", "mish"}) {
      ActivationSpec s = spec_by_name(n);
      ActivationState st = init_state(s, 1, rng);
      CHECK(regularization(s, st) == 0.0);
    }
  }
  SECTION("hinge parameter step scales with the input range") {
    CHECK(param_lr_scale(spec_by_name("aplu", 255.0)) == Catch::Approx(1.0 / 255.0));
    CHECK(param_lr_scale(spec_by_name("splash", 255.0)) == Catch::Approx(1.0 / 255.0));
    CHECK(param_lr_scale(spec_by_name("aplu", 1.0)) == 1.0);
    CHECK(param_lr_scale(spec_by_name("melu_k8", 255.0)) == 1.0);
    CHECK(param_lr_scale(spec_by_name("relu")) == 1.0);
  }
  SECTION("positive parameters are clamped away from zero") {
    ActivationSpec s = make_spec(Act::srs);
    ActivationState st = init_state(s, 1, rng);
    st.group("alpha").at(0, 0) = -0.7;
    st.group("beta").at(0, 0) = 1e-9;
    clamp_positive_params(s, st);
    CHECK(st.group("alpha").at(0, 0) == 1e-3);
    CHECK(st.group("beta").at(0, 0) == 1e-3);
    // Ordinary coefficients may stay negative.
    ActivationSpec m = make_spec(Act::melu);
    ActivationState mst = init_state(m, 1, rng);
    mst.group("c").at(0, 0) = -0.5;
    clamp_positive_params(m, mst);
    CHECK(mst.group("c").at(0, 0) == -0.5);
  }
}

TEST_CASE("state initialization shapes and defaults") {
  Rng rng(23);
  SECTION("default parameter values") {
    ActivationState sr = init_state(make_spec(Act::srelu), 3, rng);
    CHECK(sr.group("al").at(2, 0) == 0.5);
    CHECK(sr.group("ar").at(0, 0) == 0.2);
    CHECK(sr.group("tl").at(1, 0) == -2.0);
    CHECK(sr.group("tr").at(0, 0) == 1.5);
    CHECK(init_state(make_spec(Act::pdelu), 2, rng).group("a").at(1, 0) == 1.0);
    CHECK(init_state(make_spec(Act::srs), 1, rng).group("alpha").at(0, 0) == 5.0);
    CHECK(init_state(make_spec(Act::srs), 1, rng).group("beta").at(0, 0) == 3.0);
    CHECK(init_state(make_spec(Act::melu_galu), 1, rng).group("mix").at(0, 0) == 0.5);
    CHECK(init_state(make_spec(Act::prelu), 1, rng).group("a").at(0, 0) == 0.0);
  }
  SECTION("hinge offsets start inside the input range") {
    for (const double mi : {1.0, 255.0}) {
      Rng hinge_rng(5);
      ActivationState st = init_state(make_spec(Act::aplu, mi), 4, hinge_rng);
      for (const double b : st.group("b").values) {
        CHECK(b > 0.0);
        CHECK(b <= mi);
      }
    }
  }
  SECTION("learnable peaks start at the grid centers") {
    ActivationSpec s = make_spec(Act::flexible_melu);
    ActivationState st = init_state(s, 2, rng);
    const FixedGrid g = build_grid(Act::melu, 1.0);
    for (int j = 0; j < s.k - 1; ++j) {
      CHECK(st.group("a").at(0, j) == g.center[static_cast<std::size_t>(j)]);
      CHECK(st.group("a").at(1, j) == g.center[static_cast<std::size_t>(j)]);
    }
  }
  SECTION("stateless kinds have empty states") {
    for (const Act k : {Act::relu, Act::leaky_relu, Act::elu, Act::swish}) {
      CHECK(init_state(make_spec(k), 3, rng).groups.empty());
      CHECK_FALSE(has_learnable_params(k));
    }
  }
  SECTION("errors") {
    CHECK_THROWS_AS(init_state(make_spec(Act::prelu), 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(init_state(make_spec(Act::melu_2d), 1, rng), std::invalid_argument);
    ActivationState st = init_state(make_spec(Act::prelu), 1, rng);
    CHECK_THROWS_AS(st.group("missing"), std::invalid_argument);
  }
}

TEST_CASE("invalid inputs propagate, invalid shapes throw") {
  Rng rng(29);
  SECTION("quiet NaN flows through guarded kinds") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const char* n : {"melu_k8", "galu", "srelu", "aplu", "splash", "pdelu",
                          "soft_learnable", "melu_galu", "flexible_melu"}) {
      ActivationSpec s = spec_by_name(n);
      ActivationState st = random_state(s, 1, rng);
      INFO(n);
      CHECK(std::isnan(eval1(s, st, nan)));
    }
    ActivationSpec p = make_spec(Act::melu_2d);
    ActivationState pst = init_state(p, 2, rng);
    std::vector<double> x = {0.5, nan}, y(2);
    act_forward(p, pst, x, y);
    CHECK(std::isnan(y[0]));
    CHECK(std::isnan(y[1]));
  }
  SECTION("shape mismatches") {
    ActivationSpec s = make_spec(Act::prelu);
    ActivationState st = init_state(s, 2, rng);
    std::vector<double> x = {1.0, 2.0, 3.0}, y(3);
    CHECK_THROWS_AS(act_forward(s, st, x, y), std::invalid_argument);
    ActivationState empty;
    std::vector<double> x1 = {1.0}, y1(1);
    CHECK_THROWS_AS(act_forward(s, empty, x1, y1), std::invalid_argument);
    std::vector<double> yshort(2);
    std::vector<double> x2 = {1.0, 2.0};
    std::vector<double> y3(3);
    CHECK_THROWS_AS(act_forward(s, st, x2, y3), std::invalid_argument);
  }
}

TEST_CASE("kink distance reports the gap to the nearest nondifferentiable point") {
  Rng rng(31);
  ActivationSpec s = make_spec(Act::relu);
  ActivationState none;
  std::vector<double> x = {0.4, -0.25, 3.0};
  CHECK(kink_distance(s, none, x) == Catch::Approx(0.25));

  ActivationSpec m = make_spec(Act::melu);
  ActivationState mst = init_state(m, 1, rng);
  std::vector<double> x2 = {0.45};  // grid kink at 0.5 half-width 0.5 -> edge at 0
  CHECK(kink_distance(m, mst, x2) == Catch::Approx(0.05));

  ActivationSpec p = make_spec(Act::melu_2d);
  ActivationState pst = init_state(p, 2, rng);
  // Nearest pairwise kink to (3.5, 2): the rim of the circle centered at the
  // grid point (3, 1) with radius 1, at distance hypot(0.5, 1) - 1.
  std::vector<double> x3 = {3.5, 2.0};
  CHECK(kink_distance(p, pst, x3) == Catch::Approx(std::sqrt(1.25) - 1.0).margin(1e-12));
}
