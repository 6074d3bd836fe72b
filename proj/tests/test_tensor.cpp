#include <doctest.h>

#include <cmath>
#include <limits>

#include "test_util.hpp"
#include "ylt/rng.hpp"
#include "ylt/tensor.hpp"

using namespace ylt;

TEST_SUITE_BEGIN("tensor");

TEST_CASE("splitmix64 matches the published reference stream") {
    // Reference outputs of the splitmix64 algorithm for two seeds.
    Rng a(0);
    CHECK(a.next_u64() == 16294208416658607535ULL);
    CHECK(a.next_u64() == 7960286522194355700ULL);
    CHECK(a.next_u64() == 487617019471545679ULL);

    Rng b(1234567);
    CHECK(b.next_u64() == 6457827717110365317ULL);
    CHECK(b.next_u64() == 3203168211198807973ULL);
    CHECK(b.next_u64() == 9817491932198370423ULL);

    CHECK(splitmix64(0) == 16294208416658607535ULL);
}

TEST_CASE("uniform draws stay in [0,1) and are reproducible") {
    Rng r(0);
    CHECK(r.uniform() == doctest::Approx(0.8833108082136426).epsilon(1e-15));

    Rng s(99);
    Rng t(99);
    for (int i = 0; i < 10000; ++i) {
        double u = s.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == t.uniform());
    }

    Rng u1(1), u2(2);
    bool all_equal = true;
    for (int i = 0; i < 16; ++i) all_equal = all_equal && (u1.next_u64() == u2.next_u64());
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform_int covers its range") {
    Rng r(7);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 10000; ++i) {
        int v = r.uniform_int(7);
        REQUIRE(v >= 0);
        REQUIRE(v < 7);
        ++seen[static_cast<std::size_t>(v)];
    }
    for (int c : seen) CHECK(c > 0);
    CHECK(r.uniform_int(1) == 0);
    CHECK(r.uniform_int(0) == 0);
}

TEST_CASE("ranged uniform respects bounds") {
    Rng r(3);
    for (int i = 0; i < 1000; ++i) {
        double v = r.uniform(-2.5, 4.0);
        CHECK(v >= -2.5);
        CHECK(v < 4.0);
    }
    float f = r.uniform_f(0.25f, 0.75f);
    CHECK(f >= 0.25f);
    CHECK(f <= 0.75f);
}

TEST_CASE("tensor construction, fill, finite check") {
    Tensor t({2, 3, 4});
    CHECK(t.numel() == 24);
    CHECK(t.ndim() == 3);
    CHECK(t.dim(1) == 3);
    for (std::int64_t i = 0; i < t.numel(); ++i) CHECK(t[i] == 0.0f);

    t.fill(1.25f);
    CHECK(t[0] == 1.25f);
    CHECK(t[23] == 1.25f);
    CHECK(t.all_finite());

    t[5] = std::numeric_limits<float>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
    t[5] = std::numeric_limits<float>::infinity();
    CHECK_FALSE(t.all_finite());

    CHECK(numel_of({4, 5}) == 20);
    CHECK(shape_str({1, 2, 3}) == "[1,2,3]");
}

TEST_CASE("at3 uses CHW layout") {
    Tensor t({2, 3, 4});
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(i);
    CHECK(t.at3(0, 0, 0) == 0.0f);
    CHECK(t.at3(0, 1, 2) == 6.0f);
    CHECK(t.at3(1, 2, 3) == 23.0f);
}

TEST_CASE("slice_batch copies one image out of a batch") {
    Tensor batch({2, 3, 2, 2});
    for (std::int64_t i = 0; i < batch.numel(); ++i) batch[i] = static_cast<float>(i) * 0.5f;
    Tensor second = slice_batch(batch, 1);
    REQUIRE(second.shape == std::vector<int>({3, 2, 2}));
    for (std::int64_t i = 0; i < second.numel(); ++i) CHECK(second[i] == batch[12 + i]);
}

TEST_CASE("parameter allocates matching gradient and momentum buffers") {
    Parameter p({4, 3}, "probe");
    CHECK(p.value.shape == p.gradient.shape);
    CHECK(p.value.shape == p.momentum_buffer.shape);
    CHECK(p.name == "probe");
    p.gradient.fill(2.0f);
    p.zero_grad();
    for (std::int64_t i = 0; i < p.gradient.numel(); ++i) CHECK(p.gradient[i] == 0.0f);
}

TEST_CASE("sgd step arithmetic") {
    // Two momentum steps computed independently in 32-bit arithmetic:
    // v=1, g=0.5, lr=1e-3, momentum=0.9, decay=5e-4.
    Parameter p({1}, "w");
    p.value[0] = 1.0f;
    p.gradient[0] = 0.5f;
    std::vector<Parameter*> params{&p};

    REQUIRE(sgd_momentum_step(params, 1e-3f, 0.9f, 5e-4f));
    CHECK(p.momentum_buffer[0] == doctest::Approx(-0.0005005f).epsilon(1e-6));
    CHECK(p.value[0] == doctest::Approx(0.9994995f).epsilon(1e-6));
    CHECK(p.gradient[0] == 0.0f); // gradients are consumed

    p.gradient[0] = 0.5f;
    REQUIRE(sgd_momentum_step(params, 1e-3f, 0.9f, 5e-4f));
    CHECK(p.momentum_buffer[0] == doctest::Approx(-0.00095094973f).epsilon(1e-5));
    CHECK(p.value[0] == doctest::Approx(0.99854857f).epsilon(1e-6));
}

TEST_CASE("sgd with zero learning rate and fresh momentum moves nothing") {
    Rng rng(11);
    Parameter p({64}, "w");
    for (std::int64_t i = 0; i < 64; ++i) p.value[i] = rng.uniform_f(-1.0f, 1.0f);
    Tensor before = p.value;
    std::vector<Parameter*> params{&p};
    for (int step = 0; step < 5; ++step) {
        for (std::int64_t i = 0; i < 64; ++i) p.gradient[i] = rng.uniform_f(-1.0f, 1.0f);
        REQUIRE(sgd_momentum_step(params, 0.0f, 0.9f, 5e-4f));
    }
    CHECK(yt::same_bits(before, p.value));
}

TEST_CASE("sgd refuses non-finite gradients and touches nothing") {
    Parameter p({2}, "w");
    p.value[0] = 1.0f;
    p.value[1] = -2.0f;
    p.gradient[0] = 0.1f;
    p.gradient[1] = std::numeric_limits<float>::quiet_NaN();
    std::vector<Parameter*> params{&p};

    CHECK_FALSE(sgd_momentum_step(params, 1e-2f, 0.9f, 0.0f));
    CHECK(p.value[0] == 1.0f);
    CHECK(p.value[1] == -2.0f);
    CHECK(p.momentum_buffer[0] == 0.0f);
    CHECK(std::isnan(p.gradient[1])); // left for the caller to reset

    p.gradient[0] = 0.1f;
    p.gradient[1] = 0.2f;
    CHECK(sgd_momentum_step(params, 1e-2f, 0.9f, 0.0f));
    CHECK(p.value[0] != 1.0f);
}

TEST_SUITE_END();
