#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "precis/half.hpp"
#include "precis/tensor.hpp"

using namespace precis;

TEST_CASE("format helpers") {
    CHECK(format_bytes(Format::Binary16) == 2);
    CHECK(format_bytes(Format::Binary32) == 4);
    CHECK(format_bytes(Format::Binary64) == 8);
    CHECK(std::string(format_name(Format::Binary16)) == "binary16");
    CHECK(std::string(format_name(Format::Binary32)) == "binary32");
    CHECK(std::string(format_name(Format::Binary64)) == "binary64");
    CHECK(parse_format("binary16") == Format::Binary16);
    CHECK(parse_format("binary32") == Format::Binary32);
    CHECK(parse_format("binary64") == Format::Binary64);
    CHECK_THROWS_AS(parse_format("float8"), std::invalid_argument);
}

TEST_CASE("factories and element access") {
    Tensor z = Tensor::zeros(2, 3, Format::Binary32);
    CHECK(z.rows == 2);
    CHECK(z.cols == 3);
    CHECK(z.size() == 6);
    CHECK(!z.is_scalar());
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z.get(i) == 0.0);

    Tensor s = Tensor::scalar(2.5, Format::Binary64);
    CHECK(s.is_scalar());
    CHECK(s.get(std::size_t(0)) == 2.5);

    Tensor ff = Tensor::full(3, 1, Format::Binary16, 0.1);
    for (std::size_t i = 0; i < ff.size(); ++i) CHECK(ff.get(i) == 0.0999755859375);

    Tensor fl = Tensor::from_flat(2, 2, Format::Binary32, {1, 2, 3, 4});
    CHECK(fl.get(1, 0) == 3.0);
    CHECK_THROWS_AS(Tensor::from_flat(2, 2, Format::Binary32, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("set rounds into the storage format") {
    Tensor t = Tensor::zeros(1, 3, Format::Binary16);
    t.set(0, 0, 0.1);
    CHECK(t.get(0, 0) == 0.0999755859375);
    t.set(0, 1, 90000.0);
    CHECK(std::isinf(t.get(0, 1)));
    t.set(0, 2, std::ldexp(1.0, -25));
    CHECK(t.get(0, 2) == 0.0);
    CHECK(!t.all_finite());
    CHECK(t.count_nonfinite() == 1);

    Tensor t32 = Tensor::zeros(1, 1, Format::Binary32);
    t32.set(std::size_t(0), 0.1);
    CHECK(t32.get(std::size_t(0)) == double(0.1f));
}

TEST_CASE("cast between formats") {
    Tensor a = Tensor::from_flat(1, 4, Format::Binary32, {0.1, 1.0, -65520.0, 1e-8});
    Tensor h = cast(a, Format::Binary16);
    CHECK(h.format == Format::Binary16);
    CHECK(h.get(std::size_t(0)) == 0.0999755859375);
    CHECK(h.get(std::size_t(1)) == 1.0);
    CHECK(std::isinf(h.get(std::size_t(2))));
    CHECK(h.get(std::size_t(3)) == 0.0);

    Tensor up = cast(h, Format::Binary64);
    CHECK(up.format == Format::Binary64);
    CHECK(up.get(std::size_t(0)) == 0.0999755859375);

    Tensor same = cast(a, Format::Binary32);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same.get(i) == a.get(i));
}

TEST_CASE("transpose and shape predicates") {
    Tensor a = Tensor::from_flat(2, 3, Format::Binary64, {1, 2, 3, 4, 5, 6});
    Tensor at = transpose(a);
    CHECK(at.rows == 3);
    CHECK(at.cols == 2);
    CHECK(at.get(0, 1) == 4.0);
    CHECK(at.get(2, 0) == 3.0);
    CHECK(same_shape(a, Tensor::zeros(2, 3, Format::Binary16)));
    CHECK(!same_shape(a, at));
}

TEST_CASE("binary64 metric helpers") {
    Tensor v = Tensor::from_flat(1, 2, Format::Binary32, {3, 4});
    CHECK(norm64(v) == 5.0);
    Tensor w = Tensor::from_flat(1, 2, Format::Binary32, {-1, 2});
    CHECK(dot64(v, w) == 5.0);
}

TEST_CASE("ledger accounting") {
    ByteLedger led;
    CHECK(led.total() == 0);
    led.charge(ByteLedger::kParam, Format::Binary32, 10);      // 40 B
    led.charge(ByteLedger::kActivation, Format::Binary16, 6);  // 12 B
    led.charge(ByteLedger::kGradient, Format::Binary64, 2);    // 16 B
    CHECK(led.by_format(Format::Binary32) == 40);
    CHECK(led.by_format(Format::Binary16) == 12);
    CHECK(led.by_category(ByteLedger::kParam) == 40);
    CHECK(led.by_category(ByteLedger::kActivation) == 12);
    CHECK(led.by_category(ByteLedger::kGradient) == 16);
    CHECK(led.total() == 68);
    // repriced at 4 B/element: 40 + 24 + 8
    CHECK(led.total_f32_equiv() == 72);
    CHECK(led.ratio_vs_f32() == doctest::Approx(68.0 / 72.0));

    ByteLedger pure32;
    pure32.charge(ByteLedger::kActivation, Format::Binary32, 100);
    CHECK(pure32.ratio_vs_f32() == 1.0);
    ByteLedger pure16;
    pure16.charge(ByteLedger::kActivation, Format::Binary16, 100);
    CHECK(pure16.ratio_vs_f32() == 0.5);

    const auto before = led.total();
    led.charge(ByteLedger::kActivation, Format::Binary16, 1);
    CHECK(led.total() > before);  // counters only grow
}

TEST_CASE("binary16 tensors stay representable") {
    Tensor t = Tensor::zeros(4, 4, Format::Binary16);
    double v = 1.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.set(i, v);
        v = v * -1.7 + 0.013;
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        const float x = float(t.get(i));
        CHECK(double(round16(x)) == double(x));
    }
}
