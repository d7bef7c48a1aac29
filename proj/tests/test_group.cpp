#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dnascreen/group/ristretto.hpp"
#include "dnascreen/group/smallgroup.hpp"

using namespace dnascreen;

namespace {

// Iterated-group-law oracle: applies the group operation e times.
template <class E>
E slow_exp(const E& g, std::uint64_t e) {
    E acc = E::identity();
    for (std::uint64_t i = 0; i < e; ++i) acc = acc.op(g);
    return acc;
}

template <class G, class Rng>
typename G::Element random_element(Rng& rng) {
    return G::Element::generator().exp(G::Scalar::random(rng));
}

}  // namespace

TEST_CASE("scalar inversion in a brute-forceable field") {
    using S7 = SmallScalar<7>;
    CHECK(S7(1).inv() == S7(1));

    // brute-force oracle: search residues 1..6 for 3*x == 1 mod 7
    std::uint64_t expected = 0;
    for (std::uint64_t x = 1; x < 7; ++x)
        if ((3 * x) % 7 == 1) expected = x;
    CHECK(expected == 5);
    CHECK(S7(3).inv() == S7(expected));

    CHECK_THROWS_AS(S7(0).inv(), Error);
}

TEST_CASE("scalar inversion properties (ristretto255)") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        auto s = RistrettoScalar::random(rng);
        if (s.is_zero()) continue;
        CHECK(s * s.inv() == RistrettoScalar::one());
        CHECK(s.inv().inv() == s);
    }
    CHECK_THROWS_AS(RistrettoScalar::zero().inv(), Error);
}

TEST_CASE("group exponentiation against the iterated-law oracle") {
    using G = TestGroup11;
    auto g = G::Element::generator();

    CHECK(g.exp(G::Scalar(0)) == G::Element::identity());
    CHECK(g.exp(G::Scalar(1)) == g);
    CHECK(g.exp(G::Scalar(3)).exp(G::Scalar(4)) == slow_exp(g, 12));

    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        std::uint64_t a = rng() % 1024;
        std::uint64_t b = rng() % 1024;
        auto lhs = g.exp(G::Scalar(a)).exp(G::Scalar(b));
        CHECK(lhs == g.exp(G::Scalar(a) * G::Scalar(b)));
        CHECK(g.exp(G::Scalar(a)) == slow_exp(g, a));
    }
}

TEST_CASE("exponent laws hold in ristretto255") {
    std::mt19937_64 rng(13);
    auto g = RistrettoElement::generator();
    for (int i = 0; i < 20; ++i) {
        auto a = RistrettoScalar::random(rng);
        auto b = RistrettoScalar::random(rng);
        CHECK(g.exp(a).exp(b) == g.exp(a * b));
    }
    CHECK(g.exp(RistrettoScalar::zero()) == RistrettoElement::identity());
    CHECK(g.exp(RistrettoScalar::one()) == g);
}

TEST_CASE("hash_to_group determinism and domain separation") {
    auto a1 = Ristretto255::hash_to_group(to_bytes("dna42:ACGTACGT"));
    auto a2 = Ristretto255::hash_to_group(to_bytes("dna42:ACGTACGT"));
    CHECK(a1 == a2);

    auto b = Ristretto255::hash_to_group(to_bytes("aa20:ACGTACGT"));
    CHECK(a1 != b);

    CHECK_NOTHROW(RistrettoElement::decode(a1.encode()));
    CHECK_THROWS_AS(Ristretto255::hash_to_group({}), Error);

    auto s1 = TestGroup11::hash_to_group(to_bytes("dna30:AAA"));
    auto s2 = TestGroup11::hash_to_group(to_bytes("dna30:AAA"));
    CHECK(s1 == s2);
    CHECK_NOTHROW(TestGroup11::Element::decode(s1.encode()));
}

TEST_CASE("encoding round-trips and non-canonical rejection") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 10000; ++i) {
        auto e = random_element<Ristretto255>(rng);
        CHECK(RistrettoElement::decode(e.encode()) == e);
    }
    int rejected = 0;
    for (int i = 0; i < 10000; ++i) {
        Bytes junk(32);
        for (auto& b : junk) b = std::uint8_t(rng());
        try {
            auto e = RistrettoElement::decode(junk);
            CHECK(e.encode() == junk);  // chance hits must re-encode identically
        } catch (const Error&) {
            ++rejected;
        }
    }
    CHECK(rejected > 0);
}

TEST_CASE("small group encoding rejects out-of-subgroup residues") {
    using E = TestGroup11::Element;
    CHECK(E::decode(E::generator().encode()) == E::generator());
    // 5 is not in the order-11 subgroup of Z_23^*
    CHECK_THROWS_AS(E::decode(detail::u64_le32(5)), Error);
    CHECK_THROWS_AS(E::decode(detail::u64_le32(0)), Error);
    CHECK_THROWS_AS(E::decode(detail::u64_le32(23)), Error);
}

TEST_CASE("small group order and generator sanity") {
    using G10007 = TestGroup10007;
    auto g = G10007::Element::generator();
    CHECK(g != G10007::Element::identity());
    CHECK(g.exp(G10007::Scalar(10007)) == g.exp(G10007::Scalar(0)));
    CHECK(detail::powmod64(205555, 10007, 240169) == 1);
}
