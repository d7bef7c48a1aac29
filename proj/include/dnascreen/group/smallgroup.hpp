#pragma once

// Tiny multiplicative-residue groups with brute-forceable discrete logs.
// SmallGroup<P,Q,GEN> is the order-P subgroup of Z_Q^* generated by GEN,
// with scalars in the field Z_P. Used as the test oracle backend; shares
// the trait interface of the production group.

#include <array>
#include <cstdint>

#include "dnascreen/bytes.hpp"
#include "dnascreen/errors.hpp"

namespace dnascreen {

namespace detail {

inline std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod64(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod64(r, base, m);
        base = mulmod64(base, base, m);
        e >>= 1;
    }
    return r;
}

inline Bytes u64_le32(std::uint64_t v) {
    Bytes b(32, 0);
    for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(v >> (8 * i));
    return b;
}

inline std::uint64_t le32_u64(const Bytes& b) {
    if (b.size() != 32) throw Error(Err::MalformedPoint, "encoding length");
    for (size_t i = 8; i < 32; ++i)
        if (b[i] != 0) throw Error(Err::MalformedPoint, "non-canonical encoding");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace detail

template <std::uint64_t P>
class SmallScalar {
public:
    SmallScalar() : v_(0) {}
    explicit SmallScalar(std::uint64_t v) : v_(v % P) {}

    static SmallScalar zero() { return SmallScalar(0); }
    static SmallScalar one() { return SmallScalar(1); }
    static SmallScalar from_u64(std::uint64_t v) { return SmallScalar(v); }

    template <class Rng>
    static SmallScalar random(Rng& rng) {
        return SmallScalar(static_cast<std::uint64_t>(rng()));
    }

    static SmallScalar decode(const Bytes& b) { return SmallScalar(detail::le32_u64(b)); }
    Bytes encode() const { return detail::u64_le32(v_); }

    bool is_zero() const { return v_ == 0; }
    std::uint64_t value() const { return v_; }
    static constexpr std::uint64_t modulus() { return P; }

    SmallScalar operator+(SmallScalar o) const { return SmallScalar((v_ + o.v_) % P); }
    SmallScalar operator-(SmallScalar o) const { return SmallScalar((v_ + P - o.v_) % P); }
    SmallScalar operator*(SmallScalar o) const { return SmallScalar(detail::mulmod64(v_, o.v_, P)); }

    SmallScalar inv() const {
        if (v_ == 0) throw Error(Err::InversionOfZero);
        return SmallScalar(detail::powmod64(v_, P - 2, P));  // Fermat; P prime
    }

    SmallScalar neg() const { return SmallScalar((P - v_) % P); }

    bool operator==(SmallScalar o) const { return v_ == o.v_; }
    bool operator!=(SmallScalar o) const { return v_ != o.v_; }

private:
    std::uint64_t v_;
};

template <std::uint64_t P, std::uint64_t Q, std::uint64_t GEN>
class SmallElement {
public:
    SmallElement() : v_(1) {}
    explicit SmallElement(std::uint64_t v) : v_(v) {}

    static SmallElement identity() { return SmallElement(1); }
    static SmallElement generator() { return SmallElement(GEN); }

    static SmallElement decode(const Bytes& b) {
        std::uint64_t v = detail::le32_u64(b);
        if (v == 0 || v >= Q || detail::powmod64(v, P, Q) != 1)
            throw Error(Err::MalformedPoint, "not a subgroup element");
        return SmallElement(v);
    }

    Bytes encode() const { return detail::u64_le32(v_); }

    bool is_identity() const { return v_ == 1; }
    std::uint64_t value() const { return v_; }

    SmallElement op(SmallElement o) const { return SmallElement(detail::mulmod64(v_, o.v_, Q)); }

    SmallElement exp(SmallScalar<P> s) const {
        return SmallElement(detail::powmod64(v_, s.value(), Q));
    }

    bool operator==(SmallElement o) const { return v_ == o.v_; }
    bool operator!=(SmallElement o) const { return v_ != o.v_; }

private:
    std::uint64_t v_;
};

template <std::uint64_t P, std::uint64_t Q, std::uint64_t GEN>
struct SmallGroup {
    using Scalar = SmallScalar<P>;
    using Element = SmallElement<P, Q, GEN>;
    static constexpr size_t kEncodedBytes = 32;

    static Element hash_to_group(const Bytes& input) {
        if (input.empty()) throw Error(Err::EmptyHashInput);
        Bytes buf = input;
        for (int attempt = 0; attempt < 64; ++attempt) {
            Bytes h = sha256(buf);
            std::uint64_t x = 0;
            for (int i = 0; i < 8; ++i) x = (x << 8) | h[i];
            std::uint64_t e = detail::powmod64(x % Q, (Q - 1) / P, Q);
            if (e != 1 && e != 0) return Element(e);
            buf.push_back(std::uint8_t(attempt));  // identity hit: re-derive
        }
        throw Error(Err::EmptyHashInput, "hash_to_group failed to land in subgroup");
    }

    template <class Rng>
    static Scalar random_scalar(Rng& rng) {
        return Scalar::random(rng);
    }
};

// 2 generates the order-11 subgroup of Z_23^*; 4 = 2^2 is in it too.
using TestGroup11 = SmallGroup<11, 23, 2>;

// 240169 = 24 * 10007 + 1 is prime; 2^24 mod 240169 generates the
// order-10007 subgroup.
using TestGroup10007 = SmallGroup<10007, 240169, 205555>;

using TestScalar11 = SmallScalar<11>;
using TestScalar10007 = SmallScalar<10007>;

}  // namespace dnascreen
