#pragma once

// Prime-order group backend over ristretto255 (libsodium). Elements and
// scalars both serialize to canonical 32-byte strings; decoding rejects
// non-canonical encodings.

#include <array>
#include <cstring>
#include <sodium.h>

#include "dnascreen/bytes.hpp"
#include "dnascreen/errors.hpp"

namespace dnascreen {

class RistrettoScalar {
public:
    static constexpr size_t kBytes = crypto_core_ristretto255_SCALARBYTES;

    RistrettoScalar() { bytes_.fill(0); }

    static RistrettoScalar zero() { return RistrettoScalar(); }

    static RistrettoScalar one() { return from_u64(1); }

    static RistrettoScalar from_u64(std::uint64_t v) {
        RistrettoScalar s;
        for (int i = 0; i < 8; ++i) s.bytes_[i] = std::uint8_t(v >> (8 * i));
        return s;
    }

    // Uniform scalar from any 64-byte-producing generator (seedable for tests).
    template <class Rng>
    static RistrettoScalar random(Rng& rng) {
        init_crypto();
        std::array<std::uint8_t, 64> wide;
        for (size_t i = 0; i < wide.size(); i += 4) {
            std::uint32_t w = static_cast<std::uint32_t>(rng());
            std::memcpy(wide.data() + i, &w, 4);
        }
        RistrettoScalar s;
        crypto_core_ristretto255_scalar_reduce(s.bytes_.data(), wide.data());
        return s;
    }

    static RistrettoScalar decode(const Bytes& b) {
        if (b.size() != kBytes) throw Error(Err::MalformedPoint, "scalar length");
        RistrettoScalar s;
        std::memcpy(s.bytes_.data(), b.data(), kBytes);
        return s;
    }

    Bytes encode() const { return Bytes(bytes_.begin(), bytes_.end()); }

    bool is_zero() const {
        init_crypto();
        return sodium_is_zero(bytes_.data(), kBytes) == 1;
    }

    RistrettoScalar operator+(const RistrettoScalar& o) const {
        init_crypto();
        RistrettoScalar r;
        crypto_core_ristretto255_scalar_add(r.bytes_.data(), bytes_.data(), o.bytes_.data());
        return r;
    }

    RistrettoScalar operator-(const RistrettoScalar& o) const {
        init_crypto();
        RistrettoScalar r;
        crypto_core_ristretto255_scalar_sub(r.bytes_.data(), bytes_.data(), o.bytes_.data());
        return r;
    }

    RistrettoScalar operator*(const RistrettoScalar& o) const {
        init_crypto();
        RistrettoScalar r;
        crypto_core_ristretto255_scalar_mul(r.bytes_.data(), bytes_.data(), o.bytes_.data());
        return r;
    }

    RistrettoScalar inv() const {
        init_crypto();
        RistrettoScalar r;
        if (crypto_core_ristretto255_scalar_invert(r.bytes_.data(), bytes_.data()) != 0)
            throw Error(Err::InversionOfZero);
        return r;
    }

    RistrettoScalar neg() const {
        init_crypto();
        RistrettoScalar r;
        crypto_core_ristretto255_scalar_negate(r.bytes_.data(), bytes_.data());
        return r;
    }

    bool operator==(const RistrettoScalar& o) const { return bytes_ == o.bytes_; }
    bool operator!=(const RistrettoScalar& o) const { return !(*this == o); }

    const std::uint8_t* data() const { return bytes_.data(); }

private:
    std::array<std::uint8_t, kBytes> bytes_;
};

class RistrettoElement {
public:
    static constexpr size_t kBytes = crypto_core_ristretto255_BYTES;

    RistrettoElement() { bytes_.fill(0); }  // canonical identity encoding

    static RistrettoElement identity() { return RistrettoElement(); }

    static RistrettoElement generator() {
        init_crypto();
        RistrettoElement e;
        auto one = RistrettoScalar::one();
        crypto_scalarmult_ristretto255_base(e.bytes_.data(), one.data());
        return e;
    }

    static RistrettoElement decode(const Bytes& b) {
        init_crypto();
        if (b.size() != kBytes) throw Error(Err::MalformedPoint, "element length");
        RistrettoElement e;
        std::memcpy(e.bytes_.data(), b.data(), kBytes);
        if (!e.is_identity() &&
            crypto_core_ristretto255_is_valid_point(e.bytes_.data()) != 1)
            throw Error(Err::MalformedPoint, "non-canonical encoding");
        return e;
    }

    Bytes encode() const { return Bytes(bytes_.begin(), bytes_.end()); }

    bool is_identity() const {
        init_crypto();
        return sodium_is_zero(bytes_.data(), kBytes) == 1;
    }

    RistrettoElement op(const RistrettoElement& o) const {
        init_crypto();
        if (is_identity()) return o;
        if (o.is_identity()) return *this;
        RistrettoElement r;
        if (crypto_core_ristretto255_add(r.bytes_.data(), bytes_.data(), o.bytes_.data()) != 0)
            throw Error(Err::MalformedPoint, "group op on invalid point");
        return r;
    }

    // libsodium rejects scalarmults whose result is the identity; those cases
    // (zero scalar, identity base) are exactly the identity output.
    RistrettoElement exp(const RistrettoScalar& s) const {
        init_crypto();
        if (s.is_zero() || is_identity()) return identity();
        RistrettoElement r;
        if (crypto_scalarmult_ristretto255(r.bytes_.data(), s.data(), bytes_.data()) != 0)
            return identity();
        return r;
    }

    bool operator==(const RistrettoElement& o) const { return bytes_ == o.bytes_; }
    bool operator!=(const RistrettoElement& o) const { return !(*this == o); }

private:
    std::array<std::uint8_t, kBytes> bytes_;
};

// Group trait used by the threshold protocols.
struct Ristretto255 {
    using Scalar = RistrettoScalar;
    using Element = RistrettoElement;
    static constexpr size_t kEncodedBytes = RistrettoElement::kBytes;

    static Element hash_to_group(const Bytes& input) {
        init_crypto();
        if (input.empty()) throw Error(Err::EmptyHashInput);
        std::array<std::uint8_t, crypto_hash_sha512_BYTES> wide;
        crypto_hash_sha512(wide.data(), input.data(), input.size());
        Bytes pt(RistrettoElement::kBytes);
        crypto_core_ristretto255_from_hash(pt.data(), wide.data());
        return RistrettoElement::decode(pt);
    }

    template <class Rng>
    static Scalar random_scalar(Rng& rng) {
        return RistrettoScalar::random(rng);
    }
};

}  // namespace dnascreen
