#pragma once

// Shamir secret sharing over Z_p with Lagrange interpolation, plus the
// local math of the multi-party share lifecycle: additive-contribution
// distributed key generation, proactive resharing, and product degree
// reduction. Message routing between parties lives in the keyserver and
// simnet layers; everything here is pure.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dnascreen/errors.hpp"

namespace dnascreen {

struct SharingConfig {
    std::uint32_t n = 0;
    std::uint32_t t = 0;

    void validate() const {
        if (t == 0 || t > n) throw Error(Err::BadConfig, "need 0 < t <= n");
    }
};

template <class S>
struct KeyShare {
    std::uint32_t server_index = 0;  // 1-based
    S value;
    std::uint64_t epoch = 0;
    std::string key_id;
};

// lambda_i^{L,h} = prod_{j in L, j != i} (h - j) / (i - j), in index order of L.
template <class S>
std::vector<S> lagrange_coefficients(const std::vector<std::uint32_t>& L, std::uint32_t h) {
    std::set<std::uint32_t> seen(L.begin(), L.end());
    if (seen.size() != L.size()) throw Error(Err::DuplicateIndex);
    std::vector<S> out;
    out.reserve(L.size());
    const S sh = S::from_u64(h);
    for (std::uint32_t i : L) {
        S num = S::one();
        S den = S::one();
        for (std::uint32_t j : L) {
            if (j == i) continue;
            num = num * (sh - S::from_u64(j));
            den = den * (S::from_u64(i) - S::from_u64(j));
        }
        out.push_back(num * den.inv());
    }
    return out;
}

// Evaluations f(1..n) of a degree-(t-1) polynomial with f(0) = secret and
// uniform higher coefficients.
template <class S, class Rng>
std::vector<KeyShare<S>> share(const S& secret, const SharingConfig& cfg, Rng& rng,
                               const std::string& key_id = "", std::uint64_t epoch = 0) {
    cfg.validate();
    std::vector<S> coeffs{secret};
    for (std::uint32_t d = 1; d < cfg.t; ++d) coeffs.push_back(S::random(rng));
    std::vector<KeyShare<S>> shares;
    shares.reserve(cfg.n);
    for (std::uint32_t i = 1; i <= cfg.n; ++i) {
        S x = S::from_u64(i);
        S acc = S::zero();
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;  // Horner
        shares.push_back({i, acc, epoch, key_id});
    }
    return shares;
}

template <class S>
S reconstruct(const std::vector<KeyShare<S>>& shares, const SharingConfig& cfg) {
    cfg.validate();
    if (shares.size() < cfg.t) throw Error(Err::InsufficientShares);
    for (const auto& s : shares)
        if (s.epoch != shares.front().epoch || s.key_id != shares.front().key_id)
            throw Error(Err::EpochMismatch);
    std::vector<KeyShare<S>> used(shares.begin(), shares.begin() + cfg.t);
    std::vector<std::uint32_t> L;
    for (const auto& s : used) L.push_back(s.server_index);
    auto lambda = lagrange_coefficients<S>(L, 0);
    S acc = S::zero();
    for (size_t i = 0; i < used.size(); ++i) acc = acc + lambda[i] * used[i].value;
    return acc;
}

// --- Distributed key generation -------------------------------------------
//
// Party i samples a uniform contribution s_i and Shamir-shares it; party j's
// final share is the sum of the sub-shares it received. The implied key is
// sum_i s_i and never exists in one place.

template <class S>
struct DkgContribution {
    S secret;                          // retained by the contributor (and test harnesses)
    std::vector<S> subshares_by_index; // subshares_by_index[j-1] goes to party j
};

template <class S, class Rng>
DkgContribution<S> dkg_contribution(const SharingConfig& cfg, Rng& rng) {
    cfg.validate();
    DkgContribution<S> c;
    c.secret = S::random(rng);
    for (const auto& sh : share(c.secret, cfg, rng)) c.subshares_by_index.push_back(sh.value);
    return c;
}

template <class S>
KeyShare<S> dkg_combine(std::uint32_t my_index, const std::vector<S>& received,
                        const SharingConfig& cfg, const std::string& key_id,
                        std::uint64_t epoch) {
    if (received.size() != cfg.n) throw Error(Err::DkgAborted, "missing contributions");
    S acc = S::zero();
    for (const auto& v : received) acc = acc + v;
    return {my_index, acc, epoch, key_id};
}

// --- Proactive resharing ----------------------------------------------------
//
// A quorum L of t live holders each Shamir-shares lambda_i^{L,0} * k_i to all
// n servers; every server (including ones offline during epoch e) sums what
// it received into its epoch-(e+1) share.

template <class S, class Rng>
std::vector<S> reshare_contribution(const KeyShare<S>& mine,
                                    const std::vector<std::uint32_t>& quorum,
                                    const SharingConfig& cfg, Rng& rng) {
    cfg.validate();
    if (quorum.size() != cfg.t) throw Error(Err::ReshareImpossible, "quorum size != t");
    auto lambda = lagrange_coefficients<S>(quorum, 0);
    S weighted = S::zero();
    for (size_t i = 0; i < quorum.size(); ++i)
        if (quorum[i] == mine.server_index) weighted = lambda[i] * mine.value;
    std::vector<S> out;
    for (const auto& sh : share(weighted, cfg, rng)) out.push_back(sh.value);
    return out;
}

template <class S>
KeyShare<S> reshare_combine(std::uint32_t my_index, const std::vector<S>& received,
                            const KeyShare<S>& old_meta, const SharingConfig& cfg) {
    if (received.size() != cfg.t) throw Error(Err::ReshareImpossible, "missing sub-shares");
    S acc = S::zero();
    for (const auto& v : received) acc = acc + v;
    return {my_index, acc, old_meta.epoch + 1, old_meta.key_id};
}

// --- Share product with degree reduction ------------------------------------
//
// Local products a_i * b_i form a degree-2(t-1) sharing of a*b; a set M of
// 2t-1 parties reshares those products down to degree t-1.

template <class S, class Rng>
std::vector<S> mul_reduce_contribution(const S& a_i, const S& b_i,
                                       const SharingConfig& cfg, Rng& rng) {
    cfg.validate();
    if (cfg.n < 2 * cfg.t - 1) throw Error(Err::DegreeReductionImpossible);
    std::vector<S> out;
    for (const auto& sh : share(a_i * b_i, cfg, rng)) out.push_back(sh.value);
    return out;
}

// received_by_contributor: sub-share from each party in M, in M's order.
template <class S>
S mul_reduce_combine(const std::vector<std::uint32_t>& M,
                     const std::vector<S>& received_by_contributor,
                     const SharingConfig& cfg) {
    if (M.size() != 2 * cfg.t - 1 || received_by_contributor.size() != M.size())
        throw Error(Err::DegreeReductionImpossible, "need 2t-1 contributors");
    auto lambda = lagrange_coefficients<S>(M, 0);  // interpolates degree <= 2(t-1)
    S acc = S::zero();
    for (size_t i = 0; i < M.size(); ++i) acc = acc + lambda[i] * received_by_contributor[i];
    return acc;
}

}  // namespace dnascreen
