#pragma once

// NPR-style threshold oblivious PRF: the client blinds M(x) with a random
// exponent, t keyservers apply their Lagrange-weighted key shares, and the
// client unblinds the product to obtain M(x)^k. No party sees x, k, or the
// output outside its role.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "dnascreen/bytes.hpp"
#include "dnascreen/shamir.hpp"

namespace dnascreen {

template <class G>
struct BlindedPoint {
    typename G::Element point;                // X = M(x)^beta
    std::vector<std::uint32_t> server_set;    // L, |L| = t
};

template <class G>
struct EvaluatedShare {
    std::uint32_t server_index = 0;
    typename G::Element point;                // Y_i = X^{k_i * lambda_i^{L,0}}
};

template <class G>
typename G::Element blind(const Bytes& x, const typename G::Scalar& beta) {
    if (beta.is_zero()) throw Error(Err::ZeroBlind);
    return G::hash_to_group(x).exp(beta);
}

// Raising an already-blinded group element; used both by the client (after
// hash_to_group) and by the database server when re-keying stored hashes.
template <class G>
typename G::Element blind_element(const typename G::Element& e,
                                  const typename G::Scalar& beta) {
    if (beta.is_zero()) throw Error(Err::ZeroBlind);
    return e.exp(beta);
}

template <class G>
EvaluatedShare<G> evaluate_share(const typename G::Element& X,
                                 const std::vector<std::uint32_t>& L,
                                 std::uint32_t i, const typename G::Scalar& k_i) {
    if (std::find(L.begin(), L.end(), i) == L.end())
        throw Error(Err::NotInEvaluationSet);
    auto lambda = lagrange_coefficients<typename G::Scalar>(L, 0);
    typename G::Scalar w;
    for (size_t idx = 0; idx < L.size(); ++idx)
        if (L[idx] == i) w = k_i * lambda[idx];
    return {i, X.exp(w)};
}

template <class G>
typename G::Element unblind_combine(const std::vector<EvaluatedShare<G>>& shares,
                                    const typename G::Scalar& beta, std::uint32_t t) {
    if (shares.size() != t) throw Error(Err::ShareCountMismatch);
    std::set<std::uint32_t> seen;
    typename G::Element acc = G::Element::identity();
    for (const auto& s : shares) {
        if (!seen.insert(s.server_index).second) throw Error(Err::DuplicateIndex);
        acc = acc.op(s.point);
    }
    return acc.exp(beta.inv());
}

// Abstract server side of one batched evaluation round. Throwing signals the
// caller to retry with a new L; unreachable servers throw QuorumUnavailable.
template <class G>
using EvalServerFn = std::function<std::vector<typename G::Element>(
    std::uint32_t server_index, const std::vector<std::uint32_t>& L,
    const std::vector<typename G::Element>& points)>;

// Full client-side protocol over a batch of inputs: fresh beta per input,
// fan out to a chosen L, combine, unblind. On a failed server, retries with
// a new L excluding every index that has failed so far.
template <class G, class Rng>
std::vector<typename G::Element> doprf_eval_batch(
    const std::vector<Bytes>& inputs, const std::vector<std::uint32_t>& available,
    const SharingConfig& cfg, const EvalServerFn<G>& call_server, Rng& rng) {
    cfg.validate();
    std::vector<typename G::Scalar> betas;
    std::vector<typename G::Element> blinded;
    betas.reserve(inputs.size());
    blinded.reserve(inputs.size());
    for (const auto& x : inputs) {
        typename G::Scalar beta;
        do { beta = G::Scalar::random(rng); } while (beta.is_zero());
        betas.push_back(beta);
        blinded.push_back(blind<G>(x, beta));
    }

    std::set<std::uint32_t> failed;
    const std::uint32_t max_attempts = cfg.n - cfg.t + 2;
    for (std::uint32_t attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<std::uint32_t> L;
        for (std::uint32_t idx : available)
            if (!failed.count(idx) && L.size() < cfg.t) L.push_back(idx);
        if (L.size() < cfg.t) throw Error(Err::QuorumUnavailable);

        std::vector<std::vector<typename G::Element>> responses;
        bool ok = true;
        for (std::uint32_t idx : L) {
            try {
                responses.push_back(call_server(idx, L, blinded));
            } catch (const Error&) {
                failed.insert(idx);
                ok = false;
                break;
            }
        }
        if (!ok) continue;

        std::vector<typename G::Element> out;
        out.reserve(inputs.size());
        for (size_t q = 0; q < inputs.size(); ++q) {
            std::vector<EvaluatedShare<G>> evals;
            for (size_t s = 0; s < L.size(); ++s) evals.push_back({L[s], responses[s][q]});
            out.push_back(unblind_combine<G>(evals, betas[q], cfg.t));
        }
        return out;
    }
    throw Error(Err::QuorumUnavailable, "retry budget exhausted");
}

}  // namespace dnascreen
