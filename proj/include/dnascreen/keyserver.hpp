// Key server: holds one share of the hashing key, answers batched
// blinded-point evaluations under per-client rate limits, and participates in
// distributed key generation, proactive resharing, and key-rotation rounds.
//
// Round orchestration is peer-to-peer: an administrative "start" message makes
// each participant generate its contribution and push per-recipient sub-shares
// directly to its peers over the channel. No coordinator ever holds enough
// sub-shares to reconstruct a secret, and a server's own share value is never
// placed on the wire.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dnascreen/bytes.hpp"
#include "dnascreen/doprf.hpp"
#include "dnascreen/errors.hpp"
#include "dnascreen/ratelimit.hpp"
#include "dnascreen/shamir.hpp"
#include "dnascreen/transport.hpp"

namespace dnascreen {

inline constexpr int kProtocolVersion = 1;

inline std::string keyserver_name(std::uint32_t index) {
    return "ks" + std::to_string(index);
}

template <class G>
class Keyserver {
  public:
    using Scalar = typename G::Scalar;
    using Element = typename G::Element;
    using Share = KeyShare<Scalar>;

    Keyserver(std::uint32_t index, SharingConfig cfg, Channel* net,
              std::uint64_t seed,
              double rate_capacity = kDefaultRateCapacity,
              double rate_refill = kDefaultRateRefill)
        : index_(index),
          cfg_(cfg),
          net_(net),
          rng_(seed),
          limiter_(rate_capacity, rate_refill) {
        cfg.validate();
        if (index < 1 || index > cfg.n)
            throw Error(Err::NotInEvaluationSet, "server index out of range");
    }

    std::uint32_t index() const { return index_; }
    std::string name() const { return keyserver_name(index_); }

    void set_clock(std::function<double()> clock) { clock_ = std::move(clock); }

    // Installs a share directly (harness/bootstrap use).
    void install_share(const Share& s) {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        share_ = s;
    }

    // Harness-only accessor for reconstruction checks in tests.
    std::optional<Share> current_share() const {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        return share_;
    }

    // ---- request dispatch ---------------------------------------------------

    json handle(const std::string& path, const json& body) {
        if (path == "/eval") return handle_eval(body);
        if (path == "/admin/round") return handle_round(body);
        if (path == "/status") return status();
        throw Error(Err::UnknownRound, "unknown path " + path);
    }

    json status() const {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        return json{{"server_index", index_},
                    {"epoch", share_ ? share_->epoch : 0},
                    {"key_id", share_ ? share_->key_id : ""},
                    {"rate_capacity", limiter_.capacity()},
                    {"rate_refill_per_sec", limiter_.refill_per_sec()},
                    {"alive", true}};
    }

    // POST /eval: {protocol, client, key_id, epoch, L, points[]}
    json handle_eval(const json& req) {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        const std::string client = req.value("client", std::string("anonymous"));
        const auto& points_b64 = req.at("points");
        if (auto hint = limiter_.check(client, double(points_b64.size()), now()))
            throw Error(Err::RateLimited,
                        "rate budget exceeded; retry after " +
                            std::to_string(*hint < 0 ? 0.0 : *hint) + "s");

        const std::string key_id = req.at("key_id").get<std::string>();
        const std::uint64_t epoch = req.at("epoch").get<std::uint64_t>();
        const Share* sh = find_share(key_id);
        if (!sh || sh->epoch != epoch)
            throw Error(Err::EpochMismatch,
                        "no share for key_id=" + key_id +
                            " epoch=" + std::to_string(epoch));

        auto L = req.at("L").get<std::vector<std::uint32_t>>();
        if (std::find(L.begin(), L.end(), index_) == L.end())
            throw Error(Err::NotInEvaluationSet,
                        "server " + std::to_string(index_) +
                            " not in evaluation set");

        std::vector<Element> pts;
        pts.reserve(points_b64.size());
        for (const auto& b : points_b64) {
            Bytes enc = from_base64(b.get<std::string>());
            if (enc.size() != G::kEncodedBytes)
                throw Error(Err::MalformedPoint, "bad point length");
            try {
                pts.push_back(Element::decode(enc));
            } catch (const Error&) {
                throw Error(Err::MalformedPoint, "point failed to decode");
            }
        }

        json out_points = json::array();
        for (const auto& p : pts) {
            auto y = evaluate_share<G>(p, L, index_, sh->value);
            out_points.push_back(to_base64(y.point.encode()));
        }
        return json{{"server_index", index_}, {"points", out_points}};
    }

    // POST /admin/round
    json handle_round(const json& msg) {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        const std::string type = msg.at("type").get<std::string>();
        if (msg.contains("to_index") &&
            msg.at("to_index").get<std::uint32_t>() != index_)
            throw Error(Err::UnknownRound, "message addressed to another index");

        if (type == "dkg_start") return round_dkg_start(msg);
        if (type == "dkg_subshare") return round_dkg_subshare(msg);
        if (type == "reshare_start") return round_reshare_start(msg);
        if (type == "reshare_subshare") return round_reshare_subshare(msg);
        if (type == "rotate_start") return round_rotate_start(msg);
        if (type == "rotate_mul_subshare") return round_rotate_mul(msg);
        if (type == "rotate_commit") return round_rotate_commit(msg);
        throw Error(Err::UnknownRound, "unknown round type " + type);
    }

  private:
    double now() const { return clock_ ? clock_() : 0.0; }

    const Share* find_share(const std::string& key_id) const {
        if (share_ && share_->key_id == key_id) return &*share_;
        auto it = aux_shares_.find(key_id);
        if (it != aux_shares_.end()) return &it->second;
        return nullptr;
    }

    void push_to_peer(std::uint32_t peer, const json& msg) {
        net_->call(name(), keyserver_name(peer), "/admin/round", msg);
    }

    // ---- initial distributed key generation ---------------------------------
    // All n servers contribute additively; the resulting key is the sum of the
    // contributions and is never materialized anywhere.

    json round_dkg_start(const json& msg) {
        const std::string key_id = msg.at("key_id").get<std::string>();
        const std::uint64_t epoch = msg.value("epoch", std::uint64_t{0});
        auto contrib = dkg_contribution<Scalar>(cfg_, rng_);
        auto& st = dkg_[key_id];
        st.epoch = epoch;
        st.received[index_] = contrib.subshares_by_index.at(index_ - 1);
        for (std::uint32_t j = 1; j <= cfg_.n; ++j) {
            if (j == index_) continue;
            push_to_peer(j, json{{"type", "dkg_subshare"},
                                 {"to_index", j},
                                 {"key_id", key_id},
                                 {"epoch", epoch},
                                 {"from_index", index_},
                                 {"value", scalar_b64(
                                      contrib.subshares_by_index.at(j - 1))}});
        }
        maybe_finish_dkg(key_id);
        return json{{"ok", true}};
    }

    json round_dkg_subshare(const json& msg) {
        const std::string key_id = msg.at("key_id").get<std::string>();
        auto& st = dkg_[key_id];
        st.epoch = msg.value("epoch", st.epoch);
        st.received[msg.at("from_index").get<std::uint32_t>()] =
            scalar_from_b64(msg.at("value").get<std::string>());
        maybe_finish_dkg(key_id);
        return json{{"ok", true}};
    }

    void maybe_finish_dkg(const std::string& key_id) {
        auto it = dkg_.find(key_id);
        if (it == dkg_.end() || it->second.received.size() < cfg_.n) return;
        std::vector<Scalar> recv;
        for (std::uint32_t j = 1; j <= cfg_.n; ++j)
            recv.push_back(it->second.received.at(j));
        Share s = dkg_combine<Scalar>(index_, recv, cfg_, key_id,
                                      it->second.epoch);
        dkg_.erase(it);
        if (key_id.rfind("delta:", 0) == 0) {
            aux_shares_[key_id] = s;
            start_rotate_mul(key_id);
        } else {
            share_ = s;
        }
    }

    // ---- proactive resharing ------------------------------------------------
    // A quorum of t servers re-deals its Lagrange-weighted share; every server
    // (quorum member or not) sums the t contributions into a fresh share at
    // epoch+1 and erases its old share.

    json round_reshare_start(const json& msg) {
        if (!share_) throw Error(Err::EpochMismatch, "no share to reshare");
        auto quorum = msg.at("quorum").get<std::vector<std::uint32_t>>();
        if (std::find(quorum.begin(), quorum.end(), index_) == quorum.end())
            throw Error(Err::NotInEvaluationSet, "not a reshare quorum member");
        Share old = *share_;
        auto subshares = reshare_contribution(old, quorum, cfg_, rng_);
        const std::string rk = reshare_round_key(old, quorum);
        auto& st = reshare_[rk];
        st.quorum = quorum;
        st.epoch = old.epoch;
        st.key_id = old.key_id;
        st.received[index_] = subshares.at(index_ - 1);
        for (std::uint32_t j = 1; j <= cfg_.n; ++j) {
            if (j == index_) continue;
            json m{{"type", "reshare_subshare"},
                   {"to_index", j},
                   {"key_id", old.key_id},
                   {"old_epoch", old.epoch},
                   {"quorum", quorum},
                   {"from_index", index_},
                   {"value", scalar_b64(subshares.at(j - 1))}};
            try {
                push_to_peer(j, m);
            } catch (const Error&) {
                // Dead peers miss this round; they rejoin at a later reshare.
            }
        }
        maybe_finish_reshare(rk);
        return json{{"ok", true}};
    }

    json round_reshare_subshare(const json& msg) {
        Share meta;
        meta.key_id = msg.at("key_id").get<std::string>();
        meta.epoch = msg.at("old_epoch").get<std::uint64_t>();
        auto quorum = msg.at("quorum").get<std::vector<std::uint32_t>>();
        const std::string rk = reshare_round_key(meta, quorum);
        auto& st = reshare_[rk];
        st.quorum = quorum;
        st.epoch = meta.epoch;
        st.key_id = meta.key_id;
        st.received[msg.at("from_index").get<std::uint32_t>()] =
            scalar_from_b64(msg.at("value").get<std::string>());
        maybe_finish_reshare(rk);
        return json{{"ok", true}};
    }

    static std::string reshare_round_key(const Share& s,
                                         const std::vector<std::uint32_t>& q) {
        std::string k = s.key_id + "@" + std::to_string(s.epoch);
        for (auto i : q) k += ":" + std::to_string(i);
        return k;
    }

    void maybe_finish_reshare(const std::string& rk) {
        auto it = reshare_.find(rk);
        if (it == reshare_.end()) return;
        auto& st = it->second;
        if (st.received.size() < st.quorum.size()) return;
        std::vector<Scalar> recv;
        for (auto q : st.quorum) recv.push_back(st.received.at(q));
        Share meta;
        meta.key_id = st.key_id;
        meta.epoch = st.epoch;
        Share fresh = reshare_combine<Scalar>(index_, recv, meta, cfg_);
        reshare_.erase(it);
        // The old share is erased unconditionally: the advertised epoch only
        // moves forward.
        share_ = fresh;
    }

    // ---- key rotation ---------------------------------------------------------
    // Phase 1: distributed generation of the update scalar under key id
    // "delta:<new_key_id>". Phase 2: each server re-shares the local product
    // share(k)·share(update); 2t−1 contributions determine a degree-reduced
    // sharing of the rotated key, held pending until commit. Phase 3 (after
    // the table has been re-keyed against the update-scalar shares): commit
    // swaps in the rotated share at epoch+1 and erases the old share and the
    // update-scalar share.

    json round_rotate_start(const json& msg) {
        if (!share_) throw Error(Err::EpochMismatch, "no share to rotate");
        const std::string new_key_id = msg.at("new_key_id").get<std::string>();
        pending_new_key_ = new_key_id;
        return round_dkg_start(json{{"type", "dkg_start"},
                                    {"key_id", "delta:" + new_key_id},
                                    {"epoch", share_->epoch}});
    }

    void start_rotate_mul(const std::string& delta_key_id) {
        const Share& delta = aux_shares_.at(delta_key_id);
        auto subshares =
            mul_reduce_contribution(share_->value, delta.value, cfg_, rng_);
        auto& st = mul_[delta_key_id];
        st.received[index_] = subshares.at(index_ - 1);
        for (std::uint32_t j = 1; j <= cfg_.n; ++j) {
            if (j == index_) continue;
            push_to_peer(j, json{{"type", "rotate_mul_subshare"},
                                 {"to_index", j},
                                 {"delta_key_id", delta_key_id},
                                 {"from_index", index_},
                                 {"value", scalar_b64(subshares.at(j - 1))}});
        }
        maybe_finish_mul(delta_key_id);
    }

    json round_rotate_mul(const json& msg) {
        const std::string delta_key_id =
            msg.at("delta_key_id").get<std::string>();
        auto& st = mul_[delta_key_id];
        st.received[msg.at("from_index").get<std::uint32_t>()] =
            scalar_from_b64(msg.at("value").get<std::string>());
        maybe_finish_mul(delta_key_id);
        return json{{"ok", true}};
    }

    void maybe_finish_mul(const std::string& delta_key_id) {
        auto it = mul_.find(delta_key_id);
        if (it == mul_.end() || it->second.received.size() < cfg_.n) return;
        const std::size_t need = 2 * std::size_t(cfg_.t) - 1;
        std::vector<std::uint32_t> M;
        std::vector<Scalar> recv;
        for (const auto& [idx, v] : it->second.received) {
            if (M.size() == need) break;
            M.push_back(idx);
            recv.push_back(v);
        }
        Scalar value = mul_reduce_combine<Scalar>(M, recv, cfg_);
        Share pending;
        pending.server_index = index_;
        pending.value = value;
        pending.key_id = pending_new_key_;
        pending.epoch = share_->epoch + 1;
        pending_share_ = pending;
        mul_.erase(it);
    }

    json round_rotate_commit(const json& msg) {
        const std::string new_key_id = msg.at("new_key_id").get<std::string>();
        if (!pending_share_ || pending_share_->key_id != new_key_id)
            throw Error(Err::UnknownRound,
                        "no pending rotation for " + new_key_id);
        share_ = *pending_share_;
        pending_share_.reset();
        aux_shares_.erase("delta:" + new_key_id);
        pending_new_key_.clear();
        return json{{"ok", true}, {"epoch", share_->epoch}};
    }

    // ---- serialization helpers ------------------------------------------------

    static std::string scalar_b64(const Scalar& s) { return to_base64(s.encode()); }
    static Scalar scalar_from_b64(const std::string& b) {
        return Scalar::decode(from_base64(b));
    }

    struct RoundBuf {
        std::uint64_t epoch = 0;
        std::string key_id;
        std::vector<std::uint32_t> quorum;
        std::map<std::uint32_t, Scalar> received;
    };

    std::uint32_t index_;
    SharingConfig cfg_;
    Channel* net_;
    std::mt19937_64 rng_;
    RateLimiter limiter_;
    std::function<double()> clock_;

    mutable std::recursive_mutex mu_;
    std::optional<Share> share_;
    std::map<std::string, Share> aux_shares_;  // update-scalar shares
    std::optional<Share> pending_share_;
    std::string pending_new_key_;
    std::map<std::string, RoundBuf> dkg_;
    std::map<std::string, RoundBuf> reshare_;
    std::map<std::string, RoundBuf> mul_;
};

}  // namespace dnascreen
