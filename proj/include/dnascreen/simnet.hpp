// In-process integration harness: wires n key servers, one database server,
// and clients over the in-memory transport, runs scripted scenarios with
// fault injection, and records a full message transcript for privacy and
// correctness assertions. Time is a virtual scenario clock, so transcripts
// are deterministic under a fixed seed.
#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dnascreen/certs.hpp"
#include "dnascreen/client.hpp"
#include "dnascreen/hashdb.hpp"
#include "dnascreen/keyserver.hpp"
#include "dnascreen/shamir.hpp"
#include "dnascreen/transport.hpp"

namespace dnascreen {

struct ScenarioEvent {
    std::string op;  // kill|revive|reshare|rotate|screen|capture_share|advance_clock|dkg|swap_table
    json args;
};

struct Scenario {
    std::uint64_t seed = 1;
    std::uint32_t n = 5;
    std::uint32_t t = 3;
    std::string group = "ristretto";  // ristretto | test10007
    std::vector<ScenarioEvent> events;

    static Scenario from_json(const json& j) {
        Scenario s;
        s.seed = j.value("seed", std::uint64_t{1});
        s.n = j.at("n").get<std::uint32_t>();
        s.t = j.at("t").get<std::uint32_t>();
        s.group = j.value("group", std::string("ristretto"));
        if (!j.contains("events") || !j.at("events").is_array())
            throw Error(Err::ScenarioInvalid, "missing events array");
        for (const auto& e : j.at("events")) {
            ScenarioEvent ev;
            ev.op = e.at("op").get<std::string>();
            ev.args = e;
            s.events.push_back(std::move(ev));
        }
        if (s.t == 0 || s.t > s.n)
            throw Error(Err::ScenarioInvalid, "need 0 < t <= n");
        return s;
    }
};

// One captured share (the adversary's haul in share-capture scenarios).
template <class S>
struct CapturedShare {
    KeyShare<S> share;
    std::uint64_t capture_epoch = 0;
};

template <class G>
class Simnet {
  public:
    using Scalar = typename G::Scalar;
    using Element = typename G::Element;

    explicit Simnet(const Scenario& sc) : sc_(sc), rng_(sc.seed) {
        net_.set_clock([this] { return clock_; });

        // PKI: root -> authority -> officer -> PI -> researcher client.
        root_key_ = SigningKey::generate();
        CertAuthority root_ca = make_root("sim-root", root_key_, 0, kFarFuture);
        root_ = root_ca.cert;
        auto auth_key = SigningKey::generate();
        auto auth = issue_certificate(root_ca, "sim-authority",
                                      Role::national_authority,
                                      auth_key.public_key, 0, kFarFuture, 0);
        CertAuthority auth_ca{auth, auth_key};
        officer_key_ = SigningKey::generate();
        officer_ = issue_certificate(auth_ca, "sim-officer",
                                     Role::biosafety_officer,
                                     officer_key_.public_key, 0, kFarFuture, 0);
        CertAuthority officer_ca{officer_, officer_key_};
        pi_key_ = SigningKey::generate();
        pi_ = issue_certificate(officer_ca, "sim-pi",
                                Role::principal_investigator,
                                pi_key_.public_key, 0, kFarFuture, 0);
        CertAuthority pi_ca{pi_, pi_key_};
        client_key_ = SigningKey::generate();
        client_cert_ = issue_certificate(pi_ca, "sim-researcher", Role::researcher,
                                         client_key_.public_key, 0, kFarFuture, 0);
        client_chain_ = {client_cert_, pi_, officer_, auth, root_};
        officer_chain_ = {officer_, auth, root_};

        // Servers.
        SharingConfig cfg{sc_.n, sc_.t};
        for (std::uint32_t i = 1; i <= sc_.n; ++i) {
            auto ks = std::make_unique<Keyserver<G>>(i, cfg, &net_,
                                                     sc_.seed * 1000 + i);
            ks->set_clock([this] { return clock_; });
            auto* raw = ks.get();
            net_.register_service(raw->name(),
                                  [raw](const std::string& path, const json& b) {
                                      return raw->handle(path, b);
                                  });
            keyservers_.push_back(std::move(ks));
        }
        db_ = std::make_unique<HashDbServer<G>>(root_, SigningKey::generate(),
                                                &net_, sc_.seed * 7 + 5);
        db_->set_clock([this] { return std::uint64_t(clock_); });
        net_.register_service(kHashDbName,
                              [this](const std::string& path, const json& b) {
                                  return db_->handle(path, b);
                              });
    }

    // ---- direct access for test fixtures -------------------------------------

    MemoryChannel& net() { return net_; }
    HashDbServer<G>& db() { return *db_; }
    Keyserver<G>& keyserver(std::uint32_t i) { return *keyservers_.at(i - 1); }
    std::uint32_t n() const { return sc_.n; }
    std::uint32_t t() const { return sc_.t; }
    const Certificate& root() const { return root_; }
    const std::vector<Certificate>& client_chain() const { return client_chain_; }
    const std::vector<Certificate>& officer_chain() const { return officer_chain_; }
    const CertAuthority officer_authority() const { return {officer_, officer_key_}; }
    const CertAuthority pi_authority() const { return {pi_, pi_key_}; }
    double clock() const { return clock_; }
    void advance_clock(double seconds) { clock_ += seconds; }
    const std::vector<CapturedShare<Scalar>>& captured() const { return captured_; }
    const std::vector<json>& verdict_log() const { return verdicts_; }

    std::vector<std::uint32_t> alive_indices() const {
        std::vector<std::uint32_t> out;
        for (std::uint32_t i = 1; i <= sc_.n; ++i)
            if (!net_.is_dead(keyserver_name(i))) out.push_back(i);
        return out;
    }

    // Reconstructs the current key from live shares (harness-only; used to
    // validate protocol claims, never part of the deployed flow).
    Scalar reconstruct_key() {
        std::vector<KeyShare<Scalar>> shares;
        for (std::uint32_t i = 1; i <= sc_.n && shares.size() < sc_.t; ++i) {
            auto s = keyservers_[i - 1]->current_share();
            if (s) shares.push_back(*s);
        }
        return reconstruct(shares, SharingConfig{sc_.n, sc_.t});
    }

    ClientConfig default_client_config() const {
        ClientConfig cfg;
        cfg.name = "client";
        for (std::uint32_t i = 1; i <= sc_.n; ++i) cfg.keyservers.push_back(i);
        cfg.n = sc_.n;
        cfg.t = sc_.t;
        cfg.region = "US";
        cfg.cert_chain = client_chain_;
        cfg.seed = sc_.seed + 17;
        return cfg;
    }

    // ---- scripted event execution ---------------------------------------------

    void run_dkg(const std::string& key_id) {
        for (std::uint32_t i = 1; i <= sc_.n; ++i)
            net_.call("admin", keyserver_name(i), "/admin/round",
                      json{{"type", "dkg_start"}, {"key_id", key_id}, {"epoch", 0}});
    }

    void run_reshare(std::vector<std::uint32_t> quorum) {
        if (quorum.empty()) {
            quorum = alive_indices();
            if (quorum.size() > sc_.t) quorum.resize(sc_.t);
        }
        if (quorum.size() != sc_.t)
            throw Error(Err::ScenarioInvalid, "reshare quorum must have t members");
        for (auto i : quorum)
            net_.call("admin", keyserver_name(i), "/admin/round",
                      json{{"type", "reshare_start"}, {"quorum", quorum}});
    }

    void run_rotation(const std::string& new_key_id) {
        std::uint64_t old_epoch = epoch_of_any();
        for (std::uint32_t i = 1; i <= sc_.n; ++i)
            net_.call("admin", keyserver_name(i), "/admin/round",
                      json{{"type", "rotate_start"}, {"new_key_id", new_key_id}});
        // Re-key the table against the update-scalar shares, then commit.
        if (db_->table_snapshot())
            db_->rekey_table(new_key_id, old_epoch, alive_indices(),
                             SharingConfig{sc_.n, sc_.t});
        for (std::uint32_t i = 1; i <= sc_.n; ++i)
            net_.call("admin", keyserver_name(i), "/admin/round",
                      json{{"type", "rotate_commit"}, {"new_key_id", new_key_id}});
    }

    json run_screen(const std::string& fasta_text,
                    std::optional<ExemptionListToken> elt = std::nullopt) {
        ClientConfig cfg = default_client_config();
        cfg.elt = std::move(elt);
        auto report = screen_text<G>(fasta_text, cfg, net_);
        json j = report.to_json();
        verdicts_.push_back(j);
        return j;
    }

    void run_event(const ScenarioEvent& ev) {
        if (ev.op == "kill") {
            net_.set_dead(keyserver_name(ev.args.at("server").get<std::uint32_t>()),
                          true);
        } else if (ev.op == "revive") {
            net_.set_dead(keyserver_name(ev.args.at("server").get<std::uint32_t>()),
                          false);
        } else if (ev.op == "dkg") {
            run_dkg(ev.args.value("key_id", std::string("k1")));
        } else if (ev.op == "reshare") {
            run_reshare(ev.args.value("quorum", std::vector<std::uint32_t>{}));
        } else if (ev.op == "rotate") {
            run_rotation(ev.args.at("new_key_id").get<std::string>());
        } else if (ev.op == "screen") {
            std::string text;
            if (ev.args.contains("fasta_text")) {
                text = ev.args.at("fasta_text").get<std::string>();
            } else {
                std::ifstream in(ev.args.at("fasta").get<std::string>());
                std::ostringstream buf;
                buf << in.rdbuf();
                text = buf.str();
            }
            try {
                run_screen(text);
            } catch (const Error& e) {
                verdicts_.push_back(json{{"error", err_name(e.code())}});
            }
        } else if (ev.op == "capture_share") {
            auto idx = ev.args.at("server").get<std::uint32_t>();
            auto s = keyservers_.at(idx - 1)->current_share();
            if (!s) throw Error(Err::ScenarioInvalid, "no share to capture");
            captured_.push_back({*s, s->epoch});
        } else if (ev.op == "advance_clock") {
            clock_ += ev.args.at("seconds").get<double>();
        } else {
            throw Error(Err::ScenarioInvalid, "unknown op " + ev.op);
        }
    }

    // Runs the whole scenario; returns the recorded transcript.
    const Transcript& run() {
        for (const auto& ev : sc_.events) run_event(ev);
        return net_.transcript();
    }

    std::uint64_t epoch_of_any() const {
        for (std::uint32_t i = 1; i <= sc_.n; ++i) {
            auto s = keyservers_[i - 1]->current_share();
            if (s) return s->epoch;
        }
        return 0;
    }

  private:
    static constexpr std::uint64_t kFarFuture = 1ull << 40;

    Scenario sc_;
    std::mt19937_64 rng_;
    MemoryChannel net_;
    double clock_ = 0;
    std::vector<std::unique_ptr<Keyserver<G>>> keyservers_;
    std::unique_ptr<HashDbServer<G>> db_;
    std::vector<CapturedShare<Scalar>> captured_;
    std::vector<json> verdicts_;

    SigningKey root_key_, officer_key_, pi_key_, client_key_;
    Certificate root_, officer_, pi_, client_cert_;
    std::vector<Certificate> client_chain_, officer_chain_;
};

// Evaluates a predicate over every recorded payload; true iff it holds for all.
inline bool transcript_assert(const Transcript& t,
                              const std::function<bool(const TranscriptEntry&)>& pred) {
    for (const auto& e : t)
        if (!pred(e)) return false;
    return true;
}

// JSON-lines rendering of a transcript (one message per line).
inline std::string transcript_to_jsonl(const Transcript& t) {
    std::ostringstream out;
    for (const auto& e : t) out << e.to_json().dump() << '\n';
    return out.str();
}

}  // namespace dnascreen
