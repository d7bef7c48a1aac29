// Database server: holds the hashed table, answers membership queries with
// tag-aware verdicts, issues signed timestamped receipts, applies exemption
// tokens with mandatory notifications, and re-keys the table during rotation
// without ever learning the update key.
#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dnascreen/bytes.hpp"
#include "dnascreen/certs.hpp"
#include "dnascreen/doprf.hpp"
#include "dnascreen/errors.hpp"
#include "dnascreen/keyserver.hpp"
#include "dnascreen/table.hpp"
#include "dnascreen/transport.hpp"

namespace dnascreen {

inline constexpr const char* kHashDbName = "db";

struct MatchRecord {
    std::size_t query_index = 0;
    Bytes hash;
    EntryMeta meta;
    bool exempt = false;

    json to_json() const {
        return json{{"query_index", query_index},
                    {"hash", to_base64(hash)},
                    {"meta", meta.to_json()},
                    {"exempt", exempt}};
    }

    static MatchRecord from_json(const json& j) {
        MatchRecord m;
        m.query_index = j.at("query_index").get<std::size_t>();
        m.hash = from_base64(j.at("hash").get<std::string>());
        m.meta = EntryMeta::from_json(j.at("meta"));
        m.exempt = j.at("exempt").get<bool>();
        return m;
    }
};

enum class Decision { accepted, alert, denied };

inline const char* decision_name(Decision d) {
    switch (d) {
        case Decision::accepted: return "accepted";
        case Decision::alert: return "alert";
        case Decision::denied: return "denied";
    }
    return "?";
}

inline Decision decision_from_name(const std::string& s) {
    if (s == "accepted") return Decision::accepted;
    if (s == "alert") return Decision::alert;
    if (s == "denied") return Decision::denied;
    throw Error(Err::ParseError, "unknown decision " + s);
}

// Decision rule over classified matches:
//   denied   iff some match is a hazard (not Common, not RegulatedButPass)
//            whose region set covers the requester's region and is not exempt;
//   alert    iff not denied and some match is RegulatedButPass, exempt, or a
//            region-inapplicable hazard;
//   accepted otherwise (no matches, or Common-only matches).
// An empty region set on an entry means it applies in every region.
inline Decision verdict_rule(const std::vector<MatchRecord>& matches,
                             const std::string& region) {
    bool any_alert = false;
    for (const auto& m : matches) {
        if (m.meta.is_common()) continue;
        if (m.meta.is_regulated_pass()) {
            any_alert = true;
            continue;
        }
        auto regions = m.meta.region_tags();
        bool applies = regions.empty() || regions.count(region) > 0;
        if (!applies || m.exempt) {
            any_alert = true;
            continue;
        }
        return Decision::denied;
    }
    return any_alert ? Decision::alert : Decision::accepted;
}

struct Receipt {
    std::uint64_t window_count = 0;
    std::uint64_t db_version = 0;
    std::uint64_t timestamp = 0;
    std::string requester_fingerprint;
    std::string decision;
    Bytes signature;

    json body_json() const {
        return json{{"window_count", window_count},
                    {"db_version", db_version},
                    {"timestamp", timestamp},
                    {"requester", requester_fingerprint},
                    {"decision", decision}};
    }

    Bytes canonical_body() const { return to_bytes(body_json().dump()); }

    json to_json() const {
        json j = body_json();
        j["signature"] = to_base64(signature);
        return j;
    }

    static Receipt from_json(const json& j) {
        Receipt r;
        r.window_count = j.at("window_count").get<std::uint64_t>();
        r.db_version = j.at("db_version").get<std::uint64_t>();
        r.timestamp = j.at("timestamp").get<std::uint64_t>();
        r.requester_fingerprint = j.at("requester").get<std::string>();
        r.decision = j.at("decision").get<std::string>();
        r.signature = from_base64(j.at("signature").get<std::string>());
        return r;
    }

    bool verify(const Bytes& server_public_key) const {
        return verify_signature(server_public_key, canonical_body(), signature);
    }
};

struct Verdict {
    Decision decision = Decision::accepted;
    std::vector<MatchRecord> matches;
    std::set<std::string> exemptions_applied;
    Receipt receipt;

    json to_json() const {
        json ms = json::array();
        for (const auto& m : matches) ms.push_back(m.to_json());
        return json{{"decision", decision_name(decision)},
                    {"matches", ms},
                    {"exemptions_applied", exemptions_applied},
                    {"receipt", receipt.to_json()}};
    }

    static Verdict from_json(const json& j) {
        Verdict v;
        v.decision = decision_from_name(j.at("decision").get<std::string>());
        for (const auto& m : j.at("matches")) v.matches.push_back(MatchRecord::from_json(m));
        v.exemptions_applied =
            j.at("exemptions_applied").get<std::set<std::string>>();
        v.receipt = Receipt::from_json(j.at("receipt"));
        return v;
    }
};

template <class G>
class HashDbServer {
  public:
    using Scalar = typename G::Scalar;
    using Element = typename G::Element;

    HashDbServer(Certificate trust_root, SigningKey receipt_key,
                 Channel* net = nullptr, std::uint64_t seed = 0,
                 std::string nonce_log_path = "",
                 std::string notification_log_path = "")
        : trust_root_(std::move(trust_root)),
          receipt_key_(std::move(receipt_key)),
          net_(net),
          rng_(seed),
          nonces_(std::move(nonce_log_path)),
          notification_log_path_(std::move(notification_log_path)) {}

    void set_clock(std::function<std::uint64_t()> clock) { clock_ = std::move(clock); }
    const Bytes& receipt_public_key() const { return receipt_key_.public_key; }

    // ---- table management ---------------------------------------------------

    void install_table(HashedTable table) {
        std::unique_lock lk(mu_);
        table_ = std::make_shared<const HashedTable>(std::move(table));
    }

    void swap_version(HashedTable fresh) {
        std::unique_lock lk(mu_);
        if (table_ && fresh.version <= table_->version)
            throw Error(Err::VersionRegression,
                        "version " + std::to_string(fresh.version) +
                            " <= " + std::to_string(table_->version));
        table_ = std::make_shared<const HashedTable>(std::move(fresh));
    }

    std::shared_ptr<const HashedTable> table_snapshot() const {
        std::shared_lock lk(mu_);
        return table_;
    }

    // ---- request dispatch -----------------------------------------------------

    json handle(const std::string& path, const json& body) {
        if (path == "/screen") return handle_screen(body);
        if (path == "/version") return version_info();
        if (path == "/admin/swap") return handle_swap(body);
        if (path == "/admin/rekey") return handle_rekey(body);
        throw Error(Err::UnknownRound, "unknown path " + path);
    }

    json version_info() const {
        auto t = table_snapshot();
        return json{{"db_version", t ? t->version : 0},
                    {"key_id", t ? t->key_id : ""},
                    {"epoch", t ? t->epoch : 0},
                    {"entries", t ? t->records().size() : 0},
                    {"receipt_public_key", to_base64(receipt_key_.public_key)}};
    }

    // POST /screen: {hashes: [{kind, hash}], region, cert_chain, elt?}
    json handle_screen(const json& req) {
        auto chain = chain_from_json(req.at("cert_chain"));
        const std::string region = req.at("region").get<std::string>();
        std::uint64_t t_now = now();
        validate_chain(chain, trust_root_, t_now);
        const std::string requester = chain.front().fingerprint();

        std::vector<Bytes> hashes;
        for (const auto& h : req.at("hashes")) {
            Bytes b = from_base64(h.at("hash").get<std::string>());
            if (b.size() != G::kEncodedBytes)
                throw Error(Err::MalformedHash, "bad hash length");
            hashes.push_back(std::move(b));
        }

        std::optional<ExemptionListToken> elt;
        if (req.contains("elt") && !req.at("elt").is_null())
            elt = ExemptionListToken::from_json(req.at("elt"));

        Verdict v = screen(hashes, requester, region, chain, elt);
        return v.to_json();
    }

    Verdict screen(const std::vector<Bytes>& hashes, const std::string& requester,
                   const std::string& region,
                   const std::vector<Certificate>& presenter_chain,
                   const std::optional<ExemptionListToken>& elt) {
        auto table = table_snapshot();
        if (!table) throw Error(Err::CorruptTable, "no table installed");

        std::optional<EltGrant> grant;
        if (elt) grant = verify_elt(*elt, presenter_chain, trust_root_, nonces_, now());

        Verdict v;
        for (std::size_t i = 0; i < hashes.size(); ++i) {
            auto meta = table->lookup(hashes[i]);
            if (!meta) continue;
            MatchRecord m;
            m.query_index = i;
            m.hash = hashes[i];
            m.meta = *meta;
            if (grant) {
                bool by_accession = grant->exemptions.count(meta->accession) > 0;
                bool by_digest =
                    grant->window_digests.count(to_hex(sha256(hashes[i]))) > 0;
                if (by_accession || by_digest) {
                    m.exempt = true;
                    v.exemptions_applied.insert(meta->accession);
                }
            }
            v.matches.push_back(std::move(m));
        }

        v.decision = verdict_rule(v.matches, region);
        v.receipt = issue_receipt(hashes.size(), table->version,
                                  decision_name(v.decision), requester);
        {
            std::unique_lock lk(mu_);
            match_counters_[requester] += v.matches.size();
        }
        if (grant && !v.exemptions_applied.empty())
            record_notification(requester, *grant, v);
        return v;
    }

    Receipt issue_receipt(std::uint64_t count, std::uint64_t version,
                          const std::string& decision,
                          const std::string& requester) {
        Receipt r;
        r.window_count = count;
        r.db_version = version;
        r.timestamp = now();
        r.requester_fingerprint = requester;
        r.decision = decision;
        r.signature = receipt_key_.sign(r.canonical_body());
        return r;
    }

    std::uint64_t match_count(const std::string& requester) const {
        std::unique_lock lk(mu_);
        auto it = match_counters_.find(requester);
        return it == match_counters_.end() ? 0 : it->second;
    }

    const std::vector<json>& notifications() const { return notifications_; }

    // ---- version swap over the wire --------------------------------------------

    json handle_swap(const json& req) {
        HashedTable fresh =
            HashedTable::deserialize(from_base64(req.at("table").get<std::string>()));
        swap_version(std::move(fresh));
        return version_info();
    }

    // ---- rotation: re-key every stored hash against the update-scalar shares ----
    //
    // For each stored hash h the server picks a fresh blinding scalar rho,
    // sends h^rho through the threshold evaluation of the update-scalar
    // sharing (playing the client role on an already-hashed input), and
    // unblinds the result to h^delta. Key servers only ever see h^rho.

    json handle_rekey(const json& req) {
        const std::string new_key_id = req.at("new_key_id").get<std::string>();
        const std::uint64_t delta_epoch = req.at("delta_epoch").get<std::uint64_t>();
        auto available = req.at("available").get<std::vector<std::uint32_t>>();
        SharingConfig cfg{req.at("n").get<std::uint32_t>(),
                          req.at("t").get<std::uint32_t>()};
        rekey_table(new_key_id, delta_epoch, available, cfg);
        return version_info();
    }

    void rekey_table(const std::string& new_key_id, std::uint64_t delta_epoch,
                     const std::vector<std::uint32_t>& available,
                     const SharingConfig& cfg) {
        if (!net_) throw Error(Err::BadConfig, "no channel configured");
        auto table = table_snapshot();
        if (!table) throw Error(Err::CorruptTable, "no table installed");
        const std::string delta_key = "delta:" + new_key_id;

        HashedTable fresh;
        fresh.version = table->version + 1;
        fresh.key_id = new_key_id;
        fresh.epoch = delta_epoch + 1;

        const std::size_t batch = 1024;
        const auto& recs = table->records();
        for (std::size_t start = 0; start < recs.size(); start += batch) {
            std::size_t end = std::min(recs.size(), start + batch);
            std::vector<Scalar> rho(end - start);
            std::vector<Element> blinded(end - start);
            for (std::size_t i = start; i < end; ++i) {
                Scalar r = Scalar::random(rng_);
                while (r.is_zero()) r = Scalar::random(rng_);
                rho[i - start] = r;
                blinded[i - start] =
                    blind_element<G>(Element::decode(recs[i].hash), r);
            }
            auto evaluated = threshold_eval(blinded, delta_key, delta_epoch,
                                            available, cfg);
            for (std::size_t i = start; i < end; ++i) {
                Element unblinded =
                    evaluated[i - start].exp(rho[i - start].inv());
                fresh.insert(unblinded.encode(), recs[i].meta);
            }
        }
        fresh.finalize();
        swap_version(std::move(fresh));
    }

    // ---- notifications -------------------------------------------------------

    void record_notification(const std::string& requester, const EltGrant& grant,
                             const Verdict& v) {
        json n{{"time", now()},
               {"requester", requester},
               {"exemptions_applied", v.exemptions_applied},
               {"decision", decision_name(v.decision)},
               {"notify",
                {{"pi", grant.contacts.principal_investigator},
                 {"officer", grant.contacts.biosafety_officer},
                 {"legal", grant.contacts.legal}}}};
        std::unique_lock lk(mu_);
        notifications_.push_back(n);
        if (!notification_log_path_.empty()) {
            std::ofstream out(notification_log_path_, std::ios::app);
            out << n.dump() << '\n';
        }
    }

  private:
    std::uint64_t now() const { return clock_ ? clock_() : 0; }

    // Threshold evaluation of already-blinded points against the servers
    // holding shares of `key_id` at `epoch`.
    std::vector<Element> threshold_eval(const std::vector<Element>& points,
                                        const std::string& key_id,
                                        std::uint64_t epoch,
                                        const std::vector<std::uint32_t>& available,
                                        const SharingConfig& cfg) {
        std::set<std::uint32_t> failed;
        const std::uint32_t max_attempts = cfg.n - cfg.t + 2;
        for (std::uint32_t attempt = 0; attempt < max_attempts; ++attempt) {
            std::vector<std::uint32_t> L;
            for (auto idx : available)
                if (!failed.count(idx) && L.size() < cfg.t) L.push_back(idx);
            if (L.size() < cfg.t) throw Error(Err::QuorumUnavailable);

            json points_b64 = json::array();
            for (const auto& p : points) points_b64.push_back(to_base64(p.encode()));
            std::vector<Element> acc(points.size(), Element::identity());
            bool ok = true;
            for (auto idx : L) {
                json req{{"protocol", kProtocolVersion},
                         {"client", kHashDbName},
                         {"key_id", key_id},
                         {"epoch", epoch},
                         {"L", L},
                         {"points", points_b64}};
                try {
                    json resp = net_->call(kHashDbName, keyserver_name(idx),
                                           "/eval", req);
                    const auto& outs = resp.at("points");
                    for (std::size_t i = 0; i < points.size(); ++i)
                        acc[i] = acc[i].op(Element::decode(
                            from_base64(outs[i].get<std::string>())));
                } catch (const Error&) {
                    failed.insert(idx);
                    ok = false;
                    break;
                }
            }
            if (ok) return acc;
        }
        throw Error(Err::QuorumUnavailable);
    }

    Certificate trust_root_;
    SigningKey receipt_key_;
    Channel* net_;
    std::mt19937_64 rng_;
    NonceStore nonces_;
    std::string notification_log_path_;
    std::function<std::uint64_t()> clock_;

    mutable std::shared_mutex mu_;
    std::shared_ptr<const HashedTable> table_;
    std::map<std::string, std::uint64_t> match_counters_;
    std::vector<json> notifications_;
};

}  // namespace dnascreen
