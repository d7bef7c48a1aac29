#pragma once

// Certificate chains and exemption list tokens: Ed25519 over canonical JSON.
// Chain order mirrors the issuance hierarchy (root -> national authority ->
// biosafety officer -> PI -> researcher; root -> manufacturer -> machine;
// root -> provider).

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <sodium.h>

#include "dnascreen/bytes.hpp"
#include "dnascreen/errors.hpp"

namespace dnascreen {

using json = nlohmann::json;

struct SigningKey {
    Bytes public_key;  // crypto_sign_PUBLICKEYBYTES
    Bytes secret_key;  // crypto_sign_SECRETKEYBYTES

    static SigningKey generate() {
        init_crypto();
        SigningKey k;
        k.public_key.resize(crypto_sign_PUBLICKEYBYTES);
        k.secret_key.resize(crypto_sign_SECRETKEYBYTES);
        crypto_sign_keypair(k.public_key.data(), k.secret_key.data());
        return k;
    }

    // Deterministic keypair for seeded test scenarios.
    static SigningKey from_seed(const Bytes& seed32) {
        init_crypto();
        if (seed32.size() != crypto_sign_SEEDBYTES) throw Error(Err::BadConfig, "seed size");
        SigningKey k;
        k.public_key.resize(crypto_sign_PUBLICKEYBYTES);
        k.secret_key.resize(crypto_sign_SECRETKEYBYTES);
        crypto_sign_seed_keypair(k.public_key.data(), k.secret_key.data(), seed32.data());
        return k;
    }

    Bytes sign(const Bytes& message) const {
        init_crypto();
        Bytes sig(crypto_sign_BYTES);
        crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                             secret_key.data());
        return sig;
    }
};

inline bool verify_signature(const Bytes& public_key, const Bytes& message, const Bytes& sig) {
    init_crypto();
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES || sig.size() != crypto_sign_BYTES)
        return false;
    return crypto_sign_verify_detached(sig.data(), message.data(), message.size(),
                                       public_key.data()) == 0;
}

enum class Role {
    root,
    national_authority,
    biosafety_officer,
    principal_investigator,
    researcher,
    manufacturer,
    provider,
    machine,
};

inline const char* role_name(Role r) {
    switch (r) {
        case Role::root: return "root";
        case Role::national_authority: return "national-authority";
        case Role::biosafety_officer: return "biosafety-officer";
        case Role::principal_investigator: return "principal-investigator";
        case Role::researcher: return "researcher";
        case Role::manufacturer: return "manufacturer";
        case Role::provider: return "provider";
        case Role::machine: return "machine";
    }
    return "?";
}

inline Role role_from_name(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Role::machine); ++i) {
        auto r = static_cast<Role>(i);
        if (s == role_name(r)) return r;
    }
    throw Error(Err::ParseError, "unknown role " + s);
}

inline bool role_may_issue(Role issuer, Role subject) {
    switch (issuer) {
        case Role::root:
            return subject == Role::national_authority || subject == Role::manufacturer ||
                   subject == Role::provider;
        case Role::national_authority: return subject == Role::biosafety_officer;
        case Role::biosafety_officer: return subject == Role::principal_investigator;
        case Role::principal_investigator: return subject == Role::researcher;
        case Role::manufacturer: return subject == Role::machine;
        default: return false;
    }
}

struct Certificate {
    std::string subject;
    Role role = Role::researcher;
    Bytes public_key;
    std::string issuer_fingerprint;  // empty for the self-signed root
    std::uint64_t not_before = 0;
    std::uint64_t not_after = 0;
    Bytes signature;

    json body_json() const {
        return json{{"subject", subject},
                    {"role", role_name(role)},
                    {"public_key", to_base64(public_key)},
                    {"issuer", issuer_fingerprint},
                    {"not_before", not_before},
                    {"not_after", not_after}};
    }

    Bytes canonical_body() const { return to_bytes(body_json().dump()); }

    json to_json() const {
        json j = body_json();
        j["signature"] = to_base64(signature);
        return j;
    }

    static Certificate from_json(const json& j) {
        Certificate c;
        c.subject = j.at("subject").get<std::string>();
        c.role = role_from_name(j.at("role").get<std::string>());
        c.public_key = from_base64(j.at("public_key").get<std::string>());
        c.issuer_fingerprint = j.at("issuer").get<std::string>();
        c.not_before = j.at("not_before").get<std::uint64_t>();
        c.not_after = j.at("not_after").get<std::uint64_t>();
        c.signature = from_base64(j.at("signature").get<std::string>());
        return c;
    }

    std::string fingerprint() const { return to_hex(sha256(to_bytes(to_json().dump()))); }
};

struct CertAuthority {  // a certificate together with its signing key
    Certificate cert;
    SigningKey key;
};

inline CertAuthority make_root(const std::string& subject, const SigningKey& key,
                               std::uint64_t not_before, std::uint64_t not_after) {
    Certificate c;
    c.subject = subject;
    c.role = Role::root;
    c.public_key = key.public_key;
    c.not_before = not_before;
    c.not_after = not_after;
    c.signature = key.sign(c.canonical_body());
    return {c, key};
}

inline Certificate issue_certificate(const CertAuthority& issuer, const std::string& subject,
                                     Role role, const Bytes& subject_public_key,
                                     std::uint64_t not_before, std::uint64_t not_after,
                                     std::uint64_t now) {
    if (!role_may_issue(issuer.cert.role, role))
        throw Error(Err::RoleViolation, std::string(role_name(issuer.cert.role)) +
                                            " cannot issue " + role_name(role));
    if (now < issuer.cert.not_before || now > issuer.cert.not_after)
        throw Error(Err::ExpiredIssuer, issuer.cert.subject);
    Certificate c;
    c.subject = subject;
    c.role = role;
    c.public_key = subject_public_key;
    c.issuer_fingerprint = issuer.cert.fingerprint();
    c.not_before = not_before;
    c.not_after = not_after;
    c.signature = issuer.key.sign(c.canonical_body());
    return c;
}

// Leaf-first chain ending at the trust root. Verifies every signature, role
// ordering, and validity window; errors name the failing link.
inline void validate_chain(const std::vector<Certificate>& chain, const Certificate& trust_root,
                           std::uint64_t now) {
    if (chain.empty()) throw Error(Err::InvalidCertificate, "empty chain");
    if (chain.back().fingerprint() != trust_root.fingerprint())
        throw Error(Err::UnknownRoot, chain.back().subject);
    if (!verify_signature(trust_root.public_key, trust_root.canonical_body(),
                          trust_root.signature))
        throw Error(Err::BrokenSignature, "root " + trust_root.subject);
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
        const Certificate& cert = chain[i];
        const Certificate& issuer = chain[i + 1];
        if (cert.issuer_fingerprint != issuer.fingerprint())
            throw Error(Err::InvalidCertificate, "issuer mismatch at " + cert.subject);
        if (!verify_signature(issuer.public_key, cert.canonical_body(), cert.signature))
            throw Error(Err::BrokenSignature, cert.subject);
        if (!role_may_issue(issuer.role, cert.role))
            throw Error(Err::RoleViolation, issuer.subject + " -> " + cert.subject);
        if (now < cert.not_before || now > cert.not_after)
            throw Error(Err::Expired, cert.subject);
    }
    if (now < trust_root.not_before || now > trust_root.not_after)
        throw Error(Err::Expired, trust_root.subject);
}

inline json chain_to_json(const std::vector<Certificate>& chain) {
    json arr = json::array();
    for (const auto& c : chain) arr.push_back(c.to_json());
    return arr;
}

inline std::vector<Certificate> chain_from_json(const json& arr) {
    std::vector<Certificate> chain;
    for (const auto& j : arr) chain.push_back(Certificate::from_json(j));
    return chain;
}

// --- Exemption list tokens ---------------------------------------------------

struct NotificationContacts {
    std::string principal_investigator;
    std::string biosafety_officer;
    std::string legal;

    json to_json() const {
        return json{{"pi", principal_investigator},
                    {"officer", biosafety_officer},
                    {"legal", legal}};
    }

    static NotificationContacts from_json(const json& j) {
        return {j.at("pi").get<std::string>(), j.at("officer").get<std::string>(),
                j.at("legal").get<std::string>()};
    }
};

struct ExemptionListToken {
    std::vector<std::string> exemptions;       // hazard accessions
    std::vector<std::string> window_digests;   // hex sha256 of hashed windows (raw sequences)
    std::string requester_fingerprint;         // researcher cert or lab (PI) cert
    bool lab_scoped = false;
    std::string shipping_address;
    std::string nonce;
    NotificationContacts contacts;
    std::uint64_t not_before = 0;
    std::uint64_t not_after = 0;
    std::vector<Certificate> issuer_chain;     // approving officer's chain, leaf-first
    Bytes signature;

    json body_json() const {
        return json{{"exemptions", exemptions},
                    {"window_digests", window_digests},
                    {"requester", requester_fingerprint},
                    {"lab_scoped", lab_scoped},
                    {"shipping_address", shipping_address},
                    {"nonce", nonce},
                    {"contacts", contacts.to_json()},
                    {"not_before", not_before},
                    {"not_after", not_after},
                    {"issuer_chain", chain_to_json(issuer_chain)}};
    }

    Bytes canonical_body() const { return to_bytes(body_json().dump()); }

    json to_json() const {
        json j = body_json();
        j["signature"] = to_base64(signature);
        return j;
    }

    static ExemptionListToken from_json(const json& j) {
        ExemptionListToken t;
        t.exemptions = j.at("exemptions").get<std::vector<std::string>>();
        t.window_digests = j.at("window_digests").get<std::vector<std::string>>();
        t.requester_fingerprint = j.at("requester").get<std::string>();
        t.lab_scoped = j.at("lab_scoped").get<bool>();
        t.shipping_address = j.at("shipping_address").get<std::string>();
        t.nonce = j.at("nonce").get<std::string>();
        t.contacts = NotificationContacts::from_json(j.at("contacts"));
        t.not_before = j.at("not_before").get<std::uint64_t>();
        t.not_after = j.at("not_after").get<std::uint64_t>();
        t.issuer_chain = chain_from_json(j.at("issuer_chain"));
        t.signature = from_base64(j.at("signature").get<std::string>());
        return t;
    }
};

struct EltRequest {
    std::vector<std::string> exemptions;
    std::vector<std::string> window_digests;
    std::string requester_fingerprint;
    bool lab_scoped = false;
    std::string shipping_address;
    NotificationContacts contacts;
    std::uint64_t not_before = 0;
    std::uint64_t not_after = 0;
};

template <class Rng>
inline std::string fresh_nonce(Rng& rng) {
    Bytes b(16);
    for (auto&ByteRef : b) ByteRef = std::uint8_t(rng());
    return to_hex(b);
}

template <class Rng>
inline ExemptionListToken create_and_approve_elt(const EltRequest& request,
                                                 const CertAuthority& officer,
                                                 const std::vector<Certificate>& officer_chain,
                                                 const Certificate& trust_root,
                                                 std::uint64_t now, Rng& rng) {
    if (request.exemptions.empty() && request.window_digests.empty())
        throw Error(Err::EmptyExemptions);
    try {
        validate_chain(officer_chain, trust_root, now);
    } catch (const Error& e) {
        throw Error(Err::InvalidOfficerChain, e.what());
    }
    if (officer_chain.front().role != Role::biosafety_officer &&
        officer_chain.front().role != Role::national_authority &&
        officer_chain.front().role != Role::root)
        throw Error(Err::InvalidOfficerChain, "approver role too low");

    ExemptionListToken t;
    t.exemptions = request.exemptions;
    t.window_digests = request.window_digests;
    t.requester_fingerprint = request.requester_fingerprint;
    t.lab_scoped = request.lab_scoped;
    t.shipping_address = request.shipping_address;
    t.nonce = fresh_nonce(rng);
    t.contacts = request.contacts;
    t.not_before = request.not_before;
    t.not_after = request.not_after;
    t.issuer_chain = officer_chain;
    t.signature = officer.key.sign(t.canonical_body());
    return t;
}

// Append-only consumed-nonce log; membership check and insert are atomic.
// Survives restarts when backed by a file.
class NonceStore {
public:
    NonceStore() = default;

    explicit NonceStore(std::string path) : path_(std::move(path)) {
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) consumed_.insert(line);
    }

    // Returns false if the nonce was already consumed.
    bool consume(const std::string& nonce) {
        std::lock_guard<std::mutex> lock(mu_);
        if (!consumed_.insert(nonce).second) return false;
        if (!path_.empty()) {
            std::ofstream out(path_, std::ios::app);
            out << nonce << '\n';
        }
        return true;
    }

    bool seen(const std::string& nonce) const {
        std::lock_guard<std::mutex> lock(mu_);
        return consumed_.count(nonce) > 0;
    }

private:
    std::string path_;
    std::set<std::string> consumed_;
    mutable std::mutex mu_;
};

struct EltGrant {
    std::set<std::string> exemptions;
    std::set<std::string> window_digests;
    NotificationContacts contacts;
    std::string nonce;
};

// Verifies the token and its binding to the presenter, consumes the nonce,
// and returns the exemption set plus who to notify. Lab-scoped tokens accept
// any certificate issued by the lab's PI certificate.
inline EltGrant verify_elt(const ExemptionListToken& elt,
                           const std::vector<Certificate>& presenter_chain,
                           const Certificate& trust_root, NonceStore& nonces,
                           std::uint64_t now) {
    validate_chain(presenter_chain, trust_root, now);
    try {
        validate_chain(elt.issuer_chain, trust_root, now);
    } catch (const Error&) {
        throw Error(Err::EltInvalid, "issuer chain invalid");
    }
    if (!verify_signature(elt.issuer_chain.front().public_key, elt.canonical_body(),
                          elt.signature))
        throw Error(Err::BrokenSignature, "ELT signature");
    if (now < elt.not_before || now > elt.not_after) throw Error(Err::Expired, "ELT validity");

    const Certificate& presenter = presenter_chain.front();
    bool bound = presenter.fingerprint() == elt.requester_fingerprint;
    if (!bound && elt.lab_scoped)
        bound = presenter.issuer_fingerprint == elt.requester_fingerprint;
    if (!bound) throw Error(Err::BindingMismatch);

    if (!nonces.consume(elt.nonce)) throw Error(Err::EltReplayed, elt.nonce);

    EltGrant grant;
    grant.exemptions.insert(elt.exemptions.begin(), elt.exemptions.end());
    grant.window_digests.insert(elt.window_digests.begin(), elt.window_digests.end());
    grant.contacts = elt.contacts;
    grant.nonce = elt.nonce;
    return grant;
}

}  // namespace dnascreen
