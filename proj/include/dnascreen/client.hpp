// Screening client: parses FASTA, generates query windows, runs the oblivious
// hashing protocol against a key-server quorum, queries the database, and
// renders a report with per-match coordinates plus the signed receipt.
#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dnascreen/bytes.hpp"
#include "dnascreen/certs.hpp"
#include "dnascreen/doprf.hpp"
#include "dnascreen/errors.hpp"
#include "dnascreen/hashdb.hpp"
#include "dnascreen/keyserver.hpp"
#include "dnascreen/sequence.hpp"
#include "dnascreen/transport.hpp"

namespace dnascreen {

// Exit codes for the command-line client.
inline constexpr int kExitAccepted = 0;
inline constexpr int kExitAlert = 2;
inline constexpr int kExitDenied = 3;
inline constexpr int kExitParseError = 4;
inline constexpr int kExitQuorumUnavailable = 5;
inline constexpr int kExitDatabaseUnreachable = 6;
inline constexpr int kExitOtherError = 7;

inline int exit_code_for(Decision d) {
    switch (d) {
        case Decision::accepted: return kExitAccepted;
        case Decision::alert: return kExitAlert;
        case Decision::denied: return kExitDenied;
    }
    return kExitOtherError;
}

inline int exit_code_for(Err e) {
    switch (e) {
        case Err::ParseError: return kExitParseError;
        case Err::QuorumUnavailable: return kExitQuorumUnavailable;
        case Err::DatabaseUnreachable: return kExitDatabaseUnreachable;
        default: return kExitOtherError;
    }
}

struct ClientConfig {
    std::string name = "client";      // network identity for transcripts
    std::vector<std::uint32_t> keyservers;  // available server indices
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    ScreeningMode mode = ScreeningMode::provider;
    std::string region;
    std::vector<Certificate> cert_chain;  // leaf-first
    std::optional<ExemptionListToken> elt;
    std::size_t batch_size = 4096;
    std::string format = "json";  // json | text
    std::uint64_t seed = 0;       // blinding RNG seed (0 = nondeterministic)
    std::string receipt_store;    // optional path for persisted receipts
    // Deterministic quorum override for tests; empty = probe /status and take
    // the lowest-indexed healthy endpoints.
    std::vector<std::uint32_t> quorum_override;

    void validate() const {
        if (t == 0 || t > n || keyservers.size() < t)
            throw Error(Err::BadConfig, "need t <= n <= endpoints");
        if (region.empty()) throw Error(Err::BadConfig, "region must be nonempty");
        if (cert_chain.empty()) throw Error(Err::BadConfig, "certificate required");
    }
};

struct ReportMatch {
    std::string record_id;
    std::uint32_t offset = 0;
    Strand strand = Strand::fwd;
    std::optional<std::uint8_t> frame;
    WindowKind kind = WindowKind::dna30;
    std::string accession;
    VariantKind variant_kind = VariantKind::wild_type;

    json to_json() const {
        json j{{"record", record_id},
               {"offset", offset},
               {"strand", strand == Strand::fwd ? "fwd" : "rev"},
               {"kind", window_kind_name(kind)},
               {"accession", accession},
               {"variant_kind", variant_kind_name(variant_kind)}};
        if (frame) j["frame"] = *frame;
        return j;
    }
};

struct ScreeningReport {
    Decision decision = Decision::accepted;
    std::vector<ReportMatch> matches;
    std::set<std::string> exemptions_applied;
    Receipt receipt;
    std::uint64_t db_version = 0;
    std::uint64_t window_count = 0;
    std::uint64_t base_pairs = 0;
    double parse_seconds = 0;
    double hash_seconds = 0;
    double lookup_seconds = 0;

    json to_json() const {
        json ms = json::array();
        for (const auto& m : matches) ms.push_back(m.to_json());
        return json{{"decision", decision_name(decision)},
                    {"matches", ms},
                    {"exemptions_applied", exemptions_applied},
                    {"receipt", receipt.to_json()},
                    {"db_version", db_version},
                    {"window_count", window_count},
                    {"base_pairs", base_pairs},
                    {"timings",
                     {{"parse_s", parse_seconds},
                      {"hash_s", hash_seconds},
                      {"lookup_s", lookup_seconds}}}};
    }
};

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}
}  // namespace detail

// Picks the evaluation quorum: explicit override, or the lowest-indexed
// endpoints that answer /status.
inline std::vector<std::uint32_t> probe_quorum(const ClientConfig& cfg,
                                               Channel& net) {
    if (!cfg.quorum_override.empty()) return cfg.quorum_override;
    std::vector<std::uint32_t> healthy;
    for (auto idx : cfg.keyservers) {
        try {
            net.call(cfg.name, keyserver_name(idx), "/status", json::object());
            healthy.push_back(idx);
        } catch (const Error&) {
        }
    }
    if (healthy.size() < cfg.t) throw Error(Err::QuorumUnavailable);
    return healthy;
}

// Obliviously hashes the windows in batches. Output order matches input order.
template <class G>
std::vector<Bytes> hash_windows(const std::vector<Window>& windows,
                                const ClientConfig& cfg, Channel& net,
                                const std::string& key_id, std::uint64_t epoch,
                                std::mt19937_64& rng) {
    auto available = probe_quorum(cfg, net);
    SharingConfig scfg{cfg.n, cfg.t};

    EvalServerFn<G> call_server =
        [&](std::uint32_t idx, const std::vector<std::uint32_t>& L,
            const std::vector<typename G::Element>& points) {
            json points_b64 = json::array();
            for (const auto& p : points) points_b64.push_back(to_base64(p.encode()));
            json req{{"protocol", kProtocolVersion},
                     {"client", cfg.cert_chain.front().fingerprint()},
                     {"key_id", key_id},
                     {"epoch", epoch},
                     {"L", L},
                     {"points", points_b64}};
            json resp = net.call(cfg.name, keyserver_name(idx), "/eval", req);
            std::vector<typename G::Element> out;
            for (const auto& p : resp.at("points"))
                out.push_back(G::Element::decode(from_base64(p.get<std::string>())));
            return out;
        };

    std::vector<Bytes> hashes;
    hashes.reserve(windows.size());
    std::size_t batch = cfg.batch_size ? cfg.batch_size : 4096;
    for (std::size_t start = 0; start < windows.size(); start += batch) {
        std::size_t end = std::min(windows.size(), start + batch);
        std::vector<Bytes> inputs;
        inputs.reserve(end - start);
        for (std::size_t i = start; i < end; ++i)
            inputs.push_back(
                window_hash_input(windows[i].kind, windows[i].payload));
        auto outs = doprf_eval_batch<G>(inputs, available, scfg, call_server, rng);
        for (auto& o : outs) hashes.push_back(o.encode());
    }
    return hashes;
}

inline void persist_receipt(const std::string& order_text,
                            const ClientConfig& cfg,
                            const ScreeningReport& report);

template <class G>
ScreeningReport screen_text(const std::string& fasta_text,
                            const ClientConfig& cfg, Channel& net) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    auto records = parse_fasta(fasta_text);
    if (records.empty()) throw Error(Err::ParseError, "no sequence records");

    std::vector<Window> all_windows;
    std::uint64_t bp = 0;
    for (const auto& rec : records) {
        auto ws = query_windows(rec, cfg.mode);
        bp += ws.source_length;
        all_windows.insert(all_windows.end(), ws.windows.begin(),
                           ws.windows.end());
    }

    ScreeningReport report;
    report.base_pairs = bp;
    report.window_count = all_windows.size();
    report.parse_seconds = detail::seconds_since(t0);

    // Key id and epoch from any healthy server's advertisement.
    json status;
    bool have_status = false;
    for (auto idx : cfg.keyservers) {
        try {
            status = net.call(cfg.name, keyserver_name(idx), "/status",
                              json::object());
            have_status = true;
            break;
        } catch (const Error&) {
        }
    }
    if (!have_status) throw Error(Err::QuorumUnavailable);
    const std::string key_id = status.at("key_id").get<std::string>();
    const std::uint64_t epoch = status.at("epoch").get<std::uint64_t>();

    std::mt19937_64 rng(cfg.seed ? cfg.seed : std::random_device{}());
    auto t1 = std::chrono::steady_clock::now();
    auto hashes = hash_windows<G>(all_windows, cfg, net, key_id, epoch, rng);
    report.hash_seconds = detail::seconds_since(t1);

    json hash_list = json::array();
    for (std::size_t i = 0; i < hashes.size(); ++i)
        hash_list.push_back(json{{"kind", window_kind_name(all_windows[i].kind)},
                                 {"hash", to_base64(hashes[i])}});
    json req{{"hashes", hash_list},
             {"region", cfg.region},
             {"cert_chain", chain_to_json(cfg.cert_chain)}};
    if (cfg.elt) req["elt"] = cfg.elt->to_json();

    auto t2 = std::chrono::steady_clock::now();
    json resp;
    try {
        resp = net.call(cfg.name, kHashDbName, "/screen", req);
    } catch (const Error& e) {
        if (e.code() == Err::ServerUnreachable)
            throw Error(Err::DatabaseUnreachable, e.what());
        throw;
    }
    report.lookup_seconds = detail::seconds_since(t2);

    Verdict v = Verdict::from_json(resp);
    report.decision = v.decision;
    report.exemptions_applied = v.exemptions_applied;
    report.receipt = v.receipt;
    report.db_version = v.receipt.db_version;
    for (const auto& m : v.matches) {
        const Window& w = all_windows.at(m.query_index);
        ReportMatch rm;
        rm.record_id = w.origin.record_id;
        rm.offset = w.origin.offset;
        rm.strand = w.origin.strand;
        rm.frame = w.origin.frame;
        rm.kind = w.kind;
        rm.accession = m.meta.accession;
        rm.variant_kind = m.meta.variant_kind;
        report.matches.push_back(std::move(rm));
    }
    std::sort(report.matches.begin(), report.matches.end(),
              [](const ReportMatch& a, const ReportMatch& b) {
                  if (a.record_id != b.record_id) return a.record_id < b.record_id;
                  if (a.offset != b.offset) return a.offset < b.offset;
                  return window_kind_name(a.kind) <
                         std::string(window_kind_name(b.kind));
              });

    if (!cfg.receipt_store.empty()) persist_receipt(fasta_text, cfg, report);
    return report;
}

template <class G>
ScreeningReport screen_file(const std::string& path, const ClientConfig& cfg,
                            Channel& net) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Err::ParseError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (buf.str().empty()) throw Error(Err::ParseError, "empty file " + path);
    return screen_text<G>(buf.str(), cfg, net);
}

// Append-only local receipt log, keyed by the hash of the order text.
inline void persist_receipt(const std::string& order_text,
                            const ClientConfig& cfg,
                            const ScreeningReport& report) {
    json entry{{"order_hash", to_hex(sha256(to_bytes(order_text)))},
               {"decision", decision_name(report.decision)},
               {"db_version", report.db_version},
               {"window_count", report.window_count},
               {"receipt", report.receipt.to_json()}};
    std::ofstream out(cfg.receipt_store, std::ios::app);
    out << entry.dump() << '\n';
}

inline std::string render_report(const ScreeningReport& report,
                                 const std::string& format) {
    if (format == "json") return report.to_json().dump(2) + "\n";
    std::ostringstream out;
    if (report.decision == Decision::accepted && report.matches.empty()) {
        out << "accepted (" << report.window_count << " windows, db v"
            << report.db_version << ")\n";
        return out.str();
    }
    out << decision_name(report.decision) << " (" << report.window_count
        << " windows, db v" << report.db_version << ")\n";
    for (const auto& m : report.matches) {
        out << m.record_id << ":" << m.offset
            << (m.strand == Strand::fwd ? "+" : "-") << " "
            << window_kind_name(m.kind) << " " << m.accession << " "
            << variant_kind_name(m.variant_kind) << "\n";
    }
    for (const auto& e : report.exemptions_applied)
        out << "exempted: " << e << "\n";
    return out.str();
}

}  // namespace dnascreen
