#pragma once

// Curator pipeline: hazard window extraction, mutant and peptide-variant
// generation, entropy filtering, harmless-corpus subtraction, and oblivious
// hashing of the result into the table H.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "dnascreen/blosum62.hpp"
#include "dnascreen/sequence.hpp"
#include "dnascreen/table.hpp"

namespace dnascreen {

enum class HazardKind { virus, toxin, toxin_gene, microbe_nontoxic };

inline const char* hazard_kind_name(HazardKind k) {
    switch (k) {
        case HazardKind::virus: return "virus";
        case HazardKind::toxin: return "toxin";
        case HazardKind::toxin_gene: return "toxin-gene";
        case HazardKind::microbe_nontoxic: return "microbe-nontoxic";
    }
    return "?";
}

inline HazardKind hazard_kind_from_name(const std::string& s) {
    if (s == "virus") return HazardKind::virus;
    if (s == "toxin") return HazardKind::toxin;
    if (s == "toxin-gene") return HazardKind::toxin_gene;
    if (s == "microbe-nontoxic") return HazardKind::microbe_nontoxic;
    throw Error(Err::ParseError, "unknown hazard kind " + s);
}

struct HazardSource {
    std::string accession;
    std::string residues;
    HazardKind kind = HazardKind::virus;
    std::set<std::string> region_tags;
    bool common = false;
    std::optional<bool> defend_mutants;  // default: true for toxin genes
    std::string genus;                   // optional, for curation relatedness

    bool wants_mutants() const {
        if (defend_mutants) return *defend_mutants;
        return kind == HazardKind::toxin_gene;
    }

    std::set<std::string> entry_tags() const {
        std::set<std::string> tags = region_tags;
        if (common) tags.insert(kTagCommon);
        return tags;
    }
};

struct PlainEntry {
    Window window;
    std::string hazard_accession;
    VariantKind variant_kind = VariantKind::wild_type;
    std::set<std::string> tags;

    EntryMeta meta() const {
        return EntryMeta{hazard_accession, window.kind, window.origin.offset, variant_kind, tags};
    }
};

struct CorpusRecord {
    std::string accession;
    std::string description;
    std::string residues;
    std::string genus;
};

struct HarmlessCorpus {
    std::vector<CorpusRecord> records;
};

inline constexpr double kEntropyFloor = 1.6;
inline const std::vector<std::string> kDefaultCurationKeywords = {"synthetic", "recombinant",
                                                                  "vector", "construct"};
inline constexpr int kDefaultRelatednessThreshold = 20;
inline constexpr int kDefaultBlosumFloor = 0;

// Wild-type dna30/dna42 windows plus aa20 translations of every 60-mer,
// from both strands, deduplicated by (kind, payload).
inline std::vector<PlainEntry> extract_hazard_windows(const HazardSource& src) {
    if (src.residues.size() < 30) throw Error(Err::TooShort, src.accession);
    std::vector<PlainEntry> out;
    std::set<std::pair<WindowKind, std::string>> seen;
    auto add = [&](WindowKind kind, std::uint32_t off, Strand strand, std::string payload) {
        if (!seen.insert({kind, payload}).second) return;
        Window w;
        w.kind = kind;
        w.payload = std::move(payload);
        w.origin = {src.accession, off, strand, std::nullopt, std::nullopt};
        out.push_back({w, src.accession, VariantKind::wild_type, src.entry_tags()});
    };
    for (Strand strand : {Strand::fwd, Strand::rev}) {
        const std::string seq =
            strand == Strand::fwd ? src.residues : reverse_complement(src.residues);
        for (auto& [off, p] : windows(seq, 30)) add(WindowKind::dna30, off, strand, p);
        for (auto& [off, p] : windows(seq, 42)) add(WindowKind::dna42, off, strand, p);
        for (auto& [off, p] : windows(seq, 60))
            add(WindowKind::aa20, off, strand, translate(p));
    }
    return out;
}

// Every single-position substitution of a 42-mer: 42 positions x 3 bases.
inline std::vector<PlainEntry> single_mutants_42(const PlainEntry& entry) {
    if (entry.window.kind != WindowKind::dna42)
        throw Error(Err::BadConfig, "single_mutants_42 requires a dna42 entry");
    std::vector<PlainEntry> out;
    out.reserve(126);
    static const std::string bases = "ACGT";
    for (size_t pos = 0; pos < entry.window.payload.size(); ++pos) {
        for (char b : bases) {
            if (b == entry.window.payload[pos]) continue;
            PlainEntry m = entry;
            m.window.payload[pos] = b;
            m.variant_kind = VariantKind::dna_mutant;
            out.push_back(std::move(m));
        }
    }
    return out;
}

// Single-residue substitutions scoring >= score_floor under the scorer
// (default BLOSUM62); self-substitutions excluded.
inline std::vector<PlainEntry> peptide_variants(
    const PlainEntry& entry, int score_floor,
    const std::function<int(char, char)>& scorer = blosum62_score) {
    if (entry.window.kind != WindowKind::aa20)
        throw Error(Err::BadConfig, "peptide_variants requires an aa20 entry");
    std::vector<PlainEntry> out;
    for (size_t pos = 0; pos < entry.window.payload.size(); ++pos) {
        char orig = entry.window.payload[pos];
        if (orig == '*') continue;
        for (char sub : kAminoAcids) {
            if (sub == orig) continue;
            if (scorer(orig, sub) < score_floor) continue;
            PlainEntry v = entry;
            v.window.payload[pos] = sub;
            v.variant_kind = VariantKind::peptide_variant;
            out.push_back(std::move(v));
        }
    }
    return out;
}

// One 42-mer per seeded-uniform stride in [39,45], tagged RegulatedButPass.
inline std::vector<PlainEntry> regulated_pass_sample(const HazardSource& src,
                                                     std::uint64_t seed) {
    std::vector<PlainEntry> out;
    if (src.residues.size() < 42) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> stride(39, 45);
    for (size_t start = 0; start + 42 <= src.residues.size(); start += stride(rng)) {
        std::string payload = src.residues.substr(start, 42);
        if (std::any_of(payload.begin(), payload.end(),
                        [](char c) { return !is_canonical_base(c); }))
            continue;
        Window w;
        w.kind = WindowKind::dna42;
        w.payload = std::move(payload);
        w.origin = {src.accession, static_cast<std::uint32_t>(start), Strand::fwd, std::nullopt,
                    std::nullopt};
        std::set<std::string> tags = src.region_tags;
        tags.insert(kTagRegulatedButPass);
        out.push_back({w, src.accession, VariantKind::wild_type, std::move(tags)});
    }
    return out;
}

// Drops DNA entries under the 1.6-bit entropy floor; peptides pass through.
inline std::vector<PlainEntry> entropy_filter(std::vector<PlainEntry> entries) {
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [](const PlainEntry& e) {
                                     return e.window.kind != WindowKind::aa20 &&
                                            shannon_entropy(e.window.payload) < kEntropyFloor;
                                 }),
                  entries.end());
    return entries;
}

namespace detail {

inline bool description_matches_keyword(const std::string& description,
                                        const std::vector<std::string>& keywords) {
    std::string lower = description;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (const auto& kw : keywords)
        if (lower.find(kw) != std::string::npos) return true;
    return false;
}

inline std::set<std::pair<WindowKind, std::string>> corpus_window_set(const CorpusRecord& rec) {
    std::set<std::pair<WindowKind, std::string>> out;
    for (Strand strand : {Strand::fwd, Strand::rev}) {
        const std::string seq =
            strand == Strand::fwd ? rec.residues : reverse_complement(rec.residues);
        for (auto& [off, p] : windows(seq, 30)) out.insert({WindowKind::dna30, p});
        for (auto& [off, p] : windows(seq, 42)) out.insert({WindowKind::dna42, p});
        for (auto& [off, p] : windows(seq, 60)) out.insert({WindowKind::aa20, translate(p)});
    }
    return out;
}

}  // namespace detail

// Harmless-corpus subtraction. Records matching a tell-tale keyword or the
// hazard's genus are excluded; a record with more than relatedness_threshold
// matches against a single hazard is ignored for that hazard; every other
// match is removed from the entry list.
inline std::vector<PlainEntry> curate(
    std::vector<PlainEntry> entries, const HarmlessCorpus& corpus, int relatedness_threshold,
    const std::vector<std::string>& keywords = kDefaultCurationKeywords,
    const std::map<std::string, std::string>& hazard_genus = {}) {
    for (const auto& rec : corpus.records) {
        if (detail::description_matches_keyword(rec.description, keywords)) continue;
        auto rec_windows = detail::corpus_window_set(rec);

        std::map<std::string, std::vector<size_t>> matched_by_hazard;
        for (size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            if (rec_windows.count({e.window.kind, e.window.payload}))
                matched_by_hazard[e.hazard_accession].push_back(i);
        }

        std::set<size_t> to_remove;
        for (const auto& [accession, idxs] : matched_by_hazard) {
            if (!rec.genus.empty()) {
                auto it = hazard_genus.find(accession);
                if (it != hazard_genus.end() && it->second == rec.genus) continue;
            }
            if (static_cast<int>(idxs.size()) > relatedness_threshold) continue;  // too related
            to_remove.insert(idxs.begin(), idxs.end());
        }
        if (to_remove.empty()) continue;
        std::vector<PlainEntry> kept;
        kept.reserve(entries.size() - to_remove.size());
        for (size_t i = 0; i < entries.size(); ++i)
            if (!to_remove.count(i)) kept.push_back(std::move(entries[i]));
        entries = std::move(kept);
    }
    return entries;
}

struct BuildOptions {
    std::uint64_t seed = 0;
    int blosum_floor = kDefaultBlosumFloor;
    int relatedness_threshold = kDefaultRelatednessThreshold;
    std::vector<std::string> curation_keywords = kDefaultCurationKeywords;
    bool stopgap = false;
};

// Full per-source entry generation (everything before corpus subtraction
// and hashing).
inline std::vector<PlainEntry> generate_entries(const std::vector<HazardSource>& sources,
                                                const BuildOptions& opts) {
    std::vector<PlainEntry> all;
    for (const auto& src : sources) {
        if (src.kind == HazardKind::microbe_nontoxic) {
            auto sampled = regulated_pass_sample(src, opts.seed);
            all.insert(all.end(), sampled.begin(), sampled.end());
            continue;
        }
        auto wild = extract_hazard_windows(src);
        for (const auto& e : wild) {
            all.push_back(e);
            if (src.common) continue;  // Common entries never generate variants
            if (e.window.kind == WindowKind::dna42 && src.wants_mutants()) {
                auto muts = single_mutants_42(e);
                all.insert(all.end(), muts.begin(), muts.end());
            } else if (e.window.kind == WindowKind::aa20 && src.wants_mutants()) {
                auto vars = peptide_variants(e, opts.blosum_floor);
                all.insert(all.end(), vars.begin(), vars.end());
            }
        }
    }
    return entropy_filter(std::move(all));
}

// Batched oblivious hashing callback: window hash inputs in, 32-byte DOPRF
// outputs out. Provided by the DOPRF client (or a direct oracle in tests).
using HashWindowsFn = std::function<std::vector<Bytes>(const std::vector<Bytes>&)>;

inline HashedTable build_hashed_table(const std::vector<PlainEntry>& entries,
                                      const HashWindowsFn& hash_windows, std::uint64_t version,
                                      const std::string& key_id, std::uint64_t epoch) {
    std::vector<Bytes> inputs;
    inputs.reserve(entries.size());
    for (const auto& e : entries)
        inputs.push_back(window_hash_input(e.window.kind, e.window.payload));
    auto hashes = hash_windows(inputs);
    if (hashes.size() != entries.size()) throw Error(Err::CorruptTable, "hash count mismatch");
    HashedTable table;
    table.version = version;
    table.key_id = key_id;
    table.epoch = epoch;
    for (size_t i = 0; i < entries.size(); ++i) table.insert(hashes[i], entries[i].meta());
    table.finalize();
    return table;
}

// Appendix-style incremental update. Stopgap mode adds wild-type 30-mers of
// both strands only; full mode replaces a prior stopgap accession with the
// complete curated entry set. Version increments either way.
inline HashedTable incremental_add(const HazardSource& src, const HashedTable& existing,
                                   const HashWindowsFn& hash_windows, std::uint64_t key_epoch,
                                   bool stopgap, const BuildOptions& opts = {}) {
    if (existing.epoch != key_epoch) throw Error(Err::StaleKey);
    std::vector<PlainEntry> entries;
    if (stopgap) {
        if (src.residues.size() < 30) throw Error(Err::TooShort, src.accession);
        std::set<std::string> seen;
        for (Strand strand : {Strand::fwd, Strand::rev}) {
            const std::string seq =
                strand == Strand::fwd ? src.residues : reverse_complement(src.residues);
            for (auto& [off, p] : windows(seq, 30)) {
                if (!seen.insert(p).second) continue;
                Window w;
                w.kind = WindowKind::dna30;
                w.payload = p;
                w.origin = {src.accession, off, strand, std::nullopt, std::nullopt};
                entries.push_back({w, src.accession, VariantKind::wild_type, src.entry_tags()});
            }
        }
        entries = entropy_filter(std::move(entries));
    } else {
        entries = generate_entries({src}, opts);
    }

    HashedTable updated = existing;
    if (!stopgap) {
        // full-mode replacement drops the accession's stopgap dna30 entries
        updated.remove_if([&](const TableRecord& r) {
            return r.meta.accession == src.accession && r.meta.kind == WindowKind::dna30;
        });
    }
    std::vector<Bytes> inputs;
    for (const auto& e : entries)
        inputs.push_back(window_hash_input(e.window.kind, e.window.payload));
    auto hashes = hash_windows(inputs);
    for (size_t i = 0; i < entries.size(); ++i) updated.insert(hashes[i], entries[i].meta());
    updated.finalize();
    updated.version = existing.version + 1;
    return updated;
}

}  // namespace dnascreen
