#pragma once

// FASTA parsing and decomposition of orders into the screened window
// universe: 30/42-base DNA windows, 20-aa peptides from all six reading
// frames, and the 24 base permutations used in benchtop mode.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dnascreen/bytes.hpp"
#include "dnascreen/errors.hpp"

namespace dnascreen {

enum class WindowKind { dna30, dna42, aa20 };

inline const char* window_kind_name(WindowKind k) {
    switch (k) {
        case WindowKind::dna30: return "dna30";
        case WindowKind::dna42: return "dna42";
        case WindowKind::aa20: return "aa20";
    }
    return "?";
}

inline WindowKind window_kind_from_name(const std::string& s) {
    if (s == "dna30") return WindowKind::dna30;
    if (s == "dna42") return WindowKind::dna42;
    if (s == "aa20") return WindowKind::aa20;
    throw Error(Err::ParseError, "unknown window kind " + s);
}

inline size_t window_kind_length(WindowKind k) {
    switch (k) {
        case WindowKind::dna30: return 30;
        case WindowKind::dna42: return 42;
        case WindowKind::aa20: return 20;
    }
    return 0;
}

enum class Strand { fwd, rev };

struct WindowOrigin {
    std::string record_id;
    std::uint32_t offset = 0;          // 0-based, in the strand's own coordinates
    Strand strand = Strand::fwd;
    std::optional<std::uint8_t> frame; // 0-2 for aa20
    std::optional<std::uint8_t> permutation;  // 0-23 in benchtop mode (0 = identity)
};

struct Window {
    WindowKind kind;
    std::string payload;
    WindowOrigin origin;
};

struct WindowSet {
    std::vector<Window> windows;
    std::uint64_t source_length = 0;
};

struct SequenceRecord {
    std::string id;
    std::string residues;  // uppercase; may retain IUPAC ambiguity codes
};

inline bool is_canonical_base(char c) {
    return c == 'A' || c == 'C' || c == 'G' || c == 'T';
}

inline bool is_iupac(char c) {
    static const std::string codes = "ACGTNRYSWKMBDHV";
    return codes.find(c) != std::string::npos;
}

// Headers split on '>'; residues uppercased, U mapped to T, whitespace
// stripped. Ambiguity codes parse (windows over them are skipped later);
// anything else is a ParseError with its line number.
inline std::vector<SequenceRecord> parse_fasta(const std::string& text) {
    std::vector<SequenceRecord> records;
    SequenceRecord* current = nullptr;
    size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            records.push_back({line.substr(1), ""});
            current = &records.back();
            continue;
        }
        if (!current) {
            records.push_back({"", ""});  // headerless leading sequence
            current = &records.back();
        }
        for (char raw : line) {
            if (std::isspace(static_cast<unsigned char>(raw))) continue;
            char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
            if (c == 'U') c = 'T';
            if (!is_iupac(c))
                throw Error(Err::ParseError, "illegal character '" + std::string(1, raw) +
                                                 "' at line " + std::to_string(line_no));
            current->residues.push_back(c);
        }
    }
    return records;
}

inline char complement_base(char c) {
    switch (c) {
        case 'A': return 'T';
        case 'T': return 'A';
        case 'C': return 'G';
        case 'G': return 'C';
        default: return 'N';
    }
}

inline std::string reverse_complement(const std::string& dna) {
    std::string out(dna.rbegin(), dna.rend());
    for (char& c : out) c = complement_base(c);
    return out;
}

// All length-`size` substrings at stride 1, skipping any containing a
// non-ACGT symbol.
inline std::vector<std::pair<std::uint32_t, std::string>> windows(const std::string& seq,
                                                                  size_t size) {
    std::vector<std::pair<std::uint32_t, std::string>> out;
    if (seq.size() < size) return out;
    for (size_t off = 0; off + size <= seq.size(); ++off) {
        bool ok = true;
        for (size_t i = off; i < off + size; ++i)
            if (!is_canonical_base(seq[i])) { ok = false; break; }
        if (ok) out.emplace_back(static_cast<std::uint32_t>(off), seq.substr(off, size));
    }
    return out;
}

// Standard genetic code; codon index in TCAG base order, stops as '*'.
inline char translate_codon(char b1, char b2, char b3) {
    static constexpr char kTable[] =
        "FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG";
    auto idx = [](char c) -> int {
        switch (c) {
            case 'T': return 0;
            case 'C': return 1;
            case 'A': return 2;
            case 'G': return 3;
            default: return -1;
        }
    };
    int i1 = idx(b1), i2 = idx(b2), i3 = idx(b3);
    if (i1 < 0 || i2 < 0 || i3 < 0) return 'X';  // ambiguity flows through as X
    return kTable[i1 * 16 + i2 * 4 + i3];
}

inline std::string translate(const std::string& dna) {
    if (dna.size() % 3 != 0) throw Error(Err::FrameError, "length not divisible by 3");
    std::string out;
    out.reserve(dna.size() / 3);
    for (size_t i = 0; i + 2 < dna.size(); i += 3)
        out.push_back(translate_codon(dna[i], dna[i + 1], dna[i + 2]));
    return out;
}

// The 24 bijections of {A,C,G,T} applied symbol-wise, in lexicographic
// order of the image of "ACGT" (so index 0 is the identity).
inline std::vector<std::string> base_permutation_table() {
    std::string perm = "ACGT";
    std::vector<std::string> out;
    do {
        out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

inline std::string apply_base_permutation(const std::string& dna, const std::string& image) {
    std::string out = dna;
    for (char& c : out) {
        switch (c) {
            case 'A': c = image[0]; break;
            case 'C': c = image[1]; break;
            case 'G': c = image[2]; break;
            case 'T': c = image[3]; break;
        }
    }
    return out;
}

inline std::vector<std::string> base_permutations(const std::string& dna) {
    std::vector<std::string> out;
    for (const auto& image : base_permutation_table())
        out.push_back(apply_base_permutation(dna, image));
    return out;
}

// Mononucleotide Shannon entropy in bits.
inline double shannon_entropy(const std::string& dna) {
    std::array<size_t, 4> counts{};
    size_t total = 0;
    for (char c : dna) {
        switch (c) {
            case 'A': ++counts[0]; break;
            case 'C': ++counts[1]; break;
            case 'G': ++counts[2]; break;
            case 'T': ++counts[3]; break;
            default: continue;
        }
        ++total;
    }
    double h = 0.0;
    for (size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

enum class ScreeningMode { provider, benchtop };

// aa20 windows at 1-residue stride over one frame of one strand.
inline void append_aa_windows(const std::string& strand_seq, Strand strand,
                              std::uint8_t frame, const std::string& record_id,
                              std::vector<Window>& out) {
    if (strand_seq.size() < frame + 60) return;
    std::string in_frame = strand_seq.substr(frame);
    in_frame.resize(in_frame.size() - in_frame.size() % 3);
    if (in_frame.size() < 60) return;
    std::string aa = translate(in_frame);
    for (size_t off = 0; off + 20 <= aa.size(); ++off) {
        std::string payload = aa.substr(off, 20);
        if (payload.find('X') != std::string::npos) continue;
        Window w;
        w.kind = WindowKind::aa20;
        w.payload = payload;
        w.origin = {record_id, static_cast<std::uint32_t>(frame + 3 * off), strand, frame,
                    std::nullopt};
        out.push_back(w);
    }
}

// The full client-side window universe for one record. Provider mode:
// forward-strand dna30 + dna42 plus aa20 from all six frames. Benchtop mode
// additionally rewrites each DNA window under all 24 base permutations.
inline WindowSet query_windows(const SequenceRecord& record, ScreeningMode mode) {
    WindowSet ws;
    ws.source_length = record.residues.size();
    std::vector<Window> dna;
    for (auto size : {size_t{30}, size_t{42}}) {
        WindowKind kind = size == 30 ? WindowKind::dna30 : WindowKind::dna42;
        for (auto& [off, payload] : windows(record.residues, size)) {
            Window w;
            w.kind = kind;
            w.payload = payload;
            w.origin = {record.id, off, Strand::fwd, std::nullopt, std::nullopt};
            dna.push_back(w);
        }
    }
    if (mode == ScreeningMode::benchtop) {
        std::vector<Window> permuted;
        const auto table = base_permutation_table();
        for (const auto& w : dna) {
            for (std::uint8_t p = 0; p < table.size(); ++p) {
                Window pw = w;
                pw.payload = apply_base_permutation(w.payload, table[p]);
                pw.origin.permutation = p;
                permuted.push_back(pw);
            }
        }
        dna = std::move(permuted);
    }
    ws.windows = std::move(dna);

    const std::string rc = reverse_complement(record.residues);
    for (std::uint8_t frame = 0; frame < 3; ++frame)
        append_aa_windows(record.residues, Strand::fwd, frame, record.id, ws.windows);
    for (std::uint8_t frame = 0; frame < 3; ++frame)
        append_aa_windows(rc, Strand::rev, frame, record.id, ws.windows);

    std::stable_sort(ws.windows.begin(), ws.windows.end(), [](const Window& a, const Window& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        if (a.origin.offset != b.origin.offset) return a.origin.offset < b.origin.offset;
        if (a.origin.strand != b.origin.strand)
            return static_cast<int>(a.origin.strand) < static_cast<int>(b.origin.strand);
        if (a.origin.frame != b.origin.frame) return a.origin.frame < b.origin.frame;
        return a.origin.permutation < b.origin.permutation;
    });
    return ws;
}

// One line per window: kind, offset, strand, frame, permutation, payload.
inline std::string dump_window_set(const WindowSet& ws) {
    std::ostringstream out;
    for (const auto& w : ws.windows) {
        out << window_kind_name(w.kind) << '\t' << w.origin.offset << '\t'
            << (w.origin.strand == Strand::fwd ? "fwd" : "rev") << '\t'
            << (w.origin.frame ? std::to_string(*w.origin.frame) : "-") << '\t'
            << (w.origin.permutation ? std::to_string(*w.origin.permutation) : "-") << '\t'
            << w.payload << '\n';
    }
    return out.str();
}

// Domain-separated hash-to-group preimage for a window.
inline Bytes window_hash_input(WindowKind kind, const std::string& payload) {
    std::string tagged = std::string(window_kind_name(kind)) + ":" + payload;
    return to_bytes(tagged);
}

}  // namespace dnascreen
