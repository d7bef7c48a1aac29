#pragma once

// The hashed hazard table H: sorted fixed-length DOPRF outputs with tag
// metadata, its binary file format, and lookup.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dnascreen/bytes.hpp"
#include "dnascreen/errors.hpp"
#include "dnascreen/sequence.hpp"

namespace dnascreen {

using json = nlohmann::json;

enum class VariantKind { wild_type, dna_mutant, peptide_variant };

inline const char* variant_kind_name(VariantKind v) {
    switch (v) {
        case VariantKind::wild_type: return "wild-type";
        case VariantKind::dna_mutant: return "dna-mutant";
        case VariantKind::peptide_variant: return "peptide-variant";
    }
    return "?";
}

inline VariantKind variant_kind_from_name(const std::string& s) {
    if (s == "wild-type") return VariantKind::wild_type;
    if (s == "dna-mutant") return VariantKind::dna_mutant;
    if (s == "peptide-variant") return VariantKind::peptide_variant;
    throw Error(Err::ParseError, "unknown variant kind " + s);
}

// Tags are free strings: "Common", "RegulatedButPass", and region codes.
inline constexpr const char* kTagCommon = "Common";
inline constexpr const char* kTagRegulatedButPass = "RegulatedButPass";

struct EntryMeta {
    std::string accession;
    WindowKind kind = WindowKind::dna30;
    std::uint32_t offset = 0;
    VariantKind variant_kind = VariantKind::wild_type;
    std::set<std::string> tags;

    json to_json() const {
        return json{{"accession", accession},
                    {"kind", window_kind_name(kind)},
                    {"offset", offset},
                    {"variant_kind", variant_kind_name(variant_kind)},
                    {"tags", tags}};
    }

    static EntryMeta from_json(const json& j) {
        EntryMeta m;
        m.accession = j.at("accession").get<std::string>();
        m.kind = window_kind_from_name(j.at("kind").get<std::string>());
        m.offset = j.at("offset").get<std::uint32_t>();
        m.variant_kind = variant_kind_from_name(j.at("variant_kind").get<std::string>());
        m.tags = j.at("tags").get<std::set<std::string>>();
        return m;
    }

    bool is_common() const { return tags.count(kTagCommon) > 0; }
    bool is_regulated_pass() const { return tags.count(kTagRegulatedButPass) > 0; }

    std::set<std::string> region_tags() const {
        std::set<std::string> out;
        for (const auto& t : tags)
            if (t != kTagCommon && t != kTagRegulatedButPass) out.insert(t);
        return out;
    }
};

struct TableRecord {
    Bytes hash;  // 32 bytes
    EntryMeta meta;
};

class HashedTable {
public:
    static constexpr char kMagic[8] = {'D', 'N', 'A', 'H', 'T', 'B', 'L', '1'};
    static constexpr size_t kHashBytes = 32;

    std::uint64_t version = 0;
    std::string key_id;
    std::uint64_t epoch = 0;

    void insert(Bytes hash, EntryMeta meta) {
        records_.push_back({std::move(hash), std::move(meta)});
        sorted_ = false;
    }

    void finalize() {
        std::stable_sort(records_.begin(), records_.end(),
                         [](const TableRecord& a, const TableRecord& b) { return a.hash < b.hash; });
        records_.erase(std::unique(records_.begin(), records_.end(),
                                   [](const TableRecord& a, const TableRecord& b) {
                                       return a.hash == b.hash;
                                   }),
                       records_.end());
        sorted_ = true;
    }

    size_t size() const { return records_.size(); }
    const std::vector<TableRecord>& records() const { return records_; }
    std::vector<TableRecord>& mutable_records() { return records_; }

    std::optional<EntryMeta> lookup(const Bytes& hash) const {
        auto it = std::lower_bound(records_.begin(), records_.end(), hash,
                                   [](const TableRecord& r, const Bytes& h) { return r.hash < h; });
        if (it != records_.end() && it->hash == hash) return it->meta;
        return std::nullopt;
    }

    bool contains(const Bytes& hash) const { return lookup(hash).has_value(); }

    void remove_if(const std::function<bool(const TableRecord&)>& pred) {
        records_.erase(std::remove_if(records_.begin(), records_.end(), pred), records_.end());
    }

    Bytes serialize() const {
        Bytes out;
        auto put_u32 = [&](std::uint32_t v) {
            for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
        };
        auto put_u64 = [&](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
        };
        out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
        put_u64(version);
        put_u32(static_cast<std::uint32_t>(key_id.size()));
        out.insert(out.end(), key_id.begin(), key_id.end());
        put_u64(epoch);
        put_u64(records_.size());
        for (const auto& r : records_) {
            if (r.hash.size() != kHashBytes) throw Error(Err::CorruptTable, "bad hash width");
            out.insert(out.end(), r.hash.begin(), r.hash.end());
            std::string meta = r.meta.to_json().dump();
            put_u32(static_cast<std::uint32_t>(meta.size()));
            out.insert(out.end(), meta.begin(), meta.end());
        }
        return out;
    }

    static HashedTable deserialize(const Bytes& data) {
        size_t pos = 0;
        auto need = [&](size_t n) {
            if (pos + n > data.size()) throw Error(Err::CorruptTable, "truncated table");
        };
        auto get_u32 = [&]() {
            need(4);
            std::uint32_t v = 0;
            for (int i = 3; i >= 0; --i) v = (v << 8) | data[pos + i];
            pos += 4;
            return v;
        };
        auto get_u64 = [&]() {
            need(8);
            std::uint64_t v = 0;
            for (int i = 7; i >= 0; --i) v = (v << 8) | data[pos + i];
            pos += 8;
            return v;
        };
        need(sizeof(kMagic));
        if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
            throw Error(Err::CorruptTable, "bad magic");
        pos += sizeof(kMagic);
        HashedTable t;
        t.version = get_u64();
        std::uint32_t klen = get_u32();
        need(klen);
        t.key_id.assign(data.begin() + pos, data.begin() + pos + klen);
        pos += klen;
        t.epoch = get_u64();
        std::uint64_t count = get_u64();
        for (std::uint64_t i = 0; i < count; ++i) {
            need(kHashBytes);
            Bytes hash(data.begin() + pos, data.begin() + pos + kHashBytes);
            pos += kHashBytes;
            std::uint32_t mlen = get_u32();
            need(mlen);
            std::string meta(data.begin() + pos, data.begin() + pos + mlen);
            pos += mlen;
            try {
                t.records_.push_back({std::move(hash), EntryMeta::from_json(json::parse(meta))});
            } catch (const json::exception&) {
                throw Error(Err::CorruptTable, "bad metadata block");
            }
        }
        t.sorted_ = std::is_sorted(t.records_.begin(), t.records_.end(),
                                   [](const TableRecord& a, const TableRecord& b) {
                                       return a.hash < b.hash;
                                   });
        if (!t.sorted_) throw Error(Err::CorruptTable, "records not sorted");
        return t;
    }

    void save(const std::string& path) const {
        Bytes data = serialize();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Err::CorruptTable, "cannot write " + path);
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
    }

    static HashedTable load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(Err::CorruptTable, "cannot read " + path);
        Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return deserialize(data);
    }

private:
    std::vector<TableRecord> records_;
    bool sorted_ = false;
};

}  // namespace dnascreen
