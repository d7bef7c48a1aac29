#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "dnascreen/dbbuild.hpp"
#include "dnascreen/group/ristretto.hpp"
#include "dnascreen/group/smallgroup.hpp"

using namespace dnascreen;

namespace {

std::string random_dna(std::mt19937_64& rng, size_t len) {
    std::string s;
    for (size_t i = 0; i < len; ++i) s.push_back("ACGT"[rng() % 4]);
    return s;
}

// Direct PRF oracle standing in for the keyserver quorum.
HashWindowsFn oracle_hasher(TestGroup10007::Scalar key) {
    return [key](const std::vector<Bytes>& inputs) {
        std::vector<Bytes> out;
        for (const auto& in : inputs)
            out.push_back(TestGroup10007::hash_to_group(in).exp(key).encode());
        return out;
    };
}

}  // namespace

TEST_CASE("hazard window extraction") {
    std::mt19937_64 rng(1);
    HazardSource src{"HZ1", random_dna(rng, 60), HazardKind::virus, {"US"}, false};
    auto entries = extract_hazard_windows(src);

    size_t dna30 = 0, dna42 = 0, aa20 = 0;
    for (const auto& e : entries) {
        if (e.window.kind == WindowKind::dna30) ++dna30;
        if (e.window.kind == WindowKind::dna42) ++dna42;
        if (e.window.kind == WindowKind::aa20) ++aa20;
        CHECK(e.variant_kind == VariantKind::wild_type);
        CHECK(e.tags.count("US") == 1);
    }
    // both strands, deduplicated; a random 60-mer has no strand overlap
    CHECK(dna30 == 2 * 31);
    CHECK(dna42 == 2 * 19);
    CHECK(aa20 == 2 * 1);

    HazardSource tiny{"HZ2", random_dna(rng, 29), HazardKind::virus, {"US"}, false};
    CHECK_THROWS_AS(extract_hazard_windows(tiny), Error);

    // palindromic source: strands coincide, duplicates collapse
    std::string half = random_dna(rng, 30);
    HazardSource pal{"HZ3", half + reverse_complement(half), HazardKind::virus, {"US"}, false};
    auto pal_entries = extract_hazard_windows(pal);
    std::set<std::pair<WindowKind, std::string>> uniq;
    for (const auto& e : pal_entries) CHECK(uniq.insert({e.window.kind, e.window.payload}).second);
}

TEST_CASE("single mutants of a 42-mer") {
    std::mt19937_64 rng(2);
    PlainEntry entry;
    entry.window.kind = WindowKind::dna42;
    entry.window.payload = random_dna(rng, 42);
    entry.hazard_accession = "HZ";
    entry.tags = {"US", "EU"};

    auto muts = single_mutants_42(entry);
    CHECK(muts.size() == 126);
    for (const auto& m : muts) {
        CHECK(m.window.payload != entry.window.payload);
        size_t dist = 0;
        for (size_t i = 0; i < 42; ++i)
            if (m.window.payload[i] != entry.window.payload[i]) ++dist;
        CHECK(dist == 1);
        CHECK(m.variant_kind == VariantKind::dna_mutant);
        CHECK(m.tags == entry.tags);  // tags inherited exactly
    }

    PlainEntry polyA = entry;
    polyA.window.payload = std::string(42, 'A');
    auto pm = single_mutants_42(polyA);
    bool found = false;
    for (const auto& m : pm)
        if (m.window.payload == "C" + std::string(41, 'A')) found = true;
    CHECK(found);
}

TEST_CASE("peptide variants under a BLOSUM62 floor") {
    PlainEntry entry;
    entry.window.kind = WindowKind::aa20;
    entry.window.payload = "WAAAAAAAAAAAAAAAAAAA";
    entry.hazard_accession = "HZ";

    CHECK(peptide_variants(entry, 1000).empty());

    auto vars = peptide_variants(entry, 0);
    bool w_to_y = false, w_to_a = false, self = false;
    for (const auto& v : vars) {
        CHECK(v.variant_kind == VariantKind::peptide_variant);
        if (v.window.payload[0] == 'Y' && v.window.payload.substr(1) == entry.window.payload.substr(1))
            w_to_y = true;
        if (v.window.payload[0] == 'A' && v.window.payload.substr(1) == entry.window.payload.substr(1))
            w_to_a = true;
        if (v.window.payload == entry.window.payload) self = true;
    }
    CHECK(w_to_y);        // BLOSUM62 W->Y = 2 >= 0
    CHECK_FALSE(w_to_a);  // W->A = -3 < 0
    CHECK_FALSE(self);    // diagonal excluded
    CHECK(blosum62_score('W', 'Y') == 2);
    CHECK(blosum62_score('W', 'A') == -3);
}

TEST_CASE("regulated-but-pass sampling") {
    std::mt19937_64 rng(3);
    HazardSource src{"RP1", random_dna(rng, 420), HazardKind::microbe_nontoxic, {"US"}, false};

    auto a = regulated_pass_sample(src, 11);
    auto b = regulated_pass_sample(src, 11);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].window.payload == b[i].window.payload);

    CHECK(a.size() >= 9);
    CHECK(a.size() <= 10);
    for (const auto& e : a) CHECK(e.tags.count(kTagRegulatedButPass) == 1);

    HazardSource tiny{"RP2", random_dna(rng, 41), HazardKind::microbe_nontoxic, {"US"}, false};
    CHECK(regulated_pass_sample(tiny, 1).empty());
}

TEST_CASE("entropy filter") {
    auto make_entry = [](std::string payload, WindowKind kind) {
        PlainEntry e;
        e.window.kind = kind;
        e.window.payload = std::move(payload);
        return e;
    };

    std::vector<PlainEntry> entries;
    entries.push_back(make_entry(std::string(42, 'A'), WindowKind::dna42));  // entropy 0
    entries.push_back(make_entry(std::string(10, 'A') + std::string(10, 'C') + std::string(10, 'G'),
                                 WindowKind::dna30));  // log2(3) < 1.6
    entries.push_back(make_entry(std::string(20, 'Q'), WindowKind::aa20));   // peptides unaffected

    std::mt19937_64 rng(4);
    size_t kept_random = 0;
    const int samples = 10000;
    for (int i = 0; i < samples; ++i) {
        auto e = make_entry(random_dna(rng, 42), WindowKind::dna42);
        if (shannon_entropy(e.window.payload) >= kEntropyFloor) ++kept_random;
        entries.push_back(std::move(e));
    }

    auto kept = entropy_filter(entries);
    size_t aa = 0;
    for (const auto& e : kept) {
        if (e.window.kind == WindowKind::aa20) { ++aa; continue; }
        CHECK(shannon_entropy(e.window.payload) >= kEntropyFloor);
    }
    CHECK(aa == 1);
    CHECK(kept.size() == kept_random + 1);
    CHECK(static_cast<double>(kept_random) / samples > 0.99);
}

TEST_CASE("curation subtracts harmless matches") {
    std::mt19937_64 rng(5);
    HazardSource hz{"HZ1", random_dna(rng, 200), HazardKind::virus, {"US"}, false};
    auto entries = extract_hazard_windows(hz);
    const size_t before = entries.size();

    SUBCASE("empty corpus leaves entries unchanged") {
        CHECK(curate(entries, {}, 5).size() == before);
    }

    SUBCASE("identical record is ignored as too related") {
        HarmlessCorpus corpus{{{"AN1", "some harmless rna", hz.residues, ""}}};
        CHECK(curate(entries, corpus, 0).size() == before);
    }

    SUBCASE("keyword-matching records are excluded from subtraction") {
        std::string shared = hz.residues.substr(10, 42);
        HarmlessCorpus corpus{{{"AN2", "Synthetic construct clone", shared, ""}}};
        CHECK(curate(entries, corpus, 100).size() == before);
    }

    SUBCASE("genus-matching records are excluded from subtraction") {
        std::string shared = hz.residues.substr(10, 42);
        HarmlessCorpus corpus{{{"AN3", "environmental isolate", shared, "Morbillivirus"}}};
        auto out = curate(entries, corpus, 100, kDefaultCurationKeywords,
                          {{"HZ1", "Morbillivirus"}});
        CHECK(out.size() == before);
    }

    SUBCASE("sparse matches are removed; oracle agreement") {
        // corpus record carries one 42-bp fragment of the hazard
        std::string shared = hz.residues.substr(50, 42);
        HarmlessCorpus corpus{{{"AN4", "harmless housekeeping gene", shared, ""}}};
        auto out = curate(entries, corpus, 100);

        // naive quadratic oracle over the corpus record's windows
        auto rec_windows = detail::corpus_window_set(corpus.records[0]);
        size_t expected_removed = 0;
        for (const auto& e : entries)
            if (rec_windows.count({e.window.kind, e.window.payload})) ++expected_removed;
        CHECK(expected_removed > 0);
        CHECK(out.size() == before - expected_removed);
        for (const auto& e : out)
            CHECK_FALSE(rec_windows.count({e.window.kind, e.window.payload}));
    }
}

TEST_CASE("hashed table build, lookup, and file round-trip") {
    std::mt19937_64 rng(6);
    HazardSource hz{"HZ1", random_dna(rng, 150), HazardKind::toxin_gene, {"US"}, false};
    auto entries = generate_entries({hz}, {});
    CHECK(entries.size() > 0);

    auto hasher = oracle_hasher(TestGroup10007::Scalar(777));
    auto table = build_hashed_table(entries, hasher, 1, "k1", 0);
    CHECK(table.size() <= entries.size());
    CHECK(table.size() > 0);

    // round-trip: recomputing a built entry's hash finds its metadata
    auto probe = hasher({window_hash_input(entries[0].window.kind, entries[0].window.payload)});
    auto meta = table.lookup(probe[0]);
    REQUIRE(meta.has_value());
    CHECK(meta->accession == "HZ1");

    // a rotated key shares no hash bytes (in the production group, where the
    // output space is large enough for the check to be meaningful)
    auto big_hasher = [](RistrettoScalar key) {
        return HashWindowsFn([key](const std::vector<Bytes>& inputs) {
            std::vector<Bytes> out;
            for (const auto& in : inputs)
                out.push_back(Ristretto255::hash_to_group(in).exp(key).encode());
            return out;
        });
    };
    auto t_old = build_hashed_table(entries, big_hasher(RistrettoScalar::from_u64(777)), 1, "k1", 0);
    auto t_new = build_hashed_table(entries, big_hasher(RistrettoScalar::from_u64(778)), 2, "k2", 1);
    size_t survivors = 0;
    for (const auto& r : t_new.records())
        if (t_old.contains(r.hash)) ++survivors;
    CHECK(survivors == 0);

    // serialize / deserialize
    auto path = std::filesystem::temp_directory_path() / "dnascreen_table_test.bin";
    table.save(path.string());
    auto loaded = HashedTable::load(path.string());
    CHECK(loaded.size() == table.size());
    CHECK(loaded.version == table.version);
    CHECK(loaded.key_id == table.key_id);
    CHECK(loaded.lookup(probe[0])->accession == "HZ1");
    std::filesystem::remove(path);

    Bytes garbage = to_bytes("not a table");
    CHECK_THROWS_AS(HashedTable::deserialize(garbage), Error);
}

TEST_CASE("pipeline determinism") {
    std::mt19937_64 rng(7);
    std::vector<HazardSource> sources{
        {"HZ1", random_dna(rng, 300), HazardKind::toxin_gene, {"US"}, false},
        {"HZ2", random_dna(rng, 150), HazardKind::virus, {"EU"}, false},
        {"RP1", random_dna(rng, 500), HazardKind::microbe_nontoxic, {"US"}, false},
    };
    BuildOptions opts;
    opts.seed = 42;
    auto hasher = oracle_hasher(TestGroup10007::Scalar(55));
    auto t1 = build_hashed_table(generate_entries(sources, opts), hasher, 1, "k", 0);
    auto t2 = build_hashed_table(generate_entries(sources, opts), hasher, 1, "k", 0);
    CHECK(t1.serialize() == t2.serialize());
}

TEST_CASE("incremental stopgap add and full-mode replacement") {
    std::mt19937_64 rng(8);
    auto hasher = oracle_hasher(TestGroup10007::Scalar(99));
    HazardSource base{"HZ1", random_dna(rng, 120), HazardKind::virus, {"US"}, false};
    auto table = build_hashed_table(generate_entries({base}, {}), hasher, 1, "k", 0);

    HazardSource fresh{"NEW1", random_dna(rng, 100), HazardKind::virus, {"US"}, false};
    auto updated = incremental_add(fresh, table, hasher, 0, /*stopgap=*/true);
    CHECK(updated.version == 2);

    // 71 forward + 71 reverse 30-mers, deduplicated (disjoint for random DNA),
    // possibly a few dropped by the entropy filter
    size_t new_dna30 = 0;
    for (const auto& r : updated.records())
        if (r.meta.accession == "NEW1") {
            CHECK(r.meta.kind == WindowKind::dna30);
            ++new_dna30;
        }
    CHECK(new_dna30 <= 142);
    CHECK(new_dna30 > 130);

    // re-adding the same source leaves content unchanged but bumps version
    auto again = incremental_add(fresh, updated, hasher, 0, true);
    CHECK(again.size() == updated.size());
    CHECK(again.version == 3);

    // full-mode replacement drops the stopgap dna30 entries and adds the rest
    auto full = incremental_add(fresh, updated, hasher, 0, /*stopgap=*/false);
    size_t wt42 = 0;
    for (const auto& r : full.records())
        if (r.meta.accession == "NEW1" && r.meta.kind == WindowKind::dna42) ++wt42;
    CHECK(wt42 > 0);

    CHECK_THROWS_AS(incremental_add(fresh, updated, hasher, 5, true), Error);
}

TEST_CASE("no low-entropy DNA entry survives a build") {
    std::mt19937_64 rng(9);
    std::string seq = random_dna(rng, 100) + std::string(50, 'A') + random_dna(rng, 100);
    HazardSource hz{"HZ1", seq, HazardKind::virus, {"US"}, false};
    auto entries = generate_entries({hz}, {});
    for (const auto& e : entries)
        if (e.window.kind != WindowKind::aa20)
            CHECK(shannon_entropy(e.window.payload) >= kEntropyFloor);
}
