#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "dnascreen/sequence.hpp"

using namespace dnascreen;

TEST_CASE("fasta parsing and normalization") {
    auto r1 = parse_fasta(">a\nACGT");
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].id == "a");
    CHECK(r1[0].residues == "ACGT");

    auto r2 = parse_fasta(">a\nacgu");
    CHECK(r2[0].residues == "ACGT");

    CHECK_THROWS_WITH_AS(parse_fasta(">a\nAC!T"), doctest::Contains("line 2"), Error);

    auto multi = parse_fasta(">x\nACG\nT\n>y desc\n  aa\ncc\n");
    REQUIRE(multi.size() == 2);
    CHECK(multi[0].residues == "ACGT");
    CHECK(multi[1].id == "y desc");
    CHECK(multi[1].residues == "AACC");

    // ambiguity codes parse; windows over them are skipped downstream
    CHECK(parse_fasta(">n\nACNGT")[0].residues == "ACNGT");
}

TEST_CASE("reverse complement") {
    CHECK(reverse_complement("ACGT") == "ACGT");
    CHECK(reverse_complement("AAAC") == "GTTT");
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        std::string s;
        for (int j = 0; j < 50; ++j) s.push_back("ACGT"[rng() % 4]);
        CHECK(reverse_complement(reverse_complement(s)) == s);
    }
}

TEST_CASE("window enumeration counts") {
    std::string s42(42, 'A');
    for (size_t i = 0; i < s42.size(); ++i) s42[i] = "ACGT"[i % 4];
    CHECK(windows(s42, 42).size() == 1);
    CHECK(windows(s42, 42)[0].first == 0);
    CHECK(windows(std::string(41, 'A'), 42).empty());
    CHECK(windows(std::string(100, 'A'), 30).size() == 71);

    // property: counts match a naive enumerator, with ambiguity skips
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        size_t len = rng() % 500;
        std::string seq;
        for (size_t i = 0; i < len; ++i) seq.push_back("ACGTN"[rng() % 5]);
        for (size_t k : {size_t{30}, size_t{42}}) {
            size_t naive = 0;
            for (size_t off = 0; off + k <= seq.size(); ++off)
                if (seq.substr(off, k).find('N') == std::string::npos) ++naive;
            CHECK(windows(seq, k).size() == naive);
        }
    }
}

TEST_CASE("translation") {
    CHECK(translate("ATGGCT") == "MA");
    CHECK(translate("TAA") == "*");
    CHECK(translate("TAG") == "*");
    CHECK(translate("TGA") == "*");
    CHECK(translate("TGG") == "W");
    CHECK(translate("TTT") == "F");
    CHECK_THROWS_AS(translate("ACGT"), Error);

    std::mt19937_64 rng(3);
    std::string mer60;
    for (int i = 0; i < 60; ++i) mer60.push_back("ACGT"[rng() % 4]);
    CHECK(translate(mer60).size() == 20);
}

TEST_CASE("base permutations") {
    auto perms = base_permutations("AAA");
    CHECK(perms.size() == 24);
    CHECK(perms[0] == "AAA");  // identity first

    // A<->C swap maps AAA to CCC
    bool found = false;
    for (const auto& p : base_permutations("AAA"))
        if (p == "CCC") found = true;
    CHECK(found);

    // bijective relabeling: inverse recovers the input
    auto table = base_permutation_table();
    std::string input = "ACGTTGCA";
    for (const auto& image : table) {
        std::string mapped = apply_base_permutation(input, image);
        std::string inverse(4, ' ');
        const std::string bases = "ACGT";
        for (int i = 0; i < 4; ++i) inverse[bases.find(image[i])] = bases[i];
        CHECK(apply_base_permutation(mapped, inverse) == input);
    }

    // closure: composing any two permutations yields another in the list
    std::set<std::string> images(table.begin(), table.end());
    for (const auto& a : table)
        for (const auto& b : table)
            CHECK(images.count(apply_base_permutation(a, b)) == 1);
}

TEST_CASE("shannon entropy") {
    CHECK(shannon_entropy(std::string(30, 'A')) == doctest::Approx(0.0));
    CHECK(shannon_entropy(std::string(15, 'A') + std::string(15, 'C')) == doctest::Approx(1.0));
    std::string tri = std::string(10, 'A') + std::string(10, 'C') + std::string(10, 'G');
    CHECK(shannon_entropy(tri) == doctest::Approx(std::log2(3.0)));
    CHECK(shannon_entropy(tri) < 1.6);
}

TEST_CASE("query window universe") {
    SequenceRecord rec{"r", ""};
    std::mt19937_64 rng(4);
    for (int i = 0; i < 42; ++i) rec.residues.push_back("ACGT"[rng() % 4]);

    auto ws = query_windows(rec, ScreeningMode::provider);
    size_t dna30 = 0, dna42 = 0, aa20 = 0;
    for (const auto& w : ws.windows) {
        if (w.kind == WindowKind::dna30) ++dna30;
        if (w.kind == WindowKind::dna42) ++dna42;
        if (w.kind == WindowKind::aa20) ++aa20;
    }
    CHECK(dna30 == 13);
    CHECK(dna42 == 1);
    CHECK(aa20 == 0);  // below the 60-base frame minimum

    auto bench = query_windows(rec, ScreeningMode::benchtop);
    size_t bench_dna = 0;
    for (const auto& w : bench.windows)
        if (w.kind != WindowKind::aa20) ++bench_dna;
    CHECK(bench_dna == 24 * (dna30 + dna42));

    SequenceRecord empty{"e", ""};
    CHECK(query_windows(empty, ScreeningMode::provider).windows.empty());
}

TEST_CASE("six reading frames cover long sequences") {
    SequenceRecord rec{"r", ""};
    std::mt19937_64 rng(5);
    for (int i = 0; i < 120; ++i) rec.residues.push_back("ACGT"[rng() % 4]);
    auto ws = query_windows(rec, ScreeningMode::provider);

    std::set<std::pair<int, int>> frames_seen;  // (strand, frame)
    for (const auto& w : ws.windows)
        if (w.kind == WindowKind::aa20)
            frames_seen.insert({static_cast<int>(w.origin.strand), *w.origin.frame});
    CHECK(frames_seen.size() == 6);

    // codon spans of the six frames cover every base position (length >= 62)
    std::set<size_t> covered;
    for (int frame = 0; frame < 3; ++frame) {
        size_t usable = (rec.residues.size() - frame) / 3 * 3;
        for (size_t i = frame; i < frame + usable; ++i) {
            covered.insert(i);                                // forward frame
            covered.insert(rec.residues.size() - 1 - i);      // reverse frame mirror
        }
    }
    CHECK(covered.size() == rec.residues.size());
}

TEST_CASE("query_windows is deterministic") {
    SequenceRecord rec{"r", ""};
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) rec.residues.push_back("ACGT"[rng() % 4]);
    auto a = dump_window_set(query_windows(rec, ScreeningMode::benchtop));
    auto b = dump_window_set(query_windows(rec, ScreeningMode::benchtop));
    CHECK(a == b);
    CHECK(!a.empty());
}
