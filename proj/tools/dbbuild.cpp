// Database builder CLI: extracts hazard windows, generates variants, filters,
// curates against a harmless corpus, hashes obliviously through the key
// servers (or a local key for fixtures), and writes the table file.
//
// Hazard directory: one JSON file per source —
//   {"accession": "...", "kind": "virus|toxin|toxin-gene|microbe-nontoxic",
//    "residues": "ACGT..." (or "fasta": "file"), "region_tags": [...],
//    "common": false, "defend_mutants": true, "genus": "..."}
// Corpus directory: one JSON file per record —
//   {"accession": "...", "description": "...", "residues": "...", "genus": "..."}
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/dbbuild.hpp"
#include "dnascreen/doprf.hpp"
#include "dnascreen/group/ristretto.hpp"
#include "dnascreen/http.hpp"
#include "dnascreen/keyserver.hpp"

using namespace dnascreen;
namespace fs = std::filesystem;

namespace {

std::string residues_of(const json& j, const fs::path& dir) {
    if (j.contains("residues")) return j.at("residues").get<std::string>();
    auto records = parse_fasta(
        tools::read_file((dir / j.at("fasta").get<std::string>()).string()));
    std::string out;
    for (const auto& r : records) out += r.residues;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"screening database builder"};

    std::string hazards_dir, corpus_dir, out_path, keyservers_spec, key_id = "k1";
    std::uint64_t version = 1, seed = 0, epoch = 0, local_key = 0;
    std::uint32_t n = 0, t = 0;
    bool stopgap = false;
    int blosum_floor = kDefaultBlosumFloor;
    int threshold = kDefaultRelatednessThreshold;

    app.add_option("--hazards", hazards_dir)->required();
    app.add_option("--corpus", corpus_dir);
    app.add_option("--out", out_path)->required();
    app.add_option("--version", version)->required();
    app.add_option("--seed", seed)->required();
    app.add_flag("--stopgap", stopgap, "wild-type 30-mers only");
    app.add_option("--keyservers", keyservers_spec, "INDEX=HOST:PORT,...");
    app.add_option("--n", n);
    app.add_option("--t", t);
    app.add_option("--key-id", key_id);
    app.add_option("--epoch", epoch);
    app.add_option("--local-key", local_key,
                   "fixture mode: hash directly with this key seed instead of "
                   "the distributed protocol");
    app.add_option("--blosum-floor", blosum_floor);
    app.add_option("--relatedness-threshold", threshold);

    CLI11_PARSE(app, argc, argv);

    try {
        init_crypto();

        std::vector<HazardSource> sources;
        for (const auto& entry : fs::directory_iterator(hazards_dir)) {
            if (entry.path().extension() != ".json") continue;
            json j = tools::read_json(entry.path().string());
            HazardSource src;
            src.accession = j.at("accession").get<std::string>();
            src.kind = hazard_kind_from_name(j.at("kind").get<std::string>());
            src.residues = residues_of(j, entry.path().parent_path());
            if (j.contains("region_tags"))
                src.region_tags = j.at("region_tags").get<std::set<std::string>>();
            src.common = j.value("common", false);
            if (j.contains("defend_mutants"))
                src.defend_mutants = j.at("defend_mutants").get<bool>();
            src.genus = j.value("genus", std::string());
            sources.push_back(std::move(src));
        }

        HarmlessCorpus corpus;
        std::map<std::string, std::string> hazard_genus;
        for (const auto& s : sources)
            if (!s.genus.empty()) hazard_genus[s.accession] = s.genus;
        if (!corpus_dir.empty()) {
            for (const auto& entry : fs::directory_iterator(corpus_dir)) {
                if (entry.path().extension() != ".json") continue;
                json j = tools::read_json(entry.path().string());
                CorpusRecord rec;
                rec.accession = j.at("accession").get<std::string>();
                rec.description = j.value("description", std::string());
                rec.residues = residues_of(j, entry.path().parent_path());
                rec.genus = j.value("genus", std::string());
                corpus.records.push_back(std::move(rec));
            }
        }

        BuildOptions opts;
        opts.seed = seed;
        opts.blosum_floor = blosum_floor;
        opts.relatedness_threshold = threshold;
        opts.stopgap = stopgap;

        std::vector<PlainEntry> entries;
        if (stopgap) {
            for (const auto& src : sources) {
                auto wild = extract_hazard_windows(src);
                for (auto& e : wild)
                    if (e.window.kind == WindowKind::dna30) entries.push_back(e);
            }
            entries = entropy_filter(std::move(entries));
        } else {
            entries = generate_entries(sources, opts);
        }
        entries = curate(entries, corpus, threshold, opts.curation_keywords,
                         hazard_genus);

        HashWindowsFn hasher;
        if (!keyservers_spec.empty()) {
            if (n == 0 || t == 0)
                throw Error(Err::BadConfig, "--keyservers requires --n and --t");
            auto addrs = tools::parse_keyserver_addrs(keyservers_spec);
            auto net = std::make_shared<HttpChannel>(addrs);
            std::vector<std::uint32_t> available;
            for (const auto& [name, _] : addrs)
                available.push_back(std::uint32_t(std::stoul(name.substr(2))));
            SharingConfig cfg{n, t};
            hasher = [net, available, cfg, key_id, epoch,
                      seed](const std::vector<Bytes>& inputs) {
                std::mt19937_64 rng(seed + 1);
                EvalServerFn<Ristretto255> call =
                    [&](std::uint32_t idx, const std::vector<std::uint32_t>& L,
                        const std::vector<RistrettoElement>& points) {
                        json pts = json::array();
                        for (const auto& p : points)
                            pts.push_back(to_base64(p.encode()));
                        json resp = net->call(
                            "builder", keyserver_name(idx), "/eval",
                            json{{"protocol", kProtocolVersion},
                                 {"client", "builder"},
                                 {"key_id", key_id},
                                 {"epoch", epoch},
                                 {"L", L},
                                 {"points", pts}});
                        std::vector<RistrettoElement> out;
                        for (const auto& p : resp.at("points"))
                            out.push_back(RistrettoElement::decode(
                                from_base64(p.get<std::string>())));
                        return out;
                    };
                std::vector<Bytes> hashes;
                auto outs = doprf_eval_batch<Ristretto255>(inputs, available,
                                                           cfg, call, rng);
                for (auto& o : outs) hashes.push_back(o.encode());
                return hashes;
            };
        } else {
            // Fixture mode: keyed hash computed locally.
            RistrettoScalar k = RistrettoScalar::from_u64(local_key);
            if (k.is_zero())
                throw Error(Err::BadConfig,
                            "need --keyservers or a nonzero --local-key");
            hasher = [k](const std::vector<Bytes>& inputs) {
                std::vector<Bytes> out;
                for (const auto& in : inputs)
                    out.push_back(Ristretto255::hash_to_group(in).exp(k).encode());
                return out;
            };
        }

        auto table = build_hashed_table(entries, hasher, version, key_id, epoch);
        table.save(out_path);
        std::cout << "wrote " << table.records().size() << " entries (v"
                  << table.version << ", key " << table.key_id << ", epoch "
                  << table.epoch << ") to " << out_path << "\n";
    } catch (const Error& e) {
        std::cerr << err_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
