// Officer-side approval: signs an exemption request into a one-time token.
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/certs.hpp"

using namespace dnascreen;

int main(int argc, char** argv) {
    CLI::App app{"approve an exemption list token"};

    std::string request_path, officer_cert_path, officer_key_path, chain_path,
        root_path, out;
    std::uint64_t now = 0;
    std::uint64_t seed = 0;

    app.add_option("--request", request_path)->required();
    app.add_option("--officer-cert", officer_cert_path)->required();
    app.add_option("--officer-key", officer_key_path)->required();
    app.add_option("--chain", chain_path,
                   "officer chain JSON array, leaf-first, ending at the root")
        ->required();
    app.add_option("--root", root_path)->required();
    app.add_option("--now", now);
    app.add_option("--seed", seed, "nonce RNG seed (0 = system entropy)");
    app.add_option("--out", out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        init_crypto();
        json rj = tools::read_json(request_path);
        EltRequest req;
        req.exemptions = rj.at("exemptions").get<std::vector<std::string>>();
        req.window_digests = rj.at("window_digests").get<std::vector<std::string>>();
        req.requester_fingerprint = rj.at("requester").get<std::string>();
        req.lab_scoped = rj.at("lab_scoped").get<bool>();
        req.shipping_address = rj.at("shipping_address").get<std::string>();
        req.contacts = NotificationContacts::from_json(rj.at("contacts"));
        req.not_before = rj.at("not_before").get<std::uint64_t>();
        req.not_after = rj.at("not_after").get<std::uint64_t>();

        CertAuthority officer{
            Certificate::from_json(tools::read_json(officer_cert_path)),
            tools::key_from_json(tools::read_json(officer_key_path))};
        auto chain = chain_from_json(tools::read_json(chain_path));
        auto root = Certificate::from_json(tools::read_json(root_path));

        std::mt19937_64 rng(seed ? seed : std::random_device{}());
        auto elt = create_and_approve_elt(req, officer, chain, root, now, rng);
        tools::write_file(out, elt.to_json().dump(2) + "\n");
        std::cout << "nonce " << elt.nonce << "\n";
    } catch (const Error& e) {
        std::cerr << err_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
