// Database server daemon: serves /screen, /version, /admin/swap, and
// /admin/rekey over HTTP.
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/group/ristretto.hpp"
#include "dnascreen/hashdb.hpp"
#include "dnascreen/http.hpp"

using namespace dnascreen;

int main(int argc, char** argv) {
    CLI::App app{"screening database daemon"};

    std::string table_path, root_cert_path, receipt_key_path, peers_spec,
        nonce_log, notify_log;
    int port = 0;
    std::uint64_t seed = 0;

    app.add_option("--table", table_path)->required();
    app.add_option("--root-cert", root_cert_path)->required();
    app.add_option("--receipt-key", receipt_key_path,
                   "signing key JSON; generated fresh when omitted");
    app.add_option("--peers", peers_spec,
                   "key-server addresses (INDEX=HOST:PORT,...), for re-keying");
    app.add_option("--port", port)->required();
    app.add_option("--seed", seed, "blinding RNG seed (0 = system entropy)");
    app.add_option("--nonce-log", nonce_log, "consumed-nonce persistence file");
    app.add_option("--notify-log", notify_log, "notification JSON-lines file");

    CLI11_PARSE(app, argc, argv);

    try {
        init_crypto();
        auto root = Certificate::from_json(tools::read_json(root_cert_path));
        SigningKey receipt_key =
            receipt_key_path.empty()
                ? SigningKey::generate()
                : tools::key_from_json(tools::read_json(receipt_key_path));

        std::unique_ptr<HttpChannel> net;
        if (!peers_spec.empty())
            net = std::make_unique<HttpChannel>(
                tools::parse_keyserver_addrs(peers_spec));

        HashDbServer<Ristretto255> db(root, receipt_key, net.get(),
                                      seed ? seed : std::random_device{}(),
                                      nonce_log, notify_log);
        db.set_clock([] {
            return std::uint64_t(std::chrono::duration_cast<std::chrono::seconds>(
                                     std::chrono::system_clock::now().time_since_epoch())
                                     .count());
        });
        db.install_table(HashedTable::load(table_path));

        httplib::Server srv;
        bind_handler(srv, [&db](const std::string& path, const json& body) {
            return db.handle(path, body);
        });
        std::cout << "database listening on :" << port << "\n"
                  << "receipt public key " << to_base64(receipt_key.public_key)
                  << "\n";
        srv.listen("0.0.0.0", port);
    } catch (const Error& e) {
        std::cerr << err_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
