// HTTP key-server daemon. Round sub-shares reach peers through the same
// HTTP endpoints, so a fleet of these processes can run DKG, resharing, and
// rotation with no extra plumbing.
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/group/ristretto.hpp"
#include "dnascreen/http.hpp"
#include "dnascreen/keyserver.hpp"

using namespace dnascreen;

int main(int argc, char** argv) {
    CLI::App app{"key-server daemon"};

    std::uint32_t index = 0, n = 0, t = 0;
    int port = 0;
    std::string peers_spec;
    std::uint64_t seed = 0;
    double rate_capacity = kDefaultRateCapacity;
    double rate_refill = kDefaultRateRefill;

    app.add_option("--index", index)->required();
    app.add_option("--n", n)->required();
    app.add_option("--t", t)->required();
    app.add_option("--port", port)->required();
    app.add_option("--peers", peers_spec,
                   "all server addresses as INDEX=HOST:PORT,... (self included)")
        ->required();
    app.add_option("--seed", seed, "round RNG seed (0 = system entropy)");
    app.add_option("--rate-capacity", rate_capacity);
    app.add_option("--rate-refill", rate_refill);

    CLI11_PARSE(app, argc, argv);

    try {
        init_crypto();
        HttpChannel net(tools::parse_keyserver_addrs(peers_spec));
        Keyserver<Ristretto255> ks(index, SharingConfig{n, t}, &net,
                                   seed ? seed : std::random_device{}(),
                                   rate_capacity, rate_refill);
        ks.set_clock([] {
            return std::chrono::duration<double>(
                       std::chrono::steady_clock::now().time_since_epoch())
                .count();
        });

        httplib::Server srv;
        bind_handler(srv, [&ks](const std::string& path, const json& body) {
            return ks.handle(path, body);
        });
        std::cout << "keyserver " << index << " listening on :" << port << "\n";
        srv.listen("0.0.0.0", port);
    } catch (const Error& e) {
        std::cerr << err_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
