// Screening client. Exit codes: 0 accepted, 2 alert, 3 denied, >3 errors.
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/client.hpp"
#include "dnascreen/group/ristretto.hpp"
#include "dnascreen/http.hpp"

using namespace dnascreen;

int main(int argc, char** argv) {
    CLI::App app{"sequence screening client"};
    app.require_subcommand(1);

    std::string config_path, fasta_path, elt_path, mode_str, format;
    auto* screen_cmd = app.add_subcommand("screen", "screen a FASTA order");
    screen_cmd->add_option("--config", config_path, "client config JSON")->required();
    screen_cmd->add_option("--fasta", fasta_path)->required();
    screen_cmd->add_option("--elt", elt_path, "exemption token JSON");
    screen_cmd->add_option("--mode", mode_str, "provider|benchtop");
    screen_cmd->add_option("--format", format, "json|text");

    CLI11_PARSE(app, argc, argv);

    try {
        init_crypto();
        json cj = tools::read_json(config_path);

        ClientConfig cfg;
        cfg.n = cj.at("n").get<std::uint32_t>();
        cfg.t = cj.at("t").get<std::uint32_t>();
        cfg.region = cj.at("region").get<std::string>();
        cfg.mode = cj.value("mode", std::string("provider")) == "benchtop"
                       ? ScreeningMode::benchtop
                       : ScreeningMode::provider;
        cfg.batch_size = cj.value("batch_size", std::size_t{4096});
        cfg.format = cj.value("format", std::string("json"));
        cfg.receipt_store = cj.value("receipt_store", std::string());
        cfg.seed = cj.value("seed", std::uint64_t{0});
        cfg.cert_chain =
            chain_from_json(tools::read_json(cj.at("cert_chain").get<std::string>()));

        std::map<std::string, std::string> addrs;
        for (const auto& [idx, addr] :
             cj.at("keyservers").get<std::map<std::string, std::string>>()) {
            addrs["ks" + idx] = addr;
            cfg.keyservers.push_back(std::uint32_t(std::stoul(idx)));
        }
        std::sort(cfg.keyservers.begin(), cfg.keyservers.end());
        addrs[kHashDbName] = cj.at("database").get<std::string>();

        std::string elt_file = !elt_path.empty()
                                   ? elt_path
                                   : cj.value("elt", std::string());
        if (!elt_file.empty())
            cfg.elt = ExemptionListToken::from_json(tools::read_json(elt_file));
        if (!mode_str.empty())
            cfg.mode = mode_str == "benchtop" ? ScreeningMode::benchtop
                                              : ScreeningMode::provider;
        if (!format.empty()) cfg.format = format;

        HttpChannel net(addrs);
        auto report = screen_file<Ristretto255>(fasta_path, cfg, net);
        std::cout << render_report(report, cfg.format);
        return exit_code_for(report.decision);
    } catch (const Error& e) {
        std::cerr << err_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOtherError;
    }
}
