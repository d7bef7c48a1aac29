// Certificate generation: self-signed roots and role-checked issuance.
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/certs.hpp"

using namespace dnascreen;

int main(int argc, char** argv) {
    CLI::App app{"certificate generation"};
    app.require_subcommand(1);

    std::string subject, cert_out, key_out;
    std::uint64_t not_before = 0, not_after = 1ull << 40, now = 0;

    auto* root_cmd = app.add_subcommand("root", "create a self-signed trust root");
    root_cmd->add_option("--subject", subject)->required();
    root_cmd->add_option("--not-before", not_before);
    root_cmd->add_option("--not-after", not_after);
    root_cmd->add_option("--cert-out", cert_out)->required();
    root_cmd->add_option("--key-out", key_out)->required();

    std::string issuer_cert_path, issuer_key_path, role_name_str;
    auto* issue_cmd = app.add_subcommand("issue", "issue a certificate");
    issue_cmd->add_option("--issuer-cert", issuer_cert_path)->required();
    issue_cmd->add_option("--issuer-key", issuer_key_path)->required();
    issue_cmd->add_option("--role", role_name_str)->required();
    issue_cmd->add_option("--subject", subject)->required();
    issue_cmd->add_option("--not-before", not_before);
    issue_cmd->add_option("--not-after", not_after);
    issue_cmd->add_option("--now", now);
    issue_cmd->add_option("--cert-out", cert_out)->required();
    issue_cmd->add_option("--key-out", key_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        init_crypto();
        if (root_cmd->parsed()) {
            auto key = SigningKey::generate();
            auto ca = make_root(subject, key, not_before, not_after);
            tools::write_file(cert_out, ca.cert.to_json().dump(2) + "\n");
            tools::write_file(key_out, tools::key_to_json(key).dump(2) + "\n");
            std::cout << "fingerprint " << ca.cert.fingerprint() << "\n";
        } else {
            CertAuthority issuer{
                Certificate::from_json(tools::read_json(issuer_cert_path)),
                tools::key_from_json(tools::read_json(issuer_key_path))};
            auto key = SigningKey::generate();
            auto cert = issue_certificate(issuer, subject,
                                          role_from_name(role_name_str),
                                          key.public_key, not_before, not_after, now);
            tools::write_file(cert_out, cert.to_json().dump(2) + "\n");
            tools::write_file(key_out, tools::key_to_json(key).dump(2) + "\n");
            std::cout << "fingerprint " << cert.fingerprint() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << err_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
