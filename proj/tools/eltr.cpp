// Exemption request builder: produces the request document a biosafety
// officer later approves with eltsign.
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/certs.hpp"

using namespace dnascreen;

int main(int argc, char** argv) {
    CLI::App app{"exemption list token request"};

    std::vector<std::string> exemptions, digests;
    std::string requester, address, pi, officer, legal, out;
    bool lab_scoped = false;
    std::uint64_t not_before = 0, not_after = 1ull << 40;

    app.add_option("--exempt", exemptions, "hazard accession (repeatable)");
    app.add_option("--digest", digests, "raw-sequence window digest (repeatable)");
    app.add_option("--requester", requester, "requester certificate fingerprint")
        ->required();
    app.add_flag("--lab-scoped", lab_scoped,
                 "bind to the lab certificate; any member may present");
    app.add_option("--address", address, "shipping/delivery address");
    app.add_option("--pi", pi, "principal investigator contact")->required();
    app.add_option("--officer", officer, "biosafety officer contact")->required();
    app.add_option("--legal", legal, "institutional legal contact")->required();
    app.add_option("--not-before", not_before);
    app.add_option("--not-after", not_after);
    app.add_option("--out", out)->required();

    CLI11_PARSE(app, argc, argv);

    if (exemptions.empty() && digests.empty()) {
        std::cerr << "EmptyExemptions: nothing to exempt\n";
        return 1;
    }
    json req{{"exemptions", exemptions},
             {"window_digests", digests},
             {"requester", requester},
             {"lab_scoped", lab_scoped},
             {"shipping_address", address},
             {"contacts", {{"pi", pi}, {"officer", officer}, {"legal", legal}}},
             {"not_before", not_before},
             {"not_after", not_after}};
    tools::write_file(out, req.dump(2) + "\n");
    return 0;
}
