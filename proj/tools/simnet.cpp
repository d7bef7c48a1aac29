// Scenario runner: executes a scripted multi-party scenario over the
// in-memory transport and emits the transcript as JSON lines.
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "dnascreen/group/ristretto.hpp"
#include "dnascreen/group/smallgroup.hpp"
#include "dnascreen/simnet.hpp"

using namespace dnascreen;

namespace {

template <class G>
int run_scenario(const Scenario& sc, const std::string& transcript_out) {
    Simnet<G> sim(sc);
    const Transcript& t = sim.run();
    std::string jsonl = transcript_to_jsonl(t);
    if (transcript_out.empty())
        std::cout << jsonl;
    else
        tools::write_file(transcript_out, jsonl);
    std::cerr << t.size() << " messages, " << sim.verdict_log().size()
              << " screen results\n";
    for (const auto& v : sim.verdict_log()) {
        std::string line = v.contains("error")
                               ? "error: " + v.at("error").template get<std::string>()
                               : "decision: " + v.at("decision").template get<std::string>();
        std::cerr << line << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic multi-party scenario harness"};
    app.require_subcommand(1);

    std::string scenario_path, transcript_out;
    auto* run_cmd = app.add_subcommand("run", "run a scenario");
    run_cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run_cmd->add_option("--transcript", transcript_out,
                        "write JSON-lines transcript here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        init_crypto();
        auto sc = Scenario::from_json(tools::read_json(scenario_path));
        if (sc.group == "ristretto")
            return run_scenario<Ristretto255>(sc, transcript_out);
        if (sc.group == "test10007")
            return run_scenario<TestGroup10007>(sc, transcript_out);
        throw Error(Err::ScenarioInvalid, "unknown group " + sc.group);
    } catch (const Error& e) {
        std::cerr << err_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ScenarioInvalid: " << e.what() << "\n";
        return 1;
    }
}
