// trailforge-mockadapter: deterministic adapter speaking the
// subprocess-lines protocol (one JSON envelope per line on stdin/stdout).
// Backs every adapter kind with the library's mock behaviors so full
// pipeline runs work offline.

#include "trailforge/adapters.hpp"
#include "trailforge/errors.hpp"
#include "trailforge/jsonio.hpp"
#include "trailforge/mocks.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

using namespace trailforge;

int main(int argc, char** argv) {
    CLI::App app{"trailforge-mockadapter"};
    std::string kind_name;
    long long seed = 0;
    std::string fixtures_dir;
    int die_after = -1;  // test hook: exit after N responses
    app.add_option("--kind", kind_name, "Adapter kind to serve")->required();
    app.add_option("--seed", seed, "Determinism seed");
    app.add_option("--fixtures-dir", fixtures_dir, "Cue sheets for asr/vad replay");
    app.add_option("--die-after", die_after)->group("");  // hidden
    CLI11_PARSE(app, argc, argv);

    AdapterKind kind;
    try {
        kind = adapter_kind_from_string(kind_name);
    } catch (const Error& e) {
        fprintf(stderr, "%s\n", e.what());
        return 2;
    }
    MockOptions opts;
    opts.seed = seed;
    if (!fixtures_dir.empty()) opts.fixtures_dir = fixtures_dir;

    int responses = 0;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        json response;
        try {
            json envelope = json::parse(line);
            response["id"] = envelope.value("id", "");
            const std::string task = envelope.value("task", "");
            if (task == "handshake") {
                response["ok"] = true;
                response["payload"] = json{{"protocol", kAdapterProtocolVersion},
                                           {"kind", to_string(kind)},
                                           {"capabilities", mock_capabilities(kind).to_json()}};
            } else {
                response["ok"] = true;
                response["payload"] =
                    mock_handle(kind, task, envelope.value("payload", json::object()), opts);
            }
        } catch (const std::exception& e) {
            response["ok"] = false;
            response["error"] = json{{"message", e.what()}};
        }
        printf("%s\n", response.dump().c_str());
        fflush(stdout);
        if (die_after > 0 && ++responses >= die_after) return 1;
    }
    return 0;
}
