#include "trailforge/adapters.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/log.hpp"
#include "trailforge/mocks.hpp"
#include "trailforge/subprocess.hpp"

#include <httplib.h>

#include <fmt/core.h>

#include <condition_variable>
#include <fstream>
#include <thread>

namespace trailforge {

namespace {

const std::map<std::string, AdapterKind>& kind_names() {
    static const std::map<std::string, AdapterKind> names = {
        {"llm", AdapterKind::llm},
        {"text-embed", AdapterKind::text_embed},
        {"image-embed", AdapterKind::image_embed},
        {"asr", AdapterKind::asr},
        {"vad", AdapterKind::vad},
        {"tts", AdapterKind::tts},
        {"music", AdapterKind::music},
        {"vocal-separate", AdapterKind::vocal_separate},
        {"ocr", AdapterKind::ocr},
    };
    return names;
}

} // namespace

std::string to_string(AdapterKind kind) {
    for (const auto& [name, k] : kind_names())
        if (k == kind) return name;
    return "?";
}

AdapterKind adapter_kind_from_string(const std::string& name) {
    auto it = kind_names().find(name);
    if (it == kind_names().end())
        fail(errc::config, fmt::format("unknown adapter kind '{}'", name));
    return it->second;
}

std::vector<AdapterKind> all_adapter_kinds() {
    std::vector<AdapterKind> kinds;
    for (const auto& [name, k] : kind_names()) kinds.push_back(k);
    return kinds;
}

json Capabilities::to_json() const {
    json j;
    j["protocol"] = protocol;
    j["max_concurrency"] = max_concurrency;
    if (embedding_dim > 0) j["embedding_dim"] = embedding_dim;
    if (max_music_s > 0) j["max_music_s"] = max_music_s;
    if (!voices.empty()) j["voices"] = voices;
    return j;
}

Capabilities Capabilities::from_json(const json& j) {
    Capabilities caps;
    if (j.contains("protocol")) caps.protocol = j.at("protocol").get<int>();
    if (j.contains("embedding_dim")) caps.embedding_dim = j.at("embedding_dim").get<int>();
    if (j.contains("max_music_s")) caps.max_music_s = j.at("max_music_s").get<double>();
    if (j.contains("voices")) caps.voices = j.at("voices").get<std::vector<std::string>>();
    if (j.contains("max_concurrency"))
        caps.max_concurrency = std::max(1, j.at("max_concurrency").get<int>());
    return caps;
}

namespace {

class MockTransport : public Transport {
public:
    MockTransport(AdapterKind kind, MockOptions opts) : kind_(kind), opts_(std::move(opts)) {}

    json roundtrip(const json& envelope, double) override {
        const std::string task = envelope.at("task").get<std::string>();
        json response;
        response["id"] = envelope.at("id");
        try {
            if (task == "handshake") {
                json payload;
                payload["protocol"] = kAdapterProtocolVersion;
                payload["kind"] = to_string(kind_);
                payload["capabilities"] = mock_capabilities(kind_).to_json();
                response["ok"] = true;
                response["payload"] = payload;
            } else {
                response["ok"] = true;
                response["payload"] = mock_handle(kind_, task, envelope.at("payload"), opts_);
            }
        } catch (const Error& e) {
            response["ok"] = false;
            response["error"] = json{{"message", e.what()}};
        }
        return response;
    }

private:
    AdapterKind kind_;
    MockOptions opts_;
};

class SubprocessLinesTransport : public Transport {
public:
    explicit SubprocessLinesTransport(const std::string& command)
        : argv_(split_command(command)) {
        if (argv_.empty()) fail(errc::config, "empty adapter command");
        spawn();
    }

    json roundtrip(const json& envelope, double timeout_s) override {
        if (!process_ || !process_->running())
            fail(errc::adapter, fmt::format("adapter process not running: {}", argv_[0]));
        process_->send_line(envelope.dump());
        auto line = process_->recv_line(timeout_s);
        if (!line)
            fail(errc::adapter,
                 fmt::format("adapter gave no response within {:.0f}s: {}", timeout_s, argv_[0]));
        try {
            return json::parse(*line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(errc::adapter, fmt::format("adapter sent malformed JSON: {}", e.what()));
        }
    }

    void reset() override { spawn(); }

private:
    void spawn() { process_ = std::make_unique<LineProcess>(argv_); }

    std::vector<std::string> argv_;
    std::unique_ptr<LineProcess> process_;
};

class HttpTransport : public Transport {
public:
    HttpTransport(std::string base_url, std::string bearer_token)
        : base_url_(std::move(base_url)), bearer_token_(std::move(bearer_token)) {}

    json roundtrip(const json& envelope, double timeout_s) override {
        httplib::Client client(base_url_);
        client.set_read_timeout(static_cast<time_t>(timeout_s),
                                static_cast<time_t>((timeout_s - static_cast<time_t>(timeout_s)) * 1e6));
        client.set_connection_timeout(10, 0);
        httplib::Headers headers;
        if (!bearer_token_.empty())
            headers.emplace("Authorization", "Bearer " + bearer_token_);
        auto res = client.Post("/v1/call", headers, envelope.dump(), "application/json");
        if (!res)
            fail(errc::adapter, fmt::format("http adapter unreachable: {}", base_url_));
        if (res->status != 200)
            fail(errc::adapter,
                 fmt::format("http adapter returned status {}: {}", res->status, base_url_));
        try {
            return json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            fail(errc::adapter, fmt::format("http adapter sent malformed JSON: {}", e.what()));
        }
    }

private:
    std::string base_url_;
    std::string bearer_token_;
};

std::unique_ptr<Transport> make_transport(const EndpointConfig& config, long long default_seed) {
    if (config.transport == "mock") {
        MockOptions opts;
        opts.seed = config.options.contains("seed") ? config.options.at("seed").get<long long>()
                                                    : default_seed;
        if (config.options.contains("fixtures_dir"))
            opts.fixtures_dir = config.options.at("fixtures_dir").get<std::string>();
        return std::make_unique<MockTransport>(config.kind, std::move(opts));
    }
    if (config.transport == "subprocess-lines")
        return std::make_unique<SubprocessLinesTransport>(config.address);
    if (config.transport == "http") {
        std::string token;
        if (config.options.contains("bearer_token"))
            token = config.options.at("bearer_token").get<std::string>();
        return std::make_unique<HttpTransport>(config.address, token);
    }
    fail(errc::config, fmt::format("unknown adapter transport '{}'", config.transport));
}

} // namespace

Endpoint::Endpoint(EndpointConfig config, CallPolicy policy,
                   const std::shared_ptr<std::ofstream>& transcript,
                   const std::shared_ptr<std::mutex>& transcript_mutex)
    : config_(std::move(config)),
      policy_(policy),
      transport_(make_transport(config_, 0)),
      transcript_(transcript),
      transcript_mutex_(transcript_mutex) {
    json payload;
    payload["protocol"] = kAdapterProtocolVersion;
    payload["kind"] = to_string(config_.kind);
    json response = exchange("handshake", payload, /*validate=*/false);

    if (!response.contains("kind") || response.at("kind").get<std::string>() != to_string(config_.kind))
        fail(errc::adapter,
             fmt::format("adapter kind mismatch: expected {}, endpoint answered {}",
                         to_string(config_.kind),
                         response.value("kind", std::string("<none>"))));
    if (response.value("protocol", -1) != kAdapterProtocolVersion)
        fail(errc::adapter, fmt::format("unsupported adapter protocol {} (want {})",
                                        response.value("protocol", -1), kAdapterProtocolVersion));
    caps_ = Capabilities::from_json(response.value("capabilities", json::object()));
}

void Endpoint::record(const json& line) {
    if (!transcript_) return;
    std::lock_guard lock(*transcript_mutex_);
    (*transcript_) << line.dump() << "\n";
    transcript_->flush();
}

json Endpoint::exchange(const std::string& task, const json& payload, bool validate) {
    if (validate) validate_request(config_.kind, task, payload);

    json envelope;
    {
        std::lock_guard lock(mutex_);
        envelope["id"] = fmt::format("{}-{}", to_string(config_.kind), ++id_counter_);
    }
    envelope["task"] = task;
    envelope["payload"] = payload;
    record(json{{"dir", "req"}, {"kind", to_string(config_.kind)}, {"envelope", envelope}});

    json response;
    int attempt = 0;
    for (;;) {
        try {
            response = transport_->roundtrip(envelope, policy_.timeout_s);
            if (!response.is_object() || !response.contains("id") || !response.contains("ok"))
                fail(errc::adapter, "adapter response missing id/ok");
            if (response.at("id") != envelope.at("id"))
                fail(errc::adapter,
                     fmt::format("adapter response id mismatch: sent {}, got {}",
                                 envelope.at("id").get<std::string>(),
                                 response.at("id").dump()));
            break;
        } catch (const Error& e) {
            if (e.code() != errc::adapter || attempt >= policy_.retries) throw;
            double backoff = policy_.backoff_s * std::pow(2.0, attempt);
            log::warn("adapter {} transport failure (attempt {}): {}; retrying in {:.2f}s",
                      to_string(config_.kind), attempt + 1, e.what(), backoff);
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            transport_->reset();
            ++attempt;
        }
    }
    record(json{{"dir", "resp"}, {"kind", to_string(config_.kind)}, {"envelope", response}});

    const bool ok = response.at("ok").get<bool>();
    const bool has_payload = response.contains("payload");
    const bool has_error = response.contains("error");
    if (ok == has_error || ok != has_payload)
        fail(errc::adapter, "adapter response must carry exactly one of payload/error");
    if (!ok) {
        std::string message = response.at("error").value("message", "unspecified adapter error");
        fail(errc::adapter, fmt::format("{} adapter error: {}", to_string(config_.kind), message));
    }
    json out = response.at("payload");
    if (validate) validate_response(config_.kind, task, out, caps_);
    return out;
}

json Endpoint::call(const std::string& task, const json& payload) {
    // Fair FIFO admission up to max_concurrency.
    uint64_t ticket;
    {
        std::unique_lock lock(mutex_);
        ticket = next_ticket_++;
        slot_cv_.wait(lock, [&] {
            return ticket == serving_ticket_ && active_ < caps_.max_concurrency;
        });
        ++serving_ticket_;
        ++active_;
    }
    slot_cv_.notify_all();

    try {
        json out = exchange(task, payload, /*validate=*/true);
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        slot_cv_.notify_all();
        return out;
    } catch (...) {
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        slot_cv_.notify_all();
        throw;
    }
}

AdapterSet AdapterSet::from_manifest(const std::filesystem::path& path,
                                     const AdapterSetOptions& opts) {
    json manifest = load_json(path);
    if (!manifest.is_object()) fail(errc::config, "adapters manifest must be a JSON object");

    std::shared_ptr<std::ofstream> transcript;
    auto transcript_mutex = std::make_shared<std::mutex>();
    if (!opts.transcript_path.empty()) {
        transcript = std::make_shared<std::ofstream>(opts.transcript_path);
        if (!*transcript)
            fail(errc::io, fmt::format("cannot write {}", opts.transcript_path.string()));
    }

    AdapterSet set;
    for (const auto& [name, entry] : manifest.items()) {
        EndpointConfig config;
        config.kind = adapter_kind_from_string(name);
        if (!entry.contains("transport"))
            fail(errc::config, fmt::format("adapter '{}' is missing a transport", name));
        config.transport = entry.at("transport").get<std::string>();
        config.address = entry.value("address", std::string{});
        config.options = entry.value("options", json::object());
        if (config.transport == "mock" && !config.options.contains("seed"))
            config.options["seed"] = opts.seed;
        try {
            set.endpoints_[config.kind] =
                std::make_shared<Endpoint>(config, opts.policy, transcript, transcript_mutex);
        } catch (const Error& e) {
            if (e.code() == errc::adapter)
                fail(errc::adapter, fmt::format("adapter '{}' unreachable: {}", name, e.what()));
            throw;
        }
    }
    return set;
}

AdapterSet AdapterSet::all_mocks(const AdapterSetOptions& opts,
                                 const std::filesystem::path& fixtures_dir) {
    std::shared_ptr<std::ofstream> transcript;
    auto transcript_mutex = std::make_shared<std::mutex>();
    if (!opts.transcript_path.empty())
        transcript = std::make_shared<std::ofstream>(opts.transcript_path);

    AdapterSet set;
    for (AdapterKind kind : all_adapter_kinds()) {
        EndpointConfig config;
        config.kind = kind;
        config.transport = "mock";
        config.options["seed"] = opts.seed;
        if (!fixtures_dir.empty()) config.options["fixtures_dir"] = fixtures_dir.string();
        set.endpoints_[kind] =
            std::make_shared<Endpoint>(config, opts.policy, transcript, transcript_mutex);
    }
    return set;
}

std::shared_ptr<Endpoint> AdapterSet::get(AdapterKind kind) const {
    auto it = endpoints_.find(kind);
    if (it == endpoints_.end())
        fail(errc::adapter, fmt::format("no adapter configured for kind '{}'", to_string(kind)));
    return it->second;
}

} // namespace trailforge
