#pragma once

#include "trailforge/jsonio.hpp"

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace trailforge {

enum class AdapterKind {
    llm,
    text_embed,
    image_embed,
    asr,
    vad,
    tts,
    music,
    vocal_separate,
    ocr,
};

std::string to_string(AdapterKind kind);
AdapterKind adapter_kind_from_string(const std::string& name);
std::vector<AdapterKind> all_adapter_kinds();

inline constexpr int kAdapterProtocolVersion = 1;

struct Capabilities {
    int protocol = kAdapterProtocolVersion;
    int embedding_dim = 0;
    double max_music_s = 0;
    std::vector<std::string> voices;
    int max_concurrency = 1;

    json to_json() const;
    static Capabilities from_json(const json& j);
};

// One request/response exchange. Throwing errc::adapter marks a transport
// failure (retryable); an ok:false envelope is an adapter-reported error.
class Transport {
public:
    virtual ~Transport() = default;
    virtual json roundtrip(const json& envelope, double timeout_s) = 0;
    virtual void reset() {}  // reconnect/respawn before a retry
};

struct EndpointConfig {
    AdapterKind kind = AdapterKind::llm;
    std::string transport;  // "subprocess-lines" | "http" | "mock"
    std::string address;    // command line or base URL ("" for mock)
    json options = json::object();  // seed, fixtures_dir, bearer_token
};

struct CallPolicy {
    double timeout_s = 120;
    int retries = 2;           // transport failures only
    double backoff_s = 0.25;   // doubled per attempt
};

class Endpoint {
public:
    // Connects and performs the handshake (kind + protocol + capabilities).
    Endpoint(EndpointConfig config, CallPolicy policy,
             const std::shared_ptr<std::ofstream>& transcript,
             const std::shared_ptr<std::mutex>& transcript_mutex);

    AdapterKind kind() const { return config_.kind; }
    const Capabilities& capabilities() const { return caps_; }

    // Schema-validated round trip with retry/backoff and the concurrency cap.
    json call(const std::string& task, const json& payload);

private:
    json exchange(const std::string& task, const json& payload, bool validate);
    void record(const json& line);

    EndpointConfig config_;
    CallPolicy policy_;
    std::unique_ptr<Transport> transport_;
    Capabilities caps_;

    std::mutex mutex_;
    std::condition_variable slot_cv_;
    uint64_t next_ticket_ = 0;  // fair FIFO queue for the concurrency cap
    uint64_t serving_ticket_ = 0;
    int active_ = 0;
    uint64_t id_counter_ = 0;

    std::shared_ptr<std::ofstream> transcript_;
    std::shared_ptr<std::mutex> transcript_mutex_;
};

struct AdapterSetOptions {
    long long seed = 0;
    CallPolicy policy;
    std::filesystem::path transcript_path;  // empty = no transcript
};

class AdapterSet {
public:
    // adapters.json: { "<kind>": {"transport": ..., "address": ..., "options": {...}}, ... }
    static AdapterSet from_manifest(const std::filesystem::path& path,
                                    const AdapterSetOptions& opts = {});
    // Every kind backed by the in-process mock (tests, offline runs).
    static AdapterSet all_mocks(const AdapterSetOptions& opts,
                                const std::filesystem::path& fixtures_dir = {});

    bool has(AdapterKind kind) const { return endpoints_.count(kind) > 0; }
    std::shared_ptr<Endpoint> get(AdapterKind kind) const;

private:
    std::map<AdapterKind, std::shared_ptr<Endpoint>> endpoints_;
};

// Task schema validation (total: every payload in both directions).
// Throws errc::schema naming the offending field.
void validate_request(AdapterKind kind, const std::string& task, const json& payload);
void validate_response(AdapterKind kind, const std::string& task, const json& payload,
                       const Capabilities& caps);

} // namespace trailforge
