#pragma once

// Prompt rendering and the pluggable generation backend. Three backends:
//   stub    — offline, deterministic function of the input hash (even hash:
//             a well-formed test, odd hash: a truncated one);
//   command — input on stdin, output on stdout, nonzero exit is an error;
//   http    — POST to a configured URL, bearer token read from an env var.
// Every response is persisted to an append-only run log before any
// post-processing touches it; replays are keyed by instance id.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "testgen/flatten.hpp"
#include "testgen/process.hpp"
#include "testgen/record.hpp"
#include "testgen/util.hpp"

namespace testgen {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatPrompt {
    std::vector<ChatMessage> messages;
};

// The three-message template: system role line, coverage-maximizing
// instruction with the focal method delimited by ???, and the cleanup
// instruction (comment stripping, [EOL] substitution).
inline ChatPrompt render_chat_prompt(std::string_view project_name, std::string_view focal_method) {
    ChatPrompt prompt;
    prompt.messages.push_back(
        {"system", "You are a unit test case generator with meaningful assertions for Java "
                   "project: " + std::string(project_name) + "."});
    prompt.messages.push_back(
        {"user", "Given a focal method surrounded by ???, generate unit test case methods that "
                 "cover maximum line coverage. Only create new tests if they cover new lines of "
                 "code. Only generate the Java code part of test methods. Use [TCS] to separate "
                 "the multiple test cases. Input text: ???" + std::string(focal_method) + "???"});
    prompt.messages.push_back(
        {"user", "Remove all comments (e.g. line starts with // and surrounded by /* and */), NL "
                 "description and @Test annotations. New lines should be substituted with "
                 "[EOL]."});
    return prompt;
}

inline std::string prompt_to_json(const ChatPrompt& prompt) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const ChatMessage& m : prompt.messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    return msgs.dump();
}

enum class BackendKind { Stub, Command, Http };

struct BackendConfig {
    BackendKind kind = BackendKind::Stub;
    std::string endpoint;       // http
    std::string command;        // command: shell line, input on stdin
    double timeout_sec = 30.0;
    int max_output_tokens = 256;
    int retries = 0;
    std::string auth_env;       // env var holding the bearer token
    double requests_per_sec = 1.0;  // http rate limit
    int max_concurrency = 1;
};

struct GenerationResponse {
    std::string raw_text;
    std::string backend_id;
    double latency_sec = 0.0;
};

struct BackendError : std::runtime_error {
    int status;
    explicit BackendError(const std::string& msg, int status_code = -1)
        : std::runtime_error(msg), status(status_code) {}
};

struct BackendTimeout : BackendError {
    explicit BackendTimeout(const std::string& msg) : BackendError(msg, -2) {}
};

// Deterministic offline stand-in for a real model. Even input hash yields a
// parsable test, odd yields one truncated mid-statement, so post-processing
// paths stay exercised without any backend.
inline std::string stub_response(std::string_view input) {
    std::uint64_t hash = fnv1a64(input);
    std::string tag = hex64(hash).substr(8);
    if (hash % 2 == 0) {
        return "public void testStub" + tag + "() {[EOL]    assertTrue(true);[EOL]}";
    }
    return "public void testStub" + tag + "() {[EOL]    int value =";
}

class RateLimiter {
public:
    explicit RateLimiter(double per_sec) : interval_sec_(per_sec > 0 ? 1.0 / per_sec : 0.0) {}

    void acquire() {
        if (interval_sec_ <= 0) return;
        std::unique_lock<std::mutex> lock(mu_);
        auto now = std::chrono::steady_clock::now();
        if (next_ > now) {
            auto wait = next_ - now;
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
            now = std::chrono::steady_clock::now();
        }
        next_ = now + std::chrono::microseconds(static_cast<long>(interval_sec_ * 1e6));
    }

private:
    double interval_sec_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point next_{};
};

namespace detail {

inline std::string http_generate(const BackendConfig& cfg, const std::string& body_json) {
    // endpoint: http://host:port/path
    std::string url = cfg.endpoint;
    std::string scheme_host = url;
    std::string path = "/";
    size_t scheme = url.find("://");
    size_t path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start != std::string::npos) {
        scheme_host = url.substr(0, path_start);
        path = url.substr(path_start);
    }
    httplib::Client client(scheme_host);
    client.set_connection_timeout(static_cast<int>(cfg.timeout_sec), 0);
    client.set_read_timeout(static_cast<int>(cfg.timeout_sec), 0);
    httplib::Headers headers;
    if (!cfg.auth_env.empty()) {
        if (const char* token = std::getenv(cfg.auth_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    nlohmann::json body = nlohmann::json::parse(body_json, nullptr, false);
    nlohmann::json request;
    if (body.is_array()) {
        request["messages"] = body;
    } else {
        request["input"] = body_json;
    }
    request["max_tokens"] = cfg.max_output_tokens;

    httplib::Result res = client.Post(path, headers, request.dump(), "application/json");
    if (!res) {
        throw BackendTimeout("http backend unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw BackendError("http backend status " + std::to_string(res->status), res->status);
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_object() && parsed.contains("text") && parsed["text"].is_string()) {
        return parsed["text"].get<std::string>();
    }
    return res->body;
}

inline std::string run_backend_once(const BackendConfig& cfg, const std::string& payload) {
    switch (cfg.kind) {
        case BackendKind::Stub:
            return stub_response(payload);
        case BackendKind::Command: {
            CommandResult res = run_command(cfg.command, payload, cfg.timeout_sec);
            if (res.timed_out) {
                throw BackendTimeout("command backend timed out");
            }
            if (res.exit_code != 0) {
                throw BackendError("command backend exited with " + std::to_string(res.exit_code) +
                                       (res.err.empty() ? "" : (": " + res.err)),
                                   res.exit_code);
            }
            return res.out;
        }
        case BackendKind::Http:
            return http_generate(cfg, payload);
    }
    throw BackendError("unknown backend kind");
}

}  // namespace detail

// Verbatim model output for one request; retries already applied. `payload`
// is the flat input line for flat backends or the prompt JSON for chat ones.
inline GenerationResponse generate(const BackendConfig& cfg, const std::string& payload,
                                   RateLimiter* limiter = nullptr) {
    auto started = std::chrono::steady_clock::now();
    int attempts = cfg.retries + 1;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        try {
            if (limiter != nullptr && cfg.kind == BackendKind::Http) {
                limiter->acquire();
            }
            GenerationResponse resp;
            resp.raw_text = detail::run_backend_once(cfg, payload);
            resp.backend_id = cfg.kind == BackendKind::Stub      ? "stub"
                              : cfg.kind == BackendKind::Command ? "command"
                                                                 : "http:" + cfg.endpoint;
            resp.latency_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                             started)
                                   .count();
            return resp;
        } catch (const BackendError& e) {
            last_error = e.what();
            if (attempt + 1 == attempts) {
                throw;
            }
        }
    }
    throw BackendError(last_error);
}

// Split a raw response on literal [TCS], trimming whitespace and dropping
// empty segments.
inline std::vector<std::string> split_candidates(std::string_view raw_text) {
    std::vector<std::string> out;
    size_t start = 0;
    auto flush = [&](std::string_view segment) {
        std::string trimmed = trim(segment);
        if (!trimmed.empty()) {
            out.push_back(std::move(trimmed));
        }
    };
    while (true) {
        size_t hit = raw_text.find(kTcs, start);
        if (hit == std::string_view::npos) {
            flush(raw_text.substr(start));
            return out;
        }
        flush(raw_text.substr(start, hit - start));
        start = hit + kTcs.size();
    }
}

// --- run log -----------------------------------------------------------------

struct RunLogEntry {
    std::string instance_id;
    std::string request_hash;
    std::string response;
    double latency_sec = 0.0;
    std::string backend_id;
    bool failed = false;
    std::string error;
};

// Append-only, keyed by instance id; ordering is irrelevant and replaying a
// batch skips instances already present.
class RunLog {
public:
    explicit RunLog(std::filesystem::path path) : path_(std::move(path)) {
        if (path_.has_parent_path()) {
            std::filesystem::create_directories(path_.parent_path());
        }
    }

    void append(const RunLogEntry& entry) {
        std::lock_guard<std::mutex> lock(mu_);
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        if (!out) {
            throw std::runtime_error("cannot append to run log: " + path_.string());
        }
        Record rec{{"instance", entry.instance_id},
                   {"request_hash", entry.request_hash},
                   {"response", entry.response},
                   {"latency", std::to_string(entry.latency_sec)},
                   {"backend", entry.backend_id},
                   {"failed", entry.failed ? "1" : "0"},
                   {"error", entry.error}};
        out << encode_record(rec) << '\n';
        out.flush();
    }

    static std::vector<RunLogEntry> load(const std::filesystem::path& path) {
        std::vector<RunLogEntry> out;
        if (!std::filesystem::exists(path)) {
            return out;
        }
        for (const Record& rec : read_records(path)) {
            RunLogEntry e;
            e.instance_id = record_get(rec, "instance").value_or("");
            e.request_hash = record_get(rec, "request_hash").value_or("");
            e.response = record_get(rec, "response").value_or("");
            e.latency_sec = std::stod(record_get(rec, "latency").value_or("0"));
            e.backend_id = record_get(rec, "backend").value_or("");
            e.failed = record_get(rec, "failed").value_or("0") == "1";
            e.error = record_get(rec, "error").value_or("");
            out.push_back(std::move(e));
        }
        return out;
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mu_;
};

}  // namespace testgen
