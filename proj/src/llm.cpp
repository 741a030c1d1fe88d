#include "textilp/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace textilp {

using json = nlohmann::json;

// --- scripted backend ----------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries)
    : entries_(std::move(entries)) {}

std::vector<ScriptedBackend::Entry> ScriptedBackend::entries_from_json(
    const std::string& json_text) {
    json arr = json::parse(json_text);
    if (!arr.is_array())
        throw std::invalid_argument("script must be a JSON array");
    std::vector<Entry> entries;
    for (const json& e : arr) {
        Entry entry;
        if (e.contains("match")) {
            if (e["match"].is_number_integer())
                entry.ordinal = e["match"].get<int>();
            else
                entry.match = e["match"].get<std::string>();
        }
        entry.response = e.at("response").get<std::string>();
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<ScriptedBackend::Entry> ScriptedBackend::entries_from_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open script file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return entries_from_json(ss.str());
}

LlmResponse ScriptedBackend::complete(const LlmRequest& request) {
    std::lock_guard lock(mu_);
    if (next_ >= entries_.size())
        throw ScriptExhausted("scripted backend out of responses after " +
                              std::to_string(entries_.size()) + " calls");
    const Entry& entry = entries_[next_];
    int ordinal = static_cast<int>(next_);
    if (entry.ordinal >= 0 && entry.ordinal != ordinal)
        throw ScriptMismatch("script entry expects call #" +
                             std::to_string(entry.ordinal) + ", got #" +
                             std::to_string(ordinal));
    if (!entry.match.empty() &&
        request.user_prompt.find(entry.match) == std::string::npos &&
        request.system_prompt.find(entry.match) == std::string::npos)
        throw ScriptMismatch("script entry #" + std::to_string(ordinal) +
                             " match '" + entry.match + "' not found in prompt");
    ++next_;
    LlmResponse r;
    r.text = entry.response;
    return r;
}

int ScriptedBackend::calls_made() const {
    std::lock_guard lock(mu_);
    return static_cast<int>(next_);
}

// --- http backend ----------------------------------------------------------

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty())
        throw std::invalid_argument("http backend requires an endpoint");
}

LlmResponse HttpChatBackend::complete(const LlmRequest& request) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw AuthError("API key environment variable " + config_.api_key_env +
                        " is not set");

    json payload = {
        {"model", request.model},
        {"messages",
         json::array({json{{"role", "system"}, {"content", request.system_prompt}},
                      json{{"role", "user"}, {"content", request.user_prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    const std::string body = payload.dump();
    const httplib::Headers headers = {
        {"Authorization", std::string("Bearer ") + key}};

    double delay = config_.backoff_initial_s;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            delay *= config_.backoff_multiplier;
        }
        auto start = std::chrono::steady_clock::now();
        httplib::Client client(config_.endpoint);
        client.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));
        client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
        auto res = client.Post("/chat/completions", headers, body, "application/json");
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw AuthError("authentication rejected (HTTP " +
                            std::to_string(res->status) + ")");
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
        try {
            json reply = json::parse(res->body);
            LlmResponse out;
            out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (reply.contains("usage")) {
                out.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0);
                out.usage.completion_tokens = reply["usage"].value("completion_tokens", 0);
            }
            out.latency_ms = ms;
            return out;
        } catch (const json::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
    }
    throw TransportError("retries exhausted: " + last_error);
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
    if (config.kind == BackendKind::Scripted) {
        if (config.script_path.empty())
            throw std::invalid_argument("scripted backend requires a script path");
        return std::make_unique<ScriptedBackend>(
            ScriptedBackend::entries_from_file(config.script_path));
    }
    return std::make_unique<HttpChatBackend>(config);
}

} // namespace textilp
