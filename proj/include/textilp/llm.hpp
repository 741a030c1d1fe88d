#pragma once

#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace textilp {

struct LlmRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_tokens = 4096;
    std::string model = "gpt-4o";
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct LlmResponse {
    std::string text;
    TokenUsage usage;
    double latency_ms = 0.0;
};

enum class BackendKind { HttpChat, Scripted };

struct BackendConfig {
    BackendKind kind = BackendKind::Scripted;
    std::string endpoint;              // http_chat: base URL, POST {endpoint}/chat/completions
    std::string api_key_env = "LLM_API_KEY";
    std::string script_path;           // scripted: JSON array of {match, response}
    double timeout_s = 60.0;
    int max_retries = 3;
    double backoff_initial_s = 0.5;
    double backoff_multiplier = 2.0;
    int max_in_flight = 4;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ScriptExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ScriptMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual LlmResponse complete(const LlmRequest& request) = 0;
};

// Deterministic backend for offline tests: entries are consumed strictly in
// order; a string `match` must occur in the request's prompts, an integer
// `match` must equal the 0-based call ordinal.
class ScriptedBackend : public ChatBackend {
public:
    struct Entry {
        std::string match;     // substring, empty = match anything
        int ordinal = -1;      // -1 = unused
        std::string response;
    };

    explicit ScriptedBackend(std::vector<Entry> entries);
    static std::vector<Entry> entries_from_json(const std::string& json_text);
    static std::vector<Entry> entries_from_file(const std::string& path);

    LlmResponse complete(const LlmRequest& request) override;
    int calls_made() const;

private:
    std::vector<Entry> entries_;
    size_t next_ = 0;
    mutable std::mutex mu_;
};

// OpenAI-compatible chat-completions client with retry and exponential
// backoff. The API key is read from the environment variable named in the
// config, never from files.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(BackendConfig config);
    LlmResponse complete(const LlmRequest& request) override;

private:
    BackendConfig config_;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

} // namespace textilp
