#pragma once

#include <string>
#include <vector>

namespace textilp::prompts {

extern const std::string kActorSystem;
extern const std::string kCriticSystem;
extern const std::string kTranslatorSystem;

// Placeholder slots: {samples}, {fewshots}, {feedback}, {bias}.
std::string actor_user(const std::vector<std::string>& samples,
                       const std::vector<std::string>& fewshots,
                       const std::string& feedback);

std::string critic_user(const std::string& bias_text,
                        const std::vector<std::string>& samples);

// Each batch item is (constant slug, sample text).
std::string translator_user(
    const std::string& bias_text,
    const std::vector<std::pair<std::string, std::string>>& batch);

} // namespace textilp::prompts
