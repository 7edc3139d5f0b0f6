#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "egnli/nli_data.hpp"

namespace egnli {

enum class PromptStyle { plain, cot, attestation };

PromptStyle parse_prompt_style(std::string_view name);
std::string prompt_style_name(PromptStyle s);

struct InferenceShot {
    std::string premise;
    std::string hypothesis;
    char answer = 'A';  // A entail, B no-entail
    std::string rationale;
    std::string analyze_premise;
    std::string analyze_hypothesis;
    std::string reasoning;
};

struct AttestationShot {
    std::string statement;
    char answer = 'A';  // A true, B unknown, C false
};

// Few-shot example banks. Inference carries exactly 4 shots (2 positive,
// 2 negative); attestation exactly 3, one per choice.
struct PromptBank {
    std::vector<InferenceShot> inference;
    std::vector<AttestationShot> attestation;

    static PromptBank defaults();
    static PromptBank load_file(const std::filesystem::path& path);

    void validate_inference() const;
    void validate_attestation() const;
};

struct Prompt {
    PromptStyle style = PromptStyle::plain;
    std::vector<std::string> shots;  // rendered example blocks
    std::string query;               // rendered query block, ends with "Answer:"
    std::vector<char> choices;

    std::string text() const;
};

Prompt assemble_inference_prompt(const NLIExample& ex, const PromptBank& bank, PromptStyle style);
Prompt assemble_attestation_prompt(const std::string& hypothesis, const PromptBank& bank);

// Structured-output contract for shared-entity extraction; stubs and real
// models answer the same prompt with "entity<TAB>type" lines (or NONE).
extern const char* const kSharedEntityPromptTemplate;
std::string render_shared_entity_prompt(const NLIExample& ex);

}  // namespace egnli
