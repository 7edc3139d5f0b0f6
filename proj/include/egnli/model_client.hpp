#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "egnli/prompts.hpp"

namespace egnli {

struct TokenProb {
    std::string token;
    double prob = 0.0;
};

struct ModelReply {
    std::string text;
    std::vector<TokenProb> token_probs;  // empty when the transport exposes none
};

class Model {
public:
    virtual ~Model() = default;
    virtual ModelReply complete(const std::string& prompt) = 0;
    virtual std::string name() const = 0;
};

// Query lines recovered from an assembled prompt; stubs answer from these.
struct ParsedQuery {
    bool is_attestation = false;
    std::string premise;  // empty for attestation queries
    std::string hypothesis;
};

ParsedQuery parse_query_from_prompt(const std::string& prompt);

// Answers from a facts file alone, ignoring the premise: the attestation-bias
// pole. Inference: Entail iff the query hypothesis is a fact. Attestation:
// True iff the hypothesis is a fact, Unknown otherwise.
class MemorizerStub : public Model {
public:
    explicit MemorizerStub(std::set<std::string> facts);
    static MemorizerStub from_facts_file(const std::filesystem::path& path);

    ModelReply complete(const std::string& prompt) override;
    std::string name() const override { return "memorizer"; }

    bool knows(const std::string& statement) const;

private:
    std::set<std::string> facts_;  // normalized statements
};

// Answers from the premise-hypothesis pair alone, ignoring any facts: the
// bias-free pole. Predicate phrases are the word spans left after stripping
// the statements' shared argument prefix and suffix; Entail iff the phrase
// pair is a known rule (or the statements are identical). Attestation is
// always Unknown.
class LogicianStub : public Model {
public:
    explicit LogicianStub(std::set<std::pair<std::string, std::string>> rules);
    // TSV lines: premise_phrase \t hypothesis_phrase
    static LogicianStub from_rules_file(const std::filesystem::path& path);

    ModelReply complete(const std::string& prompt) override;
    std::string name() const override { return "logician"; }

    bool entails(const std::string& premise, const std::string& hypothesis) const;

private:
    std::set<std::pair<std::string, std::string>> rules_;
};

// Replays an ordered response list, cycling at the end.
class ScriptedStub : public Model {
public:
    explicit ScriptedStub(std::vector<ModelReply> replies);
    // JSONL lines: {"text": ..., "token_prob": 0.9?}
    static ScriptedStub from_jsonl(const std::filesystem::path& path);

    ModelReply complete(const std::string& prompt) override;
    std::string name() const override { return "scripted"; }

private:
    std::vector<ModelReply> replies_;
    size_t cursor_ = 0;
};

struct EndpointConfig {
    std::string base_url;  // e.g. http://localhost:8080
    std::string model;
    std::string api_key_env = "EGNLI_API_KEY";
    double timeout_sec = 60.0;
    int max_attempts = 3;
    double backoff_base_sec = 1.0;
    bool want_logprobs = true;
    std::string audit_log_path;  // optional JSONL of raw requests/responses
};

// Chat-completions-style endpoint client with retry and exponential backoff
// on transport failures.
class EndpointModel : public Model {
public:
    explicit EndpointModel(EndpointConfig config);
    ModelReply complete(const std::string& prompt) override;
    std::string name() const override { return "endpoint:" + config_.model; }

private:
    EndpointConfig config_;
};

std::unique_ptr<Model> make_model(const nlohmann::json& spec);

struct ChoiceJudgment {
    char token = '?';
    double token_prob = 1.0;  // defaults to 1.0 when unavailable
    bool prob_available = false;
    std::string raw_text;
    int attempts_used = 1;
};

struct QueryOptions {
    int max_attempts = 3;  // parse retries; transport retries live in the model
    // renormalize the chosen letter's probability over all declared choice
    // letters found in the reply; raw is the default
    bool normalize_over_choices = false;
};

// Parses the first standalone choice letter out of the completion. When the
// transport exposes per-token probabilities, token_prob is the probability
// mass of the chosen letter token.
ChoiceJudgment query_choice(Model& model, const Prompt& prompt, const std::vector<char>& choices,
                            const QueryOptions& opts = {});

std::optional<char> find_choice_letter(const std::string& text, const std::vector<char>& choices);

enum class AttestationLabel { True, Unknown, False };

std::string attestation_name(AttestationLabel l);
AttestationLabel attestation_from_name(std::string_view s);

AttestationLabel attest(Model& model, const std::string& hypothesis, const PromptBank& bank,
                        const QueryOptions& opts = {});

}  // namespace egnli
