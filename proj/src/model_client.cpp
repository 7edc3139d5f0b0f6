#include "egnli/model_client.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "egnli/errors.hpp"
#include "egnli/text.hpp"

namespace egnli {

namespace {

constexpr const char* kQuerySuffix = ". Is that true or false?";

std::string normalize_statement(std::string_view s) { return strip_sentence_end(s); }

}  // namespace

ParsedQuery parse_query_from_prompt(const std::string& prompt) {
    auto lines = split(prompt, '\n');
    // the query is the last question line; few-shot blocks precede it
    size_t query_idx = lines.size();
    for (size_t i = lines.size(); i > 0; --i) {
        if (ends_with(trim(lines[i - 1]), kQuerySuffix)) {
            query_idx = i - 1;
            break;
        }
    }
    if (query_idx == lines.size()) throw ParseError("prompt has no question line");

    ParsedQuery q;
    for (size_t i = query_idx + 1; i < lines.size(); ++i)
        if (trim(lines[i]) == "B) Unknown") q.is_attestation = true;

    std::string body = trim(lines[query_idx]);
    body = body.substr(0, body.size() - std::string(kQuerySuffix).size());
    if (!q.is_attestation && starts_with(body, "If ") && contains(body, ", then ")) {
        size_t mid = body.find(", then ");
        q.premise = body.substr(3, mid - 3);
        q.hypothesis = body.substr(mid + 7);
    } else {
        q.hypothesis = body;
    }
    return q;
}

// ---- memorizer ----

MemorizerStub::MemorizerStub(std::set<std::string> facts) {
    for (const auto& f : facts) facts_.insert(normalize_statement(f));
}

MemorizerStub MemorizerStub::from_facts_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open facts file: " + path.string());
    std::set<std::string> facts;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (!t.empty() && t[0] != '#') facts.insert(t);
    }
    return MemorizerStub(std::move(facts));
}

bool MemorizerStub::knows(const std::string& statement) const {
    return facts_.count(normalize_statement(statement)) > 0;
}

ModelReply MemorizerStub::complete(const std::string& prompt) {
    ParsedQuery q = parse_query_from_prompt(prompt);
    const bool attested = knows(q.hypothesis);
    std::string text;
    if (q.is_attestation)
        text = attested ? "A) True." : "B) Unknown.";
    else
        text = attested ? "A) True." : "B) False.";
    return ModelReply{text, {{std::string(1, text[0]), 1.0}}};
}

// ---- logician ----

LogicianStub::LogicianStub(std::set<std::pair<std::string, std::string>> rules)
    : rules_(std::move(rules)) {}

LogicianStub LogicianStub::from_rules_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open logician rules file: " + path.string());
    std::set<std::pair<std::string, std::string>> rules;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split(t, '\t');
        if (fields.size() != 2)
            throw ParseError("logician rules line " + std::to_string(line_no) +
                             ": expected 2 tab-separated phrases");
        rules.emplace(trim(fields[0]), trim(fields[1]));
    }
    return LogicianStub(std::move(rules));
}

bool LogicianStub::entails(const std::string& premise, const std::string& hypothesis) const {
    auto pw = split_words(normalize_statement(premise));
    auto hw = split_words(normalize_statement(hypothesis));
    if (pw == hw) return true;  // identical statements

    // The statements share their argument spans as a common prefix and
    // suffix; the exact split is unknown, so every consistent split is
    // checked against the rule table.
    size_t max_prefix = 0;
    while (max_prefix < pw.size() && max_prefix < hw.size() && pw[max_prefix] == hw[max_prefix])
        ++max_prefix;
    size_t max_suffix = 0;
    while (max_suffix < pw.size() && max_suffix < hw.size() &&
           pw[pw.size() - 1 - max_suffix] == hw[hw.size() - 1 - max_suffix])
        ++max_suffix;

    for (size_t i = 0; i <= max_prefix; ++i) {
        for (size_t j = 0; j <= max_suffix; ++j) {
            if (i + j > pw.size() || i + j > hw.size()) continue;
            std::string mid_p = join({pw.begin() + i, pw.end() - j}, " ");
            std::string mid_h = join({hw.begin() + i, hw.end() - j}, " ");
            if (rules_.count({mid_p, mid_h})) return true;
        }
    }
    return false;
}

ModelReply LogicianStub::complete(const std::string& prompt) {
    ParsedQuery q = parse_query_from_prompt(prompt);
    std::string text;
    if (q.is_attestation)
        text = "B) Unknown.";
    else
        text = entails(q.premise, q.hypothesis) ? "A) True." : "B) False.";
    return ModelReply{text, {{std::string(1, text[0]), 1.0}}};
}

// ---- scripted ----

ScriptedStub::ScriptedStub(std::vector<ModelReply> replies) : replies_(std::move(replies)) {
    if (replies_.empty()) throw ConfigError("scripted stub needs at least one reply");
}

ScriptedStub ScriptedStub::from_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scripted replies file: " + path.string());
    std::vector<ModelReply> replies;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("scripted replies line " + std::to_string(line_no) + ": " + e.what());
        }
        ModelReply r;
        r.text = j.at("text").get<std::string>();
        if (j.contains("token_prob"))
            r.token_probs.push_back(TokenProb{r.text, j.at("token_prob").get<double>()});
        replies.push_back(std::move(r));
    }
    return ScriptedStub(std::move(replies));
}

ModelReply ScriptedStub::complete(const std::string&) {
    ModelReply r = replies_[cursor_ % replies_.size()];
    ++cursor_;
    return r;
}

// ---- endpoint ----

EndpointModel::EndpointModel(EndpointConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("endpoint model needs a base_url");
}

ModelReply EndpointModel::complete(const std::string& prompt) {
    nlohmann::json body{{"model", config_.model},
                        {"messages", nlohmann::json::array({nlohmann::json{
                                         {"role", "user"}, {"content", prompt}}})},
                        {"temperature", 0.0}};
    if (config_.want_logprobs) {
        body["logprobs"] = true;
        body["top_logprobs"] = 1;
    }

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(config_.timeout_sec * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(static_cast<int>(config_.timeout_sec * 1000)));
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::duration<double>(config_.backoff_base_sec *
                                                       std::pow(2.0, attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(delay));
        }
        auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                 res->body);

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw TransportError(std::string("endpoint returned unparseable JSON: ") + e.what());
        }
        if (!config_.audit_log_path.empty()) {
            std::ofstream audit(config_.audit_log_path, std::ios::app);
            audit << nlohmann::json{{"request", body}, {"status", res->status}, {"response", j}}.dump()
                  << "\n";
        }

        ModelReply reply;
        try {
            const auto& choice = j.at("choices").at(0);
            reply.text = choice.at("message").at("content").get<std::string>();
            if (choice.contains("logprobs") && choice.at("logprobs").is_object() &&
                choice.at("logprobs").contains("content")) {
                for (const auto& tok : choice.at("logprobs").at("content")) {
                    reply.token_probs.push_back(TokenProb{
                        tok.at("token").get<std::string>(),
                        std::exp(tok.at("logprob").get<double>())});
                    // alternatives at the same position, for normalization
                    if (tok.contains("top_logprobs"))
                        for (const auto& alt : tok.at("top_logprobs"))
                            reply.token_probs.push_back(TokenProb{
                                alt.at("token").get<std::string>(),
                                std::exp(alt.at("logprob").get<double>())});
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("endpoint response missing fields: ") + e.what());
        }
        return reply;
    }
    throw TransportError("endpoint unreachable after " + std::to_string(config_.max_attempts) +
                         " attempts (" + last_error + ")");
}

std::unique_ptr<Model> make_model(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "memorizer")
        return std::make_unique<MemorizerStub>(
            MemorizerStub::from_facts_file(spec.at("facts").get<std::string>()));
    if (kind == "logician") {
        if (spec.contains("rules"))
            return std::make_unique<LogicianStub>(
                LogicianStub::from_rules_file(spec.at("rules").get<std::string>()));
        return std::make_unique<LogicianStub>(std::set<std::pair<std::string, std::string>>{});
    }
    if (kind == "scripted")
        return std::make_unique<ScriptedStub>(
            ScriptedStub::from_jsonl(spec.at("script").get<std::string>()));
    if (kind == "endpoint") {
        EndpointConfig cfg;
        cfg.base_url = spec.at("base_url").get<std::string>();
        cfg.model = spec.value("model", "");
        cfg.api_key_env = spec.value("api_key_env", cfg.api_key_env);
        cfg.timeout_sec = spec.value("timeout_sec", cfg.timeout_sec);
        cfg.max_attempts = spec.value("max_attempts", cfg.max_attempts);
        cfg.backoff_base_sec = spec.value("backoff_base_sec", cfg.backoff_base_sec);
        cfg.want_logprobs = spec.value("want_logprobs", cfg.want_logprobs);
        cfg.audit_log_path = spec.value("audit_log", "");
        return std::make_unique<EndpointModel>(std::move(cfg));
    }
    throw ConfigError("unknown model kind '" + kind +
                      "' (expected memorizer, logician, scripted, or endpoint)");
}

// A letter counts when it stands alone: uppercase may appear bare, lowercase
// only with a choice marker ( ")" or "." ) so articles in prose do not parse
// as answers. A reply that is nothing but the letter always counts.
std::optional<char> find_choice_letter(const std::string& text, const std::vector<char>& choices) {
    auto declared = [&choices](char upper) {
        for (char c : choices)
            if (c == upper) return true;
        return false;
    };
    const std::string t = trim(text);
    if (t.size() == 1) {
        char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
        if (declared(upper)) return upper;
    }
    auto is_word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    for (size_t i = 0; i < t.size(); ++i) {
        char c = t[i];
        char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (!declared(upper)) continue;
        const bool standalone_before = i == 0 || !is_word_char(t[i - 1]);
        const bool standalone_after = i + 1 == t.size() || !is_word_char(t[i + 1]);
        if (!standalone_before || !standalone_after) continue;
        const bool marked = i + 1 < t.size() && (t[i + 1] == ')' || t[i + 1] == '.');
        if (std::isupper(static_cast<unsigned char>(c)) || marked) return upper;
    }
    return std::nullopt;
}

ChoiceJudgment query_choice(Model& model, const Prompt& prompt, const std::vector<char>& choices,
                            const QueryOptions& opts) {
    std::string last_raw;
    for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
        ModelReply reply = model.complete(prompt.text());
        last_raw = reply.text;
        auto letter = find_choice_letter(reply.text, choices);
        if (!letter) continue;

        ChoiceJudgment j;
        j.token = *letter;
        j.raw_text = reply.text;
        j.attempts_used = attempt;
        for (const auto& tp : reply.token_probs) {
            if (find_choice_letter(tp.token, {*letter})) {
                j.token_prob = tp.prob;
                j.prob_available = true;
                break;
            }
        }
        if (j.prob_available && opts.normalize_over_choices) {
            double total = 0.0;
            for (char c : choices) {
                for (const auto& tp : reply.token_probs) {
                    if (find_choice_letter(tp.token, {c})) {
                        total += tp.prob;
                        break;
                    }
                }
            }
            if (total > 0.0) j.token_prob = j.token_prob / total;
        }
        return j;
    }
    throw DataError("completion contained no declared choice letter after " +
                    std::to_string(opts.max_attempts) + " attempts; last raw output: '" + last_raw +
                    "'");
}

std::string attestation_name(AttestationLabel l) {
    switch (l) {
        case AttestationLabel::True: return "True";
        case AttestationLabel::Unknown: return "Unknown";
        case AttestationLabel::False: return "False";
    }
    return "?";
}

AttestationLabel attestation_from_name(std::string_view s) {
    if (s == "True") return AttestationLabel::True;
    if (s == "Unknown") return AttestationLabel::Unknown;
    if (s == "False") return AttestationLabel::False;
    throw ParseError("unknown attestation label '" + std::string(s) + "'");
}

AttestationLabel attest(Model& model, const std::string& hypothesis, const PromptBank& bank,
                        const QueryOptions& opts) {
    Prompt prompt = assemble_attestation_prompt(hypothesis, bank);
    ChoiceJudgment j = query_choice(model, prompt, {'A', 'B', 'C'}, opts);
    switch (j.token) {
        case 'A': return AttestationLabel::True;
        case 'B': return AttestationLabel::Unknown;
        default: return AttestationLabel::False;
    }
}

}  // namespace egnli
