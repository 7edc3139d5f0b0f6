#include "egnli/prompts.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "egnli/errors.hpp"
#include "egnli/text.hpp"

namespace egnli {

PromptStyle parse_prompt_style(std::string_view name) {
    if (name == "plain") return PromptStyle::plain;
    if (name == "cot") return PromptStyle::cot;
    if (name == "attestation") return PromptStyle::attestation;
    throw ConfigError("unknown prompt style '" + std::string(name) +
                      "' (expected plain, cot, or attestation)");
}

std::string prompt_style_name(PromptStyle s) {
    switch (s) {
        case PromptStyle::plain: return "plain";
        case PromptStyle::cot: return "cot";
        case PromptStyle::attestation: return "attestation";
    }
    return "?";
}

PromptBank PromptBank::defaults() {
    PromptBank bank;
    bank.inference = {
        {"Google bought Youtube", "Google owns Youtube", 'A',
         "Owning is a consequence of buying.",
         "the premise describe Google bought YouTube.",
         "the hypothesis state that Google owns the YouTube.",
         "company A bought company B, it means that the company B belongs to company A now. "
         "So the premise entails hypothesis."},
        {"Google owns Youtube", "Google bought Youtube", 'B',
         "Owning does not imply buying, the ownership may come from other means.",
         "the premise state that Google owns the YouTube now.",
         "the hypothesis describe Google bought YouTube.",
         "owning does not imply buying, the ownership may come from other means. "
         "So the premise does not entail hypothesis."},
        {"John went to the mall", "John drove to the mall", 'B',
         "John may have gone to the mall by other means.",
         "the premise state that a person go to someplace.",
         "the hypothesis describe a person went to someplace by driving car.",
         "A person may have gone to the place by other ways, so the premise does not entail "
         "hypothesis."},
        {"John drove to the mall", "John went to the mall", 'A',
         "Driving is a means of going to the mall.",
         "the premise describe a person went to someplace by driving car.",
         "the hypothesis state that a person go to someplace.",
         "Driving present the way to went to the place, so the premise entails hypothesis."},
    };
    bank.attestation = {
        {"Google bought Youtube", 'A'},
        {"Yoshua Bengio likes oak trees", 'B'},
        {"The sun rises from the west", 'C'},
    };
    return bank;
}

PromptBank PromptBank::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open prompt bank file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("prompt bank " + path.string() + ": " + e.what());
    }
    PromptBank bank;
    for (const auto& s : j.value("inference", nlohmann::json::array())) {
        InferenceShot shot;
        shot.premise = s.at("premise").get<std::string>();
        shot.hypothesis = s.at("hypothesis").get<std::string>();
        shot.answer = s.at("answer").get<std::string>().at(0);
        shot.rationale = s.value("rationale", "");
        shot.analyze_premise = s.value("analyze_premise", "");
        shot.analyze_hypothesis = s.value("analyze_hypothesis", "");
        shot.reasoning = s.value("reasoning", "");
        bank.inference.push_back(std::move(shot));
    }
    for (const auto& s : j.value("attestation", nlohmann::json::array()))
        bank.attestation.push_back(
            AttestationShot{s.at("statement").get<std::string>(), s.at("answer").get<std::string>().at(0)});
    return bank;
}

void PromptBank::validate_inference() const {
    if (inference.size() != 4)
        throw ConfigError("inference bank of wrong arity: expected 4 shots, got " +
                          std::to_string(inference.size()));
    size_t pos = 0, neg = 0;
    for (const auto& s : inference) {
        if (s.answer == 'A') ++pos;
        else if (s.answer == 'B') ++neg;
        else throw ConfigError(std::string("inference shot answer must be A or B, got ") + s.answer);
    }
    if (pos != 2 || neg != 2)
        throw ConfigError("inference bank must hold 2 positive and 2 negative shots, got " +
                          std::to_string(pos) + "/" + std::to_string(neg));
}

void PromptBank::validate_attestation() const {
    if (attestation.size() != 3)
        throw ConfigError("attestation bank of wrong arity: expected 3 shots, got " +
                          std::to_string(attestation.size()));
    bool seen[3] = {false, false, false};
    for (const auto& s : attestation) {
        if (s.answer < 'A' || s.answer > 'C')
            throw ConfigError(std::string("attestation shot answer must be A, B, or C, got ") +
                              s.answer);
        seen[s.answer - 'A'] = true;
    }
    if (!(seen[0] && seen[1] && seen[2]))
        throw ConfigError("attestation bank must cover choices A, B, and C");
}

namespace {

std::string question_line(const std::string& premise, const std::string& hypothesis) {
    return "If " + strip_sentence_end(premise) + ", then " + strip_sentence_end(hypothesis) +
           ". Is that true or false?";
}

constexpr const char* kBinaryChoices = "A) True\nB) False";
constexpr const char* kTernaryChoices = "A) True\nB) Unknown\nC) False";

std::string render_plain_shot(const InferenceShot& s) {
    std::string answer_text = s.answer == 'A' ? "A) True." : "B) False.";
    std::string block = question_line(s.premise, s.hypothesis) + "\n" + kBinaryChoices +
                        "\nAnswer: " + answer_text;
    if (!s.rationale.empty()) block += " " + s.rationale;
    return block;
}

std::string render_cot_shot(const InferenceShot& s) {
    std::string answer_text = s.answer == 'A' ? "A) True." : "B) False.";
    return question_line(s.premise, s.hypothesis) + "\n" + kBinaryChoices +
           "\nExplanation:\n  1. Analyze Premise: " + s.analyze_premise +
           "\n  2. Analyze Hypothesis: " + s.analyze_hypothesis +
           "\n  3. Reasoning: " + s.reasoning + "\nAnswer: " + answer_text;
}

std::string render_attestation_shot(const AttestationShot& s) {
    const char* answer_text =
        s.answer == 'A' ? "A) True." : (s.answer == 'B' ? "B) Unknown." : "C) False.");
    return strip_sentence_end(s.statement) + ". Is that true or false?\n" + kTernaryChoices +
           "\nAnswer: " + answer_text;
}

}  // namespace

std::string Prompt::text() const {
    std::string out;
    for (const auto& s : shots) {
        out += s;
        out += "\n";
    }
    out += query;
    return out;
}

Prompt assemble_inference_prompt(const NLIExample& ex, const PromptBank& bank, PromptStyle style) {
    if (style != PromptStyle::plain && style != PromptStyle::cot)
        throw ConfigError("inference prompts support styles plain and cot only");
    bank.validate_inference();

    Prompt p;
    p.style = style;
    p.choices = {'A', 'B'};
    for (const auto& s : bank.inference)
        p.shots.push_back(style == PromptStyle::plain ? render_plain_shot(s) : render_cot_shot(s));
    p.query = question_line(ex.premise, ex.hypothesis) + "\n" + kBinaryChoices + "\nAnswer:";
    return p;
}

Prompt assemble_attestation_prompt(const std::string& hypothesis, const PromptBank& bank) {
    bank.validate_attestation();

    Prompt p;
    p.style = PromptStyle::attestation;
    p.choices = {'A', 'B', 'C'};
    for (const auto& s : bank.attestation) p.shots.push_back(render_attestation_shot(s));
    p.query = strip_sentence_end(hypothesis) + ". Is that true or false?\n" + kTernaryChoices +
              "\nAnswer:";
    return p;
}

const char* const kSharedEntityPromptTemplate =
    "List every entity that appears in both the premise and the hypothesis.\n"
    "Write one entity per line as: entity<TAB>type\n"
    "Write NONE if no entity appears in both.\n"
    "Premise: {premise}\n"
    "Hypothesis: {hypothesis}\n"
    "Entities:";

std::string render_shared_entity_prompt(const NLIExample& ex) {
    std::string out = kSharedEntityPromptTemplate;
    auto sub = [&out](const std::string& slot, const std::string& value) {
        out.replace(out.find(slot), slot.size(), value);
    };
    sub("{premise}", ex.premise);
    sub("{hypothesis}", ex.hypothesis);
    return out;
}

}  // namespace egnli
