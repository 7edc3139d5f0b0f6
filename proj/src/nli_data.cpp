#include "egnli/nli_data.hpp"

#include <istream>
#include <map>
#include <ostream>

#include "egnli/errors.hpp"
#include "egnli/text.hpp"

namespace egnli {

std::string label_name(Label l) { return l == Label::Entail ? "Entail" : "No-Entail"; }

Label label_from_name(std::string_view s) {
    if (s == "Entail") return Label::Entail;
    if (s == "No-Entail") return Label::NoEntail;
    throw ParseError("unknown label name '" + std::string(s) + "'");
}

NliSchema parse_schema(std::string_view name) {
    if (name == "levy_holt") return NliSchema::levy_holt;
    if (name == "snli") return NliSchema::snli;
    if (name == "generic") return NliSchema::generic;
    throw ConfigError("unknown NLI schema '" + std::string(name) +
                      "' (expected levy_holt, snli, or generic)");
}

namespace {

Label map_label(NliSchema schema, const std::string& raw, size_t row_no) {
    const std::string tok = lowercase(trim(raw));
    switch (schema) {
        case NliSchema::levy_holt:
            if (tok == "entail" || tok == "true") return Label::Entail;
            if (tok == "no-entail" || tok == "no_entail" || tok == "false") return Label::NoEntail;
            break;
        case NliSchema::snli:
            if (tok == "entailment") return Label::Entail;
            if (tok == "neutral" || tok == "contradiction") return Label::NoEntail;
            break;
        case NliSchema::generic:
            if (tok == "entail") return Label::Entail;
            if (tok == "no-entail" || tok == "no_entail") return Label::NoEntail;
            break;
    }
    throw ParseError("row " + std::to_string(row_no) + ": unknown label token '" + raw + "'");
}

}  // namespace

std::vector<NLIExample> load_nli_tsv(std::istream& in, NliSchema schema,
                                     const std::string& source_name) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError("NLI TSV is empty (missing header row)");

    std::map<std::string, size_t> col;
    {
        auto names = split(trim(header), '\t');
        for (size_t i = 0; i < names.size(); ++i) col[lowercase(trim(names[i]))] = i;
    }
    for (const char* required : {"premise", "hypothesis", "label"})
        if (!col.count(required))
            throw ParseError(std::string("NLI TSV header is missing column '") + required + "'");

    std::vector<NLIExample> out;
    std::string line;
    size_t row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        auto field = [&](const char* name) -> std::string {
            auto it = col.find(name);
            if (it == col.end() || it->second >= fields.size()) return "";
            return trim(fields[it->second]);
        };

        NLIExample ex;
        ex.premise = field("premise");
        ex.hypothesis = field("hypothesis");
        if (ex.premise.empty() || ex.hypothesis.empty())
            throw ParseError("row " + std::to_string(row_no) + ": empty premise or hypothesis");
        ex.label = map_label(schema, field("label"), row_no);
        ex.meta.source = source_name;
        ex.meta.id = field("id");
        if (ex.meta.id.empty()) ex.meta.id = source_name + ":" + std::to_string(row_no);
        ex.meta.direction = field("direction");
        out.push_back(std::move(ex));
    }
    return out;
}

void to_json(nlohmann::json& j, const NLIExample& ex) {
    nlohmann::json subs = nlohmann::json::object();
    for (const auto& [orig, sub] : ex.meta.substitutions)
        subs[orig] = {{"replacement", sub.replacement}, {"type", sub.type}};

    nlohmann::json entities = nlohmann::json::array();
    for (const auto& m : ex.meta.entities)
        entities.push_back({{"surface", m.surface}, {"type", m.type}});

    nlohmann::json meta{{"source", ex.meta.source},
                        {"id", ex.meta.id},
                        {"transforms", ex.meta.transforms},
                        {"substitutions", subs},
                        {"entities", entities}};
    if (!ex.meta.direction.empty()) meta["direction"] = ex.meta.direction;
    if (!ex.meta.original_predicate.empty()) meta["original_predicate"] = ex.meta.original_predicate;
    if (ex.meta.rule) {
        meta["rule"] = {{"premise_pred", ex.meta.rule->premise_pred},
                        {"hypothesis_pred", ex.meta.rule->hypothesis_pred},
                        {"type1", ex.meta.rule->type1},
                        {"type2", ex.meta.rule->type2},
                        {"origin", ex.meta.rule->origin},
                        {"score", ex.meta.rule->score}};
    }

    j = nlohmann::json{{"premise", ex.premise},
                       {"hypothesis", ex.hypothesis},
                       {"label", label_name(ex.label)},
                       {"meta", meta}};
}

void from_json(const nlohmann::json& j, NLIExample& ex) {
    ex.premise = j.at("premise").get<std::string>();
    ex.hypothesis = j.at("hypothesis").get<std::string>();
    ex.label = label_from_name(j.at("label").get<std::string>());
    ex.meta = ExampleMeta{};
    if (!j.contains("meta")) return;
    const auto& m = j.at("meta");
    ex.meta.source = m.value("source", "");
    ex.meta.id = m.value("id", "");
    ex.meta.direction = m.value("direction", "");
    ex.meta.original_predicate = m.value("original_predicate", "");
    if (m.contains("transforms")) ex.meta.transforms = m.at("transforms").get<std::vector<std::string>>();
    if (m.contains("substitutions"))
        for (const auto& [orig, sub] : m.at("substitutions").items())
            ex.meta.substitutions[orig] =
                EntitySub{sub.at("replacement").get<std::string>(), sub.at("type").get<std::string>()};
    if (m.contains("entities"))
        for (const auto& e : m.at("entities"))
            ex.meta.entities.push_back(
                EntityMention{e.at("surface").get<std::string>(), e.at("type").get<std::string>()});
    if (m.contains("rule")) {
        const auto& r = m.at("rule");
        ex.meta.rule = RuleRef{r.at("premise_pred").get<std::string>(),
                               r.at("hypothesis_pred").get<std::string>(),
                               r.at("type1").get<std::string>(),
                               r.at("type2").get<std::string>(),
                               r.at("origin").get<std::string>(),
                               r.value("score", 0.0)};
    }
}

void write_examples_jsonl(const std::vector<NLIExample>& examples, std::ostream& out) {
    for (const auto& ex : examples) {
        nlohmann::json j = ex;
        out << j.dump() << "\n";
    }
}

std::vector<NLIExample> read_examples_jsonl(std::istream& in) {
    std::vector<NLIExample> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<NLIExample>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("examples JSONL line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void attach_entity_annotations(std::vector<NLIExample>& examples, std::istream& sidecar) {
    std::map<std::string, std::vector<EntityMention>> by_id;
    std::string line;
    size_t line_no = 0;
    while (std::getline(sidecar, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("annotation line " + std::to_string(line_no) + ": " + e.what());
        }
        std::vector<EntityMention> mentions;
        for (const auto& e : j.at("entities"))
            mentions.push_back(
                EntityMention{e.at("surface").get<std::string>(), e.at("type").get<std::string>()});
        by_id[j.at("id").get<std::string>()] = std::move(mentions);
    }
    for (auto& ex : examples) {
        auto it = by_id.find(ex.meta.id);
        if (it != by_id.end()) ex.meta.entities = it->second;
    }
}

}  // namespace egnli
