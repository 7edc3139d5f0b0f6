#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace egnli {

enum class Label { Entail, NoEntail };

std::string label_name(Label l);            // "Entail" / "No-Entail"
Label label_from_name(std::string_view s);  // exact names only

struct EntityMention {
    std::string surface;
    std::string type;
    auto operator<=>(const EntityMention&) const = default;
};

struct EntitySub {
    std::string replacement;
    std::string type;
    auto operator<=>(const EntitySub&) const = default;
};

// Provenance of a generated example back to its entailment rule.
struct RuleRef {
    std::string premise_pred;
    std::string hypothesis_pred;
    std::string type1;
    std::string type2;
    std::string origin;
    double score = 0.0;
};

struct ExampleMeta {
    std::string source;     // dataset name, or "eg" for instantiated rules
    std::string id;
    std::string direction;  // directional-subset flag when the schema carries it
    std::vector<std::string> transforms;          // append-only history
    std::map<std::string, EntitySub> substitutions;  // original -> replacement
    std::string original_predicate;               // set when a transform replaced it
    std::vector<EntityMention> entities;          // typed argument annotations
    std::optional<RuleRef> rule;
};

struct NLIExample {
    std::string premise;
    std::string hypothesis;
    Label label = Label::NoEntail;
    ExampleMeta meta;
};

enum class NliSchema { levy_holt, snli, generic };

NliSchema parse_schema(std::string_view name);

// TSV with a header row naming premise/hypothesis/label (+ optional
// direction, id). The schema fixes the label vocabulary; SNLI's contradiction
// and neutral both collapse to No-Entail.
std::vector<NLIExample> load_nli_tsv(std::istream& in, NliSchema schema,
                                     const std::string& source_name);

void to_json(nlohmann::json& j, const NLIExample& ex);
void from_json(const nlohmann::json& j, NLIExample& ex);

void write_examples_jsonl(const std::vector<NLIExample>& examples, std::ostream& out);
std::vector<NLIExample> read_examples_jsonl(std::istream& in);

// Sidecar JSONL: {"id": ..., "entities": [{"surface": ..., "type": ...}]}.
// Attaches mentions onto matching examples; ids absent from the sidecar are
// left unannotated.
void attach_entity_annotations(std::vector<NLIExample>& examples, std::istream& sidecar);

}  // namespace egnli
