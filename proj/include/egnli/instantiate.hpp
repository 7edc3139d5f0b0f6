#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "egnli/entailment_graph.hpp"
#include "egnli/nli_data.hpp"
#include "egnli/triples.hpp"

namespace egnli {

// Renders "{arg1} {predicate_text} {arg2}" statements. Predicates become
// display phrases through the mapping, falling back to underscore-to-space
// conversion of the normalized form.
struct SurfaceTemplate {
    std::string pattern = "{arg1} {predicate_text} {arg2}";
    std::map<std::string, std::string> display;  // predicate -> natural phrase

    std::string predicate_text(const std::string& predicate) const;
    std::string render(const std::string& arg1, const std::string& predicate,
                       const std::string& arg2) const;
    // inverse of render given the argument surfaces; throws when the text
    // does not embed them per the pattern
    std::string extract_predicate_text(const std::string& text, const std::string& arg1,
                                       const std::string& arg2) const;

    void validate() const;  // each slot exactly once
};

// Both statements share one sampled entity pair; entities are drawn uniformly
// from the type's inventory population, and two slots of the same type get
// distinct entities.
NLIExample instantiate_rule(const EntailmentRule& rule, const EntityInventory& inv,
                            const SurfaceTemplate& tmpl, uint64_t rng_seed);

struct TrainingRecord {
    std::string prompt;
    std::string completion;
    Label label = Label::Entail;
    ExampleMeta meta;
};

TrainingRecord make_training_record(const NLIExample& ex);

// inverse templating over the emitted prompt
std::pair<std::string, std::string> parse_training_prompt(const std::string& prompt);

void to_json(nlohmann::json& j, const TrainingRecord& r);
void write_training_jsonl(const std::vector<TrainingRecord>& records, std::ostream& out);

struct TrainingGenOptions {
    double tau_neg = 0.01;
    SurfaceTemplate surface;
    int attempts_per_record = 100;
    bool allow_rule_reuse = true;  // reuse rules with fresh entities once the pool is exhausted
    NegativeSamplingOptions negative;
};

struct TrainingSet {
    std::vector<TrainingRecord> records;
    nlohmann::json finetune_config;  // hyperparameter sidecar for external trainers
};

// Exactly n_pos Entail and n_neg No-Entail records, deduplicated on
// (premise, hypothesis) across the whole corpus, deterministically shuffled.
TrainingSet generate_training_set(const EntailmentGraph& graph, const FeatureIndex& index,
                                  const EntityInventory& inv, size_t n_pos, size_t n_neg,
                                  uint64_t rng_seed, const TrainingGenOptions& opts = {});

nlohmann::json finetune_sidecar();

}  // namespace egnli
