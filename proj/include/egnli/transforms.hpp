#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "egnli/model_client.hpp"
#include "egnli/nli_data.hpp"
#include "egnli/triples.hpp"

namespace egnli {

// Premise predicate phrases available for random-premise substitution,
// keyed by the (arg1 type, arg2 type) pair where types are known.
struct PredicatePool {
    std::map<TypePair, std::vector<std::string>> by_type_pair;
    std::vector<std::string> global;  // deduplicated, sorted

    static PredicatePool harvest(const std::vector<NLIExample>& examples);
    bool empty() const { return global.empty(); }
};

// The example's argument mentions resolved against its premise: first/last
// mention by surface position, per the two-slot statement shape.
struct ArgSpans {
    EntityMention arg1;
    EntityMention arg2;
};

ArgSpans identify_args(const NLIExample& ex);

// predicate phrase between the two argument surfaces
std::string premise_predicate(const NLIExample& ex);

// Random Premise Inference: swap the premise predicate for a random pool
// predicate, keep entities and hypothesis fixed, force the label to
// No-Entail.
NLIExample random_premise(const NLIExample& ex, const PredicatePool& pool, uint64_t rng_seed);

// Replace every annotated entity with a random same-type entity drawn from
// the given frequency stratum, consistently across premise and hypothesis;
// the label is preserved.
NLIExample replace_arguments(const NLIExample& ex, const EntityInventory& inv, Stratum stratum,
                             double quantile, uint64_t rng_seed);

struct SharedEntityResult {
    std::vector<EntityMention> entities;
    int attempts_used = 1;
};

// Extracts entities that occur verbatim in both texts, via the documented
// structured-output prompt. Malformed model output is retried.
SharedEntityResult identify_shared_entities_via_model(const NLIExample& ex, Model& model,
                                                      int max_attempts = 3);

// Applies explicit span replacements to both texts (with a/an repair in
// front of replaced spans); the label is preserved.
NLIExample replace_general_entities(const NLIExample& ex,
                                    const std::vector<std::pair<std::string, std::string>>& replacements);

// Simultaneous longest-match-first replacement; inserted text is never
// rescanned. Repairs a/an agreement immediately before each replaced span.
std::string replace_spans(const std::string& text,
                          const std::map<std::string, std::string>& plan);

}  // namespace egnli
