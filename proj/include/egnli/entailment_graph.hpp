#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "egnli/nli_data.hpp"
#include "egnli/triples.hpp"

namespace egnli {

enum class Weighting { raw, pmi };

Weighting parse_weighting(std::string_view name);
std::string weighting_name(Weighting w);

// Per type pair: feature weights for each kept predicate plus the raw
// marginal counts the weighting was computed from. Marginals cover the whole
// type pair, including predicates later dropped for low support.
struct PredicateFeatures {
    std::map<ArgPair, double> weights;  // strictly positive entries only
    double weight_sum = 0.0;
};

struct TypePairIndex {
    std::map<std::string, PredicateFeatures> predicates;
    std::map<std::string, long long> predicate_totals;
    std::map<ArgPair, long long> feature_totals;
    long long grand_total = 0;
};

struct FeatureIndex {
    std::map<TypePair, TypePairIndex> by_type_pair;
    Weighting weighting = Weighting::raw;
    int min_support = 1;

    // 0.0 when the pair was never observed or the weight was clamped away
    double weight(const TypePair& tp, const std::string& pred, const ArgPair& feature) const;
};

enum class RuleOrigin { graph_edge, negative_sample, shuffled_control };

std::string origin_name(RuleOrigin o);
RuleOrigin origin_from_name(std::string_view s);

struct EntailmentRule {
    std::string premise_pred;
    std::string hypothesis_pred;
    TypePair types;
    double score = 0.0;
    Label label = Label::Entail;
    RuleOrigin origin = RuleOrigin::graph_edge;
};

struct GraphParams {
    Weighting weighting = Weighting::raw;
    double tau_pos = 0.1;
    int min_support = 3;
    int top_k = 20;
};

struct EntailmentGraph {
    std::vector<EntailmentRule> rules;  // label Entail, deterministic order
    std::map<TypePair, std::vector<std::string>> vocab;
    GraphParams params;

    bool contains(const std::string& premise, const std::string& hypothesis,
                  const TypePair& tp) const;
};

// Predicates with fewer than min_support distinct raw features in a type
// pair are dropped from the index; marginal counts keep them. pmi weighting:
// w(p,f) = max(0, log(c(p,f) * N / (c(p) * c(f)))) within the type pair.
FeatureIndex build_feature_index(const TripleStore& store, Weighting weighting, int min_support);

// Directional Weeds precision:
//   score(p -> q) = sum_{f in F(p) ∩ F(q)} w(p,f) / sum_{f in F(p)} w(p,f)
double weeds_score(const FeatureIndex& index, const TypePair& tp, const std::string& premise,
                   const std::string& hypothesis);

// Rule for every ordered pair scoring >= tau_pos, capped at top_k hypotheses
// per premise (score descending, ties by hypothesis ascending). Self-pairs
// excluded.
EntailmentGraph build_graph(const FeatureIndex& index, double tau_pos, int top_k);

std::vector<EntailmentRule> sample_positive_rules(const EntailmentGraph& graph, size_t n,
                                                  uint64_t rng_seed);

struct NegativeSamplingOptions {
    int attempts_per_sample = 100;
};

// Ordered same-type-pair predicate pairs with weeds score < tau_neg that are
// not graph edges; labeled No-Entail, origin negative_sample.
std::vector<EntailmentRule> sample_negative_rules(const FeatureIndex& index,
                                                  const EntailmentGraph& graph, size_t n,
                                                  double tau_neg, uint64_t rng_seed,
                                                  const NegativeSamplingOptions& opts = {});

// Permutes hypothesis predicates across rules sharing a type pair,
// preferring derangements; origin becomes shuffled_control.
std::vector<EntailmentRule> shuffle_predicates_control(const std::vector<EntailmentRule>& rules,
                                                       uint64_t rng_seed);

// JSONL: header record {"params": {...}} followed by one rule per line.
void write_graph_jsonl(const EntailmentGraph& graph, std::ostream& out);
EntailmentGraph read_graph_jsonl(std::istream& in);

}  // namespace egnli
