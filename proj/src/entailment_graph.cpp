#include "egnli/entailment_graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "egnli/errors.hpp"
#include "egnli/rng.hpp"
#include "egnli/text.hpp"

namespace egnli {

Weighting parse_weighting(std::string_view name) {
    if (name == "raw") return Weighting::raw;
    if (name == "pmi") return Weighting::pmi;
    throw ConfigError("unknown weighting '" + std::string(name) + "' (expected raw or pmi)");
}

std::string weighting_name(Weighting w) { return w == Weighting::raw ? "raw" : "pmi"; }

std::string origin_name(RuleOrigin o) {
    switch (o) {
        case RuleOrigin::graph_edge: return "graph_edge";
        case RuleOrigin::negative_sample: return "negative_sample";
        case RuleOrigin::shuffled_control: return "shuffled_control";
    }
    return "?";
}

RuleOrigin origin_from_name(std::string_view s) {
    if (s == "graph_edge") return RuleOrigin::graph_edge;
    if (s == "negative_sample") return RuleOrigin::negative_sample;
    if (s == "shuffled_control") return RuleOrigin::shuffled_control;
    throw ParseError("unknown rule origin '" + std::string(s) + "'");
}

double FeatureIndex::weight(const TypePair& tp, const std::string& pred,
                            const ArgPair& feature) const {
    auto tp_it = by_type_pair.find(tp);
    if (tp_it == by_type_pair.end()) return 0.0;
    auto p_it = tp_it->second.predicates.find(pred);
    if (p_it == tp_it->second.predicates.end()) return 0.0;
    auto f_it = p_it->second.weights.find(feature);
    return f_it == p_it->second.weights.end() ? 0.0 : f_it->second;
}

FeatureIndex build_feature_index(const TripleStore& store, Weighting weighting, int min_support) {
    if (store.empty()) throw DataError("cannot build feature index: triple store is empty");
    if (min_support < 1)
        throw ConfigError("min_support must be >= 1, got " + std::to_string(min_support));

    FeatureIndex index;
    index.weighting = weighting;
    index.min_support = min_support;

    for (const auto& [tp, preds] : store.triples) {
        TypePairIndex tpi;
        for (const auto& [pred, feats] : preds) {
            long long total = 0;
            for (const auto& [args, count] : feats) {
                tpi.feature_totals[args] += count;
                total += count;
            }
            tpi.predicate_totals[pred] = total;
            tpi.grand_total += total;
        }

        for (const auto& [pred, feats] : preds) {
            if (static_cast<int>(feats.size()) < min_support) continue;
            PredicateFeatures pf;
            for (const auto& [args, count] : feats) {
                double w = 0.0;
                if (weighting == Weighting::raw) {
                    w = static_cast<double>(count);
                } else {
                    const double num = static_cast<double>(count) * static_cast<double>(tpi.grand_total);
                    const double den = static_cast<double>(tpi.predicate_totals.at(pred)) *
                                       static_cast<double>(tpi.feature_totals.at(args));
                    w = std::max(0.0, std::log(num / den));
                }
                if (w > 0.0) {
                    pf.weights[args] = w;
                    pf.weight_sum += w;
                }
            }
            // a predicate whose every weight clamped to zero has no support left
            if (!pf.weights.empty()) tpi.predicates[pred] = std::move(pf);
        }
        index.by_type_pair[tp] = std::move(tpi);
    }
    return index;
}

double weeds_score(const FeatureIndex& index, const TypePair& tp, const std::string& premise,
                   const std::string& hypothesis) {
    auto tp_it = index.by_type_pair.find(tp);
    if (tp_it == index.by_type_pair.end())
        throw DataError("no support for premise predicate '" + premise + "': type pair (" +
                        tp.type1 + ", " + tp.type2 + ") not indexed");
    const TypePairIndex& tpi = tp_it->second;

    auto p_it = tpi.predicates.find(premise);
    if (p_it == tpi.predicates.end() || p_it->second.weight_sum <= 0.0)
        throw DataError("no support for premise predicate '" + premise + "' in type pair (" +
                        tp.type1 + ", " + tp.type2 + ")");

    auto q_it = tpi.predicates.find(hypothesis);
    if (q_it == tpi.predicates.end()) return 0.0;

    const auto& pw = p_it->second.weights;
    const auto& qw = q_it->second.weights;
    double overlap = 0.0;
    for (const auto& [feature, w] : pw)
        if (qw.count(feature)) overlap += w;
    return overlap / p_it->second.weight_sum;
}

bool EntailmentGraph::contains(const std::string& premise, const std::string& hypothesis,
                               const TypePair& tp) const {
    for (const auto& r : rules)
        if (r.types == tp && r.premise_pred == premise && r.hypothesis_pred == hypothesis)
            return true;
    return false;
}

EntailmentGraph build_graph(const FeatureIndex& index, double tau_pos, int top_k) {
    if (!(tau_pos > 0.0 && tau_pos <= 1.0))
        throw ConfigError("tau_pos must be in (0, 1], got " + std::to_string(tau_pos));
    if (top_k < 1) throw ConfigError("top_k must be >= 1, got " + std::to_string(top_k));

    EntailmentGraph graph;
    graph.params =
        GraphParams{index.weighting, tau_pos, index.min_support, top_k};

    for (const auto& [tp, tpi] : index.by_type_pair) {
        std::vector<std::string>& vocab = graph.vocab[tp];
        for (const auto& [pred, _] : tpi.predicates) vocab.push_back(pred);

        for (const auto& [premise, pf] : tpi.predicates) {
            if (pf.weight_sum <= 0.0) continue;
            std::vector<EntailmentRule> candidates;
            for (const auto& [hypothesis, _] : tpi.predicates) {
                if (hypothesis == premise) continue;
                double s = weeds_score(index, tp, premise, hypothesis);
                if (s >= tau_pos)
                    candidates.push_back(EntailmentRule{premise, hypothesis, tp, s, Label::Entail,
                                                        RuleOrigin::graph_edge});
            }
            std::sort(candidates.begin(), candidates.end(),
                      [](const EntailmentRule& a, const EntailmentRule& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.hypothesis_pred < b.hypothesis_pred;
                      });
            if (candidates.size() > static_cast<size_t>(top_k)) candidates.resize(top_k);
            for (auto& r : candidates) graph.rules.push_back(std::move(r));
        }
    }
    return graph;
}

std::vector<EntailmentRule> sample_positive_rules(const EntailmentGraph& graph, size_t n,
                                                  uint64_t rng_seed) {
    if (n > graph.rules.size())
        throw DataError("requested " + std::to_string(n) + " positive rules but the graph has only " +
                        std::to_string(graph.rules.size()));
    std::vector<EntailmentRule> pool = graph.rules;
    Rng rng(rng_seed);
    rng.shuffle(pool);
    pool.resize(n);
    return pool;
}

std::vector<EntailmentRule> sample_negative_rules(const FeatureIndex& index,
                                                  const EntailmentGraph& graph, size_t n,
                                                  double tau_neg, uint64_t rng_seed,
                                                  const NegativeSamplingOptions& opts) {
    if (tau_neg >= graph.params.tau_pos)
        throw ConfigError("tau_neg (" + std::to_string(tau_neg) + ") must be below tau_pos (" +
                          std::to_string(graph.params.tau_pos) + ")");

    // type pairs with at least two scorable predicates
    struct Site {
        TypePair tp;
        std::vector<std::string> preds;
    };
    std::vector<Site> sites;
    for (const auto& [tp, tpi] : index.by_type_pair) {
        Site site{tp, {}};
        for (const auto& [pred, pf] : tpi.predicates)
            if (pf.weight_sum > 0.0) site.preds.push_back(pred);
        if (site.preds.size() >= 2) sites.push_back(std::move(site));
    }
    if (sites.empty())
        throw DataError("negative space too small: no type pair has two scorable predicates");

    std::set<std::tuple<std::string, std::string, TypePair>> graph_edges;
    for (const auto& r : graph.rules) graph_edges.insert({r.premise_pred, r.hypothesis_pred, r.types});

    Rng rng(rng_seed);
    std::vector<EntailmentRule> out;
    out.reserve(n);
    while (out.size() < n) {
        bool accepted = false;
        for (int attempt = 0; attempt < opts.attempts_per_sample; ++attempt) {
            const Site& site = sites[rng.index(sites.size())];
            const std::string& premise = site.preds[rng.index(site.preds.size())];
            const std::string& hypothesis = site.preds[rng.index(site.preds.size())];
            if (premise == hypothesis) continue;
            if (graph_edges.count({premise, hypothesis, site.tp})) continue;
            double s = weeds_score(index, site.tp, premise, hypothesis);
            if (s >= tau_neg) continue;
            out.push_back(EntailmentRule{premise, hypothesis, site.tp, s, Label::NoEntail,
                                         RuleOrigin::negative_sample});
            accepted = true;
            break;
        }
        if (!accepted)
            throw DataError("negative space too small: exhausted " +
                            std::to_string(opts.attempts_per_sample) + " attempts after " +
                            std::to_string(out.size()) + " of " + std::to_string(n) + " samples");
    }
    return out;
}

std::vector<EntailmentRule> shuffle_predicates_control(const std::vector<EntailmentRule>& rules,
                                                       uint64_t rng_seed) {
    if (rules.size() < 2)
        throw DataError("shuffle control needs at least 2 rules, got " + std::to_string(rules.size()));

    std::vector<EntailmentRule> out = rules;
    for (auto& r : out) r.origin = RuleOrigin::shuffled_control;

    // group rule positions by type pair
    std::map<TypePair, std::vector<size_t>> groups;
    for (size_t i = 0; i < out.size(); ++i) groups[out[i].types].push_back(i);

    Rng rng(rng_seed);
    constexpr int kAttempts = 100;
    for (auto& [tp, positions] : groups) {
        const size_t m = positions.size();
        if (m < 2) continue;
        std::vector<size_t> perm(m);
        for (size_t i = 0; i < m; ++i) perm[i] = i;

        auto fixed_points = [&](const std::vector<size_t>& p) {
            size_t fp = 0;
            for (size_t i = 0; i < m; ++i)
                if (rules[positions[p[i]]].hypothesis_pred == rules[positions[i]].hypothesis_pred) ++fp;
            return fp;
        };
        auto collides = [&](const std::vector<size_t>& p) {
            for (size_t i = 0; i < m; ++i)
                if (rules[positions[p[i]]].hypothesis_pred == rules[positions[i]].premise_pred)
                    return true;
            return false;
        };

        std::vector<size_t> chosen(m);
        for (size_t i = 0; i < m; ++i) chosen[i] = i;  // identity fallback
        bool found = false;
        for (int attempt = 0; attempt < kAttempts && !found; ++attempt) {
            rng.shuffle(perm);
            if (fixed_points(perm) == 0 && !collides(perm)) {
                chosen = perm;
                found = true;
            }
        }
        // allow fixed points, never premise == hypothesis
        for (int attempt = 0; attempt < kAttempts && !found; ++attempt) {
            rng.shuffle(perm);
            if (!collides(perm)) {
                chosen = perm;
                found = true;
            }
        }
        for (size_t i = 0; i < m; ++i)
            out[positions[i]].hypothesis_pred = rules[positions[chosen[i]]].hypothesis_pred;
    }
    return out;
}

void write_graph_jsonl(const EntailmentGraph& graph, std::ostream& out) {
    nlohmann::json header{{"params",
                           {{"weighting", weighting_name(graph.params.weighting)},
                            {"tau_pos", graph.params.tau_pos},
                            {"min_support", graph.params.min_support},
                            {"top_k", graph.params.top_k}}}};
    out << header.dump() << "\n";
    for (const auto& r : graph.rules) {
        nlohmann::json j{{"premise_pred", r.premise_pred},
                         {"hypothesis_pred", r.hypothesis_pred},
                         {"type1", r.types.type1},
                         {"type2", r.types.type2},
                         {"score", r.score},
                         {"label", label_name(r.label)},
                         {"origin", origin_name(r.origin)}};
        out << j.dump() << "\n";
    }
}

EntailmentGraph read_graph_jsonl(std::istream& in) {
    EntailmentGraph graph;
    std::string line;
    size_t line_no = 0;
    bool saw_header = false;
    std::set<std::string> seen_preds;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("graph line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("params")) {
            const auto& p = j.at("params");
            graph.params.weighting = parse_weighting(p.at("weighting").get<std::string>());
            graph.params.tau_pos = p.at("tau_pos").get<double>();
            graph.params.min_support = p.at("min_support").get<int>();
            graph.params.top_k = p.at("top_k").get<int>();
            saw_header = true;
            continue;
        }
        try {
            EntailmentRule r;
            r.premise_pred = j.at("premise_pred").get<std::string>();
            r.hypothesis_pred = j.at("hypothesis_pred").get<std::string>();
            r.types = TypePair{j.at("type1").get<std::string>(), j.at("type2").get<std::string>()};
            r.score = j.at("score").get<double>();
            r.label = label_from_name(j.at("label").get<std::string>());
            r.origin = origin_from_name(j.at("origin").get<std::string>());
            graph.rules.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("graph line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!saw_header) throw ParseError("graph file has no header record");
    // vocabulary reconstructed from the rules; edge-free predicates are not recoverable
    std::map<TypePair, std::set<std::string>> vocab_sets;
    for (const auto& r : graph.rules) {
        vocab_sets[r.types].insert(r.premise_pred);
        vocab_sets[r.types].insert(r.hypothesis_pred);
    }
    for (const auto& [tp, preds] : vocab_sets)
        graph.vocab[tp] = std::vector<std::string>(preds.begin(), preds.end());
    return graph;
}

}  // namespace egnli
