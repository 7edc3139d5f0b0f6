#include "egnli/instantiate.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "egnli/errors.hpp"
#include "egnli/rng.hpp"
#include "egnli/text.hpp"

namespace egnli {

namespace {

constexpr const char* kArg1Slot = "{arg1}";
constexpr const char* kPredSlot = "{predicate_text}";
constexpr const char* kArg2Slot = "{arg2}";

size_t count_occurrences(const std::string& s, const std::string& needle) {
    size_t n = 0;
    for (size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

void SurfaceTemplate::validate() const {
    for (const char* slot : {kArg1Slot, kPredSlot, kArg2Slot})
        if (count_occurrences(pattern, slot) != 1)
            throw ConfigError("surface pattern must contain '" + std::string(slot) +
                              "' exactly once: '" + pattern + "'");
}

std::string SurfaceTemplate::predicate_text(const std::string& predicate) const {
    auto it = display.find(predicate);
    if (it != display.end()) return it->second;
    std::string out = predicate;
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

std::string SurfaceTemplate::render(const std::string& arg1, const std::string& predicate,
                                    const std::string& arg2) const {
    std::string out = pattern;
    auto replace_slot = [&out](const std::string& slot, const std::string& value) {
        out.replace(out.find(slot), slot.size(), value);
    };
    replace_slot(kArg1Slot, arg1);
    replace_slot(kPredSlot, predicate_text(predicate));
    replace_slot(kArg2Slot, arg2);
    return out;
}

std::string SurfaceTemplate::extract_predicate_text(const std::string& text,
                                                    const std::string& arg1,
                                                    const std::string& arg2) const {
    // supports the default pattern shape: arg1 prefix, arg2 suffix
    std::string head = pattern.substr(0, pattern.find(kArg1Slot));
    std::string tail = pattern.substr(pattern.find(kArg2Slot) + std::string(kArg2Slot).size());
    std::string prefix = head + arg1 + " ";
    std::string suffix = " " + arg2 + tail;
    if (!starts_with(text, prefix) || !ends_with(text, suffix) ||
        text.size() < prefix.size() + suffix.size())
        throw DataError("text does not parse under the surface template: '" + text + "' (arg1='" +
                        arg1 + "', arg2='" + arg2 + "')");
    return text.substr(prefix.size(), text.size() - prefix.size() - suffix.size());
}

namespace {

const InventoryEntry& pick_entity(const std::vector<InventoryEntry>& pop, Rng& rng,
                                  const std::string* exclude_id, const std::string& type) {
    if (exclude_id == nullptr) return pop[rng.index(pop.size())];
    if (pop.size() < 2)
        throw DataError("type '" + type +
                        "' has a single entity but is used in both argument slots");
    for (;;) {
        const InventoryEntry& e = pop[rng.index(pop.size())];
        if (e.entity_id != *exclude_id) return e;
    }
}

}  // namespace

NLIExample instantiate_rule(const EntailmentRule& rule, const EntityInventory& inv,
                            const SurfaceTemplate& tmpl, uint64_t rng_seed) {
    auto population = [&inv](const std::string& type) -> const std::vector<InventoryEntry>& {
        auto it = inv.by_type.find(type);
        if (it == inv.by_type.end() || it->second.empty())
            throw DataError("no entities of type '" + type + "' in the inventory");
        return it->second;
    };
    const auto& pop1 = population(rule.types.type1);
    const auto& pop2 = population(rule.types.type2);

    Rng rng(rng_seed);
    const InventoryEntry& e1 = pop1[rng.index(pop1.size())];
    const bool shared_type = rule.types.type1 == rule.types.type2;
    const InventoryEntry& e2 =
        pick_entity(pop2, rng, shared_type ? &e1.entity_id : nullptr, rule.types.type2);

    NLIExample ex;
    ex.premise = tmpl.render(e1.surface, rule.premise_pred, e2.surface);
    ex.hypothesis = tmpl.render(e1.surface, rule.hypothesis_pred, e2.surface);
    ex.label = rule.label;
    ex.meta.source = "eg";
    ex.meta.substitutions["arg1"] = EntitySub{e1.surface, rule.types.type1};
    ex.meta.substitutions["arg2"] = EntitySub{e2.surface, rule.types.type2};
    ex.meta.entities = {EntityMention{e1.surface, rule.types.type1},
                        EntityMention{e2.surface, rule.types.type2}};
    ex.meta.rule = RuleRef{rule.premise_pred, rule.hypothesis_pred, rule.types.type1,
                           rule.types.type2, origin_name(rule.origin), rule.score};
    return ex;
}

TrainingRecord make_training_record(const NLIExample& ex) {
    if (ex.premise.empty() || ex.hypothesis.empty())
        throw DataError("training record needs both premise and hypothesis texts");

    TrainingRecord rec;
    rec.label = ex.label;
    rec.meta = ex.meta;
    rec.prompt = "Question: If " + ex.premise + ", then " + ex.hypothesis +
                 ". Is that true or false?\n(A) True; (B) False";
    if (ex.label == Label::Entail)
        rec.completion =
            "(A) True.\nYes, it is true. " + ex.premise + " entails " + ex.hypothesis + ".";
    else
        rec.completion =
            "(B) False.\nNo, it is false. " + ex.premise + " does not entail " + ex.hypothesis + ".";
    return rec;
}

std::pair<std::string, std::string> parse_training_prompt(const std::string& prompt) {
    constexpr const char* kHead = "Question: If ";
    constexpr const char* kMid = ", then ";
    constexpr const char* kTail = ". Is that true or false?";
    if (!starts_with(prompt, kHead)) throw ParseError("prompt does not start with the question frame");
    size_t mid = prompt.find(kMid);
    size_t tail = prompt.rfind(kTail);
    if (mid == std::string::npos || tail == std::string::npos || tail <= mid)
        throw ParseError("prompt does not match the question frame");
    const size_t head_len = std::string(kHead).size();
    std::string premise = prompt.substr(head_len, mid - head_len);
    const size_t hyp_start = mid + std::string(kMid).size();
    std::string hypothesis = prompt.substr(hyp_start, tail - hyp_start);
    return {premise, hypothesis};
}

void to_json(nlohmann::json& j, const TrainingRecord& r) {
    NLIExample carrier;
    carrier.meta = r.meta;
    nlohmann::json ex = carrier;
    j = nlohmann::json{{"prompt", r.prompt},
                       {"completion", r.completion},
                       {"label", label_name(r.label)},
                       {"meta", ex.at("meta")}};
}

void write_training_jsonl(const std::vector<TrainingRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        nlohmann::json j = r;
        out << j.dump() << "\n";
    }
}

nlohmann::json finetune_sidecar() {
    return nlohmann::json{{"lr", 1e-4}, {"epochs", 12}, {"rank", 8}, {"dropout", 0.05}};
}

namespace {

// Produce `want` unique records from a rule pool, retrying entity draws on
// text collisions; reuse cycles the pool with a fresh shuffle per pass.
void fill_records(const std::vector<EntailmentRule>& pool, const EntityInventory& inv,
                  const TrainingGenOptions& opts, size_t want, uint64_t seed,
                  const std::string& stage, std::set<std::pair<std::string, std::string>>& seen,
                  std::vector<TrainingRecord>& out) {
    if (pool.empty()) throw DataError("no rules available for " + stage + " records");
    std::vector<EntailmentRule> order = pool;
    Rng shuffle_rng(derive_seed(seed, stage + "_order"));
    shuffle_rng.shuffle(order);

    size_t produced = 0;
    uint64_t draw = 0;
    size_t cursor = 0;
    const uint64_t budget =
        static_cast<uint64_t>(opts.attempts_per_record) * static_cast<uint64_t>(want) +
        static_cast<uint64_t>(pool.size());
    while (produced < want) {
        if (cursor == order.size()) {
            if (!opts.allow_rule_reuse)
                throw DataError(stage + " pool exhausted after " + std::to_string(produced) + " of " +
                                std::to_string(want) + " records (rule reuse disabled)");
            cursor = 0;
            shuffle_rng.shuffle(order);
        }
        const EntailmentRule& rule = order[cursor++];
        if (draw >= budget)
            throw DataError("deduplication exhausted the candidate pool: produced " +
                            std::to_string(produced) + " of " + std::to_string(want) + " " + stage +
                            " records");
        NLIExample ex = instantiate_rule(rule, inv, opts.surface, derive_seed(seed, stage, draw++));
        auto key = std::make_pair(ex.premise, ex.hypothesis);
        if (!seen.insert(key).second) continue;
        out.push_back(make_training_record(ex));
        ++produced;
    }
}

}  // namespace

TrainingSet generate_training_set(const EntailmentGraph& graph, const FeatureIndex& index,
                                  const EntityInventory& inv, size_t n_pos, size_t n_neg,
                                  uint64_t rng_seed, const TrainingGenOptions& opts) {
    opts.surface.validate();

    TrainingSet set;
    std::set<std::pair<std::string, std::string>> seen;

    if (n_pos > 0) {
        const size_t base = std::min(n_pos, graph.rules.size());
        if (base == 0) throw DataError("graph has no rules to instantiate");
        if (n_pos > graph.rules.size() && !opts.allow_rule_reuse)
            throw DataError("requested " + std::to_string(n_pos) + " positives but the graph has " +
                            std::to_string(graph.rules.size()) + " rules (rule reuse disabled)");
        std::vector<EntailmentRule> pos_pool =
            sample_positive_rules(graph, base, derive_seed(rng_seed, "pos_rules"));
        fill_records(pos_pool, inv, opts, n_pos, rng_seed, "pos", seen, set.records);
    }
    if (n_neg > 0) {
        std::vector<EntailmentRule> neg_pool = sample_negative_rules(
            index, graph, n_neg, opts.tau_neg, derive_seed(rng_seed, "neg_rules"), opts.negative);
        fill_records(neg_pool, inv, opts, n_neg, rng_seed, "neg", seen, set.records);
    }

    Rng rng(derive_seed(rng_seed, "train_shuffle"));
    rng.shuffle(set.records);
    set.finetune_config = finetune_sidecar();
    return set;
}

}  // namespace egnli
