#include "egnli/transforms.hpp"

#include <algorithm>
#include <set>

#include "egnli/errors.hpp"
#include "egnli/rng.hpp"
#include "egnli/text.hpp"

namespace egnli {

namespace {

bool is_vowel_initial(const std::string& s) {
    if (s.empty()) return false;
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

}  // namespace

ArgSpans identify_args(const NLIExample& ex) {
    if (ex.meta.entities.size() < 2)
        throw DataError("example " + ex.meta.id + " has fewer than 2 entity annotations");

    const EntityMention* first = nullptr;
    const EntityMention* last = nullptr;
    for (const auto& m : ex.meta.entities) {
        if (starts_with(ex.premise, m.surface + " ")) first = &m;
        if (ends_with(ex.premise, " " + m.surface)) last = &m;
    }
    if (!first || !last || first == last)
        throw DataError("example " + ex.meta.id +
                        ": premise does not parse as arg1 + predicate + arg2: '" + ex.premise + "'");
    return ArgSpans{*first, *last};
}

std::string premise_predicate(const NLIExample& ex) {
    ArgSpans args = identify_args(ex);
    const std::string prefix = args.arg1.surface + " ";
    const std::string suffix = " " + args.arg2.surface;
    if (ex.premise.size() < prefix.size() + suffix.size())
        throw DataError("example " + ex.meta.id + ": premise too short for its argument spans");
    return ex.premise.substr(prefix.size(), ex.premise.size() - prefix.size() - suffix.size());
}

PredicatePool PredicatePool::harvest(const std::vector<NLIExample>& examples) {
    PredicatePool pool;
    std::set<std::string> global_set;
    std::map<TypePair, std::set<std::string>> typed_sets;
    for (const auto& ex : examples) {
        std::string phrase;
        ArgSpans args{};
        try {
            args = identify_args(ex);
            phrase = premise_predicate(ex);
        } catch (const DataError&) {
            continue;  // unparseable rows contribute nothing
        }
        if (phrase.empty()) continue;
        global_set.insert(phrase);
        if (!args.arg1.type.empty() && !args.arg2.type.empty())
            typed_sets[TypePair{args.arg1.type, args.arg2.type}].insert(phrase);
    }
    pool.global.assign(global_set.begin(), global_set.end());
    for (const auto& [tp, phrases] : typed_sets)
        pool.by_type_pair[tp] = std::vector<std::string>(phrases.begin(), phrases.end());
    return pool;
}

NLIExample random_premise(const NLIExample& ex, const PredicatePool& pool, uint64_t rng_seed) {
    ArgSpans args = identify_args(ex);
    const std::string original = premise_predicate(ex);

    const std::vector<std::string>* candidates = &pool.global;
    if (!args.arg1.type.empty() && !args.arg2.type.empty()) {
        auto it = pool.by_type_pair.find(TypePair{args.arg1.type, args.arg2.type});
        if (it != pool.by_type_pair.end() && it->second.size() >= 2) candidates = &it->second;
    }
    std::vector<std::string> eligible;
    for (const auto& p : *candidates)
        if (p != original) eligible.push_back(p);
    if (eligible.empty() && candidates != &pool.global)
        for (const auto& p : pool.global)
            if (p != original) eligible.push_back(p);
    if (eligible.empty())
        throw DataError("predicate pool too small: no replacement differs from '" + original + "'");

    Rng rng(rng_seed);
    const std::string& replacement = eligible[rng.index(eligible.size())];

    NLIExample out = ex;
    out.premise = args.arg1.surface + " " + replacement + " " + args.arg2.surface;
    out.label = Label::NoEntail;
    out.meta.transforms.push_back("rpi");
    out.meta.original_predicate = original;
    return out;
}

NLIExample replace_arguments(const NLIExample& ex, const EntityInventory& inv, Stratum stratum,
                             double quantile, uint64_t rng_seed) {
    if (ex.meta.entities.empty())
        throw DataError("example " + ex.meta.id + " has no entity annotations");
    for (const auto& m : ex.meta.entities)
        if (m.type.empty())
            throw DataError("example " + ex.meta.id + ": entity '" + m.surface +
                            "' lacks a type annotation");

    std::set<std::string> original_surfaces;
    for (const auto& m : ex.meta.entities) original_surfaces.insert(m.surface);

    Rng rng(rng_seed);
    std::map<std::string, std::string> plan;  // original surface -> replacement surface
    std::map<std::string, EntitySub> subs;
    std::vector<EntityMention> new_mentions;
    std::set<std::string> used;
    for (const auto& m : ex.meta.entities) {
        if (plan.count(m.surface)) {  // same surface annotated twice
            new_mentions.push_back(EntityMention{plan.at(m.surface), m.type});
            continue;
        }
        std::vector<InventoryEntry> population = frequency_stratum(inv, m.type, stratum, quantile);
        std::vector<const InventoryEntry*> eligible;
        for (const auto& e : population)
            if (!original_surfaces.count(e.surface) && !used.count(e.surface))
                eligible.push_back(&e);
        if (eligible.empty())
            throw DataError("empty replacement population for type '" + m.type + "' (stratum " +
                            stratum_name(stratum) + ", entity '" + m.surface + "')");
        const InventoryEntry& pick = *eligible[rng.index(eligible.size())];
        plan[m.surface] = pick.surface;
        used.insert(pick.surface);
        subs[m.surface] = EntitySub{pick.surface, m.type};
        new_mentions.push_back(EntityMention{pick.surface, m.type});
    }

    NLIExample out = ex;
    out.premise = replace_spans(ex.premise, plan);
    out.hypothesis = replace_spans(ex.hypothesis, plan);
    out.meta.transforms.push_back("rparg_" + stratum_name(stratum));
    for (const auto& [orig, sub] : subs) out.meta.substitutions[orig] = sub;
    out.meta.entities = std::move(new_mentions);
    return out;
}

SharedEntityResult identify_shared_entities_via_model(const NLIExample& ex, Model& model,
                                                      int max_attempts) {
    const std::string prompt = render_shared_entity_prompt(ex);
    std::string last_raw;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        ModelReply reply = model.complete(prompt);
        last_raw = reply.text;

        std::vector<EntityMention> parsed;
        bool malformed = false;
        bool any_line = false;
        for (const auto& raw_line : split(reply.text, '\n')) {
            std::string line = trim(raw_line);
            if (line.empty()) continue;
            any_line = true;
            if (line == "NONE") continue;
            auto fields = split(line, '\t');
            if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
                malformed = true;
                break;
            }
            parsed.push_back(EntityMention{trim(fields[0]), trim(fields[1])});
        }
        if (malformed || !any_line) continue;

        SharedEntityResult result;
        result.attempts_used = attempt;
        for (const auto& m : parsed)
            if (contains(ex.premise, m.surface) && contains(ex.hypothesis, m.surface))
                result.entities.push_back(m);
        return result;
    }
    throw DataError("shared-entity extraction failed after " + std::to_string(max_attempts) +
                    " attempts; last raw output: '" + last_raw + "'");
}

NLIExample replace_general_entities(
    const NLIExample& ex, const std::vector<std::pair<std::string, std::string>>& replacements) {
    std::map<std::string, std::string> plan;
    for (const auto& [span, new_span] : replacements) {
        if (span.empty()) throw DataError("empty replacement span");
        if (span == new_span)
            throw DataError("replacement for '" + span + "' equals the original span");
        if (!contains(ex.premise, span))
            throw DataError("span '" + span + "' is absent from the premise");
        if (!contains(ex.hypothesis, span))
            throw DataError("span '" + span + "' is absent from the hypothesis");
        plan[span] = new_span;
    }

    NLIExample out = ex;
    out.premise = replace_spans(ex.premise, plan);
    out.hypothesis = replace_spans(ex.hypothesis, plan);
    out.meta.transforms.push_back("snli_rparg");
    for (const auto& [span, new_span] : plan)
        out.meta.substitutions[span] = EntitySub{new_span, ""};
    return out;
}

std::string replace_spans(const std::string& text, const std::map<std::string, std::string>& plan) {
    if (plan.empty()) return text;

    // longest originals first so nested surfaces cannot partially match
    std::vector<const std::pair<const std::string, std::string>*> entries;
    for (const auto& kv : plan) entries.push_back(&kv);
    std::sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) {
        if (a->first.size() != b->first.size()) return a->first.size() > b->first.size();
        return a->first < b->first;
    });

    auto fix_article = [](std::string& out, const std::string& replacement) {
        // rewrite a trailing "a"/"an" article to agree with the inserted span
        size_t len = out.size();
        auto ends_with_word = [&out, len](const std::string& w) {
            if (len < w.size() + 1) return false;
            if (out.compare(len - w.size() - 1, w.size(), w, 0, w.size()) != 0) return false;
            if (out[len - 1] != ' ') return false;
            char before = len >= w.size() + 2 ? out[len - w.size() - 2] : ' ';
            return before == ' ' || len == w.size() + 1;
        };
        const bool vowel = is_vowel_initial(replacement);
        if (ends_with_word("an") && !vowel)
            out.erase(len - 2, 1);  // "an " -> "a "
        else if (ends_with_word("a") && vowel)
            out.insert(len - 1, "n");  // "a " -> "an "
        else if (ends_with_word("An") && !vowel)
            out.erase(len - 2, 1);
        else if (ends_with_word("A") && vowel)
            out.insert(len - 1, "n");
    };

    std::string out;
    size_t i = 0;
    while (i < text.size()) {
        const std::pair<const std::string, std::string>* hit = nullptr;
        for (const auto* e : entries) {
            if (text.compare(i, e->first.size(), e->first) == 0) {
                hit = e;
                break;
            }
        }
        if (hit) {
            fix_article(out, hit->second);
            out += hit->second;
            i += hit->first.size();
        } else {
            out += text[i];
            ++i;
        }
    }
    return out;
}

}  // namespace egnli
