#include "egnli/triples.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "egnli/errors.hpp"
#include "egnli/text.hpp"

namespace egnli {

TypeVocabulary TypeVocabulary::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open type vocabulary file: " + path.string());
    std::set<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        labels.insert(lowercase(t));
    }
    if (labels.empty()) throw ConfigError("type vocabulary file is empty: " + path.string());
    return TypeVocabulary(std::move(labels));
}

bool TypeVocabulary::known(std::string_view label) const {
    if (label == kFallback) return true;
    return labels_.count(std::string(label)) > 0;
}

std::string TypeVocabulary::resolve(std::string_view label) const {
    std::string folded = lowercase(trim(label));
    if (known(folded)) return folded;
    return kFallback;
}

void TripleStore::add(const Triple& t) {
    triples[TypePair{t.arg1_type, t.arg2_type}][t.predicate][ArgPair{t.arg1_id, t.arg2_id}] +=
        t.count;
    entity_freq[t.arg1_type][t.arg1_id] += t.count;
    entity_freq[t.arg2_type][t.arg2_id] += t.count;
    surfaces[t.arg1_type][t.arg1_id][t.arg1_surface] += t.count;
    surfaces[t.arg2_type][t.arg2_id][t.arg2_surface] += t.count;
}

void TripleStore::merge(const TripleStore& other) {
    for (const auto& [tp, preds] : other.triples)
        for (const auto& [pred, feats] : preds)
            for (const auto& [args, count] : feats) triples[tp][pred][args] += count;
    for (const auto& [type, ids] : other.entity_freq)
        for (const auto& [id, freq] : ids) entity_freq[type][id] += freq;
    for (const auto& [type, ids] : other.surfaces)
        for (const auto& [id, surfs] : ids)
            for (const auto& [surf, w] : surfs) surfaces[type][id][surf] += w;
    skipped_lines += other.skipped_lines;
}

std::set<TypePair> TripleStore::type_pairs() const {
    std::set<TypePair> out;
    for (const auto& [tp, _] : triples) out.insert(tp);
    return out;
}

long long TripleStore::total_count() const {
    long long total = 0;
    for (const auto& [tp, preds] : triples)
        for (const auto& [pred, feats] : preds)
            for (const auto& [args, count] : feats) total += count;
    return total;
}

Triple parse_triple_line(std::string_view line, size_t line_no, const TypeVocabulary& vocab) {
    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 8)
        throw ParseError("line " + std::to_string(line_no) + ": expected 8 tab-separated fields, got " +
                         std::to_string(fields.size()));
    for (std::string& f : fields) f = trim(f);

    Triple t;
    t.predicate = normalize_predicate(fields[0]);
    if (t.predicate.empty())
        throw ValidationError("line " + std::to_string(line_no) + ": empty predicate");
    t.arg1_id = fields[1];
    t.arg1_type = vocab.resolve(fields[2]);
    t.arg1_surface = fields[3];
    t.arg2_id = fields[4];
    t.arg2_type = vocab.resolve(fields[5]);
    t.arg2_surface = fields[6];
    if (t.arg1_id.empty() || t.arg2_id.empty())
        throw ValidationError("line " + std::to_string(line_no) + ": empty entity id");

    try {
        size_t pos = 0;
        t.count = std::stoll(fields[7], &pos);
        if (pos != fields[7].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line_no) + ": count is not an integer: '" +
                              fields[7] + "'");
    }
    if (t.count < 1)
        throw ValidationError("line " + std::to_string(line_no) + ": count must be positive, got " +
                              std::to_string(t.count));
    return t;
}

TripleStore load_triples(std::istream& in, const TypeVocabulary& vocab,
                         const TripleLoadOptions& opts) {
    TripleStore store;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            store.add(parse_triple_line(line, line_no, vocab));
        } catch (const DataError&) {
            if (opts.strict) throw;
            ++store.skipped_lines;
        }
    }
    return store;
}

TripleStore load_triples_file(const std::filesystem::path& path, const TypeVocabulary& vocab,
                              const TripleLoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open triples file: " + path.string());
    return load_triples(in, vocab, opts);
}

EntityInventory build_entity_inventory(const TripleStore& store) {
    if (store.empty()) throw DataError("no entities: triple store is empty");

    EntityInventory inv;
    for (const auto& [type, ids] : store.entity_freq) {
        std::vector<InventoryEntry> entries;
        entries.reserve(ids.size());
        for (const auto& [id, freq] : ids) {
            // surface election: highest observed weight, ties by surface ascending
            const auto& surfs = store.surfaces.at(type).at(id);
            std::string best;
            long long best_w = -1;
            for (const auto& [surf, w] : surfs) {
                if (w > best_w) {
                    best = surf;
                    best_w = w;
                }
            }
            entries.push_back(InventoryEntry{id, best, freq});
        }
        std::sort(entries.begin(), entries.end(), [](const InventoryEntry& a, const InventoryEntry& b) {
            if (a.frequency != b.frequency) return a.frequency > b.frequency;
            return a.entity_id < b.entity_id;
        });
        inv.by_type[type] = std::move(entries);
    }
    return inv;
}

std::vector<std::string> EntityInventory::type_names() const {
    std::vector<std::string> out;
    out.reserve(by_type.size());
    for (const auto& [type, _] : by_type) out.push_back(type);
    return out;
}

Stratum parse_stratum(std::string_view name) {
    if (name == "bottom") return Stratum::bottom;
    if (name == "top") return Stratum::top;
    if (name == "all") return Stratum::all;
    throw ConfigError("unknown stratum '" + std::string(name) + "' (expected bottom, top, or all)");
}

std::string stratum_name(Stratum s) {
    switch (s) {
        case Stratum::bottom: return "bottom";
        case Stratum::top: return "top";
        case Stratum::all: return "all";
    }
    return "?";
}

std::vector<InventoryEntry> frequency_stratum(const EntityInventory& inv, const std::string& type,
                                              Stratum stratum, double quantile) {
    if (!(quantile > 0.0 && quantile <= 1.0))
        throw ConfigError("quantile must be in (0, 1], got " + std::to_string(quantile));
    auto it = inv.by_type.find(type);
    if (it == inv.by_type.end()) {
        std::string msg = "unknown type '" + type + "'; available types:";
        for (const auto& t : inv.type_names()) msg += " " + t;
        throw DataError(msg);
    }
    const std::vector<InventoryEntry>& pop = it->second;
    if (stratum == Stratum::all) return pop;

    const size_t n = pop.size();
    const size_t k = static_cast<size_t>(std::ceil(quantile * static_cast<double>(n)));
    if (stratum == Stratum::top) return {pop.begin(), pop.begin() + k};
    return {pop.end() - k, pop.end()};  // least frequent tail, inventory order
}

void export_inventory_jsonl(const EntityInventory& inv, std::ostream& out) {
    for (const auto& [type, entries] : inv.by_type) {
        for (const auto& e : entries) {
            nlohmann::json j{{"type", type},
                             {"entity_id", e.entity_id},
                             {"surface", e.surface},
                             {"frequency", e.frequency}};
            out << j.dump() << "\n";
        }
    }
}

EntityInventory load_inventory_jsonl(std::istream& in) {
    EntityInventory inv;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("inventory line " + std::to_string(line_no) + ": " + e.what());
        }
        inv.by_type[j.at("type").get<std::string>()].push_back(InventoryEntry{
            j.at("entity_id").get<std::string>(), j.at("surface").get<std::string>(),
            j.at("frequency").get<long long>()});
    }
    // restore the total order in case the file was hand-edited
    for (auto& [type, entries] : inv.by_type) {
        std::sort(entries.begin(), entries.end(), [](const InventoryEntry& a, const InventoryEntry& b) {
            if (a.frequency != b.frequency) return a.frequency > b.frequency;
            return a.entity_id < b.entity_id;
        });
    }
    return inv;
}

}  // namespace egnli
