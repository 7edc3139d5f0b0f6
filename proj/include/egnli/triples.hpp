#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace egnli {

// Configured type labels; anything outside the vocabulary falls back to
// "thing", which is always allowed in addition to the configured entries.
class TypeVocabulary {
public:
    static constexpr const char* kFallback = "thing";

    TypeVocabulary() = default;
    explicit TypeVocabulary(std::set<std::string> labels) : labels_(std::move(labels)) {}

    static TypeVocabulary load_file(const std::filesystem::path& path);

    bool known(std::string_view label) const;
    // member label, or "thing" for unknown input
    std::string resolve(std::string_view label) const;
    size_t size() const { return labels_.size(); }

private:
    std::set<std::string> labels_;
};

struct Triple {
    std::string predicate;
    std::string arg1_id;
    std::string arg1_type;
    std::string arg1_surface;
    std::string arg2_id;
    std::string arg2_type;
    std::string arg2_surface;
    long long count = 0;
};

struct TypePair {
    std::string type1;
    std::string type2;
    auto operator<=>(const TypePair&) const = default;
};

struct ArgPair {
    std::string arg1_id;
    std::string arg2_id;
    auto operator<=>(const ArgPair&) const = default;
};

// Aggregated co-occurrence counts. Ordered maps keep every traversal
// deterministic, which downstream serialization relies on.
struct TripleStore {
    // (type pair) -> predicate -> (arg1_id, arg2_id) -> summed count
    std::map<TypePair, std::map<std::string, std::map<ArgPair, long long>>> triples;
    // type -> entity id -> slot-weighted frequency
    std::map<std::string, std::map<std::string, long long>> entity_freq;
    // type -> entity id -> surface -> weight, for deterministic surface election
    std::map<std::string, std::map<std::string, std::map<std::string, long long>>> surfaces;
    size_t skipped_lines = 0;

    void add(const Triple& t);
    void merge(const TripleStore& other);
    bool empty() const { return triples.empty(); }
    std::set<TypePair> type_pairs() const;
    long long total_count() const;
};

// line := predicate \t arg1_id \t arg1_type \t arg1_surface \t arg2_id
//         \t arg2_type \t arg2_surface \t count          (fields trimmed)
Triple parse_triple_line(std::string_view line, size_t line_no, const TypeVocabulary& vocab);

struct TripleLoadOptions {
    bool strict = true;  // strict: first malformed line aborts; lenient: skip and count
};

TripleStore load_triples(std::istream& in, const TypeVocabulary& vocab,
                         const TripleLoadOptions& opts = {});
TripleStore load_triples_file(const std::filesystem::path& path, const TypeVocabulary& vocab,
                              const TripleLoadOptions& opts = {});

struct InventoryEntry {
    std::string entity_id;
    std::string surface;
    long long frequency = 0;
};

// Per-type entity populations, sorted by frequency descending with ties
// broken by entity id ascending.
struct EntityInventory {
    std::map<std::string, std::vector<InventoryEntry>> by_type;

    bool has_type(const std::string& type) const { return by_type.count(type) > 0; }
    std::vector<std::string> type_names() const;
};

EntityInventory build_entity_inventory(const TripleStore& store);

enum class Stratum { bottom, top, all };

Stratum parse_stratum(std::string_view name);
std::string stratum_name(Stratum s);

// bottom/top: the ceil(quantile * n) least/most frequent entities of the
// type; all: the whole population. Order follows the inventory's total order.
std::vector<InventoryEntry> frequency_stratum(const EntityInventory& inv, const std::string& type,
                                              Stratum stratum, double quantile);

void export_inventory_jsonl(const EntityInventory& inv, std::ostream& out);
EntityInventory load_inventory_jsonl(std::istream& in);

}  // namespace egnli
