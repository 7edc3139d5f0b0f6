#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "egnli/errors.hpp"
#include "egnli/model_client.hpp"
#include "egnli/nli_data.hpp"
#include "egnli/rng.hpp"
#include "egnli/transforms.hpp"
#include "egnli/triples.hpp"

using namespace egnli;

namespace {

NLIExample bush_example() {
    NLIExample ex;
    ex.premise = "George Bush was the Governor of Texas";
    ex.hypothesis = "George Bush is a politician from Texas";
    ex.label = Label::Entail;
    ex.meta.id = "lh-bush";
    ex.meta.entities = {EntityMention{"George Bush", "person"}, EntityMention{"Texas", "location"}};
    return ex;
}

std::vector<NLIExample> fixture_examples() {
    std::ifstream data(std::string(EGNLI_DATA_DIR) + "/levy_holt_fixture.tsv");
    REQUIRE(data);
    auto rows = load_nli_tsv(data, NliSchema::levy_holt, "lh");
    std::ifstream side(std::string(EGNLI_DATA_DIR) + "/levy_holt_fixture.entities.jsonl");
    REQUIRE(side);
    attach_entity_annotations(rows, side);
    return rows;
}

EntityInventory toy_inventory() {
    auto vocab = TypeVocabulary::load_file(std::string(EGNLI_DATA_DIR) + "/figer_types.txt");
    return build_entity_inventory(
        load_triples_file(std::string(EGNLI_DATA_DIR) + "/toy_triples.tsv", vocab));
}

std::string dump_examples(const std::vector<NLIExample>& v) {
    std::ostringstream out;
    write_examples_jsonl(v, out);
    return out.str();
}

}  // namespace

TEST_CASE("identify_args resolves the premise argument spans") {
    auto args = identify_args(bush_example());
    CHECK(args.arg1.surface == "George Bush");
    CHECK(args.arg2.surface == "Texas");
    CHECK(premise_predicate(bush_example()) == "was the Governor of");
}

TEST_CASE("random_premise swaps the predicate and forces No-Entail") {
    PredicatePool pool;
    pool.global = {"lives in", "was the Governor of"};
    auto out = random_premise(bush_example(), pool, 3);
    CHECK(out.premise == "George Bush lives in Texas");  // the only eligible choice
    CHECK(out.hypothesis == bush_example().hypothesis);
    CHECK(out.label == Label::NoEntail);
    CHECK(out.meta.transforms == std::vector<std::string>{"rpi"});
    CHECK(out.meta.original_predicate == "was the Governor of");
}

TEST_CASE("random_premise needs a parseable premise and a usable pool") {
    NLIExample bare = bush_example();
    bare.meta.entities.clear();
    PredicatePool pool;
    pool.global = {"lives in", "works in"};
    CHECK_THROWS_WITH_AS(random_premise(bare, pool, 1), doctest::Contains("lh-bush"), DataError);

    PredicatePool tiny;
    tiny.global = {"was the Governor of"};
    CHECK_THROWS_WITH_AS(random_premise(bush_example(), tiny, 1),
                         doctest::Contains("pool too small"), DataError);
}

TEST_CASE("rpi over the fixture keeps hypotheses byte-identical and changes predicates") {
    auto rows = fixture_examples();
    auto pool = PredicatePool::harvest(rows);
    CHECK(pool.global.size() == 100);  // fixture predicates are all distinct

    for (uint64_t seed : {1, 2, 3, 4, 5}) {
        for (size_t i = 0; i < rows.size(); ++i) {
            auto out = random_premise(rows[i], pool, derive_seed(seed, "rpi", i));
            CHECK(out.hypothesis == rows[i].hypothesis);
            CHECK(out.label == Label::NoEntail);
            CHECK(premise_predicate(out) != premise_predicate(rows[i]));
            // entity arguments unchanged
            auto args = identify_args(out);
            auto orig = identify_args(rows[i]);
            CHECK(args.arg1.surface == orig.arg1.surface);
            CHECK(args.arg2.surface == orig.arg2.surface);
        }
    }
}

TEST_CASE("rpi is deterministic under a seed") {
    auto rows = fixture_examples();
    auto pool = PredicatePool::harvest(rows);
    std::vector<NLIExample> a, b;
    for (size_t i = 0; i < rows.size(); ++i) {
        a.push_back(random_premise(rows[i], pool, derive_seed(7, "rpi", i)));
        b.push_back(random_premise(rows[i], pool, derive_seed(7, "rpi", i)));
    }
    CHECK(dump_examples(a) == dump_examples(b));
}

TEST_CASE("replace_arguments substitutes same-type entities consistently") {
    auto inv = toy_inventory();
    auto out = replace_arguments(bush_example(), inv, Stratum::all, 1.0, 11);
    CHECK(out.label == Label::Entail);
    CHECK(out.premise != bush_example().premise);
    CHECK(out.premise.find("George Bush") == std::string::npos);
    CHECK(out.premise.find("Texas") == std::string::npos);
    CHECK(out.hypothesis.find("George Bush") == std::string::npos);
    CHECK(out.hypothesis.find("Texas") == std::string::npos);

    const auto& sub1 = out.meta.substitutions.at("George Bush");
    const auto& sub2 = out.meta.substitutions.at("Texas");
    CHECK(sub1.type == "person");
    CHECK(sub2.type == "location");
    CHECK(out.premise == sub1.replacement + " was the Governor of " + sub2.replacement);
    CHECK(out.hypothesis == sub1.replacement + " is a politician from " + sub2.replacement);
    CHECK(out.meta.transforms == std::vector<std::string>{"rparg_all"});

    // type-preserving: replacements exist in the inventory under the type
    bool found = false;
    for (const auto& e : inv.by_type.at("person"))
        if (e.surface == sub1.replacement) found = true;
    CHECK(found);
}

TEST_CASE("replace_arguments draws from the requested stratum") {
    auto inv = toy_inventory();
    const auto& people = inv.by_type.at("person");
    const size_t k = 5;  // quantile 0.25 of 20 persons
    std::set<std::string> top_set, bottom_set;
    for (size_t i = 0; i < k; ++i) top_set.insert(people[i].surface);
    for (size_t i = people.size() - k; i < people.size(); ++i)
        bottom_set.insert(people[i].surface);

    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto hi = replace_arguments(bush_example(), inv, Stratum::top, 0.25, seed);
        CHECK(top_set.count(hi.meta.substitutions.at("George Bush").replacement) == 1);
        auto lo = replace_arguments(bush_example(), inv, Stratum::bottom, 0.25, seed);
        CHECK(bottom_set.count(lo.meta.substitutions.at("George Bush").replacement) == 1);
    }
}

TEST_CASE("replace_arguments error paths") {
    auto inv = toy_inventory();

    NLIExample untyped = bush_example();
    untyped.meta.entities[1].type = "";
    CHECK_THROWS_WITH_AS(replace_arguments(untyped, inv, Stratum::all, 1.0, 1),
                         doctest::Contains("Texas"), DataError);

    NLIExample unannotated = bush_example();
    unannotated.meta.entities.clear();
    CHECK_THROWS_AS(replace_arguments(unannotated, inv, Stratum::all, 1.0, 1), DataError);

    // population that empties out after excluding the original
    EntityInventory tiny;
    tiny.by_type["person"] = {InventoryEntry{"m.1", "George Bush", 1}};
    tiny.by_type["location"] = {InventoryEntry{"m.2", "Texas", 1}};
    CHECK_THROWS_WITH_AS(replace_arguments(bush_example(), tiny, Stratum::all, 1.0, 1),
                         doctest::Contains("empty replacement population"), DataError);
}

TEST_CASE("rparg over the fixture preserves labels and erases originals") {
    auto rows = fixture_examples();
    auto inv = toy_inventory();
    for (uint64_t seed : {10, 20, 30, 40, 50}) {
        for (size_t i = 0; i < rows.size(); ++i) {
            auto out = replace_arguments(rows[i], inv, Stratum::all, 1.0,
                                         derive_seed(seed, "rparg", i));
            CHECK(out.label == rows[i].label);
            for (const auto& m : rows[i].meta.entities) {
                CHECK(out.premise.find(m.surface) == std::string::npos);
                CHECK(out.hypothesis.find(m.surface) == std::string::npos);
                const auto& sub = out.meta.substitutions.at(m.surface);
                CHECK(sub.type == m.type);
                CHECK(out.premise.find(sub.replacement) != std::string::npos);
                CHECK(out.hypothesis.find(sub.replacement) != std::string::npos);
            }
        }
    }
}

TEST_CASE("substitution plans are injective") {
    auto rows = fixture_examples();
    auto inv = toy_inventory();
    for (size_t i = 0; i < rows.size(); ++i) {
        auto out = replace_arguments(rows[i], inv, Stratum::all, 1.0, derive_seed(3, "inj", i));
        std::set<std::string> images;
        for (const auto& [orig, sub] : out.meta.substitutions) {
            CHECK(orig != sub.replacement);
            CHECK(images.insert(sub.replacement).second);
        }
    }
}

TEST_CASE("composing rparg twice still preserves the source labels") {
    auto rows = fixture_examples();
    auto inv = toy_inventory();
    for (size_t i = 0; i < rows.size(); i += 10) {
        auto once = replace_arguments(rows[i], inv, Stratum::all, 1.0, derive_seed(1, "a", i));
        auto twice = replace_arguments(once, inv, Stratum::all, 1.0, derive_seed(2, "b", i));
        CHECK(twice.label == rows[i].label);
        CHECK(twice.meta.transforms ==
              std::vector<std::string>{"rparg_all", "rparg_all"});
    }
}

TEST_CASE("shared-entity extraction via a scripted stub") {
    NLIExample ex;
    ex.premise = "John gives Mary an apple";
    ex.hypothesis = "Mary receives an apple from John";
    ex.meta.id = "snli-1";

    ScriptedStub stub({ModelReply{"apple\tfood\nJohn\tperson\nMary\tperson", {}}});
    auto result = identify_shared_entities_via_model(ex, stub);
    REQUIRE(result.entities.size() == 3);
    CHECK(result.entities[0].surface == "apple");
    CHECK(result.entities[0].type == "food");
    CHECK(result.attempts_used == 1);
}

TEST_CASE("extraction filters spans that are not in both texts") {
    NLIExample ex;
    ex.premise = "John gives Mary an apple";
    ex.hypothesis = "Mary receives a fruit from John";
    ScriptedStub stub({ModelReply{"apple\tfood\nMary\tperson", {}}});
    auto result = identify_shared_entities_via_model(ex, stub);
    REQUIRE(result.entities.size() == 1);
    CHECK(result.entities[0].surface == "Mary");
}

TEST_CASE("extraction accepts NONE for no shared entities") {
    NLIExample ex;
    ex.premise = "It rains";
    ex.hypothesis = "Water falls";
    ScriptedStub stub({ModelReply{"NONE", {}}});
    auto result = identify_shared_entities_via_model(ex, stub);
    CHECK(result.entities.empty());
}

TEST_CASE("extraction retries malformed output and records the attempts") {
    NLIExample ex;
    ex.premise = "John gives Mary an apple";
    ex.hypothesis = "Mary receives an apple from John";
    ScriptedStub stub({ModelReply{"no tabs here", {}}, ModelReply{"also bad", {}},
                       ModelReply{"apple\tfood", {}}});
    auto result = identify_shared_entities_via_model(ex, stub);
    REQUIRE(result.entities.size() == 1);
    CHECK(result.attempts_used == 3);

    ScriptedStub hopeless({ModelReply{"garbage", {}}});
    CHECK_THROWS_WITH_AS(identify_shared_entities_via_model(ex, hopeless),
                         doctest::Contains("garbage"), DataError);
}

TEST_CASE("replace_general_entities swaps spans in both texts with article repair") {
    NLIExample ex;
    ex.premise = "John gives Mary an apple";
    ex.hypothesis = "Mary receives an apple from John";
    ex.label = Label::Entail;
    auto out = replace_general_entities(ex, {{"apple", "book"}});
    CHECK(out.premise == "John gives Mary a book");
    CHECK(out.hypothesis == "Mary receives a book from John");
    CHECK(out.label == Label::Entail);
    CHECK(out.meta.transforms == std::vector<std::string>{"snli_rparg"});
    CHECK(out.meta.substitutions.at("apple").replacement == "book");
}

TEST_CASE("article repair also upgrades a to an") {
    NLIExample ex;
    ex.premise = "John eats a pear daily";
    ex.hypothesis = "A pear is eaten by John";
    auto out = replace_general_entities(ex, {{"pear", "orange"}});
    CHECK(out.premise == "John eats an orange daily");
    CHECK(out.hypothesis == "An orange is eaten by John");
}

TEST_CASE("replace_general_entities identity and error cases") {
    NLIExample ex;
    ex.premise = "John gives Mary an apple";
    ex.hypothesis = "Mary receives an apple from John";
    auto out = replace_general_entities(ex, {});
    CHECK(out.premise == ex.premise);
    CHECK(out.hypothesis == ex.hypothesis);
    CHECK(out.meta.transforms == std::vector<std::string>{"snli_rparg"});

    CHECK_THROWS_WITH_AS(replace_general_entities(ex, {{"apple", "apple"}}),
                         doctest::Contains("equals the original"), DataError);
    CHECK_THROWS_WITH_AS(replace_general_entities(ex, {{"banana", "book"}}),
                         doctest::Contains("absent"), DataError);
}

TEST_CASE("replace_spans matches longest originals first and never rescans insertions") {
    std::map<std::string, std::string> plan{{"George Bush", "Jan Hus"}, {"Bush", "XXX"}};
    CHECK(replace_spans("George Bush met Bush", plan) == "Jan Hus met XXX");

    // an inserted span containing another original is left alone
    std::map<std::string, std::string> tricky{{"Ada", "Bonn Ada"}, {"Bonn", "Rome"}};
    CHECK(replace_spans("Ada visited Bonn", tricky) == "Bonn Ada visited Rome");
}

TEST_CASE("predicate pools are deduplicated and typed") {
    auto rows = fixture_examples();
    auto pool = PredicatePool::harvest(rows);
    std::set<std::string> uniq(pool.global.begin(), pool.global.end());
    CHECK(uniq.size() == pool.global.size());
    REQUIRE(pool.by_type_pair.count(TypePair{"person", "location"}));
    CHECK(pool.by_type_pair.at(TypePair{"person", "location"}).size() == pool.global.size());
}
