// egnli: build typed entailment graphs from predicate triples, instantiate
// them into counterfactual NLI training corpora, derive bias-adversarial and
// bias-neutralized dataset variants, and measure attestation bias against a
// chat endpoint or deterministic stub models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "egnli/entailment_graph.hpp"
#include "egnli/errors.hpp"
#include "egnli/instantiate.hpp"
#include "egnli/model_client.hpp"
#include "egnli/nli_data.hpp"
#include "egnli/prompts.hpp"
#include "egnli/rng.hpp"
#include "egnli/scoring.hpp"
#include "egnli/text.hpp"
#include "egnli/transforms.hpp"
#include "egnli/triples.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace egnli;

namespace {

struct Common {
    std::optional<std::string> config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
    json config = json::object();

    void load_config() {
        if (!config_path) return;
        std::ifstream in(*config_path);
        if (!in) throw ConfigError("cannot open config file: " + *config_path);
        try {
            in >> config;
        } catch (const json::parse_error& e) {
            throw ConfigError("config file " + *config_path + ": " + e.what());
        }
    }

    uint64_t resolved_seed() const {
        if (seed) return *seed;
        if (config.contains("seed")) return config.at("seed").get<uint64_t>();
        throw ConfigError("seed is required: pass --seed or set \"seed\" in the config file");
    }

    fs::path resolved_out() const {
        if (out_dir) return *out_dir;
        if (config.contains("out")) return config.at("out").get<std::string>();
        throw ConfigError("output directory is required: pass --out or set \"out\" in the config");
    }

    template <typename T>
    T get(const std::optional<T>& flag, const std::string& key) const {
        if (flag) return *flag;
        if (config.contains(key)) return config.at(key).get<T>();
        throw ConfigError("missing required setting '" + key + "' (flag or config)");
    }

    template <typename T>
    T get(const std::optional<T>& flag, const std::string& key, const T& fallback) const {
        if (flag) return *flag;
        if (config.contains(key)) return config.at(key).get<T>();
        return fallback;
    }

    std::optional<json> model_spec(const std::optional<std::string>& inline_json,
                                   const std::string& key) const {
        if (inline_json) {
            try {
                return std::make_optional<json>(json::parse(*inline_json));
            } catch (const json::parse_error& e) {
                throw ConfigError("--" + key + " is not valid JSON: " + e.what());
            }
        }
        if (config.contains(key)) return std::make_optional<json>(config.at(key));
        return std::nullopt;
    }
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_path, "JSON config file");
    cmd->add_option("--seed", common.seed, "run seed (required; no default by design)");
    cmd->add_option("--out", common.out_dir, "output directory");
}

fs::path prepare_out(const Common& common) {
    fs::path out = common.resolved_out();
    fs::create_directories(out);
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write file: " + path.string());
    f << content;
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_config_echo(const fs::path& out, const json& echo) {
    write_json_file(out / "config_echo.json", echo);
}

TypeVocabulary load_types(const std::string& path) { return TypeVocabulary::load_file(path); }

std::vector<NLIExample> load_dataset(const std::string& path, std::optional<std::string> format,
                                     const std::optional<std::string>& annotations) {
    std::string fmt = format.value_or("");
    if (fmt.empty()) {
        if (ends_with(path, ".jsonl")) fmt = "jsonl";
        else
            throw ConfigError("cannot infer dataset format of '" + path +
                              "'; pass --format jsonl|levy_holt|snli|generic");
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    std::vector<NLIExample> examples;
    if (fmt == "jsonl") {
        examples = read_examples_jsonl(in);
    } else {
        std::string source = fs::path(path).stem().string();
        examples = load_nli_tsv(in, parse_schema(fmt), source);
    }
    if (annotations) {
        std::ifstream side(*annotations);
        if (!side) throw ConfigError("cannot open annotations file: " + *annotations);
        attach_entity_annotations(examples, side);
    }
    return examples;
}

PromptBank load_bank(const std::optional<std::string>& path) {
    return path ? PromptBank::load_file(*path) : PromptBank::defaults();
}

SurfaceTemplate load_surface(const std::optional<std::string>& display_path) {
    SurfaceTemplate tmpl;
    if (display_path) {
        std::ifstream in(*display_path);
        if (!in) throw ConfigError("cannot open display mapping file: " + *display_path);
        json j;
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw ConfigError("display mapping " + *display_path + ": " + e.what());
        }
        for (const auto& [pred, phrase] : j.items())
            tmpl.display[pred] = phrase.get<std::string>();
    }
    return tmpl;
}

// ---- build-graph ----

struct BuildGraphArgs {
    std::optional<std::string> triples, types, weighting;
    std::optional<double> tau_pos;
    std::optional<int> min_support, top_k;
};

int run_build_graph(const Common& common, const BuildGraphArgs& args) {
    const uint64_t seed = common.resolved_seed();
    const fs::path out = prepare_out(common);
    const std::string triples_path = common.get(args.triples, "triples");
    const std::string types_path = common.get(args.types, "types");
    const Weighting weighting =
        parse_weighting(common.get(args.weighting, "weighting", std::string("raw")));
    const double tau_pos = common.get(args.tau_pos, "tau_pos", 0.1);
    const int min_support = common.get(args.min_support, "min_support", 3);
    const int top_k = common.get(args.top_k, "top_k", 20);

    json echo{{"command", "build-graph"}, {"triples", triples_path}, {"types", types_path},
              {"weighting", weighting_name(weighting)}, {"tau_pos", tau_pos},
              {"min_support", min_support}, {"top_k", top_k}, {"seed", seed},
              {"out", out.string()}};
    write_config_echo(out, echo);

    TypeVocabulary vocab = load_types(types_path);
    TripleStore store = load_triples_file(triples_path, vocab, TripleLoadOptions{false});
    FeatureIndex index = build_feature_index(store, weighting, min_support);
    EntailmentGraph graph = build_graph(index, tau_pos, top_k);
    EntityInventory inv = build_entity_inventory(store);

    {
        std::ofstream f(out / "graph.jsonl", std::ios::binary);
        write_graph_jsonl(graph, f);
    }
    {
        std::ofstream f(out / "inventory.jsonl", std::ios::binary);
        export_inventory_jsonl(inv, f);
    }

    size_t predicates = 0;
    for (const auto& [tp, tpi] : index.by_type_pair) predicates += tpi.predicates.size();
    json stats{{"type_pairs", index.by_type_pair.size()},
               {"predicates_indexed", predicates},
               {"rules", graph.rules.size()},
               {"entities", inv.by_type.size()},
               {"total_count", store.total_count()},
               {"skipped_lines", store.skipped_lines}};
    write_json_file(out / "stats.json", stats);
    std::cout << "build-graph: " << graph.rules.size() << " rules over "
              << index.by_type_pair.size() << " type pairs -> " << (out / "graph.jsonl").string()
              << "\n";
    return 0;
}

// ---- gen-train ----

struct GenTrainArgs {
    std::optional<std::string> triples, types, weighting, display;
    std::optional<double> tau_pos, tau_neg;
    std::optional<int> min_support, top_k;
    std::optional<size_t> n_pos, n_neg;
    bool randeg = false;
};

int run_gen_train(const Common& common, const GenTrainArgs& args) {
    const uint64_t seed = common.resolved_seed();
    const fs::path out = prepare_out(common);
    const std::string triples_path = common.get(args.triples, "triples");
    const std::string types_path = common.get(args.types, "types");
    const Weighting weighting =
        parse_weighting(common.get(args.weighting, "weighting", std::string("raw")));
    const double tau_pos = common.get(args.tau_pos, "tau_pos", 0.1);
    const double tau_neg = common.get(args.tau_neg, "tau_neg", 0.01);
    const int min_support = common.get(args.min_support, "min_support", 3);
    const int top_k = common.get(args.top_k, "top_k", 20);
    const size_t n_pos = common.get(args.n_pos, "n_pos");
    const size_t n_neg = common.get(args.n_neg, "n_neg");

    json echo{{"command", "gen-train"}, {"triples", triples_path}, {"types", types_path},
              {"weighting", weighting_name(weighting)}, {"tau_pos", tau_pos},
              {"tau_neg", tau_neg}, {"min_support", min_support}, {"top_k", top_k},
              {"n_pos", n_pos}, {"n_neg", n_neg}, {"randeg", args.randeg}, {"seed", seed},
              {"out", out.string()}};
    if (args.display) echo["display"] = *args.display;
    write_config_echo(out, echo);

    TypeVocabulary vocab = load_types(types_path);
    TripleStore store = load_triples_file(triples_path, vocab, TripleLoadOptions{false});
    FeatureIndex index = build_feature_index(store, weighting, min_support);
    EntailmentGraph graph = build_graph(index, tau_pos, top_k);
    EntityInventory inv = build_entity_inventory(store);

    if (args.randeg)
        graph.rules = shuffle_predicates_control(graph.rules, derive_seed(seed, "randeg"));

    TrainingGenOptions opts;
    opts.tau_neg = tau_neg;
    opts.surface = load_surface(args.display);
    TrainingSet set = generate_training_set(graph, index, inv, n_pos, n_neg, seed, opts);

    {
        std::ofstream f(out / "train.jsonl", std::ios::binary);
        write_training_jsonl(set.records, f);
    }
    write_json_file(out / "finetune_config.json", set.finetune_config);

    size_t pos = 0;
    for (const auto& r : set.records)
        if (r.label == Label::Entail) ++pos;
    json stats{{"records", set.records.size()},
               {"positive", pos},
               {"negative", set.records.size() - pos},
               {"graph_rules", graph.rules.size()}};
    write_json_file(out / "stats.json", stats);
    std::cout << "gen-train: " << set.records.size() << " records (" << pos << " Entail) -> "
              << (out / "train.jsonl").string() << "\n";
    return 0;
}

// ---- transform ----

struct TransformArgs {
    std::optional<std::string> kind, dataset, format, annotations, inventory, triples, types,
        stratum, model_json;
    std::optional<double> quantile;
};

EntityInventory load_inventory_for_transform(const Common& common, const TransformArgs& args) {
    if (args.inventory || common.config.contains("inventory")) {
        const std::string path = common.get(args.inventory, "inventory");
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open inventory file: " + path);
        return load_inventory_jsonl(in);
    }
    const std::string triples_path = common.get(args.triples, "triples");
    const std::string types_path = common.get(args.types, "types");
    TypeVocabulary vocab = load_types(types_path);
    TripleStore store = load_triples_file(triples_path, vocab, TripleLoadOptions{false});
    return build_entity_inventory(store);
}

int run_transform(const Common& common, const TransformArgs& args) {
    const uint64_t seed = common.resolved_seed();
    const fs::path out = prepare_out(common);
    const std::string kind = common.get(args.kind, "kind");
    if (kind != "rpi" && kind != "rparg" && kind != "snli_rparg")
        throw ConfigError("unknown transform kind '" + kind +
                          "' (expected rpi, rparg, or snli_rparg)");
    const std::string dataset_path = common.get(args.dataset, "dataset");
    std::optional<std::string> format = args.format;
    if (!format && common.config.contains("format"))
        format = common.config.at("format").get<std::string>();
    std::optional<std::string> annotations = args.annotations;
    if (!annotations && common.config.contains("annotations"))
        annotations = common.config.at("annotations").get<std::string>();

    json echo{{"command", "transform"}, {"kind", kind}, {"dataset", dataset_path}, {"seed", seed},
              {"out", out.string()}};
    if (format) echo["format"] = *format;
    if (annotations) echo["annotations"] = *annotations;

    std::vector<NLIExample> examples = load_dataset(dataset_path, format, annotations);
    if (examples.empty()) throw DataError("dataset is empty: " + dataset_path);
    std::vector<NLIExample> transformed;
    transformed.reserve(examples.size());

    if (kind == "rpi") {
        PredicatePool pool = PredicatePool::harvest(examples);
        if (pool.global.size() < 2)
            throw DataError("predicate pool too small: harvested " +
                            std::to_string(pool.global.size()) + " predicates");
        for (size_t i = 0; i < examples.size(); ++i)
            transformed.push_back(random_premise(examples[i], pool, derive_seed(seed, "rpi", i)));
        echo["pool_size"] = pool.global.size();
    } else if (kind == "rparg") {
        const Stratum stratum =
            parse_stratum(common.get(args.stratum, "stratum", std::string("all")));
        const double quantile = common.get(args.quantile, "quantile", 1.0);
        EntityInventory inv = load_inventory_for_transform(common, args);
        for (size_t i = 0; i < examples.size(); ++i)
            transformed.push_back(
                replace_arguments(examples[i], inv, stratum, quantile, derive_seed(seed, "rparg", i)));
        echo["stratum"] = stratum_name(stratum);
        echo["quantile"] = quantile;
    } else {  // snli_rparg
        auto spec = common.model_spec(args.model_json, "model");
        if (!spec) throw ConfigError("snli_rparg needs a model: pass --model-json or config.model");
        std::unique_ptr<Model> model = make_model(*spec);
        EntityInventory inv = load_inventory_for_transform(common, args);
        echo["model"] = *spec;

        for (size_t i = 0; i < examples.size(); ++i) {
            const NLIExample& ex = examples[i];
            SharedEntityResult shared = identify_shared_entities_via_model(ex, *model);
            Rng rng(derive_seed(seed, "snli_rparg", i));
            std::vector<std::pair<std::string, std::string>> replacements;
            for (const auto& m : shared.entities) {
                std::string type = inv.has_type(m.type) ? m.type : std::string(TypeVocabulary::kFallback);
                if (!inv.has_type(type))
                    throw DataError("no inventory population for entity type '" + m.type + "'");
                const auto& population = inv.by_type.at(type);
                std::vector<const InventoryEntry*> eligible;
                for (const auto& e : population)
                    if (e.surface != m.surface) eligible.push_back(&e);
                if (eligible.empty())
                    throw DataError("empty replacement population for entity '" + m.surface + "'");
                replacements.emplace_back(m.surface, eligible[rng.index(eligible.size())]->surface);
            }
            transformed.push_back(replace_general_entities(ex, replacements));
        }
    }

    write_config_echo(out, echo);
    {
        std::ofstream f(out / "transformed.jsonl", std::ios::binary);
        write_examples_jsonl(transformed, f);
    }
    json stats{{"records", transformed.size()}, {"kind", kind}};
    write_json_file(out / "stats.json", stats);
    std::cout << "transform " << kind << ": " << transformed.size() << " records -> "
              << (out / "transformed.jsonl").string() << "\n";
    return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
    std::optional<std::string> dataset, format, annotations, prompt_style, model_json,
        attest_model_json, bank, stok;
    bool no_attest = false;
};

int run_evaluate(const Common& common, const EvaluateArgs& args) {
    const uint64_t seed = common.resolved_seed();
    const fs::path out = prepare_out(common);
    const std::string dataset_path = common.get(args.dataset, "dataset");
    std::optional<std::string> format = args.format;
    if (!format && common.config.contains("format"))
        format = common.config.at("format").get<std::string>();
    const PromptStyle style =
        parse_prompt_style(common.get(args.prompt_style, "prompt_style", std::string("plain")));
    auto model_spec = common.model_spec(args.model_json, "model");
    if (!model_spec) throw ConfigError("evaluate needs a model: pass --model-json or config.model");
    auto attest_spec = common.model_spec(args.attest_model_json, "attest_model");
    const bool do_attest = !args.no_attest && !common.config.value("no_attest", false);
    const std::string stok_mode = common.get(args.stok, "stok", std::string("raw"));
    if (stok_mode != "raw" && stok_mode != "normalized")
        throw ConfigError("unknown stok mode '" + stok_mode + "' (expected raw or normalized)");

    json echo{{"command", "evaluate"}, {"dataset", dataset_path},
              {"prompt_style", prompt_style_name(style)}, {"model", *model_spec},
              {"attest", do_attest}, {"stok", stok_mode}, {"seed", seed}, {"out", out.string()}};
    if (attest_spec) echo["attest_model"] = *attest_spec;
    if (format) echo["format"] = *format;
    write_config_echo(out, echo);

    std::vector<NLIExample> examples = load_dataset(dataset_path, format, args.annotations);
    if (examples.empty()) throw DataError("dataset is empty: " + dataset_path);

    PromptBank bank = load_bank(args.bank);
    std::unique_ptr<Model> model = make_model(*model_spec);
    std::unique_ptr<Model> attest_model;
    if (do_attest && attest_spec) attest_model = make_model(*attest_spec);
    Model& attester = attest_model ? *attest_model : *model;

    std::ofstream records_out(out / "records.jsonl", std::ios::binary);
    if (!records_out) throw ConfigError("cannot write records file");
    size_t done = 0;
    try {
        QueryOptions query_opts;
        query_opts.normalize_over_choices = stok_mode == "normalized";
        for (const auto& ex : examples) {
            Prompt prompt = assemble_inference_prompt(ex, bank, style);
            ChoiceJudgment j = query_choice(*model, prompt, {'A', 'B'}, query_opts);

            EvalRecord r;
            r.id = ex.meta.id;
            r.gold = ex.label;
            r.token = j.token;
            r.token_prob = j.token_prob;
            r.prob_available = j.prob_available;
            r.s_ent = entail_score(j);
            r.model = model->name();
            if (do_attest) {
                r.attestation = attest(attester, ex.hypothesis, bank);
                r.has_attestation = true;
            }
            json line = r;
            records_out << line.dump() << "\n";
            // bounded loss on remote failures
            if (++done % 50 == 0) records_out.flush();
        }
    } catch (const Error&) {
        records_out.flush();
        std::cerr << "evaluate: failed after " << done << " of " << examples.size()
                  << " records; partial records kept at " << (out / "records.jsonl").string()
                  << "\n";
        throw;
    }
    records_out.flush();
    std::cout << "evaluate: " << done << " records -> " << (out / "records.jsonl").string() << "\n";
    return 0;
}

// ---- attest-audit ----

struct AuditArgs {
    std::optional<std::string> dataset, format, annotations, model_json, bank;
    std::optional<size_t> sample_n;
};

int run_attest_audit(const Common& common, const AuditArgs& args) {
    const uint64_t seed = common.resolved_seed();
    const fs::path out = prepare_out(common);
    const std::string dataset_path = common.get(args.dataset, "dataset");
    std::optional<std::string> format = args.format;
    if (!format && common.config.contains("format"))
        format = common.config.at("format").get<std::string>();
    auto model_spec = common.model_spec(args.model_json, "model");
    if (!model_spec) throw ConfigError("attest-audit needs a model");

    std::vector<NLIExample> examples = load_dataset(dataset_path, format, args.annotations);
    const size_t sample_n = common.get(args.sample_n, "sample_n", examples.size());

    json echo{{"command", "attest-audit"}, {"dataset", dataset_path}, {"model", *model_spec},
              {"sample_n", sample_n}, {"seed", seed}, {"out", out.string()}};
    write_config_echo(out, echo);

    PromptBank bank = load_bank(args.bank);
    std::unique_ptr<Model> model = make_model(*model_spec);
    AuditResult audit = attestedness_audit(examples, *model, bank, sample_n, seed);

    write_json_file(out / "audit.json", audit_to_json(audit));
    std::cout << "attest-audit: " << audit.items.size() << " hypotheses, fraction attested "
              << audit.fraction_attested << " -> " << (out / "audit.json").string() << "\n";
    if (!audit.completed) {
        std::cerr << "attest-audit: model failed mid-run: " << audit.error << "\n";
        throw TransportError(audit.error);
    }
    return 0;
}

// ---- report ----

struct ReportArgs {
    std::vector<std::string> records;
    std::optional<std::string> mode, audit, pr_csv;
    std::optional<double> rate, threshold;
};

int run_report(const Common& common, const ReportArgs& args) {
    const uint64_t seed = common.resolved_seed();
    const fs::path out = prepare_out(common);

    std::vector<std::string> record_paths = args.records;
    if (record_paths.empty() && common.config.contains("records"))
        record_paths = common.config.at("records").get<std::vector<std::string>>();
    if (record_paths.empty()) throw ConfigError("report needs at least one --records file");

    ReportInputs inputs;
    inputs.mode = parse_bias_mode(common.get(args.mode, "mode", std::string("categorical")));
    inputs.calibration_rate = common.get(args.rate, "rate", 0.5);
    if (args.threshold) inputs.explicit_threshold = *args.threshold;
    else if (common.config.contains("threshold"))
        inputs.explicit_threshold = common.config.at("threshold").get<double>();
    inputs.seed = seed;

    for (const auto& path : record_paths) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open records file: " + path);
        auto records = read_eval_records_jsonl(in);
        inputs.records.insert(inputs.records.end(), records.begin(), records.end());
    }

    std::optional<std::string> audit_path = args.audit;
    if (!audit_path && common.config.contains("audit"))
        audit_path = common.config.at("audit").get<std::string>();
    if (audit_path) {
        std::ifstream in(*audit_path);
        if (!in) throw ConfigError("cannot open audit file: " + *audit_path);
        json a;
        try {
            in >> a;
        } catch (const json::parse_error& e) {
            throw ConfigError("audit file " + *audit_path + ": " + e.what());
        }
        inputs.audit = a;
    }

    json echo{{"command", "report"}, {"records", record_paths},
              {"mode", bias_mode_name(inputs.mode)}, {"rate", inputs.calibration_rate},
              {"seed", seed}, {"out", out.string()}};
    if (inputs.explicit_threshold) echo["threshold"] = *inputs.explicit_threshold;
    if (audit_path) echo["audit"] = *audit_path;
    write_config_echo(out, echo);
    inputs.config_echo = echo;

    json report = build_report(inputs);
    write_json_file(out / "report.json", report);

    if (args.pr_csv || common.config.contains("pr_csv")) {
        const std::string csv_path = common.get(args.pr_csv, "pr_csv");
        size_t gold_pos = report.at("counts").at("gold_positive").get<size_t>();
        if (gold_pos > 0) {
            PRCurve curve = pr_curve(inputs.records);
            std::ofstream f(csv_path, std::ios::binary);
            if (!f) throw ConfigError("cannot write PR CSV: " + csv_path);
            write_pr_csv(curve, f);
        } else {
            write_text(csv_path, "threshold,precision,recall\n");
        }
    }

    std::cout << "report: att_bias=" << report.at("att_bias").dump()
              << " auc=" << report.at("auc").dump() << " -> " << (out / "report.json").string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"typed entailment graphs, counterfactual NLI corpora, and attestation-bias "
                 "measurement"};
    app.require_subcommand(1);

    Common c_graph, c_train, c_transform, c_eval, c_audit, c_report;
    BuildGraphArgs a_graph;
    GenTrainArgs a_train;
    TransformArgs a_transform;
    EvaluateArgs a_eval;
    AuditArgs a_audit;
    ReportArgs a_report;

    CLI::App* cmd_graph = app.add_subcommand("build-graph", "build an entailment graph from triples");
    add_common(cmd_graph, c_graph);
    cmd_graph->add_option("--triples", a_graph.triples, "triples TSV file");
    cmd_graph->add_option("--types", a_graph.types, "type vocabulary file");
    cmd_graph->add_option("--weighting", a_graph.weighting, "raw|pmi");
    cmd_graph->add_option("--tau-pos", a_graph.tau_pos, "positive score threshold");
    cmd_graph->add_option("--min-support", a_graph.min_support, "min distinct features per predicate");
    cmd_graph->add_option("--top-k", a_graph.top_k, "max hypotheses per premise predicate");

    CLI::App* cmd_train = app.add_subcommand("gen-train", "emit a counterfactual training corpus");
    add_common(cmd_train, c_train);
    cmd_train->add_option("--triples", a_train.triples, "triples TSV file");
    cmd_train->add_option("--types", a_train.types, "type vocabulary file");
    cmd_train->add_option("--weighting", a_train.weighting, "raw|pmi");
    cmd_train->add_option("--tau-pos", a_train.tau_pos, "positive score threshold");
    cmd_train->add_option("--tau-neg", a_train.tau_neg, "negative score ceiling");
    cmd_train->add_option("--min-support", a_train.min_support, "min distinct features per predicate");
    cmd_train->add_option("--top-k", a_train.top_k, "max hypotheses per premise predicate");
    cmd_train->add_option("--n-pos", a_train.n_pos, "positive record count");
    cmd_train->add_option("--n-neg", a_train.n_neg, "negative record count");
    cmd_train->add_option("--display", a_train.display, "predicate display mapping JSON");
    cmd_train->add_flag("--randeg", a_train.randeg, "shuffled-predicate control corpus");

    CLI::App* cmd_transform = app.add_subcommand("transform", "derive a dataset variant");
    add_common(cmd_transform, c_transform);
    cmd_transform->add_option("--kind", a_transform.kind, "rpi|rparg|snli_rparg");
    cmd_transform->add_option("--dataset", a_transform.dataset, "input dataset");
    cmd_transform->add_option("--format", a_transform.format, "jsonl|levy_holt|snli|generic");
    cmd_transform->add_option("--annotations", a_transform.annotations, "entity annotations JSONL");
    cmd_transform->add_option("--inventory", a_transform.inventory, "entity inventory JSONL");
    cmd_transform->add_option("--triples", a_transform.triples, "triples TSV (inventory source)");
    cmd_transform->add_option("--types", a_transform.types, "type vocabulary file");
    cmd_transform->add_option("--stratum", a_transform.stratum, "bottom|top|all");
    cmd_transform->add_option("--quantile", a_transform.quantile, "stratum quantile (0,1]");
    cmd_transform->add_option("--model-json", a_transform.model_json, "model spec JSON (snli_rparg)");

    CLI::App* cmd_eval = app.add_subcommand("evaluate", "query a model over a dataset");
    add_common(cmd_eval, c_eval);
    cmd_eval->add_option("--dataset", a_eval.dataset, "input dataset");
    cmd_eval->add_option("--format", a_eval.format, "jsonl|levy_holt|snli|generic");
    cmd_eval->add_option("--annotations", a_eval.annotations, "entity annotations JSONL");
    cmd_eval->add_option("--prompt-style", a_eval.prompt_style, "plain|cot");
    cmd_eval->add_option("--model-json", a_eval.model_json, "model spec JSON");
    cmd_eval->add_option("--attest-model-json", a_eval.attest_model_json,
                         "separate model spec for attestation");
    cmd_eval->add_option("--bank", a_eval.bank, "prompt bank JSON file");
    cmd_eval->add_option("--stok", a_eval.stok, "letter probability mode: raw|normalized");
    cmd_eval->add_flag("--no-attest", a_eval.no_attest, "skip attestation queries");

    CLI::App* cmd_audit = app.add_subcommand("attest-audit", "audit hypothesis attestedness");
    add_common(cmd_audit, c_audit);
    cmd_audit->add_option("--dataset", a_audit.dataset, "input dataset");
    cmd_audit->add_option("--format", a_audit.format, "jsonl|levy_holt|snli|generic");
    cmd_audit->add_option("--annotations", a_audit.annotations, "entity annotations JSONL");
    cmd_audit->add_option("--model-json", a_audit.model_json, "model spec JSON");
    cmd_audit->add_option("--bank", a_audit.bank, "prompt bank JSON file");
    cmd_audit->add_option("--sample-n", a_audit.sample_n, "hypotheses to sample");

    CLI::App* cmd_report = app.add_subcommand("report", "compute the bias/inference report");
    add_common(cmd_report, c_report);
    cmd_report->add_option("--records", a_report.records, "eval records JSONL file(s)");
    cmd_report->add_option("--mode", a_report.mode, "categorical|threshold");
    cmd_report->add_option("--rate", a_report.rate, "calibration target positive rate");
    cmd_report->add_option("--threshold", a_report.threshold, "explicit decision threshold");
    cmd_report->add_option("--audit", a_report.audit, "audit JSON to embed");
    cmd_report->add_option("--pr-csv", a_report.pr_csv, "write PR points CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_graph->parsed()) {
            c_graph.load_config();
            return run_build_graph(c_graph, a_graph);
        }
        if (cmd_train->parsed()) {
            c_train.load_config();
            return run_gen_train(c_train, a_train);
        }
        if (cmd_transform->parsed()) {
            c_transform.load_config();
            return run_transform(c_transform, a_transform);
        }
        if (cmd_eval->parsed()) {
            c_eval.load_config();
            return run_evaluate(c_eval, a_eval);
        }
        if (cmd_audit->parsed()) {
            c_audit.load_config();
            return run_attest_audit(c_audit, a_audit);
        }
        if (cmd_report->parsed()) {
            c_report.load_config();
            return run_report(c_report, a_report);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
