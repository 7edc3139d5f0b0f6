#include <doctest.h>

#include <cmath>
#include <sstream>

#include "egnli/errors.hpp"
#include "egnli/model_client.hpp"
#include "egnli/nli_data.hpp"
#include "egnli/rng.hpp"
#include "egnli/scoring.hpp"
#include "oracles.hpp"

using namespace egnli;

namespace {

ChoiceJudgment judged(char token, double prob) {
    ChoiceJudgment j;
    j.token = token;
    j.token_prob = prob;
    j.prob_available = true;
    return j;
}

EvalRecord record(double s, Label gold, AttestationLabel att = AttestationLabel::Unknown,
                  bool has_att = false, char token = '?') {
    EvalRecord r;
    r.s_ent = s;
    r.gold = gold;
    r.attestation = att;
    r.has_attestation = has_att;
    r.token = token;
    return r;
}

std::vector<EvalRecord> random_records(uint64_t seed, size_t n) {
    Rng rng(seed);
    std::vector<EvalRecord> out;
    for (size_t i = 0; i < n; ++i) {
        double s = static_cast<double>(rng.below(21)) / 20.0;  // ties likely
        out.push_back(record(s, rng.below(2) ? Label::Entail : Label::NoEntail));
    }
    bool has_pos = false;
    for (const auto& r : out) has_pos |= r.gold == Label::Entail;
    if (!has_pos) out[0].gold = Label::Entail;
    return out;
}

}  // namespace

TEST_CASE("entail_score reproduces the mapping") {
    CHECK(entail_score(judged('A', 0.9)) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(entail_score(judged('B', 0.9)) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(entail_score(judged('A', 0.0)) == 0.5);
    CHECK(entail_score(judged('B', 0.0)) == 0.5);
    CHECK_THROWS_AS(entail_score(judged('C', 0.5)), DataError);
}

TEST_CASE("entail_score halves sum to one and order is preserved") {
    double prev_a = -1.0, prev_b = 2.0;
    for (int i = 0; i <= 100; ++i) {
        double s = i / 100.0;
        double a = entail_score(judged('A', s));
        double b = entail_score(judged('B', s));
        CHECK(a + b == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(a > prev_a);   // strictly increasing in s for A
        CHECK(b < prev_b);   // strictly decreasing for B
        prev_a = a;
        prev_b = b;
    }
}

TEST_CASE("pr_curve gives AUC 1 on perfect separation") {
    std::vector<EvalRecord> records{record(0.9, Label::Entail), record(0.8, Label::Entail),
                                    record(0.3, Label::NoEntail), record(0.1, Label::NoEntail)};
    auto curve = pr_curve(records);
    CHECK(curve.auc == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(curve.points.size() == 4);
    CHECK(curve.points[0].threshold == 0.9);
    CHECK(curve.points[0].recall == 0.5);
    CHECK(curve.points[1].recall == 1.0);
    CHECK(curve.points[1].precision == 1.0);
}

TEST_CASE("pr_curve degenerates to the base rate when all scores tie") {
    std::vector<EvalRecord> records{record(0.5, Label::Entail), record(0.5, Label::NoEntail),
                                    record(0.5, Label::Entail), record(0.5, Label::NoEntail)};
    auto curve = pr_curve(records);
    REQUIRE(curve.points.size() == 1);
    CHECK(curve.points[0].recall == 1.0);
    CHECK(curve.points[0].precision == 0.5);
    CHECK(curve.auc == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pr_curve requires a gold positive") {
    std::vector<EvalRecord> records{record(0.9, Label::NoEntail)};
    CHECK_THROWS_WITH_AS(pr_curve(records), doctest::Contains("undefined recall"), DataError);
}

TEST_CASE("pr_curve matches the exhaustive-threshold oracle") {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        auto records = random_records(seed, 50);
        auto curve = pr_curve(records);
        std::vector<std::pair<double, bool>> scored;
        for (const auto& r : records) scored.emplace_back(r.s_ent, r.gold == Label::Entail);
        CHECK(std::abs(curve.auc - oracle::pr_auc(scored)) < 1e-9);
    }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
    auto records = random_records(5, 60);
    double base = pr_curve(records).auc;
    for (auto& r : records) r.s_ent = 0.2 + 0.8 * r.s_ent * r.s_ent * r.s_ent;  // monotone on [0,1]
    CHECK(pr_curve(records).auc == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("threshold calibration hits an exact split") {
    std::vector<EvalRecord> records{record(0.9, Label::Entail), record(0.7, Label::Entail),
                                    record(0.4, Label::NoEntail), record(0.2, Label::NoEntail)};
    auto cal = threshold_at_positive_rate(records, 0.5);
    CHECK(cal.threshold == 0.7);
    CHECK(cal.achieved_rate == 0.5);
    CHECK_FALSE(cal.unattainable);
}

TEST_CASE("degenerate all-tied scores are flagged unattainable") {
    std::vector<EvalRecord> records(6, record(0.8, Label::NoEntail));
    auto cal = threshold_at_positive_rate(records, 0.5);
    CHECK((cal.achieved_rate == 0.0 || cal.achieved_rate == 1.0));
    CHECK(cal.unattainable);
}

TEST_CASE("101 distinct scores land within 1/101 of the target") {
    std::vector<EvalRecord> records;
    for (int i = 0; i <= 100; ++i) records.push_back(record(i / 100.0, Label::NoEntail));
    auto cal = threshold_at_positive_rate(records, 0.5);
    CHECK(std::abs(cal.achieved_rate - 0.5) <= 1.0 / 101.0);
    CHECK_FALSE(cal.unattainable);

    CHECK_THROWS_AS(threshold_at_positive_rate(records, 0.0), ConfigError);
    CHECK_THROWS_AS(threshold_at_positive_rate({}, 0.5), DataError);
}

TEST_CASE("att_bias is the exact rate difference") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 10; ++i) {
        records.push_back(record(i < 8 ? 0.9 : 0.1, Label::NoEntail, AttestationLabel::True, true,
                                 i < 8 ? 'A' : 'B'));
        records.push_back(record(i < 2 ? 0.9 : 0.1, Label::NoEntail, AttestationLabel::Unknown, true,
                                 i < 2 ? 'A' : 'B'));
    }
    auto by_threshold = att_bias(records, BiasMode::thresholded, 0.5);
    CHECK(by_threshold.att_bias == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(by_threshold.rates.n_attested == 10);
    CHECK(by_threshold.rates.n_nonattested == 10);

    auto categorical = att_bias(records, BiasMode::categorical, 0.0);
    CHECK(categorical.att_bias == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(categorical.att_bias == categorical.rates.rate_attested - categorical.rates.rate_nonattested);
}

TEST_CASE("att_bias names the empty stratum") {
    std::vector<EvalRecord> all_attested{
        record(0.9, Label::NoEntail, AttestationLabel::True, true, 'A')};
    CHECK_THROWS_WITH_AS(att_bias(all_attested, BiasMode::categorical, 0.0),
                         doctest::Contains("non-attested stratum"), DataError);
    std::vector<EvalRecord> none_attested{
        record(0.9, Label::NoEntail, AttestationLabel::False, true, 'A')};
    CHECK_THROWS_WITH_AS(att_bias(none_attested, BiasMode::categorical, 0.0),
                         doctest::Contains("attested stratum"), DataError);

    std::vector<EvalRecord> unlabeled{record(0.9, Label::NoEntail)};
    CHECK_THROWS_AS(att_bias(unlabeled, BiasMode::categorical, 0.0), DataError);
}

TEST_CASE("identical per-stratum score multisets give zero bias") {
    std::vector<EvalRecord> records;
    for (double s : {0.1, 0.4, 0.6, 0.9}) {
        records.push_back(record(s, Label::NoEntail, AttestationLabel::True, true));
        records.push_back(record(s, Label::NoEntail, AttestationLabel::False, true));
    }
    for (double t : {0.0, 0.3, 0.5, 0.7, 1.0}) {
        auto report = att_bias(records, BiasMode::thresholded, t);
        CHECK(report.att_bias == 0.0);
    }
}

TEST_CASE("conditional rates saturate at extreme thresholds") {
    std::vector<EvalRecord> records{
        record(0.9, Label::NoEntail, AttestationLabel::True, true, 'A'),
        record(0.2, Label::NoEntail, AttestationLabel::Unknown, true, 'B'),
    };
    auto low = conditional_entail_rate(records, BiasMode::thresholded, 0.0);
    CHECK(low.rate_attested == 1.0);
    CHECK(low.rate_nonattested == 1.0);
    auto high = conditional_entail_rate(records, BiasMode::thresholded, 0.95);
    CHECK(high.rate_attested == 0.0);
    CHECK(high.rate_nonattested == 0.0);
}

TEST_CASE("on all-negative data the entail rate is the false-positive rate") {
    // every record is gold No-Entail, so every Entail prediction is false positive
    std::vector<EvalRecord> records;
    for (int i = 0; i < 4; ++i)
        records.push_back(record(i % 2 ? 0.9 : 0.1, Label::NoEntail,
                                 AttestationLabel::True, true, i % 2 ? 'A' : 'B'));
    records.push_back(record(0.1, Label::NoEntail, AttestationLabel::Unknown, true, 'B'));
    auto rates = conditional_entail_rate(records, BiasMode::categorical, 0.0);
    CHECK(rates.rate_attested == 0.5);
    CHECK(rates.entail_attested == 2);
    CHECK(rates.rate_nonattested == 0.0);
}

namespace {

std::vector<NLIExample> tiny_dataset(size_t n) {
    std::vector<NLIExample> out;
    for (size_t i = 0; i < n; ++i) {
        NLIExample ex;
        ex.premise = "P" + std::to_string(i);
        ex.hypothesis = "Hypothesis number " + std::to_string(i) + " holds";
        ex.label = Label::NoEntail;
        ex.meta.id = "d" + std::to_string(i);
        out.push_back(ex);
    }
    return out;
}

struct FailingModel : Model {
    int budget;
    explicit FailingModel(int n) : budget(n) {}
    ModelReply complete(const std::string& prompt) override {
        if (budget-- <= 0) throw TransportError("connection dropped");
        ParsedQuery q = parse_query_from_prompt(prompt);
        (void)q;
        return ModelReply{"B) Unknown.", {}};
    }
    std::string name() const override { return "failing"; }
};

}  // namespace

TEST_CASE("attestedness audit counts attested fractions") {
    auto dataset = tiny_dataset(100);
    PromptBank bank = PromptBank::defaults();

    MemorizerStub empty_facts{std::set<std::string>{}};
    auto none = attestedness_audit(dataset, empty_facts, bank, 100, 9);
    CHECK(none.fraction_attested == 0.0);
    CHECK(none.items.size() == 100);
    CHECK(none.completed);

    MemorizerStub one_fact({dataset[13].hypothesis});
    auto some = attestedness_audit(dataset, one_fact, bank, 100, 9);
    CHECK(some.fraction_attested == doctest::Approx(0.01).epsilon(1e-12));

    CHECK_THROWS_AS(attestedness_audit(dataset, one_fact, bank, 101, 9), DataError);
}

TEST_CASE("audit preserves the partial tally when the model fails") {
    auto dataset = tiny_dataset(20);
    PromptBank bank = PromptBank::defaults();
    FailingModel model(7);
    auto audit = attestedness_audit(dataset, model, bank, 20, 3);
    CHECK_FALSE(audit.completed);
    CHECK(audit.items.size() == 7);
    CHECK(audit.error.find("connection dropped") != std::string::npos);
}

TEST_CASE("audit sampling is deterministic and without replacement") {
    auto dataset = tiny_dataset(50);
    PromptBank bank = PromptBank::defaults();
    MemorizerStub empty_facts{std::set<std::string>{}};
    auto a = attestedness_audit(dataset, empty_facts, bank, 25, 77);
    auto b = attestedness_audit(dataset, empty_facts, bank, 25, 77);
    REQUIRE(a.items.size() == b.items.size());
    std::set<std::string> ids;
    for (size_t i = 0; i < a.items.size(); ++i) {
        CHECK(a.items[i].id == b.items[i].id);
        CHECK(ids.insert(a.items[i].id).second);
    }
}

TEST_CASE("eval records round-trip through JSONL") {
    EvalRecord r;
    r.id = "x1";
    r.gold = Label::Entail;
    r.s_ent = 0.95;
    r.token = 'A';
    r.token_prob = 0.9;
    r.prob_available = true;
    r.has_attestation = true;
    r.attestation = AttestationLabel::True;
    r.model = "memorizer";

    std::ostringstream out;
    write_eval_records_jsonl({r}, out);
    std::istringstream in(out.str());
    auto back = read_eval_records_jsonl(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].s_ent == r.s_ent);
    CHECK(back[0].token == 'A');
    CHECK(back[0].attestation == AttestationLabel::True);
}

TEST_CASE("build_report emits the full schema") {
    std::vector<EvalRecord> records{
        record(0.95, Label::Entail, AttestationLabel::True, true, 'A'),
        record(0.85, Label::Entail, AttestationLabel::Unknown, true, 'A'),
        record(0.15, Label::NoEntail, AttestationLabel::Unknown, true, 'B'),
        record(0.05, Label::NoEntail, AttestationLabel::False, true, 'B'),
    };
    ReportInputs inputs;
    inputs.records = records;
    inputs.mode = BiasMode::categorical;
    inputs.seed = 17;
    inputs.config_echo = nlohmann::json{{"command", "report"}};
    auto report = build_report(inputs);

    for (const char* key : {"att_bias", "rates", "counts", "threshold", "auc", "pr_points",
                            "audit", "config", "seed", "mode", "calibration"})
        CHECK(report.contains(key));
    CHECK(report.at("auc").get<double>() == doctest::Approx(1.0));
    CHECK(report.at("seed").get<int>() == 17);
    CHECK(report.at("threshold").is_null());  // categorical mode
    CHECK(report.at("counts").at("gold_positive").get<int>() == 2);
}

TEST_CASE("build_report keeps the auc key with a note on all-negative data") {
    std::vector<EvalRecord> records{
        record(0.95, Label::NoEntail, AttestationLabel::True, true, 'A'),
        record(0.05, Label::NoEntail, AttestationLabel::False, true, 'B'),
    };
    ReportInputs inputs;
    inputs.records = records;
    auto report = build_report(inputs);
    CHECK(report.at("auc").is_null());
    CHECK(report.contains("auc_note"));
    CHECK(report.at("pr_points").empty());
    CHECK(report.at("att_bias").get<double>() == 1.0);
}

TEST_CASE("thresholded reports calibrate against the target rate") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 10; ++i)
        records.push_back(record(i / 10.0, i >= 5 ? Label::Entail : Label::NoEntail,
                                 i % 2 ? AttestationLabel::True : AttestationLabel::Unknown, true));
    ReportInputs inputs;
    inputs.records = records;
    inputs.mode = BiasMode::thresholded;
    auto report = build_report(inputs);
    CHECK(report.at("threshold").is_number());
    CHECK(report.at("calibration").at("target_rate").get<double>() == 0.5);
    CHECK(std::abs(report.at("calibration").at("achieved_rate").get<double>() - 0.5) <= 0.1);

    inputs.explicit_threshold = 0.75;
    auto pinned = build_report(inputs);
    CHECK(pinned.at("threshold").get<double>() == 0.75);
    CHECK(pinned.at("calibration").is_null());
}

TEST_CASE("pr csv lists one row per operating point") {
    std::vector<EvalRecord> records{record(0.9, Label::Entail), record(0.1, Label::NoEntail)};
    auto curve = pr_curve(records);
    std::ostringstream out;
    write_pr_csv(curve, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "threshold,precision,recall");
    size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == curve.points.size());
}
