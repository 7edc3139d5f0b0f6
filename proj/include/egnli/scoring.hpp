#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egnli/model_client.hpp"
#include "egnli/nli_data.hpp"

namespace egnli {

struct EvalRecord {
    std::string id;
    Label gold = Label::NoEntail;
    double s_ent = 0.5;
    char token = '?';  // chosen letter (A/B)
    double token_prob = 1.0;
    bool prob_available = false;
    bool has_attestation = false;
    AttestationLabel attestation = AttestationLabel::Unknown;
    std::string model;
};

void to_json(nlohmann::json& j, const EvalRecord& r);
void from_json(const nlohmann::json& j, EvalRecord& r);
void write_eval_records_jsonl(const std::vector<EvalRecord>& records, std::ostream& out);
std::vector<EvalRecord> read_eval_records_jsonl(std::istream& in);

// S_ent = 0.5 + 0.5 * 1[tok=A] * S_tok - 0.5 * 1[tok=B] * S_tok
double entail_score(const ChoiceJudgment& j);

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct PRCurve {
    std::vector<PRPoint> points;  // descending threshold, one per distinct score
    double auc = 0.0;
};

// Trapezoidal integral over (recall, precision) with the recall-zero
// endpoint carried at the first point's precision. Ties in score collapse
// into a single threshold step.
PRCurve pr_curve(const std::vector<EvalRecord>& records);

struct ThresholdCalibration {
    double threshold = 0.5;
    double achieved_rate = 0.0;
    double target_rate = 0.5;
    bool unattainable = false;  // achieved rate misses the target by more than 1/n
};

// Smallest threshold whose positive rate does not exceed the target, relaxed
// to the nearest achievable rate when a larger one sits closer.
ThresholdCalibration threshold_at_positive_rate(const std::vector<EvalRecord>& records, double rate);

enum class BiasMode { categorical, thresholded };

BiasMode parse_bias_mode(std::string_view name);
std::string bias_mode_name(BiasMode m);

struct StratumRates {
    double rate_attested = 0.0;
    double rate_nonattested = 0.0;
    size_t n_attested = 0;
    size_t n_nonattested = 0;
    size_t entail_attested = 0;
    size_t entail_nonattested = 0;
};

// Entail-prediction rate per attestation stratum; attested = {True},
// non-attested = {Unknown, False}. Categorical mode keys on token == A,
// thresholded mode on s_ent >= threshold.
StratumRates conditional_entail_rate(const std::vector<EvalRecord>& records, BiasMode mode,
                                     double threshold);

struct BiasReport {
    double att_bias = 0.0;  // rate_attested - rate_nonattested, exactly
    StratumRates rates;
    BiasMode mode = BiasMode::categorical;
    std::optional<double> threshold;
    std::optional<ThresholdCalibration> calibration;
};

BiasReport att_bias(const std::vector<EvalRecord>& records, BiasMode mode, double threshold);

struct AuditItem {
    std::string id;
    std::string hypothesis;
    AttestationLabel label = AttestationLabel::Unknown;
};

struct AuditResult {
    double fraction_attested = 0.0;
    std::vector<AuditItem> items;
    size_t sample_n = 0;
    bool completed = true;
    std::string error;  // model failure message; partial tally is preserved
};

AuditResult attestedness_audit(const std::vector<NLIExample>& dataset, Model& model,
                               const PromptBank& bank, size_t sample_n, uint64_t rng_seed);

nlohmann::json audit_to_json(const AuditResult& audit);

// Full report document: att_bias, conditional rates, PR curve, optional
// audit, config echo, and seed. AUC is null when the records hold no gold
// positive (with the reason recorded alongside).
struct ReportInputs {
    std::vector<EvalRecord> records;
    BiasMode mode = BiasMode::categorical;
    std::optional<double> explicit_threshold;
    double calibration_rate = 0.5;
    std::optional<nlohmann::json> audit;
    nlohmann::json config_echo;
    uint64_t seed = 0;
};

nlohmann::json build_report(const ReportInputs& inputs);

void write_pr_csv(const PRCurve& curve, std::ostream& out);

}  // namespace egnli
