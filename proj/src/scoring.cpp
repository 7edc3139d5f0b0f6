#include "egnli/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "egnli/errors.hpp"
#include "egnli/rng.hpp"
#include "egnli/text.hpp"

namespace egnli {

void to_json(nlohmann::json& j, const EvalRecord& r) {
    j = nlohmann::json{{"id", r.id},
                       {"gold", label_name(r.gold)},
                       {"s_ent", r.s_ent},
                       {"token", std::string(1, r.token)},
                       {"token_prob", r.token_prob},
                       {"prob_available", r.prob_available},
                       {"model", r.model}};
    if (r.has_attestation) j["attestation"] = attestation_name(r.attestation);
}

void from_json(const nlohmann::json& j, EvalRecord& r) {
    r.id = j.at("id").get<std::string>();
    r.gold = label_from_name(j.at("gold").get<std::string>());
    r.s_ent = j.at("s_ent").get<double>();
    r.token = j.at("token").get<std::string>().at(0);
    r.token_prob = j.value("token_prob", 1.0);
    r.prob_available = j.value("prob_available", false);
    r.model = j.value("model", "");
    r.has_attestation = j.contains("attestation");
    if (r.has_attestation)
        r.attestation = attestation_from_name(j.at("attestation").get<std::string>());
}

void write_eval_records_jsonl(const std::vector<EvalRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        nlohmann::json j = r;
        out << j.dump() << "\n";
    }
}

std::vector<EvalRecord> read_eval_records_jsonl(std::istream& in) {
    std::vector<EvalRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<EvalRecord>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("eval records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

double entail_score(const ChoiceJudgment& j) {
    if (j.token != 'A' && j.token != 'B')
        throw DataError(std::string("entail_score expects token A or B, got '") + j.token + "'");
    const double s = j.token_prob;
    return j.token == 'A' ? 0.5 + 0.5 * s : 0.5 - 0.5 * s;
}

PRCurve pr_curve(const std::vector<EvalRecord>& records) {
    size_t positives = 0;
    for (const auto& r : records)
        if (r.gold == Label::Entail) ++positives;
    if (positives == 0) throw DataError("undefined recall: records contain no gold positive labels");

    std::vector<const EvalRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const EvalRecord* a, const EvalRecord* b) { return a->s_ent > b->s_ent; });

    PRCurve curve;
    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < sorted.size()) {
        const double score = sorted[i]->s_ent;
        while (i < sorted.size() && sorted[i]->s_ent == score) {
            if (sorted[i]->gold == Label::Entail) ++tp;
            else ++fp;
            ++i;
        }
        curve.points.push_back(PRPoint{score, static_cast<double>(tp) / static_cast<double>(tp + fp),
                                       static_cast<double>(tp) / static_cast<double>(positives)});
    }

    double auc = 0.0;
    double prev_recall = 0.0;
    double prev_precision = curve.points.front().precision;
    for (const auto& pt : curve.points) {
        auc += (pt.recall - prev_recall) * (pt.precision + prev_precision) / 2.0;
        prev_recall = pt.recall;
        prev_precision = pt.precision;
    }
    curve.auc = auc;
    return curve;
}

ThresholdCalibration threshold_at_positive_rate(const std::vector<EvalRecord>& records,
                                                double rate) {
    if (records.empty()) throw DataError("cannot calibrate a threshold on zero records");
    if (!(rate > 0.0 && rate < 1.0))
        throw ConfigError("target rate must be in (0, 1), got " + std::to_string(rate));

    std::vector<double> scores;
    scores.reserve(records.size());
    for (const auto& r : records) scores.push_back(r.s_ent);
    std::sort(scores.begin(), scores.end(), std::greater<>());
    const double n = static_cast<double>(scores.size());

    // candidate thresholds: above the maximum (rate 0), then each distinct score
    struct Candidate {
        double threshold;
        double fraction;
    };
    std::vector<Candidate> candidates;
    candidates.push_back(Candidate{scores.front() + 1.0, 0.0});
    for (size_t i = 0; i < scores.size(); ++i) {
        if (i + 1 < scores.size() && scores[i + 1] == scores[i]) continue;
        candidates.push_back(Candidate{scores[i], static_cast<double>(i + 1) / n});
    }

    const Candidate* best = &candidates.front();
    for (const auto& c : candidates) {
        const double d = std::abs(c.fraction - rate);
        const double best_d = std::abs(best->fraction - rate);
        if (d < best_d || (d == best_d && c.fraction <= rate && best->fraction > rate)) best = &c;
    }

    ThresholdCalibration out;
    out.threshold = best->threshold;
    out.achieved_rate = best->fraction;
    out.target_rate = rate;
    out.unattainable = std::abs(out.achieved_rate - rate) > 1.0 / n;
    return out;
}

BiasMode parse_bias_mode(std::string_view name) {
    if (name == "categorical") return BiasMode::categorical;
    if (name == "threshold" || name == "thresholded") return BiasMode::thresholded;
    throw ConfigError("unknown bias mode '" + std::string(name) +
                      "' (expected categorical or threshold)");
}

std::string bias_mode_name(BiasMode m) {
    return m == BiasMode::categorical ? "categorical" : "threshold";
}

StratumRates conditional_entail_rate(const std::vector<EvalRecord>& records, BiasMode mode,
                                     double threshold) {
    StratumRates rates;
    for (const auto& r : records) {
        if (!r.has_attestation)
            throw DataError("record '" + r.id + "' carries no attestation label");
        const bool attested = r.attestation == AttestationLabel::True;
        const bool entail = mode == BiasMode::categorical ? r.token == 'A' : r.s_ent >= threshold;
        if (attested) {
            ++rates.n_attested;
            if (entail) ++rates.entail_attested;
        } else {
            ++rates.n_nonattested;
            if (entail) ++rates.entail_nonattested;
        }
    }
    if (rates.n_attested == 0) throw DataError("attested stratum is empty");
    if (rates.n_nonattested == 0) throw DataError("non-attested stratum is empty");
    rates.rate_attested =
        static_cast<double>(rates.entail_attested) / static_cast<double>(rates.n_attested);
    rates.rate_nonattested =
        static_cast<double>(rates.entail_nonattested) / static_cast<double>(rates.n_nonattested);
    return rates;
}

BiasReport att_bias(const std::vector<EvalRecord>& records, BiasMode mode, double threshold) {
    BiasReport report;
    report.mode = mode;
    if (mode == BiasMode::thresholded) report.threshold = threshold;
    report.rates = conditional_entail_rate(records, mode, threshold);
    report.att_bias = report.rates.rate_attested - report.rates.rate_nonattested;
    return report;
}

AuditResult attestedness_audit(const std::vector<NLIExample>& dataset, Model& model,
                               const PromptBank& bank, size_t sample_n, uint64_t rng_seed) {
    if (sample_n > dataset.size())
        throw DataError("sample_n (" + std::to_string(sample_n) + ") exceeds dataset size (" +
                        std::to_string(dataset.size()) + ")");

    std::vector<size_t> indices(dataset.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    Rng rng(rng_seed);
    rng.shuffle(indices);
    indices.resize(sample_n);

    AuditResult result;
    result.sample_n = sample_n;
    size_t attested = 0;
    for (size_t idx : indices) {
        const NLIExample& ex = dataset[idx];
        AttestationLabel label;
        try {
            label = attest(model, ex.hypothesis, bank);
        } catch (const Error& e) {
            result.completed = false;
            result.error = e.what();
            break;
        }
        result.items.push_back(AuditItem{ex.meta.id, ex.hypothesis, label});
        if (label == AttestationLabel::True) ++attested;
    }
    if (!result.items.empty())
        result.fraction_attested =
            static_cast<double>(attested) / static_cast<double>(result.items.size());
    return result;
}

nlohmann::json audit_to_json(const AuditResult& audit) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : audit.items)
        items.push_back(nlohmann::json{{"id", item.id},
                                       {"hypothesis", item.hypothesis},
                                       {"attestation", attestation_name(item.label)}});
    nlohmann::json j{{"fraction_attested", audit.fraction_attested},
                     {"sample_n", audit.sample_n},
                     {"labeled_n", audit.items.size()},
                     {"completed", audit.completed},
                     {"items", items}};
    if (!audit.error.empty()) j["error"] = audit.error;
    return j;
}

nlohmann::json build_report(const ReportInputs& inputs) {
    if (inputs.records.empty()) throw DataError("report needs at least one eval record");

    nlohmann::json report;
    report["seed"] = inputs.seed;
    report["config"] = inputs.config_echo.is_null() ? nlohmann::json::object() : inputs.config_echo;

    size_t gold_pos = 0;
    for (const auto& r : inputs.records)
        if (r.gold == Label::Entail) ++gold_pos;
    report["counts"] = {{"records", inputs.records.size()},
                        {"gold_positive", gold_pos},
                        {"gold_negative", inputs.records.size() - gold_pos}};

    double threshold = 0.5;
    std::optional<ThresholdCalibration> calibration;
    if (inputs.mode == BiasMode::thresholded) {
        if (inputs.explicit_threshold) {
            threshold = *inputs.explicit_threshold;
        } else {
            calibration = threshold_at_positive_rate(inputs.records, inputs.calibration_rate);
            threshold = calibration->threshold;
        }
    }

    BiasReport bias = att_bias(inputs.records, inputs.mode, threshold);
    report["att_bias"] = bias.att_bias;
    report["mode"] = bias_mode_name(inputs.mode);
    report["threshold"] =
        inputs.mode == BiasMode::thresholded ? nlohmann::json(threshold) : nlohmann::json(nullptr);
    if (calibration) {
        report["calibration"] = {{"target_rate", calibration->target_rate},
                                 {"achieved_rate", calibration->achieved_rate},
                                 {"unattainable", calibration->unattainable}};
    } else {
        report["calibration"] = nullptr;
    }
    report["rates"] = {{"attested",
                        {{"rate", bias.rates.rate_attested},
                         {"n", bias.rates.n_attested},
                         {"entail_n", bias.rates.entail_attested}}},
                       {"nonattested",
                        {{"rate", bias.rates.rate_nonattested},
                         {"n", bias.rates.n_nonattested},
                         {"entail_n", bias.rates.entail_nonattested}}}};

    if (gold_pos > 0) {
        PRCurve curve = pr_curve(inputs.records);
        report["auc"] = curve.auc;
        nlohmann::json points = nlohmann::json::array();
        for (const auto& pt : curve.points)
            points.push_back(nlohmann::json{
                {"threshold", pt.threshold}, {"precision", pt.precision}, {"recall", pt.recall}});
        report["pr_points"] = points;
    } else {
        report["auc"] = nullptr;
        report["auc_note"] = "undefined: records contain no gold positive labels";
        report["pr_points"] = nlohmann::json::array();
    }

    report["audit"] = inputs.audit ? *inputs.audit : nlohmann::json(nullptr);
    return report;
}

void write_pr_csv(const PRCurve& curve, std::ostream& out) {
    out << "threshold,precision,recall\n";
    for (const auto& pt : curve.points) {
        nlohmann::json t = pt.threshold, p = pt.precision, r = pt.recall;
        out << t.dump() << "," << p.dump() << "," << r.dump() << "\n";
    }
}

}  // namespace egnli
