#pragma once

// Independent oracles for the similarity, graph, and metric paths. These
// recompute everything from raw counts or raw scores with straight-line
// brute force and must stay decoupled from the library implementations they
// check.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

using Feature = std::pair<std::string, std::string>;  // (arg1_id, arg2_id)
using Counts = std::map<std::string, std::map<Feature, long long>>;  // pred -> feature -> count
using Weights = std::map<std::string, std::map<Feature, double>>;

inline Weights raw_weights(const Counts& counts, int min_support) {
    Weights w;
    for (const auto& [pred, feats] : counts) {
        if (static_cast<int>(feats.size()) < min_support) continue;
        for (const auto& [f, c] : feats) w[pred][f] = static_cast<double>(c);
    }
    return w;
}

// pmi over the contingency counts of one type pair; marginals include every
// predicate, clamped-to-zero entries are dropped, and predicates left with
// no positive entry disappear.
inline Weights pmi_weights(const Counts& counts, int min_support) {
    std::map<std::string, long long> pred_total;
    std::map<Feature, long long> feat_total;
    long long grand = 0;
    for (const auto& [pred, feats] : counts)
        for (const auto& [f, c] : feats) {
            pred_total[pred] += c;
            feat_total[f] += c;
            grand += c;
        }

    Weights w;
    for (const auto& [pred, feats] : counts) {
        if (static_cast<int>(feats.size()) < min_support) continue;
        for (const auto& [f, c] : feats) {
            double v = std::log(static_cast<double>(c) * static_cast<double>(grand) /
                                (static_cast<double>(pred_total[pred]) *
                                 static_cast<double>(feat_total[f])));
            if (v > 0.0) w[pred][f] = v;
        }
        if (w.count(pred) && w[pred].empty()) w.erase(pred);
    }
    return w;
}

// exhaustive-summation Weeds precision; iterates the hypothesis side so the
// loop structure differs from the implementation under test
inline double weeds(const Weights& w, const std::string& p, const std::string& q) {
    const auto& pw = w.at(p);
    double denom = 0.0;
    for (const auto& [f, v] : pw) denom += v;
    double num = 0.0;
    auto q_it = w.find(q);
    if (q_it != w.end())
        for (const auto& [f, v] : q_it->second)
            if (pw.count(f)) num += pw.at(f);
    return num / denom;
}

struct Edge {
    std::string premise;
    std::string hypothesis;
    double score;
};

// every ordered pair scoring >= tau_pos, capped at top_k per premise with
// ties broken by hypothesis ascending
inline std::vector<Edge> graph_edges(const Weights& w, double tau_pos, int top_k) {
    std::vector<Edge> out;
    for (const auto& [p, pw] : w) {
        if (pw.empty()) continue;
        std::vector<Edge> cand;
        for (const auto& [q, qw] : w) {
            if (p == q) continue;
            double s = weeds(w, p, q);
            if (s >= tau_pos) cand.push_back(Edge{p, q, s});
        }
        std::sort(cand.begin(), cand.end(), [](const Edge& a, const Edge& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.hypothesis < b.hypothesis;
        });
        if (cand.size() > static_cast<size_t>(top_k)) cand.resize(top_k);
        out.insert(out.end(), cand.begin(), cand.end());
    }
    return out;
}

// Exhaustive-threshold PR-AUC over (score, is_positive) pairs: every distinct
// score becomes a threshold, TP/FP recounted from scratch each time.
inline double pr_auc(const std::vector<std::pair<double, bool>>& scored) {
    std::vector<double> thresholds;
    for (const auto& [s, pos] : scored) thresholds.push_back(s);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    long long positives = 0;
    for (const auto& [s, pos] : scored)
        if (pos) ++positives;

    double auc = 0.0;
    double prev_recall = 0.0;
    double prev_precision = 1.0;
    bool first = true;
    for (double t : thresholds) {
        long long tp = 0, fp = 0;
        for (const auto& [s, pos] : scored) {
            if (s >= t) {
                if (pos) ++tp;
                else ++fp;
            }
        }
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        double recall = static_cast<double>(tp) / static_cast<double>(positives);
        if (first) {
            prev_precision = precision;  // recall-zero endpoint carries it
            first = false;
        }
        auc += (recall - prev_recall) * (precision + prev_precision) / 2.0;
        prev_recall = recall;
        prev_precision = precision;
    }
    return auc;
}

}  // namespace oracle
