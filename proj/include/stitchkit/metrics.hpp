#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "stitchkit/image.hpp"
#include "stitchkit/score.hpp"

namespace stitchkit {

struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    long long total() const { return tp + fp + fn + tn; }

    bool operator==(const ConfusionCounts&) const = default;
};

/// Exact pixel tally of a prediction against ground truth.
inline ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("confusion_counts: mask dimensions differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.bits.size(); ++i) {
        const bool p = pred.bits[i] != 0;
        const bool g = gt.bits[i] != 0;
        if (p && g) ++c.tp;
        else if (p && !g) ++c.fp;
        else if (!p && g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

// Empty-denominator convention for the ratio metrics below: 1.0 when both
// masks are empty (perfect agreement), 0.0 otherwise.

inline double iou(const ConfusionCounts& c) {
    const long long den = c.tp + c.fp + c.fn;
    if (den == 0) return 1.0;
    return static_cast<double>(c.tp) / static_cast<double>(den);
}

inline double f_beta(const ConfusionCounts& c, double beta) {
    const double b2 = beta * beta;
    const double den = (1.0 + b2) * static_cast<double>(c.tp) + b2 * static_cast<double>(c.fn) +
                       static_cast<double>(c.fp);
    if (den == 0.0) return 1.0;
    return (1.0 + b2) * static_cast<double>(c.tp) / den;
}

inline double accuracy(const ConfusionCounts& c) {
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

inline double recall(const ConfusionCounts& c) {
    const long long den = c.tp + c.fn;
    if (den == 0) return c.fp == 0 ? 1.0 : 0.0;
    return static_cast<double>(c.tp) / static_cast<double>(den);
}

/// Mean absolute artifact-score difference over (prediction, ground truth)
/// mask pairs.
inline double mean_score_difference(const std::vector<std::pair<BinaryMask, BinaryMask>>& pairs,
                                    const DecomposeConfig& dcfg = {}, const ScoreParams& p = {}) {
    if (pairs.empty())
        throw std::invalid_argument("mean_score_difference: need at least one pair");
    double sum = 0.0;
    for (const auto& [pred, gt] : pairs) {
        if (pred.width != gt.width || pred.height != gt.height)
            throw std::invalid_argument("mean_score_difference: pair dimensions differ");
        sum += std::abs(score_mask(pred, dcfg, p).score - score_mask(gt, dcfg, p).score);
    }
    return sum / static_cast<double>(pairs.size());
}

/// Equal-error rate from genuine and impostor match scores (higher score =
/// more similar). FNMR(t) is the fraction of genuine scores below t, FMR(t)
/// the fraction of impostor scores at or above t. The EER is the symmetric
/// average (FNMR + FMR) / 2 at the operating point where |FNMR - FMR| is
/// smallest, scanning thresholds in ascending order.
inline double compute_eer(std::vector<double> genuine, std::vector<double> impostor) {
    if (genuine.empty() || impostor.empty())
        throw std::invalid_argument("compute_eer: score lists must be nonempty");
    std::sort(genuine.begin(), genuine.end());
    std::sort(impostor.begin(), impostor.end());
    const double ng = static_cast<double>(genuine.size());
    const double ni = static_cast<double>(impostor.size());

    std::vector<double> pool;
    pool.reserve(genuine.size() + impostor.size());
    pool.insert(pool.end(), genuine.begin(), genuine.end());
    pool.insert(pool.end(), impostor.begin(), impostor.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    double best_gap = 2.0;
    double best_eer = 0.0;
    const auto consider = [&](double fnmr, double fmr) {
        const double gap = std::abs(fnmr - fmr);
        if (gap < best_gap) {
            best_gap = gap;
            best_eer = 0.5 * (fnmr + fmr);
        }
    };
    consider(0.0, 1.0);  // threshold below every observed score
    for (double v : pool) {
        // operating point for thresholds just above v
        const auto below_g = std::upper_bound(genuine.begin(), genuine.end(), v) - genuine.begin();
        const auto above_i = impostor.end() - std::upper_bound(impostor.begin(), impostor.end(), v);
        consider(static_cast<double>(below_g) / ng, static_cast<double>(above_i) / ni);
    }
    return best_eer;
}

enum class Aggregation { Macro, Micro };

/// Dataset-level evaluation row: ratio metrics plus mean score difference.
struct MetricsReport {
    double iou = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double accuracy = 0.0;
    double recall = 0.0;
    double mean_score_diff = 0.0;
    int samples = 0;
};

/// Aggregate metrics over a dataset of (prediction, ground truth) pairs.
/// Macro averages per-image metrics; micro pools the pixel tallies first.
inline MetricsReport dataset_report(const std::vector<std::pair<BinaryMask, BinaryMask>>& pairs,
                                    const DecomposeConfig& dcfg = {}, const ScoreParams& p = {},
                                    Aggregation agg = Aggregation::Macro) {
    if (pairs.empty()) throw std::invalid_argument("dataset_report: need at least one pair");
    MetricsReport rep;
    rep.samples = static_cast<int>(pairs.size());
    rep.mean_score_diff = mean_score_difference(pairs, dcfg, p);
    if (agg == Aggregation::Macro) {
        for (const auto& [pred, gt] : pairs) {
            const ConfusionCounts c = confusion_counts(pred, gt);
            rep.iou += iou(c);
            rep.f1 += f_beta(c, 1.0);
            rep.f2 += f_beta(c, 2.0);
            rep.accuracy += accuracy(c);
            rep.recall += recall(c);
        }
        const double n = static_cast<double>(pairs.size());
        rep.iou /= n;
        rep.f1 /= n;
        rep.f2 /= n;
        rep.accuracy /= n;
        rep.recall /= n;
    } else {
        ConfusionCounts pooled;
        for (const auto& [pred, gt] : pairs) {
            const ConfusionCounts c = confusion_counts(pred, gt);
            pooled.tp += c.tp;
            pooled.fp += c.fp;
            pooled.fn += c.fn;
            pooled.tn += c.tn;
        }
        rep.iou = iou(pooled);
        rep.f1 = f_beta(pooled, 1.0);
        rep.f2 = f_beta(pooled, 2.0);
        rep.accuracy = accuracy(pooled);
        rep.recall = recall(pooled);
    }
    return rep;
}

} // namespace stitchkit
