#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "execfilter/error.hpp"

namespace execfilter {

// Scores and ground truth for one example's pool, index-aligned.
struct LabeledScores {
    std::vector<double> scores;
    std::vector<bool> spurious;
};

struct Prf {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
};

// Spurious detection at threshold tau: a program is predicted spurious when
// its score falls below tau. Degenerate cases: no predictions gives
// precision 1, no actual positives gives recall 1, and f1 is 0 when both
// components vanish.
inline Prf detection_metrics(const std::vector<double>& scores,
                             const std::vector<bool>& spurious, double tau) {
    if (scores.size() != spurious.size())
        throw ConfigError("detection_metrics: misaligned scores and labels");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted = scores[i] < tau;
        if (predicted && spurious[i]) ++tp;
        if (predicted && !spurious[i]) ++fp;
        if (!predicted && spurious[i]) ++fn;
    }
    Prf out;
    out.precision = (tp + fp) == 0
                        ? 1.0
                        : static_cast<double>(tp) / static_cast<double>(tp + fp);
    out.recall = (tp + fn) == 0
                     ? 1.0
                     : static_cast<double>(tp) / static_cast<double>(tp + fn);
    out.f1 = (out.precision + out.recall) == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

// Per-example metrics averaged afterward, f1 included.
inline Prf macro_detection(const std::vector<LabeledScores>& examples, double tau) {
    if (examples.empty()) throw EmptyInputError("macro_detection: no examples");
    Prf sum{0, 0, 0};
    for (const auto& ex : examples) {
        Prf p = detection_metrics(ex.scores, ex.spurious, tau);
        sum.precision += p.precision;
        sum.recall += p.recall;
        sum.f1 += p.f1;
    }
    const double n = static_cast<double>(examples.size());
    return Prf{sum.precision / n, sum.recall / n, sum.f1 / n};
}

struct CorrelationStats {
    double pearson_r = 0.0;  // label (1 = spurious) against 1 - score
    double roc_auc = 0.5;    // low score predicting spurious, ties half
    double mean_spurious = 0.0;
    double std_spurious = 0.0;
    double mean_correct = 0.0;
    double std_correct = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_and_sample_std(const std::vector<double>& xs) {
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
                  static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace detail

inline CorrelationStats correlation_stats(const std::vector<double>& scores,
                                          const std::vector<bool>& spurious) {
    if (scores.size() != spurious.size())
        throw ConfigError("correlation_stats: misaligned scores and labels");
    if (scores.size() < 2)
        throw DegenerateLabelsError("correlation_stats: need at least 2 items");
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < scores.size(); ++i)
        (spurious[i] ? pos : neg).push_back(scores[i]);
    if (pos.empty() || neg.empty())
        throw DegenerateLabelsError("correlation_stats: single-class labels");

    CorrelationStats out;
    std::tie(out.mean_spurious, out.std_spurious) = detail::mean_and_sample_std(pos);
    std::tie(out.mean_correct, out.std_correct) = detail::mean_and_sample_std(neg);

    // pearson between x = label and y = 1 - score; zero variance gives 0
    const double n = static_cast<double>(scores.size());
    double mx = static_cast<double>(pos.size()) / n;
    double my = 0.0;
    for (double s : scores) my += (1.0 - s);
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double dx = (spurious[i] ? 1.0 : 0.0) - mx;
        double dy = (1.0 - scores[i]) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    out.pearson_r = (sxx == 0.0 || syy == 0.0) ? 0.0 : sxy / std::sqrt(sxx * syy);

    // Mann-Whitney with midranks on ascending scores; U over the spurious
    // group counts (s_pos > s_neg) pairs plus half ties, so the AUC of a
    // low-score-means-spurious ranker is its complement
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    std::vector<double> rank(scores.size(), 0.0);
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) rank[order[t]] = mid;
        i = j;
    }
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (spurious[i]) rank_sum_pos += rank[i];
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    double u_pos = rank_sum_pos - np * (np + 1.0) / 2.0;
    out.roc_auc = 1.0 - u_pos / (np * nn);
    return out;
}

struct DetectionRow {
    double tau = 0.0;
    Prf prf;
};

struct DetectionReport {
    std::vector<DetectionRow> rows;
    std::optional<CorrelationStats> correlation;
    std::string note;  // set when correlation is unavailable
    std::size_t num_examples = 0;
    std::size_t num_programs = 0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["num_examples"] = num_examples;
        j["num_programs"] = num_programs;
        j["detection"] = nlohmann::json::array();
        for (const auto& r : rows)
            j["detection"].push_back({{"tau", r.tau},
                                      {"precision", r.prf.precision},
                                      {"recall", r.prf.recall},
                                      {"f1", r.prf.f1}});
        if (correlation) {
            j["correlation"] = {{"pearson_r", correlation->pearson_r},
                                {"roc_auc", correlation->roc_auc},
                                {"mean_spurious", correlation->mean_spurious},
                                {"std_spurious", correlation->std_spurious},
                                {"mean_correct", correlation->mean_correct},
                                {"std_correct", correlation->std_correct}};
        }
        if (!note.empty()) j["note"] = note;
        return j;
    }

    std::string to_text() const {
        std::ostringstream os;
        os.setf(std::ios::fixed);
        os.precision(4);
        os << "examples: " << num_examples << "  programs: " << num_programs
           << "\n";
        os << "tau      precision  recall     f1\n";
        for (const auto& r : rows)
            os << r.tau << "   " << r.prf.precision << "     " << r.prf.recall
               << "     " << r.prf.f1 << "\n";
        if (correlation) {
            os << "pearson_r(label, 1-score): " << correlation->pearson_r << "\n";
            os << "roc_auc: " << correlation->roc_auc << "\n";
            os << "score mean/std spurious: " << correlation->mean_spurious << " / "
               << correlation->std_spurious << "\n";
            os << "score mean/std correct:  " << correlation->mean_correct << " / "
               << correlation->std_correct << "\n";
        }
        if (!note.empty()) os << "note: " << note << "\n";
        return os.str();
    }

    std::string to_csv() const {
        std::ostringstream os;
        os.setf(std::ios::fixed);
        os.precision(6);
        os << "tau,precision,recall,f1\n";
        for (const auto& r : rows)
            os << r.tau << "," << r.prf.precision << "," << r.prf.recall << ","
               << r.prf.f1 << "\n";
        if (correlation) {
            os << "metric,value\n";
            os << "pearson_r," << correlation->pearson_r << "\n";
            os << "roc_auc," << correlation->roc_auc << "\n";
            os << "mean_spurious," << correlation->mean_spurious << "\n";
            os << "std_spurious," << correlation->std_spurious << "\n";
            os << "mean_correct," << correlation->mean_correct << "\n";
            os << "std_correct," << correlation->std_correct << "\n";
        }
        return os.str();
    }
};

// Macro detection rows at each tau plus pooled correlation stats. When the
// pooled labels are single-class the correlation block is replaced by a note
// and the detection rows still come out under the degenerate conventions.
inline DetectionReport build_report(const std::vector<LabeledScores>& examples,
                                    std::vector<double> taus) {
    DetectionReport report;
    report.num_examples = examples.size();
    std::vector<double> all_scores;
    std::vector<bool> all_labels;
    for (const auto& ex : examples) {
        if (ex.scores.size() != ex.spurious.size())
            throw ConfigError("build_report: misaligned example");
        report.num_programs += ex.scores.size();
        all_scores.insert(all_scores.end(), ex.scores.begin(), ex.scores.end());
        for (bool b : ex.spurious) all_labels.push_back(b);
    }
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    for (double tau : taus)
        report.rows.push_back(DetectionRow{tau, macro_detection(examples, tau)});
    try {
        report.correlation = correlation_stats(all_scores, all_labels);
    } catch (const DegenerateLabelsError& e) {
        report.note = e.what();
    }
    return report;
}

}  // namespace execfilter
