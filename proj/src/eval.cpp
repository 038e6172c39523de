#include "acmamba/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "acmamba/errors.hpp"

namespace acmamba {

RocCurve rocCurve(const MatXd& scores, const GroundTruthMask& labels) {
    if (scores.rows() != labels.height || scores.cols() != labels.width)
        throw DimMismatchError("scores and labels dimensions differ");

    const Index n = scores.size();
    std::vector<std::pair<double, std::uint8_t>> items;
    items.reserve(static_cast<std::size_t>(n));
    for (Index r = 0; r < scores.rows(); ++r)
        for (Index c = 0; c < scores.cols(); ++c)
            items.emplace_back(scores(r, c), labels.at(r, c) ? 1 : 0);

    Index n_pos = 0;
    for (const auto& it : items) n_pos += it.second;
    const Index n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw SingleClassError("labels contain a single class; ROC undefined");

    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    Index tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < items.size()) {
        const double s = items[i].first;
        while (i < items.size() && items[i].first == s) {
            if (items[i].second)
                ++tp;
            else
                ++fp;
            ++i;
        }
        curve.points.push_back({s, static_cast<double>(fp) / n_neg,
                                static_cast<double>(tp) / n_pos});
    }

    double area = 0.0;
    for (std::size_t p = 1; p < curve.points.size(); ++p)
        area += (curve.points[p].fpr - curve.points[p - 1].fpr) *
                (curve.points[p].tpr + curve.points[p - 1].tpr) / 2.0;
    curve.auc = area;
    return curve;
}

double auc(const MatXd& scores, const GroundTruthMask& labels) {
    return rocCurve(scores, labels).auc;
}

std::string rocCsv(const RocCurve& curve) {
    std::string csv = "threshold,fpr,tpr\n";
    char buf[128];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.threshold, p.fpr,
                      p.tpr);
        csv += buf;
    }
    return csv;
}

std::string benchJson(const BenchReport& report) {
    nlohmann::json j = {{"train_seconds", report.train_seconds},
                        {"infer_seconds", report.infer_seconds},
                        {"samples_per_epoch", report.samples_per_epoch},
                        {"n_regions", report.n_regions},
                        {"n_pixels", report.n_pixels}};
    return j.dump(2) + "\n";
}

double medianSeconds(const std::function<void()>& fn, int repetitions) {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(std::max(repetitions, 1)));
    for (int i = 0; i < std::max(repetitions, 1); ++i) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

} // namespace acmamba
