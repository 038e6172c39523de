#pragma once

#include <functional>
#include <string>
#include <vector>

#include "acmamba/cube.hpp"

namespace acmamba {

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

// Points sorted by threshold descending; first (0,0), last (1,1); one vertex
// per distinct score (ties grouped). auc is the trapezoid integral, which for
// this construction equals the Mann-Whitney statistic with ties counted 1/2.
struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

RocCurve rocCurve(const MatXd& scores, const GroundTruthMask& labels);
double auc(const MatXd& scores, const GroundTruthMask& labels);

std::string rocCsv(const RocCurve& curve); // header: threshold,fpr,tpr

struct BenchReport {
    double train_seconds = 0.0;
    double infer_seconds = 0.0;
    Index samples_per_epoch = 0;
    Index n_regions = 0;
    Index n_pixels = 0;
};

std::string benchJson(const BenchReport& report);

// Median wall time of fn over `repetitions` runs.
double medianSeconds(const std::function<void()>& fn, int repetitions);

} // namespace acmamba
