#include "eis/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace eis {

namespace {

// optimal bias for fixed weights: the hinge sum C sum max(0, 1 - y (f + b))
// is piecewise linear in b with slope -(#pos) at -inf, increasing by one at
// every breakpoint y_i - f_i, so the minimum spans the interval between the
// pos-th and (pos+1)-th sorted breakpoints; take its midpoint
double optimal_bias(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
    const std::size_t n = labels.size();
    std::vector<double> breaks(n);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        breaks[i] = labels[i] - scores[i];
        if (labels[i] > 0) ++pos;
    }
    std::sort(breaks.begin(), breaks.end());
    return 0.5 * (breaks[pos - 1] + breaks[pos]);
}

double primal_objective(const Eigen::VectorXd& w, double b, const Eigen::VectorXd& scores,
                        const std::vector<int>& labels, double cost) {
    double obj = 0.5 * w.squaredNorm();
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const double margin = 1.0 - labels[i] * (scores[i] + b);
        if (margin > 0) obj += cost * margin;
    }
    return obj;
}

}  // namespace

LinearModel train_linear_svm(const std::vector<Eigen::VectorXd>& samples,
                             const std::vector<int>& labels, double cost, TrainTrace* trace) {
    if (samples.size() != labels.size() || samples.empty())
        throw Error("train_linear_svm: bad inputs");
    if (cost <= 0) throw Error("train_linear_svm: C must be positive");
    int pos = 0, neg = 0;
    for (int y : labels) {
        if (y == 1)
            ++pos;
        else if (y == -1)
            ++neg;
        else
            throw Error("train_linear_svm: labels must be +1/-1");
    }
    if (pos == 0 || neg == 0)
        throw SingleClassError("train_linear_svm: need both classes, got " + std::to_string(pos) +
                               " positive / " + std::to_string(neg) + " negative");

    const Eigen::Index d = samples[0].size();
    const std::size_t n = samples.size();
    for (const auto& s : samples)
        if (s.size() != d) throw Error("train_linear_svm: inconsistent feature dimension");

    // canonical sample order: label descending, then lexicographic features
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (labels[a] != labels[b]) return labels[a] > labels[b];
        for (Eigen::Index c = 0; c < d; ++c)
            if (samples[a][c] != samples[b][c]) return samples[a][c] < samples[b][c];
        return false;
    });

    LinearModel model;
    model.cost = cost;
    model.positive_count = pos;
    model.negative_count = neg;

    // standardization statistics, accumulated in canonical order so the
    // model is exactly order-invariant
    model.feat_mean = Eigen::VectorXd::Zero(d);
    for (std::size_t i : order) model.feat_mean += samples[i];
    model.feat_mean /= static_cast<double>(n);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (std::size_t i : order) var += (samples[i] - model.feat_mean).cwiseAbs2();
    var /= static_cast<double>(n);
    model.feat_scale = var.cwiseSqrt();
    for (Eigen::Index c = 0; c < d; ++c)
        if (model.feat_scale[c] < 1e-12) model.feat_scale[c] = 1.0;

    Eigen::MatrixXd x(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.row(i) = ((samples[order[i]] - model.feat_mean).cwiseQuotient(model.feat_scale))
                       .transpose();
        y[i] = labels[order[i]];
    }
    const Eigen::VectorXd sq_norm = x.rowwise().squaredNorm();

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);

    constexpr double kGapTol = 1e-6;
    constexpr int kMaxEpochs = 10000;
    const std::size_t updates_per_epoch = n;

    constexpr double kKktTol = 1e-10;
    double gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXd f = x * w;
    int epoch = 0;
    for (; epoch < kMaxEpochs && gap > kGapTol; ++epoch) {
        bool updated = false;
        for (std::size_t step = 0; step < updates_per_epoch; ++step) {
            // maximal violating pair over g_i = y_i - w'x_i
            double up_best = -std::numeric_limits<double>::infinity();
            double low_best = std::numeric_limits<double>::infinity();
            std::ptrdiff_t i = -1, j = -1;
            for (std::size_t t = 0; t < n; ++t) {
                const double g = y[t] - f[t];
                const bool in_up = (y[t] > 0 && alpha[t] < cost) || (y[t] < 0 && alpha[t] > 0);
                const bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < cost);
                if (in_up && g > up_best) {
                    up_best = g;
                    i = static_cast<std::ptrdiff_t>(t);
                }
                if (in_low && g < low_best) {
                    low_best = g;
                    j = static_cast<std::ptrdiff_t>(t);
                }
            }
            if (i < 0 || j < 0 || up_best - low_best < kKktTol) break;

            // step t along alpha_i += y_i t, alpha_j -= y_j t
            const double curvature =
                sq_norm[i] + sq_norm[j] - 2.0 * x.row(i).dot(x.row(j));
            double t_lo, t_hi;
            if (y[i] > 0) {
                t_lo = -alpha[i];
                t_hi = cost - alpha[i];
            } else {
                t_lo = alpha[i] - cost;
                t_hi = alpha[i];
            }
            if (y[j] > 0) {
                t_lo = std::max(t_lo, alpha[j] - cost);
                t_hi = std::min(t_hi, alpha[j]);
            } else {
                t_lo = std::max(t_lo, -alpha[j]);
                t_hi = std::min(t_hi, cost - alpha[j]);
            }
            double t = curvature > 1e-12 ? (up_best - low_best) / curvature : t_hi;
            t = std::clamp(t, t_lo, t_hi);
            if (t == 0.0) break;
            alpha[i] += y[i] * t;
            alpha[j] -= y[j] * t;
            const Eigen::VectorXd dir = (x.row(i) - x.row(j)).transpose();
            w += t * dir;
            f += t * (x * dir);
            updated = true;
        }

        f = x * w;  // refresh, kills incremental drift
        const double b = optimal_bias(f, y);
        const double primal = primal_objective(w, b, f, y, cost);
        const double dual = alpha.sum() - 0.5 * w.squaredNorm();
        gap = primal - dual;
        if (trace) trace->epoch_objectives.push_back(primal);
        if (!updated) break;  // KKT-tight: no further progress possible
    }

    model.weights = w;
    model.bias = optimal_bias(f, y);
    if (trace) {
        trace->final_gap = gap;
        trace->epochs = epoch;
    }
    return model;
}

double predict(const LinearModel& model, const Eigen::VectorXd& raw_features) {
    if (raw_features.size() != model.weights.size())
        throw Error("predict: feature dimension mismatch");
    const Eigen::VectorXd z =
        (raw_features - model.feat_mean).cwiseQuotient(model.feat_scale);
    return model.weights.dot(z) + model.bias;
}

double svm_objective(const LinearModel& model, const std::vector<Eigen::VectorXd>& samples,
                     const std::vector<int>& labels, double cost) {
    double obj = 0.5 * model.weights.squaredNorm();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double margin = 1.0 - labels[i] * predict(model, samples[i]);
        if (margin > 0) obj += cost * margin;
    }
    return obj;
}

void dump_model(const LinearModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    double bias = model.bias;
    for (Eigen::Index c = 0; c < model.weights.size(); ++c) {
        const double raw = model.weights[c] / model.feat_scale[c];
        out << raw << "\n";
        bias -= model.weights[c] * model.feat_mean[c] / model.feat_scale[c];
    }
    out << bias << "\n";
}

SaliencyMap external_map(int width, int height, const std::vector<RegionProposal>& regions,
                         bool clamp_negative) {
    std::vector<const RegionProposal*> ordered;
    ordered.reserve(regions.size());
    for (const auto& r : regions) {
        if (!r.predicted) throw Error("external_map: region without prediction");
        if (r.mask.width != width || r.mask.height != height)
            throw Error("external_map: mask dimension mismatch");
        ordered.push_back(&r);
    }
    std::sort(ordered.begin(), ordered.end(), [](const RegionProposal* a, const RegionProposal* b) {
        if (a->mask.area != b->mask.area) return a->mask.area < b->mask.area;
        const std::uint64_t ha = a->mask.hash(), hb = b->mask.hash();
        if (ha != hb) return ha < hb;
        return *a->predicted < *b->predicted;
    });

    std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
    for (const RegionProposal* r : ordered) {
        const double score = clamp_negative ? std::max(0.0, *r->predicted) : *r->predicted;
        if (score == 0.0) continue;
        r->mask.for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
            for (std::uint64_t p = start; p < start + len; ++p) acc[p] += score;
        });
    }
    GrayF32Image g(width, height);
    for (std::size_t p = 0; p < acc.size(); ++p) g.data[p] = static_cast<float>(acc[p]);
    return normalize_map(SaliencyMap(std::move(g), false));
}

}  // namespace eis
