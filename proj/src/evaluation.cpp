#include "eis/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace eis {

namespace {

void check_pair(const SaliencyMap& map, const BinaryMask& gt) {
    if (map.width() != gt.width() || map.height() != gt.height())
        throw Error("evaluation: map/gt dimension mismatch");
    if (gt.count() == 0) throw Error("evaluation: empty ground truth");
}

struct Counts {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double precision() const { return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
};

}  // namespace

PRCurve pr_curve(const SaliencyMap& map, const BinaryMask& gt) {
    check_pair(map, gt);
    // histogram of quantized values split by gt membership
    std::array<std::uint64_t, 256> pos{}, neg{};
    for (std::size_t p = 0; p < map.grid.data.size(); ++p) {
        const float v = std::clamp(map.grid.data[p], 0.0f, 1.0f);
        const int q = static_cast<int>(std::lround(255.0f * v));
        if (gt.grid.data[p])
            ++pos[q];
        else
            ++neg[q];
    }
    const std::uint64_t gt_total = gt.count();
    PRCurve curve;
    // predictions at threshold t are pixels with q > t: suffix sums
    std::array<std::uint64_t, 256> tp_at{}, fp_at{};
    std::uint64_t tp = 0, fp = 0;
    for (int t = 255; t >= 0; --t) {
        tp_at[t] = tp;
        fp_at[t] = fp;
        tp += pos[t];
        fp += neg[t];
    }
    for (int t = 0; t < 256; ++t) {
        Counts c;
        c.tp = tp_at[t];
        c.fp = fp_at[t];
        c.fn = gt_total - c.tp;
        curve.points[t].precision = c.precision();
        curve.points[t].recall = c.recall();
    }
    return curve;
}

namespace {

// binarize at twice the mean, capped just below the max so a nonzero map
// keeps a nonempty prediction
Counts adaptive_counts(const SaliencyMap& map, const BinaryMask& gt) {
    double sum = 0, mx = 0;
    for (float v : map.grid.data) {
        if (!std::isfinite(v)) throw Error("f_measure: non-finite value");
        sum += v;
        mx = std::max(mx, static_cast<double>(v));
    }
    double threshold = 2.0 * sum / static_cast<double>(map.grid.data.size());
    if (mx > 0) threshold = std::min(threshold, mx * (1.0 - 1e-9));

    Counts c;
    for (std::size_t p = 0; p < map.grid.data.size(); ++p) {
        const bool pred = map.grid.data[p] > threshold;
        const bool truth = gt.grid.data[p] != 0;
        if (pred && truth)
            ++c.tp;
        else if (pred)
            ++c.fp;
        else if (truth)
            ++c.fn;
    }
    return c;
}

double f_from(double precision, double recall, double upsilon_sq) {
    const double denom = upsilon_sq * precision + recall;
    return denom > 0 ? (1.0 + upsilon_sq) * precision * recall / denom : 0.0;
}

}  // namespace

double f_measure(const SaliencyMap& map, const BinaryMask& gt, double upsilon_sq) {
    check_pair(map, gt);
    const Counts c = adaptive_counts(map, gt);
    return f_from(c.precision(), c.recall(), upsilon_sq);
}

double auc(const PRCurve& curve) {
    std::array<PRPoint, 256> pts = curve.points;
    std::sort(pts.begin(), pts.end(), [](const PRPoint& a, const PRPoint& b) {
        if (a.recall != b.recall) return a.recall < b.recall;
        return a.precision < b.precision;
    });
    double area = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (pts[i].recall - pts[i - 1].recall) * (pts[i].precision + pts[i - 1].precision) / 2.0;
    return std::clamp(area, 0.0, 1.0);
}

ImageScore score_image(const std::string& id, const SaliencyMap& map, const BinaryMask& gt,
                       double upsilon_sq) {
    check_pair(map, gt);
    ImageScore s;
    s.image_id = id;
    const Counts c = adaptive_counts(map, gt);
    s.precision = c.precision();
    s.recall = c.recall();
    s.f_measure = f_from(s.precision, s.recall, upsilon_sq);
    s.auc = auc(pr_curve(map, gt));
    return s;
}

ScoreReport make_report(std::vector<ImageScore> rows) {
    ScoreReport r;
    r.rows = std::move(rows);
    if (r.rows.empty()) return r;
    for (const auto& s : r.rows) {
        r.mean_precision += s.precision;
        r.mean_recall += s.recall;
        r.mean_f += s.f_measure;
        r.mean_auc += s.auc;
    }
    const double n = static_cast<double>(r.rows.size());
    r.mean_precision /= n;
    r.mean_recall /= n;
    r.mean_f /= n;
    r.mean_auc /= n;
    return r;
}

namespace {

void write_csv_value(std::ofstream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << buf;
}

}  // namespace

void write_report_csv(const std::filesystem::path& path, const ScoreReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "image_id,precision,recall,f_measure,auc\n";
    auto row = [&out](const std::string& id, double p, double r, double f, double a) {
        out << id << ",";
        write_csv_value(out, p);
        out << ",";
        write_csv_value(out, r);
        out << ",";
        write_csv_value(out, f);
        out << ",";
        write_csv_value(out, a);
        out << "\n";
    };
    for (const auto& s : report.rows)
        row(s.image_id, s.precision, s.recall, s.f_measure, s.auc);
    row("summary", report.mean_precision, report.mean_recall, report.mean_f, report.mean_auc);
}

void write_curve_csv(const std::filesystem::path& path, const PRCurve& curve) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "threshold,precision,recall\n";
    for (int t = 0; t < 256; ++t) {
        out << t << ",";
        write_csv_value(out, curve.points[t].precision);
        out << ",";
        write_csv_value(out, curve.points[t].recall);
        out << "\n";
    }
}

}  // namespace eis
