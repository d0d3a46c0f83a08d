#include "actdet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "actdet/io.hpp"

namespace actdet {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 320.0;
constexpr double kLeft = 56.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 48.0;

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

double pick_tick_step(double duration) {
    for (double step : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0})
        if (duration / step <= 12.0) return step;
    return 200.0;
}

struct Scale {
    double duration;
    double x(double t) const { return kLeft + (kWidth - kLeft - kRight) * (t / duration); }
    double y(double v) const { return kTop + (kHeight - kTop - kBottom) * (1.0 - v); }
};

// Step path over [0, duration]: level changes at the given breakpoints.
std::string step_path(const Scale& sc, const std::vector<Segment>& spans, double level) {
    std::string d = "M " + num(sc.x(0)) + " " + num(sc.y(0));
    for (const auto& s : spans) {
        d += " L " + num(sc.x(s.start)) + " " + num(sc.y(0));
        d += " L " + num(sc.x(s.start)) + " " + num(sc.y(level));
        d += " L " + num(sc.x(std::min(s.end, sc.duration))) + " " + num(sc.y(level));
        d += " L " + num(sc.x(std::min(s.end, sc.duration))) + " " + num(sc.y(0));
    }
    d += " L " + num(sc.x(sc.duration)) + " " + num(sc.y(0));
    return d;
}

}  // namespace

void render_plot(const PlotData& data, const std::filesystem::path& svg_path,
                 const std::filesystem::path& csv_path) {
    if (!(data.duration > 0.0))
        throw ValidationError("plot: duration must be positive");
    if (data.track.frame_count() == 0)
        throw ValidationError("plot: empty frame score track");
    const Scale sc{std::max(data.duration,
                            frame_end_seconds(data.track.frame_count() - 1, data.track.fps))};

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
           "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
           num(kHeight) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" fill=\"white\"/>\n";
    svg += "  <text x=\"" + num(kLeft) + "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"15\" fill=\"#222\">" + escape_xml(data.video_id) + "</text>\n";

    // Axes.
    svg += "  <line x1=\"" + num(kLeft) + "\" y1=\"" + num(sc.y(0)) + "\" x2=\"" +
           num(kWidth - kRight) + "\" y2=\"" + num(sc.y(0)) +
           "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    svg += "  <line x1=\"" + num(kLeft) + "\" y1=\"" + num(sc.y(0)) + "\" x2=\"" +
           num(kLeft) + "\" y2=\"" + num(sc.y(1)) +
           "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    const double tick = pick_tick_step(sc.duration);
    for (double t = 0.0; t <= sc.duration + 1e-9; t += tick) {
        svg += "  <line x1=\"" + num(sc.x(t)) + "\" y1=\"" + num(sc.y(0)) + "\" x2=\"" +
               num(sc.x(t)) + "\" y2=\"" + num(sc.y(0) + 5) +
               "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
        svg += "  <text x=\"" + num(sc.x(t)) + "\" y=\"" + num(sc.y(0) + 20) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" "
               "text-anchor=\"middle\">" + num(t) + "</text>\n";
    }
    svg += "  <text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" +
           num(kHeight - 10) + "\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"#444\" text-anchor=\"middle\">time (s)</text>\n";
    for (double v : {0.0, 0.5, 1.0}) {
        svg += "  <text x=\"" + num(kLeft - 8) + "\" y=\"" + num(sc.y(v) + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" "
               "text-anchor=\"end\">" + num(v) + "</text>\n";
    }

    // Ground truth occupancy, one blue step path.
    std::vector<Segment> gt_spans;
    for (const auto& ann : data.ground_truth) gt_spans.push_back(ann.segment);
    std::sort(gt_spans.begin(), gt_spans.end(),
              [](const Segment& a, const Segment& b) { return a.start < b.start; });
    svg += "  <path class=\"ground-truth\" d=\"" + step_path(sc, gt_spans, 1.0) +
           "\" fill=\"none\" stroke=\"#1f4fd8\" stroke-width=\"2\"/>\n";

    // Frame scores, red polyline at frame midpoints.
    std::string pts;
    for (std::size_t t = 0; t < data.track.frame_count(); ++t) {
        if (t) pts += ' ';
        const double mid = (frame_start_seconds(t, data.track.fps) +
                            frame_end_seconds(t, data.track.fps)) / 2.0;
        pts += num(sc.x(mid)) + "," + num(sc.y(data.track.scores[t]));
    }
    svg += "  <polyline class=\"frame-score\" points=\"" + pts +
           "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";

    // Proposals, one green plateau each at the proposal score.
    for (const auto& p : data.proposals) {
        svg += "  <path class=\"proposal\" d=\"" +
               step_path(sc, {p.segment}, p.score) +
               "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"2\"/>\n";
    }

    // Legend.
    struct LegendEntry {
        const char* color;
        const char* label;
    };
    const LegendEntry legend[] = {{"#1f4fd8", "ground truth"},
                                  {"#d62728", "classifier score"},
                                  {"#2ca02c", "proposal"}};
    double lx = kWidth - kRight - 420.0;
    for (const auto& e : legend) {
        svg += "  <line x1=\"" + num(lx) + "\" y1=\"20\" x2=\"" + num(lx + 22) +
               "\" y2=\"20\" stroke=\"" + e.color + "\" stroke-width=\"2\"/>\n";
        svg += "  <text x=\"" + num(lx + 28) + "\" y=\"24\" font-family=\"sans-serif\" "
               "font-size=\"12\" fill=\"#222\">" + std::string(e.label) + "</text>\n";
        lx += 140.0;
    }
    svg += "</svg>\n";
    atomic_write_text(svg_path, svg);

    // CSV sidecar, one row per frame.
    std::string csv = "time,gt,score,proposal\n";
    for (std::size_t t = 0; t < data.track.frame_count(); ++t) {
        const double time = frame_start_seconds(t, data.track.fps);
        int occupied = 0;
        for (const auto& ann : data.ground_truth)
            if (frame_inside(t, ann.segment, data.track.fps)) {
                occupied = 1;
                break;
            }
        double proposal_level = 0.0;
        for (const auto& p : data.proposals)
            if (t >= p.first_frame && t <= p.last_frame) {
                proposal_level = p.score;
                break;
            }
        csv += num(time) + "," + std::to_string(occupied) + "," +
               num(data.track.scores[t]) + "," + num(proposal_level) + "\n";
    }
    atomic_write_text(csv_path, csv);
}

}  // namespace actdet
