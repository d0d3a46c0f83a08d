#include "actdet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace actdet {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ordered_json parse_json(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // e.byte is the offset of the failure; report it as line/column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
        }
        throw ConfigError(path.string() + ": JSON parse error at line " +
                          std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
}

double require_number(const ordered_json& j, const std::string& key,
                      const std::string& context) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError(context + ": missing or non-numeric \"" + key + "\"");
    return j.at(key).get<double>();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double round6(double v) {
    return static_cast<double>(std::llround(v * 1e6)) / 1e6;
}

void atomic_write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write file: " + tmp.string());
        out << text;
        if (!out)
            throw ConfigError("short write to: " + tmp.string());
    }
    fs::rename(tmp, path);
}

GroundTruthFile load_ground_truth(const fs::path& path) {
    const ordered_json root = parse_json(path);
    if (!root.contains("database") || !root.at("database").is_object())
        throw ConfigError(path.string() + ": expected top-level \"database\" object");
    const auto& db = root.at("database");

    // First pass interns labels so ids are lexicographic over the whole file.
    std::set<std::string> label_set;
    for (const auto& [vid, entry] : db.items()) {
        if (!entry.contains("annotations")) continue;
        for (const auto& ann : entry.at("annotations")) {
            if (!ann.contains("label") || !ann.at("label").is_string())
                throw ConfigError(path.string() + ": annotation without string label in '" +
                                  vid + "'");
            label_set.insert(ann.at("label").get<std::string>());
        }
    }
    LabelTable labels(label_set.begin(), label_set.end());

    GroundTruthFile out;
    out.labels = labels;
    for (const auto& [vid, entry] : db.items()) {
        VideoGroundTruth v;
        v.duration = require_number(entry, "duration", path.string() + ": video '" + vid + "'");
        if (!(std::isfinite(v.duration) && v.duration > 0.0))
            throw ValidationError("video '" + vid + "' has non-positive duration");
        if (entry.contains("subset") && entry.at("subset").is_string())
            v.subset = entry.at("subset").get<std::string>();
        if (entry.contains("annotations")) {
            for (const auto& ann : entry.at("annotations")) {
                const auto& seg = ann.at("segment");
                if (!seg.is_array() || seg.size() != 2)
                    throw ConfigError(path.string() + ": annotation segment in '" + vid +
                                      "' must be a [start, end] pair");
                Segment s(seg[0].get<double>(), seg[1].get<double>());
                if (s.end > v.duration)
                    throw ValidationError("annotation [" + format_double(s.start) + ", " +
                                          format_double(s.end) + "] exceeds duration of video '" +
                                          vid + "'");
                int cid = label_id(labels, ann.at("label").get<std::string>());
                v.annotations.push_back(Annotation{cid, s});
            }
        }
        std::sort(v.annotations.begin(), v.annotations.end(),
                  [](const Annotation& a, const Annotation& b) {
                      return a.segment.start < b.segment.start;
                  });
        out.gt.videos.emplace(vid, std::move(v));
    }
    return out;
}

void write_ground_truth(const GroundTruth& gt, const LabelTable& labels,
                        const fs::path& path) {
    ordered_json db = ordered_json::object();
    for (const auto& [vid, v] : gt.videos) {
        ordered_json anns = ordered_json::array();
        for (const auto& a : v.annotations) {
            if (a.class_id < 0 || a.class_id >= static_cast<int>(labels.size()))
                throw ValidationError("annotation class id out of label table range");
            anns.push_back({{"label", labels[a.class_id]},
                            {"segment", {a.segment.start, a.segment.end}}});
        }
        db[vid] = {{"duration", v.duration}, {"subset", v.subset}, {"annotations", anns}};
    }
    ordered_json root;
    root["database"] = std::move(db);
    atomic_write_text(path, root.dump(2) + "\n");
}

FeatureMatrix load_feature_matrix(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open file: " + path.string());

    std::vector<double> data;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;  // trailing newline
            throw ConfigError(path.string() + ": empty row " + std::to_string(rows));
        }
        std::size_t col = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            std::string cell = line.substr(pos, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - pos);
            // trim surrounding blanks
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            if (b == std::string::npos)
                throw ConfigError(path.string() + ": empty cell at (row " +
                                  std::to_string(rows) + ", col " + std::to_string(col) + ")");
            cell = cell.substr(b, e - b + 1);

            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            auto res = std::from_chars(first, last, v);
            if (res.ec != std::errc() || res.ptr != last)
                throw ConfigError(path.string() + ": unparsable cell '" + cell + "' at (row " +
                                  std::to_string(rows) + ", col " + std::to_string(col) + ")");
            if (!std::isfinite(v))
                throw ConfigError(path.string() + ": non-finite value at (row " +
                                  std::to_string(rows) + ", col " + std::to_string(col) + ")");
            data.push_back(v);
            ++col;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (rows == 0) {
            cols = col;
        } else if (col != cols) {
            throw ConfigError(path.string() + ": ragged row " + std::to_string(rows) +
                              " (expected " + std::to_string(cols) + " columns, got " +
                              std::to_string(col) + ")");
        }
        ++rows;
    }
    if (rows == 0)
        throw ConfigError(path.string() + ": no data rows");
    return FeatureMatrix(path.stem().string(), rows, cols, std::move(data));
}

void write_feature_matrix(const FeatureMatrix& m, const fs::path& path) {
    std::string out;
    out.reserve(m.rows * m.cols * 8);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) out += ',';
            out += format_double(m.at(r, c));
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

std::map<std::string, ManifestEntry> load_manifest(const fs::path& path) {
    const ordered_json root = parse_json(path);
    if (!root.is_object())
        throw ConfigError(path.string() + ": manifest must be a JSON object");
    std::map<std::string, ManifestEntry> out;
    for (const auto& [vid, entry] : root.items()) {
        ManifestEntry m;
        if (!entry.contains("path") || !entry.at("path").is_string())
            throw ConfigError(path.string() + ": entry '" + vid + "' missing \"path\"");
        m.path = entry.at("path").get<std::string>();
        m.fps = require_number(entry, "fps", path.string() + ": entry '" + vid + "'");
        m.duration = require_number(entry, "duration", path.string() + ": entry '" + vid + "'");
        if (!(m.fps > 0.0))
            throw ConfigError(path.string() + ": entry '" + vid + "' has non-positive fps");
        out.emplace(vid, std::move(m));
    }
    return out;
}

void write_manifest(const std::map<std::string, ManifestEntry>& entries, const fs::path& path) {
    ordered_json root = ordered_json::object();
    for (const auto& [vid, m] : entries)
        root[vid] = {{"path", m.path}, {"fps", m.fps}, {"duration", m.duration}};
    atomic_write_text(path, root.dump(2) + "\n");
}

namespace {

fs::path resolve_against(const fs::path& manifest_path, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute()) return p;
    return manifest_path.parent_path() / p;
}

}  // namespace

std::map<std::string, FeatureMatrix> load_features(const fs::path& manifest_path) {
    std::map<std::string, FeatureMatrix> out;
    for (const auto& [vid, entry] : load_manifest(manifest_path)) {
        FeatureMatrix m = load_feature_matrix(resolve_against(manifest_path, entry.path));
        m.video_id = vid;
        out.emplace(vid, std::move(m));
    }
    return out;
}

std::map<std::string, FrameScoreTrack> load_tracks(const fs::path& manifest_path) {
    std::map<std::string, FrameScoreTrack> out;
    for (const auto& [vid, entry] : load_manifest(manifest_path)) {
        FeatureMatrix m = load_feature_matrix(resolve_against(manifest_path, entry.path));
        if (m.cols != 1)
            throw ConfigError("score track for '" + vid + "' must have one column, got " +
                              std::to_string(m.cols));
        out.emplace(vid, FrameScoreTrack(vid, std::move(m.data), entry.fps));
    }
    return out;
}

void save_detections(const std::vector<Detection>& detections, const LabelTable& labels,
                     const fs::path& path) {
    // Group by video, preserving per-video detection order.
    std::map<std::string, std::vector<const Detection*>> by_video;
    for (const auto& d : detections) {
        if (d.class_id < 0 || d.class_id >= static_cast<int>(labels.size()))
            throw ValidationError("detection for '" + d.video_id + "' has class id " +
                                  std::to_string(d.class_id) + " outside the label table");
        by_video[d.video_id].push_back(&d);
    }

    ordered_json results = ordered_json::object();
    for (const auto& [vid, dets] : by_video) {
        ordered_json arr = ordered_json::array();
        for (const Detection* d : dets) {
            arr.push_back({{"label", labels[d->class_id]},
                           {"score", round6(d->score)},
                           {"segment", {round6(d->segment.start), round6(d->segment.end)}}});
        }
        results[vid] = std::move(arr);
    }

    ordered_json root;
    root["version"] = "1.0";
    root["results"] = std::move(results);
    root["external_data"] = ordered_json::object();
    atomic_write_text(path, root.dump(2) + "\n");
}

std::vector<Detection> load_detections(const fs::path& path, const LabelTable& labels) {
    const ordered_json root = parse_json(path);
    if (!root.contains("results") || !root.at("results").is_object())
        throw ConfigError(path.string() + ": expected \"results\" object");
    std::vector<Detection> out;
    for (const auto& [vid, dets] : root.at("results").items()) {
        for (const auto& d : dets) {
            const std::string label = d.at("label").get<std::string>();
            int cid = label_id(labels, label);
            if (cid < 0)
                throw ValidationError(path.string() + ": unknown label '" + label + "' for '" +
                                      vid + "'");
            const auto& seg = d.at("segment");
            out.push_back(Detection{vid, cid,
                                    Segment(seg[0].get<double>(), seg[1].get<double>()),
                                    d.at("score").get<double>()});
        }
    }
    return out;
}

}  // namespace actdet
