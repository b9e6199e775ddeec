#pragma once

// On-disk interchange formats.
//
//   tracks.txt   line-delimited text: a header block, then one object per line
//                "<id> <label> <slot>..." where each slot is "-" (absent) or
//                "x_min,y_min,x_max,y_max".
//   frames.wcsf  "WCSF", u32 T, u32 H, u32 W, T*H*W u8 (row-major).
//   flow.wcsw    "WCSW", u32 T-1, u32 H, u32 W, (T-1)*H*W*2 f32 (dx, dy interleaved).
//
// All multi-byte values are little-endian.

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wcs/error.hpp"
#include "wcs/types.hpp"

namespace wcs {

namespace fs = std::filesystem;

inline constexpr const char* kTracksFile = "tracks.txt";
inline constexpr const char* kFramesFile = "frames.wcsf";
inline constexpr const char* kFlowFile = "flow.wcsw";

// ---------------------------------------------------------------------------
// Validation

inline void validate(const VideoMeta& m) {
  if (m.video_id.empty()) throw ValidationError("video_id must be nonempty");
  for (char c : m.video_id)
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',')
      throw ValidationError("video_id must not contain whitespace or commas");
  if (m.frame_count < 2) throw ValidationError("frame count T must be >= 2");
  if (m.height < 1 || m.width < 1) throw ValidationError("H and W must be >= 1");
  if (m.fps_num == 0 || m.fps_den == 0) throw ValidationError("frame rate must be positive");
}

inline void validate(const Track& tr, const VideoMeta& m) {
  const std::string who = "track " + std::to_string(tr.object_id);
  if (tr.boxes.size() != m.frame_count)
    throw ValidationError(who + ": boxes length must equal T");
  if (tr.label.empty()) throw ValidationError(who + ": empty class label");
  bool any = false;
  for (const auto& b : tr.boxes) {
    if (!b) continue;
    any = true;
    for (double v : {b->x_min, b->y_min, b->x_max, b->y_max})
      if (!std::isfinite(v)) throw ValidationError(who + ": non-finite box coordinate");
    if (!(0.0 <= b->x_min && b->x_min < b->x_max && b->x_max <= double(m.width)))
      throw ValidationError(who + ": box violates 0 <= x_min < x_max <= W");
    if (!(0.0 <= b->y_min && b->y_min < b->y_max && b->y_max <= double(m.height)))
      throw ValidationError(who + ": box violates 0 <= y_min < y_max <= H");
  }
  if (!any) throw ValidationError(who + ": at least one slot must be present");
}

inline void validate(const TrackSet& ts) {
  validate(ts.meta);
  std::set<int> ids;
  for (const auto& tr : ts.tracks) {
    if (!ids.insert(tr.object_id).second)
      throw ValidationError("duplicate object_id " + std::to_string(tr.object_id));
    validate(tr, ts.meta);
  }
}

inline void validate(const FrameTensor& f, const VideoMeta& m) {
  if (f.frames != m.frame_count || f.height != m.height || f.width != m.width)
    throw ValidationError("frame tensor dimensions do not match video meta");
  if (f.data.size() != f.frames * f.height * f.width)
    throw ValidationError("frame tensor payload size mismatch");
}

inline void validate(const FlowField& f, const VideoMeta& m) {
  if (f.maps + 1 != m.frame_count)
    throw ValidationError("flow map count must be exactly T-1");
  if (f.height != m.height || f.width != m.width)
    throw ValidationError("flow dimensions do not match video meta");
  if (f.data.size() != f.maps * f.height * f.width * 2)
    throw ValidationError("flow payload size mismatch");
  for (float v : f.data)
    if (!std::isfinite(v)) throw ValidationError("flow contains non-finite values");
}

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest representation that round-trips exactly.
inline std::string format_shortest(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

namespace detail {

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Writes to a sibling temp file, then renames over the target.
inline void write_file_atomic(const fs::path& p, std::string_view bytes) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + p.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + p.string());
  }
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}

/// Cursor over a text buffer that tracks byte offsets for error reporting.
class LineReader {
 public:
  LineReader(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  /// Next non-blank, non-comment line; nullopt at end.
  std::optional<std::string_view> next() {
    while (pos_ < text_.size()) {
      const std::size_t start = pos_;
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      pos_ = end + 1;
      std::string_view line = text_.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      line_start_ = start;
      std::size_t first = line.find_first_not_of(" \t");
      if (first == std::string_view::npos || line[first] == '#') continue;
      return line;
    }
    line_start_ = text_.size();
    return std::nullopt;
  }

  [[noreturn]] void fail(std::string_view line, std::string_view token, const std::string& msg) const {
    std::size_t off = line_start_;
    if (!token.empty() && token.data() >= line.data() && token.data() <= line.data() + line.size())
      off += static_cast<std::size_t>(token.data() - line.data());
    throw ParseError(file_, off, msg);
  }
  [[noreturn]] void fail_here(const std::string& msg) const { throw ParseError(file_, line_start_, msg); }

 private:
  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
};

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tracks

inline std::string serialize_tracks(const TrackSet& ts) {
  std::ostringstream os;
  os << "wcs-tracks 1\n";
  os << "video_id " << ts.meta.video_id << "\n";
  os << "frames " << ts.meta.frame_count << "\n";
  os << "height " << ts.meta.height << "\n";
  os << "width " << ts.meta.width << "\n";
  os << "fps " << ts.meta.fps_num << "/" << ts.meta.fps_den << "\n";
  for (const auto& tr : ts.tracks) {
    os << tr.object_id << ' ' << tr.label;
    for (const auto& b : tr.boxes) {
      if (!b) {
        os << " -";
      } else {
        os << ' ' << format_shortest(b->x_min) << ',' << format_shortest(b->y_min) << ','
           << format_shortest(b->x_max) << ',' << format_shortest(b->y_max);
      }
    }
    os << '\n';
  }
  return os.str();
}

inline TrackSet parse_tracks(std::string_view text, const std::string& file = kTracksFile) {
  detail::LineReader lr(text, file);
  TrackSet ts;

  auto magic = lr.next();
  if (!magic || detail::split_ws(*magic) != std::vector<std::string_view>{"wcs-tracks", "1"})
    lr.fail_here("expected header 'wcs-tracks 1'");

  auto header = [&](std::string_view key) -> std::string_view {
    auto line = lr.next();
    if (!line) lr.fail_here("missing header field '" + std::string(key) + "'");
    auto tok = detail::split_ws(*line);
    if (tok.size() != 2 || tok[0] != key)
      lr.fail(*line, tok.empty() ? *line : tok[0], "expected '" + std::string(key) + " <value>'");
    return tok[1];
  };
  auto header_uint = [&](std::string_view key) -> std::size_t {
    std::string_view v = header(key);
    auto n = detail::parse_number<std::size_t>(v);
    if (!n) throw ParseError(file, 0, "bad integer for '" + std::string(key) + "'");
    return *n;
  };

  ts.meta.video_id = std::string(header("video_id"));
  ts.meta.frame_count = header_uint("frames");
  ts.meta.height = header_uint("height");
  ts.meta.width = header_uint("width");
  {
    std::string_view fps = header("fps");
    const auto slash = fps.find('/');
    auto num = detail::parse_number<std::uint32_t>(fps.substr(0, slash));
    auto den = slash == std::string_view::npos ? std::optional<std::uint32_t>(1)
                                               : detail::parse_number<std::uint32_t>(fps.substr(slash + 1));
    if (!num || !den) lr.fail_here("bad fps value, expected <num>/<den>");
    ts.meta.fps_num = *num;
    ts.meta.fps_den = *den;
  }
  validate(ts.meta);

  while (auto line = lr.next()) {
    auto tok = detail::split_ws(*line);
    if (tok.size() < 2) lr.fail(*line, *line, "track line needs id and label");
    Track tr;
    auto id = detail::parse_number<int>(tok[0]);
    if (!id) lr.fail(*line, tok[0], "bad object id");
    tr.object_id = *id;
    tr.label = std::string(tok[1]);
    if (tok.size() - 2 != ts.meta.frame_count)
      lr.fail(*line, tok[0], "track has " + std::to_string(tok.size() - 2) + " slots, expected " +
                                 std::to_string(ts.meta.frame_count));
    tr.boxes.reserve(ts.meta.frame_count);
    for (std::size_t k = 2; k < tok.size(); ++k) {
      std::string_view s = tok[k];
      if (s == "-") {
        tr.boxes.emplace_back(std::nullopt);
        continue;
      }
      std::array<double, 4> v{};
      std::size_t start = 0;
      for (int c = 0; c < 4; ++c) {
        std::size_t end = (c < 3) ? s.find(',', start) : s.size();
        if (end == std::string_view::npos) lr.fail(*line, s, "box needs four comma-separated values");
        auto num = detail::parse_number<double>(s.substr(start, end - start));
        if (!num) lr.fail(*line, s.substr(start), "bad box coordinate");
        v[c] = *num;
        start = end + 1;
      }
      tr.boxes.emplace_back(Box{v[0], v[1], v[2], v[3]});
    }
    ts.tracks.push_back(std::move(tr));
  }
  validate(ts);
  return ts;
}

// ---------------------------------------------------------------------------
// Frames and flow

inline std::string serialize_frames(const FrameTensor& f) {
  std::string out = "WCSF";
  out.reserve(16 + f.data.size());
  detail::put_u32(out, static_cast<std::uint32_t>(f.frames));
  detail::put_u32(out, static_cast<std::uint32_t>(f.height));
  detail::put_u32(out, static_cast<std::uint32_t>(f.width));
  out.append(reinterpret_cast<const char*>(f.data.data()), f.data.size());
  return out;
}

inline FrameTensor parse_frames(std::string_view bytes, const std::string& file = kFramesFile) {
  if (bytes.size() < 16) throw ParseError(file, bytes.size(), "truncated header");
  if (bytes.substr(0, 4) != "WCSF") throw ParseError(file, 0, "bad magic, expected WCSF");
  FrameTensor f;
  f.frames = detail::get_u32(bytes, 4);
  f.height = detail::get_u32(bytes, 8);
  f.width = detail::get_u32(bytes, 12);
  const std::size_t n = f.frames * f.height * f.width;
  if (bytes.size() - 16 != n)
    throw ParseError(file, std::min(bytes.size(), 16 + n),
                     "payload is " + std::to_string(bytes.size() - 16) + " bytes, expected " + std::to_string(n));
  f.data.assign(reinterpret_cast<const std::uint8_t*>(bytes.data()) + 16,
                reinterpret_cast<const std::uint8_t*>(bytes.data()) + 16 + n);
  return f;
}

inline std::string serialize_flow(const FlowField& f) {
  std::string out = "WCSW";
  out.reserve(16 + f.data.size() * 4);
  detail::put_u32(out, static_cast<std::uint32_t>(f.maps));
  detail::put_u32(out, static_cast<std::uint32_t>(f.height));
  detail::put_u32(out, static_cast<std::uint32_t>(f.width));
  for (float v : f.data) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline FlowField parse_flow(std::string_view bytes, const std::string& file = kFlowFile) {
  if (bytes.size() < 16) throw ParseError(file, bytes.size(), "truncated header");
  if (bytes.substr(0, 4) != "WCSW") throw ParseError(file, 0, "bad magic, expected WCSW");
  FlowField f;
  f.maps = detail::get_u32(bytes, 4);
  f.height = detail::get_u32(bytes, 8);
  f.width = detail::get_u32(bytes, 12);
  const std::size_t n = f.maps * f.height * f.width * 2;
  if (bytes.size() - 16 != n * 4)
    throw ParseError(file, std::min(bytes.size(), 16 + n * 4),
                     "payload is " + std::to_string(bytes.size() - 16) + " bytes, expected " +
                         std::to_string(n * 4));
  f.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.data[i] = std::bit_cast<float>(detail::get_u32(bytes, 16 + 4 * i));
  return f;
}

// ---------------------------------------------------------------------------
// Bundles

struct Bundle {
  TrackSet tracks;
  std::optional<FrameTensor> frames;
  std::optional<FlowField> flow;
  /// Extra files carried verbatim (simulator scene, event log, injection log).
  std::map<std::string, std::string> extras;

  friend bool operator==(const Bundle&, const Bundle&) = default;
};

inline void validate(const Bundle& b) {
  validate(b.tracks);
  if (b.frames) validate(*b.frames, b.tracks.meta);
  if (b.flow) validate(*b.flow, b.tracks.meta);
}

inline Bundle read_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("bundle directory not found: " + dir.string());
  const fs::path tracks = dir / kTracksFile;
  if (!fs::exists(tracks)) throw IoError("bundle has no " + std::string(kTracksFile) + ": " + dir.string());
  Bundle b;
  b.tracks = parse_tracks(detail::read_file(tracks), tracks.string());
  if (fs::exists(dir / kFramesFile)) {
    const fs::path p = dir / kFramesFile;
    b.frames = parse_frames(detail::read_file(p), p.string());
  }
  if (fs::exists(dir / kFlowFile)) {
    const fs::path p = dir / kFlowFile;
    b.flow = parse_flow(detail::read_file(p), p.string());
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == kTracksFile || name == kFramesFile || name == kFlowFile) continue;
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      b.extras[name] = detail::read_file(entry.path());
  }
  validate(b);
  return b;
}

/// Writes into a temporary sibling directory, then swaps it into place.
inline void write_bundle(const Bundle& b, const fs::path& dir) {
  validate(b);
  fs::path tmp = dir;
  tmp += ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  if (!fs::create_directories(tmp, ec) && ec) throw IoError("cannot create " + tmp.string());
  auto put = [&](const std::string& name, std::string_view bytes) {
    std::ofstream out(tmp / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (tmp / name).string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  put(kTracksFile, serialize_tracks(b.tracks));
  if (b.frames) put(kFramesFile, serialize_frames(*b.frames));
  if (b.flow) put(kFlowFile, serialize_flow(*b.flow));
  for (const auto& [name, text] : b.extras) put(name, text);
  fs::remove_all(dir, ec);
  fs::rename(tmp, dir, ec);
  if (ec) throw IoError("cannot move bundle into " + dir.string());
}

// ---------------------------------------------------------------------------
// CSV tables

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    std::string_view cell = line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    out.push_back(cell);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace detail

/// Human score table with header `video_id,score`.
inline std::vector<HumanScoreRecord> parse_scores_csv(std::string_view text, const std::string& file = "scores.csv") {
  detail::LineReader lr(text, file);
  auto header = lr.next();
  if (!header || detail::split_csv(*header) != std::vector<std::string_view>{"video_id", "score"})
    lr.fail_here("expected header 'video_id,score'");
  std::vector<HumanScoreRecord> out;
  std::set<std::string> seen;
  while (auto line = lr.next()) {
    auto cells = detail::split_csv(*line);
    if (cells.size() != 2) lr.fail(*line, *line, "expected 2 columns");
    if (cells[0].empty()) lr.fail(*line, cells[0], "empty video_id");
    auto v = detail::parse_number<double>(cells[1]);
    if (!v || !std::isfinite(*v)) lr.fail(*line, cells[1], "score must be a finite number");
    if (!seen.insert(std::string(cells[0])).second)
      throw ValidationError("duplicate video_id in scores: " + std::string(cells[0]));
    out.push_back({std::string(cells[0]), *v});
  }
  return out;
}

inline std::string serialize_scores_csv(const std::vector<HumanScoreRecord>& rows) {
  std::string out = "video_id,score\n";
  for (const auto& r : rows) out += r.video_id + "," + format_shortest(r.score) + "\n";
  return out;
}

/// Per-video submetrics table with header `video_id,op,rs,cc,fp`.
struct FeatureRow {
  std::string video_id;
  SubmetricVector sub;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

inline std::vector<FeatureRow> parse_features_csv(std::string_view text, const std::string& file = "features.csv") {
  detail::LineReader lr(text, file);
  auto header = lr.next();
  if (!header ||
      detail::split_csv(*header) != std::vector<std::string_view>{"video_id", "op", "rs", "cc", "fp"})
    lr.fail_here("expected header 'video_id,op,rs,cc,fp'");
  std::vector<FeatureRow> out;
  std::set<std::string> seen;
  while (auto line = lr.next()) {
    auto cells = detail::split_csv(*line);
    if (cells.size() != 5) lr.fail(*line, *line, "expected 5 columns");
    FeatureRow row;
    row.video_id = std::string(cells[0]);
    double* dst[4] = {&row.sub.op, &row.sub.rs, &row.sub.cc, &row.sub.fp};
    for (int c = 0; c < 4; ++c) {
      auto v = detail::parse_number<double>(cells[c + 1]);
      if (!v) lr.fail(*line, cells[c + 1], "bad number");
      *dst[c] = *v;
    }
    validate(row.sub);
    if (!seen.insert(row.video_id).second) throw ValidationError("duplicate video_id: " + row.video_id);
    out.push_back(std::move(row));
  }
  return out;
}

inline std::string serialize_features_csv(const std::vector<FeatureRow>& rows) {
  std::string out = "video_id,op,rs,cc,fp\n";
  for (const auto& r : rows)
    out += r.video_id + "," + format_shortest(r.sub.op) + "," + format_shortest(r.sub.rs) + "," +
           format_shortest(r.sub.cc) + "," + format_shortest(r.sub.fp) + "\n";
  return out;
}

/// Dataset manifest: `video_id,bundle_path,model_label,human_score[,extra...]`.
struct ManifestRow {
  std::string video_id;
  std::string bundle_path;
  std::string model_label;
  std::optional<double> human_score;
  std::vector<double> extras;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct Manifest {
  std::vector<std::string> extra_columns;
  std::vector<ManifestRow> rows;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline Manifest parse_manifest_csv(std::string_view text, const std::string& file = "manifest.csv") {
  detail::LineReader lr(text, file);
  auto header = lr.next();
  if (!header) lr.fail_here("empty manifest");
  auto cols = detail::split_csv(*header);
  const std::vector<std::string_view> fixed = {"video_id", "bundle_path", "model_label", "human_score"};
  if (cols.size() < 4 || !std::equal(fixed.begin(), fixed.end(), cols.begin()))
    lr.fail_here("expected header 'video_id,bundle_path,model_label,human_score[,...]'");
  Manifest m;
  for (std::size_t c = 4; c < cols.size(); ++c) m.extra_columns.emplace_back(cols[c]);
  std::set<std::string> seen;
  while (auto line = lr.next()) {
    auto cells = detail::split_csv(*line);
    if (cells.size() != cols.size()) lr.fail(*line, *line, "column count mismatch");
    ManifestRow row;
    row.video_id = std::string(cells[0]);
    row.bundle_path = std::string(cells[1]);
    row.model_label = std::string(cells[2]);
    if (row.video_id.empty()) lr.fail(*line, cells[0], "empty video_id");
    if (!cells[3].empty()) {
      auto v = detail::parse_number<double>(cells[3]);
      if (!v || !std::isfinite(*v)) lr.fail(*line, cells[3], "human_score must be finite");
      row.human_score = *v;
    }
    for (std::size_t c = 4; c < cells.size(); ++c) {
      auto v = detail::parse_number<double>(cells[c]);
      if (!v || !std::isfinite(*v)) lr.fail(*line, cells[c], "extra metric must be finite");
      row.extras.push_back(*v);
    }
    if (!seen.insert(row.video_id).second) throw ValidationError("duplicate video_id: " + row.video_id);
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline std::string serialize_manifest_csv(const Manifest& m) {
  std::string out = "video_id,bundle_path,model_label,human_score";
  for (const auto& c : m.extra_columns) out += "," + c;
  out += "\n";
  for (const auto& r : m.rows) {
    out += r.video_id + "," + r.bundle_path + "," + r.model_label + "," +
           (r.human_score ? format_shortest(*r.human_score) : std::string());
    for (double e : r.extras) out += "," + format_shortest(e);
    out += "\n";
  }
  return out;
}

}  // namespace wcs
