#include "oclust/io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace oclust {

std::string format_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_double(const std::string& tok, std::size_t line_no, const char* what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

RttmTracks read_rttm(std::istream& in) {
  RttmTracks tracks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == ';' || tok[0][0] == '#') continue;
    if (tok.size() < 8 || tok[0] != "SPEAKER") {
      throw DataError("line " + std::to_string(line_no) + ": malformed RTTM line");
    }
    Segment seg;
    seg.start = parse_double(tok[3], line_no, "tbeg");
    seg.duration = parse_double(tok[4], line_no, "tdur");
    seg.speaker = tok[7];
    if (seg.start < 0.0 || !(seg.duration > 0.0)) {
      throw DataError("line " + std::to_string(line_no) + ": segment must have tbeg >= 0 and tdur > 0");
    }
    tracks[tok[1]].segments.push_back(std::move(seg));
  }
  return tracks;
}

void write_rttm(std::ostream& out, const std::string& file_id, const SegmentTrack& track) {
  for (const auto& s : track.segments) {
    out << "SPEAKER " << file_id << " 1 " << format_shortest(s.start) << ' '
        << format_shortest(s.duration) << " <NA> <NA> " << s.speaker << " <NA> <NA>\n";
  }
}

void write_rttm(std::ostream& out, const RttmTracks& tracks) {
  for (const auto& [id, track] : tracks) write_rttm(out, id, track);
}

EmbeddingStream read_stream(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("line 1: missing stream header");
  strip_cr(line);
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "t_start" || header[1] != "t_end") {
    throw DataError("line 1: header must start with t_start,t_end");
  }
  const bool has_speaker = header.size() > 2 && header[2] == "speaker";
  const std::size_t first_feat = has_speaker ? 3 : 2;
  const std::size_t dim = header.size() - first_feat;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[first_feat + k] != "f_" + std::to_string(k)) {
      throw DataError("line 1: expected column f_" + std::to_string(k));
    }
  }
  if (dim == 0) throw DataError("line 1: no feature columns");

  EmbeddingStream stream;
  std::size_t line_no = 1;
  double prev_end = -1.0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    StreamRecord rec;
    rec.t_start = parse_double(cells[0], line_no, "t_start");
    rec.t_end = parse_double(cells[1], line_no, "t_end");
    if (!(rec.t_end > rec.t_start) || rec.t_start < prev_end) {
      throw DataError("line " + std::to_string(line_no) +
                      ": intervals must be time-ordered and non-overlapping");
    }
    prev_end = rec.t_end;
    if (has_speaker) rec.speaker = cells[2];
    rec.features.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = parse_double(cells[first_feat + k], line_no, "feature");
      if (!std::isfinite(v)) throw DataError("line " + std::to_string(line_no) + ": non-finite feature");
      rec.features.push_back(v);
    }
    stream.records.push_back(std::move(rec));
  }
  return stream;
}

void write_stream(std::ostream& out, const EmbeddingStream& stream, bool with_speaker) {
  const std::size_t dim = stream.dim();
  out << "t_start,t_end";
  if (with_speaker) out << ",speaker";
  for (std::size_t k = 0; k < dim; ++k) out << ",f_" << k;
  out << '\n';
  for (const auto& r : stream.records) {
    if (r.features.size() != dim) throw DataError("stream records differ in dimension");
    out << format_exact(r.t_start) << ',' << format_exact(r.t_end);
    if (with_speaker) out << ',' << r.speaker;
    for (double v : r.features) out << ',' << format_exact(v);
    out << '\n';
  }
}

namespace {

template <typename Fn>
auto with_input(const std::string& path, Fn&& fn) {
  if (path == "-") return fn(std::cin);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return fn(in);
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  fn(out);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace

RttmTracks read_rttm_file(const std::string& path) {
  return with_input(path, [](std::istream& in) { return read_rttm(in); });
}

void write_rttm_file(const std::string& path, const RttmTracks& tracks) {
  with_output(path, [&](std::ostream& out) { write_rttm(out, tracks); });
}

EmbeddingStream read_stream_file(const std::string& path) {
  return with_input(path, [](std::istream& in) { return read_stream(in); });
}

void write_stream_file(const std::string& path, const EmbeddingStream& stream) {
  bool any_label = false;
  for (const auto& r : stream.records) any_label = any_label || !r.speaker.empty();
  with_output(path, [&](std::ostream& out) { write_stream(out, stream, any_label); });
}

}  // namespace oclust
