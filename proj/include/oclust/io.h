#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

#include "oclust/segment.h"
#include "oclust/stream.h"

namespace oclust {

// Malformed input or inconsistent data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tracks keyed by RTTM file id.
using RttmTracks = std::map<std::string, SegmentTrack>;

// Lines: SPEAKER <file> 1 <tbeg> <tdur> <NA> <NA> <name> <NA> <NA>
// Blank lines and lines starting with ';' or '#' are ignored.
RttmTracks read_rttm(std::istream& in);
void write_rttm(std::ostream& out, const RttmTracks& tracks);
void write_rttm(std::ostream& out, const std::string& file_id, const SegmentTrack& track);

// CSV header: t_start,t_end[,speaker],f_0,...,f_{D-1}. Values are written
// with 17 significant digits.
EmbeddingStream read_stream(std::istream& in);
void write_stream(std::ostream& out, const EmbeddingStream& stream, bool with_speaker = true);

// Path-based helpers. "-" selects stdin / stdout.
RttmTracks read_rttm_file(const std::string& path);
void write_rttm_file(const std::string& path, const RttmTracks& tracks);
EmbeddingStream read_stream_file(const std::string& path);
void write_stream_file(const std::string& path, const EmbeddingStream& stream);

// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);
// 17 significant digits.
std::string format_exact(double v);

}  // namespace oclust
