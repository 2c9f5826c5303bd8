#pragma once

#include <cstdio>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "snv/photon_analysis.hpp"
#include "snv/photon_sim.hpp"
#include "snv/temp_laws.hpp"
#include "snv/units.hpp"

namespace snv {

/// Malformed input. `line` and `column` are 1-based; 0 when not applicable.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what);
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::string source_;
  std::size_t line_, column_;
};

/// Numeric table from comma separated text. Blank lines and lines starting
/// with '#' are skipped; a first row that does not parse as numbers is taken
/// as the header. Empty cells become NaN when `allow_empty`.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers; // source line of each row
};

CsvTable read_csv(std::istream& in, const std::string& source, std::size_t min_columns, bool allow_empty = false);
CsvTable read_csv_file(const std::string& path, std::size_t min_columns, bool allow_empty = false);

/// wavelength_nm, counts
Spectrum read_spectrum_csv(const std::string& path, double instrument_fwhm_ghz = 10.0);
/// T_K, linewidth_GHz, lw_err, shift_GHz, shift_err, dw, dw_err
TempSeries read_temp_series_csv(const std::string& path);
/// Two numeric columns.
std::vector<std::pair<double, double>> read_xy_csv(const std::string& path);
/// bin_center_ns, counts [, error]
TcspcHistogram read_histogram_csv(const std::string& path);

/// Packed little-endian records: u64 timestamp_ps, u8 channel.
void write_stream_binary(const std::string& path, const PhotonStream& s);
PhotonStream read_stream_binary(const std::string& path);
/// Header "timestamp_ps,channel".
void write_stream_csv(const std::string& path, const PhotonStream& s);
PhotonStream read_stream_csv(const std::string& path);
/// Dispatch on extension: .csv is text, anything else binary.
PhotonStream read_stream(const std::string& path);

/// Streaming binary writer, so long acquisitions need not sit in memory.
class StreamWriter {
public:
  explicit StreamWriter(const std::string& path);
  ~StreamWriter();
  StreamWriter(const StreamWriter&) = delete;
  StreamWriter& operator=(const StreamWriter&) = delete;
  void write(const PhotonRecord& r);
  std::uint64_t written() const { return n_; }

private:
  std::FILE* f_;
  std::uint64_t n_ = 0;
};

/// Visits every record of a binary stream file in order.
template <typename F>
void for_each_record(const std::string& path, F&& f);

void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns);
/// bin_center, value, error
void write_curve_csv(const std::string& path, const CorrelationCurve& c);
void write_histogram_csv(const std::string& path, const TcspcHistogram& h);
void write_spectrum_csv(const std::string& path, const Spectrum& s);
void write_ple_csv(const std::string& path, const PLETrace& t);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// -- implementation ----------------------------------------------------------

bool decode_record(const unsigned char* buf, PhotonRecord& r);

template <typename F>
void for_each_record(const std::string& path, F&& f) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open '" + path + "'");
  unsigned char buf[9 * 4096];
  std::size_t index = 0;
  for (;;) {
    const std::size_t got = std::fread(buf, 1, sizeof buf, fp);
    if (got % 9 != 0 && std::feof(fp)) {
      std::fclose(fp);
      throw ParseError(path, 0, 0, "truncated record at index " + std::to_string(index + got / 9));
    }
    for (std::size_t off = 0; off + 9 <= got; off += 9, ++index) {
      PhotonRecord r;
      if (!decode_record(buf + off, r)) {
        std::fclose(fp);
        throw ParseError(path, 0, 0, "bad record at index " + std::to_string(index));
      }
      f(r);
    }
    if (got < sizeof buf) break;
  }
  std::fclose(fp);
}

} // namespace snv
