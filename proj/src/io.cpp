#include "snv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace snv {

ParseError::ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error([&] {
        std::string msg = source;
        if (line > 0) msg += ":" + std::to_string(line);
        if (column > 0) msg += ":" + std::to_string(column);
        return msg + ": " + what;
      }()),
      source_(std::move(source)), line_(line), column_(column) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

struct Cell {
  std::string_view text;
  std::size_t column;
};

std::vector<Cell> split(std::string_view line) {
  std::vector<Cell> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    const auto end = comma == std::string_view::npos ? line.size() : comma;
    const auto raw = line.substr(start, end - start);
    const auto lead = raw.find_first_not_of(" \t");
    cells.push_back({trim(raw), start + 1 + (lead == std::string_view::npos ? 0 : lead)});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream f(path, mode);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return f;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  return f;
}

} // namespace

CsvTable read_csv(std::istream& in, const std::string& source, std::size_t min_columns, bool allow_empty) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto cells = split(body);
    std::vector<double> row;
    row.reserve(cells.size());
    bool numeric = true;
    std::size_t bad_col = 0;
    for (const auto& c : cells) {
      double v;
      if (c.text.empty() && allow_empty) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else if (parse_double(c.text, v)) {
        if (!std::isfinite(v)) throw ParseError(source, lineno, c.column, "non-finite value");
        row.push_back(v);
      } else {
        numeric = false;
        bad_col = c.column;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        for (const auto& c : cells) t.header.emplace_back(c.text);
        first = false;
        continue;
      }
      throw ParseError(source, lineno, bad_col, "expected a number");
    }
    first = false;
    if (row.size() < min_columns)
      throw ParseError(source, lineno, 0,
                       "expected " + std::to_string(min_columns) + " columns, got " + std::to_string(row.size()));
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(lineno);
  }
  return t;
}

CsvTable read_csv_file(const std::string& path, std::size_t min_columns, bool allow_empty) {
  auto f = open_in(path);
  return read_csv(f, path, min_columns, allow_empty);
}

Spectrum read_spectrum_csv(const std::string& path, double instrument_fwhm_ghz) {
  const auto t = read_csv_file(path, 2);
  std::vector<double> wl, counts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0 && !(t.rows[i][0] > t.rows[i - 1][0]))
      throw ParseError(path, t.line_numbers[i], 1, "wavelength grid must be strictly increasing");
    if (t.rows[i][1] < 0.0) throw ParseError(path, t.line_numbers[i], 2, "negative counts");
    wl.push_back(t.rows[i][0]);
    counts.push_back(t.rows[i][1]);
  }
  if (wl.size() < 2) throw ParseError(path, 0, 0, "spectrum needs at least 2 samples");
  return Spectrum(std::move(wl), std::move(counts), instrument_fwhm_ghz);
}

TempSeries read_temp_series_csv(const std::string& path) {
  const auto t = read_csv_file(path, 1, true);
  TempSeries s;
  auto cell = [](const std::vector<double>& r, std::size_t i) -> std::optional<double> {
    if (i >= r.size() || std::isnan(r[i])) return std::nullopt;
    return r[i];
  };
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r.size() > 7) throw ParseError(path, t.line_numbers[i], 8, "too many columns");
    TempPoint p;
    const auto tk = cell(r, 0);
    if (!tk) throw ParseError(path, t.line_numbers[i], 1, "missing temperature");
    p.t_k = *tk;
    p.linewidth_ghz = cell(r, 1);
    p.linewidth_err = cell(r, 2);
    p.shift_ghz = cell(r, 3);
    p.shift_err = cell(r, 4);
    p.dw = cell(r, 5);
    p.dw_err = cell(r, 6);
    if (!s.entries.empty() && !(p.t_k > s.entries.back().t_k))
      throw ParseError(path, t.line_numbers[i], 1, "temperatures must be strictly increasing");
    for (std::size_t c : {2u, 4u, 6u})
      if (auto e = cell(r, c); e && !(*e > 0.0)) throw ParseError(path, t.line_numbers[i], c + 1, "error must be > 0");
    s.entries.push_back(p);
  }
  return s;
}

std::vector<std::pair<double, double>> read_xy_csv(const std::string& path) {
  const auto t = read_csv_file(path, 2);
  std::vector<std::pair<double, double>> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.emplace_back(r[0], r[1]);
  return out;
}

TcspcHistogram read_histogram_csv(const std::string& path) {
  const auto t = read_csv_file(path, 2);
  if (t.rows.size() < 2) throw ParseError(path, 0, 0, "histogram needs at least 2 bins");
  TcspcHistogram h;
  h.bin_width_ns = t.rows[1][0] - t.rows[0][0];
  if (!(h.bin_width_ns > 0.0)) throw ParseError(path, t.line_numbers[1], 1, "bin centres must increase");
  const double first = t.rows[0][0] / h.bin_width_ns - 0.5;
  const double k = std::round(first);
  if (std::abs(first - k) > 1e-6 || k < 0) throw ParseError(path, t.line_numbers[0], 1, "bins must start at 0 ns");
  h.counts.assign(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0 && std::abs(t.rows[i][0] - t.rows[i - 1][0] - h.bin_width_ns) > 1e-6 * h.bin_width_ns)
      throw ParseError(path, t.line_numbers[i], 1, "bins must be uniform");
    if (t.rows[i][1] < 0.0) throw ParseError(path, t.line_numbers[i], 2, "negative counts");
    h.counts.push_back(t.rows[i][1]);
  }
  h.detected = static_cast<std::uint64_t>(std::llround(h.total()));
  return h;
}

bool decode_record(const unsigned char* buf, PhotonRecord& r) {
  std::uint64_t ts = 0;
  for (int b = 7; b >= 0; --b) ts = (ts << 8) | buf[b];
  if (ts > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) return false;
  r.timestamp_ps = static_cast<std::int64_t>(ts);
  r.channel = buf[8];
  return r.channel <= 1;
}

namespace {

void encode_record(const PhotonRecord& r, unsigned char* buf) {
  auto ts = static_cast<std::uint64_t>(r.timestamp_ps);
  for (int b = 0; b < 8; ++b) {
    buf[b] = static_cast<unsigned char>(ts & 0xff);
    ts >>= 8;
  }
  buf[8] = r.channel;
}

} // namespace

StreamWriter::StreamWriter(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
  if (!f_) throw std::runtime_error("cannot write '" + path + "'");
}

StreamWriter::~StreamWriter() {
  if (f_) std::fclose(f_);
}

void StreamWriter::write(const PhotonRecord& r) {
  unsigned char buf[9];
  encode_record(r, buf);
  if (std::fwrite(buf, 1, 9, f_) != 9) throw std::runtime_error("stream write failed");
  ++n_;
}

void write_stream_binary(const std::string& path, const PhotonStream& s) {
  StreamWriter w(path);
  for (const auto& r : s.records) w.write(r);
}

PhotonStream read_stream_binary(const std::string& path) {
  PhotonStream s;
  std::int64_t last = 0;
  for_each_record(path, [&](const PhotonRecord& r) {
    if (r.timestamp_ps < last)
      throw ParseError(path, 0, 0, "timestamps decrease at record " + std::to_string(s.records.size()));
    last = r.timestamp_ps;
    s.records.push_back(r);
  });
  return s;
}

void write_stream_csv(const std::string& path, const PhotonStream& s) {
  auto f = open_out(path);
  f << "timestamp_ps,channel\n";
  for (const auto& r : s.records) f << r.timestamp_ps << ',' << static_cast<int>(r.channel) << '\n';
}

PhotonStream read_stream_csv(const std::string& path) {
  auto f = open_in(path);
  PhotonStream s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto cells = split(body);
    std::int64_t ts = 0;
    int ch = 0;
    const auto& c0 = cells[0].text;
    if (std::from_chars(c0.data(), c0.data() + c0.size(), ts).ptr != c0.data() + c0.size() || c0.empty()) {
      if (s.records.empty() && lineno == 1) continue; // header
      throw ParseError(path, lineno, cells[0].column, "expected integer timestamp");
    }
    if (cells.size() < 2) throw ParseError(path, lineno, 0, "expected 2 columns");
    const auto& c1 = cells[1].text;
    if (c1.empty() || std::from_chars(c1.data(), c1.data() + c1.size(), ch).ptr != c1.data() + c1.size() || ch < 0 ||
        ch > 1)
      throw ParseError(path, lineno, cells[1].column, "channel must be 0 or 1");
    if (ts < 0 || (!s.records.empty() && ts < s.records.back().timestamp_ps))
      throw ParseError(path, lineno, cells[0].column, "timestamps must be non-negative and non-decreasing");
    s.records.push_back({ts, static_cast<std::uint8_t>(ch)});
  }
  return s;
}

PhotonStream read_stream(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return read_stream_csv(path);
  return read_stream_binary(path);
}

void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n' << std::setprecision(12);
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) f << (c ? "," : "") << columns[c][r];
    f << '\n';
  }
}

void write_curve_csv(const std::string& path, const CorrelationCurve& c) {
  write_columns_csv(path, {"bin_center_ns", "g2", "error"}, {c.tau_ns, c.g2, c.error});
}

void write_histogram_csv(const std::string& path, const TcspcHistogram& h) {
  std::vector<double> centre(h.counts.size()), err(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    centre[i] = h.bin_centre_ns(i);
    err[i] = std::sqrt(h.counts[i]);
  }
  write_columns_csv(path, {"bin_center_ns", "counts", "error"}, {centre, h.counts, err});
}

void write_spectrum_csv(const std::string& path, const Spectrum& s) {
  write_columns_csv(path, {"wavelength_nm", "counts"},
                    {{s.wavelength_nm().begin(), s.wavelength_nm().end()}, {s.counts().begin(), s.counts().end()}});
}

void write_ple_csv(const std::string& path, const PLETrace& t) {
  std::vector<double> det, rate, expected, charge, centre;
  for (const auto& p : t.points) {
    det.push_back(p.detuning_ghz);
    rate.push_back(p.count_rate_cps);
    expected.push_back(p.expected_rate_cps);
    charge.push_back(p.charge == ChargeState::negative ? 0.0 : 1.0);
    centre.push_back(p.line_centre_ghz);
  }
  write_columns_csv(path, {"detuning_ghz", "count_rate_cps", "expected_rate_cps", "neutral", "line_centre_ghz"},
                    {det, rate, expected, charge, centre});
}

void write_text_file(const std::string& path, const std::string& text) {
  auto f = open_out(path, std::ios::out | std::ios::binary);
  f << text;
}

std::string read_text_file(const std::string& path) {
  auto f = open_in(path, std::ios::in | std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace snv
