#include "mcse/binary_dump.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "mcse/error.hpp"

namespace mcse {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  }

  void i32(std::size_t v) {
    require(v <= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()),
            ErrorCode::kInvalidArgument, "header field does not fit in int32");
    put(to_le(static_cast<std::int32_t>(v)));
  }
  void f32(double v) { put(to_le(static_cast<float>(v))); }

  void close() {
    out_.close();
    if (!out_) fail(ErrorCode::kIo, "write failed for '" + path_.string() + "'");
  }

 private:
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }

  std::size_t i32() {
    const auto v = to_le(get<std::int32_t>());
    require(v >= 0, ErrorCode::kFormat, "negative header field in '" + path_.string() + "'");
    return static_cast<std::size_t>(v);
  }
  double f32() { return static_cast<double>(to_le(get<float>())); }

  void expect_end() {
    in_.peek();
    require(in_.eof(), ErrorCode::kFormat, "trailing bytes in '" + path_.string() + "'");
  }

 private:
  template <typename T>
  T get() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    require(in_.gcount() == sizeof v, ErrorCode::kFormat, "truncated file '" + path_.string() + "'");
    return v;
  }

  std::filesystem::path path_;
  std::ifstream in_;
};

std::size_t checked_product(std::size_t a, std::size_t b) {
  require(b == 0 || a <= (std::size_t{1} << 40) / b, ErrorCode::kFormat, "header dimensions too large");
  return a * b;
}

}  // namespace

void write_spectrogram(const Spectrogram& spec, const std::filesystem::path& path) {
  Writer w(path);
  w.i32(spec.channels());
  w.i32(spec.frames());
  w.i32(spec.bins());
  w.i32(static_cast<std::size_t>(std::lround(spec.sample_rate())));
  w.i32(spec.config().window_length);
  w.i32(spec.config().hop);
  for (const cplx& z : spec.data()) {
    w.f32(z.real());
    w.f32(z.imag());
  }
  w.close();
}

SpectrogramDump read_spectrogram(const std::filesystem::path& path) {
  Reader r(path);
  SpectrogramDump d;
  d.channels = r.i32();
  d.frames = r.i32();
  d.bins = r.i32();
  d.sample_rate = static_cast<double>(r.i32());
  d.window_length = r.i32();
  d.hop = r.i32();
  d.coeffs.resize(checked_product(checked_product(d.channels, d.frames), d.bins));
  for (cplx& z : d.coeffs) {
    const double re = r.f32();
    z = {re, r.f32()};
  }
  r.expect_end();
  return d;
}

void write_mask(const Mask& mask, const std::filesystem::path& path) {
  Writer w(path);
  w.i32(mask.frames);
  w.i32(mask.bins);
  for (double g : mask.gains) w.f32(g);
  w.close();
}

Mask read_mask(const std::filesystem::path& path) {
  Reader r(path);
  Mask m;
  m.frames = r.i32();
  m.bins = r.i32();
  m.gains.resize(checked_product(m.frames, m.bins));
  for (double& g : m.gains) g = r.f32();
  r.expect_end();
  return m;
}

void write_calibration(const CalibrationFilter& filter, const std::filesystem::path& path) {
  require(filter.phase.size() == filter.channels * filter.bins, ErrorCode::kShapeMismatch,
          "calibration phase matrix has the wrong size");
  Writer w(path);
  w.i32(filter.channels);
  w.i32(filter.bins);
  w.i32(static_cast<std::size_t>(filter.stage));
  w.i32(static_cast<std::size_t>(std::lround(filter.sample_rate)));
  w.i32(filter.fft_size);
  for (double p : filter.phase) w.f32(p);
  w.close();
}

CalibrationFilter read_calibration(const std::filesystem::path& path) {
  Reader r(path);
  CalibrationFilter f;
  f.channels = r.i32();
  f.bins = r.i32();
  const std::size_t stage = r.i32();
  require(stage <= 1, ErrorCode::kFormat, "unknown calibration stage in '" + path.string() + "'");
  f.stage = static_cast<CalibrationStage>(stage);
  f.sample_rate = static_cast<double>(r.i32());
  f.fft_size = r.i32();
  require(f.channels > 0 && f.sample_rate > 0.0 && f.fft_size / 2 + 1 == f.bins, ErrorCode::kFormat,
          "inconsistent calibration header in '" + path.string() + "'");
  f.phase.resize(checked_product(f.channels, f.bins));
  for (double& p : f.phase) {
    p = r.f32();
    require(std::isfinite(p), ErrorCode::kFormat, "non-finite phase in '" + path.string() + "'");
  }
  r.expect_end();
  return f;
}

void write_mask_summary_csv(const std::vector<MaskSummaryRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.precision(9);
  out << "id,mean_msc,mean_pdm,mean_gain\n";
  for (const MaskSummaryRow& row : rows) {
    out << row.id << ',';
    if (row.msc >= 0.0) out << row.msc;
    out << ',';
    if (row.pdm >= 0.0) out << row.pdm;
    out << ',' << row.gain << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace mcse
